//! Fast, oblivious evolutionary evaluation.
//!
//! Fine cells are grouped into macro intervals of `n_min` cells. The
//! farfield of cell `m` in macro interval `M` is everything left of macro
//! `M−1`; it is covered by the dyadic partition of the macro index `M` and
//! represented by per-level moment buffers `g1`, `g2` and local potentials
//! `u`. The two most recent macro intervals are coupled cell by cell from a
//! ring of `2·n_min` data blocks.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;

use crate::evaluator::{Counters, Evaluator};
use crate::hierarchy::{ancestor_index, block_count, coarsening_level, max_level};
use crate::kernel::operator::{Config, Operator};
use crate::kernel::Kernel;
use crate::Error;

#[derive(Debug, Clone)]
struct Level {
    /// Moments of interval `C − 2`.
    g1: DMatrix<f64>,
    /// Moments of interval `C − 3`.
    g2: DMatrix<f64>,
    /// Potential on interval `C`.
    u: DMatrix<f64>,
}

pub struct H2Evaluator {
    op: Operator,
    d: usize,
    m: usize,
    ring: VecDeque<DMatrix<f64>>,
    acc: DMatrix<f64>,
    completed: VecDeque<DMatrix<f64>>,
    levels: Vec<Level>,
    block_cache: HashMap<(usize, usize), DMatrix<f64>>,
    cell_cache: HashMap<usize, DMatrix<f64>>,
    pending: Option<DMatrix<f64>>,
    counters: Counters,
}

impl H2Evaluator {
    pub fn new(kernel: &Kernel, config: Config, d: usize) -> Result<Self, Error> {
        Self::from_operator(Operator::new(kernel, config)?, d)
    }

    pub fn from_operator(op: Operator, d: usize) -> Result<Self, Error> {
        let acc = DMatrix::zeros(op.block_dim(), d);
        Ok(H2Evaluator {
            ring: VecDeque::with_capacity(2 * op.n_min()),
            op,
            d,
            m: 0,
            acc,
            completed: VecDeque::new(),
            levels: Vec::new(),
            block_cache: HashMap::new(),
            cell_cache: HashMap::new(),
            pending: None,
            counters: Counters::default(),
        })
    }

    /// Live moment and potential buffers.
    pub fn live_buffers(&self) -> usize {
        3 * self.levels.len() + self.completed.len() + 1
    }

    /// Hierarchy depth currently allocated.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    fn kernel_block(&mut self, level: usize, row: usize, col: usize) -> Result<DMatrix<f64>, Error> {
        if !self.op.is_convolution() {
            self.counters.blocks_built += 1;
            return self.op.block(level, row, col);
        }
        let key = (level, row - col);
        if let Some(b) = self.block_cache.get(&key) {
            return Ok(b.clone());
        }
        let b = self.op.block(level, row, col)?;
        self.counters.blocks_built += 1;
        self.block_cache.insert(key, b.clone());
        Ok(b)
    }

    fn coupling(&mut self, m: usize, n: usize) -> Result<DMatrix<f64>, Error> {
        if !self.op.is_convolution() {
            return self.op.cell_block(m, n);
        }
        if let Some(b) = self.cell_cache.get(&(m - n)) {
            return Ok(b.clone());
        }
        let b = self.op.cell_block(m, n)?;
        self.cell_cache.insert(m - n, b.clone());
        Ok(b)
    }

    /// Brings the hierarchy from macro row `mac − 1` to `mac` (`mac ≥ 3`).
    fn advance_hierarchy(&mut self, mac: usize) -> Result<(), Error> {
        let top = max_level(mac);
        let lc = coarsening_level(mac);
        let zero = DMatrix::zeros(self.op.block_dim(), self.d);
        while self.levels.len() < top {
            self.levels.push(Level { g1: zero.clone(), g2: zero.clone(), u: zero.clone() });
        }
        // aggregate coarse to fine so that every level reads its children's
        // moments from before this update
        for level in (2..=lc).rev() {
            let (lo, hi) = self.levels.split_at_mut(level - 1);
            let child = &lo[level - 2];
            let parent = &mut hi[0];
            let fresh = self.op.transfer(1) * &child.g2 + self.op.transfer(2) * &child.g1;
            parent.g2 = std::mem::replace(&mut parent.g1, fresh);
            self.counters.transfer_multiplies += 2;
        }
        let newest = self.completed.pop_front().expect("moments of macro interval mac − 2");
        let first = &mut self.levels[0];
        first.g2 = std::mem::replace(&mut first.g1, newest);

        for level in (1..=lc).rev() {
            let c = ancestor_index(mac, level);
            let mut u = self.kernel_block(level, c, c - 2)? * &self.levels[level - 1].g1;
            self.counters.kernel_multiplies += 1;
            if block_count(mac, level)? == 2 {
                u += self.kernel_block(level, c, c - 3)? * &self.levels[level - 1].g2;
                self.counters.kernel_multiplies += 1;
            }
            if level < top {
                let b = 2 - c % 2;
                u += self.op.transfer(b).tr_mul(&self.levels[level].u);
                self.counters.transfer_multiplies += 1;
            }
            self.levels[level - 1].u = u;
        }
        Ok(())
    }
}

impl Evaluator for H2Evaluator {
    fn operator(&self) -> &Operator {
        &self.op
    }

    fn steps(&self) -> usize {
        self.m
    }

    fn history_part(&mut self) -> Result<DMatrix<f64>, Error> {
        if self.pending.is_some() {
            return Err(Error::InvalidArgument("history_part called twice without commit".into()));
        }
        let nm = self.op.n_min();
        let m = self.m + 1;
        let mac = m.div_ceil(nm);
        let pos = m - (mac - 1) * nm;
        if pos == 1 && mac >= 3 {
            self.advance_hierarchy(mac)?;
        }
        let mut w = DMatrix::zeros(self.op.stages(), self.d);
        if mac >= 3 {
            w += self.op.evaluation(pos) * &self.levels[0].u;
        }
        // cells of the two most recent macro intervals, except m − 1
        let first = ((mac.max(2) - 2) * nm + 1).max(1);
        for n in first..m.saturating_sub(1) {
            let b = self.coupling(m, n)?;
            let f = &self.ring[self.ring.len() - (m - n)];
            w += b * f;
            self.counters.cell_multiplies += 1;
        }
        if m >= 2 {
            let (prev, _) = self.op.near(m)?;
            w += prev * self.ring.back().expect("previous cell");
        }
        self.pending = Some(w.clone());
        Ok(w)
    }

    fn commit(&mut self, f: DMatrix<f64>) -> Result<DMatrix<f64>, Error> {
        let w = self.pending.take().ok_or_else(|| Error::InvalidArgument("commit without history_part".into()))?;
        if f.shape() != w.shape() {
            return Err(Error::InvalidArgument(format!("data block {:?}, expected {:?}", f.shape(), w.shape())));
        }
        let nm = self.op.n_min();
        let m = self.m + 1;
        let pos = m - (m.div_ceil(nm) - 1) * nm;
        let (_, diag) = self.op.near(m)?;
        let y = diag * &f + w;
        self.acc += self.op.moment(pos) * &f;
        if self.ring.len() == 2 * nm {
            self.ring.pop_front();
        }
        self.ring.push_back(f);
        if pos == nm {
            let done = std::mem::replace(&mut self.acc, DMatrix::zeros(self.op.block_dim(), self.d));
            self.completed.push_back(done);
        }
        self.m = m;
        self.counters.peak_buffers = self.counters.peak_buffers.max(self.live_buffers());
        Ok(y)
    }

    fn counters(&self) -> Counters {
        self.counters
    }

    fn counters_mut(&mut self) -> &mut Counters {
        &mut self.counters
    }
}
