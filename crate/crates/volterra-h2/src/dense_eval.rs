//! Uncompressed reference evaluator: every separated cell pair is coupled
//! through its own interpolated kernel block, and all data is kept.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::evaluator::{run_sampled, Counters, Evaluator};
use crate::kernel::operator::{Config, Operator};
use crate::kernel::Kernel;
use crate::Error;

pub struct DenseEvaluator {
    op: Operator,
    d: usize,
    data: Vec<DMatrix<f64>>,
    lag_cache: HashMap<usize, DMatrix<f64>>,
    pending: Option<DMatrix<f64>>,
    counters: Counters,
}

impl DenseEvaluator {
    /// `capacity` bounds the number of steps (convolution quadrature weights
    /// are precomputed up to it).
    pub fn new(kernel: &Kernel, config: Config, d: usize, capacity: usize) -> Result<Self, Error> {
        let config = Config { cq_weights: Some(capacity.max(2) + 1), farfield: false, ..config.n_min(1) };
        let op = Operator::new(kernel, config)?;
        Ok(DenseEvaluator { op, d, data: Vec::new(), lag_cache: HashMap::new(), pending: None, counters: Counters::default() })
    }

    fn coupling(&mut self, m: usize, n: usize) -> Result<DMatrix<f64>, Error> {
        if !self.op.is_convolution() {
            self.counters.blocks_built += 1;
            return self.op.cell_block(m, n);
        }
        if let Some(b) = self.lag_cache.get(&(m - n)) {
            return Ok(b.clone());
        }
        let b = self.op.cell_block(m, n)?;
        self.counters.blocks_built += 1;
        self.lag_cache.insert(m - n, b.clone());
        Ok(b)
    }
}

impl Evaluator for DenseEvaluator {
    fn operator(&self) -> &Operator {
        &self.op
    }

    fn steps(&self) -> usize {
        self.data.len()
    }

    fn history_part(&mut self) -> Result<DMatrix<f64>, Error> {
        if self.pending.is_some() {
            return Err(Error::InvalidArgument("history_part called twice without commit".into()));
        }
        let m = self.data.len() + 1;
        let mut w = DMatrix::zeros(self.op.stages(), self.d);
        for n in 1..m.saturating_sub(1) {
            let b = self.coupling(m, n)?;
            w += b * &self.data[n - 1];
            self.counters.cell_multiplies += 1;
        }
        if m >= 2 {
            let (prev, _) = self.op.near(m)?;
            w += prev * &self.data[m - 2];
        }
        self.pending = Some(w.clone());
        Ok(w)
    }

    fn commit(&mut self, f: DMatrix<f64>) -> Result<DMatrix<f64>, Error> {
        let w = self.pending.take().ok_or_else(|| Error::InvalidArgument("commit without history_part".into()))?;
        let m = self.data.len() + 1;
        let (_, diag) = self.op.near(m)?;
        if f.shape() != w.shape() {
            return Err(Error::InvalidArgument(format!("data block {:?}, expected {:?}", f.shape(), w.shape())));
        }
        let y = diag * &f + w;
        self.data.push(f);
        self.counters.peak_buffers = self.data.len();
        Ok(y)
    }

    fn counters(&self) -> Counters {
        self.counters
    }

    fn counters_mut(&mut self) -> &mut Counters {
        &mut self.counters
    }
}

/// All `y^m`, `m = 1..=n`, for data sampled at the collocation points.
pub fn dense_evaluate(
    kernel: &Kernel,
    config: Config,
    n: usize,
    d: usize,
    sampler: impl FnMut(f64) -> Vec<f64>,
) -> Result<Vec<DMatrix<f64>>, Error> {
    let mut ev = DenseEvaluator::new(kernel, config, d, n)?;
    run_sampled(&mut ev, n, d, sampler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{difference_monomial, one};

    #[test]
    fn constant_kernel_single_stage() {
        let y = dense_evaluate(&one(), Config::new(1, 0, 1.0), 10, 1, |_| vec![1.0]).unwrap();
        for (m, v) in y.iter().enumerate() {
            assert!((v[(0, 0)] - (m + 1) as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn plane_kernel_exact() {
        let h = 0.125;
        let y = dense_evaluate(&difference_monomial(1), Config::new(2, 1, h), 40, 1, |_| vec![1.0]).unwrap();
        let c = [1.0 / 3.0, 1.0];
        for (m, v) in y.iter().enumerate() {
            for j in 0..2 {
                let t = (m as f64 + c[j]) * h;
                assert!((v[(j, 0)] - t * t / 2.0).abs() < 1e-13, "m={m}");
            }
        }
    }

    #[test]
    fn quadratic_data_exact() {
        // k = (t − s)², f = s²: y = t⁵/30, needs three stages
        let h = 0.1;
        let y = dense_evaluate(&difference_monomial(2), Config::new(3, 2, h), 30, 1, |s| vec![s * s]).unwrap();
        let c = crate::basis::radau_nodes(3).unwrap();
        for (m, v) in y.iter().enumerate() {
            for j in 0..3 {
                let t = (m as f64 + c[j]) * h;
                assert!((v[(j, 0)] - t.powi(5) / 30.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cost_is_quadratic() {
        let mut ev = DenseEvaluator::new(&one(), Config::new(1, 0, 1.0), 1, 64).unwrap();
        run_sampled(&mut ev, 64, 1, |_| vec![1.0]).unwrap();
        assert_eq!(ev.counters().cell_multiplies, 62 * 63 / 2);
    }

    #[test]
    fn two_phase_misuse() {
        let mut ev = DenseEvaluator::new(&one(), Config::new(1, 0, 1.0), 1, 4).unwrap();
        assert!(ev.commit(DMatrix::zeros(1, 1)).is_err());
        ev.history_part().unwrap();
        assert!(ev.history_part().is_err());
    }
}
