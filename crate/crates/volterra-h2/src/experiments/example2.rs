//! Nonlinear equation `u(t) = −∫ (u(τ) − sin τ)³ / √(π(t−τ)) dτ` on
//! `[0, 60]`, with the kernel known through `k̂(λ) = λ^{−1/2}`.

use std::time::Instant;

use nalgebra::DMatrix;

use super::{fill_orders, grid_error, millis, ExperimentRecord};
use crate::dense_eval::DenseEvaluator;
use crate::evaluator::Evaluator;
use crate::h2_eval::H2Evaluator;
use crate::kernel::operator::{Config, Scheme};
use crate::kernel::power_transfer;
use crate::solvers::{solve_vie, VieProblem};
use crate::Error;

pub const T: f64 = 60.0;
pub const MU: f64 = 0.5;
pub const COMPARISON_CELLS: usize = 32;

#[derive(Debug, Clone, Copy)]
pub struct Example2 {
    pub p: usize,
    pub q: usize,
    pub n_min: usize,
    pub r: usize,
    pub scheme: Scheme,
}

impl Default for Example2 {
    fn default() -> Self {
        Example2 { p: 2, q: 8, n_min: 16, r: 15, scheme: Scheme::ConvolutionQuadrature }
    }
}

pub fn problem() -> VieProblem {
    VieProblem::new(
        1,
        |t, u| vec![-(u[0] - t.sin()).powi(3)],
        |t, u| DMatrix::from_element(1, 1, -3.0 * (u[0] - t.sin()).powi(2)),
        |_| vec![0.0],
    )
}

pub fn run_one(cfg: &Example2, n: usize) -> Result<(Vec<Vec<f64>>, ExperimentRecord), Error> {
    let h = T / n as f64;
    let start = Instant::now();
    let config = Config::new(cfg.p, cfg.q, h).n_min(cfg.n_min).scheme(cfg.scheme).contour_nodes(cfg.r);
    let mut ev = H2Evaluator::new(&power_transfer(MU)?, config, 1)?;
    let setup = start.elapsed();
    let start = Instant::now();
    let tr = solve_vie(&mut ev, &problem(), n)?;
    let run = start.elapsed();
    let c = ev.counters();
    let rec = ExperimentRecord {
        example: "example2".into(),
        p: cfg.p,
        q: cfg.q,
        nmin: cfg.n_min,
        r: cfg.r,
        n,
        h,
        error: 0.0,
        order: None,
        setup_ms: millis(setup),
        run_ms: millis(run),
        peak_g_buffers: c.peak_buffers,
        block_multiplies: c.block_multiplies(),
    };
    Ok((tr.endpoint_values(), rec))
}

/// Grid values computed with the dense evaluator.
pub fn run_dense(cfg: &Example2, n: usize) -> Result<Vec<Vec<f64>>, Error> {
    let config = Config::new(cfg.p, cfg.q, T / n as f64).scheme(cfg.scheme).contour_nodes(cfg.r);
    let mut ev = DenseEvaluator::new(&power_transfer(MU)?, config, 1, n)?;
    Ok(solve_vie(&mut ev, &problem(), n)?.endpoint_values())
}

/// Self-convergence sweep: each `N = 2^k` is compared with the run at `2N`.
pub fn run_example2(levels: std::ops::RangeInclusive<u32>, cfg: &Example2) -> Result<Vec<ExperimentRecord>, Error> {
    let n_c = COMPARISON_CELLS.min(1 << *levels.start());
    let mut out = Vec::new();
    let (lo, hi) = (*levels.start(), *levels.end());
    let mut prev = run_one(cfg, 1 << lo)?;
    for k in lo..=hi {
        let next = run_one(cfg, 1 << (k + 1))?;
        let (y, mut rec) = prev;
        rec.error = grid_error(&y, &next.0, n_c);
        out.push(rec);
        prev = next;
    }
    fill_orders(&mut out);
    Ok(out)
}
