//! Linear test problem `y′ = −2ty + 5cos 5t`, `y(0) = 2`, on `[0, 10]`,
//! solved through `y(t) = 2e^{−t²} + ∫ e^{s²−t²}·5cos(5s) ds`.

use std::time::Instant;

use nalgebra::DMatrix;

use super::{fill_orders, grid_error, millis, ExperimentRecord};
use crate::dense_eval::DenseEvaluator;
use crate::evaluator::Evaluator;
use crate::h2_eval::H2Evaluator;
use crate::kernel::gauss_voc;
use crate::kernel::operator::{Config, Scheme};
use crate::solvers::{reference_ode_radau, variation_of_constants};
use crate::Error;

pub const T: f64 = 10.0;
/// Cells of the comparison grid.
pub const COMPARISON_CELLS: usize = 32;

#[derive(Debug, Clone, Copy)]
pub struct Example1 {
    pub p: usize,
    pub q: usize,
    pub n_min: usize,
    pub scheme: Scheme,
    /// Steps of the ODE reference.
    pub n_ref: usize,
}

impl Default for Example1 {
    fn default() -> Self {
        Example1 { p: 2, q: 16, n_min: 16, scheme: Scheme::RadauQuadrature, n_ref: 1 << 16 }
    }
}

pub fn forcing(t: f64) -> f64 {
    5.0 * (5.0 * t).cos()
}

pub fn additive(t: f64) -> f64 {
    2.0 * (-t * t).exp()
}

/// Reference values at `t = mT/n_ref`, `m = 1..=n_ref`.
pub fn reference(n_ref: usize) -> Result<Vec<Vec<f64>>, Error> {
    let y = reference_ode_radau(
        |t, y| vec![-2.0 * t * y[0] + forcing(t)],
        |t, _| DMatrix::from_element(1, 1, -2.0 * t),
        &[2.0],
        T,
        n_ref,
        3,
    )?;
    Ok(y[1..].to_vec())
}

/// One run with `n` steps; returns grid values and the record.
pub fn run_one(cfg: &Example1, n: usize) -> Result<(Vec<Vec<f64>>, ExperimentRecord), Error> {
    let h = T / n as f64;
    let start = Instant::now();
    let config = Config::new(cfg.p, cfg.q, h).n_min(cfg.n_min).scheme(cfg.scheme);
    let mut ev = H2Evaluator::new(&gauss_voc(), config, 1)?;
    let setup = start.elapsed();
    let start = Instant::now();
    let y = variation_of_constants(&mut ev, forcing, additive, n)?;
    let run = start.elapsed();
    let c = ev.counters();
    let rec = ExperimentRecord {
        example: "example1".into(),
        p: cfg.p,
        q: cfg.q,
        nmin: cfg.n_min,
        r: 0,
        n,
        h,
        error: 0.0,
        order: None,
        setup_ms: millis(setup),
        run_ms: millis(run),
        peak_g_buffers: c.peak_buffers,
        block_multiplies: c.block_multiplies(),
    };
    Ok((y.into_iter().map(|v| vec![v]).collect(), rec))
}

/// Grid values computed with the dense evaluator.
pub fn run_dense(cfg: &Example1, n: usize) -> Result<Vec<Vec<f64>>, Error> {
    let config = Config::new(cfg.p, cfg.q, T / n as f64).scheme(cfg.scheme);
    let mut ev = DenseEvaluator::new(&gauss_voc(), config, 1, n)?;
    let y = variation_of_constants(&mut ev, forcing, additive, n)?;
    Ok(y.into_iter().map(|v| vec![v]).collect())
}

/// Convergence sweep over `N = 2^k`, `k ∈ levels`.
pub fn run_example1(levels: std::ops::RangeInclusive<u32>, cfg: &Example1) -> Result<Vec<ExperimentRecord>, Error> {
    let reference = reference(cfg.n_ref)?;
    let n_c = COMPARISON_CELLS.min(1 << *levels.start());
    let mut out = Vec::new();
    for k in levels {
        let (y, mut rec) = run_one(cfg, 1 << k)?;
        rec.error = grid_error(&y, &reference, n_c);
        out.push(rec);
    }
    fill_orders(&mut out);
    Ok(out)
}
