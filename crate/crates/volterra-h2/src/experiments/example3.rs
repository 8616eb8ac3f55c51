//! One-dimensional fractional diffusion
//! `u = u0 + K_α Δ_x u + g` on `[−a, a]` with transparent boundary
//! conditions `u = −K_{α/2} ∂_n u` at `x = ±a`, where `K_β` has the
//! transfer function `λ^{−β}`.
//!
//! Space is discretized by central differences on `x_i = i·a/M`,
//! `i = −M..M`, with one ghost node on each side carrying the normal
//! derivative.

use std::time::Instant;

use nalgebra::DMatrix;

use super::{fill_orders, grid_error, millis, ExperimentRecord};
use crate::dense_eval::DenseEvaluator;
use crate::evaluator::Evaluator;
use crate::h2_eval::H2Evaluator;
use crate::kernel::operator::{Config, Scheme};
use crate::kernel::power_transfer;
use crate::Error;

pub const COMPARISON_CELLS: usize = 32;

/// Self couplings and the factorization they produced.
type Factored = (DMatrix<f64>, DMatrix<f64>, nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>);

#[derive(Debug, Clone, Copy)]
pub struct FracDiffConfig {
    pub alpha: f64,
    /// Half width of the computational domain.
    pub a: f64,
    /// Grid points per half domain.
    pub m: usize,
    pub u0: fn(f64) -> f64,
    /// Source `g(t, x)`.
    pub g: fn(f64, f64) -> f64,
    pub t: f64,
    pub q: usize,
    pub r: usize,
    pub n_min: usize,
}

fn gaussian(x: f64) -> f64 {
    (-100.0 * x * x).exp()
}

fn no_source(_: f64, _: f64) -> f64 {
    0.0
}

impl Default for FracDiffConfig {
    fn default() -> Self {
        FracDiffConfig { alpha: 2.0 / 3.0, a: 1.0, m: 200, u0: gaussian, g: no_source, t: 1.0, q: 16, r: 30, n_min: 16 }
    }
}

impl FracDiffConfig {
    pub fn dx(&self) -> f64 {
        self.a / self.m as f64
    }

    /// Interior and boundary nodes.
    pub fn nodes(&self) -> Vec<f64> {
        let m = self.m as i64;
        (-m..=m).map(|i| i as f64 * self.dx()).collect()
    }

    pub fn operator_config(&self, p: usize, n: usize) -> Config {
        Config::new(p, self.q, self.t / n as f64)
            .n_min(self.n_min)
            .scheme(Scheme::ConvolutionQuadrature)
            .contour_nodes(self.r)
    }
}

/// Collocation matrix of one step for self couplings `ka` (bulk) and
/// `kb` (boundary). Unknowns are ordered stage-major over
/// `i = −M−1..=M+1`.
fn step_matrix(cfg: &FracDiffConfig, ka: &DMatrix<f64>, kb: &DMatrix<f64>) -> DMatrix<f64> {
    let s = ka.nrows();
    let w = 2 * cfg.m + 3;
    let dx = cfg.dx();
    let (c2, c1) = (1.0 / (dx * dx), 1.0 / (2.0 * dx));
    let mut a = DMatrix::<f64>::identity(s * w, s * w);
    for j in 0..s {
        for i in 1..w - 1 {
            let row = j * w + i;
            for r in 0..s {
                let k = ka[(j, r)];
                a[(row, r * w + i - 1)] -= k * c2;
                a[(row, r * w + i)] += 2.0 * k * c2;
                a[(row, r * w + i + 1)] -= k * c2;
            }
        }
        // ghost rows carry the boundary conditions
        let (left, right) = (j * w, j * w + w - 1);
        a[(left, left)] = 0.0;
        a[(right, right)] = 0.0;
        a[(left, j * w + 1)] += 1.0;
        a[(right, j * w + w - 2)] += 1.0;
        for r in 0..s {
            let k = kb[(j, r)];
            // outward normal derivatives at x = −a and x = a
            a[(left, r * w)] += k * c1;
            a[(left, r * w + 2)] -= k * c1;
            a[(right, r * w + w - 1)] += k * c1;
            a[(right, r * w + w - 3)] -= k * c1;
        }
    }
    a
}

/// Time steps with the two evaluators; returns `u(t^m, x_i)`, `m = 1..=n`.
pub fn solve<E: Evaluator>(cfg: &FracDiffConfig, bulk: &mut E, boundary: &mut E, n: usize) -> Result<Vec<Vec<f64>>, Error> {
    let s = bulk.operator().stages();
    let h = bulk.operator().h();
    let c = bulk.operator().tables.radau.c.clone();
    let w = 2 * cfg.m + 3;
    let nodes = cfg.nodes();
    let u0: Vec<f64> = nodes.iter().map(|&x| (cfg.u0)(x)).collect();
    let (dx, inner) = (cfg.dx(), 2 * cfg.m + 1);
    let mut lu: Option<Factored> = None;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let step = bulk.steps() + 1;
        let wa = bulk.history_part()?;
        let wb = boundary.history_part()?;
        let (ka, kb) = (bulk.self_coupling()?, boundary.self_coupling()?);
        if !matches!(&lu, Some((a, b, _)) if *a == ka && *b == kb) {
            let f = step_matrix(cfg, &ka, &kb).lu();
            lu = Some((ka, kb, f));
        }
        let mut rhs = DMatrix::zeros(s * w, 1);
        for j in 0..s {
            let t = ((step - 1) as f64 + c[j]) * h;
            for i in 0..inner {
                rhs[(j * w + i + 1, 0)] = u0[i] + (cfg.g)(t, nodes[i]) + wa[(j, i)];
            }
            rhs[(j * w, 0)] = -wb[(j, 0)];
            rhs[(j * w + w - 1, 0)] = -wb[(j, 1)];
        }
        let sol = lu.as_ref().expect("factorized").2.solve(&rhs).ok_or(Error::Singular)?;
        let u = |j: usize, i: usize| sol[(j * w + i, 0)];
        let lap = DMatrix::from_fn(s, inner, |j, i| (u(j, i) - 2.0 * u(j, i + 1) + u(j, i + 2)) / (dx * dx));
        let dn = DMatrix::from_fn(s, 2, |j, side| {
            if side == 0 {
                (u(j, 0) - u(j, 2)) / (2.0 * dx)
            } else {
                (u(j, w - 1) - u(j, w - 3)) / (2.0 * dx)
            }
        });
        bulk.commit(lap)?;
        boundary.commit(dn)?;
        out.push((1..=inner).map(|i| u(s - 1, i)).collect());
    }
    Ok(out)
}

/// Run with the fast evaluators.
pub fn run_fast(cfg: &FracDiffConfig, p: usize, n: usize) -> Result<(Vec<Vec<f64>>, ExperimentRecord), Error> {
    let config = cfg.operator_config(p, n);
    let start = Instant::now();
    let mut bulk = H2Evaluator::new(&power_transfer(cfg.alpha)?, config, 2 * cfg.m + 1)?;
    let mut boundary = H2Evaluator::new(&power_transfer(cfg.alpha / 2.0)?, config, 2)?;
    let setup = start.elapsed();
    let start = Instant::now();
    let u = solve(cfg, &mut bulk, &mut boundary, n)?;
    let run = start.elapsed();
    let (a, b) = (bulk.counters(), boundary.counters());
    let rec = ExperimentRecord {
        example: "example3".into(),
        p,
        q: cfg.q,
        nmin: cfg.n_min,
        r: cfg.r,
        n,
        h: config.h,
        error: 0.0,
        order: None,
        setup_ms: millis(setup),
        run_ms: millis(run),
        peak_g_buffers: a.peak_buffers + b.peak_buffers,
        block_multiplies: a.block_multiplies() + b.block_multiplies(),
    };
    Ok((u, rec))
}

/// Run with the dense evaluators.
pub fn run_dense(cfg: &FracDiffConfig, p: usize, n: usize) -> Result<Vec<Vec<f64>>, Error> {
    let config = cfg.operator_config(p, n);
    let mut bulk = DenseEvaluator::new(&power_transfer(cfg.alpha)?, config, 2 * cfg.m + 1, n)?;
    let mut boundary = DenseEvaluator::new(&power_transfer(cfg.alpha / 2.0)?, config, 2, n)?;
    solve(cfg, &mut bulk, &mut boundary, n)
}

/// Largest deviation between the fast and the dense evaluators.
pub fn dense_check(cfg: &FracDiffConfig, p: usize, n: usize) -> Result<f64, Error> {
    let (fast, _) = run_fast(cfg, p, n)?;
    let dense = run_dense(cfg, p, n)?;
    Ok(super::max_deviation(&fast, &dense))
}

/// Self-convergence sweep against a three-stage run on twice the finest grid.
pub fn run_example3(
    levels: std::ops::RangeInclusive<u32>,
    p: usize,
    cfg: &FracDiffConfig,
) -> Result<Vec<ExperimentRecord>, Error> {
    let (reference, _) = run_fast(cfg, 3, 1 << (levels.end() + 1))?;
    let n_c = COMPARISON_CELLS.min(1 << *levels.start());
    let mut out = Vec::new();
    for k in levels {
        let (u, mut rec) = run_fast(cfg, p, 1 << k)?;
        rec.error = grid_error(&u, &reference, n_c);
        out.push(rec);
    }
    fill_orders(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FracDiffConfig {
        FracDiffConfig { m: 20, ..FracDiffConfig::default() }
    }

    #[test]
    fn fast_matches_dense() {
        let dev = dense_check(&small(), 2, 64).unwrap();
        assert!(dev < 1e-8, "{dev:e}");
    }

    #[test]
    fn mass_stays_bounded() {
        let cfg = small();
        let (u, _) = run_fast(&cfg, 2, 32).unwrap();
        let peak0 = 1.0;
        for row in &u {
            assert!(row.iter().all(|v| v.is_finite() && v.abs() <= 1.01 * peak0));
        }
        // symmetric data stays symmetric
        let last = u.last().unwrap();
        let k = last.len();
        for i in 0..k / 2 {
            assert!((last[i] - last[k - 1 - i]).abs() < 1e-10);
        }
    }
}
