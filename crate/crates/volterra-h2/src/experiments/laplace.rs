//! Accuracy of the contour inversion of `k̂(λ) = λ^{−α}` against
//! `t^{α−1}/Γ(α)`.

use std::time::Instant;

use statrs::function::gamma::gamma;

use super::{millis, ExperimentRecord};
use crate::kernel::contour::{inverse_laplace_eval, select_contour, PointContour, DEFAULT_ALPHA};
use crate::kernel::C64;
use crate::Error;

/// How the contour is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourMode {
    /// One contour for the whole window.
    Global,
    /// A rescaled contour per evaluation time.
    Pointwise,
}

#[derive(Debug, Clone, Copy)]
pub struct LaplaceSweep {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for LaplaceSweep {
    fn default() -> Self {
        LaplaceSweep { t_min: 1e-3, t_max: 60.0, points: 200 }
    }
}

impl LaplaceSweep {
    pub fn times(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let n = self.points;
        (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
    }
}

/// Largest relative error over the sweep.
pub fn max_relative_error(alpha: f64, r: usize, mode: ContourMode, sweep: &LaplaceSweep) -> Result<f64, Error> {
    let g = gamma(alpha);
    let khat = |l: C64| l.powf(-alpha);
    let global = match mode {
        ContourMode::Global => Some(select_contour(sweep.t_min, sweep.t_max, r, DEFAULT_ALPHA, 0.0)?),
        ContourMode::Pointwise => None,
    };
    let point = PointContour::new(r)?;
    let mut worst = 0.0f64;
    for t in sweep.times() {
        let exact = t.powf(alpha - 1.0) / g;
        let v = match &global {
            Some(p) => inverse_laplace_eval(p, khat, t)?,
            None => point.eval(khat, t)?,
        };
        worst = worst.max(((v - exact) / exact).abs());
    }
    Ok(worst)
}

pub fn run_laplace_accuracy(
    alpha: f64,
    rs: &[usize],
    mode: ContourMode,
    sweep: &LaplaceSweep,
) -> Result<Vec<ExperimentRecord>, Error> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent {alpha}")));
    }
    let tag = match mode {
        ContourMode::Global => "global",
        ContourMode::Pointwise => "point",
    };
    rs.iter()
        .map(|&r| {
            let start = Instant::now();
            let error = max_relative_error(alpha, r, mode, sweep)?;
            Ok(ExperimentRecord {
                example: format!("laplace-{tag}:{alpha:.4}"),
                p: 0,
                q: 0,
                nmin: 0,
                r,
                n: sweep.points,
                h: sweep.t_max / sweep.points as f64,
                error,
                order: None,
                setup_ms: 0.0,
                run_ms: millis(start.elapsed()),
                peak_g_buffers: 0,
                block_multiplies: 0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointwise_improves_with_r() {
        let sweep = LaplaceSweep::default();
        let coarse = max_relative_error(0.5, 5, ContourMode::Pointwise, &sweep).unwrap();
        let fine = max_relative_error(0.5, 30, ContourMode::Pointwise, &sweep).unwrap();
        assert!(fine < 1e-10, "{fine:e}");
        assert!(coarse > 100.0 * fine);
    }

    #[test]
    fn sweep_endpoints() {
        let t = LaplaceSweep::default().times();
        assert_eq!(t.len(), 200);
        assert!((t[0] - 1e-3).abs() < 1e-15 && (t[199] - 60.0).abs() < 1e-12);
    }
}
