//! Online run time and counter scaling of the fast evaluator.

use std::time::Instant;

use super::{loglog_slope, millis, ExperimentRecord};
use crate::evaluator::{run_sampled, Evaluator};
use crate::h2_eval::H2Evaluator;
use crate::kernel::operator::{Config, Scheme};
use crate::kernel::Kernel;
use crate::Error;

#[derive(Debug, Clone, Copy)]
pub struct Complexity {
    pub p: usize,
    pub q: usize,
    pub n_min: usize,
    pub scheme: Scheme,
    pub r: usize,
    pub t: f64,
}

impl Default for Complexity {
    fn default() -> Self {
        Complexity { p: 2, q: 16, n_min: 16, scheme: Scheme::RadauQuadrature, r: 15, t: 10.0 }
    }
}

/// Extra counters of one complexity run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStats {
    pub sampler_calls: usize,
    pub steps: usize,
    pub stages: usize,
}

pub fn run_one(kernel: &Kernel, cfg: &Complexity, n: usize) -> Result<(ExperimentRecord, RunStats), Error> {
    let h = cfg.t / n as f64;
    let start = Instant::now();
    let config = Config::new(cfg.p, cfg.q, h).n_min(cfg.n_min).scheme(cfg.scheme).contour_nodes(cfg.r);
    let mut ev = H2Evaluator::new(kernel, config, 1)?;
    let setup = start.elapsed();
    let start = Instant::now();
    run_sampled(&mut ev, n, 1, |t| vec![5.0 * (5.0 * t).cos()])?;
    let run = start.elapsed();
    let c = ev.counters();
    let rec = ExperimentRecord {
        example: format!("complexity:{}", kernel.name),
        p: cfg.p,
        q: cfg.q,
        nmin: cfg.n_min,
        r: if kernel.is_transfer() { cfg.r } else { 0 },
        n,
        h,
        error: 0.0,
        order: None,
        setup_ms: millis(setup),
        run_ms: millis(run),
        peak_g_buffers: c.peak_buffers,
        block_multiplies: c.block_multiplies(),
    };
    Ok((rec, RunStats { sampler_calls: c.sampler_calls, steps: n, stages: cfg.p }))
}

pub fn run_complexity(
    kernel: &Kernel,
    cfg: &Complexity,
    levels: std::ops::RangeInclusive<u32>,
) -> Result<Vec<(ExperimentRecord, RunStats)>, Error> {
    levels.map(|k| run_one(kernel, cfg, 1 << k)).collect()
}

/// Log-log slope of run time against `N`.
pub fn time_slope(records: &[ExperimentRecord]) -> f64 {
    let n: Vec<f64> = records.iter().map(|r| r.n as f64).collect();
    let t: Vec<f64> = records.iter().map(|r| r.run_ms).collect();
    loglog_slope(&n, &t)
}

/// Ratios of consecutive block-multiply counts.
pub fn counter_ratios(records: &[ExperimentRecord]) -> Vec<f64> {
    records.windows(2).map(|w| w[1].block_multiplies as f64 / w[0].block_multiplies as f64).collect()
}
