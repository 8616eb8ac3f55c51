use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use volterra_h2::experiments::checks::{bound_check, order_check, preasymptotic_order_check, range_check, value_check, Check};
use volterra_h2::experiments::{
    complexity, example1, example2, example3, format_table, laplace, max_deviation, parse_levels, write_csv_file,
    ExperimentRecord,
};
use volterra_h2::kernel::builtin;
use volterra_h2::kernel::operator::Scheme;
use volterra_h2::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Example1,
    Example2,
    Example3,
    Complexity,
    Laplace,
}

/// Convergence, complexity and Laplace inversion experiments.
#[derive(Debug, Parser)]
#[command(name = "volterra-h2", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Radau IIA stages; all supported values when omitted.
    #[arg(long)]
    p: Option<usize>,
    /// Kernel interpolation degree.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    nmin: Option<usize>,
    /// Contour half node count.
    #[arg(long = "R")]
    r: Option<usize>,
    /// Refinement exponents `A..B`, `N = 2^k`.
    #[arg(long)]
    levels: Option<String>,
    /// Spatial points per half domain (example3).
    #[arg(long = "M")]
    m: Option<usize>,
    /// Final time (example3, complexity) or largest inversion time (laplace).
    #[arg(long = "T")]
    t: Option<f64>,
    /// CSV output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare with the dense evaluator for `N ≤ 2^10`.
    #[arg(long)]
    dense_check: bool,
    /// Exit with a nonzero code if a check fails.
    #[arg(long)]
    assert: bool,
    /// Kernel for the complexity run.
    #[arg(long, default_value = "gauss-voc")]
    kernel: String,
    /// Time discretization (collocation, radau, cq).
    #[arg(long)]
    scheme: Option<String>,
}

const DENSE_LIMIT: usize = 1 << 10;

fn stages(cli: &Cli, all: &[usize]) -> Vec<usize> {
    cli.p.map_or_else(|| all.to_vec(), |p| vec![p])
}

fn levels(cli: &Cli, default: std::ops::RangeInclusive<u32>) -> Result<std::ops::RangeInclusive<u32>, Error> {
    cli.levels.as_deref().map_or(Ok(default), parse_levels)
}

fn no_time(cli: &Cli) -> Result<(), Error> {
    match cli.t {
        Some(_) => Err(Error::InvalidArgument("--T is fixed by this example".into())),
        None => Ok(()),
    }
}

type Outcome = (Vec<ExperimentRecord>, Vec<Check>, fn(usize) -> f64);

fn example1(cli: &Cli) -> Result<Outcome, Error> {
    no_time(cli)?;
    let lv = levels(cli, 4..=9)?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for p in stages(cli, &[1, 2, 3]) {
        let mut cfg = example1::Example1 { p, ..Default::default() };
        cfg.q = cli.q.unwrap_or(cfg.q);
        cfg.n_min = cli.nmin.unwrap_or(cfg.n_min);
        if let Some(s) = &cli.scheme {
            cfg.scheme = s.parse()?;
        }
        let recs = example1::run_example1(lv.clone(), &cfg)?;
        match p {
            1 | 2 => checks.push(order_check(&recs, p, 16, 512, (2 * p - 1) as f64, 0.35)),
            _ => checks.push(preasymptotic_order_check(&recs, p, 1e-8, 5.0, 0.5)),
        }
        if p == 2 {
            checks.push(value_check(&recs, 2, 256, 5.90054e-4, 2.0));
        }
        if cli.dense_check {
            for r in recs.iter().filter(|r| r.n <= DENSE_LIMIT) {
                let (fast, _) = example1::run_one(&cfg, r.n)?;
                let dense = example1::run_dense(&cfg, r.n)?;
                checks.push(bound_check(format!("p={p} N={} dense deviation", r.n), max_deviation(&fast, &dense), 1e-8));
            }
        }
        rows.extend(recs);
    }
    Ok((rows, checks, |p| (2 * p - 1) as f64))
}

fn example2(cli: &Cli) -> Result<Outcome, Error> {
    no_time(cli)?;
    let lv = levels(cli, 7..=11)?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for p in stages(cli, &[1, 2, 3]) {
        let mut cfg = example2::Example2 { p, ..Default::default() };
        cfg.q = cli.q.unwrap_or(cfg.q);
        cfg.n_min = cli.nmin.unwrap_or(cfg.n_min);
        cfg.r = cli.r.unwrap_or(cfg.r);
        if let Some(s) = &cli.scheme {
            cfg.scheme = s.parse()?;
        }
        let recs = example2::run_example2(lv.clone(), &cfg)?;
        match p {
            1 => checks.push(order_check(&recs, 1, 0, usize::MAX, 1.0, 0.25)),
            2 => {
                checks.push(order_check(&recs, 2, 0, usize::MAX, 3.0, 0.35));
                checks.push(value_check(&recs, 2, 512, 6.448123e-6, 3.0));
            }
            _ => checks.push(preasymptotic_order_check(&recs, p, 5e-8, 4.5, 0.5)),
        }
        if cli.dense_check {
            for r in recs.iter().filter(|r| r.n <= DENSE_LIMIT) {
                let (fast, _) = example2::run_one(&cfg, r.n)?;
                let dense = example2::run_dense(&cfg, r.n)?;
                // the contour error of the farfield weights sets the floor
                let bound = if cfg.r >= 30 { 1e-8 } else { 1e-6 };
                checks.push(bound_check(format!("p={p} N={} dense deviation", r.n), max_deviation(&fast, &dense), bound));
            }
        }
        rows.extend(recs);
    }
    Ok((rows, checks, |p| (2.0 * p as f64 - 1.0).min(p as f64 + 1.5)))
}

fn example3(cli: &Cli) -> Result<Outcome, Error> {
    let lv = levels(cli, 4..=8)?;
    let mut cfg = example3::FracDiffConfig::default();
    cfg.q = cli.q.unwrap_or(cfg.q);
    cfg.r = cli.r.unwrap_or(cfg.r);
    cfg.m = cli.m.unwrap_or(cfg.m);
    cfg.t = cli.t.unwrap_or(cfg.t);
    cfg.n_min = cli.nmin.unwrap_or(cfg.n_min);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for p in stages(cli, &[1, 2]) {
        let recs = example3::run_example3(lv.clone(), p, &cfg)?;
        let order = volterra_h2::experiments::fitted_order(&recs, p, 0, usize::MAX).unwrap_or(f64::NAN);
        checks.push(range_check(format!("p={p} order at least p"), order, p as f64, f64::INFINITY));
        if cli.dense_check {
            for r in recs.iter().filter(|r| r.n <= DENSE_LIMIT) {
                let dev = example3::dense_check(&cfg, p, r.n)?;
                checks.push(bound_check(format!("p={p} N={} dense deviation", r.n), dev, 1e-8));
            }
        }
        rows.extend(recs);
    }
    Ok((rows, checks, |p| p as f64))
}

fn complexity_run(cli: &Cli) -> Result<Outcome, Error> {
    let kernel = builtin(&cli.kernel)?;
    let mut cfg = complexity::Complexity::default();
    cfg.p = cli.p.unwrap_or(cfg.p);
    cfg.q = cli.q.unwrap_or(cfg.q);
    cfg.n_min = cli.nmin.unwrap_or(cfg.n_min);
    cfg.r = cli.r.unwrap_or(cfg.r);
    cfg.t = cli.t.unwrap_or(cfg.t);
    cfg.scheme = match &cli.scheme {
        Some(s) => s.parse()?,
        None if kernel.is_transfer() => Scheme::ConvolutionQuadrature,
        None if kernel.singular_exponent().is_some() => Scheme::Collocation,
        None => Scheme::RadauQuadrature,
    };
    let lv = levels(cli, 10..=17)?;
    let runs = complexity::run_complexity(&kernel, &cfg, lv)?;
    let rows: Vec<ExperimentRecord> = runs.iter().map(|(r, _)| r.clone()).collect();
    let mut checks = vec![range_check("run time slope", complexity::time_slope(&rows), 0.8, 1.2)];
    for (w, ratio) in rows.windows(2).zip(complexity::counter_ratios(&rows)) {
        checks.push(range_check(format!("block multiplies N={} vs {}", w[1].n, w[0].n), ratio, 1.8, 2.2));
    }
    if let Some((last, stats)) = runs.last() {
        let bound = 3 * last.n.trailing_zeros() as usize + 8;
        checks.push(bound_check(format!("peak buffers N={}", last.n), last.peak_g_buffers as f64, bound as f64));
        checks.push(Check::new(
            "sampler calls",
            stats.sampler_calls == stats.steps * stats.stages,
            format!("{} for {} steps × {} nodes", stats.sampler_calls, stats.steps, stats.stages),
        ));
    }
    Ok((rows, checks, |_| 1.0))
}

fn laplace_run(cli: &Cli) -> Result<Outcome, Error> {
    let sweep = laplace::LaplaceSweep { t_max: cli.t.unwrap_or(60.0), ..Default::default() };
    let rs = cli.r.map_or_else(|| vec![5, 8, 15, 30], |r| vec![r]);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (alpha, bound) in [(0.5, 1e-9), (2.0 / 3.0, 1e-8)] {
        for mode in [laplace::ContourMode::Global, laplace::ContourMode::Pointwise] {
            let recs = laplace::run_laplace_accuracy(alpha, &rs, mode, &sweep)?;
            if mode == laplace::ContourMode::Global {
                if let Some(r30) = recs.iter().find(|r| r.r == 30) {
                    checks.push(bound_check(format!("alpha={alpha:.4} R=30 global"), r30.error, bound));
                }
                if let (Some(a), Some(b)) = (recs.first(), recs.last()) {
                    if a.r < b.r {
                        checks.push(Check::new(
                            format!("alpha={alpha:.4} refinement R={} to R={}", a.r, b.r),
                            b.error < a.error,
                            format!("{:.3e} → {:.3e}", a.error, b.error),
                        ));
                    }
                }
            }
            rows.extend(recs);
        }
    }
    Ok((rows, checks, |_| f64::NAN))
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let (rows, checks, target) = match cli.command {
        Command::Example1 => example1(cli)?,
        Command::Example2 => example2(cli)?,
        Command::Example3 => example3(cli)?,
        Command::Complexity => complexity_run(cli)?,
        Command::Laplace => laplace_run(cli)?,
    };
    print!("{}", format_table(&rows, target));
    if let Some(path) = &cli.out {
        write_csv_file(&rows, path)?;
    }
    for c in &checks {
        println!("{c}");
    }
    Ok(checks.iter().all(|c| c.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(ok) if ok || !cli.assert => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
