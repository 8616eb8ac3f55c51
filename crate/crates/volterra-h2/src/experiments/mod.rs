//! Convergence, complexity and Laplace inversion experiments.

pub mod checks;
pub mod complexity;
pub mod example1;
pub mod example2;
pub mod example3;
pub mod laplace;

use std::io::Write;
use std::path::Path;

use crate::Error;

pub const CSV_HEADER: [&str; 13] = [
    "example",
    "p",
    "q",
    "nmin",
    "R",
    "N",
    "h",
    "error",
    "order",
    "setup_ms",
    "run_ms",
    "peak_g_buffers",
    "block_multiplies",
];

/// One row of experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub example: String,
    pub p: usize,
    pub q: usize,
    pub nmin: usize,
    pub r: usize,
    pub n: usize,
    pub h: f64,
    pub error: f64,
    /// `log2(e_{N/2} / e_N)` against the previous row of the same series.
    pub order: Option<f64>,
    pub setup_ms: f64,
    pub run_ms: f64,
    pub peak_g_buffers: usize,
    pub block_multiplies: usize,
}

impl ExperimentRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.example.clone(),
            self.p.to_string(),
            self.q.to_string(),
            self.nmin.to_string(),
            self.r.to_string(),
            self.n.to_string(),
            format!("{:.15e}", self.h),
            format!("{:.15e}", self.error),
            self.order.map_or(String::new(), |o| format!("{o:.4}")),
            format!("{:.3}", self.setup_ms),
            format!("{:.3}", self.run_ms),
            self.peak_g_buffers.to_string(),
            self.block_multiplies.to_string(),
        ]
    }
}

pub fn write_csv(records: &[ExperimentRecord], w: impl Write) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in records {
        out.write_record(r.fields())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[ExperimentRecord], path: &Path) -> Result<(), Error> {
    write_csv(records, std::fs::File::create(path)?)
}

/// Fills in pairwise orders for consecutive rows with the same example and `p`.
pub fn fill_orders(records: &mut [ExperimentRecord]) {
    for i in 1..records.len() {
        let (a, b) = (&records[i - 1], &records[i]);
        if a.example == b.example && a.p == b.p && b.n == 2 * a.n && a.error > 0.0 && b.error > 0.0 {
            records[i].order = Some((a.error / b.error).log2());
        }
    }
}

/// Least squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Fitted convergence order over rows with `n_lo ≤ N ≤ n_hi`.
pub fn fitted_order(records: &[ExperimentRecord], p: usize, n_lo: usize, n_hi: usize) -> Option<f64> {
    let rows: Vec<&ExperimentRecord> =
        records.iter().filter(|r| r.p == p && r.n >= n_lo && r.n <= n_hi && r.error > 0.0).collect();
    if rows.len() < 2 {
        return None;
    }
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.error).collect();
    Some(loglog_slope(&h, &e))
}

/// Human-readable convergence table with the theoretical order alongside.
pub fn format_table(records: &[ExperimentRecord], target: impl Fn(usize) -> f64) -> String {
    let mut s = format!(
        "{:<22} {:>2} {:>3} {:>5} {:>3} {:>7} {:>12} {:>12} {:>7} {:>7} {:>10} {:>6} {:>10}\n",
        "example", "p", "q", "nmin", "R", "N", "h", "error", "order", "target", "run_ms", "bufs", "blockmul"
    );
    for r in records {
        s += &format!(
            "{:<22} {:>2} {:>3} {:>5} {:>3} {:>7} {:>12.6e} {:>12.4e} {:>7} {:>7} {:>10.1} {:>6} {:>10}\n",
            r.example,
            r.p,
            r.q,
            r.nmin,
            r.r,
            r.n,
            r.h,
            r.error,
            r.order.map_or("-".to_string(), |o| format!("{o:.3}")),
            Some(target(r.p)).filter(|t| t.is_finite()).map_or("-".to_string(), |t| format!("{t:.2}")),
            r.run_ms,
            r.peak_g_buffers,
            r.block_multiplies
        );
    }
    s
}

/// Maximum deviation between two runs on the time points of a comparison
/// grid with `n_c` cells; `a` and `b` hold values at `t^m`, `m = 1..=N`.
pub fn grid_error(a: &[Vec<f64>], b: &[Vec<f64>], n_c: usize) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let (sa, sb) = (na / n_c, nb / n_c);
    (1..=n_c)
        .map(|k| {
            a[k * sa - 1].iter().zip(&b[k * sb - 1]).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        })
        .fold(0.0, f64::max)
}

/// Largest entrywise deviation between two runs of equal length.
pub fn max_deviation(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Parses `A..B` (inclusive).
pub fn parse_levels(s: &str) -> Result<std::ops::RangeInclusive<u32>, Error> {
    let bad = || Error::InvalidArgument(format!("levels {s:?}, expected A..B"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b || b > 30 {
        return Err(bad());
    }
    Ok(a..=b)
}

pub(crate) fn millis(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(p: usize, n: usize, e: f64) -> ExperimentRecord {
        ExperimentRecord {
            example: "x".into(),
            p,
            q: 0,
            nmin: 1,
            r: 0,
            n,
            h: 1.0 / n as f64,
            error: e,
            order: None,
            setup_ms: 0.0,
            run_ms: 0.0,
            peak_g_buffers: 0,
            block_multiplies: 0,
        }
    }

    #[test]
    fn orders_and_fit() {
        let mut rows: Vec<_> = (4..9).map(|k| rec(2, 1 << k, 5.0 * ((1 << k) as f64).powi(-3))).collect();
        fill_orders(&mut rows);
        for r in &rows[1..] {
            assert!((r.order.unwrap() - 3.0).abs() < 1e-12);
        }
        assert!((fitted_order(&rows, 2, 16, 256).unwrap() - 3.0).abs() < 1e-12);
        assert!(fitted_order(&rows, 1, 16, 256).is_none());
    }

    #[test]
    fn csv_header_exact() {
        let mut buf = Vec::new();
        write_csv(&[rec(1, 4, 0.5)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("example,p,q,nmin,R,N,h,error,order,setup_ms,run_ms,peak_g_buffers,block_multiplies\n"));
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn levels_parse() {
        assert_eq!(parse_levels("4..9").unwrap(), 4..=9);
        assert!(parse_levels("9..4").is_err());
        assert!(parse_levels("4-9").is_err());
    }

    #[test]
    fn grid_error_subsamples() {
        let a: Vec<Vec<f64>> = (1..=4).map(|m| vec![m as f64]).collect();
        let b: Vec<Vec<f64>> = (1..=8).map(|m| vec![m as f64 / 2.0]).collect();
        assert_eq!(grid_error(&a, &b, 4), 0.0);
        assert_eq!(grid_error(&a, &b, 2), 0.0);
    }
}
