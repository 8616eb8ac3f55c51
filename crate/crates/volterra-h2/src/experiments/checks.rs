//! Pass/fail checks on experiment output.

use super::ExperimentRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Fitted order of the rows with `p` and `N ∈ [n_lo, n_hi]` against
/// `target ± tol`.
pub fn order_check(records: &[ExperimentRecord], p: usize, n_lo: usize, n_hi: usize, target: f64, tol: f64) -> Check {
    let name = if n_lo == 0 && n_hi == usize::MAX {
        format!("p={p} order over all N")
    } else {
        format!("p={p} order over N in [{n_lo}, {n_hi}]")
    };
    match super::fitted_order(records, p, n_lo, n_hi) {
        Some(o) => Check::new(name, (o - target).abs() <= tol, format!("{o:.3} vs {target} ± {tol}")),
        None => Check::new(name, false, "fewer than two rows"),
    }
}

/// Fitted order over the rows with `p` whose error exceeds `floor`.
pub fn preasymptotic_order_check(records: &[ExperimentRecord], p: usize, floor: f64, target: f64, tol: f64) -> Check {
    let rows: Vec<ExperimentRecord> = records.iter().filter(|r| r.p == p && r.error > floor).cloned().collect();
    let name = format!("p={p} order above error {floor:e}");
    match super::fitted_order(&rows, p, 0, usize::MAX) {
        Some(o) => Check::new(name, (o - target).abs() <= tol, format!("{o:.3} vs {target} ± {tol} ({} rows)", rows.len())),
        None => Check::new(name, false, "fewer than two rows"),
    }
}

/// Error of the row with `p` and `N` within a factor of `reference`.
pub fn value_check(records: &[ExperimentRecord], p: usize, n: usize, reference: f64, factor: f64) -> Check {
    let name = format!("p={p} N={n} error vs {reference:e}");
    match records.iter().find(|r| r.p == p && r.n == n) {
        Some(r) => {
            let ratio = r.error / reference;
            Check::new(name, ratio <= factor && ratio >= 1.0 / factor, format!("{:.4e} (ratio {ratio:.3}, factor {factor})", r.error))
        }
        None => Check::new(name, false, "row missing"),
    }
}

pub fn bound_check(name: impl Into<String>, value: f64, bound: f64) -> Check {
    Check::new(name, value <= bound, format!("{value:.4e} ≤ {bound:e}"))
}

pub fn range_check(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Check {
    Check::new(name, value >= lo && value <= hi, format!("{value:.4} in [{lo}, {hi}]"))
}
