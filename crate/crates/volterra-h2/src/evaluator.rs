//! Two-phase stepping interface shared by the dense and the fast evaluator.

use nalgebra::DMatrix;

use crate::kernel::operator::Operator;
use crate::Error;

/// Work and memory counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// Farfield kernel block applications.
    pub kernel_multiplies: usize,
    /// Transfer matrix applications (upward and downward).
    pub transfer_multiplies: usize,
    /// `stages × stages` cell couplings.
    pub cell_multiplies: usize,
    /// Kernel blocks built (cache misses).
    pub blocks_built: usize,
    /// Largest number of simultaneously live moment/potential buffers.
    pub peak_buffers: usize,
    /// Data sampler invocations.
    pub sampler_calls: usize,
}

impl Counters {
    /// Block multiplies of size `(q+1)κ`.
    pub fn block_multiplies(&self) -> usize {
        self.kernel_multiplies + self.transfer_multiplies
    }
}

/// Evolutionary evaluation of `y = ∫ k f`, one cell at a time.
///
/// Each step first calls [`history_part`](Evaluator::history_part), which
/// returns everything except the coupling of the current cell with itself,
/// and then [`commit`](Evaluator::commit) with the data of the current cell.
pub trait Evaluator {
    fn operator(&self) -> &Operator;

    /// Completed steps.
    fn steps(&self) -> usize;

    fn history_part(&mut self) -> Result<DMatrix<f64>, Error>;

    /// `K^{m,m}` of the step in progress.
    fn self_coupling(&self) -> Result<DMatrix<f64>, Error> {
        Ok(self.operator().near(self.steps() + 1)?.1)
    }

    /// Finishes the step with data `f` (`stages × d`) and returns `y^m`.
    fn commit(&mut self, f: DMatrix<f64>) -> Result<DMatrix<f64>, Error>;

    fn step(&mut self, f: DMatrix<f64>) -> Result<DMatrix<f64>, Error> {
        self.history_part()?;
        self.commit(f)
    }

    fn counters(&self) -> Counters;

    fn counters_mut(&mut self) -> &mut Counters;
}

/// Runs `n` steps on data sampled at the collocation points; the sampler
/// is called once per step and node.
pub fn run_sampled<E: Evaluator>(
    ev: &mut E,
    n: usize,
    d: usize,
    mut sampler: impl FnMut(f64) -> Vec<f64>,
) -> Result<Vec<DMatrix<f64>>, Error> {
    let s = ev.operator().stages();
    let h = ev.operator().h();
    let c = ev.operator().tables.radau.c.clone();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let m = ev.steps() + 1;
        ev.history_part()?;
        let mut f = DMatrix::zeros(s, d);
        for j in 0..s {
            let v = sampler(((m - 1) as f64 + c[j]) * h);
            ev.counters_mut().sampler_calls += 1;
            if v.len() != d {
                return Err(Error::InvalidArgument(format!("sampler returned {} values, expected {d}", v.len())));
            }
            for (k, x) in v.into_iter().enumerate() {
                f[(j, k)] = x;
            }
        }
        out.push(ev.commit(f)?);
    }
    Ok(out)
}
