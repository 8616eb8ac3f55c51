//! Evolutionary evaluation of `∫ e^{s²−t²} f(s) ds` for known data,
//! checked against the dense evaluator.

use volterra_h2::dense_eval::dense_evaluate;
use volterra_h2::evaluator::{run_sampled, Evaluator};
use volterra_h2::h2_eval::H2Evaluator;
use volterra_h2::kernel::gauss_voc;
use volterra_h2::kernel::operator::Config;

fn main() -> Result<(), volterra_h2::Error> {
    let n = 2048;
    let cfg = Config::new(2, 16, 10.0 / n as f64).n_min(16);
    let f = |t: f64| vec![5.0 * (5.0 * t).cos()];
    let mut ev = H2Evaluator::new(&gauss_voc(), cfg, 1)?;
    let fast = run_sampled(&mut ev, n, 1, f)?;
    let dense = dense_evaluate(&gauss_voc(), cfg, n, 1, f)?;
    let dev = fast.iter().zip(&dense).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
    let c = ev.counters();
    println!("y(10) = {:.12}", fast[n - 1][(1, 0)]);
    println!("max deviation from dense: {dev:.2e}");
    println!("block multiplies {}, cell multiplies {}, peak buffers {}", c.block_multiplies(), c.cell_multiplies, c.peak_buffers);
    Ok(())
}
