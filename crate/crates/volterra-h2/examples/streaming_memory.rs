//! Live buffers stay logarithmic in the number of steps.

use volterra_h2::evaluator::{run_sampled, Evaluator};
use volterra_h2::h2_eval::H2Evaluator;
use volterra_h2::kernel::one;
use volterra_h2::kernel::operator::Config;

fn main() -> Result<(), volterra_h2::Error> {
    for k in (8..=16).step_by(2) {
        let n = 1usize << k;
        let mut ev = H2Evaluator::new(&one(), Config::new(1, 0, 1.0 / n as f64), 1)?;
        run_sampled(&mut ev, n, 1, |t| vec![t.sin()])?;
        println!("N=2^{k:<2} peak buffers {:3}  bound {}", ev.counters().peak_buffers, 3 * k + 8);
    }
    Ok(())
}
