//! Abel integral `∫ (t−s)^{−1/2}/√π · s ds = (4/3)t^{3/2}/√π` from the
//! transfer function alone.

use volterra_h2::evaluator::run_sampled;
use volterra_h2::h2_eval::H2Evaluator;
use volterra_h2::kernel::operator::{Config, Scheme};
use volterra_h2::kernel::power_transfer;

fn main() -> Result<(), volterra_h2::Error> {
    let k = power_transfer(0.5)?;
    let exact = 4.0 / 3.0 / std::f64::consts::PI.sqrt();
    for n in [64, 128, 256, 512] {
        let cfg = Config::new(3, 16, 1.0 / n as f64).n_min(16).contour_nodes(30).scheme(Scheme::ConvolutionQuadrature);
        let mut ev = H2Evaluator::new(&k, cfg, 1)?;
        let y = run_sampled(&mut ev, n, 1, |s| vec![s])?;
        println!("N={n:4}  y(1)={:.12}  error {:.2e}", y[n - 1][(2, 0)], (y[n - 1][(2, 0)] - exact).abs());
    }
    Ok(())
}
