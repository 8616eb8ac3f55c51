//! `u(t) = −∫ (u − sin τ)³/√(π(t−τ)) dτ` with Newton steps on every cell.

use volterra_h2::experiments::example2::{problem, T};
use volterra_h2::h2_eval::H2Evaluator;
use volterra_h2::kernel::operator::{Config, Scheme};
use volterra_h2::kernel::power_transfer;
use volterra_h2::solvers::solve_vie;

fn main() -> Result<(), volterra_h2::Error> {
    let n = 1024;
    let cfg = Config::new(3, 8, T / n as f64).n_min(16).contour_nodes(15).scheme(Scheme::ConvolutionQuadrature);
    let mut ev = H2Evaluator::new(&power_transfer(0.5)?, cfg, 1)?;
    let tr = solve_vie(&mut ev, &problem(), n)?;
    let u = tr.endpoint_values();
    for m in (n / 8..=n).step_by(n / 8) {
        println!("u({:5.1}) = {:+.10}", m as f64 * tr.h, u[m - 1][0]);
    }
    let iters: usize = tr.newton_iterations.iter().sum();
    println!("mean Newton iterations {:.2}", iters as f64 / n as f64);
    Ok(())
}
