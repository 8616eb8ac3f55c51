//! Kernel values from the Laplace transform `λ^{−1/2}` on hyperbolic
//! contours.

use statrs::function::gamma::gamma;
use volterra_h2::kernel::contour::{inverse_laplace_eval, select_contour, PointContour, DEFAULT_ALPHA};

fn main() -> Result<(), volterra_h2::Error> {
    let khat = |l: volterra_h2::kernel::C64| l.powf(-0.5);
    let exact = |t: f64| t.powf(-0.5) / gamma(0.5);
    let global = select_contour(1e-3, 60.0, 30, DEFAULT_ALPHA, 0.0)?;
    let point = PointContour::new(30)?;
    println!("{:>10} {:>14} {:>12} {:>12}", "t", "k(t)", "global", "pointwise");
    for t in [1e-3, 1e-2, 0.1, 1.0, 10.0, 60.0] {
        let g = inverse_laplace_eval(&global, khat, t)?;
        let p = point.eval(khat, t)?;
        let k = exact(t);
        println!("{t:>10} {k:>14.10} {:>12.2e} {:>12.2e}", (g - k).abs() / k, (p - k).abs() / k);
    }
    Ok(())
}
