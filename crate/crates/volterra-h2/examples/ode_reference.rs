//! Variation of constants against a Radau IIA reference for
//! `y′ = −2ty + 5cos 5t`.

use volterra_h2::experiments::example1::{run_example1, Example1};

fn main() -> Result<(), volterra_h2::Error> {
    let cfg = Example1 { p: 3, n_ref: 1 << 14, ..Default::default() };
    for r in run_example1(5..=9, &cfg)? {
        println!("N={:4} error {:.3e} order {}", r.n, r.error, r.order.map_or("-".into(), |o| format!("{o:.2}")));
    }
    Ok(())
}
