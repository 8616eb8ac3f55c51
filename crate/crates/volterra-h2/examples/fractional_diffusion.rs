//! Fractional diffusion on `[−1, 1]` with transparent boundaries.

use volterra_h2::experiments::example3::{run_fast, FracDiffConfig};

fn main() -> Result<(), volterra_h2::Error> {
    let cfg = FracDiffConfig { m: 100, ..Default::default() };
    let (u, rec) = run_fast(&cfg, 2, 128)?;
    let last = u.last().unwrap();
    let nodes = cfg.nodes();
    for i in (0..nodes.len()).step_by(20) {
        println!("x={:+.2}  u={:.6e}", nodes[i], last[i]);
    }
    println!("run {:.1} ms, {} block multiplies", rec.run_ms, rec.block_multiplies);
    Ok(())
}
