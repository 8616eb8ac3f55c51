use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use volterra_h2::experiments::example2;
use volterra_h2::h2_eval::H2Evaluator;
use volterra_h2::kernel::operator::{Config, Scheme};
use volterra_h2::kernel::{one, power_transfer};
use volterra_h2::solvers::{solve_vie, VieProblem};
use volterra_h2::Error;

fn cq_config(n: usize) -> Config {
    Config::new(2, 8, example2::T / n as f64).n_min(16).contour_nodes(15).scheme(Scheme::ConvolutionQuadrature)
}

#[test]
fn newton_converges_quadratically() {
    let mut ev = H2Evaluator::new(&power_transfer(0.5).unwrap(), cq_config(256), 1).unwrap();
    let mut problem = example2::problem();
    problem.tol = 1e-15;
    let tr = solve_vie(&mut ev, &problem, 256).unwrap();
    let res = &tr.last_residuals;
    for w in res.windows(2) {
        if w[0] < 1e-3 && w[1] > 1e-14 {
            assert!(w[1] <= 10.0 * w[0] * w[0], "{res:?}");
        }
    }
    assert!(tr.newton_iterations.iter().all(|&i| i <= 6));
}

#[test]
fn data_is_sampled_only_at_the_current_step() {
    let h = 0.05;
    let times = Arc::new(Mutex::new(Vec::new()));
    let log = times.clone();
    let problem = VieProblem::new(
        1,
        move |t, u| {
            log.lock().unwrap().push(t);
            vec![-u[0] + t]
        },
        |_, _| DMatrix::from_element(1, 1, -1.0),
        |_| vec![1.0],
    );
    let mut ev = H2Evaluator::new(&one(), Config::new(3, 0, h).n_min(4), 1).unwrap();
    solve_vie(&mut ev, &problem, 100).unwrap();
    let times = times.lock().unwrap();
    let mut cell = 0.0f64;
    for &t in times.iter() {
        let c = (t / h - 1e-9).ceil();
        assert!(c >= cell, "sampled cell {c} after {cell}");
        cell = c;
    }
    assert_eq!(cell, 100.0);
}

#[test]
fn newton_failure_reports_step() {
    // u = 1 + ∫ u⁵: blows up in finite time
    let problem = VieProblem::new(
        1,
        |_, u| vec![u[0].powi(5)],
        |_, u| DMatrix::from_element(1, 1, 5.0 * u[0].powi(4)),
        |_| vec![1.0],
    );
    let mut ev = H2Evaluator::new(&one(), Config::new(2, 0, 0.05), 1).unwrap();
    match solve_vie(&mut ev, &problem, 100) {
        Err(Error::NewtonFailed { step, .. }) => assert!(step > 1 && step <= 100),
        other => panic!("{:?}", other.map(|t| t.stages.len())),
    }
}
