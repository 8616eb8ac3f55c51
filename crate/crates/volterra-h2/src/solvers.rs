//! Time-stepping drivers built on the two-phase evaluator interface.

use nalgebra::DMatrix;

use crate::basis::RadauTableau;
use crate::evaluator::Evaluator;
use crate::Error;

type VecFn = Box<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
type JacFn = Box<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;
type SourceFn = Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// `u(t) = g0(t) + ∫_0^t k(t,s) f(s, u(s)) ds` with `u(t) ∈ ℝ^d`.
pub struct VieProblem {
    pub dim: usize,
    pub f: VecFn,
    /// `∂f/∂u`, `d × d`.
    pub df: JacFn,
    pub g0: SourceFn,
    pub tol: f64,
    pub max_iter: usize,
}

impl VieProblem {
    pub fn new(
        dim: usize,
        f: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        df: impl Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        g0: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        VieProblem { dim, f: Box::new(f), df: Box::new(df), g0: Box::new(g0), tol: 1e-12, max_iter: 25 }
    }

    /// Largest relative mismatch between `df` and central differences.
    pub fn check_derivative(&self, t: f64, u: &[f64]) -> f64 {
        let j = (self.df)(t, u);
        let mut worst = 0.0f64;
        for c in 0..self.dim {
            let eps = 1e-6 * u[c].abs().max(1.0);
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[c] += eps;
            dn[c] -= eps;
            let (fu, fd) = ((self.f)(t, &up), (self.f)(t, &dn));
            for r in 0..self.dim {
                let fdv = (fu[r] - fd[r]) / (2.0 * eps);
                worst = worst.max((fdv - j[(r, c)]).abs() / j[(r, c)].abs().max(1.0));
            }
        }
        worst
    }
}

/// Collocation solution: stage values per step plus Newton diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub h: f64,
    /// `u^m`, `stages × d`.
    pub stages: Vec<DMatrix<f64>>,
    pub newton_iterations: Vec<usize>,
    /// Residual norms of the last step's Newton iteration.
    pub last_residuals: Vec<f64>,
}

impl Trajectory {
    /// Values at the grid points `t^m = mh` (the last stage), `m = 1..=N`.
    pub fn endpoint_values(&self) -> Vec<Vec<f64>> {
        self.stages.iter().map(|u| u.row(u.nrows() - 1).iter().copied().collect()).collect()
    }
}

/// Solves the integral equation for `n` steps.
pub fn solve_vie<E: Evaluator>(ev: &mut E, problem: &VieProblem, n: usize) -> Result<Trajectory, Error> {
    let s = ev.operator().stages();
    let h = ev.operator().h();
    let c = ev.operator().tables.radau.c.clone();
    let d = problem.dim;
    let mut out = Trajectory { h, stages: Vec::with_capacity(n), newton_iterations: Vec::new(), last_residuals: Vec::new() };
    let mut guess: Option<Vec<f64>> = None;
    for _ in 0..n {
        let m = ev.steps() + 1;
        let times: Vec<f64> = c.iter().map(|cj| ((m - 1) as f64 + cj) * h).collect();
        let w = ev.history_part()?;
        let k0 = ev.self_coupling()?;
        let mut rhs = w.clone();
        for (j, &t) in times.iter().enumerate() {
            for (k, v) in (problem.g0)(t).into_iter().enumerate() {
                rhs[(j, k)] += v;
            }
        }
        let mut u = DMatrix::zeros(s, d);
        for j in 0..s {
            let row = guess.clone().unwrap_or_else(|| (0..d).map(|k| rhs[(j, k)]).collect());
            for k in 0..d {
                u[(j, k)] = row[k];
            }
        }
        let eval_f = |u: &DMatrix<f64>| -> DMatrix<f64> {
            let mut f = DMatrix::zeros(s, d);
            for j in 0..s {
                let row: Vec<f64> = u.row(j).iter().copied().collect();
                for (k, v) in (problem.f)(times[j], &row).into_iter().enumerate() {
                    f[(j, k)] = v;
                }
            }
            f
        };
        let mut residuals = Vec::new();
        let mut converged = false;
        let mut iters = 0;
        for it in 0..problem.max_iter {
            let res = &u - &rhs - &k0 * eval_f(&u);
            let rn = res.amax();
            residuals.push(rn);
            if rn <= problem.tol * (1.0 + u.amax()) {
                converged = true;
                iters = it;
                break;
            }
            // J = I − (K0 ⊗ I)·blockdiag(∂f/∂u)
            let mut jac = DMatrix::<f64>::identity(s * d, s * d);
            for r in 0..s {
                let row: Vec<f64> = u.row(r).iter().copied().collect();
                let jr = (problem.df)(times[r], &row);
                for j in 0..s {
                    let kjr = k0[(j, r)];
                    if kjr == 0.0 {
                        continue;
                    }
                    for a in 0..d {
                        for b in 0..d {
                            jac[(j * d + a, r * d + b)] -= kjr * jr[(a, b)];
                        }
                    }
                }
            }
            let flat = DMatrix::from_fn(s * d, 1, |i, _| res[(i / d, i % d)]);
            let delta = jac.lu().solve(&flat).ok_or(Error::Singular)?;
            for i in 0..s * d {
                u[(i / d, i % d)] -= delta[(i, 0)];
            }
            iters = it + 1;
        }
        if !converged {
            return Err(Error::NewtonFailed { step: m, residual: *residuals.last().unwrap_or(&f64::NAN) });
        }
        let f = eval_f(&u);
        ev.commit(f)?;
        guess = Some(u.row(s - 1).iter().copied().collect());
        out.newton_iterations.push(iters);
        out.last_residuals = residuals;
        out.stages.push(u);
    }
    Ok(out)
}

/// `y(t^m) = additive(t^m) + (∫ k·forcing)(t^m)` for `m = 1..=n`.
pub fn variation_of_constants<E: Evaluator>(
    ev: &mut E,
    forcing: impl Fn(f64) -> f64,
    additive: impl Fn(f64) -> f64,
    n: usize,
) -> Result<Vec<f64>, Error> {
    let h = ev.operator().h();
    let s = ev.operator().stages();
    let ys = crate::evaluator::run_sampled(ev, n, 1, |t| vec![forcing(t)])?;
    Ok(ys.iter().enumerate().map(|(m, y)| additive((m + 1) as f64 * h) + y[(s - 1, 0)]).collect())
}

/// Fixed-step Radau IIA integration of `y′ = rhs(t, y)`; returns `y` at
/// `t = mT/n`, `m = 0..=n`.
pub fn reference_ode_radau(
    rhs: impl Fn(f64, &[f64]) -> Vec<f64>,
    jac: impl Fn(f64, &[f64]) -> DMatrix<f64>,
    y0: &[f64],
    t_end: f64,
    n: usize,
    stages: usize,
) -> Result<Vec<Vec<f64>>, Error> {
    let tab = RadauTableau::new(stages)?;
    let d = y0.len();
    let s = stages;
    let h = t_end / n as f64;
    let mut y = y0.to_vec();
    let mut out = vec![y.clone()];
    for step in 0..n {
        let t0 = step as f64 * h;
        let mut z = vec![y.clone(); s];
        let mut ok = false;
        let mut res_norm = f64::NAN;
        for _ in 0..25 {
            let f: Vec<Vec<f64>> = (0..s).map(|j| rhs(t0 + tab.c[j] * h, &z[j])).collect();
            let mut res = DMatrix::zeros(s * d, 1);
            for i in 0..s {
                for a in 0..d {
                    let sum: f64 = (0..s).map(|j| tab.a[(i, j)] * f[j][a]).sum();
                    res[(i * d + a, 0)] = z[i][a] - y[a] - h * sum;
                }
            }
            res_norm = res.amax();
            let scale = 1.0 + z.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            if res_norm <= 1e-14 * scale {
                ok = true;
                break;
            }
            let mut jm = DMatrix::<f64>::identity(s * d, s * d);
            for j in 0..s {
                let jj = jac(t0 + tab.c[j] * h, &z[j]);
                for i in 0..s {
                    for a in 0..d {
                        for b in 0..d {
                            jm[(i * d + a, j * d + b)] -= h * tab.a[(i, j)] * jj[(a, b)];
                        }
                    }
                }
            }
            let delta = jm.lu().solve(&res).ok_or(Error::Singular)?;
            for i in 0..s {
                for a in 0..d {
                    z[i][a] -= delta[(i * d + a, 0)];
                }
            }
        }
        if !ok {
            return Err(Error::NewtonFailed { step: step + 1, residual: res_norm });
        }
        // stiffly accurate: the last stage is the new value
        y = z[s - 1].clone();
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::h2_eval::H2Evaluator;
    use crate::kernel::operator::Config;
    use crate::kernel::one;

    #[test]
    fn constant_forcing_is_time() {
        let p = VieProblem::new(1, |_, _| vec![1.0], |_, _| DMatrix::zeros(1, 1), |_| vec![0.0]);
        let mut ev = H2Evaluator::new(&one(), Config::new(2, 0, 0.25), 1).unwrap();
        let tr = solve_vie(&mut ev, &p, 20).unwrap();
        for (m, v) in tr.endpoint_values().iter().enumerate() {
            assert!((v[0] - (m + 1) as f64 * 0.25).abs() < 1e-13);
        }
        assert!(tr.newton_iterations.iter().all(|&i| i <= 1));
    }

    #[test]
    fn exponential_growth() {
        // u = 1 + ∫ u  ⇒  u = e^t
        let p = VieProblem::new(1, |_, u| vec![u[0]], |_, _| DMatrix::from_element(1, 1, 1.0), |_| vec![1.0]);
        let mut ev = H2Evaluator::new(&one(), Config::new(3, 0, 0.05), 1).unwrap();
        let tr = solve_vie(&mut ev, &p, 20).unwrap();
        let v = tr.endpoint_values();
        assert!((v[19][0] - 1f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn zero_forcing_gives_additive() {
        let mut ev = H2Evaluator::new(&one(), Config::new(2, 2, 0.1), 1).unwrap();
        let y = variation_of_constants(&mut ev, |_| 0.0, |t| t.sin(), 30).unwrap();
        for (m, v) in y.iter().enumerate() {
            assert_eq!(*v, ((m + 1) as f64 * 0.1).sin());
        }
    }

    #[test]
    fn radau_reference_exponential() {
        let lam = -1.5;
        for s in 1..=3 {
            let y = reference_ode_radau(
                |_, y| vec![lam * y[0]],
                |_, _| DMatrix::from_element(1, 1, lam),
                &[1.0],
                2.0,
                64,
                s,
            )
            .unwrap();
            let err = (y[64][0] - (lam * 2.0f64).exp()).abs();
            let bound = [1e-2, 1e-5, 1e-9][s - 1];
            assert!(err < bound, "s={s} err={err:e}");
        }
        let flat = reference_ode_radau(|_, _| vec![0.0], |_, _| DMatrix::zeros(1, 1), &[3.0], 1.0, 8, 3).unwrap();
        assert!(flat.iter().all(|v| v[0] == 3.0));
    }

    #[test]
    fn derivative_check() {
        let p = VieProblem::new(
            1,
            |t, u| vec![-(u[0] - t.sin()).powi(3)],
            |t, u| DMatrix::from_element(1, 1, -3.0 * (u[0] - t.sin()).powi(2)),
            |_| vec![0.0],
        );
        assert!(p.check_derivative(0.7, &[1.3]) < 1e-6);
    }
}
