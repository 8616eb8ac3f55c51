//! Local polynomial bases, quadrature rules and the coupling tables
//! `P`, `Q` and the two-scale transfer matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::Error;

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl Rule {
    /// Affine map of a rule on `[-1,1]` to `[a,b]` (weights scaled by the
    /// Jacobian only).
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let (c, r) = ((a + b) / 2.0, (b - a) / 2.0);
        Rule {
            x: self.x.iter().map(|x| c + r * x).collect(),
            w: self.w.iter().map(|w| r * w).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.x.iter().zip(&self.w).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss–Jacobi rule for the weight `(1−x)^a (1+x)^b` on `[-1,1]`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<Rule, Error> {
    if n == 0 || a <= -1.0 || b <= -1.0 {
        return Err(Error::InvalidArgument(format!("gauss_jacobi(n={n}, a={a}, b={b})")));
    }
    let ab = a + b;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        *d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
    }
    for (k, o) in off.iter_mut().enumerate() {
        let kf = (k + 1) as f64;
        let beta = if k == 0 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            let t = 2.0 * kf + ab;
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (t * t * (t + 1.0) * (t - 1.0))
        };
        *o = beta.sqrt();
    }
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(Rule { x: pairs.iter().map(|p| p.0).collect(), w: pairs.iter().map(|p| p.1).collect() })
}

/// Gauss–Legendre rule on `[-1,1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    gauss_jacobi(n, 0.0, 0.0).expect("n ≥ 1")
}

/// Butcher tableau of the `s`-stage Radau IIA method.
#[derive(Debug, Clone)]
pub struct RadauTableau {
    pub c: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
}

impl RadauTableau {
    pub fn new(stages: usize) -> Result<Self, Error> {
        let c = radau_nodes(stages)?;
        let basis = LagrangeBasis::new(c.clone());
        let gl = gauss_legendre(stages);
        let mut a = DMatrix::zeros(stages, stages);
        for i in 0..stages {
            let rule = gl.mapped(0.0, c[i]);
            for (&x, &w) in rule.x.iter().zip(&rule.w) {
                let l = basis.eval_all(x);
                for j in 0..stages {
                    a[(i, j)] += w * l[j];
                }
            }
        }
        let b = a.row(stages - 1).iter().copied().collect();
        Ok(RadauTableau { c, a, b })
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }
}

/// Radau IIA abscissae on `[0,1]`; the last one is exactly 1.
pub fn radau_nodes(stages: usize) -> Result<Vec<f64>, Error> {
    if stages == 0 {
        return Err(Error::InvalidArgument("Radau IIA needs at least one stage".into()));
    }
    let mut c = Vec::with_capacity(stages);
    if stages > 1 {
        // interior nodes: zeros of P^{(1,0)}_{s−1}
        let rule = gauss_jacobi(stages - 1, 1.0, 0.0)?;
        c.extend(rule.x.iter().map(|x| (x + 1.0) / 2.0));
    }
    c.push(1.0);
    Ok(c)
}

/// Chebyshev points of the second kind mapped to `[0,1]`, increasing.
pub fn chebyshev_nodes(q: usize) -> Vec<f64> {
    if q == 0 {
        return vec![0.5];
    }
    (0..=q)
        .map(|k| {
            let s = (k as f64 * std::f64::consts::PI / (2.0 * q as f64)).sin();
            s * s
        })
        .collect()
}

/// Lagrange basis in barycentric form.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: Vec<f64>) -> Self {
        let n = nodes.len();
        let weights = (0..n)
            .map(|j| {
                let prod: f64 = (0..n).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
                1.0 / prod
            })
            .collect();
        LagrangeBasis { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Values of all cardinal functions at `x`.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        if let Some(j) = self.nodes.iter().position(|&t| t == x) {
            let mut out = vec![0.0; n];
            out[j] = 1.0;
            return out;
        }
        let terms: Vec<f64> =
            self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w / (x - t)).collect();
        let denom: f64 = terms.iter().sum();
        terms.iter().map(|t| t / denom).collect()
    }

    pub fn eval(&self, i: usize, x: f64) -> f64 {
        self.eval_all(x)[i]
    }

    /// Matrix with entry `(k, i) = L_i(points[k])`.
    pub fn eval_matrix(&self, points: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.len());
        for (k, &x) in points.iter().enumerate() {
            for (i, v) in self.eval_all(x).into_iter().enumerate() {
                m[(k, i)] = v;
            }
        }
        m
    }
}

/// `lagrange_eval(nodes, i, x)` as a free function.
pub fn lagrange_eval(nodes: &[f64], i: usize, x: f64) -> f64 {
    LagrangeBasis::new(nodes.to_vec()).eval(i, x)
}

/// How a cell's data is turned into kernel-basis moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentRule {
    /// `h ∫ φ_k ψ_r` integrated exactly.
    Exact,
    /// `h · b_r · φ_k(c_r)`, the Radau IIA quadrature of the same integral.
    Radau,
}

/// Coupling tables for one fine cell of width `h`.
#[derive(Debug, Clone)]
pub struct BasisTables {
    pub h: f64,
    pub radau: RadauTableau,
    /// Data basis `ψ_r` on `[0,1]`, cardinal at the Radau nodes.
    pub data: LagrangeBasis,
    /// Kernel basis `φ_i` on `[0,1]`, cardinal at Chebyshev nodes.
    pub kernel: LagrangeBasis,
    /// `P_{j,i} = φ_i(c_j)`, stages × (q+1).
    pub p: DMatrix<f64>,
    /// Exact moments, (q+1) × stages.
    pub q_exact: DMatrix<f64>,
    /// Radau-quadrature moments, (q+1) × stages.
    pub q_radau: DMatrix<f64>,
    /// `A1_{i,k} = φ_i(ξ_k / 2)`.
    pub a1: DMatrix<f64>,
    /// `A2_{i,k} = φ_i((1 + ξ_k) / 2)`.
    pub a2: DMatrix<f64>,
}

impl BasisTables {
    pub fn new(stages: usize, q: usize, h: f64) -> Result<Self, Error> {
        if h.is_nan() || h <= 0.0 {
            return Err(Error::InvalidArgument(format!("step size {h}")));
        }
        let radau = RadauTableau::new(stages)?;
        let data = LagrangeBasis::new(radau.c.clone());
        let kernel = LagrangeBasis::new(chebyshev_nodes(q));
        let p = kernel.eval_matrix(&radau.c);
        let xi = kernel.nodes.clone();
        let left: Vec<f64> = xi.iter().map(|x| x / 2.0).collect();
        let right: Vec<f64> = xi.iter().map(|x| (1.0 + x) / 2.0).collect();
        let a1 = kernel.eval_matrix(&left).transpose();
        let a2 = kernel.eval_matrix(&right).transpose();
        let mut t = BasisTables {
            h,
            radau,
            data,
            kernel,
            p,
            q_exact: DMatrix::zeros(0, 0),
            q_radau: DMatrix::zeros(0, 0),
            a1,
            a2,
        };
        t.q_exact = t.moments(MomentRule::Exact, 0.0, 1.0);
        t.q_radau = t.moments(MomentRule::Radau, 0.0, 1.0);
        Ok(t)
    }

    pub fn stages(&self) -> usize {
        self.radau.stages()
    }

    pub fn q(&self) -> usize {
        self.kernel.len() - 1
    }

    /// Moments of one fine cell against a kernel basis living on a larger
    /// interval; the cell occupies `[offset, offset + scale]` of the unit
    /// interval of that basis. Result is (q+1) × stages.
    pub fn moments(&self, rule: MomentRule, offset: f64, scale: f64) -> DMatrix<f64> {
        let (nq, s) = (self.kernel.len(), self.stages());
        let mut m = DMatrix::zeros(nq, s);
        match rule {
            MomentRule::Exact => {
                let gl = gauss_legendre((nq + s).div_ceil(2) + 1).mapped(0.0, 1.0);
                for (&y, &w) in gl.x.iter().zip(&gl.w) {
                    let phi = self.kernel.eval_all(offset + scale * y);
                    let psi = self.data.eval_all(y);
                    for k in 0..nq {
                        for r in 0..s {
                            m[(k, r)] += self.h * w * phi[k] * psi[r];
                        }
                    }
                }
            }
            MomentRule::Radau => {
                for r in 0..s {
                    let phi = self.kernel.eval_all(offset + scale * self.radau.c[r]);
                    for k in 0..nq {
                        m[(k, r)] = self.h * self.radau.b[r] * phi[k];
                    }
                }
            }
        }
        m
    }

    /// Evaluation of the kernel basis at the collocation points of a fine
    /// cell placed at `[offset, offset + scale]`; stages × (q+1).
    pub fn evaluation(&self, offset: f64, scale: f64) -> DMatrix<f64> {
        let pts: Vec<f64> = self.radau.c.iter().map(|c| offset + scale * c).collect();
        self.kernel.eval_matrix(&pts)
    }

    /// Transfer matrix for child position `b` (1 = left, 2 = right).
    pub fn transfer(&self, b: usize) -> &DMatrix<f64> {
        if b == 1 {
            &self.a1
        } else {
            &self.a2
        }
    }
}

/// Convenience constructor under the conventional name.
pub fn build_tables(stages: usize, q: usize, h: f64) -> Result<BasisTables, Error> {
    BasisTables::new(stages, q, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn radau_examples() {
        assert_eq!(radau_nodes(1).unwrap(), vec![1.0]);
        let c2 = radau_nodes(2).unwrap();
        assert_relative_eq!(c2[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(c2[1], 1.0);
        let c3 = radau_nodes(3).unwrap();
        let s6 = 6f64.sqrt();
        assert_relative_eq!(c3[0], (4.0 - s6) / 10.0, epsilon = 1e-15);
        assert_relative_eq!(c3[1], (4.0 + s6) / 10.0, epsilon = 1e-15);
        assert!(radau_nodes(0).is_err());
    }

    #[test]
    fn radau_tableau_known_values() {
        let t = RadauTableau::new(2).unwrap();
        let want = [5.0 / 12.0, -1.0 / 12.0, 3.0 / 4.0, 1.0 / 4.0];
        for (got, want) in t.a.transpose().iter().zip(want) {
            assert_relative_eq!(*got, want, epsilon = 1e-15);
        }
        let t3 = RadauTableau::new(3).unwrap();
        let s6 = 6f64.sqrt();
        assert_relative_eq!(t3.a[(0, 0)], (88.0 - 7.0 * s6) / 360.0, epsilon = 1e-15);
        assert_relative_eq!(t3.a[(2, 2)], 1.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(t3.b[0], (16.0 - s6) / 36.0, epsilon = 1e-15);
    }

    #[test]
    fn radau_quadrature_degree() {
        for s in 1..=5 {
            let t = RadauTableau::new(s).unwrap();
            for deg in 0..=(2 * s - 2) {
                let v: f64 = t.c.iter().zip(&t.b).map(|(c, b)| b * c.powi(deg as i32)).sum();
                assert_relative_eq!(v, 1.0 / (deg as f64 + 1.0), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn gauss_jacobi_moments() {
        // ∫_{-1}^{1} (1−x)^{-1/2} x^k dx against a fine midpoint reference
        let r = gauss_jacobi(8, -0.5, 0.0).unwrap();
        let exact0 = 2.0 * 2f64.sqrt();
        assert_relative_eq!(r.integrate(|_| 1.0), exact0, epsilon = 1e-13);
        // ∫ (1−x)^{-1/2} x dx = ∫ (1−x)^{-1/2} − (1−x)^{1/2} = 2√2 − (2/3)2^{3/2}
        let exact1 = exact0 - 2.0 / 3.0 * 2f64.powf(1.5);
        assert_relative_eq!(r.integrate(|x| x), exact1, epsilon = 1e-13);
        let gl = gauss_legendre(5);
        assert_relative_eq!(gl.integrate(|x| x.powi(8)), 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn lagrange_examples() {
        let nodes = [1.0 / 3.0, 1.0];
        assert_eq!(lagrange_eval(&nodes, 0, 1.0 / 3.0), 1.0);
        assert_eq!(lagrange_eval(&nodes, 0, 1.0), 0.0);
        assert_relative_eq!(lagrange_eval(&nodes, 0, 0.0), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn chebyshev_symmetric_increasing() {
        for q in 0..20 {
            let x = chebyshev_nodes(q);
            assert_eq!(x.len(), q + 1);
            for k in 0..=q {
                assert!((x[k] + x[q - k] - 1.0).abs() < 1e-15);
                if k > 0 {
                    assert!(x[k] > x[k - 1]);
                }
            }
        }
    }

    #[test]
    fn tables_trivial() {
        let t = BasisTables::new(1, 0, 1.0).unwrap();
        assert_eq!(t.p, DMatrix::from_element(1, 1, 1.0));
        assert_relative_eq!(t.q_exact[(0, 0)], 1.0, epsilon = 1e-14);
        assert_eq!(t.a1, DMatrix::from_element(1, 1, 1.0));
        assert_eq!(t.a2, DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn transfer_linear_hat() {
        let t = BasisTables::new(1, 1, 1.0).unwrap();
        assert_relative_eq!(t.a1[(0, 0)], 1.0);
        assert_relative_eq!(t.a1[(0, 1)], 0.5);
        for b in [&t.a1, &t.a2] {
            for k in 0..2 {
                assert_relative_eq!(b.column(k).sum(), 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn two_scale_consistency() {
        // moments on the parent from the children's moments
        for (s, q) in [(1, 3), (2, 8), (3, 16)] {
            let t = BasisTables::new(s, q, 0.7).unwrap();
            let parent = t.moments(MomentRule::Exact, 0.0, 1.0);
            // a parent cell of width 2h: its two fine cells, on the parent basis
            let left = t.moments(MomentRule::Exact, 0.0, 0.5);
            let right = t.moments(MomentRule::Exact, 0.5, 0.5);
            let child = t.moments(MomentRule::Exact, 0.0, 1.0);
            // child moments live on the child basis; lift with A1/A2
            let lifted_l = &t.a1 * &child;
            let lifted_r = &t.a2 * &child;
            assert!((&lifted_l - &left).amax() < 1e-13 * parent.amax().max(1.0));
            assert!((&lifted_r - &right).amax() < 1e-13 * parent.amax().max(1.0));
        }
    }

    #[test]
    fn downward_consistency() {
        let t = BasisTables::new(2, 10, 1.0).unwrap();
        for b in 1..=2 {
            let a = t.transfer(b);
            for k in 0..25 {
                let x = k as f64 / 24.0;
                let parent = t.kernel.eval_all((b as f64 - 1.0 + x) / 2.0);
                let child = t.kernel.eval_all(x);
                for i in 0..=10 {
                    let v: f64 = (0..=10).map(|j| a[(i, j)] * child[j]).sum();
                    assert!((v - parent[i]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn exact_moments_polynomial() {
        let t = BasisTables::new(3, 6, 0.25).unwrap();
        // f(y) = y^2 on the cell is reproduced by ψ; φ-weighted integrals
        // must match direct high-order quadrature
        let f: Vec<f64> = t.radau.c.iter().map(|c| c * c).collect();
        let g = &t.q_exact * nalgebra::DVector::from_vec(f);
        let gl = gauss_legendre(20).mapped(0.0, 1.0);
        for k in 0..=6 {
            let want = 0.25 * gl.integrate(|y| t.kernel.eval(k, y) * y * y);
            assert_relative_eq!(g[k], want, epsilon = 1e-15, max_relative = 1e-13);
        }
    }
}
