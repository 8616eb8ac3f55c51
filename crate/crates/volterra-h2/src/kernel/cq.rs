//! Convolution quadrature weights built from the transfer function.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use rustfft::FftPlanner;

use super::contour::PointContour;
use super::matfun::{inverse, matrix_function, to_complex};
use super::{Kernel, C64};
use crate::basis::RadauTableau;
use crate::Error;

fn circle_points(count: usize, min_len: usize) -> (usize, f64) {
    let len = (2 * (count + 1)).next_power_of_two().max(min_len);
    // balances aliasing ρ^L against round-off ε/ρ^{L/2} at the last used index
    let rho = 1e-16f64.powf(2.0 / (3.0 * len as f64));
    (len, rho)
}

/// Implicit Euler weights `ω_0..=ω_count` of `k̂((1−ζ)/h) = Σ ω_ℓ ζ^ℓ`.
pub fn cq_weights_euler(khat: impl Fn(C64) -> C64, h: f64, count: usize) -> Vec<f64> {
    let (len, rho) = circle_points(count, 8);
    let mut buf: Vec<C64> = (0..len)
        .map(|l| {
            let z = C64::from_polar(rho, 2.0 * PI * l as f64 / len as f64);
            khat((1.0 - z) / h)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    (0..=count).map(|j| buf[j].re / (len as f64 * rho.powi(j as i32))).collect()
}

/// Radau IIA convolution quadrature for one transfer kernel and step `h`.
pub struct RadauCq {
    pub tableau: RadauTableau,
    pub h: f64,
    kernel: Kernel,
    a_eigs: Vec<C64>,
    nu_eigs: Vec<C64>,
    contour: PointContour,
}

fn eigenvalues(x: &DMatrix<f64>) -> Vec<C64> {
    let (_, t) = Schur::new(to_complex(x)).unpack();
    (0..x.nrows()).map(|i| t[(i, i)]).collect()
}

impl RadauCq {
    pub fn new(kernel: &Kernel, stages: usize, h: f64, r: usize) -> Result<Self, Error> {
        if !kernel.is_transfer() {
            return Err(Error::InvalidArgument(format!(
                "convolution quadrature needs a transfer kernel, got {}",
                kernel.name
            )));
        }
        let tableau = RadauTableau::new(stages)?;
        let s = stages;
        let ones_b = DMatrix::from_fn(s, s, |_, j| tableau.b[j]);
        let a_eigs = eigenvalues(&tableau.a);
        let nu_eigs = eigenvalues(&(&tableau.a - ones_b))
            .into_iter()
            .filter(|v| v.norm() > 1e-12)
            .collect();
        Ok(RadauCq { tableau, h, kernel: kernel.clone(), a_eigs, nu_eigs, contour: PointContour::new(r)? })
    }

    pub fn stages(&self) -> usize {
        self.tableau.stages()
    }

    fn khat(&self, l: C64) -> C64 {
        self.kernel.khat(l).expect("transfer kernel")
    }

    /// `k̂(Δ(ζ)/h)` with `Δ(ζ) = (A + ζ/(1−ζ)·1bᵀ)^{−1}`.
    pub fn generating(&self, zeta: C64) -> Result<DMatrix<C64>, Error> {
        let s = self.stages();
        let f = zeta / (1.0 - zeta);
        let m = DMatrix::from_fn(s, s, |i, j| self.tableau.a[(i, j)] + f * self.tableau.b[j]);
        let x = inverse(&m)? / C64::new(self.h, 0.0);
        matrix_function(&x, |l| self.khat(l))
    }

    /// Weights `W_0..=W_count` from the generating function on a circle.
    pub fn weights(&self, count: usize) -> Result<Vec<DMatrix<f64>>, Error> {
        let s = self.stages();
        let (len, rho) = circle_points(count, 64);
        let mut samples = Vec::with_capacity(len);
        for l in 0..len {
            samples.push(self.generating(C64::from_polar(rho, 2.0 * PI * l as f64 / len as f64))?);
        }
        let fft = FftPlanner::new().plan_fft_forward(len);
        let mut out = vec![DMatrix::zeros(s, s); count + 1];
        let mut buf = vec![C64::new(0.0, 0.0); len];
        for i in 0..s {
            for j in 0..s {
                for (b, w) in buf.iter_mut().zip(&samples) {
                    *b = w[(i, j)];
                }
                fft.process(&mut buf);
                for (k, w) in out.iter_mut().enumerate() {
                    w[(i, j)] = buf[k].re / (len as f64 * rho.powi(k as i32));
                }
            }
        }
        Ok(out)
    }

    /// `log r(z)` with `r(z) = det(I − z(A − 1bᵀ)) / det(I − zA)`, as a sum of
    /// principal logarithms of the linear factors.
    fn log_stability(&self, z: C64) -> C64 {
        let num: C64 = self.nu_eigs.iter().map(|v| (1.0 - z * v).ln()).sum();
        let den: C64 = self.a_eigs.iter().map(|v| (1.0 - z * v).ln()).sum();
        num - den
    }

    /// Continuous extension `W(x)` of the weights, `W(j) = W_j`, accurate for
    /// `x ≳ 16`.
    pub fn weight_at(&self, x: f64) -> Result<DMatrix<f64>, Error> {
        let s = self.stages();
        let p = self.contour.at(x * self.h);
        let e = DMatrix::from_fn(1, s, |_, j| C64::new(if j + 1 == s { 1.0 } else { 0.0 }, 0.0));
        let a = to_complex(&self.tableau.a);
        let ones = DMatrix::from_element(s, 1, C64::new(1.0, 0.0));
        let mut out = DMatrix::zeros(s, s);
        for (r, (g, dg)) in p.half_nodes().enumerate() {
            let z = g * self.h;
            let m = inverse(&(DMatrix::identity(s, s) - &a * z))?;
            let left = &m * &ones;
            let right = &e * &m * &a;
            let v = self.khat(g);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Contour(format!("transfer function not finite at {g}")));
            }
            let c = C64::new(0.0, p.tau / (2.0 * PI))
                * dg
                * v
                * self.h
                * ((x - 1.0) * self.log_stability(z)).exp();
            let w = if r == 0 { 1.0 } else { 2.0 };
            let term = (&left * &right) * c;
            out += term.map(|v| w * v.re);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{power_transfer, Sector};

    fn integrator(power: i32) -> Kernel {
        let sector = Sector { shift: 0.0, angle: PI, bound: 1.0, decay: power as f64 };
        Kernel::transfer("int", sector, move |l: C64| l.powi(-power)).unwrap()
    }

    #[test]
    fn euler_integrator() {
        let w = cq_weights_euler(|l| 1.0 / l, 0.25, 40);
        for v in w {
            assert!((v - 0.25).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn euler_abel_binomial() {
        let h: f64 = 0.1;
        let w = cq_weights_euler(|l| l.powf(-0.5), h, 100);
        let mut c = 1.0;
        for (n, v) in w.iter().enumerate() {
            if n > 0 {
                c *= (n as f64 - 0.5) / n as f64;
            }
            assert!((v - h.sqrt() * c).abs() < 1e-9 * h.sqrt() * c, "n={n}");
        }
    }

    #[test]
    fn euler_single_weight() {
        let w = cq_weights_euler(|l| 1.0 / (l + 2.0), 0.5, 0);
        // ω_0 = k̂(1/h)
        assert!((w[0] - 1.0 / 4.0).abs() < 1e-9);
    }

    #[test]
    fn radau_integrator_weights() {
        for s in 1..=3 {
            let h = 0.3;
            let cq = RadauCq::new(&integrator(1), s, h, 15).unwrap();
            let w = cq.weights(20).unwrap();
            let a = &cq.tableau.a;
            for i in 0..s {
                for j in 0..s {
                    assert!((w[0][(i, j)] - h * a[(i, j)]).abs() < 1e-10);
                    for wk in &w[1..] {
                        assert!((wk[(i, j)] - h * cq.tableau.b[j]).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn radau_double_integrator_weights() {
        let s = 3;
        let h = 0.2;
        let cq = RadauCq::new(&integrator(2), s, h, 15).unwrap();
        let w = cq.weights(30).unwrap();
        let a = &cq.tableau.a;
        let one_b = DMatrix::from_fn(s, s, |_, j| cq.tableau.b[j]);
        let base = a * &one_b + &one_b * a;
        assert!((&w[0] - a * a * (h * h)).amax() < 1e-10);
        for (j, wj) in w.iter().enumerate().skip(1) {
            let want = (&base + &one_b * (j as f64 - 1.0)) * (h * h);
            assert!((wj - want).amax() < 1e-9 * (j as f64), "j={j}");
        }
    }

    #[test]
    fn continuous_weights_match_fft() {
        let k = power_transfer(0.5).unwrap();
        for s in 1..=3 {
            let cq = RadauCq::new(&k, s, 60.0 / 512.0, 30).unwrap();
            let w = cq.weights(64).unwrap();
            for j in [16usize, 23, 40, 64] {
                let c = cq.weight_at(j as f64).unwrap();
                let err = (&c - &w[j]).amax() / w[j].amax();
                assert!(err < 1e-8, "s={s} j={j} err={err:e}");
            }
        }
    }

    #[test]
    fn continuous_integrator_constant() {
        let cq = RadauCq::new(&integrator(1), 2, 0.1, 20).unwrap();
        for x in [16.0, 20.5, 100.0] {
            let w = cq.weight_at(x).unwrap();
            for j in 0..2 {
                assert!((w[(0, j)] - 0.1 * cq.tableau.b[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn euler_cross_check_one_stage() {
        // Radau IIA with one stage is implicit Euler
        let k = power_transfer(0.5).unwrap();
        let cq = RadauCq::new(&k, 1, 0.05, 15).unwrap();
        let w = cq.weights(50).unwrap();
        let e = cq_weights_euler(|l| l.powf(-0.5), 0.05, 50);
        for j in 0..=50 {
            assert!((w[j][(0, 0)] - e[j]).abs() < 1e-9 * e[j].abs());
        }
    }
}
