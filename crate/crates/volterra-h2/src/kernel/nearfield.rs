//! Pointwise kernel values and the nearfield matrices `K^{m,m−1}`, `K^{m,m}`.

use nalgebra::DMatrix;

use super::contour::PointContour;
use super::{Kernel, KernelSpec};
use crate::basis::{gauss_jacobi, gauss_legendre, BasisTables, Rule};
use crate::Error;

/// Time-domain access to any kernel; transfer kernels are inverted
/// pointwise on their own contour.
#[derive(Clone)]
pub struct KernelEval {
    pub kernel: Kernel,
    contour: Option<PointContour>,
}

impl KernelEval {
    pub fn new(kernel: &Kernel, r: usize) -> Result<Self, Error> {
        let contour = if kernel.is_transfer() { Some(PointContour::new(r)?) } else { None };
        Ok(KernelEval { kernel: kernel.clone(), contour })
    }

    pub fn value(&self, t: f64, s: f64) -> Result<f64, Error> {
        match &self.kernel.spec {
            KernelSpec::TimeDomain { k, .. } => Ok(k(t, s)),
            KernelSpec::Transfer { khat, .. } => {
                let d = t - s;
                if d <= 0.0 {
                    return Err(Error::InvalidArgument(format!("transfer kernel at lag {d}")));
                }
                self.contour.as_ref().expect("contour").eval(|l| khat(l), d)
            }
        }
    }

    /// `k(t,s)·(t−s)^{−β}` for a kernel with diagonal exponent `β`.
    pub fn smooth(&self, t: f64, s: f64) -> Result<f64, Error> {
        match (&self.kernel.spec, self.kernel.singular_exponent()) {
            (KernelSpec::TimeDomain { smooth: Some(g), .. }, _) => Ok(g(t, s)),
            (_, Some(beta)) => Ok(self.value(t, s)? * (t - s).powf(-beta)),
            _ => self.value(t, s),
        }
    }

    /// Tolerance a quadrature of this kernel can honour.
    fn tolerance(&self) -> f64 {
        if self.kernel.is_transfer() {
            1e-7
        } else {
            1e-13
        }
    }
}

/// Vector-valued adaptive Gauss–Legendre quadrature on `[a, b]`.
const GL_POINTS: usize = 20;

thread_local! {
    static GL_RULE: Rule = gauss_legendre(GL_POINTS);
}

fn gl_panel<F>(f: &F, lo: f64, hi: f64, n: usize, abs: bool) -> Result<Vec<f64>, Error>
where
    F: Fn(f64, &mut [f64]) -> Result<(), Error>,
{
    let rule = GL_RULE.with(|r| r.mapped(lo, hi));
    let mut acc = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for (&x, &w) in rule.x.iter().zip(&rule.w) {
        f(x, &mut tmp)?;
        for (a, v) in acc.iter_mut().zip(&tmp) {
            *a += w * if abs { v.abs() } else { *v };
        }
    }
    Ok(acc)
}

/// Adds `∫_a^b f` to `out`, to relative accuracy `tol` measured against
/// `∫_a^b |f|`.
fn adaptive<F>(f: &F, a: f64, b: f64, tol: f64, depth: usize, out: &mut [f64]) -> Result<(), Error>
where
    F: Fn(f64, &mut [f64]) -> Result<(), Error>,
{
    let size = gl_panel(f, a, b, out.len(), true)?;
    let scale = size.iter().fold(0.0f64, |m, v| m.max(*v)).max(f64::MIN_POSITIVE);
    adaptive_panel(f, a, b, tol * scale, depth, out)
}

fn adaptive_panel<F>(f: &F, a: f64, b: f64, abs_tol: f64, depth: usize, out: &mut [f64]) -> Result<(), Error>
where
    F: Fn(f64, &mut [f64]) -> Result<(), Error>,
{
    let n = out.len();
    let whole = gl_panel(f, a, b, n, false)?;
    let mid = (a + b) / 2.0;
    let left = gl_panel(f, a, mid, n, false)?;
    let right = gl_panel(f, mid, b, n, false)?;
    let refined: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
    let diff = whole.iter().zip(&refined).fold(0.0f64, |m, (w, r)| m.max((w - r).abs()));
    if diff <= abs_tol || (b - a) < 1e-14 * (a.abs() + b.abs()) {
        for (o, v) in out.iter_mut().zip(&refined) {
            *o += v;
        }
        return Ok(());
    }
    if depth == 0 {
        return Err(Error::InvalidArgument(format!(
            "nearfield quadrature did not converge on [{a}, {b}] (difference {diff:e})"
        )));
    }
    adaptive_panel(f, a, mid, abs_tol / 2.0, depth - 1, out)?;
    adaptive_panel(f, mid, b, abs_tol / 2.0, depth - 1, out)
}

/// `∫_a^t (t−s)^β g(s) ds` for every component of `g`, by Gauss–Jacobi.
fn jacobi_panel<F>(g: &F, beta: f64, a: f64, t: f64, pts: usize, out: &mut [f64]) -> Result<(), Error>
where
    F: Fn(f64, &mut [f64]) -> Result<(), Error>,
{
    if t <= a {
        return Ok(());
    }
    let rule = gauss_jacobi(pts, beta, 0.0)?;
    let half = (t - a) / 2.0;
    let scale = half.powf(beta + 1.0);
    let mut tmp = vec![0.0; out.len()];
    for (&x, &w) in rule.x.iter().zip(&rule.w) {
        g(a + half * (1.0 + x), &mut tmp)?;
        for (o, v) in out.iter_mut().zip(&tmp) {
            *o += scale * w * v;
        }
    }
    Ok(())
}

fn singular_integral<F>(g: &F, beta: f64, a: f64, t: f64, tol: f64, out: &mut [f64]) -> Result<(), Error>
where
    F: Fn(f64, &mut [f64]) -> Result<(), Error>,
{
    let n = out.len();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    jacobi_panel(g, beta, a, t, 16, &mut lo)?;
    jacobi_panel(g, beta, a, t, 32, &mut hi)?;
    let scale = hi.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let diff = lo.iter().zip(&hi).fold(0.0f64, |m, (l, h)| m.max((l - h).abs()));
    if diff > tol * scale.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "singular nearfield quadrature did not converge on [{a}, {t}] (difference {diff:e})"
        )));
    }
    for (o, v) in out.iter_mut().zip(&hi) {
        *o += v;
    }
    Ok(())
}

/// Product-integration nearfield: entry `(j, r)` of `K^{m,m}` is
/// `∫_{t^{m−1}}^{t_j} k(t_j, s) ψ_r(s) ds`, of `K^{m,m−1}` the same over the
/// previous cell. `K^{m,m−1}` is zero for `m = 1`.
pub fn nearfield_collocation(
    ev: &KernelEval,
    tables: &BasisTables,
    m: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>), Error> {
    let s = tables.stages();
    let h = tables.h;
    let tol = ev.tolerance();
    let mut prev = DMatrix::zeros(s, s);
    let mut diag = DMatrix::zeros(s, s);
    let start = (m - 1) as f64 * h;
    let beta = ev.kernel.singular_exponent();
    for j in 0..s {
        let t = start + tables.radau.c[j] * h;
        for (cell_start, target, is_prev) in [(start, &mut diag, false), (start - h, &mut prev, true)] {
            if is_prev && m == 1 {
                continue;
            }
            let mut row = vec![0.0; s];
            // integrate in the offset u = s − cell_start so that the basis
            // argument u/h keeps full relative precision
            let shift = if is_prev { 1.0 } else { 0.0 };
            let tl = (tables.radau.c[j] + shift) * h;
            match beta {
                None => {
                    let f = |u: f64, out: &mut [f64]| -> Result<(), Error> {
                        let k = ev.value(t, cell_start + u)?;
                        for (o, v) in out.iter_mut().zip(tables.data.eval_all(u / h)) {
                            *o = k * v;
                        }
                        Ok(())
                    };
                    let end = if is_prev { h } else { tl };
                    adaptive(&f, 0.0, end, tol, 30, &mut row)?;
                }
                Some(beta) => {
                    let g = |u: f64, out: &mut [f64]| -> Result<(), Error> {
                        let k = ev.smooth(t, cell_start + u)?;
                        for (o, v) in out.iter_mut().zip(tables.data.eval_all(u / h)) {
                            *o = k * v;
                        }
                        Ok(())
                    };
                    singular_integral(&g, beta, 0.0, tl, tol, &mut row)?;
                    if is_prev {
                        // remove ∫_{t^{m−1}}^{t_j}, same polynomial continued
                        let mut tail = vec![0.0; s];
                        singular_integral(&g, beta, h, tl, tol, &mut tail)?;
                        for (r, v) in row.iter_mut().zip(&tail) {
                            *r -= v;
                        }
                    }
                }
            }
            for r in 0..s {
                target[(j, r)] = row[r];
            }
        }
    }
    Ok((prev, diag))
}

/// Nearfield of the fully discrete scheme where every cell integral is
/// replaced by the Radau quadrature of its own collocation method.
pub fn nearfield_radau(
    ev: &KernelEval,
    tables: &BasisTables,
    m: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>), Error> {
    let s = tables.stages();
    let h = tables.h;
    let c = &tables.radau.c;
    let start = (m - 1) as f64 * h;
    let mut prev = DMatrix::zeros(s, s);
    let mut diag = DMatrix::zeros(s, s);
    for j in 0..s {
        let t = start + c[j] * h;
        for r in 0..s {
            diag[(j, r)] = h * tables.radau.a[(j, r)] * ev.value(t, start + c[r] * h)?;
            if m > 1 {
                prev[(j, r)] = h * tables.radau.b[r] * ev.value(t, start - h + c[r] * h)?;
            }
        }
    }
    Ok((prev, diag))
}
