//! Functions of small complex matrices via Schur–Parlett.

use nalgebra::{DMatrix, Schur};

use super::C64;
use crate::Error;

/// `f(X)` for a matrix with well separated eigenvalues.
pub fn matrix_function(x: &DMatrix<C64>, f: impl Fn(C64) -> C64) -> Result<DMatrix<C64>, Error> {
    let n = x.nrows();
    let (q, t) = Schur::new(x.clone()).unpack();
    let mut fm = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        fm[(i, i)] = f(t[(i, i)]);
    }
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let den = t[(j, j)] - t[(i, i)];
            if den.norm() < 1e-12 * (t[(i, i)].norm() + t[(j, j)].norm()) {
                return Err(Error::InvalidArgument("confluent eigenvalues".into()));
            }
            let mut num = t[(i, j)] * (fm[(j, j)] - fm[(i, i)]);
            for k in i + 1..j {
                num += t[(i, k)] * fm[(k, j)] - fm[(i, k)] * t[(k, j)];
            }
            fm[(i, j)] = num / den;
        }
    }
    Ok(&q * fm * q.adjoint())
}

/// Complex inverse of a small matrix.
pub fn inverse(x: &DMatrix<C64>) -> Result<DMatrix<C64>, Error> {
    x.clone().try_inverse().ok_or(Error::Singular)
}

pub fn to_complex(x: &DMatrix<f64>) -> DMatrix<C64> {
    x.map(|v| C64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_inverse_and_square() {
        let x = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 1.0, 0.3, -0.4, 3.0, 1.0, 0.2, 0.1, 5.0],
        );
        let xc = to_complex(&x);
        let inv = matrix_function(&xc, |z| 1.0 / z).unwrap();
        let id = &inv * &xc;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - C64::new(want, 0.0)).norm() < 1e-13);
            }
        }
        let sq = matrix_function(&xc, |z| z * z).unwrap();
        assert!((sq - &xc * &xc).norm() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let x = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, -2.0, 9.0]);
        let xc = to_complex(&x);
        let r = matrix_function(&xc, |z| z.sqrt()).unwrap();
        assert!((&r * &r - xc).norm() < 1e-12);
    }
}
