//! Discrete Volterra operator: everything the evaluators need to know about
//! one kernel on one grid.
//!
//! Time is measured in fine cells of width `h`. Cell `m` (1-based) covers
//! `[(m−1)h, mh]`; macro interval `M` on level `ℓ` covers
//! `n_min·2^{ℓ−1}` consecutive cells.

use nalgebra::DMatrix;

use super::cq::RadauCq;
use super::nearfield::{nearfield_collocation, nearfield_radau, KernelEval};
use super::Kernel;
use crate::basis::{BasisTables, LagrangeBasis, MomentRule};
use crate::Error;

/// Time discretization of the integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Collocation with exact (product) integration of every cell.
    Collocation,
    /// Collocation whose cell integrals use the Radau quadrature rule.
    RadauQuadrature,
    /// Radau IIA convolution quadrature; transfer kernels only.
    ConvolutionQuadrature,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "collocation" => Ok(Scheme::Collocation),
            "radau" => Ok(Scheme::RadauQuadrature),
            "cq" => Ok(Scheme::ConvolutionQuadrature),
            _ => Err(Error::InvalidArgument(format!("unknown scheme {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    /// Radau IIA stages per cell.
    pub stages: usize,
    /// Kernel interpolation degree.
    pub q: usize,
    pub h: f64,
    /// Fine cells per finest farfield interval.
    pub n_min: usize,
    pub scheme: Scheme,
    /// Half the number of contour nodes.
    pub r: usize,
    /// Number of convolution quadrature weights computed by FFT; defaults to
    /// what the nearfield of the fast evaluator needs.
    pub cq_weights: Option<usize>,
    /// Whether farfield blocks will be requested; evaluators that couple
    /// every cell pair directly switch this off.
    pub farfield: bool,
}

impl Config {
    pub fn new(stages: usize, q: usize, h: f64) -> Self {
        Config { stages, q, h, n_min: 1, scheme: Scheme::Collocation, r: 15, cq_weights: None, farfield: true }
    }

    pub fn n_min(mut self, n_min: usize) -> Self {
        self.n_min = n_min;
        self
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn contour_nodes(mut self, r: usize) -> Self {
        self.r = r;
        self
    }
}

/// Kronecker product `x ⊗ I_k`.
pub(crate) fn kron_identity(x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    if k == 1 {
        return x.clone();
    }
    let mut out = DMatrix::zeros(x.nrows() * k, x.ncols() * k);
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            for d in 0..k {
                out[(i * k + d, j * k + d)] = x[(i, j)];
            }
        }
    }
    out
}

pub struct Operator {
    pub kernel: Kernel,
    pub config: Config,
    pub tables: BasisTables,
    eval: KernelEval,
    cq: Option<RadauCq>,
    cq_weights: Vec<DMatrix<f64>>,
    kappa: usize,
    moments: Vec<DMatrix<f64>>,
    evaluations: Vec<DMatrix<f64>>,
    cell_moment: DMatrix<f64>,
    transfer: [DMatrix<f64>; 2],
    near_conv: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl std::fmt::Debug for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Operator").field("kernel", &self.kernel).field("config", &self.config).finish()
    }
}

impl Operator {
    pub fn new(kernel: &Kernel, config: Config) -> Result<Self, Error> {
        let Config { stages, q, h, n_min, scheme, r, .. } = config;
        if n_min == 0 || !n_min.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n_min));
        }
        if r == 0 {
            return Err(Error::InvalidArgument("contour needs R ≥ 1".into()));
        }
        match scheme {
            Scheme::ConvolutionQuadrature if !kernel.is_transfer() => {
                return Err(Error::InvalidArgument(format!(
                    "convolution quadrature needs a transfer kernel, got {}",
                    kernel.name
                )))
            }
            Scheme::RadauQuadrature if kernel.singular_exponent().is_some() => {
                return Err(Error::InvalidArgument(format!(
                    "Radau quadrature cannot integrate the singular kernel {}",
                    kernel.name
                )))
            }
            _ => {}
        }
        let tables = BasisTables::new(stages, q, h)?;
        let eval = KernelEval::new(kernel, r)?;
        let nmf = n_min as f64;
        let (kappa, cq, cq_weights) = if scheme == Scheme::ConvolutionQuadrature {
            let cq = RadauCq::new(kernel, stages, h, r)?;
            let w = cq.weights(config.cq_weights.unwrap_or(2 * n_min + 1))?;
            (stages, Some(cq), w)
        } else {
            (1, None, Vec::new())
        };
        let (moments, evaluations, cell_moment) = if scheme == Scheme::ConvolutionQuadrature {
            let mut mo = Vec::with_capacity(n_min);
            let mut ev = Vec::with_capacity(n_min);
            for pos in 1..=n_min {
                let phi = tables.kernel.eval_all((pos as f64 - 0.5) / nmf);
                let col = DMatrix::from_column_slice(q + 1, 1, &phi);
                mo.push(kron_identity(&col, stages));
                ev.push(kron_identity(&col.transpose(), stages));
            }
            (mo, ev, DMatrix::zeros(0, 0))
        } else {
            let rule = if scheme == Scheme::Collocation { MomentRule::Exact } else { MomentRule::Radau };
            let mo = (1..=n_min).map(|p| tables.moments(rule, (p - 1) as f64 / nmf, 1.0 / nmf)).collect();
            let ev = (1..=n_min).map(|p| tables.evaluation((p - 1) as f64 / nmf, 1.0 / nmf)).collect();
            let cell = tables.moments(rule, 0.0, 1.0);
            (mo, ev, cell)
        };
        let transfer = [kron_identity(&tables.a1, kappa), kron_identity(&tables.a2, kappa)];
        let mut op = Operator {
            kernel: kernel.clone(),
            config,
            tables,
            eval,
            cq,
            cq_weights,
            kappa,
            moments,
            evaluations,
            cell_moment,
            transfer,
            near_conv: None,
        };
        if kernel.is_convolution() {
            op.near_conv = Some(op.compute_near(2)?);
        }
        if let (Some(cq), true) = (&op.cq, config.farfield) {
            // the contour extension of the weights must agree with the FFT
            // weights at the shortest farfield distance
            let w = &op.cq_weights[n_min];
            let err = (cq.weight_at(nmf)? - w).amax() / w.amax();
            if err.is_nan() || err >= 1e-6 {
                return Err(Error::Contour(format!(
                    "farfield weights inaccurate at distance {n_min} (relative error {err:e}); increase n_min"
                )));
            }
        }
        Ok(op)
    }

    pub fn stages(&self) -> usize {
        self.config.stages
    }

    pub fn n_min(&self) -> usize {
        self.config.n_min
    }

    pub fn h(&self) -> f64 {
        self.config.h
    }

    /// Kernel block dimension: 1 for scalar kernels, `stages` for CQ.
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Size of a moment / potential vector.
    pub fn block_dim(&self) -> usize {
        (self.config.q + 1) * self.kappa
    }

    pub fn is_convolution(&self) -> bool {
        self.kernel.is_convolution()
    }

    /// Moments of cell `pos` (1-based) inside a finest macro interval;
    /// `block_dim × stages`.
    pub fn moment(&self, pos: usize) -> &DMatrix<f64> {
        &self.moments[pos - 1]
    }

    /// Evaluation of a finest macro potential at the nodes of cell `pos`;
    /// `stages × block_dim`.
    pub fn evaluation(&self, pos: usize) -> &DMatrix<f64> {
        &self.evaluations[pos - 1]
    }

    /// Transfer matrix for child position `b ∈ {1, 2}`.
    pub fn transfer(&self, b: usize) -> &DMatrix<f64> {
        &self.transfer[b - 1]
    }

    fn node_times(&self, basis: &LagrangeBasis, start: f64, width: f64) -> Vec<f64> {
        basis.nodes.iter().map(|x| start + x * width).collect()
    }

    /// Kernel coefficients between macro interval `row` and `col` on
    /// `level`; `block_dim × block_dim`.
    pub fn block(&self, level: usize, row: usize, col: usize) -> Result<DMatrix<f64>, Error> {
        if !self.config.farfield {
            return Err(Error::InvalidArgument("operator was built without farfield".into()));
        }
        if row < col + 2 {
            return Err(Error::InvalidArgument(format!(
                "block ({row}, {col}) on level {level} is not admissible"
            )));
        }
        let width = (self.config.n_min << (level - 1)) as f64;
        self.interp_block(width, row, col, width)
    }

    /// Interpolated kernel between two intervals of `width` cells whose
    /// left ends are `(row−1)·stride` and `(col−1)·stride`.
    fn interp_block(&self, width: f64, row: usize, col: usize, stride: f64) -> Result<DMatrix<f64>, Error> {
        let basis = &self.tables.kernel;
        let nq = basis.len();
        let rt = self.node_times(basis, (row - 1) as f64 * stride, width);
        let ct = self.node_times(basis, (col - 1) as f64 * stride, width);
        match &self.cq {
            Some(cq) => {
                let k = self.kappa;
                let mut out = DMatrix::zeros(nq * k, nq * k);
                for (a, &t) in rt.iter().enumerate() {
                    for (b, &s) in ct.iter().enumerate() {
                        let w = cq.weight_at(t - s)?;
                        out.view_mut((a * k, b * k), (k, k)).copy_from(&w);
                    }
                }
                Ok(out)
            }
            None => {
                let h = self.h();
                let mut out = DMatrix::zeros(nq, nq);
                for (a, &t) in rt.iter().enumerate() {
                    for (b, &s) in ct.iter().enumerate() {
                        out[(a, b)] = self.eval.value(t * h, s * h)?;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Coupling of a well separated cell pair `n ≤ m − 2`; `stages × stages`.
    pub fn cell_block(&self, m: usize, n: usize) -> Result<DMatrix<f64>, Error> {
        if n + 2 > m {
            return Err(Error::InvalidArgument(format!("cells ({m}, {n}) are not separated")));
        }
        if self.cq.is_some() {
            return self.cq_weights.get(m - n).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!("convolution weight {} not precomputed", m - n))
            });
        }
        let k = self.interp_block(1.0, m, n, 1.0)?;
        Ok(&self.tables.p * k * &self.cell_moment)
    }

    /// Nearfield pair `(K^{m,m−1}, K^{m,m})`.
    pub fn near(&self, m: usize) -> Result<(DMatrix<f64>, DMatrix<f64>), Error> {
        if let Some((p, d)) = &self.near_conv {
            if m == 1 {
                return Ok((DMatrix::zeros(p.nrows(), p.ncols()), d.clone()));
            }
            return Ok((p.clone(), d.clone()));
        }
        self.compute_near(m)
    }

    fn compute_near(&self, m: usize) -> Result<(DMatrix<f64>, DMatrix<f64>), Error> {
        match self.config.scheme {
            Scheme::Collocation => nearfield_collocation(&self.eval, &self.tables, m),
            Scheme::RadauQuadrature => nearfield_radau(&self.eval, &self.tables, m),
            Scheme::ConvolutionQuadrature => {
                let w = &self.cq_weights;
                let prev = if m > 1 { w[1].clone() } else { DMatrix::zeros(w[0].nrows(), w[0].ncols()) };
                Ok((prev, w[0].clone()))
            }
        }
    }

    /// Number of FFT-computed convolution weights available.
    pub fn cq_weight_count(&self) -> usize {
        self.cq_weights.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{difference_monomial, gauss_voc, one, power_transfer};

    #[test]
    fn block_values() {
        let op = Operator::new(&one(), Config::new(2, 3, 0.1)).unwrap();
        let b = op.block(2, 4, 2).unwrap();
        assert!(b.iter().all(|&v| v == 1.0));
        assert!(op.block(1, 3, 2).is_err());
        let g = Operator::new(&gauss_voc(), Config::new(2, 2, 0.1).n_min(2)).unwrap();
        let b = g.block(1, 3, 1).unwrap();
        // level 1 macro of 2 cells: rows span [0.4, 0.6], cols [0, 0.2]
        let x = crate::basis::chebyshev_nodes(2);
        for a in 0..3 {
            for c in 0..3 {
                let (t, s) = (0.4 + 0.2 * x[a], 0.2 * x[c]);
                assert!((b[(a, c)] - (s * s - t * t).exp()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn plane_kernel_cell_block_exact() {
        // k = t − s is reproduced exactly, so P k Q equals the integral
        let op = Operator::new(&difference_monomial(1), Config::new(2, 1, 0.5)).unwrap();
        let b = op.cell_block(5, 2).unwrap();
        for (j, cj) in op.tables.radau.c.iter().enumerate() {
            let t = (4.0 + cj) * 0.5;
            // f ≡ 1: Σ_r b[j,r] = ∫_{0.5}^{1} (t − s) ds
            let want = 0.5 * t - (1.0 - 0.25) / 2.0;
            assert!((b.row(j).sum() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn cq_operator_validates_nmin() {
        let k = power_transfer(0.5).unwrap();
        let cfg = Config::new(3, 8, 60.0 / 256.0).scheme(Scheme::ConvolutionQuadrature);
        assert!(Operator::new(&k, cfg.n_min(16)).is_ok());
        assert!(matches!(Operator::new(&k, cfg.n_min(1)), Err(Error::Contour(_))));
        assert!(Operator::new(&one(), cfg.n_min(16)).is_err());
    }

    #[test]
    fn kron_layout() {
        let x = DMatrix::from_row_slice(1, 2, &[2.0, 3.0]);
        let k = kron_identity(&x, 2);
        assert_eq!(k, DMatrix::from_row_slice(2, 4, &[2.0, 0.0, 3.0, 0.0, 0.0, 2.0, 0.0, 3.0]));
    }
}
