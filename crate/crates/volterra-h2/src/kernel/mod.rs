//! Kernels given in the time domain or through their Laplace transform.

pub mod contour;
pub mod cq;
pub mod matfun;
pub mod nearfield;
pub mod operator;

use std::fmt;
use std::sync::Arc;

use nalgebra::Complex;
use statrs::function::gamma::gamma;

use crate::Error;

pub type C64 = Complex<f64>;

type TimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type TransferFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// Analyticity data of a transfer function: `k̂` is analytic in
/// `|arg(λ − shift)| < angle` with `|k̂(λ)| ≤ bound·|λ|^{−decay}` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub shift: f64,
    pub angle: f64,
    pub bound: f64,
    pub decay: f64,
}

#[derive(Clone)]
pub enum KernelSpec {
    /// `k(t, s)` evaluated directly. `singular` is the exponent `β` of a
    /// diagonal singularity `k ~ (t−s)^β`, in which case `smooth` must
    /// return `k(t,s)·(t−s)^{−β}`.
    TimeDomain {
        k: TimeFn,
        smooth: Option<TimeFn>,
        convolution: bool,
        singular: Option<f64>,
    },
    /// Convolution kernel known through `k̂(λ)`.
    Transfer { khat: TransferFn, sector: Sector },
}

/// A named kernel.
#[derive(Clone)]
pub struct Kernel {
    pub name: String,
    pub spec: KernelSpec,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.spec {
            KernelSpec::TimeDomain { convolution, singular, .. } => {
                format!("time-domain convolution={convolution} singular={singular:?}")
            }
            KernelSpec::Transfer { sector, .. } => format!("transfer {sector:?}"),
        };
        write!(f, "Kernel({}, {kind})", self.name)
    }
}

impl Kernel {
    pub fn time_domain(
        name: &str,
        convolution: bool,
        k: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Kernel {
            name: name.into(),
            spec: KernelSpec::TimeDomain { k: Arc::new(k), smooth: None, convolution, singular: None },
        }
    }

    /// Kernel `(t−s)^β · smooth(t, s)` with `β > −1`.
    pub fn singular(
        name: &str,
        convolution: bool,
        beta: f64,
        smooth: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, Error> {
        if beta <= -1.0 {
            return Err(Error::InvalidArgument(format!("non-integrable exponent {beta}")));
        }
        let smooth: TimeFn = Arc::new(smooth);
        let s2 = smooth.clone();
        let k: TimeFn = Arc::new(move |t, s| (t - s).powf(beta) * s2(t, s));
        Ok(Kernel {
            name: name.into(),
            spec: KernelSpec::TimeDomain { k, smooth: Some(smooth), convolution, singular: Some(beta) },
        })
    }

    pub fn transfer(
        name: &str,
        sector: Sector,
        khat: impl Fn(C64) -> C64 + Send + Sync + 'static,
    ) -> Result<Self, Error> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(sector.angle > half_pi && sector.angle <= std::f64::consts::PI) || sector.decay <= 0.0 {
            return Err(Error::InvalidArgument(format!("bad sector {sector:?}")));
        }
        Ok(Kernel { name: name.into(), spec: KernelSpec::Transfer { khat: Arc::new(khat), sector } })
    }

    pub fn is_convolution(&self) -> bool {
        match &self.spec {
            KernelSpec::TimeDomain { convolution, .. } => *convolution,
            KernelSpec::Transfer { .. } => true,
        }
    }

    pub fn is_transfer(&self) -> bool {
        matches!(self.spec, KernelSpec::Transfer { .. })
    }

    /// Exponent of the diagonal singularity, if any. Transfer kernels with
    /// decay `μ < 1` behave like `t^{μ−1}`.
    pub fn singular_exponent(&self) -> Option<f64> {
        match &self.spec {
            KernelSpec::TimeDomain { singular, .. } => *singular,
            KernelSpec::Transfer { sector, .. } => (sector.decay < 1.0).then_some(sector.decay - 1.0),
        }
    }

    pub fn khat(&self, lambda: C64) -> Option<C64> {
        match &self.spec {
            KernelSpec::Transfer { khat, .. } => Some(khat(lambda)),
            _ => None,
        }
    }

    pub fn sector(&self) -> Option<Sector> {
        match &self.spec {
            KernelSpec::Transfer { sector, .. } => Some(*sector),
            _ => None,
        }
    }
}

/// `k ≡ 1`.
pub fn one() -> Kernel {
    Kernel::time_domain("one", true, |_, _| 1.0)
}

/// `k(t,s) = (t−s)^deg`.
pub fn difference_monomial(deg: i32) -> Kernel {
    Kernel::time_domain(&format!("monomial{deg}"), true, move |t, s| (t - s).powi(deg))
}

/// `k(t,s) = (t−s)^{α−1}/Γ(α)`, the Abel kernel with `k̂ = λ^{−α}`.
pub fn difference_power(alpha: f64) -> Result<Kernel, Error> {
    if alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("alpha = {alpha}")));
    }
    let g = gamma(alpha);
    let name = format!("difference-power({alpha})");
    if alpha >= 1.0 {
        Ok(Kernel::time_domain(&name, true, move |t, s| (t - s).powf(alpha - 1.0) / g))
    } else {
        Kernel::singular(&name, true, alpha - 1.0, move |_, _| 1.0 / g)
    }
}

/// `k̂(λ) = λ^{−α}` on the principal branch.
pub fn power_transfer(alpha: f64) -> Result<Kernel, Error> {
    let sector = Sector { shift: 0.0, angle: std::f64::consts::PI, bound: 1.0, decay: alpha };
    Kernel::transfer(&format!("power-transfer({alpha})"), sector, move |l: C64| l.powf(-alpha))
}

/// `k(t,s) = exp(s² − t²)`.
pub fn gauss_voc() -> Kernel {
    Kernel::time_domain("gauss-voc", false, |t, s| (s * s - t * t).exp())
}

/// Look up a built-in kernel by its CLI name.
pub fn builtin(name: &str) -> Result<Kernel, Error> {
    match name {
        "one" => Ok(one()),
        "gauss-voc" => Ok(gauss_voc()),
        "linear" => Ok(difference_monomial(1)),
        "quadratic" => Ok(difference_monomial(2)),
        _ => {
            if let Some(a) = name.strip_prefix("difference-power:") {
                let a: f64 = a.parse().map_err(|_| Error::InvalidArgument(name.into()))?;
                difference_power(a)
            } else if let Some(a) = name.strip_prefix("power-transfer:") {
                let a: f64 = a.parse().map_err(|_| Error::InvalidArgument(name.into()))?;
                power_transfer(a)
            } else {
                Err(Error::InvalidArgument(format!("unknown kernel {name}")))
            }
        }
    }
}
