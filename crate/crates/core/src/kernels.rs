//! Reproducing kernels on real regressor vectors.
//!
//! Three kernels are supported: the linear kernel `u·v`, the Gaussian kernel
//! `exp(-xi ||u - v||^2)` and the hybrid sum-space kernel
//! `w_lin (u·v) + w_gauss exp(-xi ||u - v||^2)`. All function-space algebra in
//! the crate goes through point evaluations of these kernels; the weighted
//! sum-space inner product is never formed explicitly.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

/// Closed description of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Gaussian { xi: f64 },
    Hybrid { w_lin: f64, w_gauss: f64, xi: f64 },
}

/// Kernel family without parameters, used for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Linear,
    Gaussian,
    Hybrid,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Gaussian => "gaussian",
            KernelKind::Hybrid => "hybrid",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelKind::Linear),
            "gaussian" | "gauss" => Ok(KernelKind::Gaussian),
            "hybrid" => Ok(KernelKind::Hybrid),
            other => Err(format!("unknown kernel `{other}` (linear|gaussian|hybrid)")),
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be a positive finite number, got {value}")))
    }
}

impl KernelSpec {
    pub fn gaussian(xi: f64) -> Result<Self> {
        check_positive("xi", xi)?;
        Ok(KernelSpec::Gaussian { xi })
    }

    pub fn hybrid(w_lin: f64, w_gauss: f64, xi: f64) -> Result<Self> {
        check_positive("w_lin", w_lin)?;
        check_positive("w_gauss", w_gauss)?;
        check_positive("xi", xi)?;
        Ok(KernelSpec::Hybrid { w_lin, w_gauss, xi })
    }

    /// Re-checks the parameter invariants, for specs built as enum literals.
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Gaussian { xi } => check_positive("xi", xi),
            KernelSpec::Hybrid { w_lin, w_gauss, xi } => {
                check_positive("w_lin", w_lin)?;
                check_positive("w_gauss", w_gauss)?;
                check_positive("xi", xi)
            }
        }
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            KernelSpec::Linear => KernelKind::Linear,
            KernelSpec::Gaussian { .. } => KernelKind::Gaussian,
            KernelSpec::Hybrid { .. } => KernelKind::Hybrid,
        }
    }

    /// Evaluates the kernel, rejecting vectors of different length.
    pub fn eval(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(u.len(), v.len())?;
        if u.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(self.eval_unchecked(u, v))
    }

    /// Evaluates the kernel without the length check. Callers guarantee
    /// `u.len() == v.len()`.
    #[inline]
    pub fn eval_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), v.len());
        match *self {
            KernelSpec::Linear => dot(u, v),
            KernelSpec::Gaussian { xi } => (-xi * squared_distance(u, v)).exp(),
            KernelSpec::Hybrid { w_lin, w_gauss, xi } => {
                w_lin * dot(u, v) + w_gauss * (-xi * squared_distance(u, v)).exp()
            }
        }
    }

    /// `kappa(u, u)`, the squared norm of the kernel section at `u`.
    #[inline]
    pub fn self_eval(&self, u: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(u, u),
            KernelSpec::Gaussian { .. } => 1.0,
            KernelSpec::Hybrid { w_lin, w_gauss, .. } => w_lin * dot(u, u) + w_gauss,
        }
    }
}

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

// Direct difference form; expanding ||u||^2 + ||v||^2 - 2u.v cancels badly
// for nearby points.
#[inline]
fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Gram matrix `G[i][j] = kappa(points[i], points[j])`.
pub fn gram_matrix<P: AsRef<[f64]>>(spec: &KernelSpec, points: &[P]) -> Result<DMatrix<f64>> {
    let n = points.len();
    if let Some(first) = points.first() {
        let dim = first.as_ref().len();
        for p in points {
            check_len(dim, p.as_ref().len())?;
        }
    }
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let k = spec.eval_unchecked(points[i].as_ref(), points[j].as_ref());
            g[(i, j)] = k;
            g[(j, i)] = k;
        }
    }
    Ok(g)
}
