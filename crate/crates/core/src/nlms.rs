//! Normalized LMS baseline on the real-stacked regressor.
//!
//! Real and imaginary targets are tracked by two independent weight vectors,
//! mirroring the APSM split:
//!
//! ```text
//! e_c = y_c - w_c^T x
//! w_c <- w_c + mu * e_c * x / (x^T x + delta)
//! ```

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::kernels::dot;

pub const DEFAULT_DELTA: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct NlmsFilter {
    w_real: Vec<f64>,
    w_imag: Vec<f64>,
    mu: f64,
    delta: f64,
    skipped: u64,
}

impl NlmsFilter {
    pub fn new(dim: usize, mu: f64, delta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "regressor length must be positive"));
        }
        if !(mu > 0.0 && mu <= 2.0) {
            return Err(Error::invalid("mu", format!("must lie in (0, 2], got {mu}")));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
        }
        Ok(Self {
            w_real: vec![0.0; dim],
            w_imag: vec![0.0; dim],
            mu,
            delta,
            skipped: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.w_real.len()
    }

    pub fn weights(&self) -> (&[f64], &[f64]) {
        (&self.w_real, &self.w_imag)
    }

    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn predict(&self, x: &[f64]) -> Result<Complex64> {
        check_len(self.dim(), x.len())?;
        Ok(Complex64::new(dot(&self.w_real, x), dot(&self.w_imag, x)))
    }

    /// One NLMS update; returns the a-priori residual.
    pub fn nlms_step(&mut self, x: &[f64], y: Complex64) -> Result<Complex64> {
        check_len(self.dim(), x.len())?;
        if !y.re.is_finite() || !y.im.is_finite() || x.iter().any(|v| !v.is_finite()) {
            self.skipped += 1;
            return Err(Error::NonFinite);
        }
        let e = y - self.predict(x)?;
        let gain = self.mu / (dot(x, x) + self.delta);
        for ((wr, wi), xv) in self.w_real.iter_mut().zip(self.w_imag.iter_mut()).zip(x) {
            *wr += gain * e.re * xv;
            *wi += gain * e.im * xv;
        }
        Ok(e)
    }
}
