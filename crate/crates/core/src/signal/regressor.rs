use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tapped-delay window `[x[n + m_pre], .., x[n], .., x[n - m_post]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TapConfig {
    pub m_pre: usize,
    pub m_post: usize,
}

impl TapConfig {
    pub fn new(m_pre: usize, m_post: usize) -> Self {
        Self { m_pre, m_post }
    }

    /// Complex window length `M`.
    pub fn memory(&self) -> usize {
        self.m_pre + self.m_post + 1
    }

    /// Real regressor length `L = 2M`.
    pub fn regressor_len(&self) -> usize {
        2 * self.memory()
    }

    /// Leading samples whose window reaches before the start of the stream.
    pub fn warmup(&self) -> usize {
        self.m_pre + self.m_post
    }

    pub fn validate(&self) -> Result<()> {
        self.m_pre
            .checked_add(self.m_post)
            .and_then(|s| s.checked_add(1))
            .map(|_| ())
            .ok_or_else(|| Error::invalid("m_pre/m_post", "window length overflows"))
    }
}

impl Default for TapConfig {
    fn default() -> Self {
        Self::new(10, 10)
    }
}

/// Real-stacked regressor at index `n`: all real parts of the window, then all
/// imaginary parts. Samples outside the stream read as zero.
pub fn build_regressor(stream: &[Complex64], n: usize, cfg: TapConfig) -> Vec<f64> {
    let mut out = vec![0.0; cfg.regressor_len()];
    fill_regressor(stream, n, cfg, &mut out);
    out
}

/// In-place variant of [`build_regressor`]; `out.len()` must be `2M`.
pub fn fill_regressor(stream: &[Complex64], n: usize, cfg: TapConfig, out: &mut [f64]) {
    let m = cfg.memory();
    debug_assert_eq!(out.len(), 2 * m);
    let newest = n as i64 + cfg.m_pre as i64;
    for k in 0..m {
        let idx = newest - k as i64;
        let s = if idx >= 0 && (idx as usize) < stream.len() {
            stream[idx as usize]
        } else {
            Complex64::new(0.0, 0.0)
        };
        out[k] = s.re;
        out[m + k] = s.im;
    }
}
