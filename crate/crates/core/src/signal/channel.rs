//! Synthetic self-interference channel.
//!
//! Memory polynomial with odd orders 3 and 5, a linear FIR part, IQ imbalance
//! on the current sample and complex AWGN:
//!
//! ```text
//! y[n] = sum_m h_m x[n-m]
//!      + sum_m (a3_m x[n-m]|x[n-m]|^2 + a5_m x[n-m]|x[n-m]|^4)
//!      + c conj(x[n]) + z[n]
//! ```

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Odd-order memory-polynomial coefficients of one tap.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolyCoeffs {
    pub cubic: Complex64,
    pub quintic: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiChannelModel {
    pub memory_taps: Vec<Complex64>,
    /// Per-tap nonlinear coefficients; missing taps are zero.
    pub nl_coeffs: Vec<PolyCoeffs>,
    pub iq_imbalance: Complex64,
    /// Noise standard deviation per real dimension.
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SiChannelModel {
    fn default() -> Self {
        Self {
            memory_taps: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.3, -0.2),
                Complex64::new(0.0, 0.1),
            ],
            nl_coeffs: vec![PolyCoeffs {
                cubic: Complex64::new(0.08, -0.05),
                quintic: Complex64::new(0.01, 0.0),
            }],
            iq_imbalance: Complex64::new(0.05, 0.0),
            noise_std: 0.0,
            seed: 0,
        }
    }
}

/// Noise-free channel output split by term.
#[derive(Debug, Clone, PartialEq)]
pub struct SiComponents {
    pub linear: Vec<Complex64>,
    pub nonlinear: Vec<Complex64>,
    pub iq: Vec<Complex64>,
}

impl SiComponents {
    pub fn total(&self) -> Vec<Complex64> {
        self.linear
            .iter()
            .zip(&self.nonlinear)
            .zip(&self.iq)
            .map(|((a, b), c)| a + b + c)
            .collect()
    }
}

impl SiChannelModel {
    /// Purely linear FIR channel without IQ imbalance.
    pub fn linear(taps: Vec<Complex64>) -> Self {
        Self {
            memory_taps: taps,
            nl_coeffs: Vec::new(),
            iq_imbalance: Complex64::new(0.0, 0.0),
            noise_std: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.memory_taps.iter().any(|t| t.norm_sqr() > 0.0) {
            return Err(Error::invalid("taps", "at least one linear tap must be nonzero"));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::invalid("noise_std", format!("must be >= 0, got {}", self.noise_std)));
        }
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        let coeffs_finite = self.memory_taps.iter().all(finite)
            && self.nl_coeffs.iter().all(|p| finite(&p.cubic) && finite(&p.quintic))
            && finite(&self.iq_imbalance);
        if !coeffs_finite {
            return Err(Error::invalid("channel", "coefficients must be finite"));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.iq_imbalance.norm_sqr() == 0.0
            && self
                .nl_coeffs
                .iter()
                .all(|p| p.cubic.norm_sqr() == 0.0 && p.quintic.norm_sqr() == 0.0)
    }

    pub fn components(&self, x: &[Complex64]) -> SiComponents {
        let n = x.len();
        let mut linear = vec![Complex64::new(0.0, 0.0); n];
        let mut nonlinear = vec![Complex64::new(0.0, 0.0); n];
        for (i, (lin, nl)) in linear.iter_mut().zip(nonlinear.iter_mut()).enumerate() {
            for (m, h) in self.memory_taps.iter().enumerate().take(i + 1) {
                *lin += h * x[i - m];
            }
            for (m, p) in self.nl_coeffs.iter().enumerate().take(i + 1) {
                let s = x[i - m];
                let p2 = s.norm_sqr();
                *nl += s * (p.cubic * p2 + p.quintic * p2 * p2);
            }
        }
        let iq = x.iter().map(|s| self.iq_imbalance * s.conj()).collect();
        SiComponents {
            linear,
            nonlinear,
            iq,
        }
    }

    /// Channel output including noise. Deterministic for a fixed `seed`.
    pub fn generate_si(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = self.components(x).total();
        if self.noise_std > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for v in &mut y {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *v += Complex64::new(re, im) * self.noise_std;
            }
        }
        y
    }

    /// Linear-term power for i.i.d. circular Gaussian input of power `tx_power`.
    pub fn linear_power(&self, tx_power: f64) -> f64 {
        self.memory_taps.iter().map(|h| h.norm_sqr()).sum::<f64>() * tx_power
    }

    /// Nonlinear-term power for i.i.d. circular Gaussian input, using
    /// `E|x|^(2k) = k! P^k`.
    pub fn nonlinear_power(&self, tx_power: f64) -> f64 {
        let p = tx_power;
        self.nl_coeffs
            .iter()
            .map(|c| {
                c.cubic.norm_sqr() * 6.0 * p.powi(3)
                    + c.quintic.norm_sqr() * 120.0 * p.powi(5)
                    + 2.0 * (c.cubic * c.quintic.conj()).re * 24.0 * p.powi(4)
            })
            .sum()
    }

    /// Design ratio of nonlinear to linear term power, in dB.
    pub fn design_nonlinear_ratio_db(&self, tx_power: f64) -> f64 {
        10.0 * (self.nonlinear_power(tx_power) / self.linear_power(tx_power)).log10()
    }

    /// Noise-free SI power for i.i.d. circular Gaussian input.
    ///
    /// Taps are independent and every per-tap term is odd in `x`, so only
    /// same-tap products survive; the conjugate term is orthogonal to the rest.
    pub fn si_power(&self, tx_power: f64) -> f64 {
        let p = tx_power;
        let moments = [p, 2.0 * p.powi(2), 6.0 * p.powi(3), 24.0 * p.powi(4), 120.0 * p.powi(5)];
        let taps = self.memory_taps.len().max(self.nl_coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        let mut total = self.iq_imbalance.norm_sqr() * p;
        for m in 0..taps {
            let h = self.memory_taps.get(m).copied().unwrap_or(zero);
            let c = self.nl_coeffs.get(m).copied().unwrap_or_default();
            // E|h + a3 s + a5 s^2|^2 s with s = |x|^2, E s^k = moments[k-1]
            total += h.norm_sqr() * moments[0]
                + c.cubic.norm_sqr() * moments[2]
                + c.quintic.norm_sqr() * moments[4]
                + 2.0 * (h * c.cubic.conj()).re * moments[1]
                + 2.0 * (h * c.quintic.conj()).re * moments[2]
                + 2.0 * (c.cubic * c.quintic.conj()).re * moments[3];
        }
        total
    }

    /// Per-dimension noise deviation giving `snr_db` relative to the SI power.
    pub fn noise_std_for_snr(&self, snr_db: f64, tx_power: f64) -> f64 {
        (self.si_power(tx_power) * 10f64.powf(-snr_db / 10.0) / 2.0).sqrt()
    }
}

/// I.i.d. circular complex Gaussian samples of mean power `power`.
pub fn complex_gaussian<R: Rng>(rng: &mut R, n: usize, power: f64) -> Vec<Complex64> {
    let s = (power / 2.0).sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect()
}
