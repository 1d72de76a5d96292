//! Experiment orchestration: configuration, averaged learning curves, CSV
//! output and the command-line front end.

pub mod cli;
mod config;
mod experiment;
mod report;

use num_complex::Complex64;

use crate::apsm::ComplexApsmFilter;
use crate::dictionary::{DictionaryAccounting, DictionarySnapshot};
use crate::error::{Error, Result};
use crate::nlms::NlmsFilter;

pub use config::{DataSource, ExperimentConfig, FilterKind, KernelParams, NoiseLevel};
pub use experiment::{
    realization_data, run_experiment, run_realization, run_realizations, CurveRecord,
    LearningCurve, RealizationData, RealizationResult,
};
pub use report::{summary_row, write_curve_csv, write_summary_csv, SummaryRow, CURVE_HEADER, SUMMARY_HEADER};

/// Returned by [`mse_db`] when the mean squared magnitude is below `1e-300`.
pub const MSE_FLOOR_DB: f64 = -300.0;

/// `10 log10` of a mean power, clamped to [`MSE_FLOOR_DB`].
pub fn power_db(mean_power: f64) -> f64 {
    if mean_power < 1e-300 {
        MSE_FLOOR_DB
    } else {
        10.0 * mean_power.log10()
    }
}

/// `10 log10(sum |r|^2 / N)` with the floor sentinel for vanishing power.
pub fn mse_db(residuals: &[Complex64]) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mean = residuals.iter().map(|r| r.norm_sqr()).sum::<f64>() / residuals.len() as f64;
    Ok(power_db(mean))
}

/// Common driver interface over APSM and NLMS.
pub trait AdaptiveFilter {
    /// One training step; returns the a-priori residual `y - f(x)`.
    fn update(&mut self, x: &[f64], y: Complex64) -> Result<Complex64>;
    fn predict(&self, x: &[f64]) -> Result<Complex64>;
    /// Dictionary size split, or `None` for filters without a dictionary.
    fn accounting(&self) -> Option<DictionaryAccounting>;
    fn snapshot(&self) -> Option<DictionarySnapshot>;
}

impl AdaptiveFilter for ComplexApsmFilter {
    fn update(&mut self, x: &[f64], y: Complex64) -> Result<Complex64> {
        Ok(self.apsm_step(x, y)?.residual_pre)
    }

    fn predict(&self, x: &[f64]) -> Result<Complex64> {
        ComplexApsmFilter::predict(self, x)
    }

    fn accounting(&self) -> Option<DictionaryAccounting> {
        Some(self.dictionary().accounting())
    }

    fn snapshot(&self) -> Option<DictionarySnapshot> {
        DictionarySnapshot::capture(self.dictionary(), self.f_real(), self.f_imag()).ok()
    }
}

impl AdaptiveFilter for NlmsFilter {
    fn update(&mut self, x: &[f64], y: Complex64) -> Result<Complex64> {
        self.nlms_step(x, y)
    }

    fn predict(&self, x: &[f64]) -> Result<Complex64> {
        NlmsFilter::predict(self, x)
    }

    fn accounting(&self) -> Option<DictionaryAccounting> {
        None
    }

    fn snapshot(&self) -> Option<DictionarySnapshot> {
        None
    }
}
