use std::io::Write;

use super::config::{ExperimentConfig, FilterKind};
use super::experiment::LearningCurve;
use crate::error::Result;

pub const CURVE_HEADER: &str = "iteration,mse_db";
pub const SUMMARY_HEADER: &str = "filter,kernel,mu,q,eps,alpha,test_mse_db,dict_size";

pub fn write_curve_csv<W: Write>(mut w: W, curve: &LearningCurve) -> Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for r in &curve.records {
        writeln!(w, "{},{}", r.iteration, r.mse_db)?;
    }
    Ok(())
}

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub filter: &'static str,
    /// `none` for NLMS.
    pub kernel: &'static str,
    pub mu: f64,
    pub q: usize,
    pub eps: f64,
    pub alpha: f64,
    pub test_mse_db: f64,
    pub dict_size: f64,
}

pub fn summary_row(cfg: &ExperimentConfig, curve: &LearningCurve) -> SummaryRow {
    let kernel = match cfg.filter {
        FilterKind::Apsm => cfg.kernel.kind.name(),
        FilterKind::Nlms => "none",
    };
    SummaryRow {
        filter: cfg.filter.name(),
        kernel,
        mu: cfg.mu,
        q: cfg.q,
        eps: cfg.eps,
        alpha: cfg.alpha,
        test_mse_db: curve.test_mse_db,
        dict_size: curve.avg_dict_size,
    }
}

pub fn write_summary_csv<W: Write>(mut w: W, rows: &[SummaryRow]) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.filter, r.kernel, r.mu, r.q, r.eps, r.alpha, r.test_mse_db, r.dict_size
        )?;
    }
    Ok(())
}
