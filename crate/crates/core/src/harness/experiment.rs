use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{DataSource, ExperimentConfig, FilterKind};
use super::{power_db, AdaptiveFilter};
use crate::apsm::ComplexApsmFilter;
use crate::dictionary::{DictionaryAccounting, DictionarySnapshot};
use crate::error::{Error, Result};
use crate::nlms::NlmsFilter;
use crate::signal::{complex_gaussian, fill_regressor, load_iq};

/// Transmit and receive streams of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationData {
    pub tx: Vec<Complex64>,
    pub rx: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult {
    /// Mean squared a-priori error per smoothing window; NaN if every sample
    /// of the window was skipped.
    pub window_mse: Vec<f64>,
    /// Mean squared residual of the frozen filter on the test segment.
    pub test_mse: f64,
    pub accounting: Option<DictionaryAccounting>,
    pub snapshot: Option<DictionarySnapshot>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRecord {
    /// Training samples processed at the end of the window.
    pub iteration: usize,
    pub mse_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub records: Vec<CurveRecord>,
    pub test_mse_db: f64,
    /// Mean final dictionary size; zero for NLMS.
    pub avg_dict_size: f64,
    pub avg_linear_capacity: f64,
    pub avg_gaussian_novel: f64,
    pub realizations: usize,
}

impl LearningCurve {
    /// Averages per-realization results uniformly in the power domain.
    pub fn from_realizations(cfg: &ExperimentConfig, results: &[RealizationResult]) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::EmptyInput);
        }
        let windows = results[0].window_mse.len();
        let records = (0..windows)
            .map(|w| {
                let (sum, count) = results
                    .iter()
                    .map(|r| r.window_mse[w])
                    .filter(|v| !v.is_nan())
                    .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
                let mean = if count == 0 { 0.0 } else { sum / count as f64 };
                CurveRecord {
                    iteration: ((w + 1) * cfg.smooth).min(cfg.n_train),
                    mse_db: power_db(mean),
                }
            })
            .collect();
        let n = results.len() as f64;
        let test = results.iter().map(|r| r.test_mse).sum::<f64>() / n;
        let avg = |f: fn(&DictionaryAccounting) -> usize| {
            results
                .iter()
                .map(|r| r.accounting.as_ref().map_or(0, f) as f64)
                .sum::<f64>()
                / n
        };
        Ok(Self {
            records,
            test_mse_db: power_db(test),
            avg_dict_size: avg(|a| a.total),
            avg_linear_capacity: avg(|a| a.linear_capacity),
            avg_gaussian_novel: avg(|a| a.gaussian_novel),
            realizations: results.len(),
        })
    }

    /// Steady-state level: mean power over the trailing `fraction` of records.
    pub fn steady_state_db(&self, fraction: f64) -> f64 {
        let n = self.records.len();
        let tail = ((n as f64 * fraction).ceil() as usize).clamp(1, n.max(1));
        let mean = self.records[n - tail..]
            .iter()
            .map(|r| 10f64.powf(r.mse_db / 10.0))
            .sum::<f64>()
            / tail as f64;
        power_db(mean)
    }

    /// First iteration whose record is within `margin_db` of `target_db`.
    pub fn iterations_to_reach(&self, target_db: f64, margin_db: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.mse_db <= target_db + margin_db)
            .map(|r| r.iteration)
    }
}

/// Samples needed per realization: warm-up, training, test and the look-ahead
/// of the last test regressor.
pub fn stream_len(cfg: &ExperimentConfig) -> usize {
    cfg.taps.warmup() + cfg.n_train + cfg.n_test + cfg.taps.m_pre
}

/// Data for realization `r`.
///
/// Synthetic data uses seed `seed + r`: transmit samples come from stream 1 of
/// that ChaCha generator and channel noise from stream 0. Recorded files are
/// cut into consecutive non-overlapping segments.
pub fn realization_data(
    cfg: &ExperimentConfig,
    r: usize,
    files: Option<&RealizationData>,
) -> Result<RealizationData> {
    let len = stream_len(cfg);
    match &cfg.source {
        DataSource::Synthetic { tx_power, .. } => {
            let seed = cfg.seed.wrapping_add(r as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            let tx = complex_gaussian(&mut rng, len, *tx_power);
            let mut model = cfg
                .source
                .resolved_channel()
                .expect("synthetic source has a channel");
            model.seed = seed;
            let rx = model.generate_si(&tx);
            Ok(RealizationData { tx, rx })
        }
        DataSource::Files { .. } => {
            let data = files.ok_or_else(|| Error::config("tx_file", "input streams not loaded"))?;
            let start = r * len;
            if start + len > data.tx.len() {
                return Err(Error::config(
                    "realizations",
                    format!(
                        "input holds {} samples, {} realizations need {}",
                        data.tx.len(),
                        cfg.realizations,
                        cfg.realizations * len
                    ),
                ));
            }
            Ok(RealizationData {
                tx: data.tx[start..start + len].to_vec(),
                rx: data.rx[start..start + len].to_vec(),
            })
        }
    }
}

fn load_files(cfg: &ExperimentConfig) -> Result<Option<RealizationData>> {
    let DataSource::Files { tx, rx } = &cfg.source else {
        return Ok(None);
    };
    let widen = |v: Vec<num_complex::Complex32>| -> Vec<Complex64> {
        v.into_iter()
            .map(|s| Complex64::new(s.re as f64, s.im as f64))
            .collect()
    };
    let tx = widen(load_iq(tx)?);
    let rx = widen(load_iq(rx)?);
    if tx.len() != rx.len() {
        return Err(Error::MalformedFile(format!(
            "tx has {} samples but rx has {}",
            tx.len(),
            rx.len()
        )));
    }
    Ok(Some(RealizationData { tx, rx }))
}

fn build_filter(cfg: &ExperimentConfig) -> Result<Box<dyn AdaptiveFilter>> {
    let dim = cfg.taps.regressor_len();
    Ok(match cfg.filter {
        FilterKind::Apsm => Box::new(ComplexApsmFilter::new(cfg.apsm_config()?, dim)?),
        FilterKind::Nlms => Box::new(NlmsFilter::new(dim, cfg.mu, cfg.nlms_delta)?),
    })
}

/// Trains on one realization and evaluates the frozen filter.
///
/// The first `m_pre + m_post` samples update the filter but are excluded from
/// the learning curve.
pub fn run_realization(
    cfg: &ExperimentConfig,
    data: &RealizationData,
    keep_snapshot: bool,
) -> Result<RealizationResult> {
    let warm = cfg.taps.warmup();
    let needed = stream_len(cfg);
    if data.tx.len() < needed || data.rx.len() < needed {
        return Err(Error::DimensionMismatch {
            expected: needed,
            got: data.tx.len().min(data.rx.len()),
        });
    }
    let mut filter = build_filter(cfg)?;
    let mut x = vec![0.0; cfg.taps.regressor_len()];

    let mut window_mse = Vec::with_capacity(cfg.n_train.div_ceil(cfg.smooth));
    let (mut sum, mut count, mut filled) = (0.0, 0usize, 0usize);
    for n in 0..warm + cfg.n_train {
        fill_regressor(&data.tx, n, cfg.taps, &mut x);
        let step = filter.update(&x, data.rx[n]);
        let e = match step {
            Ok(e) => Some(e.norm_sqr()),
            Err(Error::NonFinite) => None,
            Err(other) => return Err(other),
        };
        if n < warm {
            continue;
        }
        if let Some(e) = e {
            sum += e;
            count += 1;
        }
        filled += 1;
        if filled == cfg.smooth || n + 1 == warm + cfg.n_train {
            window_mse.push(if count == 0 { f64::NAN } else { sum / count as f64 });
            (sum, count, filled) = (0.0, 0, 0);
        }
    }

    let (mut test_sum, mut test_count) = (0.0, 0usize);
    let start = warm + cfg.n_train;
    for n in start..start + cfg.n_test {
        fill_regressor(&data.tx, n, cfg.taps, &mut x);
        let y = data.rx[n];
        if !(y.re.is_finite() && y.im.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        test_sum += (y - filter.predict(&x)?).norm_sqr();
        test_count += 1;
    }
    if test_count == 0 {
        return Err(Error::EmptyInput);
    }

    Ok(RealizationResult {
        window_mse,
        test_mse: test_sum / test_count as f64,
        accounting: filter.accounting(),
        snapshot: if keep_snapshot { filter.snapshot() } else { None },
    })
}

/// All realizations, run in parallel and returned in realization order.
pub fn run_realizations(cfg: &ExperimentConfig) -> Result<Vec<RealizationResult>> {
    cfg.validate()?;
    let files = load_files(cfg)?;
    let keep = cfg.dict_out.is_some();
    (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            let data = realization_data(cfg, r, files.as_ref())?;
            run_realization(cfg, &data, keep && r == 0)
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<LearningCurve> {
    LearningCurve::from_realizations(cfg, &run_realizations(cfg)?)
}
