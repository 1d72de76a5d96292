//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Lists are comma separated;
//! complex numbers use the `a+bi` form (`1`, `0.3-0.2i`, `0.1i`).

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::apsm::ApsmConfig;
use crate::dictionary::{DictionaryConfig, DEFAULT_JITTER, DEFAULT_REFRESH_INTERVAL};
use crate::error::{Error, Result};
use crate::kernels::{KernelKind, KernelSpec};
use crate::nlms;
use crate::signal::{PolyCoeffs, SiChannelModel, TapConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Apsm,
    Nlms,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Apsm => "apsm",
            FilterKind::Nlms => "nlms",
        }
    }
}

impl FromStr for FilterKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "apsm" => Ok(FilterKind::Apsm),
            "nlms" => Ok(FilterKind::Nlms),
            other => Err(format!("unknown filter `{other}` (apsm|nlms)")),
        }
    }
}

/// Kernel family plus the parameters of every family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub kind: KernelKind,
    pub xi_gauss: f64,
    pub xi_hybrid: f64,
    pub w_lin: f64,
    pub w_gauss: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            kind: KernelKind::Linear,
            xi_gauss: 0.0715,
            xi_hybrid: 0.225,
            w_lin: 0.1,
            w_gauss: 0.9,
        }
    }
}

impl KernelParams {
    pub fn spec(&self) -> Result<KernelSpec> {
        self.spec_for(self.kind)
    }

    pub fn spec_for(&self, kind: KernelKind) -> Result<KernelSpec> {
        match kind {
            KernelKind::Linear => Ok(KernelSpec::Linear),
            KernelKind::Gaussian => KernelSpec::gaussian(self.xi_gauss),
            KernelKind::Hybrid => KernelSpec::hybrid(self.w_lin, self.w_gauss, self.xi_hybrid),
        }
    }
}

/// How the additive noise level is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    /// SNR in dB relative to the noise-free SI power.
    SnrDb(f64),
    /// Explicit per-dimension standard deviation.
    Std(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Circular Gaussian transmit samples through a synthetic channel.
    Synthetic {
        channel: SiChannelModel,
        tx_power: f64,
        noise: NoiseLevel,
    },
    /// Recorded transmit and receive streams, sliced per realization.
    Files { tx: PathBuf, rx: PathBuf },
}

impl DataSource {
    /// Channel with the noise level resolved for this configuration.
    pub fn resolved_channel(&self) -> Option<SiChannelModel> {
        match self {
            DataSource::Synthetic {
                channel,
                tx_power,
                noise,
            } => {
                let mut model = channel.clone();
                model.noise_std = match *noise {
                    NoiseLevel::SnrDb(db) => channel.noise_std_for_snr(db, *tx_power),
                    NoiseLevel::Std(s) => s,
                };
                Some(model)
            }
            DataSource::Files { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub filter: FilterKind,
    pub kernel: KernelParams,
    pub mu: f64,
    pub q: usize,
    pub eps: f64,
    pub alpha: f64,
    pub jitter: f64,
    pub max_atoms: Option<usize>,
    pub nlms_delta: f64,
    pub taps: TapConfig,
    pub source: DataSource,
    pub n_train: usize,
    pub n_test: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Learning-curve window length in samples.
    pub smooth: usize,
    pub out: PathBuf,
    pub dict_out: Option<PathBuf>,
    pub sweep_mu: Vec<f64>,
    pub sweep_q: Vec<usize>,
    pub sweep_kernel: Vec<KernelKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            filter: FilterKind::Apsm,
            kernel: KernelParams::default(),
            mu: 0.1,
            q: 1,
            eps: 0.001,
            alpha: 0.1,
            jitter: DEFAULT_JITTER,
            max_atoms: None,
            nlms_delta: nlms::DEFAULT_DELTA,
            taps: TapConfig::default(),
            source: DataSource::Synthetic {
                channel: SiChannelModel::default(),
                tx_power: 1.0,
                noise: NoiseLevel::SnrDb(40.0),
            },
            n_train: 10_000,
            n_test: 500_000,
            realizations: 100,
            seed: 0,
            smooth: 100,
            out: PathBuf::from("out"),
            dict_out: None,
            sweep_mu: Vec::new(),
            sweep_q: Vec::new(),
            sweep_kernel: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn apsm_config(&self) -> Result<ApsmConfig> {
        Ok(ApsmConfig {
            dictionary: DictionaryConfig {
                alpha: self.alpha,
                jitter: self.jitter,
                max_atoms: self.max_atoms,
                refresh_interval: DEFAULT_REFRESH_INTERVAL,
            },
            ..ApsmConfig::new(self.kernel.spec()?, self.mu, self.q, self.eps, self.alpha)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::config("realizations", "must be at least 1"));
        }
        if self.n_test == 0 {
            return Err(Error::config("n_test", "must be at least 1"));
        }
        if self.n_train == 0 {
            return Err(Error::config("n_train", "must be at least 1"));
        }
        if self.smooth == 0 {
            return Err(Error::config("smooth", "must be at least 1"));
        }
        self.taps.validate()?;
        match self.filter {
            FilterKind::Apsm => self.apsm_config()?.validate()?,
            FilterKind::Nlms => {
                nlms::NlmsFilter::new(self.taps.regressor_len(), self.mu, self.nlms_delta)?;
            }
        }
        if let DataSource::Synthetic {
            channel,
            tx_power,
            noise,
        } = &self.source
        {
            channel.validate()?;
            if !(tx_power.is_finite() && *tx_power > 0.0) {
                return Err(Error::config("tx_power", "must be a positive number"));
            }
            match *noise {
                NoiseLevel::SnrDb(db) if !db.is_finite() => {
                    return Err(Error::config("snr_db", "must be finite"))
                }
                NoiseLevel::Std(s) if !(s.is_finite() && s >= 0.0) => {
                    return Err(Error::config("noise_std", "must be >= 0"))
                }
                _ => {}
            }
        }
        for &mu in &self.sweep_mu {
            if !(mu > 0.0 && mu <= 2.0) {
                return Err(Error::config("sweep_mu", format!("{mu} outside (0, 2]")));
            }
        }
        if self.sweep_q.contains(&0) {
            return Err(Error::config("sweep_q", "entries must be at least 1"));
        }
        Ok(())
    }

    /// Reads and validates a config file. Unreadable files are config errors.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        let mut channel = SiChannelModel::default();
        let mut tx_power = 1.0;
        let mut noise = NoiseLevel::SnrDb(40.0);
        let mut nl3: Option<Vec<Complex64>> = None;
        let mut nl5: Option<Vec<Complex64>> = None;
        let (mut tx_file, mut rx_file) = (None, None);

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            if seen.contains(&key) {
                return Err(Error::config(key, "given more than once"));
            }
            seen.push(key.clone());

            match key.as_str() {
                "filter" => cfg.filter = parse_with(&key, value)?,
                "kernel" => cfg.kernel.kind = parse_with(&key, value)?,
                "xi_gauss" => cfg.kernel.xi_gauss = scalar(&key, value)?,
                "xi_hybrid" => cfg.kernel.xi_hybrid = scalar(&key, value)?,
                "w_lin" => cfg.kernel.w_lin = scalar(&key, value)?,
                "w_gauss" => cfg.kernel.w_gauss = scalar(&key, value)?,
                "mu" => cfg.mu = scalar(&key, value)?,
                "q" => cfg.q = scalar(&key, value)?,
                "eps" => cfg.eps = scalar(&key, value)?,
                "alpha" => cfg.alpha = scalar(&key, value)?,
                "jitter" => cfg.jitter = scalar(&key, value)?,
                "max_atoms" => cfg.max_atoms = Some(scalar(&key, value)?),
                "nlms_delta" => cfg.nlms_delta = scalar(&key, value)?,
                "m_pre" => cfg.taps.m_pre = scalar(&key, value)?,
                "m_post" => cfg.taps.m_post = scalar(&key, value)?,
                "n_train" => cfg.n_train = scalar(&key, value)?,
                "n_test" => cfg.n_test = scalar(&key, value)?,
                "realizations" => cfg.realizations = scalar(&key, value)?,
                "seed" => cfg.seed = scalar(&key, value)?,
                "smooth" => cfg.smooth = scalar(&key, value)?,
                "out" => cfg.out = PathBuf::from(value),
                "dict_out" => cfg.dict_out = Some(PathBuf::from(value)),
                "sweep_mu" => cfg.sweep_mu = list(&key, value)?,
                "sweep_q" => cfg.sweep_q = list(&key, value)?,
                "sweep_kernel" => cfg.sweep_kernel = list(&key, value)?,
                "tx_power" => tx_power = scalar(&key, value)?,
                "snr_db" => noise = NoiseLevel::SnrDb(scalar(&key, value)?),
                "noise_std" => noise = NoiseLevel::Std(scalar(&key, value)?),
                "taps" => channel.memory_taps = list(&key, value)?,
                "nl3" => nl3 = Some(list(&key, value)?),
                "nl5" => nl5 = Some(list(&key, value)?),
                "iq" => channel.iq_imbalance = scalar(&key, value)?,
                "tx_file" => tx_file = Some(PathBuf::from(value)),
                "rx_file" => rx_file = Some(PathBuf::from(value)),
                _ => return Err(Error::config(key, "unknown key")),
            }
        }

        if seen.iter().any(|k| k == "snr_db") && seen.iter().any(|k| k == "noise_std") {
            return Err(Error::config("noise_std", "conflicts with snr_db"));
        }
        if nl3.is_some() || nl5.is_some() {
            let nl3 = nl3.unwrap_or_default();
            let nl5 = nl5.unwrap_or_default();
            let zero = Complex64::new(0.0, 0.0);
            channel.nl_coeffs = (0..nl3.len().max(nl5.len()))
                .map(|m| PolyCoeffs {
                    cubic: nl3.get(m).copied().unwrap_or(zero),
                    quintic: nl5.get(m).copied().unwrap_or(zero),
                })
                .collect();
        }
        cfg.source = match (tx_file, rx_file) {
            (Some(tx), Some(rx)) => DataSource::Files { tx, rx },
            (None, None) => DataSource::Synthetic {
                channel,
                tx_power,
                noise,
            },
            (Some(_), None) => return Err(Error::config("rx_file", "required with tx_file")),
            (None, Some(_)) => return Err(Error::config("tx_file", "required with rx_file")),
        };
        cfg.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::config(name, reason),
            other => other,
        })?;
        Ok(cfg)
    }
}

fn parse_with<T: FromStr<Err = String>>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|e: String| Error::config(key, e))
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar(key, s))
        .collect()
}
