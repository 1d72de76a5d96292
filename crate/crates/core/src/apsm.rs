//! Adaptive projected subgradient method (APSM) over a kernel dictionary.
//!
//! Every training pair `(x_j, y_j)` defines a hyperslab
//! `S_j = { f : |f(x_j) - y_j| <= eps }`. One iteration projects the current
//! estimate onto the `q` most recent hyperslabs, combines the projections with
//! uniform weights and moves towards the combination with the extrapolated
//! step `mu * M_n`:
//!
//! ```text
//! f_{n+1} = f_n + mu * M_n * (sum_j w_j P_j(f_n) - f_n)
//! M_n     = sum_j w_j ||P_j(f_n) - f_n||^2 / ||sum_j w_j P_j(f_n) - f_n||^2
//! ```
//!
//! Complex targets are handled by two real estimates (real and imaginary part)
//! that share one dictionary. Each slab's displacement `beta_j kappa(x_j, .)`
//! is written onto the dictionary: directly if `x_j` is an atom, otherwise via
//! its projection coefficients onto the atom span.

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::dictionary::{AdmitResult, Dictionary, DictionaryConfig, FunctionEstimate};
use crate::error::{check_len, Error, Result};
use crate::kernels::{dot, KernelSpec};

/// Below this squared norm of the combined displacement, `M_n = 1`.
pub const EXTRAPOLATION_GUARD: f64 = 1e-12;

/// A hyperslab `{ f : |f(x) - y| <= eps }`.
#[derive(Debug, Clone, Copy)]
pub struct Hyperslab<'a> {
    pub x: &'a [f64],
    pub y: f64,
    pub eps: f64,
}

impl Hyperslab<'_> {
    pub fn contains(&self, f_eval: f64) -> bool {
        (self.y - f_eval).abs() <= self.eps
    }
}

/// Coefficient `beta` of the metric projection `P_S(f) = f + beta kappa(x, .)`.
///
/// `f_eval` is `f(x)` and `kxx` is `kappa(x, x)`.
pub fn beta_coefficient(f_eval: f64, slab: &Hyperslab<'_>, kxx: f64) -> Result<f64> {
    if kxx.is_nan() || kxx <= 0.0 {
        return Err(Error::NumericDomain(format!("kappa(x, x) must be positive, got {kxx}")));
    }
    let r = slab.y - f_eval;
    Ok(if r > slab.eps {
        (r - slab.eps) / kxx
    } else if r < -slab.eps {
        (r + slab.eps) / kxx
    } else {
        0.0
    })
}

/// Combination weights over the active hyperslabs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightScheme {
    #[default]
    Uniform,
}

impl WeightScheme {
    fn weight(self, count: usize) -> f64 {
        match self {
            WeightScheme::Uniform => 1.0 / count as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApsmConfig {
    pub mu: f64,
    pub q: usize,
    pub eps: f64,
    pub weights: WeightScheme,
    pub kernel: KernelSpec,
    pub dictionary: DictionaryConfig,
}

impl ApsmConfig {
    pub fn new(kernel: KernelSpec, mu: f64, q: usize, eps: f64, alpha: f64) -> Self {
        Self {
            mu,
            q,
            eps,
            weights: WeightScheme::Uniform,
            kernel,
            dictionary: DictionaryConfig::with_alpha(alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 2.0) {
            return Err(Error::invalid("mu", format!("must lie in (0, 2], got {}", self.mu)));
        }
        if self.q == 0 {
            return Err(Error::invalid("q", "must be at least 1"));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::invalid("eps", format!("must be >= 0, got {}", self.eps)));
        }
        self.kernel.validate()?;
        self.dictionary.validate()
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateReport {
    pub m_real: f64,
    pub m_imag: f64,
    pub admitted: bool,
    /// A-priori error `y_n - f_n(x_n)`.
    pub residual_pre: Complex64,
}

/// How a window sample's kernel section is written onto the dictionary.
#[derive(Debug, Clone)]
enum Route {
    Atom(usize),
    Folded(Vec<f64>),
}

#[derive(Debug, Clone)]
struct WindowEntry {
    x: Vec<f64>,
    y: Complex64,
    kxx: f64,
    route: Route,
}

/// Per-slab projection data for both components.
#[derive(Debug, Clone, Copy)]
struct SlabProjection {
    beta_re: f64,
    beta_im: f64,
}

/// Complex-valued APSM filter: real and imaginary estimates over one dictionary.
#[derive(Debug, Clone)]
pub struct ComplexApsmFilter {
    config: ApsmConfig,
    dict: Dictionary,
    f_real: FunctionEstimate,
    f_imag: FunctionEstimate,
    window: VecDeque<WindowEntry>,
    steps: u64,
    skipped: u64,
}

impl ComplexApsmFilter {
    /// New filter with `f_0 = 0` for regressors of length `dim`.
    pub fn new(config: ApsmConfig, dim: usize) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            dict: Dictionary::new(config.kernel, dim, config.dictionary)?,
            config,
            f_real: FunctionEstimate::default(),
            f_imag: FunctionEstimate::default(),
            window: VecDeque::with_capacity(config.q + 1),
            steps: 0,
            skipped: 0,
        })
    }

    pub fn config(&self) -> &ApsmConfig {
        &self.config
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn f_real(&self) -> &FunctionEstimate {
        &self.f_real
    }

    pub fn f_imag(&self) -> &FunctionEstimate {
        &self.f_imag
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Samples rejected for non-finite values.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    /// `f_real(x) + i f_imag(x)`.
    pub fn predict(&self, x: &[f64]) -> Result<Complex64> {
        check_len(self.dict.dim(), x.len())?;
        let k = self.dict.kernel_vector(x)?;
        Ok(Complex64::new(dot(&self.f_real.coeffs, &k), dot(&self.f_imag.coeffs, &k)))
    }

    /// One APSM iteration on the new pair `(x_n, y_n)`.
    ///
    /// Non-finite samples leave the filter untouched and return
    /// [`Error::NonFinite`].
    pub fn apsm_step(&mut self, x: &[f64], y: Complex64) -> Result<UpdateReport> {
        check_len(self.dict.dim(), x.len())?;
        if !y.re.is_finite() || !y.im.is_finite() || x.iter().any(|v| !v.is_finite()) {
            self.skipped += 1;
            return Err(Error::NonFinite);
        }

        let ald = self.dict.ald_distance(x)?;
        let prior = Complex64::new(
            dot(&self.f_real.coeffs, &ald.kernel_vec),
            dot(&self.f_imag.coeffs, &ald.kernel_vec),
        );
        let kxx = ald.self_kernel;
        let route = match self
            .dict
            .decide(x, ald, &mut [&mut self.f_real, &mut self.f_imag])?
        {
            AdmitResult::Admitted(b) => Route::Atom(b),
            AdmitResult::Projected(p) => Route::Folded(p),
        };
        let admitted = matches!(route, Route::Atom(_));

        self.window.push_back(WindowEntry {
            x: x.to_vec(),
            y,
            kxx,
            route,
        });
        while self.window.len() > self.config.q {
            self.window.pop_front();
        }

        let newest = self.window.len() - 1;
        let projections: Vec<SlabProjection> = self
            .window
            .iter()
            .enumerate()
            .map(|(j, entry)| {
                let f_eval = if j == newest {
                    prior
                } else {
                    self.evaluate(&entry.x)
                };
                self.project(entry, f_eval)
            })
            .collect();

        let (m_real, m_imag) = self.extrapolation(&projections);
        let weight = self.config.weights.weight(self.window.len());
        let scale_re = self.config.mu * m_real * weight;
        let scale_im = self.config.mu * m_imag * weight;
        for (entry, p) in self.window.iter().zip(&projections) {
            let (d_re, d_im) = (scale_re * p.beta_re, scale_im * p.beta_im);
            if d_re == 0.0 && d_im == 0.0 {
                continue;
            }
            match &entry.route {
                Route::Atom(b) => {
                    self.f_real.coeffs[*b] += d_re;
                    self.f_imag.coeffs[*b] += d_im;
                }
                Route::Folded(p) => {
                    self.f_real.add_scaled(d_re, p);
                    self.f_imag.add_scaled(d_im, p);
                }
            }
        }

        self.steps += 1;
        Ok(UpdateReport {
            m_real,
            m_imag,
            admitted,
            residual_pre: y - prior,
        })
    }

    fn evaluate(&self, x: &[f64]) -> Complex64 {
        let kernel = self.dict.kernel();
        let (mut re, mut im) = (0.0, 0.0);
        for ((atom, cr), ci) in self.dict.atoms().zip(&self.f_real.coeffs).zip(&self.f_imag.coeffs) {
            let k = kernel.eval_unchecked(atom, x);
            re += cr * k;
            im += ci * k;
        }
        Complex64::new(re, im)
    }

    fn project(&self, entry: &WindowEntry, f_eval: Complex64) -> SlabProjection {
        let eps = self.config.eps;
        // A vanishing kernel section leaves every estimate unchanged at x.
        let beta = |f: f64, y: f64| {
            beta_coefficient(f, &Hyperslab { x: &entry.x, y, eps }, entry.kxx).unwrap_or(0.0)
        };
        SlabProjection {
            beta_re: beta(f_eval.re, entry.y.re),
            beta_im: beta(f_eval.im, entry.y.im),
        }
    }

    /// `M_n` for the real and imaginary components.
    fn extrapolation(&self, projections: &[SlabProjection]) -> (f64, f64) {
        let n = projections.len();
        let w = self.config.weights.weight(n);
        let active: Vec<usize> = (0..n)
            .filter(|&j| projections[j].beta_re != 0.0 || projections[j].beta_im != 0.0)
            .collect();

        let (mut num_re, mut num_im) = (0.0, 0.0);
        for &j in &active {
            let kxx = self.window[j].kxx;
            num_re += w * projections[j].beta_re.powi(2) * kxx;
            num_im += w * projections[j].beta_im.powi(2) * kxx;
        }

        let kernel = self.dict.kernel();
        let (mut den_re, mut den_im) = (0.0, 0.0);
        for (a, &i) in active.iter().enumerate() {
            let (bi_re, bi_im) = (projections[i].beta_re, projections[i].beta_im);
            let kii = self.window[i].kxx;
            den_re += w * w * bi_re * bi_re * kii;
            den_im += w * w * bi_im * bi_im * kii;
            for &j in &active[a + 1..] {
                let kij = kernel.eval_unchecked(&self.window[i].x, &self.window[j].x);
                den_re += 2.0 * w * w * bi_re * projections[j].beta_re * kij;
                den_im += 2.0 * w * w * bi_im * projections[j].beta_im * kij;
            }
        }

        let ratio = |num: f64, den: f64| if den < EXTRAPOLATION_GUARD { 1.0 } else { num / den };
        (ratio(num_re, den_re), ratio(num_im, den_im))
    }
}
