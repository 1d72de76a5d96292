//! Shared kernel dictionary with approximate-linear-dependency (ALD) admission.
//!
//! The dictionary stores the admitted atoms, their Gram matrix and the inverse
//! of the jittered Gram `G + jitter * I`. A candidate `x` enters when the
//! distance between `kappa(x, .)` and its projection onto the span of the
//! current atoms is at least `alpha`; otherwise the caller receives the
//! projection coefficients and can fold its update onto existing atoms.
//!
//! Function estimates over the dictionary are plain coefficient vectors
//! ([`FunctionEstimate`]) that grow in lockstep with the atom list.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::kernels::{KernelKind, KernelSpec};

/// Default Gram regularization.
pub const DEFAULT_JITTER: f64 = 1e-8;
/// Admissions between full re-inversions of the Gram matrix.
pub const DEFAULT_REFRESH_INTERVAL: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DictionaryConfig {
    /// ALD threshold. Zero admits every candidate.
    pub alpha: f64,
    pub jitter: f64,
    pub max_atoms: Option<usize>,
    pub refresh_interval: usize,
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            jitter: DEFAULT_JITTER,
            max_atoms: None,
            refresh_interval: DEFAULT_REFRESH_INTERVAL,
        }
    }
}

impl DictionaryConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid("alpha", format!("must be >= 0, got {}", self.alpha)));
        }
        if !(self.jitter.is_finite() && self.jitter > 0.0) {
            return Err(Error::invalid("jitter", format!("must be > 0, got {}", self.jitter)));
        }
        if self.max_atoms == Some(0) {
            return Err(Error::invalid("max_atoms", "must be positive when set"));
        }
        if self.refresh_interval == 0 {
            return Err(Error::invalid("refresh_interval", "must be positive"));
        }
        Ok(())
    }
}

/// Coefficients `gamma_b` of `f = sum_b gamma_b kappa(x_b, .)` over a dictionary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FunctionEstimate {
    pub coeffs: Vec<f64>,
}

impl FunctionEstimate {
    pub fn zeros(len: usize) -> Self {
        Self {
            coeffs: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `scale * delta` to the leading `delta.len()` coefficients.
    pub fn add_scaled(&mut self, scale: f64, delta: &[f64]) {
        for (c, d) in self.coeffs.iter_mut().zip(delta) {
            *c += scale * d;
        }
    }
}

/// Result of the ALD novelty test for one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct AldProjection {
    /// Distance between `kappa(x, .)` and its projection onto the atom span.
    pub dist: f64,
    /// Projection coefficients `(G + jitter I)^-1 k` in the atom basis.
    pub proj_coeffs: Vec<f64>,
    /// Kernel vector `k[b] = kappa(x_b, x)`.
    pub kernel_vec: Vec<f64>,
    /// `kappa(x, x)`.
    pub self_kernel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdmitResult {
    Admitted(usize),
    Projected(Vec<f64>),
}

/// Dictionary size split into linear capacity and Gaussian-novel atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DictionaryAccounting {
    pub total: usize,
    pub linear_capacity: usize,
    pub gaussian_novel: usize,
}

/// Square row-major matrix with spare capacity so bordering is amortized O(n^2).
#[derive(Debug, Clone, Default)]
struct GrowMatrix {
    n: usize,
    cap: usize,
    data: Vec<f64>,
}

impl GrowMatrix {
    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cap..i * self.cap + self.n]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cap + j]
    }

    fn reserve_one(&mut self) {
        if self.n < self.cap {
            return;
        }
        let new_cap = (self.cap * 2).max(16);
        let mut data = vec![0.0; new_cap * new_cap];
        for i in 0..self.n {
            data[i * new_cap..i * new_cap + self.n].copy_from_slice(self.row(i));
        }
        self.data = data;
        self.cap = new_cap;
    }

    /// Appends a row/column; `col` holds the new off-diagonal entries.
    fn border(&mut self, col: &[f64], diag: f64) {
        debug_assert_eq!(col.len(), self.n);
        self.reserve_one();
        let n = self.n;
        let cap = self.cap;
        for (i, &c) in col.iter().enumerate() {
            self.data[i * cap + n] = c;
            self.data[n * cap + i] = c;
        }
        self.data[n * cap + n] = diag;
        self.n += 1;
    }

    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    fn assign(&mut self, m: &DMatrix<f64>) {
        debug_assert_eq!(m.nrows(), self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                self.data[i * self.cap + j] = m[(i, j)];
            }
        }
    }
}

/// ALD-sparsified dictionary over one kernel.
///
/// Single writer: admissions take `&mut self`, evaluation takes `&self`.
#[derive(Debug, Clone)]
pub struct Dictionary {
    kernel: KernelSpec,
    dim: usize,
    config: DictionaryConfig,
    atoms: Vec<f64>,
    gram: GrowMatrix,
    gram_inv: GrowMatrix,
    admissions_since_refresh: usize,
    capped_rejections: u64,
}

impl Dictionary {
    pub fn new(kernel: KernelSpec, dim: usize, config: DictionaryConfig) -> Result<Self> {
        kernel.validate()?;
        config.validate()?;
        if dim == 0 {
            return Err(Error::invalid("dim", "regressor length must be positive"));
        }
        Ok(Self {
            kernel,
            dim,
            config,
            atoms: Vec::new(),
            gram: GrowMatrix::default(),
            gram_inv: GrowMatrix::default(),
            admissions_since_refresh: 0,
            capped_rejections: 0,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &DictionaryConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.gram.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn atom(&self, b: usize) -> &[f64] {
        &self.atoms[b * self.dim..(b + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl Iterator<Item = &[f64]> {
        self.atoms.chunks_exact(self.dim)
    }

    /// Number of candidates rejected only because `max_atoms` was reached.
    pub fn capped_rejections(&self) -> u64 {
        self.capped_rejections
    }

    pub fn gram(&self) -> DMatrix<f64> {
        self.gram.to_dmatrix()
    }

    /// The maintained inverse of `G + jitter I`.
    pub fn gram_inv(&self) -> DMatrix<f64> {
        self.gram_inv.to_dmatrix()
    }

    /// `k[b] = kappa(x_b, u)` for every atom.
    pub fn kernel_vector(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, u.len())?;
        Ok(self.kernel_vector_unchecked(u))
    }

    fn kernel_vector_unchecked(&self, u: &[f64]) -> Vec<f64> {
        self.atoms().map(|a| self.kernel.eval_unchecked(a, u)).collect()
    }

    /// Novelty of `x` with respect to the span of the current atoms.
    ///
    /// Squared distance `kappa(x,x) - k.a` with `a = (G + jitter I)^-1 k`,
    /// clamped at zero. An atom re-tested against itself yields a distance of
    /// at most `sqrt(jitter)`.
    pub fn ald_distance(&self, x: &[f64]) -> Result<AldProjection> {
        check_len(self.dim, x.len())?;
        let self_kernel = self.kernel.self_eval(x);
        if self.is_empty() {
            return Ok(AldProjection {
                dist: self_kernel.max(0.0).sqrt(),
                proj_coeffs: Vec::new(),
                kernel_vec: Vec::new(),
                self_kernel,
            });
        }
        let kernel_vec = self.kernel_vector_unchecked(x);
        let proj_coeffs = self.gram_inv.matvec(&kernel_vec);
        let explained: f64 = kernel_vec.iter().zip(&proj_coeffs).map(|(k, a)| k * a).sum();
        let dist2 = self_kernel - explained;
        Ok(AldProjection {
            dist: dist2.max(0.0).sqrt(),
            proj_coeffs,
            kernel_vec,
            self_kernel,
        })
    }

    /// Runs the ALD test on `x` and either admits it or returns its projection.
    ///
    /// On admission every estimate in `estimates` gains a zero coefficient.
    pub fn admit_or_project(
        &mut self,
        x: &[f64],
        estimates: &mut [&mut FunctionEstimate],
    ) -> Result<AdmitResult> {
        let ald = self.ald_distance(x)?;
        self.decide(x, ald, estimates)
    }

    /// Second half of [`admit_or_project`](Self::admit_or_project) for callers
    /// that already hold the ALD result for `x`.
    pub fn decide(
        &mut self,
        x: &[f64],
        ald: AldProjection,
        estimates: &mut [&mut FunctionEstimate],
    ) -> Result<AdmitResult> {
        check_len(self.dim, x.len())?;
        check_len(self.len(), ald.proj_coeffs.len())?;
        for f in estimates.iter() {
            check_len(self.len(), f.len())?;
        }
        // NaN distances fall through to projection.
        let novel = ald.dist >= self.config.alpha;
        if !novel {
            return Ok(AdmitResult::Projected(ald.proj_coeffs));
        }
        if self.config.max_atoms.is_some_and(|m| self.len() >= m) {
            self.capped_rejections += 1;
            return Ok(AdmitResult::Projected(ald.proj_coeffs));
        }
        let index = self.len();
        self.push_atom(x, &ald);
        for f in estimates.iter_mut() {
            f.coeffs.push(0.0);
        }
        Ok(AdmitResult::Admitted(index))
    }

    fn push_atom(&mut self, x: &[f64], ald: &AldProjection) {
        let jitter = self.config.jitter;
        let a = &ald.proj_coeffs;
        let explained: f64 = ald.kernel_vec.iter().zip(a).map(|(k, c)| k * c).sum();
        // Schur complement of the jittered Gram; bounded below by the jitter.
        let schur = (ald.self_kernel + jitter - explained).max(jitter);
        let n = self.gram_inv.n;

        // Block inverse: [[Ginv + a a^T / s, -a / s], [-a^T / s, 1 / s]].
        let cap = {
            self.gram_inv.reserve_one();
            self.gram_inv.cap
        };
        for i in 0..n {
            let ai = a[i] / schur;
            let row = &mut self.gram_inv.data[i * cap..i * cap + n];
            for (g, aj) in row.iter_mut().zip(a) {
                *g += ai * aj;
            }
        }
        let border: Vec<f64> = a.iter().map(|v| -v / schur).collect();
        self.gram_inv.border(&border, 1.0 / schur);

        self.gram.border(&ald.kernel_vec, ald.self_kernel);
        self.atoms.extend_from_slice(x);

        self.admissions_since_refresh += 1;
        if self.admissions_since_refresh >= self.config.refresh_interval {
            self.refresh_inverse();
        }
    }

    /// Recomputes the inverse of `G + jitter I` from scratch.
    pub fn refresh_inverse(&mut self) {
        self.admissions_since_refresh = 0;
        if self.is_empty() {
            return;
        }
        let n = self.len();
        let regularized = self.gram.to_dmatrix() + DMatrix::identity(n, n) * self.config.jitter;
        let inverse = match regularized.clone().cholesky() {
            Some(chol) => Some(chol.inverse()),
            None => regularized.try_inverse(),
        };
        // Keep the incremental inverse if the direct one is unavailable.
        if let Some(inv) = inverse {
            self.gram_inv.assign(&inv);
        }
    }

    /// `f(u) = sum_b f.coeffs[b] kappa(x_b, u)`.
    pub fn eval_estimate(&self, f: &FunctionEstimate, u: &[f64]) -> Result<f64> {
        check_len(self.len(), f.len())?;
        check_len(self.dim, u.len())?;
        Ok(self
            .atoms()
            .zip(&f.coeffs)
            .map(|(a, c)| c * self.kernel.eval_unchecked(a, u))
            .sum())
    }

    /// Squared RKHS norm `gamma^T G gamma` of an estimate.
    pub fn norm_squared(&self, f: &FunctionEstimate) -> Result<f64> {
        check_len(self.len(), f.len())?;
        let g = self.gram.matvec(&f.coeffs);
        Ok(g.iter().zip(&f.coeffs).map(|(a, b)| a * b).sum())
    }

    /// Splits the atom count for reporting. Hybrid dictionaries count the
    /// first `dim` atoms as linear capacity and the rest as Gaussian-novel.
    pub fn accounting(&self) -> DictionaryAccounting {
        let total = self.len();
        let (linear_capacity, gaussian_novel) = match self.kernel.kind() {
            KernelKind::Linear => (total, 0),
            KernelKind::Gaussian => (0, total),
            KernelKind::Hybrid => {
                let lin = total.min(self.dim);
                (lin, total - lin)
            }
        };
        DictionaryAccounting {
            total,
            linear_capacity,
            gaussian_novel,
        }
    }
}

/// Flat dump of a dictionary and the real/imaginary coefficient vectors.
///
/// CSV layout: header `atom,coeff_real,coeff_imag,x0,..,x{L-1}` followed by one
/// row per atom. The atom count is the number of data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionarySnapshot {
    pub dim: usize,
    pub atoms: Vec<Vec<f64>>,
    pub coeff_real: Vec<f64>,
    pub coeff_imag: Vec<f64>,
}

impl DictionarySnapshot {
    pub fn capture(
        dict: &Dictionary,
        f_real: &FunctionEstimate,
        f_imag: &FunctionEstimate,
    ) -> Result<Self> {
        check_len(dict.len(), f_real.len())?;
        check_len(dict.len(), f_imag.len())?;
        Ok(Self {
            dim: dict.dim(),
            atoms: dict.atoms().map(<[f64]>::to_vec).collect(),
            coeff_real: f_real.coeffs.clone(),
            coeff_imag: f_imag.coeffs.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "atom,coeff_real,coeff_imag")?;
        for i in 0..self.dim {
            write!(w, ",x{i}")?;
        }
        writeln!(w)?;
        for (b, atom) in self.atoms.iter().enumerate() {
            write!(w, "{b},{},{}", self.coeff_real[b], self.coeff_imag[b])?;
            for v in atom {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MalformedFile("missing snapshot header".into()))??;
        let columns = header.split(',').count();
        if columns < 3 || !header.starts_with("atom,coeff_real,coeff_imag") {
            return Err(Error::MalformedFile(format!("bad snapshot header `{header}`")));
        }
        let dim = columns - 3;
        let mut snap = Self {
            dim,
            atoms: Vec::new(),
            coeff_real: Vec::new(),
            coeff_imag: Vec::new(),
        };
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MalformedFile(format!("row {row}: {e}")))?;
            if fields.len() != columns {
                return Err(Error::MalformedFile(format!(
                    "row {row}: expected {columns} fields, got {}",
                    fields.len()
                )));
            }
            snap.coeff_real.push(fields[1]);
            snap.coeff_imag.push(fields[2]);
            snap.atoms.push(fields[3..].to_vec());
        }
        Ok(snap)
    }
}
