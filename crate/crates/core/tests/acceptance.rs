//! Acceptance suite. Every test prints one `ACCEPT <id> PASS|FAIL` line with
//! the measured values, then asserts.

use std::fs;
use std::process::Command;

use apsm_sic::apsm::{beta_coefficient, ApsmConfig, ComplexApsmFilter, Hyperslab};
use apsm_sic::dictionary::{Dictionary, DictionaryConfig, FunctionEstimate};
use apsm_sic::harness::{run_experiment, DataSource, ExperimentConfig, FilterKind, LearningCurve};
use apsm_sic::kernels::{gram_matrix, KernelSpec};
use apsm_sic::nlms::NlmsFilter;
use apsm_sic::signal::{build_regressor, complex_gaussian, SiChannelModel, TapConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: &str, pass: bool, detail: String) {
    println!("ACCEPT {id} {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id}: {detail}");
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-scale..scale)).collect()
}

fn random_kernel(rng: &mut ChaCha8Rng) -> KernelSpec {
    match rng.gen_range(0..3) {
        0 => KernelSpec::Linear,
        1 => KernelSpec::gaussian(rng.gen_range(0.05..2.0)).unwrap(),
        _ => KernelSpec::hybrid(rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0), rng.gen_range(0.05..2.0))
            .unwrap(),
    }
}

// ---------------------------------------------------------------------------
// 1. Projection onto a hyperslab versus a numerical minimizer
// ---------------------------------------------------------------------------

/// Minimum of `||h||^2` over `h = sum_i v_i kappa(z_i, .)` with `h(z_last) = s`,
/// solved from the KKT system by pseudo-inverse. Returns `(cost, v)`.
fn min_norm_with_value(gram: &DMatrix<f64>, s: f64) -> (f64, DVector<f64>) {
    let n = gram.nrows();
    let last = n - 1;
    let mut kkt = DMatrix::zeros(n + 1, n + 1);
    kkt.view_mut((0, 0), (n, n)).copy_from(&(gram * 2.0));
    for i in 0..n {
        kkt[(i, n)] = -gram[(last, i)];
        kkt[(n, i)] = gram[(last, i)];
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = s;
    let sol = kkt.pseudo_inverse(1e-13).unwrap() * rhs;
    let v = sol.rows(0, n).into_owned();
    ((v.transpose() * gram * &v)[(0, 0)], v)
}

/// Grid search followed by golden-section refinement over the attainable
/// increments `s = g(x) - f(x)` inside the slab.
fn brute_force_projection(gram: &DMatrix<f64>, lo: f64, hi: f64) -> DVector<f64> {
    let cost = |s: f64| min_norm_with_value(gram, s).0;
    if lo == hi {
        return min_norm_with_value(gram, lo).1;
    }
    let grid = 40;
    let step = (hi - lo) / grid as f64;
    let best = (0..=grid)
        .map(|i| lo + step * i as f64)
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .unwrap();
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = cost(d);
        }
    }
    min_norm_with_value(gram, 0.5 * (a + b)).1
}

#[test]
fn c1_projection_matches_numerical_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dim = 12;
    let mut worst: f64 = 0.0;
    let mut inside = 0;
    let t0 = std::time::Instant::now();
    for _ in 0..1000 {
        let kernel = random_kernel(&mut rng);
        let b = rng.gen_range(0..=10);
        let mut points: Vec<Vec<f64>> = (0..b).map(|_| random_point(&mut rng, dim, 1.0)).collect();
        let gamma: Vec<f64> = (0..b).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = random_point(&mut rng, dim, 1.0);
        let fx: f64 = points.iter().zip(&gamma).map(|(p, g)| g * kernel.eval(p, &x).unwrap()).sum();
        let eps = rng.gen_range(0.0..0.5);
        let y = fx + rng.gen_range(-2.0..2.0);
        let kxx = kernel.eval(&x, &x).unwrap();
        let slab = Hyperslab { x: &x, y, eps };
        let beta = beta_coefficient(fx, &slab, kxx).unwrap();
        if beta == 0.0 {
            inside += 1;
        }

        points.push(x.clone());
        let gram = gram_matrix(&kernel, &points).unwrap();
        // The slab constrains g(x) = f(x) + s to [y - eps, y + eps].
        let v = brute_force_projection(&gram, y - eps - fx, y + eps - fx);
        let mut diff = v.clone();
        diff[b] -= beta;
        let dist = (diff.transpose() * &gram * &diff)[(0, 0)].max(0.0).sqrt();
        worst = worst.max(dist);
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        "C1",
        worst <= 1e-5 && secs < 60.0,
        format!("max RKHS deviation {worst:.3e} (tol 1e-5), {inside} instances already inside, {secs:.1}s"),
    );
}

// ---------------------------------------------------------------------------
// 2. ALD distance versus full re-inversion
// ---------------------------------------------------------------------------

#[test]
fn c2_ald_distance_matches_direct_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dim = 12;
    let jitter = DictionaryConfig::default().jitter;
    let mut worst: f64 = 0.0;
    let mut sizes = 0usize;
    for _ in 0..500 {
        let kernel = random_kernel(&mut rng);
        let target = rng.gen_range(1..=30);
        let cfg = DictionaryConfig::with_alpha(rng.gen_range(1e-3..0.2));
        let mut dict = Dictionary::new(kernel, dim, cfg).unwrap();
        let mut attempts = 0;
        while dict.len() < target && attempts < 200 {
            let p = random_point(&mut rng, dim, 1.0);
            dict.admit_or_project(&p, &mut []).unwrap();
            attempts += 1;
        }
        sizes += dict.len();
        let atoms: Vec<Vec<f64>> = dict.atoms().map(<[f64]>::to_vec).collect();
        for _ in 0..3 {
            let x = random_point(&mut rng, dim, 1.0);
            let ald = dict.ald_distance(&x).unwrap();
            let direct = if atoms.is_empty() {
                kernel.eval(&x, &x).unwrap()
            } else {
                let g = gram_matrix(&kernel, &atoms).unwrap();
                let n = atoms.len();
                let inv = (g + DMatrix::identity(n, n) * jitter).try_inverse().unwrap();
                let k = DVector::from_iterator(n, atoms.iter().map(|a| kernel.eval(a, &x).unwrap()));
                kernel.eval(&x, &x).unwrap() - (k.transpose() * inv * &k)[(0, 0)]
            };
            worst = worst.max((ald.dist * ald.dist - direct.max(0.0)).abs());
        }
    }
    verdict(
        "C2",
        worst <= 1e-6,
        format!("max |dist^2 - direct| {worst:.3e} (tol 1e-6), mean size {:.1}", sizes as f64 / 500.0),
    );
}

// ---------------------------------------------------------------------------
// 3. Dictionary sizes
// ---------------------------------------------------------------------------

fn synthetic(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

#[test]
fn c3_dictionary_sizes() {
    let base = "m_pre = 10\nm_post = 10\nalpha = 0.1\nn_train = 2000\nn_test = 200\nrealizations = 2\nseed = 3\n";
    let run = |kernel: &str| run_experiment(&synthetic(&format!("{base}kernel = {kernel}\n"))).unwrap();
    let linear = run("linear");
    let gaussian = run("gaussian");
    let hybrid = run("hybrid");
    let linear_ok = linear.avg_dict_size == 42.0;
    let capacity_ok = hybrid.avg_linear_capacity == 42.0;
    let ratio_ok = hybrid.avg_gaussian_novel.is_finite() && 5.0 * hybrid.avg_gaussian_novel <= gaussian.avg_dict_size;
    verdict(
        "C3",
        linear_ok && capacity_ok && ratio_ok,
        format!(
            "linear {} (want 42); hybrid {} + {} (capacity want 42); gaussian {} (want >= 5x hybrid novel)",
            linear.avg_dict_size, hybrid.avg_linear_capacity, hybrid.avg_gaussian_novel, gaussian.avg_dict_size
        ),
    );
}

// ---------------------------------------------------------------------------
// 4. Step size and concurrency trade-offs
// ---------------------------------------------------------------------------

#[test]
fn c4_step_size_and_concurrency() {
    let t0 = std::time::Instant::now();
    let base = "kernel = linear\nm_pre = 10\nm_post = 10\nn_train = 10000\nn_test = 2000\nrealizations = 20\nseed = 4\n";
    let run = |mu: f64, q: usize| run_experiment(&synthetic(&format!("{base}mu = {mu}\nq = {q}\n"))).unwrap();
    let fast = run(1.0, 1);
    let slow = run(0.02, 1);
    let conc = run(0.02, 20);

    let ss = |c: &LearningCurve| c.steady_state_db(0.1);
    let (ss_fast, ss_slow) = (ss(&fast), ss(&slow));
    let t_fast = fast.iterations_to_reach(ss_fast, 3.0).unwrap_or(usize::MAX);
    let t_slow = slow.iterations_to_reach(ss_slow, 3.0).unwrap_or(usize::MAX);
    let t_conc = conc.iterations_to_reach(ss_slow, 3.0).unwrap_or(usize::MAX);
    let secs = t0.elapsed().as_secs_f64();

    let a = t_fast < t_slow && ss_fast - ss_slow >= 2.0;
    let b = t_conc.saturating_mul(2) <= t_slow;
    verdict(
        "C4",
        a && b && secs < 300.0,
        format!(
            "(a) mu=1: ss {ss_fast:.2} dB at {t_fast}, mu=0.02: ss {ss_slow:.2} dB at {t_slow}; \
             (b) q=20 within 3 dB at {t_conc}; {secs:.0}s"
        ),
    );
}

// ---------------------------------------------------------------------------
// 5. Kernel comparison on the nonlinear channel
// ---------------------------------------------------------------------------

#[test]
fn c5_kernel_comparison() {
    // Window covering exactly the three channel taps.
    let base = "m_pre = 0\nm_post = 2\nmu = 0.1\nq = 1\nn_train = 10000\nn_test = 20000\nrealizations = 4\nseed = 5\n";
    let run = |extra: &str| run_experiment(&synthetic(&format!("{base}{extra}"))).unwrap();
    let linear = run("kernel = linear\n");
    let gaussian = run("kernel = gaussian\n");
    let hybrid = run("kernel = hybrid\n");
    let nlms = run("filter = nlms\n");
    let (l, g, h, n) = (linear.test_mse_db, gaussian.test_mse_db, hybrid.test_mse_db, nlms.test_mse_db);
    let pass = h <= l - 1.0 && h <= g && (n - l).abs() <= 2.0;
    verdict(
        "C5",
        pass,
        format!(
            "test MSE dB: linear {l:.2}, gaussian {g:.2} ({} atoms), hybrid {h:.2} ({} atoms), nlms {n:.2}",
            gaussian.avg_dict_size, hybrid.avg_dict_size
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. Noise floor on a linear channel
// ---------------------------------------------------------------------------

#[test]
fn c6_noise_floor() {
    let mut cfg = synthetic(
        "kernel = linear\nm_pre = 10\nm_post = 10\nmu = 0.1\nnl3 = 0\nnl5 = 0\niq = 0\nsnr_db = 40\n\
         n_train = 10000\nn_test = 20000\nrealizations = 4\nseed = 6\n",
    );
    let DataSource::Synthetic { channel, .. } = &cfg.source else { unreachable!() };
    assert!(channel.is_linear());
    let std = cfg.source.resolved_channel().unwrap().noise_std;
    let floor = 10.0 * (2.0 * std * std).log10();
    cfg.filter = FilterKind::Apsm;
    let curve = run_experiment(&cfg).unwrap();
    let gap = curve.test_mse_db - floor;
    verdict(
        "C6",
        gap.abs() <= 1.0,
        format!("test MSE {:.3} dB, noise floor {floor:.3} dB, gap {gap:.3} dB (tol 1 dB)", curve.test_mse_db),
    );
}

// ---------------------------------------------------------------------------
// 7. Invariants
// ---------------------------------------------------------------------------

#[test]
fn c7a_extrapolation_at_least_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let taps = TapConfig::new(1, 2);
    let model = SiChannelModel::default();
    let tx = complex_gaussian(&mut rng, 3000, 1.0);
    let rx = model.generate_si(&tx);
    let mut min_m = f64::INFINITY;
    let mut steps = 0;
    for kernel in [KernelSpec::Linear, KernelSpec::gaussian(0.0715).unwrap(), KernelSpec::hybrid(0.1, 0.9, 0.225).unwrap()] {
        for q in [1, 4, 16] {
            let cfg = ApsmConfig::new(kernel, 0.5, q, 1e-3, 0.1);
            let mut f = ComplexApsmFilter::new(cfg, taps.regressor_len()).unwrap();
            for n in 0..1000 {
                let r = f.apsm_step(&build_regressor(&tx, n, taps), rx[n]).unwrap();
                min_m = min_m.min(r.m_real).min(r.m_imag);
                steps += 1;
            }
        }
    }
    verdict("C7a", min_m >= 1.0 - 1e-12, format!("min M over {steps} steps {min_m:.15}"));
}

/// `||f - g||^2` with `f` over the dictionary atoms and `g` over `pool`.
fn rkhs_distance_sq(kernel: &KernelSpec, dict: &Dictionary, f: &FunctionEstimate, pool: &[Vec<f64>], c: &[f64]) -> f64 {
    let ff = dict.norm_squared(f).unwrap();
    let mut fg = 0.0;
    for (a, fa) in dict.atoms().zip(&f.coeffs) {
        for (p, cp) in pool.iter().zip(c) {
            fg += fa * cp * kernel.eval(a, p).unwrap();
        }
    }
    let mut gg = 0.0;
    for (p, cp) in pool.iter().zip(c) {
        for (r, cr) in pool.iter().zip(c) {
            gg += cp * cr * kernel.eval(p, r).unwrap();
        }
    }
    ff - 2.0 * fg + gg
}

fn fejer_run(steps: usize, alpha: f64, q: usize, seed: u64) -> (usize, f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 4;
    let kernel = KernelSpec::gaussian(1.0).unwrap();
    let pool: Vec<Vec<f64>> = (0..48).map(|_| random_point(&mut rng, dim, 1.0)).collect();
    let c_re: Vec<f64> = (0..pool.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c_im: Vec<f64> = (0..pool.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let eps = 0.01;
    let target = |x: &[f64], c: &[f64]| -> f64 { pool.iter().zip(c).map(|(p, cp)| cp * kernel.eval(p, x).unwrap()).sum() };

    let mut filter = ComplexApsmFilter::new(ApsmConfig::new(kernel, 1.0, q, eps, alpha), dim).unwrap();
    let mut prev = (f64::INFINITY, f64::INFINITY);
    let mut violations = 0;
    let mut worst_increase: f64 = 0.0;
    for _ in 0..steps {
        let x = pool[rng.gen_range(0..pool.len())].clone();
        // Targets stay inside every slab around the feasible function g.
        let y = Complex64::new(
            target(&x, &c_re) + rng.gen_range(-0.5..0.5) * eps,
            target(&x, &c_im) + rng.gen_range(-0.5..0.5) * eps,
        );
        filter.apsm_step(&x, y).unwrap();
        let dict = filter.dictionary();
        let d = (
            rkhs_distance_sq(&kernel, dict, filter.f_real(), &pool, &c_re),
            rkhs_distance_sq(&kernel, dict, filter.f_imag(), &pool, &c_im),
        );
        for (now, before) in [(d.0, prev.0), (d.1, prev.1)] {
            if before.is_finite() {
                let increase = now - before;
                worst_increase = worst_increase.max(increase);
                if increase > 1e-9 * before.max(1e-12) + 1e-12 {
                    violations += 1;
                }
            }
        }
        prev = d;
    }
    (violations, worst_increase, filter.dictionary().len())
}

#[test]
fn c7b_fejer_monotonicity() {
    let (v_sparse, inc_sparse, atoms) = fejer_run(5000, 1e-3, 4, 71);
    let (v_full, inc_full, _) = fejer_run(300, 0.0, 4, 72);
    verdict(
        "C7b",
        v_sparse == 0 && v_full == 0,
        format!(
            "5000 steps alpha=1e-3 ({atoms} atoms): {v_sparse} increases, worst {inc_sparse:.2e}; \
             300 steps alpha=0: {v_full} increases, worst {inc_full:.2e}"
        ),
    );
}

/// Largest weight difference between NLMS and linear-kernel APSM (q = 1,
/// eps = 0) over 1000 steps, with both regularizers set to `reg`.
fn nlms_apsm_deviation(reg: f64, alpha: f64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let taps = TapConfig::new(0, 1);
    let dim = taps.regressor_len();
    let model = SiChannelModel::default();
    let tx = complex_gaussian(&mut rng, 1000, 1.0);
    let rx = model.generate_si(&tx);
    let mu = 0.1;
    let mut nlms = NlmsFilter::new(dim, mu, reg).unwrap();
    let mut cfg = ApsmConfig::new(KernelSpec::Linear, mu, 1, 0.0, alpha);
    cfg.dictionary.jitter = reg;
    let mut apsm = ComplexApsmFilter::new(cfg, dim).unwrap();
    let mut worst: f64 = 0.0;
    for n in 0..1000 {
        let x = build_regressor(&tx, n, taps);
        nlms.nlms_step(&x, rx[n]).unwrap();
        apsm.apsm_step(&x, rx[n]).unwrap();
        // Linear-kernel estimate as a weight vector: sum_b gamma_b x_b.
        let (w_re, w_im) = nlms.weights();
        for (w, f) in [(w_re, apsm.f_real()), (w_im, apsm.f_imag())] {
            let mut v = vec![0.0; dim];
            for (atom, g) in apsm.dictionary().atoms().zip(&f.coeffs) {
                for (vi, ai) in v.iter_mut().zip(atom) {
                    *vi += g * ai;
                }
            }
            for (a, b) in v.iter().zip(w) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    (worst, apsm.dictionary().len())
}

#[test]
fn c7c_nlms_equals_linear_apsm() {
    // Equivalence holds as the regularizers vanish; the default jitter run is
    // reported for reference.
    let (worst, atoms) = nlms_apsm_deviation(1e-12, 1e-3);
    let (default_jitter, _) = nlms_apsm_deviation(1e-8, 1e-3);
    verdict(
        "C7c",
        worst <= 1e-8,
        format!(
            "max weight deviation {worst:.3e} over 1000 steps with regularizers 1e-12 ({atoms} atoms, tol 1e-8); \
             {default_jitter:.3e} at jitter 1e-8"
        ),
    );
}

#[test]
fn c7d_kernel_symmetry_and_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    let mut worst_asym: f64 = 0.0;
    let mut worst_eig = f64::INFINITY;
    for _ in 0..200 {
        let kernel = random_kernel(&mut rng);
        let dim = rng.gen_range(1..=12);
        let n = rng.gen_range(1..=25);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| random_point(&mut rng, dim, 2.0)).collect();
        let g = gram_matrix(&kernel, &pts).unwrap();
        for i in 0..n {
            for j in 0..n {
                let direct = kernel.eval(&pts[j], &pts[i]).unwrap();
                worst_asym = worst_asym.max((g[(i, j)] - g[(j, i)]).abs()).max((g[(i, j)] - direct).abs());
            }
        }
        let scale = g.trace().max(1.0);
        let min_eig = g.symmetric_eigen().eigenvalues.min() / scale;
        worst_eig = worst_eig.min(min_eig);
    }
    verdict(
        "C7d",
        worst_asym == 0.0 && worst_eig >= -1e-12,
        format!("max asymmetry {worst_asym:e}, min eigenvalue / trace {worst_eig:.3e}"),
    );
}

// ---------------------------------------------------------------------------
// 8. Byte-identical CLI output
// ---------------------------------------------------------------------------

#[test]
fn c8_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "kernel = hybrid\nm_pre = 1\nm_post = 2\nn_train = 1500\nn_test = 500\nrealizations = 4\nseed = 8\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_apsm-sic"))
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        (fs::read(out.join("curve.csv")).unwrap(), fs::read(out.join("summary.csv")).unwrap())
    };
    let a = run("a");
    let b = run("b");
    verdict(
        "C8",
        a == b && !a.0.is_empty(),
        format!("curve {} bytes, summary {} bytes, identical: {}", a.0.len(), a.1.len(), a == b),
    );
}
