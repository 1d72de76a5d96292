//! `apsm-sic` command line: `run`, `sweep` and `gen`.
//!
//! Exit codes: 0 on success, 2 on usage or configuration errors, 1 on runtime
//! errors.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex32;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{DataSource, ExperimentConfig, FilterKind};
use super::experiment::{run_realizations, LearningCurve};
use super::report::{summary_row, write_curve_csv, write_summary_csv};
use crate::error::{Error, Result};
use crate::signal::{complex_gaussian, save_iq};

#[derive(Debug, Parser)]
#[command(name = "apsm-sic", version, about = "Kernel APSM self-interference cancellation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write `curve.csv` and `summary.csv`.
    Run(RunArgs),
    /// Grid over `sweep_mu`, `sweep_q` and `sweep_kernel`.
    Sweep(RunArgs),
    /// Write synthetic transmit (and optionally receive) IQ files.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Channel and power settings; defaults apply without a file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Transmit IQ file.
    #[arg(long)]
    out: PathBuf,
    /// Receive IQ file through the configured channel.
    #[arg(long)]
    rx_out: Option<PathBuf>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Gen(a) => cmd_gen(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                2
            } else {
                1
            }
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn execute(cfg: &ExperimentConfig) -> Result<LearningCurve> {
    let results = run_realizations(cfg)?;
    if let Some(path) = &cfg.dict_out {
        if let Some(snap) = results.first().and_then(|r| r.snapshot.as_ref()) {
            snap.write_csv(create(path)?)?;
        }
    }
    LearningCurve::from_realizations(cfg, &results)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = load(args)?;
    let curve = execute(&cfg)?;
    fs::create_dir_all(&cfg.out)?;
    write_curve_csv(create(&cfg.out.join("curve.csv"))?, &curve)?;
    let row = summary_row(&cfg, &curve);
    write_summary_csv(create(&cfg.out.join("summary.csv"))?, std::slice::from_ref(&row))?;
    println!(
        "{} {}: test_mse_db={:.3} dict_size={} (linear {} + novel {})",
        row.filter,
        row.kernel,
        curve.test_mse_db,
        curve.avg_dict_size,
        curve.avg_linear_capacity,
        curve.avg_gaussian_novel
    );
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> Result<()> {
    let base = load(args)?;
    let mus = if base.sweep_mu.is_empty() { vec![base.mu] } else { base.sweep_mu.clone() };
    let (qs, kernels) = match base.filter {
        FilterKind::Apsm => (
            if base.sweep_q.is_empty() { vec![base.q] } else { base.sweep_q.clone() },
            if base.sweep_kernel.is_empty() { vec![base.kernel.kind] } else { base.sweep_kernel.clone() },
        ),
        FilterKind::Nlms => (vec![base.q], vec![base.kernel.kind]),
    };
    fs::create_dir_all(&base.out)?;

    let mut rows = Vec::new();
    for &kind in &kernels {
        for &q in &qs {
            for &mu in &mus {
                let mut cfg = base.clone();
                cfg.kernel.kind = kind;
                cfg.q = q;
                cfg.mu = mu;
                cfg.dict_out = None;
                let curve = execute(&cfg)?;
                let row = summary_row(&cfg, &curve);
                let name = format!("curve_{}_{}_mu{}_q{}.csv", row.filter, row.kernel, mu, q);
                write_curve_csv(create(&cfg.out.join(&name))?, &curve)?;
                println!("{name}: test_mse_db={:.3} dict_size={}", curve.test_mse_db, curve.avg_dict_size);
                rows.push(row);
            }
        }
    }
    write_summary_csv(create(&base.out.join("summary.csv"))?, &rows)
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let DataSource::Synthetic { tx_power, .. } = &cfg.source else {
        return Err(Error::config("tx_file", "gen needs a synthetic channel, not input files"));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let tx = complex_gaussian(&mut rng, args.n, *tx_power);
    let narrow = |v: &[num_complex::Complex64]| -> Vec<Complex32> {
        v.iter().map(|s| Complex32::new(s.re as f32, s.im as f32)).collect()
    };
    save_iq(&args.out, &narrow(&tx))?;
    if let Some(rx_path) = &args.rx_out {
        let mut model = cfg.source.resolved_channel().expect("synthetic source has a channel");
        model.seed = cfg.seed;
        save_iq(rx_path, &narrow(&model.generate_si(&tx)))?;
    }
    Ok(())
}
