use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use conepr::cone::{ConeGenerator, UnionOfCones};
use conepr::design::{design_ensemble, validate_ensemble, DesignOptions, MeasurementEnsemble};
use conepr::feasibility::{detectability_check, FeasibilityConfig};
use conepr::harness::{
    grid, run_noiseless, run_noisy, stability_curves, summarize_noiseless, write_curves_csv, write_noiseless_csv,
    write_noisy_csv, ExperimentConfig, Mode,
};
use conepr::recover::{recover, recover_noisy};

#[derive(Parser)]
#[command(name = "conepr", version, about = "Detection and fast phase retrieval for unions of cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Noiseless,
    Noisy,
}

#[derive(Subcommand)]
enum Command {
    /// Certify detectability of a union and print its detector bank.
    Analyze { union: PathBuf },
    /// Design a measurement ensemble for one cone.
    Design {
        cone: PathBuf,
        /// JSON array: an interior point used as the anchor seed.
        #[arg(long)]
        q1: Option<PathBuf>,
        /// One shift for every row instead of the computed bound.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recover a signal from the magnitudes of an ensemble's measurements.
    Recover {
        ensemble: PathBuf,
        /// JSON array of magnitudes, one per ensemble vector.
        measurements: PathBuf,
        /// Accept negative entries (noise-contaminated magnitudes).
        #[arg(long)]
        noisy: bool,
    },
    /// Run the detection and recovery experiment on the reference union.
    Simulate {
        /// Use the built-in reference two-cone union (the only workload).
        #[arg(long, alias = "paper")]
        reference: bool,
        #[arg(long, default_value_t = 8)]
        n_min: usize,
        #[arg(long, default_value_t = 64)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        n_step: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Noiseless)]
        mode: ModeArg,
        /// Comma-separated SNR values in dB (noisy mode).
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60")]
        snr: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cone the targets are drawn from: 0 or 1.
        #[arg(long, default_value_t = 0)]
        target_cone: usize,
        /// Add the recover_seconds column (noiseless mode).
        #[arg(long)]
        timing: bool,
        /// Add the alternating-minimization baseline column.
        #[arg(long)]
        altmin: bool,
        /// Baseline measurements per unit of n.
        #[arg(long, default_value_t = 4)]
        altmin_factor: usize,
        /// Output CSV; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the stability success probability over a grid of ε/(2σ²).
    Stability {
        #[arg(long, value_delimiter = ',', default_value = "81,801,8001")]
        gammas: Vec<usize>,
        /// start:step:stop, endpoints included.
        #[arg(long, default_value = "0:0.1:10")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(io::BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, step, stop] = parts[..] else {
        bail!("grid must be start:step:stop, got {spec:?}");
    };
    let parse = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad grid value {s:?}"));
    Ok(grid(parse(start)?, parse(step)?, parse(stop)?)?)
}

fn analyze(path: &Path) -> Result<()> {
    let union: UnionOfCones = read_json(path)?;
    let report = detectability_check(&union, &FeasibilityConfig::default())?;
    print_json(&json!({
        "dim": union.dim(),
        "cone_count": union.len(),
        "ranks": union.cones().iter().map(ConeGenerator::rank).collect::<Vec<_>>(),
        "detectable": report.detectable,
        "failing_pair": report.failing_pair,
        "bank": report.bank,
    }))
}

fn design(cone: &Path, q1: Option<&Path>, delta: Option<f64>, seed: u64) -> Result<()> {
    let x: ConeGenerator = read_json(cone)?;
    let q1: Option<Vec<f64>> = q1.map(read_json).transpose()?;
    let opts = DesignOptions {
        q1,
        delta_override: delta,
        seed,
        cone_ref: cone.file_name().map(|s| s.to_string_lossy().into_owned()),
    };
    let e = design_ensemble(&x, &opts, &FeasibilityConfig::default())?;
    let report = validate_ensemble(&e, &x)?;
    if !report.passed() {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        bail!("designed ensemble failed validation: {failed:?}");
    }
    print_json(&serde_json::to_value(&e)?)
}

fn recover_cmd(ensemble: &Path, measurements: &Path, noisy: bool) -> Result<()> {
    let e: MeasurementEnsemble = read_json(ensemble)?;
    let b: Vec<f64> = read_json(measurements)?;
    let res = if noisy { recover_noisy(&e, &b)? } else { recover(&e, &b)? };
    print_json(&json!({
        "z": res.z,
        "residual": res.residual,
        "anchor_measurement_nonnegative": res.anchor_measurement_nonnegative,
    }))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    n_min: usize,
    n_max: usize,
    n_step: usize,
    trials: usize,
    mode: ModeArg,
    snr: Vec<f64>,
    seed: u64,
    target_cone: usize,
    timing: bool,
    altmin: bool,
    altmin_factor: usize,
    out: Option<&Path>,
) -> Result<()> {
    if n_step == 0 || n_min > n_max {
        bail!("need n-min <= n-max and a positive n-step");
    }
    let cfg = ExperimentConfig {
        n_values: (n_min..=n_max).step_by(n_step).collect(),
        trials,
        mode: match mode {
            ModeArg::Noiseless => Mode::Noiseless,
            ModeArg::Noisy => Mode::Noisy,
        },
        snr_db: snr,
        seed,
        target_cone,
        timing,
        altmin,
        altmin_factor,
    };
    let mut w = output(out)?;
    match cfg.mode {
        Mode::Noiseless => {
            let rows = run_noiseless(&cfg)?;
            write_noiseless_csv(&rows, timing, altmin, &mut w)?;
            for s in summarize_noiseless(&rows) {
                eprintln!(
                    "n={} trials={} mean_error_db={:.2} max_error_db={:.2}",
                    s.n, s.trials, s.mean_error_db, s.max_error_db
                );
            }
        }
        Mode::Noisy => {
            if timing {
                bail!("--timing applies to noiseless mode only");
            }
            let rows = run_noisy(&cfg)?;
            write_noisy_csv(&rows, altmin, &mut w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn stability(gammas: &[usize], grid_spec: &str, out: Option<&Path>) -> Result<()> {
    let xs = parse_grid(grid_spec)?;
    let rows = stability_curves(gammas, &xs)?;
    let mut w = output(out)?;
    write_curves_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Analyze { union } => analyze(&union),
        Command::Design { cone, q1, delta, seed } => design(&cone, q1.as_deref(), delta, seed),
        Command::Recover {
            ensemble,
            measurements,
            noisy,
        } => recover_cmd(&ensemble, &measurements, noisy),
        Command::Simulate {
            reference: _,
            n_min,
            n_max,
            n_step,
            trials,
            mode,
            snr,
            seed,
            target_cone,
            timing,
            altmin,
            altmin_factor,
            out,
        } => simulate(
            n_min,
            n_max,
            n_step,
            trials,
            mode,
            snr,
            seed,
            target_cone,
            timing,
            altmin,
            altmin_factor,
            out.as_deref(),
        ),
        Command::Stability { gammas, grid, out } => stability(&gammas, &grid, out.as_deref()),
    }
}
