//! The `fluxlat` command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 capacity or convergence
//! failure, 3 file-system failure.

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, ErrorClass, Result};
use crate::experiments::{self, ExperimentKind, RunRecord};
use crate::lattice::Boundary;

pub use config::{load_config, resolve, ConfigFile, Overrides};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err.class() {
        ErrorClass::Validation => EXIT_VALIDATION,
        ErrorClass::Capacity => EXIT_CAPACITY,
        ErrorClass::Io => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fluxlat",
    version,
    about = "Exact diagonalization of compact lattice QED and its rotor-model realization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count full and Gauss-sector basis states.
    SectorCount(Common),
    /// Ground state, field map and flux-tube profile of one sector.
    GroundState(Common),
    /// Static potential V(R) of a charge pair.
    Potential(Common),
    /// Compare the rotor model, its effective theory and Kogut-Susskind.
    EffectiveCompare(Common),
    /// Compare spectra of the rotor model in both pictures.
    StaggerCheck(Common),
    /// Check a configuration without running it.
    Validate(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    g2: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    lx: Option<usize>,
    #[arg(long)]
    ly: Option<usize>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    /// Link truncation Λ.
    #[arg(long)]
    trunc: Option<u8>,
    /// Charge separations for `potential`, comma separated.
    #[arg(long, value_delimiter = ',')]
    r_list: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run effective-compare outside the QED regime.
    #[arg(long)]
    force_regime: bool,
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn parse_boundary(s: &str) -> std::result::Result<Boundary, String> {
    match s {
        "open" => Ok(Boundary::Open),
        "periodic" => Ok(Boundary::Periodic),
        _ => Err(format!("expected open or periodic, got {s}")),
    }
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            g2: self.g2,
            lambda: self.lambda,
            mu: self.mu,
            omega: self.omega,
            lx: self.lx,
            ly: self.ly,
            boundary: self.boundary,
            trunc: self.trunc,
            r_list: self.r_list.clone(),
            out: self.out.clone(),
            force_regime: self.force_regime,
        }
    }

    fn experiment(&self, kind: Option<ExperimentKind>) -> Result<experiments::ExperimentConfig> {
        let file = match &self.config {
            Some(path) => load_config(path)?,
            None => ConfigFile::default(),
        };
        resolve(file, &self.overrides(), kind)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Diagnostics go to `err`.
pub fn parse_and_dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point of the binary.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    parse_and_dispatch(args, &mut stdout.lock(), &mut stderr.lock())
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (common, kind) = match &command {
        Command::SectorCount(c) => (c, Some(ExperimentKind::SectorCount)),
        Command::GroundState(c) => (c, Some(ExperimentKind::GroundState)),
        Command::Potential(c) => (c, Some(ExperimentKind::Potential)),
        Command::EffectiveCompare(c) => (c, Some(ExperimentKind::EffectiveCompare)),
        Command::StaggerCheck(c) => (c, Some(ExperimentKind::StaggerCheck)),
        Command::Validate(c) => (c, None),
    };
    let config = common.experiment(kind)?;
    if kind.is_none() {
        config.validate()?;
        writeln!(out, "ok: {} configuration is valid", config.kind.name()).map_err(io_err)?;
        return Ok(());
    }

    let mut record = experiments::run(&config)?;
    // counting writes nothing unless asked to
    let dir = match (&config.output_dir, config.kind) {
        (Some(d), _) => Some(d.clone()),
        (None, ExperimentKind::SectorCount) => None,
        (None, _) => Some(PathBuf::from(".")),
    };
    if let Some(dir) = &dir {
        record.write(dir)?;
    }
    report(&record, dir.as_deref(), common.verbose, out).map_err(io_err)?;
    for w in &record.warnings {
        writeln!(err, "warning: {w}").map_err(io_err)?;
    }
    Ok(())
}

fn report(rec: &RunRecord, dir: Option<&Path>, verbose: u8, out: &mut dyn Write) -> std::io::Result<()> {
    let r = &rec.results;
    match rec.kind {
        ExperimentKind::SectorCount => {
            writeln!(out, "{}", rec.basis_sizes["projected"])?;
            writeln!(out, "full basis: {}", rec.basis_sizes["full"])?;
            match r["brute_force"].as_u64() {
                Some(n) => writeln!(out, "brute-force filter: {n} (match)")?,
                None => writeln!(out, "brute-force filter: skipped")?,
            }
        }
        ExperimentKind::GroundState => {
            writeln!(out, "sector size: {}", rec.basis_sizes["projected"])?;
            writeln!(out, "g2: {}", r["g2"])?;
            for (i, e) in r["eigenvalues"].as_array().into_iter().flatten().enumerate() {
                writeln!(out, "E{i}: {e}")?;
            }
            if let Some(t) = r["flux_tube"].as_object() {
                writeln!(out, "on tube <E>: {}", t["on_tube"])?;
                writeln!(out, "off tube max |<E>|: {}", t["off_tube_max"])?;
                writeln!(out, "delta alternates: {}", t["alternates"])?;
            }
        }
        ExperimentKind::Potential => {
            if let Some(csv) = rec.file("potential.csv") {
                write!(out, "{csv}")?;
            }
            writeln!(out, "slope: {} (strong coupling {})", r["slope"], r["slope_strong"])?;
        }
        ExperimentKind::EffectiveCompare => {
            if let Some(csv) = rec.file("effective_compare.csv") {
                write!(out, "{csv}")?;
            }
            writeln!(out, "rotor vs effective: {}", r["discrepancy"])?;
            writeln!(out, "at omega/2: {}", r["discrepancy_half_omega"])?;
            writeln!(out, "scaling ratio: {}", r["scaling_ratio"])?;
        }
        ExperimentKind::StaggerCheck => {
            writeln!(out, "levels compared: {}", r["levels_compared"])?;
            writeln!(out, "max |difference|: {}", r["max_abs_diff"])?;
        }
    }
    if let Some(dir) = dir {
        writeln!(out, "wrote {}", dir.join("run.json").display())?;
    }
    if verbose > 0 {
        for (phase, secs) in &rec.timings {
            writeln!(out, "time {phase}: {secs:.3} s")?;
        }
        for (name, c) in &rec.convergence {
            writeln!(
                out,
                "solver {name}: {} iterations, residual {:e}, converged {}",
                c.iterations, c.max_residual, c.converged
            )?;
        }
    }
    Ok(())
}
