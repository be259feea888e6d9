//! Command-line front end. Every subcommand resolves its parameters, runs,
//! collects its output files in memory and writes them at the end, together
//! with a manifest that `rerun` can replay.

mod commands;
mod config;
mod manifest;
mod svg;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use commands::{
    BasisParams, Job, ParityParams, ReproduceParams, RunOutput, ScanParams, SpectrumParams,
};
pub use config::Config;
pub use manifest::{preset_hash, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numerical(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(
                E::InvalidInput(_)
                | E::InvalidTolerance(_)
                | E::EmptySpan(_)
                | E::OutOfRange { .. },
            ) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Io { .. } => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "paircheck",
    version,
    about = "Reproduce and stress-test solutions of the coupled eigenfunction system"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output directory [default: ./out]
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Config file [default: ./paircheck.toml if present]
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Unix timestamp recorded in manifests [default: SOURCE_DATE_EPOCH, then the clock]
    #[arg(long, global = true)]
    pub timestamp: Option<u64>,
    /// Absolute per-step error target [default: 1e-12]
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Relative per-step error target [default: 1e-10]
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Largest integration step [default: 0.1]
    #[arg(long, global = true)]
    pub max_step: Option<f64>,
    /// Halt integration once a component exceeds this magnitude [default: 1e12]
    #[arg(long, global = true)]
    pub overflow_cap: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a figure preset over [-10, 10] and report its growth
    Reproduce(ReproduceArgs),
    /// Parity defects, swap-mirror residuals, dependence fit, superposition test
    Parity(ParityArgs),
    /// Complex-pair identities, residuals and the x/y rescaling check
    Basis(BasisArgs),
    /// Finite-difference spectra on several truncated domains
    Spectrum(SpectrumArgs),
    /// Two-sided shooting scan over epsilon
    Scan(ScanArgs),
    /// Replay a manifest
    Rerun(RerunArgs),
}

fn figure_arg() -> clap::builder::RangedI64ValueParser<u32> {
    clap::value_parser!(u32).range(9..=11)
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Figure preset: 9, 10 or 11
    #[arg(long, value_parser = figure_arg())]
    pub figure: u32,
    /// Negate both initial derivatives
    #[arg(long)]
    pub flip_slopes: bool,
    /// Also write the curves rebuilt from the y >= 0 half
    #[arg(long)]
    pub as_published: bool,
    /// Left end of the span [default: -10]
    #[arg(long, allow_hyphen_values = true)]
    pub y_min: Option<f64>,
    /// Right end of the span [default: 10]
    #[arg(long, allow_hyphen_values = true)]
    pub y_max: Option<f64>,
    /// Sample spacing of the written trajectory [default: 0.01]
    #[arg(long)]
    pub resolution: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ParityArgs {
    /// Figure preset: 9, 10 or 11
    #[arg(long, value_parser = figure_arg(), required_unless_present = "self_test")]
    pub figure: Option<u32>,
    /// Second solution for the superposition test (same epsilon)
    #[arg(long, value_parser = figure_arg())]
    pub partner: Option<u32>,
    /// Half-width of the symmetric window [default: 2]
    #[arg(long)]
    pub window: Option<f64>,
    /// Spacing of the symmetric grid [default: 0.01]
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Negate both initial derivatives
    #[arg(long)]
    pub flip_slopes: bool,
    /// Run on exactly even/odd synthetic inputs instead
    #[arg(long, conflicts_with = "figure")]
    pub self_test: bool,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    /// Figure preset: 9, 10 or 11
    #[arg(long, value_parser = figure_arg())]
    pub figure: u32,
    /// Also evaluate deliberately wrong compositions; exit 3 unless they fail clearly
    #[arg(long)]
    pub negative_control: bool,
    /// Half-width of the x/y comparison window [default: 4]
    #[arg(long)]
    pub scaling_window: Option<f64>,
    /// Negate both initial derivatives
    #[arg(long)]
    pub flip_slopes: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Domain half-widths, increasing
    #[arg(long = "L", value_delimiter = ',', default_values_t = [8.0, 10.0, 12.0, 15.0])]
    pub l: Vec<f64>,
    /// Interior points per domain [default: smallest N with h <= --max-spacing]
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Largest grid spacing used when --N is not given
    #[arg(long, default_value_t = crate::spectrum::DEFAULT_MAX_SPACING)]
    pub max_spacing: f64,
    /// Shift (in epsilon) above which a level is flagged as not converged
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
    /// Epsilon values whose nearest levels are tracked
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 5.0])]
    pub targets: Vec<f64>,
    /// Epsilon window of the convergence table, as MIN:MAX
    #[arg(long, default_value = "1.5:5.5")]
    pub eps_window: String,
    /// Run the potential-free operator against the analytic spectrum instead
    #[arg(long)]
    pub free_particle: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// MIN:MAX:STEP
    #[arg(long, default_value = "1.5:5.5:0.01")]
    pub eps: String,
    /// Shooting half-widths
    #[arg(long = "Y", value_delimiter = ',', default_values_t = [8.0, 10.0, 12.0])]
    pub y: Vec<f64>,
    /// Run the decoupled oscillator self-test instead of the coupled system
    #[arg(long)]
    pub oscillator: bool,
    /// Rescale fundamental solutions above this max-norm [default: 1e6]
    #[arg(long)]
    pub renorm_threshold: Option<f64>,
    /// Largest epsilon distance at which dips in different scans match
    #[arg(long, default_value_t = 0.1)]
    pub match_tol: f64,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    /// A `*_manifest.json` file or any report embedding a manifest
    pub manifest: PathBuf,
}

/// Parse `A:B` or `A:B:C` into floats.
pub fn parse_range(s: &str, parts: usize) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("cannot parse range {s:?}")))?;
    if v.len() != parts {
        return Err(CliError::Usage(format!(
            "range {s:?} needs {parts} colon-separated numbers"
        )));
    }
    Ok(v)
}

struct Resolved {
    out_dir: PathBuf,
    timestamp: u64,
    tol: crate::ToleranceSpec,
    config: Config,
}

fn resolve_globals(g: &GlobalArgs) -> Result<Resolved, CliError> {
    let config = Config::load(g.config.as_deref())?;
    let d = crate::ToleranceSpec::default();
    let tol = crate::ToleranceSpec {
        abs_tol: g.abs_tol.or(config.abs_tol).unwrap_or(d.abs_tol),
        rel_tol: g.rel_tol.or(config.rel_tol).unwrap_or(d.rel_tol),
        max_step: g.max_step.or(config.max_step).unwrap_or(d.max_step),
        overflow_cap: g
            .overflow_cap
            .or(config.overflow_cap)
            .unwrap_or(d.overflow_cap),
    };
    tol.validate()?;
    Ok(Resolved {
        out_dir: g
            .out_dir
            .clone()
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        timestamp: manifest::resolve_timestamp(g.timestamp)?,
        tol,
        config,
    })
}

fn write_outputs(dir: &Path, out: &RunOutput) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for (name, bytes) in &out.files {
        let p = dir.join(name);
        std::fs::write(&p, bytes).map_err(io(&p))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let g = resolve_globals(&cli.global)?;
    let (job, tol, timestamp) = match cli.command {
        Command::Rerun(a) => {
            let text = std::fs::read_to_string(&a.manifest).map_err(|e| {
                CliError::Usage(format!("cannot read {}: {e}", a.manifest.display()))
            })?;
            let m = RunManifest::from_json(&text)?;
            if m.preset_hash != preset_hash() {
                return Err(CliError::Usage(
                    "manifest was written with different figure presets".into(),
                ));
            }
            m.tolerances.validate()?;
            (Job::from_manifest(&m)?, m.tolerances, m.timestamp)
        }
        other => (Job::from_command(other, &g.config)?, g.tol, g.timestamp),
    };
    let manifest = RunManifest {
        tool_version: manifest::tool_version(),
        subcommand: job.name().to_string(),
        parameters: job.parameters(),
        tolerances: tol,
        timestamp,
        preset_hash: preset_hash(),
    };
    let out = job.run(&manifest)?;
    write_outputs(&g.out_dir, &out)?;
    for line in &out.summary {
        println!("{line}");
    }
    for (name, _) in &out.files {
        println!("wrote {}", g.out_dir.join(name).display());
    }
    if let Some(msg) = &out.mismatch {
        eprintln!("paircheck: {msg}");
        return Ok(EXIT_MISMATCH);
    }
    Ok(EXIT_OK)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("paircheck: {e}");
            e.exit_code()
        }
    }
}
