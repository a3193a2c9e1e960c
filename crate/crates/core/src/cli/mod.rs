//! The `chronoflow` command line: one subcommand per pipeline, JSON configs,
//! explicit seeds and a digest manifest for every run.

mod config;
mod error;
mod manifest;
mod pipelines;
mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use self::config::{Command, Overrides, RunConfig};
pub use self::error::{CliError, ErrorKind};
pub use self::manifest::{sha256_hex, OutputRecord, RunManifest, MANIFEST_FILE};
pub use self::table::{Cell, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "chronoflow", version, about = "Stochastic-process models for historical time series")]
struct Cli {
    /// JSON config; its keys are the subcommand's parameters plus `seed`, `out` and `format`.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory (default: the working directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Top,
}

#[derive(Debug, Subcommand)]
enum Top {
    /// Principal components of a dataset CSV.
    Pca,
    /// Discrete-state Markov chains.
    Markov {
        #[command(subcommand)]
        action: MarkovAction,
    },
    /// Drift-diffusion fields on a plane.
    Sde {
        #[command(subcommand)]
        action: SdeAction,
    },
    /// Pooled histogram and dip test of a transient ensemble.
    Nullmodel,
    /// Continuous piecewise-linear fit and event timing.
    Hinge,
    /// Leslie-matrix hidden Markov demography.
    Demography {
        #[command(subcommand)]
        action: DemographyAction,
    },
    /// Repeats a run from its manifest and checks the output digests.
    Rerun { manifest: PathBuf },
}

#[derive(Debug, Subcommand)]
enum MarkovAction {
    Estimate,
    Simulate,
    Embed,
    Order,
    Master,
}

#[derive(Debug, Subcommand)]
enum SdeAction {
    Fit,
    Sample,
    Cycles,
    Helmholtz,
    Plot,
}

#[derive(Debug, Subcommand)]
enum DemographyAction {
    Simulate,
    Loglik,
    Fit,
}

fn command_of(top: &Top) -> Option<Command> {
    Some(match top {
        Top::Pca => Command::Pca,
        Top::Markov { action } => match action {
            MarkovAction::Estimate => Command::MarkovEstimate,
            MarkovAction::Simulate => Command::MarkovSimulate,
            MarkovAction::Embed => Command::MarkovEmbed,
            MarkovAction::Order => Command::MarkovOrder,
            MarkovAction::Master => Command::MarkovMaster,
        },
        Top::Sde { action } => match action {
            SdeAction::Fit => Command::SdeFit,
            SdeAction::Sample => Command::SdeSample,
            SdeAction::Cycles => Command::SdeCycles,
            SdeAction::Helmholtz => Command::SdeHelmholtz,
            SdeAction::Plot => Command::SdePlot,
        },
        Top::Nullmodel => Command::Nullmodel,
        Top::Hinge => Command::Hinge,
        Top::Demography { action } => match action {
            DemographyAction::Simulate => Command::DemographySimulate,
            DemographyAction::Loglik => Command::DemographyLoglik,
            DemographyAction::Fit => Command::DemographyFit,
        },
        Top::Rerun { .. } => return None,
    })
}

/// Executes the pipeline, writes its outputs and `manifest.json` into
/// `config.out`.
pub fn run(config: &RunConfig) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    log::info!("{} (seed {})", config.command.name(), config.seed);
    let outputs = pipelines::execute(config)?;
    let dir = &config.out;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::input(format!("cannot create output directory: {e}")).at(dir.display().to_string()))?;
    let mut records = Vec::new();
    for o in outputs {
        let path = dir.join(&o.name);
        std::fs::write(&path, &o.bytes)
            .map_err(|e| CliError::input(format!("cannot write output: {e}")).at(path.display().to_string()))?;
        log::debug!("wrote {}", path.display());
        records.push(OutputRecord { file: o.name, sha256: sha256_hex(&o.bytes), bytes: o.bytes.len() as u64 });
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs: records,
    };
    manifest.write(dir)?;
    Ok(manifest)
}

/// Runs the config recorded in a manifest again (optionally into another
/// directory) and fails with [`ErrorKind::Mismatch`] unless every output is
/// byte-identical to the recorded one.
pub fn rerun(manifest: &Path, out: Option<&Path>) -> Result<RunManifest, CliError> {
    let old = RunManifest::read(manifest)?;
    let overrides = Overrides { out: out.map(Path::to_path_buf), ..Overrides::default() };
    let config = old.config.revalidate(&overrides)?;
    let new = run(&config)?;
    let digests = |m: &RunManifest| m.outputs.iter().map(|o| (o.file.clone(), o.sha256.clone())).collect::<Vec<_>>();
    if digests(&old) != digests(&new) {
        let differing: Vec<String> = old
            .outputs
            .iter()
            .filter(|o| !new.outputs.iter().any(|n| n.file == o.file && n.sha256 == o.sha256))
            .map(|o| o.file.clone())
            .chain(new.outputs.iter().filter(|n| !old.outputs.iter().any(|o| o.file == n.file)).map(|n| n.file.clone()))
            .collect();
        return Err(CliError::new(ErrorKind::Mismatch, format!("outputs differ from the manifest: {}", differing.join(", "))));
    }
    Ok(new)
}

fn dispatch(cli: Cli) -> Result<RunManifest, CliError> {
    let overrides = Overrides { seed: cli.seed, out: cli.out.clone(), format: cli.format };
    match command_of(&cli.command) {
        Some(command) => run(&RunConfig::load(command, cli.config.as_deref(), &overrides)?),
        None => {
            let Top::Rerun { manifest } = &cli.command else { unreachable!() };
            if cli.config.is_some() || cli.seed.is_some() || cli.format.is_some() {
                return Err(CliError::schema("rerun takes only --out; the config comes from the manifest"));
            }
            rerun(manifest, cli.out.as_deref())
        }
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("CHRONOFLOW_LOG", "warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError::schema(e.render().to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(m) => {
            println!("{}", serde_json::to_string(&m).expect("serialisable"));
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
