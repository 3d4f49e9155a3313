//! Command-line entry point: configs, mode dispatch, sweeps and artifact export.

pub mod artifacts;
pub mod config;
pub mod presets;
pub mod run;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use artifacts::{encode_pgm, grid_pgm, histogram_pgm, write_all, Artifact};
pub use config::{BuiltMap, CircleSpec, ExperimentConfig, MapSpec, Mode, RunParams, SweepAxis, SweepSpec};
pub use run::{iterate_built, run, seeded_target, ErrorRecord, Iterated, Outcome};
pub use sweep::{run_sweep, SweepRecord, SweepResult};

use crate::error::{LabError, Result};

#[derive(Debug, Parser)]
#[command(name = "pwt-lab", version, about = "Experiments with piecewise translation maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the mode named in the config.
    Run(RunArgs),
    /// Sampled validity, rational independence and alpha of a map.
    Validate(RunArgs),
    /// Forward images of the whole domain until stabilization.
    Iterate(RunArgs),
    /// Iterate, then measure the attractor (pieces, frequencies, covering, tiling).
    Attractor(RunArgs),
    /// Weights alpha with sum alpha_i v_i = 0.
    Alpha(RunArgs),
    /// Random compositions of a rotation and a double rotation.
    RandomDr(RunArgs),
    /// Itinerary of double rotations landing the circle in a target arc.
    ArcItinerary(RunArgs),
    /// Stabilization over a grid of translation parameters.
    Sweep(RunArgs),
    /// Images only.
    Render(RunArgs),
    /// Print a shipped preset config.
    Preset {
        /// One of the names listed by `pwt-lab preset --list`.
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file (TOML).
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Use a shipped preset instead of a config file.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "PWT_LAB_THREADS")]
    pub threads: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Cell size `h`.
    #[arg(long)]
    pub grid: Option<f64>,
}

impl RunArgs {
    /// The config with command-line overrides applied.
    pub fn load(&self) -> Result<ExperimentConfig> {
        let text = match (&self.config, &self.preset) {
            (Some(p), _) => std::fs::read_to_string(p).map_err(|e| LabError::Config(format!("{}: {e}", p.display())))?,
            (None, Some(name)) => presets::get(name)
                .ok_or_else(|| LabError::Config(format!("unknown preset '{name}'")))?
                .to_string(),
            (None, None) => return Err(LabError::Config("pass --config <path> or --preset <name>".into())),
        };
        let mut cfg = ExperimentConfig::parse(&text)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.max_iter {
            cfg.run.n_max = n;
        }
        if let Some(h) = self.grid {
            cfg.run.h = h;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        Ok(cfg)
    }
}

fn mode_of(cmd: &Command) -> Option<(Option<Mode>, &RunArgs)> {
    let (m, a) = match cmd {
        Command::Run(a) => return Some((None, a)),
        Command::Validate(a) => (Mode::Validate, a),
        Command::Iterate(a) => (Mode::Iterate, a),
        Command::Attractor(a) => (Mode::Attractor, a),
        Command::Alpha(a) => (Mode::Alpha, a),
        Command::RandomDr(a) => (Mode::RandomDr, a),
        Command::ArcItinerary(a) => (Mode::ArcItinerary, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Render(a) => (Mode::Render, a),
        Command::Preset { .. } => return None,
    };
    Some((Some(m), a))
}

fn execute(mode: Option<Mode>, args: &RunArgs) -> Result<Outcome> {
    let cfg = args.load()?;
    let mode = mode
        .or(cfg.mode)
        .ok_or_else(|| LabError::Config("config has no mode; use a mode subcommand".into()))?;
    cfg.validate(mode)?;
    let outcome = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| LabError::Config(e.to_string()))?
            .install(|| run(&cfg, mode))?,
        None => run(&cfg, mode)?,
    };
    write_all(&args.out, &outcome.artifacts)?;
    Ok(outcome)
}

/// Runs the parsed command line and returns the process exit status.
/// Failures print one JSON error record on stderr and write no artifacts.
pub fn main_with(cli: Cli) -> i32 {
    let Some((mode, args)) = mode_of(&cli.command) else {
        let Command::Preset { name, list } = &cli.command else { unreachable!() };
        if *list || name.is_none() {
            for n in presets::NAMES {
                println!("{n}");
            }
            return 0;
        }
        let name = name.as_deref().unwrap_or_default();
        return match presets::get(name) {
            Some(text) => {
                print!("{text}");
                0
            }
            None => fail(&LabError::Config(format!("unknown preset '{name}'"))),
        };
    };
    match execute(mode, args) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.report).unwrap_or_default());
            0
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &LabError) -> i32 {
    let record = serde_json::json!({ "error": ErrorRecord::from(e) });
    eprintln!("{record}");
    if matches!(e, LabError::Config(_)) {
        2
    } else {
        1
    }
}
