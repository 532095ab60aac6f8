//! Batch recipes for regularized inversion: λ sweeps, impedance tomography
//! and condensate fits. Each command reads a JSON config, writes CSV/JSON
//! into the output directory and is deterministic for a fixed seed.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use commands::Context;
use config::*;
use illposed::condensates::Channel;
use illposed::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "illposed", version, about = "Regularized inversion recipes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config; defaults are used for absent fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ChannelArg {
    #[value(name = "V-A")]
    VMinusA,
    #[value(name = "V")]
    V,
    #[value(name = "A")]
    A,
    #[value(name = "V+A")]
    VPlusA,
}

impl From<ChannelArg> for Channel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::VMinusA => Channel::VMinusA,
            ChannelArg::V => Channel::V,
            ChannelArg::A => Channel::A,
            ChannelArg::VPlusA => Channel::VPlusA,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tikhonov λ sweep with the four parameter choice rules.
    RegSweep(#[command(flatten)] Common),
    /// Finite element simulation of electrode data.
    EitForward(#[command(flatten)] Common),
    /// Single-measurement or linearized conductivity reconstruction.
    EitRecon(#[command(flatten)] Common),
    /// χ²_L scan over one or two condensates.
    CondFit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        channel: Option<ChannelArg>,
    },
    /// Pseudo-data for the condensate fits.
    CondSynth {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        channel: Option<ChannelArg>,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Run(Error::Parameter(_)) => 1,
            Failure::Run(e) if e.is_numerical() => 3,
            Failure::Run(_) => 2,
        }
    }
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn prepare(common: &Common) -> Result<Context, Failure> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be ≥ 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    std::fs::create_dir_all(&common.out).map_err(|source| Error::Io {
        path: common.out.display().to_string(),
        source,
    })?;
    let base = common
        .config
        .as_deref()
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_default();
    Ok(Context {
        base,
        out: common.out.clone(),
    })
}

/// Record the effective config next to the outputs.
fn save_config<T: Serialize>(ctx: &Context, cfg: &T) -> Result<(), Failure> {
    Ok(illposed::io::write_json(&ctx.out.join("config.json"), cfg)?)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::RegSweep(common) => {
            let ctx = prepare(&common)?;
            let mut cfg: RegSweepConfig = load(common.config.as_deref())?;
            cfg.seed = common.seed.unwrap_or(cfg.seed);
            save_config(&ctx, &cfg)?;
            commands::reg_sweep(&cfg, &ctx)?;
        }
        Command::EitForward(common) => {
            let ctx = prepare(&common)?;
            let mut cfg: EitForwardConfig = load(common.config.as_deref())?;
            cfg.seed = common.seed.unwrap_or(cfg.seed);
            save_config(&ctx, &cfg)?;
            commands::eit_forward(&cfg, &ctx)?;
        }
        Command::EitRecon(common) => {
            let ctx = prepare(&common)?;
            let Some(path) = common.config.as_deref() else {
                return Err(Failure::Usage(
                    "eit-recon needs --config naming the dataset".into(),
                ));
            };
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let mut cfg: EitReconConfig = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            cfg.seed = common.seed.unwrap_or(cfg.seed);
            save_config(&ctx, &cfg)?;
            commands::eit_recon(&cfg, &ctx)?;
        }
        Command::CondFit { common, channel } => {
            let ctx = prepare(&common)?;
            let mut cfg: CondFitConfig = load(common.config.as_deref())?;
            if let Some(c) = channel {
                cfg.model.channel = c.into();
            }
            if let (Some(seed), SpectralSource::Synth(spec)) = (common.seed, &mut cfg.data) {
                spec.seed = seed;
            }
            save_config(&ctx, &cfg)?;
            commands::cond_fit(&cfg, &ctx)?;
        }
        Command::CondSynth { common, channel } => {
            let ctx = prepare(&common)?;
            let mut cfg: CondSynthConfig = load(common.config.as_deref())?;
            if let Some(c) = channel {
                cfg.model.channel = c.into();
            }
            cfg.synth.seed = common.seed.unwrap_or(cfg.synth.seed);
            save_config(&ctx, &cfg)?;
            commands::cond_synth(&cfg, &ctx)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.exit_code();
            match f {
                Failure::Usage(msg) => eprintln!("usage error: {msg}"),
                Failure::Run(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code)
        }
    }
}
