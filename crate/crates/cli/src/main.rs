//! `dopoq`: batch runs of the stochastic DOPO simulator.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 for
//! numerical failures, 3 when every trajectory was rejected by the
//! positivity guard. The worker count follows `RAYON_NUM_THREADS`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dopoq_core::config::{parse_config, preset, RunConfig, PRESET_NAMES};
use dopoq_core::ensemble::{analyze_checkpoints, calibrate, run_ensemble, run_log, write_artifacts};
use dopoq_core::Error;

#[derive(Parser)]
#[command(name = "dopoq", version, about = "Q-representation Langevin simulations of the spatially extended DOPO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Master seed; trajectory streams are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trajectories.
    #[arg(long)]
    trajectories: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(seed) = self.seed {
            cfg.params.seed = seed;
        }
        if let Some(n) = self.trajectories {
            cfg.n_trajectories = n;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble from a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run (or print) the configurations reproducing one figure.
    Preset {
        /// Preset name; see `--list`.
        name: Option<String>,
        /// List preset names and exit.
        #[arg(long)]
        list: bool,
        /// Print the configurations instead of running them.
        #[arg(long)]
        print: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Recompute spectra from checkpoint files.
    Analyze {
        #[arg(required = true)]
        checkpoints: Vec<PathBuf>,
        /// Checkpoint frames per statistics block.
        #[arg(long, default_value_t = 50)]
        block_frames: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vacuum run (pump off, noise on): every mode should read <|beta|^2> = 1.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::AllRejected(_) => 3,
        Error::InvalidParameter { .. }
        | Error::Parse { .. }
        | Error::UnknownPreset(_)
        | Error::UnknownInitKind(_)
        | Error::NoFiniteKInstability(_)
        | Error::Io(_)
        | Error::Checkpoint(_) => 1,
        _ => 2,
    }
}

fn load(path: &PathBuf) -> Result<RunConfig, Error> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn run_and_write(cfg: &RunConfig) -> Result<(), Error> {
    let run = run_ensemble(cfg)?;
    write_artifacts(&run)?;
    eprint!("{}", run_log(&run));
    eprintln!("wrote {}", cfg.output_dir.display());
    Ok(())
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, overrides } => {
            let mut cfg = load(&config)?;
            overrides.apply(&mut cfg);
            cfg.validate()?;
            run_and_write(&cfg)
        }
        Command::Preset {
            name,
            list,
            print,
            overrides,
        } => {
            if list || name.is_none() {
                PRESET_NAMES.iter().for_each(|n| println!("{n}"));
                return Ok(());
            }
            let configs = preset(name.as_deref().unwrap_or_default())?;
            let root = overrides.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            for mut cfg in configs {
                overrides.apply(&mut cfg);
                cfg.output_dir = root.join(cfg.preset.as_deref().unwrap_or("run"));
                cfg.validate()?;
                if print {
                    println!("# {}", cfg.output_dir.display());
                    println!("{}", cfg.to_text());
                } else {
                    run_and_write(&cfg)?;
                }
            }
            Ok(())
        }
        Command::Analyze {
            checkpoints,
            block_frames,
            out,
        } => {
            let report = analyze_checkpoints(&checkpoints, block_frames)?;
            match out {
                Some(dir) => {
                    report.save(&dir, "spectra")?;
                    eprintln!("wrote {}", dir.display());
                }
                None => report.write_csv(std::io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Calibrate { config, overrides } => {
            let mut cfg = match &config {
                Some(path) => load(path)?,
                None => RunConfig {
                    output_dir: PathBuf::from("out/calibrate"),
                    ..RunConfig::default()
                },
            };
            overrides.apply(&mut cfg);
            let cal = calibrate(&cfg)?;
            write_artifacts(&cal.run)?;
            println!("m,q_mean,q_stderr");
            for (m, e) in &cal.modes {
                println!("{m},{},{}", e.value, e.stderr);
            }
            eprintln!("max |<|beta|^2> - 1| = {:.4}", cal.max_deviation());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
