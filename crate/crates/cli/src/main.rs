use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netvd::estimator::{EngineMode, SampleStream};
use netvd::vd::{Implementation, ResourceMode};
use netvd_cli::config::{parse_implementations, parse_resource_mode};
use netvd_cli::*;

#[derive(Parser)]
#[command(
    name = "netvd",
    version,
    about = "Virtual distillation across a noisy trapped-ion network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; defaults to `output.path`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// exact, mc or oracle.
        #[arg(long)]
        mode: Option<EngineMode>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Qubit, gate and Bell-pair counts per implementation.
    Resources {
        /// Reads the `[resources]` section; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated, e.g. `CR,BW`.
        #[arg(long = "impl", value_delimiter = ',')]
        implementation: Vec<String>,
        /// `4`, `2-8` or `2,4,6`.
        #[arg(long, value_parser = Counts::parse)]
        n: Option<Counts>,
        #[arg(long = "N", value_parser = Counts::parse)]
        sites: Option<Counts>,
        /// table or as-built.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Check that a topology file can host an implementation.
    Validate {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long = "impl")]
        implementation: Implementation,
        #[arg(long)]
        n: usize,
        #[arg(long = "N", default_value_t = 1)]
        sites: usize,
    },
    /// Fit the spread of resampled batch ratios against 1/√M.
    Scaling {
        /// A sample stream in CSV form.
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        stream: Option<PathBuf>,
        /// Samples the first cell of this configuration in Monte Carlo mode.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated samples per batch; fractions of the stream by default.
        #[arg(long, value_delimiter = ',')]
        points: Vec<usize>,
        /// Resampled batches per point.
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        batches: usize,
        /// Also write the sampled stream here.
        #[arg(long)]
        save_stream: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_timestamp: bool,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            mode,
            jobs,
            no_timestamp,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = cmd_run(&cfg, &Overrides { seed, mode, jobs }, !no_timestamp)?;
            for line in &result.summary {
                eprintln!("{line}");
            }
            emit(&result.csv, out.as_deref().or(cfg.output.path.as_deref()))?;
            if result.failed > 0 {
                return Err(CliError::Runtime(format!(
                    "{} cell(s) failed",
                    result.failed
                )));
            }
            Ok(())
        }
        Command::Resources {
            config,
            implementation,
            n,
            sites,
            mode,
            out,
            no_timestamp,
        } => {
            let section = match &config {
                Some(p) => ExperimentConfig::load(p)?.resources,
                None => None,
            };
            let names = if !implementation.is_empty() {
                implementation
            } else if let Some(list) = section.as_ref().and_then(|s| s.implementation.as_ref()) {
                list.to_vec()
            } else {
                Implementation::ALL
                    .iter()
                    .map(ToString::to_string)
                    .collect()
            };
            let imps = parse_implementations("impl", &names)?;
            let missing = |what: &str| CliError::Validation(format!("`{what}` is required"));
            let ns = n
                .or_else(|| section.as_ref().map(|s| s.n.clone()))
                .ok_or_else(|| missing("n"))?;
            let ws = sites
                .or_else(|| section.as_ref().map(|s| s.sites.clone()))
                .ok_or_else(|| missing("N"))?;
            let mode = match mode.or_else(|| section.as_ref().and_then(|s| s.mode.clone())) {
                Some(m) => parse_resource_mode(&m)?,
                None => ResourceMode::Table,
            };
            let text = cmd_resources(&imps, &ns.to_vec(), &ws.to_vec(), mode, !no_timestamp)?;
            emit(&text, out.as_deref())
        }
        Command::Validate {
            topology,
            implementation,
            n,
            sites,
        } => {
            let text = std::fs::read_to_string(&topology)
                .map_err(|e| CliError::Runtime(format!("reading {}: {e}", topology.display())))?;
            let report = cmd_validate(&text, implementation, n, sites)?;
            print!("{report}");
            Ok(())
        }
        Command::Scaling {
            stream,
            config,
            points,
            batches,
            save_stream,
            seed,
            jobs,
            out,
            no_timestamp,
        } => {
            let samples = match (stream, config) {
                (Some(p), _) => {
                    let file = std::fs::File::open(&p)
                        .map_err(|e| CliError::Runtime(format!("reading {}: {e}", p.display())))?;
                    SampleStream::read_csv(file).map_err(|e| CliError::Validation(e.to_string()))?
                }
                (None, Some(p)) => {
                    let cfg = ExperimentConfig::load(&p)?;
                    sample_stream(
                        &cfg,
                        &Overrides {
                            seed,
                            mode: None,
                            jobs,
                        },
                    )?
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            if let Some(p) = save_stream {
                let mut buf = Vec::new();
                samples
                    .write_csv(&mut buf)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                std::fs::write(&p, buf)
                    .map_err(|e| CliError::Runtime(format!("writing {}: {e}", p.display())))?;
            }
            let points = if points.is_empty() {
                default_points(samples.len())
            } else {
                points
            };
            emit(
                &cmd_scaling(&samples, &points, batches, !no_timestamp)?,
                out.as_deref(),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
