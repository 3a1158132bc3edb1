use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use directwf_cli::commands::{self, CommandOutput};
use directwf_cli::config::{Format, MeterModeSpec, Method, NoiseSpec, RunConfig, StateSpec};
use directwf_cli::CliError;

#[derive(Debug, Parser)]
#[command(name = "directwf", version, about = "Direct measurement of bipartite wavefunctions via modular values")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct the amplitude matrix of one state.
    Reconstruct(Common),
    /// Sweep θ over the phase-Bell family and report every estimator.
    SweepTheta {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        theta_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        theta_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Linear-inversion tomography of a two-qubit state.
    Tomography(Common),
    /// Fidelities of direct reconstruction and tomography against the truth.
    Compare(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// State preset: fig3, fig4a, fig4b, fig4c or fig4d.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<f64>,
    /// Postselection preset: uniform or alt_postselection.
    #[arg(long)]
    postselection: Option<String>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, value_enum)]
    meter_mode: Option<MeterModeSpec>,
    /// Entangled pairs per setting; enables binomial shot noise.
    #[arg(long)]
    pairs: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Omit the generation timestamp so repeated runs are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.preset {
            cfg.state = StateSpec::Preset(p.clone());
        }
        if let Some(p) = &self.postselection {
            cfg.postselection = StateSpec::Preset(p.clone());
        }
        if let Some(v) = self.theta {
            cfg.theta = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.g {
            cfg.g = v;
        }
        if let Some(v) = self.method {
            cfg.method = v;
        }
        if let Some(v) = self.meter_mode {
            cfg.meter_mode = v;
        }
        if let Some(pairs) = self.pairs {
            let mut noise = cfg.noise.unwrap_or(NoiseSpec {
                pairs_per_setting: pairs,
                trials: 200,
                seed: 0,
                policy: Default::default(),
            });
            noise.pairs_per_setting = pairs;
            cfg.noise = Some(noise);
        }
        if self.trials.is_some() || self.seed.is_some() {
            let Some(noise) = cfg.noise.as_mut() else {
                return Err(CliError::config(
                    "--trials and --seed need shot noise: pass --pairs or a `noise` block",
                ));
            };
            if let Some(t) = self.trials {
                noise.trials = t;
            }
            if let Some(s) = self.seed {
                noise.seed = s;
            }
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if self.no_timestamp {
            cfg.timestamp = false;
        }
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, output: CommandOutput) -> Result<(), CliError> {
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    match &cfg.output_path {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Io {
                context: format!("creating {}", path.display()),
                source,
            })?;
            let mut out = BufWriter::new(file);
            output.table.write(&mut out, cfg.format, cfg.timestamp)?;
            out.flush().map_err(|source| CliError::Io {
                context: format!("writing {}", path.display()),
                source,
            })
        }
        None => {
            let stdout = io::stdout();
            output.table.write(stdout.lock(), cfg.format, cfg.timestamp)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Reconstruct(common) => {
            let cfg = common.resolve()?;
            emit(&cfg, commands::cmd_reconstruct(&cfg)?)
        }
        Command::SweepTheta {
            common,
            theta_min,
            theta_max,
            steps,
        } => {
            let cfg = common.resolve()?;
            let mut sweep = cfg.sweep.unwrap_or_default();
            sweep.theta_min = theta_min.unwrap_or(sweep.theta_min);
            sweep.theta_max = theta_max.unwrap_or(sweep.theta_max);
            sweep.steps = steps.unwrap_or(sweep.steps);
            emit(&cfg, commands::cmd_sweep_theta(&cfg, sweep)?)
        }
        Command::Tomography(common) => {
            let cfg = common.resolve()?;
            emit(&cfg, commands::cmd_tomography(&cfg)?)
        }
        Command::Compare(common) => {
            let cfg = common.resolve()?;
            emit(&cfg, commands::cmd_compare(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is not a failure of the run.
        Err(CliError::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.report_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
