//! Command-line surface and the resolved run configuration.

use std::path::PathBuf;

use bellscan::optimize::{linear_grid, log_grid};
use bellscan::OptimizeOptions;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "BELLSCAN_SEED";

#[derive(Debug, Parser)]
#[command(name = "bellscan", version, about = "Detection-efficiency thresholds for chained Bell and I3322 inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Threshold sweep for chained inequalities over ratio and noise.
    ChainedSweep {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        m: Vec<usize>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Threshold sweep for I3322 over ratio and noise.
    I3322Sweep {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// For each noise weight, the ratio with the lowest threshold.
    NoiseSweep {
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        m: Vec<usize>,
        /// Ratio grid searched at every noise weight.
        #[arg(long, default_value = "0.001:1:50", value_parser = parse_grid)]
        ratio: GridSpec,
        #[arg(long, default_value = "0:0.25:50", value_parser = parse_grid)]
        q: GridSpec,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Analytic CH optimum (rotation, eigenvalue, state) at given efficiencies.
    Analytic {
        /// Efficiencies, as a list or `min:max:steps` (linear).
        #[arg(long, default_value = "0.7:1:7", value_parser = parse_grid)]
        eta: GridSpec,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Single state and noise weight.
    Point {
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Use I3322 instead of the chained inequality.
        #[arg(long)]
        i3322: bool,
        #[arg(long, default_value_t = 1.0)]
        ratio: f64,
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Ratios, as a list or `min:max:steps` (log spacing).
    #[arg(long, default_value = "0.001:1:50", value_parser = parse_grid)]
    pub ratio: GridSpec,
    /// Noise weights, as a list or `min:max:steps` (linear).
    #[arg(long, default_value = "0", value_parser = parse_grid)]
    pub q: GridSpec,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub gradient_step: f64,
    /// Also optimize setting azimuths.
    #[arg(long)]
    pub azimuth: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; the table goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Grid as typed on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    List(Vec<f64>),
    Range { min: f64, max: f64, steps: usize },
}

impl GridSpec {
    pub fn linear(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Range { min, max, steps } => Ok(linear_grid(*min, *max, *steps)?),
        }
    }

    pub fn log(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Range { min, max, steps } => Ok(log_grid(*min, *max, *steps)?),
        }
    }
}

/// Parses `a,b,c` or `min:max:steps`.
pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts[..] else {
            return Err(format!("expected min:max:steps, got `{s}`"));
        };
        let steps = steps
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("step count `{steps}` is not a positive integer"))?;
        if steps == 0 {
            return Err("step count must be positive".into());
        }
        return Ok(GridSpec::Range {
            min: num(min)?,
            max: num(max)?,
            steps,
        });
    }
    let values = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
    Ok(GridSpec::List(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ChainedSweep,
    I3322Sweep,
    NoiseSweep,
    Analytic,
    Point,
}

/// Fully resolved run: grids expanded, seed override applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub m_list: Vec<usize>,
    /// Point queries only.
    pub i3322: bool,
    pub ratios: Vec<f64>,
    pub q_list: Vec<f64>,
    pub etas: Vec<f64>,
    pub options: OptimizeOptions,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Resolves parsed arguments. `env_seed` is the value of [`SEED_ENV`].
    pub fn from_cli(cli: Cli, env_seed: Option<&str>) -> Result<Self, CliError> {
        let mut cfg = match cli.command {
            CliCommand::ChainedSweep { m, grid, common } => Self::sweep(
                Command::ChainedSweep,
                m,
                grid.ratio.log()?,
                grid.q.linear()?,
                common,
            ),
            CliCommand::I3322Sweep { grid, common } => Self::sweep(
                Command::I3322Sweep,
                vec![3],
                grid.ratio.log()?,
                grid.q.linear()?,
                common,
            ),
            CliCommand::NoiseSweep {
                m,
                ratio,
                q,
                common,
            } => Self::sweep(Command::NoiseSweep, m, ratio.log()?, q.linear()?, common),
            CliCommand::Analytic { eta, output } => RunConfig {
                command: Command::Analytic,
                m_list: vec![2],
                i3322: false,
                ratios: Vec::new(),
                q_list: Vec::new(),
                etas: eta.linear()?,
                options: OptimizeOptions::default(),
                output_path: output.out,
                format: output.format,
            },
            CliCommand::Point {
                m,
                i3322,
                ratio,
                q,
                common,
            } => {
                let m = if i3322 { 3 } else { m };
                RunConfig {
                    i3322,
                    ..Self::sweep(Command::Point, vec![m], vec![ratio], vec![q], common)
                }
            }
        };
        if let Some(raw) = env_seed {
            cfg.options.seed = raw.trim().parse().map_err(|_| {
                CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{raw}`"))
            })?;
        }
        Ok(cfg)
    }

    fn sweep(
        command: Command,
        m_list: Vec<usize>,
        ratios: Vec<f64>,
        q_list: Vec<f64>,
        common: CommonArgs,
    ) -> Self {
        let o = common.optimizer;
        RunConfig {
            command,
            m_list,
            i3322: command == Command::I3322Sweep,
            ratios,
            q_list,
            etas: Vec::new(),
            options: OptimizeOptions {
                restarts: o.restarts,
                gradient_step: o.gradient_step,
                tolerance: o.tolerance,
                max_iterations: o.max_iterations,
                allow_azimuth: o.azimuth,
                seed: o.seed,
            },
            output_path: common.output.out,
            format: common.output.format,
        }
    }
}
