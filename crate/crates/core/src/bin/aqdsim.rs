//! Command-line front end for the Monte Carlo experiments.
//!
//! Exit status: 0 when every comparison passes, 2 when one fails, 1 on a
//! configuration or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use aqdsim::harness::{run, Experiment, OutputFormat, SimulationConfig};
use aqdsim::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aqdsim", version, about = "Adaptive quadrature detection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Master seed (required).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1,4,16")]
    snr_grid: Vec<f64>,
    /// Sub-channel model: rayleigh:VAR or bounded:t0,t1,...
    #[arg(long, default_value = "rayleigh:1")]
    model: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads; all cores by default.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectMode {
    Collective,
    Single,
}

#[derive(Subcommand)]
enum Command {
    /// Antipodal pilot detection over l Rayleigh sub-channels (grid is snr_hat).
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        l: Vec<usize>,
    },
    /// Detection after subcarrier spreading with k repetitions.
    Spread {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        l: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<usize>,
        /// Total sub-channels; defaults to l.
        #[arg(long, conflicts_with = "g")]
        n: Option<usize>,
        /// Pilots per frame; sets n = g + l - 1 (single l only).
        #[arg(long)]
        g: Option<usize>,
    },
    /// Collective codeword detection, or single-symbol detection with --mode single.
    Detect {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "collective")]
        mode: DetectMode,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        d: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        codewords: usize,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        l: Vec<usize>,
        /// hom-x, hom-p or het[:c]
        #[arg(long, default_value = "het")]
        measurement: String,
    },
    /// Per-user detection over disjoint output blocks.
    Multiuser {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        rk: Vec<usize>,
    },
    /// Pilot, spreading and limit curves over one SNR grid.
    Fig3 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        l: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        k: Vec<usize>,
    },
}

fn base(experiment: Experiment, c: &Common) -> Result<SimulationConfig, Error> {
    let mut cfg = SimulationConfig::new(experiment, c.snr_grid.clone(), c.trials, 0);
    cfg.seed = c.seed;
    cfg.model = c.model.parse()?;
    cfg.output_format = c.format.parse::<OutputFormat>()?;
    cfg.output_path = c.out.clone();
    cfg.threads = c.threads;
    Ok(cfg)
}

fn build(command: Command) -> Result<SimulationConfig, Error> {
    let cfg = match command {
        Command::Estimate { common, l } => SimulationConfig {
            l_grid: l,
            ..base(Experiment::PilotEstimation, &common)?
        },
        Command::Spread { common, l, k, n, g } => {
            let n = match g {
                Some(g) if l.len() == 1 && g >= 1 => Some(g + l[0] - 1),
                Some(_) => {
                    return Err(Error::Config {
                        path: "g".into(),
                        message: "--g needs exactly one l and g >= 1".into(),
                    })
                }
                None => n,
            };
            SimulationConfig {
                l_grid: l,
                k_grid: k,
                n,
                ..base(Experiment::Spreading, &common)?
            }
        }
        Command::Detect {
            common,
            mode,
            d,
            codewords,
            l,
            measurement,
        } => {
            let experiment = match mode {
                DetectMode::Collective => Experiment::CollectiveDetection,
                DetectMode::Single => Experiment::SingleDetection,
            };
            SimulationConfig {
                d_grid: d,
                n_codewords: codewords,
                l_grid: l,
                measurement: measurement.parse()?,
                ..base(experiment, &common)?
            }
        }
        Command::Multiuser { common, rk } => SimulationConfig {
            rk,
            ..base(Experiment::Multiuser, &common)?
        },
        Command::Fig3 { common, l, k } => SimulationConfig {
            l_grid: l,
            k_grid: k,
            ..base(Experiment::Fig3, &common)?
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: Command) -> Result<bool, Error> {
    let cfg = build(command)?;
    let report = run(&cfg)?;
    let text = match cfg.output_format {
        OutputFormat::Csv => report.to_csv()?,
        OutputFormat::Json => report.to_json(&cfg)? + "\n",
    };
    match &cfg.output_path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    for row in report.failures() {
        eprintln!(
            "FAIL {} snr={} ref={} empirical={} analytic={} z={:.2}",
            row.experiment, row.snr, row.analytic_ref, row.empirical_p, row.analytic_p, row.z_score
        );
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
