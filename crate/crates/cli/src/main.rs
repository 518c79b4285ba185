use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ctqw_search::experiments::{
    fmt_g17, parse_form, run_scenario, run_sweep, write_sweep_csv, ExperimentError, GRule, GammaRule, GraphSpec,
    Scenario, SweepSpec,
};

const EXIT_PARAMETER: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

/// Continuous-time quantum walk search with linear and nonlinear dynamics.
#[derive(Parser, Debug)]
#[command(name = "ctqw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one scenario and write its trajectory as CSV.
    Run(RunArgs),
    /// Repeat a scenario over several sizes and fit the peak-time exponent.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// linear, cubic, cubicquintic, power:q or loglinear
    #[arg(long, default_value = "linear")]
    nl: String,
    /// Nonlinearity strength: a number, N-1 or sqrtN/logN
    #[arg(long, default_value = "0")]
    g: String,
    /// auto, feedback or a fixed hopping rate
    #[arg(long, default_value = "auto")]
    gamma: String,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Record every this many steps
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// complete:N, paley:q or hypercube:n
    #[arg(long)]
    graph: String,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
    /// Also integrate over every vertex and add comparison columns
    #[arg(long)]
    full_oracle: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Family: complete, paley or hypercube (a size suffix is ignored)
    #[arg(long)]
    graph: String,
    /// Comma-separated size parameters
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<u64>,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
}

fn family(s: &str) -> Result<GraphSpec, ExperimentError> {
    let name = s.split(':').next().unwrap_or(s);
    format!("{name}:0").parse()
}

fn run(args: RunArgs) -> Result<ExitCode, ExperimentError> {
    let c = &args.common;
    let scenario = Scenario {
        t_max: c.tmax,
        dt: c.dt,
        stride: c.stride,
        out: Some(args.out.clone()),
        full_oracle: args.full_oracle,
        ..Scenario::new(args.graph.parse()?, parse_form(&c.nl)?, c.g.parse()?, c.gamma.parse()?)
    };
    let result = run_scenario(&scenario)?;
    println!("{}", result.summary_line());
    if let Some((t, drift)) = result.divergence {
        eprintln!(
            "integration diverged at t = {} (norm drift {}); partial trajectory written, retry with a smaller --dt",
            fmt_g17(t),
            fmt_g17(drift)
        );
        return Ok(ExitCode::from(EXIT_DIVERGED));
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs) -> Result<ExitCode, ExperimentError> {
    let c = &args.common;
    let g: GRule = c.g.parse()?;
    let gamma: GammaRule = c.gamma.parse()?;
    let spec = SweepSpec {
        t_max: c.tmax,
        dt: c.dt,
        stride: c.stride,
        ..SweepSpec::new(family(&args.graph)?, args.sizes, parse_form(&c.nl)?, g, gamma)
    };
    let result = run_sweep(&spec)?;
    write_sweep_csv(BufWriter::new(File::create(&args.out)?), &result)?;
    for row in &result.rows {
        if let Some(e) = &row.error {
            eprintln!("N={}: {e}", row.n);
        }
    }
    match result.exponent {
        Some(e) => println!("t_star exponent = {}", fmt_g17(e)),
        None => println!("t_star exponent = none"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_parameter_error() {
                ExitCode::from(EXIT_PARAMETER)
            } else if matches!(e, ExperimentError::Oracle(ctqw_search::oracle::OracleError::Diverged { .. })) {
                ExitCode::from(EXIT_DIVERGED)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
