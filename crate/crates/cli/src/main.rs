use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nlbvp_cli::{run, Command, Overrides};
use nlbvp_core::solver::Method;

#[derive(Parser)]
#[command(name = "nlbvp", version, about = "Nonlocal boundary-value problems for differential inclusions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the problem and write a report and trajectory.
    Solve(Opts),
    /// Check the hypotheses on the map, potential and boundary condition.
    Verify(Opts),
    /// Evaluate the trajectory and solution bounds.
    Bounds(Opts),
    /// Compute the Brouwer degree described in `[degree]`.
    Degree(Opts),
}

#[derive(Args)]
struct Opts {
    /// Problem file (TOML).
    file: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum MethodArg {
    FixedPoint,
    Shooting,
    Continuation,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::FixedPoint => Method::FixedPoint,
            MethodArg::Shooting => Method::Shooting,
            MethodArg::Continuation => Method::Continuation,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Cmd::Solve(o) => (Command::Solve, o),
        Cmd::Verify(o) => (Command::Verify, o),
        Cmd::Bounds(o) => (Command::Bounds, o),
        Cmd::Degree(o) => (Command::Degree, o),
    };
    let overrides = Overrides { seed: opts.seed, grid_n: opts.grid_n, method: opts.method.map(Method::from) };
    let outcome = run(command, &opts.file, overrides, opts.out.as_deref());
    if let Some(doc) = &outcome.document {
        print!("{doc}");
    }
    if let Some(msg) = &outcome.message {
        eprintln!("nlbvp: {msg}");
    }
    ExitCode::from(outcome.exit_code as u8)
}
