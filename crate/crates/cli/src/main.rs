use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use subarcs_cli::commands::EXIT_USAGE;
use subarcs_cli::{parse_config, run, Command, Overrides};

/// Construct, certify and measure self-similar dendrites.
#[derive(Parser)]
#[command(name = "subarcs", version)]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Solve and validate the system parameters.
    SolveParams,
    /// Build the triangle complex.
    Build,
    /// Certify the dendrite structure.
    Verify,
    /// Decide postcritical finiteness.
    Pcf,
    /// Estimate subarc dimensions and check the arc inclusions.
    ArcDim,
    /// Build the graph-directed system of subarc measures.
    Measures,
    /// Draw the complex as SVG.
    Render,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::SolveParams => Command::SolveParams,
            Cmd::Build => Command::Build,
            Cmd::Verify => Command::Verify,
            Cmd::Pcf => Command::Pcf,
            Cmd::ArcDim => Command::ArcDim,
            Cmd::Measures => Command::Measures,
            Cmd::Render => Command::Render,
        }
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE as u8) } else { ExitCode::SUCCESS };
        }
    };
    let Some(path) = &cli.config else {
        return usage_error("no configuration given; pass --config FILE");
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return usage_error(format!("cannot read {}: {e}", path.display())),
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return usage_error(format!("{}:\n{e}", path.display())),
    };
    let overrides = Overrides {
        depth: cli.depth,
        eps: cli.eps,
        tol: cli.tol,
        seed: cli.seed,
        out: cli.out.clone(),
    };
    if let Err(e) = overrides.apply(&mut cfg) {
        return usage_error(e);
    }
    let outcome = run(&cfg, cli.command.into());
    if outcome.code == 0 {
        println!("{}", outcome.message);
    } else {
        eprintln!("{}", outcome.message);
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    ExitCode::from(outcome.code as u8)
}
