mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conelab::sweep::{BandSelection, SectorSelection};

use crate::config::{Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "conelab", version, about = "Numerical experiments on the helix averaging operator")]
struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $CONELAB_OUT, else ./results).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Comma-separated λ list for the command's sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long, global = true, value_enum)]
    bands: Option<Bands>,
    #[arg(long, global = true, value_enum)]
    sectors: Option<Sectors>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Bands {
    Central,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sectors {
    Representative,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the region labels of one frequency.
    Regions {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        xi: Vec<f64>,
    },
    /// |T̂| along rays, decay fits and the stationary-phase comparison.
    Decay {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        direction: Option<Vec<f64>>,
        #[arg(long)]
        rmin: Option<f64>,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Partition audit JSON and the reconstruction checks.
    Pieces,
    /// Kernel L¹ norms of the swept pieces.
    Kernel,
    /// Piece norms, S_λ L⁴ lower bounds and the regional L⁴ bounds.
    Norms,
    /// Córdoba and Cauchy–Schwarz square-function experiments.
    Sqfn,
    /// Square-function gain across δ and the τ estimate.
    Tau,
    /// Sobolev gains of the dyadic pieces of T.
    Sobolev,
    /// Every experiment except `regions` and `kernel` (covered by `norms`).
    All,
}

fn xyz(v: &[f64], flag: &str) -> anyhow::Result<[f64; 3]> {
    match v {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => anyhow::bail!("--{flag} needs three comma-separated numbers, got {}", v.len()),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<conelab::Error>()) {
        Some(err) if err.is_numeric() => 2,
        _ => 1,
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let name = match &cli.command {
        Command::Regions { xi } => {
            println!("{}", commands::regions(xyz(xi, "xi")?)?);
            return Ok(());
        }
        Command::Decay { .. } => "decay",
        Command::Pieces => "pieces",
        Command::Kernel => "kernel",
        Command::Norms => "norms",
        Command::Sqfn => "sqfn",
        Command::Tau => "tau",
        Command::Sobolev => "sobolev",
        Command::All => "all",
    };
    let env_out = std::env::var_os("CONELAB_OUT").map(PathBuf::from);
    let mut cfg = RunConfig::load(cli.config.as_deref(), env_out)?;
    let o = Overrides {
        out: cli.out,
        seed: cli.seed,
        trials: cli.trials,
        tol: cli.tol,
        lambdas: cli.lambdas,
        bands: cli.bands.map(|b| match b {
            Bands::Central => BandSelection::Central,
            Bands::All => BandSelection::All,
        }),
        sectors: cli.sectors.map(|s| match s {
            Sectors::Representative => SectorSelection::Representative,
            Sectors::All => SectorSelection::All,
        }),
        plan: None,
    };
    cfg.apply(name, &o);
    if let Command::Decay { direction, rmin, rmax, points } = &cli.command {
        if let Some(d) = direction {
            cfg.decay.directions = vec![xyz(d, "direction")?];
        }
        cfg.decay.rmin = rmin.unwrap_or(cfg.decay.rmin);
        cfg.decay.rmax = rmax.unwrap_or(cfg.decay.rmax);
        cfg.decay.points = points.unwrap_or(cfg.decay.points);
    }
    cfg.validate()?;
    commands::ensure_dir(&cfg.out)?;
    let out = commands::run(&cfg)?;
    commands::write_summary(&cfg, &out)?;
    for line in commands::summary_lines(&out) {
        println!("{line}");
    }
    Ok(())
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
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
