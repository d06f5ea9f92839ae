//! `slowmix`: build a translation vector and ceiling, verify the construction,
//! simulate the flow and probe its correlations.

mod artifacts;
mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Context, Outcome};
use config::RunConfig;
use exit::Failure;

#[derive(Parser)]
#[command(name = "slowmix", version, about = "Special flows over torus translations: construction and verification")]
struct Cli {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: slowmix-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Bits of the rounded rotation numbers.
    #[arg(long, global = true)]
    precision: Option<u64>,
    /// Extra key=value override, applied last; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the rotation vector and its convergent tables.
    GenVector,
    /// Assemble the ceiling from a vector file and check its per-level properties.
    BuildCeiling {
        /// Vector file (default: <out>/vector.txt).
        #[arg(long)]
        vector: Option<PathBuf>,
    },
    /// Run the checks listed in `which` against the stored artifacts.
    Verify {
        #[arg(long)]
        vector: Option<PathBuf>,
    },
    /// Advance points with the special flow and the ODE on the three-torus.
    Simulate {
        #[arg(long)]
        vector: Option<PathBuf>,
        /// CSV of x,y,s start points (default: `points` samples from the invariant measure).
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Autocorrelations, smoothed spectra and the rigid-control comparison.
    Spectrum {
        #[arg(long)]
        vector: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GenVector => "gen-vector",
            Command::BuildCeiling { .. } => "build-ceiling",
            Command::Verify { .. } => "verify",
            Command::Simulate { .. } => "simulate",
            Command::Spectrum { .. } => "spectrum",
        }
    }
}

fn overrides(cli: &Cli) -> Result<Vec<(String, String)>, Failure> {
    let mut out = Vec::new();
    for s in &cli.set {
        let (k, v) = s.split_once('=').ok_or_else(|| Failure::usage(format!("--set expects KEY=VALUE, got '{s}'")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(seed) = cli.seed {
        out.push(("seed".into(), seed.to_string()));
    }
    if let Some(bits) = cli.precision {
        out.push(("precision".into(), bits.to_string()));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(Outcome, PathBuf), Failure> {
    let cfg = RunConfig::load(cli.config.as_deref(), std::env::vars(), &overrides(&cli)?).map_err(Failure::usage)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::usage(e.to_string()))?;
    }
    let name = cli.command.name();
    let (vector, points) = match cli.command {
        Command::GenVector => (None, None),
        Command::BuildCeiling { vector } | Command::Verify { vector } | Command::Spectrum { vector } => (vector, None),
        Command::Simulate { vector, points } => (vector, points),
    };
    let ctx = Context { cfg, out: config::out_dir(cli.out.as_deref()), vector, points };
    let meta = artifacts::Metadata::start(name);
    let outcome = match name {
        "gen-vector" => commands::gen_vector(&ctx),
        "build-ceiling" => commands::build_ceiling(&ctx),
        "verify" => commands::verify(&ctx),
        "simulate" => commands::simulate(&ctx),
        _ => commands::spectrum(&ctx),
    }?;
    artifacts::write_reports(&ctx.out, name, &ctx.cfg, &outcome.reports, &outcome.digests)?;
    meta.finish(&ctx.out, if outcome.all_pass() { exit::OK } else { exit::VERIFICATION })?;
    Ok((outcome, ctx.out))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    match run(cli) {
        Ok((outcome, out)) => {
            for r in &outcome.reports {
                println!("{:<28} {:<17} margin={}", r.id, r.status.as_str(), slowmix::report::fmt_f64(r.margin));
            }
            println!("artifacts in {}", out.display());
            ExitCode::from(if outcome.all_pass() { exit::OK } else { exit::VERIFICATION })
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
