use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eavesprobe::numfmt::format_sig;
use eavesprobe::sweep::{parse_grid, render, OutputFormat};
use eavesprobe::verify::{run_checks, Fault, VerifyOptions};
use eavesprobe::{
    analyze_channel, run_session, run_sweep, Basis, ProbeParams, StrategyVariant, SweepConfig,
    SweepMode,
};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_BAD_ARGS: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "eavesprobe", version, about = "Two-CNOT BB84 eavesdropping probe: sweeps, checks and Monte Carlo sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the information/disturbance tradeoff over a grid of D values.
    Sweep {
        /// Comma list or start:step:stop.
        #[arg(long, default_value = "0:0.05:0.5")]
        grid: String,
        /// sym (D_xy = D_uv) or full (every pair).
        #[arg(long, default_value = "sym")]
        mode: String,
        /// two, immediate or third.
        #[arg(long, default_value = "two")]
        variant: String,
        /// Monte Carlo rounds per point, 0 for analytic only.
        #[arg(long, default_value_t = 0)]
        rounds: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// csv, json or svg.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every self-check and print PASS/FAIL per check.
    Verify {
        /// Intervals per axis of the parameter grid.
        #[arg(long, default_value_t = 10)]
        grid_density: usize,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Exact error rates and information for one probe setting.
    Analyze {
        #[arg(long)]
        d_xy: f64,
        #[arg(long)]
        d_uv: f64,
    },
    /// One Monte Carlo session.
    Session {
        #[arg(long)]
        d_xy: f64,
        #[arg(long)]
        d_uv: f64,
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
        #[arg(long, default_value = "two")]
        variant: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

enum Failure {
    BadArgs(String),
    Io(String),
    Verify,
}

impl From<eavesprobe::Error> for Failure {
    fn from(e: eavesprobe::Error) -> Self {
        Failure::BadArgs(e.to_string())
    }
}

fn bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

fn cmd_sweep(
    grid: &str,
    mode: &str,
    variant: &str,
    rounds: u64,
    seed: u64,
    format: &str,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let config = SweepConfig {
        d_grid: parse_grid(grid)?,
        mode: mode.parse::<SweepMode>()?,
        variant: variant.parse::<StrategyVariant>()?,
        n_rounds: rounds,
        seed,
        format: format.parse::<OutputFormat>()?,
    };
    config.validate()?;
    let rows = run_sweep(&config)?;
    let text = render(&rows, config.format)?;
    match out {
        Some(path) => {
            fs::write(&path, text)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string()))?,
    }
    Ok(())
}

fn cmd_verify(grid_density: usize, inject_fault: bool) -> Result<(), Failure> {
    if grid_density == 0 {
        return Err(Failure::BadArgs("--grid-density must be at least 1".into()));
    }
    let options = VerifyOptions {
        grid_density,
        fault: inject_fault.then_some(Fault::ReversedGates),
    };
    let results = run_checks(&options)?;
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        println!("{failed} of {} checks failed", results.len());
        Err(Failure::Verify)
    }
}

fn cmd_analyze(d_xy: f64, d_uv: f64) -> Result<(), Failure> {
    let params = ProbeParams::new(d_xy, d_uv)?;
    println!(
        "D_xy = {}  D_uv = {}  delta_xy = {}  delta_uv = {}",
        format_sig(params.d_xy()),
        format_sig(params.d_uv()),
        format_sig(params.delta_xy()),
        format_sig(params.delta_uv())
    );
    for basis in Basis::ALL {
        let a = analyze_channel(&params, basis);
        println!(
            "{basis}: error {}  MI {} nats ({} bits)  bound {} nats ({} bits)",
            format_sig(a.error_rate),
            format_sig(a.mutual_information_nats),
            format_sig(bits(a.mutual_information_nats)),
            format_sig(a.bound_nats),
            format_sig(bits(a.bound_nats))
        );
    }
    Ok(())
}

fn cmd_session(d_xy: f64, d_uv: f64, rounds: u64, variant: &str, seed: u64) -> Result<(), Failure> {
    let params = ProbeParams::new(d_xy, d_uv)?;
    let variant = variant.parse::<StrategyVariant>()?;
    let stats = run_session(rounds, &params, variant, seed)?;
    println!(
        "{} rounds, variant {variant}, seed {seed}, sifting rate {}",
        stats.n_rounds,
        format_sig(stats.sifting_rate())
    );
    for basis in Basis::ALL {
        let analytic = analyze_channel(&params, basis);
        let err = stats.empirical_error_rate(basis).unwrap_or(f64::NAN);
        let mi = stats.empirical_mi(basis).unwrap_or(f64::NAN);
        println!(
            "{basis}: sifted {}  error {} (analytic {})  MI {} nats / {} bits (analytic {} nats)",
            stats.sifted_count(basis),
            format_sig(err),
            format_sig(analytic.error_rate),
            format_sig(mi),
            format_sig(bits(mi)),
            format_sig(analytic.mutual_information_nats)
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep {
            grid,
            mode,
            variant,
            rounds,
            seed,
            format,
            out,
        } => cmd_sweep(&grid, &mode, &variant, rounds, seed, &format, out),
        Command::Verify {
            grid_density,
            inject_fault,
        } => cmd_verify(grid_density, inject_fault),
        Command::Analyze { d_xy, d_uv } => cmd_analyze(d_xy, d_uv),
        Command::Session {
            d_xy,
            d_uv,
            rounds,
            variant,
            seed,
        } => cmd_session(d_xy, d_uv, rounds, &variant, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::BadArgs(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_BAD_ARGS)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY_FAILED),
    }
}
