use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use micromaser::config::parse_complex;
use micromaser::experiment::{execute_all, write_outputs, write_state};
use micromaser::{CliResult, ExperimentConfig};
use micromaser_core::states::build_state;
use micromaser_core::verify::{all_passed, run_suite_at, DEFAULT_CUTOFF};
use micromaser_core::{NonlinearityFn, StateFamily, StateTag};

#[derive(Parser)]
#[command(name = "micromaser", version, about = "Atom-by-atom micromaser pumping with deformed couplings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pumping experiment(s) described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the internal consistency checks.
    Verify {
        /// Perturb the ladder strengths so the duality checks must fail.
        #[arg(long)]
        fault_inject: bool,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: usize,
    },
    /// Write the amplitudes of a state family as CSV.
    States {
        #[arg(long)]
        family: StateTag,
        #[arg(long, default_value = "identity")]
        f: NonlinearityFn,
        /// Complex label, e.g. `0.3` or `0.1-0.2i`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        cutoff: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(config: &Path, out: &Path) -> CliResult<()> {
    let cfg = ExperimentConfig::load(config)?;
    let plans = cfg.plan()?;
    let outputs = execute_all(&plans)?;
    write_outputs(out, &outputs)?;
    for o in &outputs {
        let s = &o.summary;
        match s.final_fidelity {
            Some(fid) => println!("run {}: {} {} g_tau={} K={} fidelity={fid:.12}", s.index, s.kind, s.f, s.g_tau, s.atoms),
            None => println!("run {}: {} {} g_tau={} K={} mean_n={:.12}", s.index, s.kind, s.f, s.g_tau, s.atoms, s.observables.mean_n),
        }
    }
    Ok(())
}

fn verify(fault_inject: bool, cutoff: usize) -> bool {
    let checks = run_suite_at(cutoff, fault_inject);
    let width = checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
    for c in &checks {
        let pad = width - c.name.chars().count();
        println!(
            "{}{}  {:>10.3e}  <= {:<8.1e}  {}",
            c.name,
            " ".repeat(pad),
            c.value,
            c.threshold,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    all_passed(&checks)
}

fn states(family: StateTag, f: NonlinearityFn, z: &str, cutoff: usize, out: &Path) -> CliResult<()> {
    let z = parse_complex(z)?;
    let state = build_state(&StateFamily::new(family, f, z), cutoff)?;
    let support = (0..).map(|m| family.index(m)).take_while(|&n| n <= cutoff);
    write_state(out, &state, support)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Verify { fault_inject, cutoff } => {
            return if verify(*fault_inject, *cutoff) { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
        Command::States { family, f, z, cutoff, out } => states(*family, f.clone(), z, *cutoff, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
