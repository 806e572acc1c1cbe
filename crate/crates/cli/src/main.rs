use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tlsph_core::cases::{self, check, run_case, RunOptions, RunOutcome, CASES};
use tlsph_core::io::{parse_config, write_frame, write_measurements, write_probe, RunConfig};
use tlsph_core::SimError;

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

#[derive(Parser)]
#[command(name = "tlsph", version, about = "Total-Lagrangian SPH solid dynamics benchmarks")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the case described by a config file.
    Run { config: PathBuf },
    /// List the available cases, their parameters and reference values.
    List,
    /// Run a case and compare its measurements with the reference values.
    Check { config: PathBuf },
}

fn load(path: &Path) -> Result<RunConfig, (u8, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| (EXIT_CONFIG, format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| (EXIT_CONFIG, format!("{}: {e}", path.display())))
}

fn failure(err: SimError) -> (u8, String) {
    let code = match err {
        ref e if e.is_numerical() => EXIT_NUMERICAL,
        SimError::Config { .. } | SimError::Parameter { .. } | SimError::InvalidInput(_) => EXIT_CONFIG,
        _ => EXIT_USAGE,
    };
    (code, err.to_string())
}

fn execute(config: &RunConfig) -> Result<RunOutcome, (u8, String)> {
    let case = config.definition().map_err(failure)?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| (EXIT_CONFIG, format!("{}: {e}", dir.display())))?;
    let options = RunOptions {
        probe_interval: config.probe_interval,
        snapshot_interval: config.snapshot_interval,
        end_time: None,
    };
    let mut index = 0;
    let format = config.snapshot_format;
    let outcome = run_case(&case, &options, &mut |frame| {
        write_frame(dir, index, frame, format)?;
        index += 1;
        Ok(())
    })
    .map_err(failure)?;
    write_probe(&outcome.series, &dir.join("probes.csv")).map_err(failure)?;
    write_measurements(&outcome.measurements, &dir.join("measurements.csv")).map_err(failure)?;
    println!(
        "{}: {} steps, t = {:.6e} s",
        case.name, outcome.steps, outcome.final_time
    );
    for m in &outcome.measurements {
        println!("  {} = {:.6e} {}", m.quantity, m.value, m.unit);
    }
    Ok(outcome)
}

fn list() {
    for info in CASES {
        println!("{}: {}", info.name, info.summary);
        let defaults: Vec<String> = info.parameters.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        println!("  parameters: {}", defaults.join(", "));
        if let Ok(case) = info.build(&cases::Parameters::new()) {
            for r in &case.references {
                println!(
                    "  reference {} = {:.6e} in [{:.6e}, {:.6e}] ({}; {})",
                    r.quantity, r.value, r.lower, r.upper, r.provenance, r.note
                );
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), (u8, String)> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| (EXIT_USAGE, e.to_string()))?;
    }
    match cli.command {
        Command::List => {
            list();
            Ok(())
        }
        Command::Run { config } => execute(&load(&config)?).map(|_| ()),
        Command::Check { config } => {
            let config = load(&config)?;
            let outcome = execute(&config)?;
            let case = config.definition().map_err(failure)?;
            let verdicts = check(&case, &outcome);
            if verdicts.is_empty() {
                println!("no reference values for this configuration");
            }
            let mut passed = true;
            for v in &verdicts {
                let measured = v.measured.map_or("missing".to_string(), |m| format!("{m:.6e}"));
                println!(
                    "{} {}: measured {measured}, expected [{:.6e}, {:.6e}] ({})",
                    if v.pass { "PASS" } else { "FAIL" },
                    v.reference.quantity,
                    v.reference.lower,
                    v.reference.upper,
                    v.reference.provenance
                );
                passed &= v.pass;
            }
            if passed {
                Ok(())
            } else {
                Err((EXIT_TOLERANCE, "measurements outside the reference tolerance".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
