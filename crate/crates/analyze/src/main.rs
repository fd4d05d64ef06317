use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use framing_core::analysis::{
    allais_demo, report, simulate, AgentPolicy, AnalysisError, ReportFormat,
};
use framing_core::bank::validate_bank;
use framing_core::store::{
    read_store, write_collection_export, JsonlStore, ResponseStore, StoreError, VersionFilter,
};
use framing_core::Version;

#[derive(Parser)]
#[command(
    name = "analyze",
    version,
    about = "Analyze framing-game response records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-question framing tests, reflection summary and demographics.
    Report {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
    },
    /// Write a seeded synthetic cohort to a store file.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long = "p-pos")]
        p_pos: f64,
        #[arg(long = "p-neg")]
        p_neg: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the Allais lotteries and the verdict for each choice pattern.
    Allais,
    /// Check the question bank's expected values and print its checksum.
    ValidateBank,
    /// Write answers_v1.jsonl and answers_v2.jsonl in the per-version document shape.
    Export {
        #[arg(long)]
        store: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io(_) | StoreError::Locked(_) | StoreError::Unavailable(_) => {
                Failure::Io(e.to_string())
            }
            StoreError::Invalid(_) | StoreError::Corrupt { .. } => {
                Failure::Validation(e.to_string())
            }
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Report { store, format } => {
            let v1 = read_store(&store, VersionFilter::Only(Version::V1))?;
            let v2 = read_store(&store, VersionFilter::Only(Version::V2))?;
            print!("{}", report(&v1, &v2, format)?);
        }
        Command::Simulate {
            n,
            p_pos,
            p_neg,
            seed,
            out,
        } => {
            let policy = AgentPolicy::new(p_pos, p_neg, seed)?;
            let (v1, v2) = simulate(n, &policy)?;
            let mut store = JsonlStore::open(&out)?;
            for r in v1.iter().chain(&v2) {
                store.append(r)?;
            }
            eprintln!("wrote {} records to {}", store.len(), out.display());
        }
        Command::Allais => print!("{}", allais_demo()),
        Command::ValidateBank => {
            let checks = validate_bank();
            let mut ok = true;
            for c in &checks {
                let verdict = match c.ev_equal {
                    Some(true) => "equal expected values",
                    Some(false) => {
                        ok = false;
                        "UNEQUAL expected values"
                    }
                    None => "not quantified",
                };
                println!("Q{}: {verdict}", c.id);
            }
            println!("checksum: {}", framing_core::bank::bank().checksum());
            if !ok {
                return Err(Failure::Validation(
                    "bank has unequal expected values".into(),
                ));
            }
        }
        Command::Export { store, out_dir } => {
            let records = read_store(&store, VersionFilter::All)?;
            let [v1, v2] = write_collection_export(&out_dir, &records)
                .map_err(|e| Failure::Io(e.to_string()))?;
            eprintln!("wrote {} and {}", v1.display(), v2.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
