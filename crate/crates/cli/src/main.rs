use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use circsym::harness::{self, ExperimentConfig, ExperimentId, ResultRow};
use circsym::ir::parse_circuit;
use circsym::sts::{circuit_sts_phase, StsDescriptor};

#[derive(Parser)]
#[command(name = "circsym", version, about = "Circuit symmetry verification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep and write its CSV.
    Run {
        #[arg(long)]
        experiment: ExperimentId,
        /// TOML config; the experiment's preset is used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether a descriptor is an STS of a circuit file.
    VerifySts {
        #[arg(long)]
        circuit: PathBuf,
        /// e.g. "S{ X1@0, X1@2 }"
        #[arg(long)]
        sts: String,
    },
    /// Print the bit-flip purity table.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            experiment,
            config,
            seed,
            out,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
                None => ExperimentConfig::preset(experiment),
            };
            if cfg.experiment != experiment {
                bail!("config is for `{}`, not `{experiment}`", cfg.experiment);
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if out.is_some() {
                cfg.output_path = out;
            }
            let rows = harness::run(&cfg)?;
            if cfg.output_path.is_none() {
                print!("{}", harness::csv_string(&rows)?);
            } else {
                eprintln!("{} rows written", rows.len());
            }
        }
        Command::VerifySts { circuit, sts } => {
            let text = std::fs::read_to_string(&circuit).with_context(|| format!("reading {}", circuit.display()))?;
            let c = parse_circuit(&text)?;
            let s: StsDescriptor = sts.parse()?;
            return Ok(match circuit_sts_phase(&c, &s)? {
                Some(phase) => {
                    println!("STS holds (phase {:+.6}{:+.6}i)", phase.re, phase.im);
                    ExitCode::SUCCESS
                }
                None => {
                    println!("not an STS");
                    ExitCode::from(1)
                }
            });
        }
        Command::Table1 { out } => {
            let rows = harness::table1()?;
            print_table(&rows);
            if let Some(path) = out {
                harness::write_csv(&rows, &path)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_table(rows: &[ResultRow]) {
    let cols = [(2, 2.0), (2, 10.0), (10, 2.0), (10, 10.0)];
    println!(
        "{:<14} {:>10} {:>10} {:>10} {:>10}",
        "", "2g r=2", "2g r=10", "10g r=2", "10g r=10"
    );
    let mut methods: Vec<_> = rows.iter().map(|r| r.method).collect();
    methods.dedup();
    for m in methods {
        let cells: Vec<String> = cols
            .iter()
            .map(|&(g, ratio)| {
                rows.iter()
                    .find(|r| r.method == m && r.n_gates == Some(g) && (r.eps2 / r.eps1 - ratio).abs() < 1e-9)
                    .map_or("n/a".to_string(), |r| format!("{:.4}", r.purity))
            })
            .collect();
        println!(
            "{:<14} {:>10} {:>10} {:>10} {:>10}",
            m.label(),
            cells[0],
            cells[1],
            cells[2],
            cells[3]
        );
    }
}
