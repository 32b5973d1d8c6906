//! Command-line front end. All logic lives in `kdt::cli`; this file only
//! parses arguments and maps errors to exit codes (0 ok, 2 invalid input,
//! 3 validation failure, 4 internal consistency failure).

use clap::{Parser, Subcommand};
use kdt::cli::{
    cmd_bench, cmd_gen, cmd_run, cmd_validate, render_bench_table, BenchArgs, Distribution,
    GenArgs, RunArgs, ValidateArgs,
};
use kdt::error::Error;
use kdt::kinetics::{Mode, Repartition};
use kdt::partition::Routing;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "kdt",
    version,
    about = "Kinetic Delaunay triangulation of moving points"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a point file.
    Gen {
        /// Number of points (at least 3).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// "uniform" or "clustered".
        #[arg(long, default_value = "uniform", value_parser = parse_distribution)]
        distribution: Distribution,
        /// Output point file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate moving points and maintain the triangulation.
    Run {
        /// Input point file.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: u64,
        /// N of the Nth-nearest-neighbor movement bound.
        #[arg(long, default_value_t = 5)]
        n_neighbors: usize,
        /// Maximum points per quad-tree leaf.
        #[arg(long, default_value_t = 32)]
        threshold: usize,
        /// "parallel-kinetic", "serial-kinetic" or "rebuild".
        #[arg(long, default_value = "parallel-kinetic", value_parser = parse_mode)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker count (default: KDT_THREADS or all hardware threads).
        #[arg(long)]
        workers: Option<usize>,
        /// "lazy" or "every-step".
        #[arg(long, default_value = "lazy", value_parser = parse_repartition)]
        repartition: Repartition,
        /// "tree" or "direct".
        #[arg(long, default_value = "tree", value_parser = parse_routing)]
        routing: Routing,
        /// Metrics output (JSON lines; first line is the manifest).
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Dump the triangulation every k steps (0 = never).
        #[arg(long, default_value_t = 0)]
        dump_every: u64,
        /// Directory for dump files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a points file or triangulation dump for the Delaunay property.
    Validate {
        /// Points file or dump file.
        input: PathBuf,
        /// Also compare against the brute-force oracle (≤ 128 points).
        #[arg(long)]
        oracle: bool,
    },
    /// Compare wall times across modes and worker counts.
    Bench {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: u64,
        #[arg(long, default_value_t = 5)]
        n_neighbors: usize,
        #[arg(long, default_value_t = 32)]
        threshold: usize,
        /// Comma-separated list of modes to time.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "rebuild,serial-kinetic,parallel-kinetic",
            value_parser = parse_mode
        )]
        mode: Vec<Mode>,
        /// Comma-separated list of worker counts.
        #[arg(long, value_delimiter = ',')]
        workers: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "lazy", value_parser = parse_repartition)]
        repartition: Repartition,
        #[arg(long, default_value = "tree", value_parser = parse_routing)]
        routing: Routing,
        /// JSON report output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_repartition(s: &str) -> Result<Repartition, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_routing(s: &str) -> Result<Routing, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_distribution(s: &str) -> Result<Distribution, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen {
            n,
            seed,
            distribution,
            out,
        } => {
            let points = cmd_gen(&GenArgs {
                n,
                seed,
                distribution,
                out: out.clone(),
            })?;
            println!("wrote {} points to {}", points.len(), out.display());
            Ok(())
        }
        Command::Run {
            points,
            steps,
            n_neighbors,
            threshold,
            mode,
            seed,
            workers,
            repartition,
            routing,
            metrics,
            dump_every,
            out,
        } => {
            let args = RunArgs {
                points,
                steps,
                n_neighbors,
                threshold,
                mode,
                seed,
                workers,
                repartition,
                routing,
                metrics,
                dump_every,
                out,
                validate_each_step: false,
            };
            let outcome = cmd_run(&args)?;
            println!(
                "{} steps in {:.1} ms ({} vertices, d = {}, {} transfers, {} repartitions)",
                steps,
                outcome.wall_ms,
                outcome.state.tri.vertex_count(),
                outcome.state.d,
                outcome
                    .metrics
                    .iter()
                    .map(|m| m.transfers)
                    .sum::<u64>(),
                outcome.state.repartitions,
            );
            Ok(())
        }
        Command::Validate { input, oracle } => {
            let outcome = cmd_validate(&ValidateArgs { input, oracle })?;
            for s in &outcome.report.structural {
                println!("structural: {s}");
            }
            for (t, v) in &outcome.report.violations {
                println!("violation: vertex {} inside circumcircle of triangle {}", v.0, t.0);
            }
            if let Some(note) = &outcome.oracle_note {
                println!("{note}");
            }
            match outcome.oracle_match {
                Some(true) => println!("oracle: match"),
                Some(false) => println!("oracle: MISMATCH"),
                None => {}
            }
            if outcome.report.ok && outcome.oracle_match != Some(false) {
                println!("valid: {} vertices", outcome.vertex_count);
                Ok(())
            } else if outcome.oracle_match == Some(false) {
                Err(Error::OracleMismatch)
            } else {
                Err(Error::ValidationFailed {
                    violations: outcome.report.violations.len(),
                    structural: outcome.report.structural.len(),
                })
            }
        }
        Command::Bench {
            points,
            steps,
            n_neighbors,
            threshold,
            mode,
            workers,
            seed,
            repartition,
            routing,
            out,
        } => {
            let args = BenchArgs {
                points,
                steps,
                n_neighbors,
                threshold,
                modes: mode,
                workers: workers
                    .unwrap_or_else(|| vec![kdt::runtime::resolve_workers(None)]),
                seed,
                repartition,
                routing,
                reps: 5,
                out,
            };
            let report = cmd_bench(&args)?;
            print!("{}", render_bench_table(&report));
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
