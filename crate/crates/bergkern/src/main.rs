use bergkern::config::ExperimentConfig;
use bergkern::report::emit_report;
use bergkern::runner::{run_config, RunError};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "bergkern", version, about = "Deterministic experiments on model-weight Bergman kernels, Kohn Laplacians and matrix Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and emit its report.
    Run {
        /// Path to the JSON config ({"kind": ..., "seed": ..., "params": ...}).
        config: PathBuf,
        /// Output directory for report.txt and CSV artifacts.
        #[arg(long, default_value = "bergkern-out")]
        out: PathBuf,
        /// Artifact format: "csv" also writes the per-kind CSV files.
        #[arg(long, default_value = "csv", value_parser = ["csv", "text"])]
        format: String,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("BERGKERN_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            format,
        } => {
            let cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let started = Instant::now();
            let report = match run_config(&cfg) {
                Ok(r) => r,
                Err(RunError::Config(e)) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
                Err(e) => {
                    eprintln!("run error: {e}");
                    return ExitCode::from(1);
                }
            };
            // Wall-clock stays on the log stream so artifacts are
            // byte-identical across reruns.
            eprintln!(
                "bergkern: kind={} seed={} wall_clock={:.3}s",
                cfg.kind,
                cfg.seed,
                started.elapsed().as_secs_f64()
            );
            match emit_report(&report, &out, format == "csv") {
                Ok(paths) => {
                    for p in paths {
                        eprintln!("wrote {}", p.display());
                    }
                }
                Err(e) => {
                    eprintln!("emit error: {e}");
                    return ExitCode::from(1);
                }
            }
            print!("{}", report.text_summary());
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
