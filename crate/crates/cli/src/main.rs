use std::fs::{self, File};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;

use clap::{Parser, Subcommand, ValueEnum};
use crowdc_cli::rank::{format_ranking, rank_btl, rank_crowdc};
use crowdc_cli::{emit_plots, parse_config, run_sweep, SweepOptions, SweepStatus};
use crowdc_core::comparisons_csv::read_comparisons;
use crowdc_core::FitConfig;
use log::error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "crowdc", version, about = "Divide-and-conquer paired-comparison ranking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankMethod {
    Btl,
    Crowdc,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation grid described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `master_seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Draw cost and accuracy plots from a results table.
    Plot {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank the items of a `subject_id,a,b,chosen` comparison file.
    Rank {
        #[arg(long)]
        comparisons: PathBuf,
        #[arg(long, value_enum)]
        method: RankMethod,
        #[arg(long)]
        g: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        /// Partition seed for crowdc.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn data_error(msg: impl std::fmt::Display) -> ExitCode {
    error!("{msg}");
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_DATA)
}

fn sweep(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>, jobs: usize) -> ExitCode {
    let text = match fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => return data_error(format!("{}: {e}", config.display())),
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return data_error(e),
    };
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    let out_dir = out.unwrap_or_else(|| config.output_directory.clone());
    let options = SweepOptions { jobs, ..SweepOptions::default() };
    let cancel = options.cancel.clone();
    if let Err(e) = ctrlc::set_handler(move || cancel.store(true, Ordering::SeqCst)) {
        log::warn!("no interrupt handler: {e}");
    }
    match run_sweep(&config, &out_dir, &options) {
        Ok(outcome) => {
            let m = &outcome.manifest;
            println!(
                "{} records ({} of {} units, {} cells skipped) -> {}",
                m.records,
                m.units_completed,
                m.units_planned,
                m.skipped.len(),
                outcome.results_path.display()
            );
            match m.status {
                SweepStatus::Complete => ExitCode::SUCCESS,
                SweepStatus::Partial => {
                    eprintln!("sweep incomplete; see manifest.json");
                    ExitCode::from(EXIT_PARTIAL)
                }
            }
        }
        Err(e) => data_error(e),
    }
}

fn rank(comparisons: PathBuf, method: RankMethod, g: Option<usize>, p: Option<usize>, seed: u64) -> ExitCode {
    let file = match File::open(&comparisons) {
        Ok(f) => f,
        Err(e) => return data_error(format!("{}: {e}", comparisons.display())),
    };
    let data = match read_comparisons(file) {
        Ok(d) => d,
        Err(e) => return data_error(e),
    };
    let fit = FitConfig::default();
    let scores = match method {
        RankMethod::Btl => rank_btl(&data, &fit),
        RankMethod::Crowdc => {
            let (Some(g), Some(p)) = (g, p) else {
                eprintln!("error: --method crowdc needs --g and --p");
                return ExitCode::from(EXIT_USAGE);
            };
            rank_crowdc(&data, g, p, seed, &fit)
        }
    };
    match scores {
        Ok(s) => {
            print!("{}", format_ranking(&s));
            ExitCode::SUCCESS
        }
        Err(e) => data_error(e),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Sweep { config, out, seed, jobs } => sweep(config, out, seed, jobs),
        Command::Plot { results, out } => match emit_plots(&results, &out) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => data_error(e),
        },
        Command::Rank {
            comparisons,
            method,
            g,
            p,
            seed,
        } => rank(comparisons, method, g, p, seed),
    }
}
