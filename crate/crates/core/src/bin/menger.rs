//! Command-line front end: ingest or generate measures, run curvature and
//! beta analyses, run the comparability experiment, or execute the invariant
//! suite.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use menger::error::MengerError;
use menger::run::{cmd_analyze, cmd_compare, RunConfig};

#[derive(Parser)]
#[command(
    name = "menger",
    version,
    about = "Menger curvature and Jones beta toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (JSON). `check` falls back to built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to the MENGER_THREADS environment variable,
    /// then to one thread per core.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the fully-resolved configuration (all defaults explicit) and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Per-point beta profiles, curvature reports, density profiles, summary.
    Analyze(CommonArgs),
    /// Multiscale beta sums vs curvature under both integrands, with the
    /// per-scale lower-bound table.
    Compare(CommonArgs),
    /// Run the full invariant suite; exit 0 iff every invariant passes.
    Check(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, which) = match &cli.command {
        Command::Analyze(a) => (a, "analyze"),
        Command::Compare(a) => (a, "compare"),
        Command::Check(a) => (a, "check"),
    };
    match run(args, which) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(args: &CommonArgs, which: &str) -> Result<RunConfig, MengerError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            RunConfig::from_json(&text)?
        }
        None if which == "check" || args.print_config => RunConfig::default(),
        None => {
            return Err(MengerError::InvalidParameter(
                "--config is required for this command".into(),
            ))
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(threads) = args.threads {
        config.threads = Some(threads);
    } else if config.threads.is_none() {
        if let Ok(v) = std::env::var("MENGER_THREADS") {
            let parsed = v.parse().map_err(|_| {
                MengerError::InvalidParameter(format!(
                    "MENGER_THREADS is not a thread count: {v:?}"
                ))
            })?;
            config.threads = Some(parsed);
        }
    }
    if let Some(out) = &args.out {
        config.output_dir = Some(out.display().to_string());
    }
    Ok(config)
}

fn run(args: &CommonArgs, which: &str) -> Result<bool, MengerError> {
    let config = load_config(args, which)?;
    if args.print_config {
        println!("{}", config.to_json_pretty());
        return Ok(true);
    }
    let threads = config.threads;
    let body = move || -> Result<bool, MengerError> {
        let out_dir = config.output_dir.clone().map(PathBuf::from);
        let need_out = || {
            out_dir.clone().ok_or_else(|| {
                MengerError::InvalidParameter(
                    "no output directory: pass --out or set output_dir in the config".into(),
                )
            })
        };
        match which {
            "analyze" => {
                let out_dir = need_out()?;
                let summary = cmd_analyze(&config, &out_dir)?;
                println!(
                    "analyzed {} points; total curvature {:.6e}; reports in {}",
                    summary.points,
                    summary.total_curvature.value,
                    out_dir.display()
                );
                Ok(true)
            }
            "compare" => {
                let out_dir = need_out()?;
                let summary = cmd_compare(&config, &out_dir)?;
                for row in &summary.rows {
                    println!(
                        "point {:>5}: beta_hat_sum {:.6e}  curv_k1 {:.6e}  curv_k2 {:.6e}",
                        row.index, row.beta_hat_sum, row.curv_k1, row.curv_k2
                    );
                }
                println!(
                    "ordering {}  per-scale bound {}  multiscale bound {} (constant {:.6e})",
                    verdict(summary.ordering_holds),
                    verdict(summary.per_scale_inequality_holds),
                    verdict(summary.multiscale_inequality_holds),
                    summary.multiscale_constant
                );
                Ok(summary.ordering_holds
                    && summary.per_scale_inequality_holds
                    && summary.multiscale_inequality_holds)
            }
            "check" => {
                let outcomes = menger::checks::run_all(config.seed)?;
                let mut all_ok = true;
                for o in &outcomes {
                    println!("{} {} - {}", verdict(o.passed), o.name, o.detail);
                    all_ok &= o.passed;
                }
                if let Some(dir) = &out_dir {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(
                        dir.join("invariants.json"),
                        serde_json::to_string_pretty(&outcomes)?,
                    )?;
                }
                println!(
                    "{} of {} invariants hold",
                    outcomes.iter().filter(|o| o.passed).count(),
                    outcomes.len()
                );
                Ok(all_ok)
            }
            _ => unreachable!(),
        }
    };

    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| MengerError::InvalidParameter(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
