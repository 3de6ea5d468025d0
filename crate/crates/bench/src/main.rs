use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use orbitfilter::scenario::{generate_truth, write_state_file, ScenarioConfig};
use orbitfilter::stats::hz_test;
use orbitfilter_bench::{run_benchmark, write_outputs, BenchError, RunConfig, RMSE_FILE};

#[derive(Parser)]
#[command(name = "orbitfilter", version, about = "Orbit-determination filter benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Geo,
    Gso,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured scenario × filter and write CSV reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Overrides the configured base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate one synthetic scenario and write it as a state file.
    GenScenario {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Slot longitude (GEO) or equator-crossing longitude (GSO), degrees east.
        #[arg(long)]
        slot: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3600.0)]
        duration: f64,
    },
    /// Henze-Zirkler normality test on a residual CSV; every column except
    /// `epoch_s` is a variable.
    Hz {
        #[arg(long)]
        input: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run { config, jobs, seed, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let report = run_benchmark(&cfg, jobs)?;
            let written = write_outputs(&report, &cfg, &dir)?;
            log::info!("wrote {} files to {}", written.len(), dir.display());
            println!("{}", dir.join(RMSE_FILE).display());
            for row in report.rmse_rows() {
                println!("{:<16} {:<5} {:>14.6}", row.scenario, row.filter, row.radial_rmse_m);
            }
            Ok(())
        }
        Command::GenScenario { kind, slot, out, seed, duration } => {
            let base = match kind {
                Kind::Geo => ScenarioConfig::geo(slot),
                Kind::Gso => ScenarioConfig::gso(slot),
            };
            let cfg = ScenarioConfig {
                seed,
                duration_s: duration,
                ..base
            };
            cfg.validate().map_err(|e| BenchError::Config(e.to_string()))?;
            let data = generate_truth(&cfg).map_err(|e| BenchError::Scenario {
                scenario: cfg.id(),
                message: e.to_string(),
            })?;
            write_state_file(&out, &data).map_err(|e| BenchError::Runtime(e.to_string()))?;
            println!("{} epochs of {} written to {}", data.len(), cfg.id(), out.display());
            Ok(())
        }
        Command::Hz { input } => {
            let samples = orbitfilter_bench::output::read_numeric_csv(&input)?;
            let r = hz_test(&samples).map_err(|e| BenchError::Runtime(e.to_string()))?;
            println!("samples      {}", r.sample_size);
            println!("dimension    {}", r.dimension);
            println!("beta         {:.6}", r.beta);
            println!("statistic    {:.6}", r.statistic);
            println!("p_value      {:.6e}", r.p_value);
            if r.singular_covariance {
                println!("note         sample covariance is singular");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("ORBITFILTER_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
