use clap::{Parser, Subcommand, ValueEnum};
use ovlc::analytic::SnrMode;
use ovlc::channel::Regime;
use ovlc::montecarlo::default_workers;
use ovlc::sweep::{emit_report, run_sweep, Format, Scenario, MAX_SAMPLES};
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable overriding the worker-thread count.
const WORKERS_ENV: &str = "OVLC_WORKERS";

#[derive(Parser)]
#[command(name = "ovlc", version, about = "Dual-hop AF outdoor VLC relay: sweeps, Monte Carlo and closed-form comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write the report
    Run {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
        /// Replace the scenario's mode list with a single mode
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// List the turbulence regime presets
    Presets,
    /// Check a scenario file without running it
    Validate { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Min,
    Harmonic,
}

impl From<ModeArg> for SnrMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SnrMode::Exact,
            ModeArg::Min => SnrMode::Min,
            ModeArg::Harmonic => SnrMode::Harmonic,
        }
    }
}

fn workers() -> Result<usize, String> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")),
        },
        Err(_) => Ok(default_workers()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            println!("{:<10} {:>6} {:>6}", "regime", "alpha", "beta");
            for r in Regime::ALL {
                let (a, b) = r.shapes();
                println!("{:<10} {:>6} {:>6}", r.name(), a, b);
            }
            ExitCode::SUCCESS
        }
        Command::Validate { file } => match Scenario::load(&file) {
            Ok(s) => {
                println!(
                    "{}: ok ({} grid points, modes: {})",
                    file.display(),
                    s.points.len(),
                    s.sim.modes.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", file.display());
                ExitCode::from(2)
            }
        },
        Command::Run {
            file,
            out,
            format,
            seed,
            samples,
            mode,
        } => {
            let mut scen = match Scenario::load(&file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return ExitCode::from(2);
                }
            };
            if let Some(seed) = seed {
                scen.sim.master_seed = seed;
            }
            if let Some(n) = samples {
                if n == 0 || n > MAX_SAMPLES {
                    eprintln!("--samples must lie in 1..={MAX_SAMPLES}");
                    return ExitCode::from(2);
                }
                scen.sim.sample_count = n;
            }
            if let Some(m) = mode {
                scen.sim.modes = vec![m.into()];
            }
            let format = match format {
                Some(FormatArg::Csv) => Format::Csv,
                Some(FormatArg::Json) => Format::Json,
                None => scen.report.format,
            };
            let dir = out.unwrap_or_else(|| scen.report.out_dir.clone());
            let workers = match workers() {
                Ok(n) => n,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            let report = match run_sweep(&scen, workers) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::FAILURE;
                }
            };
            match emit_report(&report, &dir, format) {
                Ok(files) => {
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
