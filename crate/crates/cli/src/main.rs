use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mclaw_core::cli::{convergence_study, exit_code, parse_config, run_scenario, scenarios, RunConfig, RunOutcome};
use mclaw_core::Error;

/// Finite-volume solver for scalar conservation laws on closed, possibly
/// time-dependent Riemannian manifolds, with a-priori bound auditing.
#[derive(Parser)]
#[command(name = "mclaw", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file (or a catalog scenario by name) and evaluate its checks.
    Run {
        config: String,
        /// Output directory (default: out/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// L¹ errors and observed orders over several resolutions.
    Converge {
        config: String,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        resolutions: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    ListScenarios,
    /// Run every catalog scenario with its checks.
    CheckAll {
        /// Parent directory for the per-scenario outputs.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(source: &str) -> Result<RunConfig, Error> {
    let path = Path::new(source);
    if path.exists() {
        return Ok(parse_config(&fs::read_to_string(path)?)?);
    }
    scenarios::scenario(source).ok_or_else(|| {
        Error::Usage(format!("`{source}` is neither a readable file nor a catalog scenario; see `mclaw list-scenarios`"))
    })
}

fn print_outcome(o: &RunOutcome, dir: &Path) {
    for (name, c) in &o.report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("  {verdict} {name:<28} measured {:.6e}  bound {:.6e}  tol {:.1e}", c.measured, c.bound, c.tolerance);
    }
    println!(
        "{} {}: {} steps, dt in [{:.3e}, {:.3e}], artifacts in {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.config.name,
        o.trajectory.steps,
        o.trajectory.dt_min,
        o.trajectory.dt_max,
        dir.display()
    );
}

fn run(args: Args) -> Result<i32, Error> {
    match args.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| Path::new("out").join(&cfg.name));
            let o = run_scenario(&cfg, &dir)?;
            print_outcome(&o, &dir);
            if !o.pass {
                eprintln!("failed checks: {}", o.failed_checks().join(", "));
            }
            Ok(if o.pass { 0 } else { 1 })
        }
        Command::Converge { config, resolutions, out } => {
            let cfg = load(&config)?;
            let table = convergence_study(&cfg, &resolutions)?;
            let csv = table.to_csv();
            print!("{csv}");
            let dir = out.unwrap_or_else(|| Path::new("out").join(&cfg.name));
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("convergence.csv"), csv)?;
            Ok(0)
        }
        Command::ListScenarios => {
            for (name, summary) in scenarios::summaries() {
                println!("{name:<32} {summary}");
            }
            Ok(0)
        }
        Command::CheckAll { out } => {
            let mut worst = 0;
            for name in scenarios::names() {
                let cfg = scenarios::scenario(name).expect("catalog entry");
                let dir = out.join(name);
                match run_scenario(&cfg, &dir) {
                    Ok(o) => {
                        print_outcome(&o, &dir);
                        if !o.pass {
                            worst = worst.max(1);
                        }
                    }
                    Err(e) => {
                        println!("FAIL {name}: {e}");
                        worst = worst.max(exit_code(&e));
                    }
                }
            }
            Ok(worst)
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("MCLAW_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Usage(format!("MCLAW_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Usage(format!("cannot configure {n} worker threads: {e}")))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match configure_threads().and_then(|()| run(args)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
