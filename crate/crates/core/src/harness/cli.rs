use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::config::ExperimentConfig;
use super::output::{emit_csv, emit_svg};
use super::suite::{run_suite, SuiteProblem, SuiteResults};
use crate::algorithms::{build_schedule, Algorithm};
use crate::error::{Error, Result};
use crate::synth::save_function_csv;

#[derive(Debug, Parser)]
#[command(name = "bpe-delay", version, about = "Kernel bandits with delayed feedback")]
struct Cli {
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single algorithm over all trials of a config.
    Run {
        config: PathBuf,
        /// Algorithm to run; defaults to the first one listed in the config.
        #[arg(long)]
        algorithm: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every algorithm listed in a config on matched seeds.
    Compare {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the config's objective as CSV.
    GenFn {
        /// Config file; the built-in defaults are used when omitted.
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file (default: <out>/function.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the round schedule for a horizon and padding.
    Schedule {
        #[arg(long = "T")]
        horizon: u64,
        #[arg(long, default_value_t = 0.0)]
        u: f64,
    },
}

fn load(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        config = config.with_seed(seed);
    }
    if let Some(out) = out {
        config.out = out;
    }
    Ok(config)
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn report<W: Write>(out: &mut W, results: &SuiteResults, dir: &Path) -> Result<()> {
    writeln!(out, "suite {} (|X|={}, C_k={:.4})", results.name, results.problem.domain.len(), results.problem.c_k)?;
    for c in &results.curves {
        let h = c.half_std.last().copied().unwrap_or(0.0);
        writeln!(
            out,
            "  {:<15} final cumulative regret {:>10.4} ± {:.4} (half std, {} trials)",
            c.algorithm.name(),
            c.final_mean(),
            h,
            c.trials
        )?;
    }
    writeln!(out, "  outputs in {}", dir.display())?;
    Ok(())
}

fn write_outputs(results: &SuiteResults, config: &ExperimentConfig) -> Result<()> {
    emit_csv(results, &config.out)?;
    emit_svg(&results.curves, &config.out.join("regret.svg"), &config.name)
}

fn execute<W: Write>(cli: Cli, out: &mut W) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            algorithm,
            seed,
            out: dir,
        } => {
            let mut config = load(&config, seed, dir)?;
            let algorithm = match algorithm {
                Some(name) => name.parse::<Algorithm>().map_err(|e| Error::Config(e.to_string()))?,
                None => config.algorithms[0],
            };
            config.algorithms = vec![algorithm];
            let results = run_suite(&config)?;
            write_outputs(&results, &config)?;
            if !cli.quiet {
                report(out, &results, &config.out)?;
            }
        }
        Command::Compare {
            config,
            seed,
            out: dir,
        } => {
            let config = load(&config, seed, dir)?;
            let results = run_suite(&config)?;
            write_outputs(&results, &config)?;
            if !cli.quiet {
                report(out, &results, &config.out)?;
            }
        }
        Command::GenFn { config, seed, out: file } => {
            let mut config = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = seed {
                config = config.with_seed(seed);
            }
            let problem = SuiteProblem::prepare(&config)?;
            let path = file.unwrap_or_else(|| config.out.join("function.csv"));
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            save_function_csv(&path, &problem.domain, &problem.truth)?;
            if !cli.quiet {
                writeln!(out, "wrote {} points to {}", problem.domain.len(), path.display())?;
            }
        }
        Command::Schedule { horizon, u } => {
            let s = build_schedule(horizon, u)?;
            writeln!(out, "T={} u={} R={}", s.horizon, s.u, s.rounds())?;
            writeln!(out, "q=[{}]", join(&s.q))?;
            writeln!(out, "t=[{}]", join(&s.t))?;
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 2 for usage or config errors, 1 for
/// anything else.
pub fn cli_main<I, T, W>(argv: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e @ Error::Config(_)) => {
            eprintln!("config error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = cli_main(std::iter::once("bpe-delay").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn schedule_output() {
        let (code, out) = run(&["schedule", "--T", "100", "--u", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains("q=[10,32,57,76]"));
        assert!(out.contains("t=[10,32,57,1]"));
    }

    #[test]
    fn missing_config_exits_2() {
        let (code, _) = run(&["run", "/nonexistent/config.toml"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn bad_schedule_input_exits_1() {
        assert_eq!(run(&["schedule", "--T", "0"]).0, 1);
        assert_eq!(run(&["schedule"]).0, 2);
    }
}
