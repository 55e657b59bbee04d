use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gcsim_core::io::output::{write_probe_csv, write_snapshot_csv};
use gcsim_core::io::report::write_report;
use gcsim_core::{
    check_config, convergence_study, load_config, run_simulation, Config64, Error, RunOptions,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_NON_CONVERGED: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;
const EXIT_OTHER: u8 = 1;

#[derive(Parser)]
#[command(
    name = "gcsim",
    version,
    about = "Catalytic converter channel simulator"
)]
struct Cli {
    /// Model configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for reports and CSV files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Snapshot and probe cadence in time steps.
    #[arg(long, global = true, value_name = "N", default_value_t = 10)]
    probe_every: usize,
    /// Seed for the sampled rate diagnostics.
    #[arg(long, global = true, value_name = "U64", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled model to t_end and check the qualitative properties.
    Simulate,
    /// Validate the configuration and test the rate hypotheses.
    Check,
    /// Grid-refinement study on the Graetz problem.
    Convergence {
        #[arg(long, value_name = "K", default_value_t = 4)]
        levels: usize,
    },
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidConfig(_) | Error::Settings(_) | Error::Arity { .. } => {
            EXIT_CONFIG
        }
        Error::UnboundedDomain { .. } | Error::GridMismatch(_) => EXIT_CONFIG,
        Error::NonConverged { .. } | Error::NonFinite { .. } | Error::Pivot { .. } => {
            EXIT_NON_CONVERGED
        }
        Error::Io { .. } => EXIT_OTHER,
    }
}

fn fail(err: Error) -> u8 {
    eprintln!("error: {err}");
    if let Error::NonConverged { residuals, .. } = &err {
        let list: Vec<String> = residuals.iter().map(|r| format!("{r:e}")).collect();
        eprintln!("residuals: {}", list.join(" "));
    }
    exit_for(&err)
}

fn load(path: Option<&Path>) -> Result<Config64, u8> {
    let Some(path) = path else {
        eprintln!("error: --config <PATH> is required");
        return Err(EXIT_CONFIG);
    };
    load_config(path).map_err(|e| match e {
        Error::Io { .. } => {
            eprintln!("error: FILE_NOT_FOUND {e}");
            EXIT_CONFIG
        }
        e => fail(e),
    })
}

fn simulate(cli: &Cli) -> Result<u8, u8> {
    let cfg = load(cli.config.as_deref())?;
    let options = RunOptions {
        seed: cli.seed,
        probe_every: cli.probe_every.max(1),
        keep_trajectory: cli.out.is_some(),
        ..RunOptions::default()
    };
    let run = run_simulation(&cfg.model, &cfg.coupler, &options).map_err(fail)?;
    let report = &run.report;
    if let Some(dir) = &cli.out {
        let io = |r: gcsim_core::Result<()>| r.map_err(fail);
        std::fs::create_dir_all(dir).map_err(|source| {
            fail(Error::Io {
                path: dir.clone(),
                source,
            })
        })?;
        let names = &report.species;
        for snap in &run.trajectory {
            let path = dir.join(format!("snapshot_{:06}.csv", snap.step));
            io(write_snapshot_csv(
                &snap.fluid,
                &cfg.model.grid,
                names,
                &path,
            ))?;
        }
        io(write_probe_csv(&run.probes, &dir.join("probe.csv")))?;
        io(write_report(report, &dir.join("report.txt")))?;
        let json = dir.join("report.json");
        std::fs::write(&json, report.to_json())
            .map_err(|source| fail(Error::Io { path: json, source }))?;
        log::info!(
            "wrote {} snapshots to {}",
            run.trajectory.len(),
            dir.display()
        );
    }
    print!("{}", report.to_text());
    Ok(if report.checks_pass() {
        0
    } else {
        EXIT_CHECK_FAILED
    })
}

fn check(cli: &Cli) -> Result<u8, u8> {
    let cfg = load(cli.config.as_deref())?;
    let report = check_config(&cfg.model, cli.seed).map_err(fail)?;
    print!("{}", report.to_text());
    Ok(if report.hypotheses_pass() {
        0
    } else {
        EXIT_CHECK_FAILED
    })
}

fn convergence(levels: usize) -> Result<u8, u8> {
    let study = convergence_study(levels).map_err(fail)?;
    print!("{}", study.to_text());
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GC_LOG", "warn"))
        .format_timestamp(None)
        .init();
    ExitCode::from(run(&Cli::parse()))
}

fn run(cli: &Cli) -> u8 {
    let result = match cli.command {
        Command::Simulate => simulate(cli),
        Command::Check => check(cli),
        Command::Convergence { levels } => convergence(levels),
    };
    result.unwrap_or_else(|code| code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> String {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../core/examples/co_oxidation.cfg"
        )
        .to_string()
    }

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("gcsim").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_are_global() {
        let cli = parse(&[
            "simulate",
            "--config",
            "x.cfg",
            "--out",
            "d",
            "--probe-every",
            "5",
            "--seed",
            "9",
        ]);
        assert!(matches!(cli.command, Command::Simulate));
        assert_eq!(cli.config.as_deref(), Some(Path::new("x.cfg")));
        assert_eq!(cli.out.as_deref(), Some(Path::new("d")));
        assert_eq!((cli.probe_every, cli.seed), (5, 9));
        let cli = parse(&["--seed", "4", "convergence", "--levels", "3"]);
        assert!(matches!(cli.command, Command::Convergence { levels: 3 }));
        assert_eq!(cli.seed, 4);
    }

    #[test]
    fn unknown_subcommand_is_rejected() {
        assert!(Cli::try_parse_from(["gcsim", "plot"]).is_err());
    }

    #[test]
    fn config_problems_exit_2() {
        assert_eq!(run(&parse(&["simulate"])), EXIT_CONFIG);
        assert_eq!(
            run(&parse(&["check", "--config", "/nonexistent/gcsim.cfg"])),
            EXIT_CONFIG
        );
        assert_eq!(exit_for(&Error::Settings("x".into())), EXIT_CONFIG);
    }

    #[test]
    fn solver_breakdown_exits_3() {
        let err = Error::NonConverged {
            step: 1,
            last: 1.0,
            residuals: vec![1.0],
        };
        assert_eq!(exit_for(&err), EXIT_NON_CONVERGED);
        assert_eq!(
            exit_for(&Error::NonFinite { species: 0 }),
            EXIT_NON_CONVERGED
        );
    }

    #[test]
    fn check_reports_failed_hypotheses() {
        assert_eq!(
            run(&parse(&["check", "--config", &example()])),
            EXIT_CHECK_FAILED
        );
    }

    #[test]
    fn convergence_needs_three_levels() {
        assert_eq!(run(&parse(&["convergence", "--levels", "2"])), EXIT_CONFIG);
        assert_eq!(run(&parse(&["convergence", "--levels", "3"])), 0);
    }
}
