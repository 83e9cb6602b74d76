use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use clap::Parser;
use pneumabond_cli::{load_config, render_plots, run_scenario, write_csv, Error, Scenario};
use pneumabond_core::Mode;

/// Run actuator scenarios and write CSV time series and SVG plots.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// Scenario files; several files run concurrently.
    #[arg(required = true, value_name = "CONFIG")]
    configs: Vec<PathBuf>,
    /// CSV output path, overriding `csv_path`.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Plot directory, overriding `plot_dir`.
    #[arg(long, value_name = "DIR")]
    plots: Option<PathBuf>,
    /// Drive mode, overriding `mode`.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn prepare(args: &Args, path: &PathBuf) -> Result<Scenario, Error> {
    let mut scenario = load_config(path)?;
    if let Some(csv) = &args.csv {
        scenario.csv_path = csv.clone();
    }
    if let Some(dir) = &args.plots {
        scenario.plot_dir = Some(dir.clone());
    }
    if let Some(mode) = args.mode {
        scenario.control.mode = mode;
    }
    Ok(scenario)
}

fn execute(scenario: &Scenario) -> Result<usize, Error> {
    let ts = run_scenario(scenario)?;
    write_csv(&ts, &scenario.csv_path)?;
    if let Some(dir) = &scenario.plot_dir {
        render_plots(&ts, dir)?;
    }
    Ok(ts.len())
}

fn main() -> ExitCode {
    let args = Args::parse();

    let mut scenarios = Vec::new();
    let mut failed = false;
    for path in &args.configs {
        match prepare(&args, path) {
            Ok(s) => scenarios.push((path, s)),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                failed = true;
            }
        }
    }
    if failed {
        return ExitCode::FAILURE;
    }

    let mut outputs = HashSet::new();
    for (path, s) in &scenarios {
        let clash = !outputs.insert(s.csv_path.clone())
            || s.plot_dir
                .as_ref()
                .is_some_and(|d| !outputs.insert(d.clone()));
        if clash {
            eprintln!(
                "error: {}: output path already used by another scenario",
                path.display()
            );
            return ExitCode::FAILURE;
        }
    }

    let results: Vec<_> = thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|(path, s)| (path, s, scope.spawn(move || execute(s))))
            .collect();
        handles
            .into_iter()
            .map(|(path, s, h)| (path, s, h.join().expect("scenario thread panicked")))
            .collect()
    });

    let mut status = ExitCode::SUCCESS;
    for (path, s, result) in results {
        match result {
            Ok(rows) => println!(
                "{}: {} mode, {rows} rows -> {}",
                path.display(),
                s.control.mode,
                s.csv_path.display()
            ),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                status = ExitCode::FAILURE;
            }
        }
    }
    status
}
