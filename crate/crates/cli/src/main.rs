//! `heavytail` — experiment runner for heavy-tailed sampling.
//!
//! Subcommands:
//!   run <spec|preset>               run an experiment, write CSV artifacts
//!   complexity-table [spec|preset]  closed-form iteration/evaluation sweep
//!   moments <spec|preset>           analytic vs Monte Carlo moment report
//!   verify                          run the full acceptance gate
//!
//! Common flags: --seed N, --out DIR, --threads N. The default output
//! directory can also be set through the HEAVYTAIL_OUT environment variable.
//! Exit codes: 0 success, 2 validation failure, 3 chain divergence under the
//! abort policy, 1 other errors.

use std::path::Path;
use std::process::ExitCode;

use heavytail_cli::config::{load_spec, ExperimentSpec};
use heavytail_cli::{moments, runner, scenario, table, verify, HarnessError};

struct CommonFlags {
    seed: Option<u64>,
    out: Option<String>,
    threads: usize,
}

fn parse_flags(args: &[String]) -> Result<(Vec<String>, CommonFlags), String> {
    let mut positional = Vec::new();
    let mut flags = CommonFlags { seed: None, out: None, threads: default_threads() };
    let mut i = 0;
    while i < args.len() {
        match args[i].as_str() {
            "--seed" => {
                i += 1;
                let v = args.get(i).ok_or("--seed requires a value")?;
                flags.seed = Some(v.parse().map_err(|_| format!("invalid seed `{v}`"))?);
            }
            "--out" => {
                i += 1;
                flags.out = Some(args.get(i).ok_or("--out requires a value")?.clone());
            }
            "--threads" => {
                i += 1;
                let v = args.get(i).ok_or("--threads requires a value")?;
                flags.threads = v.parse().map_err(|_| format!("invalid thread count `{v}`"))?;
            }
            other => positional.push(other.to_string()),
        }
        i += 1;
    }
    Ok((positional, flags))
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn load(arg: &str) -> Result<ExperimentSpec, HarnessError> {
    if let Some(preset) = scenario::preset(arg) {
        return Ok(preset);
    }
    load_spec(Path::new(arg))
}

fn apply_flags(spec: &mut ExperimentSpec, flags: &CommonFlags) {
    if let Some(seed) = flags.seed {
        spec.sampler.seed = seed;
    }
    if let Some(out) = &flags.out {
        spec.experiment.out = out.clone();
    } else if let Ok(base) = std::env::var("HEAVYTAIL_OUT") {
        if !base.is_empty() {
            spec.experiment.out =
                Path::new(&base).join(&spec.scenario).display().to_string();
        }
    }
}

fn usage() -> String {
    format!(
        "usage: heavytail <run|complexity-table|moments|verify> [spec-file|preset] \
         [--seed N] [--out DIR] [--threads N]\npresets: {}",
        scenario::PRESET_NAMES.join(", ")
    )
}

fn run() -> Result<(), HarnessError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (positional, flags) =
        parse_flags(&args).map_err(|m| HarnessError::Validation(vec![m, usage()]))?;
    let Some(command) = positional.first() else {
        return Err(HarnessError::Validation(vec![usage()]));
    };
    match command.as_str() {
        "run" => {
            let arg = positional
                .get(1)
                .ok_or_else(|| HarnessError::Validation(vec![usage()]))?;
            let mut spec = load(arg)?;
            apply_flags(&mut spec, &flags);
            let artifacts = runner::run(&spec, flags.threads)?;
            println!("scenario {} complete", spec.scenario);
            println!("  snapshots: {}", artifacts.snapshots_csv.display());
            println!("  metrics:   {}", artifacts.metrics_csv.display());
            println!("  theory:    {}", artifacts.theory_csv.display());
            println!("  manifest:  {}", artifacts.manifest.display());
            println!(
                "  final sliced-W2 {:.5} (noise floor {:.5})",
                artifacts.final_sliced_w2, artifacts.noise_floor
            );
            Ok(())
        }
        "complexity-table" => {
            let mut spec = match positional.get(1) {
                Some(arg) => load(arg)?,
                None => scenario::preset("complexity-default").expect("builtin"),
            };
            apply_flags(&mut spec, &flags);
            let Some(tspec) = spec.table.clone() else {
                return Err(HarnessError::Validation(vec![
                    "spec has no [table] section".to_string(),
                ]));
            };
            let csv = table::render(&tspec)?;
            let out = Path::new(&spec.experiment.out).join("complexity.csv");
            csv.write_to(&out)?;
            print!("{}", csv.into_string());
            eprintln!("written to {}", out.display());
            Ok(())
        }
        "moments" => {
            let arg = positional
                .get(1)
                .ok_or_else(|| HarnessError::Validation(vec![usage()]))?;
            let mut spec = load(arg)?;
            apply_flags(&mut spec, &flags);
            let csv = moments::render(&spec)?;
            let out = Path::new(&spec.experiment.out).join("moments.csv");
            csv.write_to(&out)?;
            print!("{}", csv.into_string());
            eprintln!("written to {}", out.display());
            Ok(())
        }
        "verify" => {
            let results = verify::run_all(flags.threads);
            for r in &results {
                println!("{}", r.line());
            }
            let csv = verify::results_csv(&results);
            let out_dir = flags
                .out
                .clone()
                .or_else(|| std::env::var("HEAVYTAIL_OUT").ok())
                .unwrap_or_else(|| "runs".to_string());
            let out = Path::new(&out_dir).join("verify_results.csv");
            csv.write_to(&out)?;
            println!("results written to {}", out.display());
            if results.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(HarnessError::Validation(vec![format!(
                    "{} of {} criteria failed",
                    results.iter().filter(|r| !r.passed).count(),
                    results.len()
                )]))
            }
        }
        other => Err(HarnessError::Validation(vec![
            format!("unknown command `{other}`"),
            usage(),
        ])),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
