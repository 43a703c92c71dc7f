//! Command-line driver. Subcommands map onto scenarios; every run is fully
//! seeded and reproducible.

use ordered_kinetics::config::{parse_config, ScenarioKind};
use ordered_kinetics::scenario::{run_scenario, stability_report, RunOptions};
use std::process::ExitCode;

const USAGE: &str = "\
okin - kinetics of ordered fluids

usage:
  okin simulate <config>       run the scenario named in the config file
  okin htest <config>          relaxation run with entropy monitoring
  okin invariants <config>     conservation fuzz for the config's rule
  okin weakform <config>       weak-form collision-invariant tests
  okin stability --alpha A --beta B
                               classify the aligned fixed point

flags (after the subcommand):
  --seed N      override the config seed
  --threads N   worker threads for collision sampling (default 1)
  --out PATH    override the config output path
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("FAIL kind=config msg={msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(args: &[String]) -> Result<ExitCode, String> {
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return Ok(ExitCode::from(2));
    };
    match command.as_str() {
        "simulate" | "htest" | "invariants" | "weakform" => run_config_command(command, &args[1..]),
        "stability" => run_stability_command(&args[1..]),
        "help" | "--help" | "-h" => {
            print!("{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        other => Err(format!("unknown command '{other}'")),
    }
}

struct Flags {
    positional: Vec<String>,
    seed: Option<u64>,
    threads: usize,
    out: Option<String>,
    alpha: Option<f64>,
    beta: Option<f64>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        positional: Vec::new(),
        seed: None,
        threads: 1,
        out: None,
        alpha: None,
        beta: None,
    };
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let mut take = |name: &str| {
            iter.next()
                .map(|s| s.to_string())
                .ok_or_else(|| format!("{name} needs a value"))
        };
        match arg.as_str() {
            "--seed" => {
                flags.seed = Some(
                    take("--seed")?
                        .parse()
                        .map_err(|e| format!("--seed: {e}"))?,
                )
            }
            "--threads" => {
                flags.threads = take("--threads")?
                    .parse()
                    .map_err(|e| format!("--threads: {e}"))?;
                if flags.threads == 0 {
                    return Err("--threads must be at least 1".into());
                }
            }
            "--out" => flags.out = Some(take("--out")?),
            "--alpha" => {
                flags.alpha = Some(
                    take("--alpha")?
                        .parse()
                        .map_err(|e| format!("--alpha: {e}"))?,
                )
            }
            "--beta" => {
                flags.beta = Some(
                    take("--beta")?
                        .parse()
                        .map_err(|e| format!("--beta: {e}"))?,
                )
            }
            other if other.starts_with("--") => return Err(format!("unknown flag '{other}'")),
            other => flags.positional.push(other.to_string()),
        }
    }
    Ok(flags)
}

fn run_config_command(command: &str, args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    let [path] = flags.positional.as_slice() else {
        return Err(format!("{command} takes exactly one config file"));
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let mut cfg = parse_config(&text).map_err(|e| e.to_string())?;
    match command {
        "htest" => cfg.scenario = ScenarioKind::Relaxation,
        "invariants" => cfg.scenario = ScenarioKind::InvariantFuzz,
        "weakform" => cfg.scenario = ScenarioKind::WeakForm,
        _ => {}
    }
    let opts = RunOptions {
        threads: flags.threads,
        seed_override: flags.seed,
        out_override: flags.out,
    };
    let summary = run_scenario(&cfg, &opts).map_err(|e| e.to_string())?;
    for line in &summary.report {
        println!("{line}");
    }
    for path in &summary.outputs {
        println!("wrote {}", path.display());
    }
    if summary.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for failure in &summary.failures {
            println!("FAIL kind=property msg={failure}");
        }
        Ok(ExitCode::from(1))
    }
}

fn run_stability_command(args: &[String]) -> Result<ExitCode, String> {
    let flags = parse_flags(args)?;
    if !flags.positional.is_empty() {
        return Err("stability takes only --alpha and --beta".into());
    }
    let alpha = flags.alpha.ok_or("stability needs --alpha")?;
    let beta = flags.beta.ok_or("stability needs --beta")?;
    for line in stability_report(alpha, beta) {
        println!("{line}");
    }
    Ok(ExitCode::SUCCESS)
}
