use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use metagrav::config::{Fallback, RawConfig};
use metagrav::experiments::ScenarioRegistry;
use metagrav::output::emit;
use metagrav::Error;

/// Runs one scenario of the two-metaworld laboratory and writes CSV series,
/// tables and summary.json into the output directory.
///
/// Exit status: 0 all checks passed, 1 usage or configuration error,
/// 2 checks failed (outputs still written), 3 numerical failure.
#[derive(Parser, Debug)]
#[command(name = "metagrav", version)]
struct Cli {
    /// Scenario name, or `list` to show the registry.
    scenario: String,

    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a key, e.g. `--set points=256`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Unstable { .. }
        | Error::NotConverged { .. }
        | Error::NoBoundState { .. }
        | Error::Degenerate(_)
        | Error::Undersampled(_)
        | Error::MemoryBound(_) => 3,
        _ => 1,
    }
}

fn list(registry: &ScenarioRegistry) {
    for s in registry.iter() {
        println!("{}\n    {}", s.name(), s.description());
        for k in s.keys() {
            let default = match k.default {
                Fallback::Required => "required".to_string(),
                Fallback::Optional => "optional".to_string(),
                Fallback::Value(v) => v.to_string(),
            };
            println!("      {:<24} {:<10} {}", k.name, default, k.help);
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let registry = ScenarioRegistry::standard();
    if cli.scenario == "list" {
        list(&registry);
        return Ok(true);
    }
    let mut raw = match &cli.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    for s in &cli.sets {
        raw.set(s)?;
    }
    if cli.print_config {
        print!("{}", registry.configure(&cli.scenario, &raw)?.to_text());
        return Ok(true);
    }
    let Some(out) = &cli.out else {
        registry.get(&cli.scenario)?;
        return Err(Error::Domain("--out <dir> is required to run a scenario".into()));
    };
    let report = registry.run(&cli.scenario, &raw)?;
    for line in report.check_lines() {
        eprintln!("{line}");
    }
    for path in emit(&report, out)? {
        eprintln!("wrote {}", path.display());
    }
    eprintln!(
        "{}: {} in {:.2} s ({} steps)",
        report.scenario,
        if report.passed() { "all checks passed" } else { "CHECKS FAILED" },
        report.wall_clock.as_secs_f64(),
        report.steps
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("METAGRAV_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
