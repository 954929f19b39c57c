use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsc_core::abstraction::AbsError;
use qsc_core::analysis::{run_with, AnalysisConfig, AnalysisReport, IterationRecord, PipelineError};
use qsc_core::corpus::{corpus_entry, CORPUS};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_PARSE: u8 = 4;
const EXIT_VALIDATION: u8 = 5;
const EXIT_CONFIG: u8 = 6;
const EXIT_RESOURCE: u8 = 7;
const EXIT_ANALYSIS: u8 = 8;

/// Worst-case payoff analysis of contracts by interval abstraction.
#[derive(Parser)]
#[command(name = "qsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a contract file.
    Analyze(AnalyzeArgs),
    /// Bundled example contracts.
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// List bundled contracts with their presets.
    List,
    /// Analyze a bundled contract with its preset.
    Run(CorpusRunArgs),
}

#[derive(Args)]
struct Tuning {
    /// Initial number of cells per variable range.
    #[arg(long)]
    granularity: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Stop once upper - lower is at most this (e.g. 0, 0.5, 1/3).
    #[arg(long)]
    gap: Option<String>,
    /// Narrow a variable range, e.g. `--override bid=0..10`.
    #[arg(long = "override", value_name = "OBJ=LO..HI", value_parser = parse_override)]
    overrides: Vec<(String, (i64, i64))>,
    /// Abort a pass whose abstract game grows beyond this many states.
    #[arg(long)]
    max_states: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    contract: PathBuf,
    /// The party whose worst-case value is computed.
    #[arg(long)]
    party: String,
    #[arg(long)]
    objective: String,
    /// Number of parties k.
    #[arg(long)]
    parties: usize,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct CorpusRunArgs {
    /// e.g. `rps-correct`.
    name: String,
    /// Use the declared ranges instead of the desk-scale overrides.
    #[arg(long)]
    declared_ranges: bool,
    #[command(flatten)]
    tuning: Tuning,
}

fn parse_override(s: &str) -> Result<(String, (i64, i64)), String> {
    let err = || format!("expected OBJ=LO..HI, got '{s}'");
    let (name, range) = s.split_once('=').ok_or_else(err)?;
    let (lo, hi) = range.split_once("..").ok_or_else(err)?;
    let lo = lo.trim().parse().map_err(|_| err())?;
    let hi = hi.trim().parse().map_err(|_| err())?;
    if name.trim().is_empty() || lo > hi {
        return Err(err());
    }
    Ok((name.trim().to_string(), (lo, hi)))
}

fn apply(tuning: &Tuning, config: &mut AnalysisConfig) {
    if let Some(g) = tuning.granularity {
        config.granularity = g;
    }
    if let Some(n) = tuning.max_iters {
        config.max_iters = n;
    }
    if let Some(n) = tuning.max_states {
        config.max_states = n;
    }
    if let Some(gap) = &tuning.gap {
        config.gap = gap.clone();
    }
    config.overrides.extend(tuning.overrides.iter().cloned());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Corpus(CorpusCommand::List) => {
            list();
            0
        }
        Command::Corpus(CorpusCommand::Run(r)) => corpus_run(r),
    };
    ExitCode::from(code)
}

fn list() {
    println!("{:<18} {:<7} {:>2}  {:<34} desk overrides", "name", "party", "k", "objective");
    for e in CORPUS {
        let p = &e.preset;
        let desk: Vec<String> = p.desk.iter().map(|(n, lo, hi)| format!("{n}={lo}..{hi}")).collect();
        let desk = if desk.is_empty() { "-".to_string() } else { desk.join(" ") };
        println!("{:<18} {:<7} {:>2}  {:<34} {desk}", e.name, p.party, p.k, p.objective);
    }
}

fn analyze(a: AnalyzeArgs) -> u8 {
    let source = match std::fs::read_to_string(&a.contract) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", a.contract.display());
            return EXIT_IO;
        }
    };
    let mut config = AnalysisConfig::new(&a.contract.display().to_string(), &a.party, &a.objective, a.parties);
    apply(&a.tuning, &mut config);
    execute(&source, &config, a.tuning.report.as_ref())
}

fn corpus_run(r: CorpusRunArgs) -> u8 {
    let Some(entry) = corpus_entry(&r.name) else {
        let names: Vec<&str> = CORPUS.iter().map(|e| e.name).collect();
        eprintln!("error: unknown corpus contract '{}'; available: {}", r.name, names.join(", "));
        return EXIT_USAGE;
    };
    let mut config = AnalysisConfig::corpus(entry, r.declared_ranges);
    apply(&r.tuning, &mut config);
    execute(entry.source, &config, r.tuning.report.as_ref())
}

fn execute(source: &str, config: &AnalysisConfig, report_path: Option<&PathBuf>) -> u8 {
    println!("{:>4} {:>10} {:>14} {:>14} {:>9}  refined", "iter", "states", "lower", "upper", "seconds");
    let mut i = 0;
    let result = run_with(source, config, |r: &IterationRecord| {
        i += 1;
        let refined = r.refined.map_or("-".to_string(), |l| l.to_string());
        println!(
            "{i:>4} {:>10} {:>14} {:>14} {:>9.3}  {refined}",
            r.states,
            approx(&r.lower, r.lower_approx),
            approx(&r.upper, r.upper_approx),
            r.elapsed
        );
    });
    let report = match result {
        Ok(r) => r,
        Err(e) => return pipeline_failure(&config.contract, e),
    };
    for w in &report.warnings {
        eprintln!("{w}");
    }
    summarize(&report);
    if let Some(path) = report_path {
        if let Err(e) = std::fs::write(path, report.render()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_IO;
        }
    }
    match &report.error {
        None => 0,
        Some(e) if e == &AbsError::TooManyStates(config.max_states).to_string() => EXIT_RESOURCE,
        Some(_) => EXIT_ANALYSIS,
    }
}

/// Exact form when short, decimal otherwise.
fn approx(exact: &str, value: f64) -> String {
    if exact.len() <= 14 {
        exact.to_string()
    } else {
        format!("{value:.6}")
    }
}

fn summarize(report: &AnalysisReport) {
    if let Some((lo, hi)) = report.final_bounds() {
        println!("value in [{lo}, {hi}]");
    }
    println!("verdict: {}", report.verdict.as_str());
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
}

fn pipeline_failure(file: &str, e: PipelineError) -> u8 {
    match e {
        PipelineError::Parse(e) => {
            eprintln!("{}", e.render(file));
            EXIT_PARSE
        }
        PipelineError::Invalid(diags) => {
            for d in &diags {
                eprintln!("{}", d.render(file));
            }
            EXIT_VALIDATION
        }
        PipelineError::Objective(e) => {
            eprintln!("{}", e.render(file));
            EXIT_CONFIG
        }
        e @ (PipelineError::Model(_) | PipelineError::Config(_)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
