use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use enflo_core::harness::{run, select_parameters, OutputFormat, Overrides, RunReport, Task};

#[derive(Parser)]
#[command(name = "enflo", version, about = "Rademacher, Enflo and scaled Enflo type experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for lower bounds on T or τ (tasks estimate_T, estimate_tau).
    Estimate(RunArgs),
    /// Check the theorem, the smoothing lemma or the composite chain.
    Verify(RunArgs),
    /// Certify T ≤ 2πτ through exponential witnesses (task verify_lemma21).
    Witness(RunArgs),
    /// Exhaustive τ over functions into a finite alphabet (task oracle).
    Oracle(RunArgs),
    /// Print the admissible (m, k) for given n and p.
    Params {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; the report goes to stdout when neither this nor output_path is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Largest enumeration an exhaustive plan may attempt.
    #[arg(long)]
    cap: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(code) = configure_threads() {
        return code;
    }
    let (args, tasks) = match cli.command {
        Command::Params { n, p } => return params(n, p),
        Command::Estimate(a) => (a, vec![Task::EstimateT, Task::EstimateTau]),
        Command::Verify(a) => (a, vec![Task::VerifyTheorem, Task::VerifyLemma22, Task::VerifyChain, Task::VerifyLemma21]),
        Command::Witness(a) => (a, vec![Task::VerifyLemma21]),
        Command::Oracle(a) => (a, vec![Task::Oracle]),
    };
    let format = match args.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    let overrides = Overrides { seed: args.seed, output_path: args.out, cap: args.cap, format, allowed_tasks: tasks };
    let outcome = run(&args.config, &overrides);
    if let Some(err) = &outcome.error {
        eprintln!("enflo: {err}");
    }
    if let Some(report) = &outcome.report {
        if report.config.output_path.is_none() {
            if let Err(e) = print_report(report, format) {
                eprintln!("enflo: {e}");
                return ExitCode::from(2);
            }
        }
        eprintln!("{}", summary_line(report));
    }
    ExitCode::from(outcome.exit_code as u8)
}

fn configure_threads() -> Result<(), ExitCode> {
    let Ok(raw) = std::env::var("ENFLO_THREADS") else {
        return Ok(());
    };
    let threads: usize = match raw.parse() {
        Ok(t) if t > 0 => t,
        _ => {
            eprintln!("enflo: ENFLO_THREADS must be a positive integer, got {raw:?}");
            return Err(ExitCode::from(2));
        }
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| {
        eprintln!("enflo: {e}");
        ExitCode::from(4)
    })
}

fn params(n: usize, p: f64) -> ExitCode {
    match select_parameters(n, p) {
        Ok((m, k)) => {
            println!("{}", serde_json::json!({ "n": n, "p": p, "m": m, "k": k }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("enflo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn print_report(report: &RunReport, format: OutputFormat) -> enflo_core::Result<()> {
    let bytes = report.render(format)?;
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(&bytes)?;
    if format == OutputFormat::Json {
        writeln!(stdout)?;
    }
    Ok(())
}

fn summary_line(report: &RunReport) -> String {
    let s = &report.summary;
    let margin = s.min_margin.map_or("n/a".to_string(), |m| format!("{m:.6e}"));
    format!(
        "{}: {:?} ({} trials, {} failed, {} degenerate, min margin {margin}, {:.2}s)",
        report.task, report.verdict, s.trials, s.failed, s.degenerate, report.wall_clock_seconds
    )
}
