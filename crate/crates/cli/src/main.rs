//! `psyscale`: stimulus generation, machine sessions, fitting, scoring,
//! reporting and the human-response service.

mod commands;
mod observer_spec;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// An input that failed validation; reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

#[derive(Parser)]
#[command(name = "psyscale", version, about = "Perceptual-scale experiments from stimuli to scores")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blend image pairs into seven-frame sequences.
    Stimgen(StimgenArgs),
    /// Plan and run machine-observer sessions.
    #[command(subcommand)]
    Trials(TrialsCommand),
    /// Fit one perceptual scale per class pair.
    Fit(FitArgs),
    /// Psychophysical-Score of a model against the human reference.
    Score(ScoreArgs),
    /// Variance table, chi-squared null tests and Brain-Score comparison.
    Report(ReportArgs),
    /// Serve 2AFC trials over HTTP and record human responses.
    Serve(ServeArgs),
}

#[derive(Args)]
pub struct StimgenArgs {
    /// Rendered images as `<class>/<viewport>/<instance>.png`.
    #[arg(long)]
    pub images: PathBuf,
    /// Object masks under the same relative paths.
    #[arg(long)]
    pub masks: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub pairs_per_instance: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub blur_sigma: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand)]
pub enum TrialsCommand {
    /// Write a shuffled plan over every sequence in a directory.
    Plan(PlanArgs),
    /// Run one observer through a plan.
    Run(RunArgs),
}

#[derive(Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub sequences: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub repetitions: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long)]
    pub plan: PathBuf,
    /// gabor | random[:SEED] | embedding:PATH | synthetic:EXP:SIGMA:SEED
    #[arg(long)]
    pub observer: String,
    #[arg(long)]
    pub sequences: PathBuf,
    /// Response file (JSONL); a `.session.json` summary is written beside it.
    #[arg(long)]
    pub out: PathBuf,
    /// Stamp responses with wall-clock time instead of a logical counter.
    #[arg(long)]
    pub wall_clock: bool,
}

#[derive(Args)]
pub struct FitArgs {
    /// Response files or directories of `*.jsonl` files.
    #[arg(long, required = true, num_args = 1..)]
    pub responses: Vec<PathBuf>,
    /// Fit report document.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the skewness set derived from the fits.
    #[arg(long)]
    pub skew_out: Option<PathBuf>,
    /// Drop sequences failing the ordering or six-point check.
    #[arg(long)]
    pub qualify: bool,
    #[arg(long)]
    pub observer_id: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Flip the sign of every skewness value written to `--skew-out`.
    #[arg(long)]
    pub negate_skew: bool,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Human skewness set or fit report.
    #[arg(long)]
    pub human: PathBuf,
    /// Model skewness set or fit report.
    #[arg(long)]
    pub model: PathBuf,
    /// Score document; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Score documents from `score`.
    #[arg(long, num_args = 0..)]
    pub scores: Vec<PathBuf>,
    /// Skewness sets or fit reports for the variance table and null tests.
    #[arg(long, num_args = 0..)]
    pub skew: Vec<PathBuf>,
    /// Null skewness sets from random responders.
    #[arg(long, num_args = 0..)]
    pub null: Vec<PathBuf>,
    /// Simulate this many random-responder null sets over the class pairs
    /// of the `--skew` inputs.
    #[arg(long, default_value_t = 0)]
    pub null_sets: usize,
    #[arg(long, default_value_t = 1860)]
    pub null_responses: usize,
    #[arg(long, default_value_t = 0)]
    pub null_seed: u64,
    #[arg(long, default_value_t = psyscale::metrics::DEFAULT_BINS)]
    pub bins: usize,
    /// Divide by N - 1 instead of N.
    #[arg(long)]
    pub sample_variance: bool,
    /// CSV `observer_id,brain_score` with a header row.
    #[arg(long)]
    pub brain_scores: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// TSV of observer_id, psychophysical_score, brain_score.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Args)]
pub struct ServeArgs {
    /// TOML configuration; falls back to the PSYSCALE_CONFIG variable.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stimgen(a) => commands::stimgen(a),
        Command::Trials(TrialsCommand::Plan(a)) => commands::plan(a),
        Command::Trials(TrialsCommand::Run(a)) => commands::run(a),
        Command::Fit(a) => commands::fit(a),
        Command::Score(a) => commands::score(a),
        Command::Report(a) => commands::report(a),
        Command::Serve(a) => commands::serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
