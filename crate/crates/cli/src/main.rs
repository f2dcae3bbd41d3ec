//! `stressnav`: corpus generation, training, evaluation and the worked
//! branch/curve demo.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "stressnav",
    version,
    about = "Branch detection from robot surface stresses in Stokes flow"
)]
struct Cli {
    /// Root output directory.
    #[arg(long, global = true, env = "STRESSNAV_OUT", default_value = "stressnav-out")]
    out: PathBuf,
    /// No progress lines on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a seeded corpus of branch and curve paths.
    Generate(GenerateArgs),
    /// Fit the principal direction and the logistic model on the training split.
    Train(TrainArgs),
    /// Score the test split and write ROC, detection and trace tables.
    Evaluate(EvaluateArgs),
    /// Repeat the ROC analysis with multiplicative input noise.
    NoiseStudy(NoiseArgs),
    /// Run the worked branch and curve scenarios.
    #[command(name = "demo-fig1")]
    Demo(DemoArgs),
}

#[derive(Args, Debug, Clone)]
struct GenerateArgs {
    #[arg(long, default_value_t = 100)]
    branches: usize,
    #[arg(long, default_value_t = 100)]
    curves: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// 1000 paths per class.
    #[arg(long, conflicts_with_all = ["branches", "curves"])]
    paper_scale: bool,
    /// Integration step, ms.
    #[arg(long, default_value_t = 0.5)]
    dt: f64,
    /// Wall element length near the robot, µm.
    #[arg(long, default_value_t = 0.25)]
    mesh_h: f64,
    /// Corpus directory (default: <out>/corpus).
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct TrainArgs {
    /// Corpus directory (default: <out>/corpus).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Model directory (default: <out>/model).
    #[arg(long)]
    models: Option<PathBuf>,
    /// Correlation lag, ms.
    #[arg(long, default_value_t = 10.0)]
    dt_corr: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Figure {
    All,
    /// c(t) along one path.
    #[value(alias = "fig4")]
    Correlation,
    /// P_branch along one path.
    #[value(alias = "fig5")]
    Pbranch,
    #[value(alias = "fig6")]
    Roc,
    #[value(alias = "fig7")]
    Detection,
}

#[derive(Args, Debug, Clone)]
struct EvaluateArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    models: Option<PathBuf>,
    /// Report directory (default: <out>/report).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    dt_corr: f64,
    #[arg(long, value_enum, default_value_t = Figure::All)]
    figure: Figure,
    /// Corpus entry id for the per-path tables.
    #[arg(long)]
    path: Option<String>,
    /// Detection threshold on P_branch for the per-path outcome table.
    #[arg(long, default_value_t = 0.8)]
    threshold: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum NoiseOn {
    /// Multiply 1 − c.
    OneMinusC,
    /// Multiply c.
    C,
}

#[derive(Args, Debug, Clone)]
struct NoiseArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    dt_corr: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.05, 0.1, 0.15, 0.2, 0.3])]
    levels: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = NoiseOn::OneMinusC)]
    target: NoiseOn,
}

#[derive(Args, Debug, Clone)]
struct DemoArgs {
    /// Demo directory (default: <out>/demo).
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Trained models for the P_branch traces; skipped when absent.
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    dt_corr: f64,
    /// Velocity grid spacing, µm.
    #[arg(long, default_value_t = 0.25)]
    grid: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            // Keep usage errors on one line like every other failure.
            let text = e.to_string();
            let msg: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("stressnav: error: {}", msg.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(&cli, a),
        Command::Train(a) => commands::train(&cli, a),
        Command::Evaluate(a) => commands::evaluate(&cli, a),
        Command::NoiseStudy(a) => commands::noise_study(&cli, a),
        Command::Demo(a) => commands::demo(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("stressnav: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
