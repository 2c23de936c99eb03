//! `cricshot`: segment broadcast footage into delivery clips, track the ball
//! and classify delivery length.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;

#[derive(Parser, Debug)]
#[command(
    name = "cricshot",
    version,
    about = "Delivery clip segmentation and ball-length analysis"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Image directory, scenario JSON file, scenario:<name> or raw:<W>x<H>:<path>.
    #[arg(long, global = true)]
    source: Option<String>,
    /// Annotation backend: file or synthetic.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Annotation JSONL for the file backend.
    #[arg(long, global = true)]
    annotations: Option<PathBuf>,
    /// Gate strategy: classifier, umpire, pitch, either or dual.
    #[arg(long, global = true)]
    gate: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Frame rate of the source.
    #[arg(long, global = true)]
    fps: Option<f64>,
    /// Worker threads for annotation.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            source: self.source.clone(),
            backend: self.backend.clone(),
            annotations: self.annotations.clone(),
            gate: self.gate.clone(),
            fps: self.fps,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a JSONL manifest of delivery clips.
    Segment(commands::SegmentArgs),
    /// Track the ball through each live clip of a manifest.
    Track(commands::TrackArgs),
    /// Classify delivery length from trajectories.
    Classify(commands::ClassifyArgs),
    /// Recall and precision from counts or prediction/label streams.
    Eval(commands::EvalArgs),
    /// Measure segmentation throughput.
    Bench(commands::BenchArgs),
    /// List bundled synthetic scenarios.
    Scenarios(commands::ScenariosArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = commands::init_threads(cli.global.threads).and_then(|()| match &cli.command {
        Command::Segment(a) => commands::segment(&cli.global, a),
        Command::Track(a) => commands::track(&cli.global, a),
        Command::Classify(a) => commands::classify(&cli.global, a),
        Command::Eval(a) => commands::eval(&cli.global, a),
        Command::Bench(a) => commands::bench(&cli.global, a),
        Command::Scenarios(a) => commands::scenarios(&cli.global, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
