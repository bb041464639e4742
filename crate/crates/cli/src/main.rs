//! Scenario runner for intervention games.
//!
//! Reads a sectioned key-value scenario file describing a model, an optional
//! mechanism, and a task, then runs the task and prints a report. Exit code 0
//! means the task's verdict is positive, 1 means negative, and 2 means the
//! scenario or flags were unusable.

mod run;
mod scenario;

use std::path::PathBuf;
use std::process::exit;

use clap::Parser;

/// Verify, design, search, and sweep intervention mechanisms from scenario files.
#[derive(Parser)]
#[command(name = "intervene", version)]
pub struct Args {
    /// Scenario file (sections `[model]`, `[mechanism]`, `[task]`, `[output]`)
    pub scenario: PathBuf,

    /// Grid resolution per user axis (overrides the scenario and INTERVENE_GRID)
    #[arg(long)]
    pub grid: Option<usize>,

    /// Local refinement rounds around the best grid point
    #[arg(long)]
    pub refine: Option<usize>,

    /// Write task rows as CSV to this path
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// Write the text report to this path instead of stdout
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn main() {
    let args = Args::parse();
    match run::run(&args) {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            exit(2);
        }
    }
}
