//! Stand-in recognizer speaking the adapter protocol, for tests and dry
//! runs. Images must live in a corpus built by `ocsrbench gen`: the
//! reference molfile is looked up at `<subset>/../reference/<id>.mol`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ocsr-mock", about = "Mock OCSR adapter")]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Print the reference molfile (always correct).
    Oracle { image: PathBuf },
    /// Exit 1 without output.
    Fail { image: PathBuf },
    /// Like oracle, but fail on every n-th image in id order.
    FailEvery { n: usize, image: PathBuf },
    /// Sleep, then behave like oracle.
    Sleep { secs: f64, image: PathBuf },
    /// Print `SMILES: <smiles>` whatever the image.
    Smiles { smiles: String, image: PathBuf },
    /// Exit 0 with no output.
    Empty { image: PathBuf },
}

fn reference(image: &Path) -> Option<PathBuf> {
    let stem = image.file_stem()?;
    let dir = image.parent()?.join("../reference");
    Some(dir.join(stem).with_extension("mol"))
}

fn oracle(image: &Path) -> ExitCode {
    match reference(image).and_then(|p| fs::read_to_string(p).ok()) {
        Some(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        None => {
            eprintln!("no reference for {}", image.display());
            ExitCode::FAILURE
        }
    }
}

/// Position of the image among the corpus references, by id.
fn index_of(image: &Path) -> Option<usize> {
    let r = reference(image)?;
    let mut names: Vec<_> = fs::read_dir(r.parent()?).ok()?.filter_map(|e| e.ok().map(|e| e.file_name())).collect();
    names.sort();
    names.iter().position(|n| Some(n.as_os_str()) == r.file_name())
}

fn main() -> ExitCode {
    match Cli::parse().mode {
        Mode::Oracle { image } => oracle(&image),
        Mode::Fail { .. } => ExitCode::FAILURE,
        Mode::FailEvery { n, image } => match index_of(&image) {
            Some(i) if n > 0 && i % n == n - 1 => ExitCode::FAILURE,
            Some(_) => oracle(&image),
            None => ExitCode::FAILURE,
        },
        Mode::Sleep { secs, image } => {
            std::thread::sleep(Duration::from_secs_f64(secs.max(0.0)));
            oracle(&image)
        }
        Mode::Smiles { smiles, .. } => {
            println!("SMILES: {smiles}");
            ExitCode::SUCCESS
        }
        Mode::Empty { .. } => ExitCode::SUCCESS,
    }
}
