use std::io::Read;
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::HarnessError;
use crate::chemgraph::{parse_molfile, parse_smiles, Molecule};

pub const DEFAULT_TIMEOUT_SECS: f64 = 60.0;
/// Environment variable overriding the configured per-image timeout.
pub const TIMEOUT_ENV: &str = "OCSR_TIMEOUT_SECS";
/// Placeholder in argument templates replaced by the image path.
const IMAGE_TOKEN: &str = "{image}";
/// Captured stdout beyond this many bytes is dropped.
const MAX_CAPTURE: usize = 1 << 20;

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Molfile,
    Smiles,
}

/// An external recognizer. `args` may contain `{image}`; if none does, the
/// image path is appended as the last argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub name: String,
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    pub output_kind: OutputKind,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

impl AdapterConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return Err(HarnessError::InvalidAdapter(format!(
                "name {:?} must be non-empty and usable as a directory name",
                self.name
            )));
        }
        if self.command.is_empty() {
            return Err(HarnessError::InvalidAdapter(format!("{}: empty command", self.name)));
        }
        check_timeout(self.timeout_secs)
            .map(|_| ())
            .map_err(HarnessError::InvalidTimeout)
    }

    fn argv(&self, image: &Path) -> Vec<String> {
        let img = image.to_string_lossy();
        let mut args: Vec<String> = self.args.iter().map(|a| a.replace(IMAGE_TOKEN, &img)).collect();
        if !self.args.iter().any(|a| a.contains(IMAGE_TOKEN)) {
            args.push(img.into_owned());
        }
        args
    }
}

fn check_timeout(secs: f64) -> Result<f64, String> {
    if secs.is_finite() && secs > 0.0 && secs < 1e9 {
        Ok(secs)
    } else {
        Err(format!("{secs} is not a positive number of seconds"))
    }
}

/// Effective timeout: command-line value, else `OCSR_TIMEOUT_SECS`, else
/// the configured value.
pub fn resolve_timeout(configured: f64, cli: Option<f64>) -> Result<f64, HarnessError> {
    let chosen = match (cli, std::env::var(TIMEOUT_ENV)) {
        (Some(v), _) => v,
        (None, Ok(s)) => s.trim().parse::<f64>().map_err(|_| {
            HarnessError::InvalidTimeout(format!("{TIMEOUT_ENV}={s:?} is not a number"))
        })?,
        (None, Err(_)) => configured,
    };
    check_timeout(chosen).map_err(HarnessError::InvalidTimeout)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    NonzeroExit,
    Timeout,
    EmptyOutput,
    ParseError,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::NonzeroExit => "nonzero_exit",
            FailureReason::Timeout => "timeout",
            FailureReason::EmptyOutput => "empty_output",
            FailureReason::ParseError => "parse_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Recognized { molecule: Molecule },
    Failed { reason: FailureReason },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionOutcome {
    pub image_id: String,
    #[serde(flatten)]
    pub status: Status,
    pub raw_output: String,
    /// Seconds. Kept out of results files so they stay reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

impl RecognitionOutcome {
    pub fn failed(image_id: &str, reason: FailureReason, raw_output: String, wall_time: f64) -> Self {
        RecognitionOutcome {
            image_id: image_id.to_string(),
            status: Status::Failed { reason },
            raw_output,
            wall_time,
        }
    }

    pub fn recognized(image_id: &str, molecule: Molecule, raw_output: String, wall_time: f64) -> Self {
        RecognitionOutcome {
            image_id: image_id.to_string(),
            status: Status::Recognized { molecule },
            raw_output,
            wall_time,
        }
    }

    pub fn molecule(&self) -> Option<&Molecule> {
        match &self.status {
            Status::Recognized { molecule } => Some(molecule),
            Status::Failed { .. } => None,
        }
    }

    pub fn failure(&self) -> Option<FailureReason> {
        match self.status {
            Status::Failed { reason } => Some(reason),
            Status::Recognized { .. } => None,
        }
    }

    /// What scoring compares: the molecule, or the placeholder on failure.
    pub fn scored_molecule(&self) -> Molecule {
        self.molecule().cloned().unwrap_or_else(Molecule::placeholder)
    }
}

/// Interprets an adapter's stdout. A molfile must contain at least one atom.
/// SMILES output is the first `SMILES:` line, or the only non-empty line.
pub fn parse_adapter_output(kind: OutputKind, text: &str) -> Result<Molecule, FailureReason> {
    if text.trim().is_empty() {
        return Err(FailureReason::EmptyOutput);
    }
    match kind {
        OutputKind::Molfile => {
            let m = parse_molfile(text).map_err(|_| FailureReason::ParseError)?;
            if m.atom_count() == 0 {
                return Err(FailureReason::EmptyOutput);
            }
            Ok(m)
        }
        OutputKind::Smiles => {
            let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
            let smiles = match lines.iter().find_map(|l| l.strip_prefix("SMILES:")) {
                Some(s) => s.trim(),
                None if lines.len() == 1 => lines[0],
                None => return Err(FailureReason::ParseError),
            };
            if smiles.is_empty() {
                return Err(FailureReason::EmptyOutput);
            }
            parse_smiles(smiles).map_err(|_| FailureReason::ParseError)
        }
    }
}

fn image_id_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[cfg(unix)]
fn kill_tree(child: &mut Child) {
    // the adapter leads its own process group; take down any helpers too
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_tree(child: &mut Child) {
    let _ = child.kill();
}

fn spawn(cfg: &AdapterConfig, image: &Path) -> std::io::Result<Child> {
    let mut cmd = Command::new(&cfg.command);
    cmd.args(cfg.argv(image))
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    cmd.spawn()
}

/// Runs one adapter on one image. Every kind of misbehavior becomes a
/// failed outcome; this never returns an error.
pub fn run_adapter(cfg: &AdapterConfig, image_path: &Path) -> RecognitionOutcome {
    let id = image_id_of(image_path);
    let start = Instant::now();
    if !image_path.is_file() {
        let msg = format!("image not found: {}", image_path.display());
        return RecognitionOutcome::failed(&id, FailureReason::EmptyOutput, msg, 0.0);
    }
    let mut child = match spawn(cfg, image_path) {
        Ok(c) => c,
        Err(e) => {
            let msg = format!("failed to start {}: {e}", cfg.command);
            let t = start.elapsed().as_secs_f64();
            return RecognitionOutcome::failed(&id, FailureReason::NonzeroExit, msg, t);
        }
    };

    let mut stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut buf = [0u8; 8192];
        loop {
            match stdout.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = MAX_CAPTURE.saturating_sub(kept.len());
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
            }
        }
        let _ = tx.send(kept);
    });

    let limit = Duration::from_secs_f64(cfg.timeout_secs.max(1e-3));
    let status = match child.wait_timeout(limit) {
        Ok(Some(s)) => Some(s),
        Ok(None) | Err(_) => {
            kill_tree(&mut child);
            let _ = child.wait();
            None
        }
    };
    let wall = start.elapsed().as_secs_f64();
    // a stray grandchild could hold the pipe open; don't wait on it forever
    let captured = rx.recv_timeout(Duration::from_secs(2)).unwrap_or_default();
    let raw = String::from_utf8_lossy(&captured).into_owned();

    match status {
        None => RecognitionOutcome::failed(&id, FailureReason::Timeout, raw, wall),
        Some(s) if !s.success() => RecognitionOutcome::failed(&id, FailureReason::NonzeroExit, raw, wall),
        Some(_) => match parse_adapter_output(cfg.output_kind, &raw) {
            Ok(m) => RecognitionOutcome::recognized(&id, m, raw, wall),
            Err(reason) => RecognitionOutcome::failed(&id, reason, raw, wall),
        },
    }
}
