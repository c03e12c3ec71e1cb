//! Corpus generation and adapter execution.
//!
//! A corpus directory holds `manifest.json`, `reference/<id>.mol` copies of
//! the input molfiles, `base/<id>.png` renderings and one `<label>/<id>.png`
//! directory per damage subset. Adapters are external commands that take an
//! image path and print a molfile or a `SMILES: ...` line.

mod adapter;
mod corpus;
mod subset;

use std::path::PathBuf;

use thiserror::Error;

use crate::render::RasterError;

pub use adapter::{
    parse_adapter_output, resolve_timeout, run_adapter, AdapterConfig, FailureReason,
    OutputKind, RecognitionOutcome, Status, DEFAULT_TIMEOUT_SECS, TIMEOUT_ENV,
};
pub use corpus::{
    build_corpus, image_seed, CorpusManifest, ManifestEntry, SkippedFile, SubsetInfo,
    MANIFEST_FILE,
};
pub use subset::{run_subset, ResultsFile, TIMING_SUFFIX};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: RasterError,
    },
    #[error("no .mol files in {0}")]
    NoMolfiles(PathBuf),
    #[error("none of the molfiles in {0} could be parsed and rendered")]
    NothingUsable(PathBuf),
    #[error("two molfiles map to image id {0:?}")]
    DuplicateImageId(String),
    #[error("subset {0:?} requested twice")]
    DuplicateSubset(String),
    #[error("subset {0:?} is not in the manifest")]
    UnknownSubset(String),
    #[error("invalid adapter config: {0}")]
    InvalidAdapter(String),
    #[error("invalid timeout: {0}")]
    InvalidTimeout(String),
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
