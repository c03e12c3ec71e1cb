use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{io_err, run_adapter, AdapterConfig, CorpusManifest, HarnessError, RecognitionOutcome};

/// Suffix of the wall-time sidecar written next to each results file.
pub const TIMING_SUFFIX: &str = ".timing.json";

/// Outcomes of one adapter over one subset, as persisted under
/// `<results>/<adapter>/<subset>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub adapter: String,
    pub subset: String,
    pub outcomes: Vec<RecognitionOutcome>,
}

impl ResultsFile {
    pub fn path(results_dir: &Path, adapter: &str, subset: &str) -> PathBuf {
        results_dir.join(adapter).join(format!("{subset}.json"))
    }

    /// Writes the results file and its timing sidecar. The results file is
    /// a pure function of the outcomes; wall times only go to the sidecar.
    pub fn save(&self, results_dir: &Path) -> Result<PathBuf, HarnessError> {
        let path = Self::path(results_dir, &self.adapter, &self.subset);
        let dir = path.parent().expect("has parent");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut text = serde_json::to_string_pretty(self).expect("results serialize");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;

        let times: BTreeMap<&str, f64> = self
            .outcomes
            .iter()
            .map(|o| (o.image_id.as_str(), o.wall_time))
            .collect();
        let tpath = dir.join(format!("{}{TIMING_SUFFIX}", self.subset));
        let mut text = serde_json::to_string_pretty(&times).expect("timings serialize");
        text.push('\n');
        fs::write(&tpath, text).map_err(io_err(&tpath))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Runs the adapter over every image of `label` with up to `parallelism`
/// processes at once. One outcome per manifest entry, ordered by image id.
pub fn run_subset(
    cfg: &AdapterConfig,
    manifest: &CorpusManifest,
    corpus_dir: &Path,
    label: &str,
    parallelism: usize,
) -> Result<Vec<RecognitionOutcome>, HarnessError> {
    cfg.validate()?;
    let subset = manifest.subset(label)?;
    let dir = corpus_dir.join(&subset.directory);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool");
    let mut outcomes: Vec<RecognitionOutcome> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| {
                let mut o = run_adapter(cfg, &dir.join(format!("{}.png", e.image_id)));
                // the manifest id is authoritative even if the file was missing
                o.image_id = e.image_id.clone();
                o
            })
            .collect()
    });
    outcomes.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    Ok(outcomes)
}
