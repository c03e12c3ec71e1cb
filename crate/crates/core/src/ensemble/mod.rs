//! Agreement ensemble: two fast recognizers vote, a third breaks ties.
//!
//! When both fast adapters recognize the same structure (compared by
//! canonical id) their answer is accepted; any disagreement, including a
//! failure of either side, defers to the fallback. Two fast adapters that
//! agree on a wrong structure are accepted as-is.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chemgraph::canonical_id;
use crate::harness::{run_adapter, AdapterConfig, CorpusManifest, HarnessError, RecognitionOutcome};

fn default_lazy() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub fast_a: AdapterConfig,
    pub fast_b: AdapterConfig,
    pub fallback: AdapterConfig,
    /// Run the fallback only on disagreement. When false it runs on every
    /// image (useful for timing), but its answer is still only used on
    /// disagreement.
    #[serde(default = "default_lazy")]
    pub lazy_fallback: bool,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        for c in [&self.fast_a, &self.fast_b, &self.fallback] {
            c.validate()?;
        }
        let (a, b, f) = (&self.fast_a.name, &self.fast_b.name, &self.fallback.name);
        if a == b || a == f || b == f {
            return Err(HarnessError::InvalidAdapter(format!(
                "ensemble members must have distinct names, got {a}, {b}, {f}"
            )));
        }
        Ok(())
    }

    /// Synthetic adapter name used in results and reports.
    pub fn name(&self) -> String {
        ensemble_name(&self.fast_a.name, &self.fast_b.name, &self.fallback.name)
    }
}

pub fn ensemble_name(a: &str, b: &str, fallback: &str) -> String {
    format!("ensemble({a}+{b}|{fallback})")
}

/// True when both outcomes are recognized molecules with the same identity.
pub fn agree(a: &RecognitionOutcome, b: &RecognitionOutcome) -> bool {
    match (a.molecule(), b.molecule()) {
        (Some(x), Some(y)) => !x.is_placeholder() && canonical_id(x) == canonical_id(y),
        _ => false,
    }
}

/// `a` when the fast pair agrees; otherwise whatever `fallback` produces.
/// The fallback is not called on agreement.
pub fn combine(
    a: RecognitionOutcome,
    b: RecognitionOutcome,
    fallback: impl FnOnce() -> RecognitionOutcome,
) -> RecognitionOutcome {
    debug_assert_eq!(a.image_id, b.image_id, "combining outcomes of different images");
    if agree(&a, &b) {
        return a;
    }
    let mut out = fallback();
    out.image_id = a.image_id;
    out
}

/// Ensemble outcomes plus how they came about.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub outcomes: Vec<RecognitionOutcome>,
    pub fast_a: Vec<RecognitionOutcome>,
    pub fast_b: Vec<RecognitionOutcome>,
    /// Outcomes the fallback produced, in image order (all images when not
    /// lazy).
    pub fallback: Vec<RecognitionOutcome>,
    /// Images on which the fast pair agreed.
    pub agreements: usize,
}

/// Combines already-computed fast outcomes; `fallback` is called with the
/// image id of each disagreement (or of every image when `lazy` is false).
/// Both slices must list the same ids in the same order.
pub fn combine_all(
    fast_a: &[RecognitionOutcome],
    fast_b: &[RecognitionOutcome],
    lazy: bool,
    fallback: impl Fn(&str) -> RecognitionOutcome + Sync,
) -> EnsembleRun {
    assert_eq!(fast_a.len(), fast_b.len(), "fast outcome lists differ in length");
    let agreements = AtomicUsize::new(0);
    let pairs: Vec<(RecognitionOutcome, Option<RecognitionOutcome>)> = fast_a
        .par_iter()
        .zip(fast_b)
        .map(|(a, b)| {
            assert_eq!(a.image_id, b.image_id, "fast outcome lists are not aligned");
            let eager = (!lazy).then(|| fallback(&a.image_id));
            let mut used = None;
            let out = combine(a.clone(), b.clone(), || {
                let o = eager.clone().unwrap_or_else(|| fallback(&a.image_id));
                used = Some(o.clone());
                o
            });
            if used.is_none() {
                agreements.fetch_add(1, Ordering::Relaxed);
            }
            (out, eager.or(used))
        })
        .collect();
    let (outcomes, fb): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    EnsembleRun {
        outcomes,
        fast_a: fast_a.to_vec(),
        fast_b: fast_b.to_vec(),
        fallback: fb.into_iter().flatten().collect(),
        agreements: agreements.into_inner(),
    }
}

/// Runs the ensemble over one subset. The two fast adapters run
/// concurrently on each image; the fallback at most once per image.
pub fn run_ensemble(
    cfg: &EnsembleConfig,
    manifest: &CorpusManifest,
    corpus_dir: &Path,
    label: &str,
    parallelism: usize,
) -> Result<EnsembleRun, HarnessError> {
    cfg.validate()?;
    let subset = manifest.subset(label)?;
    let dir = corpus_dir.join(&subset.directory);
    let image = |id: &str| dir.join(format!("{id}.png"));
    let run = |c: &AdapterConfig, id: &str| {
        let mut o = run_adapter(c, &image(id));
        o.image_id = id.to_string();
        o
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool");
    Ok(pool.install(|| {
        let mut ids: Vec<&str> = manifest.entries.iter().map(|e| e.image_id.as_str()).collect();
        ids.sort();
        let (a, b): (Vec<_>, Vec<_>) = ids
            .par_iter()
            .map(|id| rayon::join(|| run(&cfg.fast_a, id), || run(&cfg.fast_b, id)))
            .unzip();
        combine_all(&a, &b, cfg.lazy_fallback, |id| run(&cfg.fallback, id))
    }))
}
