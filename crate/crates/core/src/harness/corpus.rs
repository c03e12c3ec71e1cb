use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{io_err, HarnessError};
use crate::chemgraph::parse_molfile;
use crate::degrade::{DamageSpec, BASE_LABEL};
use crate::render::{render, RasterImage, RenderOptions};

pub const MANIFEST_FILE: &str = "manifest.json";
const REFERENCE_DIR: &str = "reference";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_id: String,
    /// Relative to the corpus directory, `/`-separated.
    pub base_image: String,
    pub reference_molfile: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetInfo {
    pub label: String,
    /// `None` for the base subset.
    pub damage: Option<DamageSpec>,
    pub directory: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub corpus_seed: u64,
    pub render: RenderOptions,
    /// Sorted by image id.
    pub entries: Vec<ManifestEntry>,
    pub subsets: Vec<SubsetInfo>,
    #[serde(default)]
    pub skipped: Vec<SkippedFile>,
}

impl CorpusManifest {
    pub fn load(corpus_dir: &Path) -> Result<Self, HarnessError> {
        let path = corpus_dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json { path, source })
    }

    pub fn save(&self, corpus_dir: &Path) -> Result<(), HarnessError> {
        let path = corpus_dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))
    }

    pub fn subset(&self, label: &str) -> Result<&SubsetInfo, HarnessError> {
        self.subsets
            .iter()
            .find(|s| s.label == label)
            .ok_or_else(|| HarnessError::UnknownSubset(label.to_string()))
    }

    pub fn image_path(&self, corpus_dir: &Path, label: &str, image_id: &str) -> Result<PathBuf, HarnessError> {
        let s = self.subset(label)?;
        Ok(corpus_dir.join(&s.directory).join(format!("{image_id}.png")))
    }

    pub fn reference_path(&self, corpus_dir: &Path, entry: &ManifestEntry) -> PathBuf {
        corpus_dir.join(&entry.reference_molfile)
    }
}

/// Per-image damage seed: the first 8 bytes (little-endian) of
/// `sha256(corpus_seed as 8 LE bytes || label || 0x00 || image_id)`.
pub fn image_seed(corpus_seed: u64, label: &str, image_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(corpus_seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update([0u8]);
    h.update(image_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Removes files with `ext` from `dir` so a rebuilt subset holds exactly the
/// current entries.
fn reset_dir(dir: &Path, ext: &str) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for e in fs::read_dir(dir).map_err(io_err(dir))? {
        let p = e.map_err(io_err(dir))?.path();
        if p.is_file() && p.extension().is_some_and(|x| x == ext) {
            fs::remove_file(&p).map_err(io_err(&p))?;
        }
    }
    Ok(())
}

fn save_png(img: &RasterImage, path: &Path) -> Result<(), HarnessError> {
    img.save_png(path).map_err(|source| HarnessError::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Renders every molfile in `molfile_dir` into `out_dir/base`, applies each
/// spec into `out_dir/<label>`, copies references and writes the manifest.
/// Files that fail to parse or render are recorded as skipped.
pub fn build_corpus(
    molfile_dir: &Path,
    out_dir: &Path,
    specs: &[DamageSpec],
    opts: &RenderOptions,
    corpus_seed: u64,
) -> Result<CorpusManifest, HarnessError> {
    let mut labels = HashSet::from([BASE_LABEL.to_string()]);
    for s in specs {
        if !labels.insert(s.label()) {
            return Err(HarnessError::DuplicateSubset(s.label()));
        }
    }

    let mut files: Vec<PathBuf> = fs::read_dir(molfile_dir)
        .map_err(io_err(molfile_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|x| x.eq_ignore_ascii_case("mol"))
        })
        .collect();
    if files.is_empty() {
        return Err(HarnessError::NoMolfiles(molfile_dir.to_path_buf()));
    }
    files.sort();

    let mut seen = HashSet::new();
    let mut skipped = Vec::new();
    let mut usable: Vec<(String, PathBuf, Vec<u8>, RasterImage)> = Vec::new();
    for path in files {
        let file = path.file_name().unwrap().to_string_lossy().into_owned();
        let id = path.file_stem().unwrap().to_string_lossy().into_owned();
        if !seen.insert(id.clone()) {
            return Err(HarnessError::DuplicateImageId(id));
        }
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let text = String::from_utf8_lossy(&bytes);
        let outcome = parse_molfile(&text)
            .map_err(|e| e.to_string())
            .and_then(|m| render(&m, opts).map_err(|e| format!("render: {e}")));
        match outcome {
            Ok(img) => usable.push((id, path, bytes, img)),
            Err(reason) => skipped.push(SkippedFile { file, reason }),
        }
    }
    if usable.is_empty() {
        return Err(HarnessError::NothingUsable(molfile_dir.to_path_buf()));
    }

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let ref_dir = out_dir.join(REFERENCE_DIR);
    reset_dir(&ref_dir, "mol")?;
    let base_dir = out_dir.join(BASE_LABEL);
    reset_dir(&base_dir, "png")?;

    let mut entries = Vec::with_capacity(usable.len());
    for (id, _, bytes, img) in &usable {
        let r = ref_dir.join(format!("{id}.mol"));
        fs::write(&r, bytes).map_err(io_err(&r))?;
        save_png(img, &base_dir.join(format!("{id}.png")))?;
        entries.push(ManifestEntry {
            image_id: id.clone(),
            base_image: format!("{BASE_LABEL}/{id}.png"),
            reference_molfile: format!("{REFERENCE_DIR}/{id}.mol"),
        });
    }

    let mut subsets = vec![SubsetInfo {
        label: BASE_LABEL.to_string(),
        damage: None,
        directory: BASE_LABEL.to_string(),
    }];
    for spec in specs {
        let label = spec.label();
        let dir = out_dir.join(&label);
        reset_dir(&dir, "png")?;
        usable
            .par_iter()
            .map(|(id, _, _, img)| {
                let out = spec.apply(img, image_seed(corpus_seed, &label, id));
                save_png(&out, &dir.join(format!("{id}.png")))
            })
            .collect::<Result<Vec<()>, _>>()?;
        subsets.push(SubsetInfo {
            label: label.clone(),
            damage: Some(*spec),
            directory: label,
        });
    }

    let manifest = CorpusManifest {
        corpus_seed,
        render: *opts,
        entries,
        subsets,
        skipped,
    };
    manifest.save(out_dir)?;
    Ok(manifest)
}
