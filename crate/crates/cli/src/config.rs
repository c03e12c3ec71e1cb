//! `ocsrbench.toml`: one file describing paths, the damage grid, adapters
//! and the ensemble. Every field is optional; relative paths are resolved
//! against the directory holding the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ocsr_bench::degrade::DamageSpec;
use ocsr_bench::ensemble::EnsembleConfig;
use ocsr_bench::harness::AdapterConfig;
use ocsr_bench::render::RenderOptions;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub molfile_dir: PathBuf,
    pub corpus_dir: PathBuf,
    pub results_dir: PathBuf,
    pub report_dir: PathBuf,
    pub corpus_seed: u64,
    pub parallelism: usize,
    pub allow_off_grid: bool,
    /// Damaged subsets to generate, by label. Defaults to the full grid.
    pub damage: Vec<String>,
    pub render: RenderOptions,
    pub adapters: Vec<AdapterConfig>,
    pub ensemble: Option<EnsembleRef>,
}

/// Ensemble members, named from `adapters`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleRef {
    pub fast_a: String,
    pub fast_b: String,
    pub fallback: String,
    #[serde(default = "yes")]
    pub lazy_fallback: bool,
}

fn yes() -> bool {
    true
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            molfile_dir: "corpus/molfiles".into(),
            corpus_dir: "out/corpus".into(),
            results_dir: "out/results".into(),
            report_dir: "out/report".into(),
            corpus_seed: 0,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            allow_off_grid: false,
            damage: DamageSpec::default_grid().iter().map(DamageSpec::label).collect(),
            render: RenderOptions::default(),
            adapters: Vec::new(),
            ensemble: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.molfile_dir, &mut cfg.corpus_dir, &mut cfg.results_dir, &mut cfg.report_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn damage_specs(&self) -> Result<Vec<DamageSpec>> {
        self.damage
            .iter()
            .map(|l| DamageSpec::from_label(l, self.allow_off_grid).with_context(|| format!("damage subset {l:?}")))
            .collect()
    }

    pub fn adapter(&self, name: &str) -> Result<&AdapterConfig> {
        match self.adapters.iter().find(|a| a.name == name) {
            Some(a) => Ok(a),
            None => {
                let known: Vec<&str> = self.adapters.iter().map(|a| a.name.as_str()).collect();
                bail!("unknown adapter {name:?} (configured: {})", if known.is_empty() { "none".into() } else { known.join(", ") })
            }
        }
    }

    pub fn ensemble(&self) -> Result<EnsembleConfig> {
        let Some(e) = &self.ensemble else { bail!("no [ensemble] section in the config") };
        let cfg = EnsembleConfig {
            fast_a: self.adapter(&e.fast_a)?.clone(),
            fast_b: self.adapter(&e.fast_b)?.clone(),
            fallback: self.adapter(&e.fallback)?.clone(),
            lazy_fallback: e.lazy_fallback,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_full_grid() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.damage_specs().unwrap().len(), 19);
        assert_eq!(cfg.damage[9], "compress_20");
    }

    #[test]
    fn parses_a_full_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(
            &p,
            r#"
corpus_dir = "corp"
corpus_seed = 9
damage = ["blend_40", "compress_99"]
[render]
scale = 40.0
[[adapters]]
name = "a"
command = "a-bin"
output_kind = "smiles"
[[adapters]]
name = "b"
command = "b-bin"
args = ["--in", "{image}"]
output_kind = "molfile"
timeout_secs = 5
[[adapters]]
name = "c"
command = "c-bin"
output_kind = "smiles"
[ensemble]
fast_a = "a"
fast_b = "b"
fallback = "c"
"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&p).unwrap();
        assert_eq!(cfg.corpus_dir, dir.path().join("corp"));
        assert_eq!(cfg.render.scale, 40.0);
        assert_eq!(cfg.render.padding, 30);
        assert_eq!(cfg.damage_specs().unwrap()[1].param, 1);
        assert_eq!(cfg.ensemble().unwrap().name(), "ensemble(a+b|c)");
        assert!(cfg.adapter("zzz").is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_off_grid() {
        assert!(toml::from_str::<RunConfig>("colour = 1").is_err());
        let cfg: RunConfig = toml::from_str("damage = [\"blend_30\"]").unwrap();
        assert!(cfg.damage_specs().is_err());
        let cfg: RunConfig = toml::from_str("damage = [\"blend_30\"]\nallow_off_grid = true").unwrap();
        assert_eq!(cfg.damage_specs().unwrap()[0].param, 30);
    }
}
