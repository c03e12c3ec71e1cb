use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use ocsr_bench::chemgraph::{parse_molfile, Molecule};
use ocsr_bench::degrade::{DamageSpec, BASE_LABEL};
use ocsr_bench::ensemble::run_ensemble;
use ocsr_bench::evaluate::{emit_report, parse_rate_table, score_subset, ReportFormat, SubsetResult};
use ocsr_bench::harness::{build_corpus, run_subset, CorpusManifest, RecognitionOutcome, ResultsFile, TIMING_SUFFIX};

use crate::config::RunConfig;

/// Bad invocation (as opposed to a failed stage); exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

const SCORES_FILE: &str = "scores.json";

pub fn gen(cfg: &RunConfig, only: &[String]) -> Result<ExitCode> {
    let specs: Vec<DamageSpec> = if only.is_empty() {
        cfg.damage_specs()?
    } else {
        only.iter()
            .filter(|l| *l != BASE_LABEL)
            .map(|l| {
                DamageSpec::from_label(l, cfg.allow_off_grid)
                    .map_err(|e| UsageError(format!("--only {l}: {e}")).into())
            })
            .collect::<Result<_>>()?
    };
    let m = build_corpus(&cfg.molfile_dir, &cfg.corpus_dir, &specs, &cfg.render, cfg.corpus_seed)?;
    for s in &m.skipped {
        eprintln!("skipped {}: {}", s.file, s.reason);
    }
    println!(
        "{} subsets x {} images written to {} ({} skipped)",
        m.subsets.len(),
        m.entries.len(),
        cfg.corpus_dir.display(),
        m.skipped.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_manifest(cfg: &RunConfig) -> Result<CorpusManifest> {
    CorpusManifest::load(&cfg.corpus_dir).with_context(|| {
        format!("no corpus at {} (run `ocsrbench gen` first)", cfg.corpus_dir.display())
    })
}

fn references(cfg: &RunConfig, m: &CorpusManifest) -> Result<Vec<(String, Molecule)>> {
    m.entries
        .iter()
        .map(|e| {
            let p = m.reference_path(&cfg.corpus_dir, e);
            let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let mol = parse_molfile(&text).with_context(|| format!("parsing {}", p.display()))?;
            Ok((e.image_id.clone(), mol))
        })
        .collect()
}

fn selected_subsets(m: &CorpusManifest, only: &[String]) -> Result<Vec<String>> {
    if only.is_empty() {
        return Ok(m.subsets.iter().map(|s| s.label.clone()).collect());
    }
    for l in only {
        if m.subset(l).is_err() {
            let known: Vec<&str> = m.subsets.iter().map(|s| s.label.as_str()).collect();
            return Err(UsageError(format!("subset {l:?} is not in the corpus ({})", known.join(", "))).into());
        }
    }
    Ok(only.to_vec())
}

fn summary(r: &SubsetResult, outcomes: &[RecognitionOutcome]) -> String {
    let recognized = outcomes.iter().filter(|o| o.molecule().is_some()).count();
    format!(
        "{} {}: {}/{} matched ({}%), {} recognized, {} failed",
        r.adapter,
        r.subset_label,
        r.matches,
        r.total,
        r.rate_percent(),
        recognized,
        outcomes.len() - recognized
    )
}

fn exit_for(recognized: usize) -> ExitCode {
    if recognized == 0 {
        eprintln!("no image was recognized");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn recognized(outcomes: &[RecognitionOutcome]) -> usize {
    outcomes.iter().filter(|o| o.molecule().is_some()).count()
}

pub fn run(cfg: &RunConfig, adapter: &str, only: &[String]) -> Result<ExitCode> {
    let a = cfg.adapter(adapter).map_err(|e| UsageError(e.to_string()))?;
    let m = load_manifest(cfg)?;
    let refs = references(cfg, &m)?;
    let mut ok = 0;
    for label in selected_subsets(&m, only)? {
        let outcomes = run_subset(a, &m, &cfg.corpus_dir, &label, cfg.parallelism)?;
        ResultsFile { adapter: a.name.clone(), subset: label.clone(), outcomes: outcomes.clone() }
            .save(&cfg.results_dir)?;
        let score = score_subset(&a.name, &label, &outcomes, &refs)?;
        println!("{}", summary(&score, &outcomes));
        ok += recognized(&outcomes);
    }
    Ok(exit_for(ok))
}

pub fn ensemble(cfg: &RunConfig, only: &[String]) -> Result<ExitCode> {
    let e = cfg.ensemble()?;
    let name = e.name();
    let m = load_manifest(cfg)?;
    let refs = references(cfg, &m)?;
    let mut ok = 0;
    for label in selected_subsets(&m, only)? {
        let run = run_ensemble(&e, &m, &cfg.corpus_dir, &label, cfg.parallelism)?;
        for (adapter, outcomes) in [(&name, &run.outcomes), (&e.fast_a.name, &run.fast_a), (&e.fast_b.name, &run.fast_b)] {
            ResultsFile { adapter: adapter.clone(), subset: label.clone(), outcomes: outcomes.clone() }
                .save(&cfg.results_dir)?;
            let score = score_subset(adapter, &label, outcomes, &refs)?;
            println!("{}", summary(&score, outcomes));
        }
        println!(
            "{name} {label}: fast pair agreed on {}/{}, fallback ran {} times",
            run.agreements,
            run.outcomes.len(),
            run.fallback.len()
        );
        ok += recognized(&run.outcomes);
    }
    Ok(exit_for(ok))
}

/// Results files under `results_dir/<adapter>/`, sorted; timing sidecars
/// are skipped.
fn results_files(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    let Ok(adapters) = fs::read_dir(dir) else { return Ok(out) };
    for a in adapters {
        let a = a?.path();
        if !a.is_dir() {
            continue;
        }
        for f in fs::read_dir(&a)? {
            let p = f?.path();
            let name = p.file_name().unwrap_or_default().to_string_lossy();
            if name.ends_with(".json") && !name.ends_with(TIMING_SUFFIX) {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn eval(cfg: &RunConfig, only: &[String], formats: &[ReportFormat]) -> Result<ExitCode> {
    let files = results_files(&cfg.results_dir)?;
    if files.is_empty() {
        bail!("no results in {}", cfg.results_dir.display());
    }
    let m = load_manifest(cfg)?;
    let refs = references(cfg, &m)?;
    let mut scores = Vec::new();
    for p in files {
        let r = ResultsFile::load(&p)?;
        if !only.is_empty() && !only.contains(&r.subset) {
            continue;
        }
        scores.push(score_subset(&r.adapter, &r.subset, &r.outcomes, &refs)?);
    }
    if scores.is_empty() {
        bail!("no results for the selected subsets in {}", cfg.results_dir.display());
    }
    fs::create_dir_all(&cfg.report_dir)?;
    let p = cfg.report_dir.join(SCORES_FILE);
    fs::write(&p, serde_json::to_string_pretty(&scores)? + "\n").with_context(|| format!("writing {}", p.display()))?;
    write_reports(&scores, &cfg.report_dir, formats)
}

pub fn report(cfg: &RunConfig, rates: Option<&Path>, out: Option<&Path>, formats: &[ReportFormat]) -> Result<ExitCode> {
    let scores: Vec<SubsetResult> = match rates {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_rate_table(&text).with_context(|| p.display().to_string())?
        }
        None => {
            let p = cfg.report_dir.join(SCORES_FILE);
            let text = fs::read_to_string(&p)
                .with_context(|| format!("no results: {} is missing (run `ocsrbench eval` first)", p.display()))?;
            serde_json::from_str(&text).with_context(|| p.display().to_string())?
        }
    };
    if scores.is_empty() {
        bail!("no results");
    }
    write_reports(&scores, out.unwrap_or(&cfg.report_dir), formats)
}

fn write_reports(scores: &[SubsetResult], dir: &Path, formats: &[ReportFormat]) -> Result<ExitCode> {
    for &f in formats {
        for p in emit_report(scores, f, dir)? {
            if p.components().any(|c| c.as_os_str() == "details") {
                continue;
            }
            println!("wrote {}", p.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
