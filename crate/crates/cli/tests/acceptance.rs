//! Acceptance suite: one PASS/FAIL line per headline criterion. Runs
//! without the libtest harness so the lines are always printed:
//!
//!     cargo test -p ocsr-bench-cli --test acceptance

#[path = "../../core/tests/common/oracle.rs"]
#[allow(dead_code)]
mod oracle;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use ocsr_bench::chemgraph::{canonical_id, normalize_aromatic, parse_molfile, parse_smiles, Molecule};
use ocsr_bench::degrade::{
    binarize_otsu, blend_black, impulse_noise, jpeg_roundtrip, psnr, quantization_table, shepards_distort,
    BASE_LUMA_TABLE, DEFAULT_POINTS,
};
use ocsr_bench::ensemble::combine_all;
use ocsr_bench::evaluate::{decrease_table, parse_rate_table, DecreaseCell, SubsetResult};
use ocsr_bench::harness::{FailureReason, RecognitionOutcome};
use ocsr_bench::render::{render, RasterImage, RenderOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const BIN: &str = env!("CARGO_BIN_EXE_ocsrbench");
const MOCK: &str = env!("CARGO_BIN_EXE_ocsr-mock");

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus() -> Vec<(String, Molecule)> {
    let mut files: Vec<PathBuf> = fs::read_dir(root().join("corpus/molfiles"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "mol"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let m = parse_molfile(&fs::read_to_string(p).unwrap()).unwrap();
            (p.file_stem().unwrap().to_string_lossy().into_owned(), m)
        })
        .collect()
}

fn renderings() -> Vec<(String, RasterImage)> {
    corpus()
        .into_iter()
        .map(|(n, m)| {
            let img = render(&m, &RenderOptions::default()).unwrap();
            (n, img)
        })
        .collect()
}

type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(budget: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure!(t <= budget, "took {:.1}s, budget {:.0}s", t.as_secs_f64(), budget.as_secs_f64());
    Ok(())
}

fn percent_cells(text: &str) -> Vec<(String, String, f64)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let mut out = Vec::new();
    for l in lines {
        let f: Vec<&str> = l.split('\t').collect();
        for (label, cell) in header[1..].iter().zip(&f[1..]) {
            out.push((f[0].to_string(), label.to_string(), cell.trim_end_matches('%').parse().unwrap()));
        }
    }
    out
}

fn decrease_reproduction() -> Result<(), String> {
    let start = Instant::now();
    let rates = fs::read_to_string(root().join("fixtures/published_rates.tsv")).unwrap();
    let published = fs::read_to_string(root().join("fixtures/published_decrease.tsv")).unwrap();
    let results = parse_rate_table(&rates).map_err(|e| e.to_string())?;
    ensure!(results.len() == 80, "{} rate cells, expected 80", results.len());
    let dec = decrease_table(&results).map_err(|e| e.to_string())?;
    let cells = percent_cells(&published);
    ensure!(cells.len() == 80, "{} published cells", cells.len());
    let mut worst = 0.0f64;
    for (a, l, want) in &cells {
        let got = match dec.get(a, l) {
            Some(DecreaseCell::Tenths(t)) => t as f64 / 10.0,
            other => return Err(format!("{a}/{l}: {other:?}")),
        };
        worst = worst.max((got - want).abs());
        ensure!((got - want).abs() <= 0.15 + 1e-9, "{a}/{l}: {got} vs published {want}");
    }
    for (a, l, want) in [("decimer", "compress_20", -1.9), ("molvec", "compress_99", 51.3)] {
        let Some(DecreaseCell::Tenths(t)) = dec.get(a, l) else { return Err(format!("{a}/{l} missing")) };
        ensure!((t as f64 / 10.0 - want).abs() <= 0.15 + 1e-9, "{a}/{l}: {t} tenths");
    }
    println!("      max deviation {worst:.2} pp over 80 cells");
    within(Duration::from_secs(1), start)
}

fn rate_arithmetic() -> Result<(), String> {
    let start = Instant::now();
    for (m, want) in [(122, "94.6"), (115, "89.1"), (106, "82.2"), (95, "73.6")] {
        let got = SubsetResult::from_counts("x", "base", m, 129).rate_percent();
        ensure!(got == want, "{m}/129 -> {got}, expected {want}");
    }
    within(Duration::from_secs(1), start)
}

fn canonicalization_oracle() -> Result<(), String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_97);
    let (mut same, mut decoys) = (0, 0);
    while same < 500 || decoys < 500 {
        let a = oracle::random_molecule(&mut rng, 9);
        let relabel = same < 500;
        let b = if relabel {
            oracle::scramble(&mut rng, &a)
        } else {
            let m = oracle::mutate(&mut rng, &a);
            oracle::scramble(&mut rng, &m)
        };
        let truth = oracle::isomorphic(&normalize_aromatic(&a), &normalize_aromatic(&b));
        if relabel {
            ensure!(truth, "oracle rejects a relabeling");
            same += 1;
        } else if truth {
            continue;
        } else {
            decoys += 1;
        }
        ensure!(
            (canonical_id(&a) == canonical_id(&b)) == truth,
            "disagreement: {} vs {} (isomorphic: {truth})",
            canonical_id(&a),
            canonical_id(&b)
        );
    }
    within(Duration::from_secs(300), start)
}

fn transform_identities() -> Result<(), String> {
    let imgs = renderings();
    for (n, img) in &imgs {
        ensure!(&blend_black(img, 0) == img, "{n}: blend 0% changed the image");
        ensure!(&impulse_noise(img, 0, 11) == img, "{n}: noise 0 changed the image");
    }
    for (n, img) in imgs.iter().step_by(4) {
        ensure!(&shepards_distort(img, 0.0, 5, DEFAULT_POINTS) == img, "{n}: zero warp changed the image");
    }
    let levels = RasterImage::new(256, 1, (0..=255).collect()).unwrap();
    for p in [20u8, 40, 60, 80] {
        let out = blend_black(&levels, p);
        for v in 0..=255u32 {
            let want = (v as f64 * (100 - p) as f64 / 100.0).round() as u8;
            ensure!(out.get(v, 0) == want, "blend {p}% of {v}: {} != {want}", out.get(v, 0));
        }
    }
    for seed in 0..100u64 {
        let (n, img) = &imgs[(seed as usize * 7) % imgs.len()];
        let out = shepards_distort(img, 0.5, seed, DEFAULT_POINTS);
        let (w, h) = (img.width() - 1, img.height() - 1);
        for (x, y) in [(0, 0), (w, 0), (0, h), (w, h)] {
            ensure!(out.get(x, y) == img.get(x, y), "{n} seed {seed}: corner ({x},{y}) moved");
        }
    }
    Ok(())
}

fn compression_monotonicity() -> Result<(), String> {
    ensure!(quantization_table(50) == BASE_LUMA_TABLE, "quality-50 table differs from the base table");
    let imgs = renderings();
    let mut last = f64::INFINITY;
    let mut line = Vec::new();
    for q in [100u8, 80, 60, 40, 20, 1] {
        let mean = imgs
            .iter()
            .map(|(_, img)| psnr(img, &jpeg_roundtrip(img, q)).min(100.0))
            .sum::<f64>()
            / imgs.len() as f64;
        line.push(format!("q{q}={mean:.2}"));
        ensure!(mean <= last, "mean PSNR rises at quality {q}: {mean} > {last}");
        last = mean;
    }
    println!("      mean PSNR dB: {}", line.join(" "));
    Ok(())
}

fn binarization_recovery() -> Result<(), String> {
    for (n, img) in renderings() {
        for p in [20u8, 40, 60, 80] {
            ensure!(binarize_otsu(&blend_black(&img, p)) == img, "{n}: blend {p}% not recovered");
        }
    }
    Ok(())
}

fn ocsr(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mols = root().join("corpus/molfiles");
    let adapter = |name: &str, args: &str| {
        format!("[[adapters]]\nname = \"{name}\"\ncommand = \"{MOCK}\"\nargs = [{args}]\noutput_kind = \"molfile\"\ntimeout_secs = 10\n")
    };
    let cfg = [
        format!("molfile_dir = \"{}\"\ncorpus_seed = 2024\n", mols.display()),
        adapter("oracle", "\"oracle\""),
        adapter("third", "\"fail-every\", \"3\""),
        adapter("slow", "\"sleep\", \"30\""),
    ]
    .concat();
    fs::write(dir.path().join("ocsrbench.toml"), cfg).unwrap();
    dir
}

fn results(dir: &Path, adapter: &str, subset: &str) -> serde_json::Value {
    let p = dir.join(format!("out/results/{adapter}/{subset}.json"));
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn end_to_end() -> Result<(), String> {
    let start = Instant::now();
    let ws = workspace();
    let d = ws.path();
    let o = ocsr(d, &["gen", "--only", "base"]);
    ensure!(o.status.success(), "gen failed: {}", String::from_utf8_lossy(&o.stderr));

    let o = ocsr(d, &["run", "--adapter", "oracle", "--only", "base"]);
    let out = String::from_utf8_lossy(&o.stdout);
    ensure!(o.status.success() && out.contains("129/129 matched (100.0%)"), "oracle: {out}");

    let o = ocsr(d, &["run", "--adapter", "third", "--only", "base"]);
    let out = String::from_utf8_lossy(&o.stdout);
    let r = results(d, "third", "base");
    let failed = r["outcomes"].as_array().unwrap().iter().filter(|o| o["status"] == "failed").count();
    ensure!(o.status.success(), "fail-every-third exited nonzero");
    ensure!((42..=44).contains(&failed), "fail-every-third: {failed} failures; {out}");
    // 66.7% ± one image: 85, 86 or 87 of 129
    ensure!(["(65.9%)", "(66.7%)", "(67.4%)"].iter().any(|r| out.contains(r)), "{out}");

    let o = ocsr(d, &["run", "--adapter", "slow", "--only", "base", "--timeout-secs", "0.2", "--parallelism", "32"]);
    let out = String::from_utf8_lossy(&o.stdout);
    ensure!(out.contains("0/129 matched (0.0%)"), "timeout: {out}");
    ensure!(!o.status.success(), "all-failed run must exit nonzero");
    let r = results(d, "slow", "base");
    let outcomes = r["outcomes"].as_array().unwrap();
    ensure!(outcomes.len() == 129, "{} outcomes", outcomes.len());
    ensure!(
        outcomes.iter().all(|o| o["status"] == "failed" && o["reason"] == "timeout"),
        "not every outcome is failed(timeout)"
    );
    within(Duration::from_secs(120), start)
}

fn ensemble_semantics() -> Result<(), String> {
    let rec = |id: &str, s: &str| RecognitionOutcome::recognized(id, parse_smiles(s).unwrap(), s.into(), 0.0);
    let ids: Vec<String> = (0..50).map(|i| format!("s{i:02}")).collect();
    let agrees = |i: usize| i % 5 != 1 && i % 5 != 3; // 30 of 50
    let a: Vec<_> = ids.iter().map(|id| rec(id, "CCO")).collect();
    let b: Vec<_> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| match (agrees(i), i % 2) {
            (true, _) => rec(id, "OCC"),
            (false, 0) => RecognitionOutcome::failed(id, FailureReason::Timeout, String::new(), 0.0),
            (false, _) => rec(id, "COC"),
        })
        .collect();
    let calls = Mutex::new(Vec::new());
    let run = combine_all(&a, &b, true, |id| {
        calls.lock().unwrap().push(id.to_string());
        rec(id, "N")
    });
    let mut called = calls.into_inner().unwrap();
    called.sort();
    let expected: Vec<String> = ids.iter().enumerate().filter(|&(i, _)| !agrees(i)).map(|(_, s)| s.clone()).collect();
    ensure!(expected.len() == 20, "fixture is not 60/40");
    ensure!(called == expected, "fallback called on {called:?}");
    ensure!(run.agreements == 30, "{} agreements", run.agreements);
    Ok(())
}

fn tree_hash(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let h = Sha256::digest(fs::read(&p).unwrap()).to_vec();
                out.push((p.strip_prefix(root).unwrap().display().to_string(), h));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Result<(), String> {
    let (a, b) = (workspace(), workspace());
    for ws in [&a, &b] {
        let o = ocsr(ws.path(), &["gen"]);
        ensure!(o.status.success(), "gen failed: {}", String::from_utf8_lossy(&o.stderr));
    }
    let (ha, hb) = (tree_hash(&a.path().join("out/corpus")), tree_hash(&b.path().join("out/corpus")));
    ensure!(ha.len() == 20 * 129 + 129 + 1, "unexpected tree: {} files", ha.len());
    ensure!(ha == hb, "image trees differ between identical gen runs");

    let mut outputs = Vec::new();
    for p in ["1", "8"] {
        let o = ocsr(a.path(), &["run", "--adapter", "third", "--only", "distort_30", "--parallelism", p]);
        ensure!(o.status.success(), "run failed");
        outputs.push(fs::read(a.path().join("out/results/third/distort_30.json")).unwrap());
    }
    ensure!(outputs[0] == outputs[1], "results differ between parallelism 1 and 8");
    Ok(())
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("Decrease matrix reproduced from published rates (±0.15 pp)", decrease_reproduction),
        ("Rate arithmetic over 129 images", rate_arithmetic),
        ("Canonical id agrees with brute-force isomorphism", canonicalization_oracle),
        ("Transform identities, blend levels, fixed corners", transform_identities),
        ("Compression monotonicity and quality-50 table", compression_monotonicity),
        ("Binarization recovers blended renderings", binarization_recovery),
        ("End-to-end closed loop with mock adapters", end_to_end),
        ("Ensemble invokes fallback only on disagreement", ensemble_semantics),
        ("Determinism of gen and run_subset", determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("PASS  {name} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.1}s): {why}");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
