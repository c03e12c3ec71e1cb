use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ocsrbench");
const MOCK: &str = env!("CARGO_BIN_EXE_ocsr-mock");

fn molfile_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/molfiles")
}

/// Workspace with a config holding the mock adapters, over the first `n`
/// corpus molfiles.
fn workspace(n: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mols = dir.path().join("mols");
    fs::create_dir(&mols).unwrap();
    let mut files: Vec<PathBuf> = fs::read_dir(molfile_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    for f in files.iter().take(n) {
        fs::copy(f, mols.join(f.file_name().unwrap())).unwrap();
    }
    let adapter = |name: &str, args: &str, kind: &str| {
        format!("[[adapters]]\nname = \"{name}\"\ncommand = \"{MOCK}\"\nargs = [{args}]\noutput_kind = \"{kind}\"\ntimeout_secs = 10\n")
    };
    let cfg = [
        "molfile_dir = \"mols\"\ncorpus_seed = 3\ndamage = [\"blend_40\", \"noise_10\"]\n".to_string(),
        adapter("oracle", "\"oracle\"", "molfile"),
        adapter("third", "\"fail-every\", \"3\"", "molfile"),
        adapter("broken", "\"fail\"", "molfile"),
        adapter("ethanol", "\"smiles\", \"CCO\"", "smiles"),
        "[ensemble]\nfast_a = \"ethanol\"\nfast_b = \"third\"\nfallback = \"oracle\"\n".to_string(),
    ]
    .concat();
    fs::write(dir.path().join("ocsrbench.toml"), cfg).unwrap();
    dir
}

fn ocsr(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_builds_configured_and_only_subsets() {
    let ws = workspace(4);
    let o = ocsr(ws.path(), &["gen"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).starts_with("3 subsets x 4 images"), "{}", stdout(&o));
    let o = ocsr(ws.path(), &["gen", "--only", "blend_40"]);
    assert!(stdout(&o).starts_with("2 subsets x 4 images"), "{}", stdout(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ws.path().join("out/corpus/manifest.json")).unwrap()).unwrap();
    let labels: Vec<&str> = manifest["subsets"].as_array().unwrap().iter().map(|s| s["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["base", "blend_40"]);

    let o = ocsr(ws.path(), &["gen", "--only", "blend_30"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ocsr(ws.path(), &["gen", "--only", "blend_30", "--allow-off-grid"]);
    assert!(o.status.success(), "{o:?}");
    assert!(ws.path().join("out/corpus/blend_30").is_dir());
}

#[test]
fn run_reports_rates_and_exit_codes() {
    let ws = workspace(6);
    assert!(ocsr(ws.path(), &["gen"]).status.success());

    let o = ocsr(ws.path(), &["run", "--adapter", "oracle", "--only", "base"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("oracle base: 6/6 matched (100.0%)"), "{}", stdout(&o));

    let o = ocsr(ws.path(), &["run", "--adapter", "third", "--only", "base"]);
    assert!(o.status.success(), "partial failure still exits 0");
    assert!(stdout(&o).contains("4/6 matched (66.7%)"), "{}", stdout(&o));

    let o = ocsr(ws.path(), &["run", "--adapter", "broken", "--only", "base"]);
    assert!(!o.status.success(), "nothing recognized must exit nonzero");
    assert!(stdout(&o).contains("0/6 matched (0.0%)"));

    let o = ocsr(ws.path(), &["run", "--adapter", "missing"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown adapter"));
    let o = ocsr(ws.path(), &["run"]);
    assert_eq!(o.status.code(), Some(2), "clap usage error");
    let o = ocsr(ws.path(), &["run", "--adapter", "oracle", "--only", "distort_10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parallelism_does_not_change_results() {
    let ws = workspace(9);
    assert!(ocsr(ws.path(), &["gen"]).status.success());
    let results = ws.path().join("out/results/third/noise_10.json");
    assert!(ocsr(ws.path(), &["run", "--adapter", "third", "--only", "noise_10", "--parallelism", "1"]).status.success());
    let one = fs::read(&results).unwrap();
    assert!(ocsr(ws.path(), &["run", "--adapter", "third", "--only", "noise_10", "--parallelism", "8"]).status.success());
    assert_eq!(one, fs::read(&results).unwrap());
}

#[test]
fn timeout_flag_overrides_config() {
    let ws = workspace(2);
    assert!(ocsr(ws.path(), &["gen", "--only", "base"]).status.success());
    let cfg = ws.path().join("ocsrbench.toml");
    let mut text = fs::read_to_string(&cfg).unwrap();
    text.push_str(&format!(
        "[[adapters]]\nname = \"slow\"\ncommand = \"{MOCK}\"\nargs = [\"sleep\", \"5\"]\noutput_kind = \"molfile\"\n"
    ));
    fs::write(&cfg, text).unwrap();
    let o = ocsr(ws.path(), &["run", "--adapter", "slow", "--timeout-secs", "0.3"]);
    assert!(!o.status.success());
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ws.path().join("out/results/slow/base.json")).unwrap()).unwrap();
    for o in r["outcomes"].as_array().unwrap() {
        assert_eq!(o["reason"], "timeout");
    }
}

#[test]
fn eval_and_report() {
    let ws = workspace(5);
    let o = ocsr(ws.path(), &["eval"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no results"), "{o:?}");

    assert!(ocsr(ws.path(), &["gen"]).status.success());
    assert!(ocsr(ws.path(), &["run", "--adapter", "oracle"]).status.success());
    let o = ocsr(ws.path(), &["ensemble", "--only", "base"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("fast pair agreed on"), "{}", stdout(&o));
    assert!(ws.path().join("out/results/ensemble(ethanol+third|oracle)/base.json").is_file());

    let o = ocsr(ws.path(), &["eval"]);
    assert!(o.status.success(), "{o:?}");
    let report = ws.path().join("out/report");
    let rates = fs::read_to_string(report.join("rates.csv")).unwrap();
    assert!(rates.starts_with("adapter,base,blend_40,noise_10\n"), "{rates}");
    assert!(rates.contains("\noracle,100.0,100.0,100.0\n"), "{rates}");
    assert!(rates.contains("\nensemble(ethanol+third|oracle),100.0,,\n"), "{rates}");
    assert!(report.join("details/oracle/base.tsv").is_file());

    fs::remove_file(report.join("report.md")).unwrap();
    let o = ocsr(ws.path(), &["report", "--format", "markdown"]);
    assert!(o.status.success());
    assert!(fs::read_to_string(report.join("report.md")).unwrap().contains("| oracle | 100.0% |"));
}

#[test]
fn report_from_rate_table() {
    let ws = tempfile::tempdir().unwrap();
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/published_rates.tsv");
    let o = ocsr(ws.path(), &["report", "--rates", fixture.to_str().unwrap(), "--format", "csv", "--out", "r"]);
    assert!(o.status.success(), "{o:?}");
    let dec = fs::read_to_string(ws.path().join("r/decrease.csv")).unwrap();
    let decimer = dec.lines().find(|l| l.starts_with("decimer,")).unwrap();
    let cells: Vec<&str> = decimer.split(',').collect();
    assert_eq!(cells[11], "-1.8", "compress_20 from 1-dp inputs");
}
