use std::fs;
use std::path::PathBuf;

use ocsr_bench::chemgraph::{parse_molfile, Molecule};

pub fn molfile_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/molfiles")
}

/// `(file stem, molecule)` for every bundled molfile, sorted by name.
pub fn molecules() -> Vec<(String, Molecule)> {
    let mut files: Vec<PathBuf> = fs::read_dir(molfile_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "mol"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            let m = parse_molfile(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (p.file_stem().unwrap().to_string_lossy().into_owned(), m)
        })
        .collect()
}
