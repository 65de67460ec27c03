#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sgmfs::data::Dataset;
use sgmfs::synthetic::SyntheticSpec;

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sgmfs"));
    cmd.env_remove("SGMFS_THREADS").env_remove("RUST_LOG");
    cmd
}

/// Runs the binary with `args`, plus `SGMFS_THREADS` when given.
pub fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("SGMFS_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Writes `ds` as a CSV with label columns last.
pub fn write_csv(ds: &Dataset, path: &Path) {
    let mut text = String::new();
    let header: Vec<String> = (0..ds.n_features())
        .map(|j| format!("f{j}"))
        .chain((0..ds.n_labels()).map(|l| format!("y{l}")))
        .collect();
    writeln!(text, "{}", header.join(",")).unwrap();
    for i in 0..ds.n_samples() {
        let row: Vec<String> = ds
            .features()
            .column(i)
            .iter()
            .chain(ds.labels().row(i).iter())
            .map(|v| v.to_string())
            .collect();
        writeln!(text, "{}", row.join(",")).unwrap();
    }
    std::fs::write(path, text).unwrap();
}

/// A small synthetic CSV dataset in `dir`.
pub fn synthetic_csv(dir: &Path, n: usize, d: usize, c: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("synthetic_{n}_{d}_{c}_{seed}.csv"));
    write_csv(&SyntheticSpec::new(n, d, c, seed).generate(), &path);
    path
}

/// Same data as a Mulan ARFF file with its XML label manifest next to it.
pub fn synthetic_mulan(dir: &Path, n: usize, d: usize, c: usize, seed: u64) -> PathBuf {
    let ds = SyntheticSpec::new(n, d, c, seed).generate();
    let mut arff = String::from("@relation synthetic\n");
    for j in 0..d {
        writeln!(arff, "@attribute f{j} numeric").unwrap();
    }
    for l in 0..c {
        writeln!(arff, "@attribute y{l} {{0,1}}").unwrap();
    }
    arff.push_str("@data\n");
    for i in 0..n {
        let row: Vec<String> = ds
            .features()
            .column(i)
            .iter()
            .chain(ds.labels().row(i).iter())
            .map(|v| v.to_string())
            .collect();
        writeln!(arff, "{}", row.join(",")).unwrap();
    }
    let mut xml =
        String::from("<?xml version=\"1.0\"?>\n<labels xmlns=\"http://mulan.sourceforge.net/labels\">\n");
    for l in 0..c {
        writeln!(xml, "  <label name=\"y{l}\"></label>").unwrap();
    }
    xml.push_str("</labels>\n");
    let path = dir.join("synthetic.arff");
    std::fs::write(&path, arff).unwrap();
    std::fs::write(dir.join("synthetic.xml"), xml).unwrap();
    path
}

/// Splits a CSV output into its manifest JSON and the remaining CSV text.
pub fn split_manifest(text: &str) -> (serde_json::Value, &str) {
    let (first, rest) = text.split_once('\n').expect("manifest line");
    let json = first.strip_prefix("# manifest: ").expect("manifest prefix");
    (serde_json::from_str(json).expect("manifest is JSON"), rest)
}
