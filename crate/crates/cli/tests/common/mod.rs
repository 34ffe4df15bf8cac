#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latent-fps"))
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    run_with_env(dir, args, &[])
}

pub fn run_with_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .envs(env.iter().copied())
        .output()
        .expect("binary runs")
}

pub fn ok(dir: &Path, args: &[&str]) {
    ok_with_env(dir, args, &[]);
}

pub fn ok_with_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) {
    let out = run_with_env(dir, args, env);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// generate -> train-ae -> encode -> select (fps, random) -> pca -> evaluate -> report
pub fn full_pipeline(dir: &Path, seed: &str) {
    full_pipeline_with_env(dir, seed, &[]);
}

/// Number of files `full_pipeline` leaves behind.
pub const PIPELINE_ARTIFACTS: usize = 14;

pub fn full_pipeline_with_env(dir: &Path, seed: &str, env: &[(&str, &str)]) {
    let ok = |dir: &Path, args: &[&str]| ok_with_env(dir, args, env);
    ok(dir, &["generate", "--output", "features.emb", "--seed", seed]);
    ok(dir, &["train-ae", "--input", "features.emb", "--model", "model.mlp", "--history", "history.csv"]);
    ok(dir, &["encode", "--input", "features.emb", "--model", "model.mlp", "--output", "latent.emb"]);
    ok(dir, &["select", "--input", "latent.emb", "--method", "fps", "--budget", "200", "--output", "fps.csv"]);
    ok(dir, &["select", "--input", "latent.emb", "--method", "random", "--budget", "200", "--output", "random.csv"]);
    ok(dir, &["pca", "--input", "latent.emb", "--selection", "fps.csv", "--output", "proj_fps.csv"]);
    ok(dir, &["pca", "--input", "latent.emb", "--selection", "random.csv", "--output", "proj_random.csv"]);
    ok(dir, &["evaluate", "--features", "features.emb", "--targets", "targets.csv", "--latent", "latent.emb", "--output", "curve.csv"]);
    ok(dir, &["report", "--curve", "curve.csv", "--fps-projection", "proj_fps.csv", "--random-projection", "proj_random.csv", "--output-dir", "report"]);
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}
