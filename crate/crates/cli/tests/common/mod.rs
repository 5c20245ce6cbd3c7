#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn qsynth() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qsynth"));
    c.env_remove("QSYNTH_THREADS");
    c
}

pub fn run(args: &[&str]) -> Output {
    qsynth().args(args).output().expect("spawn qsynth")
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    qsynth()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn qsynth")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[track_caller]
pub fn ok(o: &Output) {
    assert_eq!(code(o), 0, "stderr: {}", stderr(o));
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
