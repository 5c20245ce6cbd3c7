// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a serde_json::Value,
    inputs: &'a [PathBuf],
    outputs: &'a [PathBuf],
    seed: Option<u64>,
    tool_version: &'static str,
    wall_clock_seconds: f64,
}

/// Bookkeeping for one command invocation: every artifact written goes
/// through here so the manifest can list it.
pub struct Run {
    command: &'static str,
    started: Instant,
    manifest: Option<PathBuf>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    config: serde_json::Value,
    seed: Option<u64>,
}

impl Run {
    pub fn new(command: &'static str, manifest: Option<PathBuf>) -> Self {
        Self {
            command,
            started: Instant::now(),
            manifest,
            inputs: Vec::new(),
            outputs: Vec::new(),
            config: serde_json::Value::Null,
            seed: None,
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn config<T: Serialize>(&mut self, config: &T, seed: Option<u64>) {
        self.config = serde_json::to_value(config).unwrap_or(serde_json::Value::Null);
        self.seed = seed;
    }

    pub fn write(&mut self, path: PathBuf, contents: &str) -> CliResult<()> {
        write_atomic(&path, contents.as_bytes())?;
        self.outputs.push(path);
        Ok(())
    }

    pub fn finish(self) -> CliResult<()> {
        let Some(path) = &self.manifest else {
            return Ok(());
        };
        let m = Manifest {
            command: self.command,
            config: &self.config,
            inputs: &self.inputs,
            outputs: &self.outputs,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        write_atomic(path, to_json(&m)?.as_bytes())
    }
}
