// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Parsing of system, search and state arguments shared by the commands.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qsynth::cesium::{
    build_restricted_system, f3_x_state, Aux, CesiumParams, DEFAULT_PRESET, RESTRICTED_DIM,
};
use qsynth::control::ControlSystem;
use qsynth::linalg::{haar_random_state, rng_from_seed, StateVector, C64};
use qsynth::search::SearchConfig;

use crate::error::{CliError, CliResult};
use crate::output::Run;

pub fn read_json_value(path: &Path, run: &mut Run) -> CliResult<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::field(&path.display().to_string(), e))?;
    run.input(path);
    serde_json::from_str(&text).map_err(|e| CliError::field(&path.display().to_string(), e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, run: &mut Run) -> CliResult<T> {
    let v = read_json_value(path, run)?;
    from_value(v, &path.display().to_string())
}

/// Deserializes `v`, naming the offending field on failure.
pub fn from_value<T: DeserializeOwned>(v: serde_json::Value, what: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::field(what, inner)
        } else {
            CliError::field(&format!("{what}: {path}"), inner)
        }
    })
}

/// Overlays the keys of `patch` onto the serialized `base`; unknown keys
/// are caught when deserializing the result.
pub fn merge<T: Serialize + DeserializeOwned>(
    base: &T,
    patch: serde_json::Value,
    what: &str,
) -> CliResult<T> {
    let mut v = serde_json::to_value(base).map_err(|e| CliError::Internal(e.to_string()))?;
    match (v.as_object_mut(), patch) {
        (Some(obj), serde_json::Value::Object(p)) => obj.extend(p),
        (_, serde_json::Value::Null) => {}
        _ => return Err(CliError::field(what, "expected a JSON object")),
    }
    from_value(v, what)
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// Parameter preset.
    #[arg(long, default_value = DEFAULT_PRESET)]
    pub preset: String,
    /// JSON file overriding preset fields.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Auxiliary F=4 stretched state: +4 or -4.
    #[arg(long, default_value = "+4", allow_hyphen_values = true)]
    pub aux: String,
}

impl SystemArgs {
    pub fn params(&self, run: &mut Run) -> CliResult<CesiumParams> {
        let base = CesiumParams::preset(&self.preset)?;
        let params = match &self.params {
            Some(p) => merge(&base, read_json_value(p, run)?, "params")?,
            None => base,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn aux(&self) -> CliResult<Aux> {
        let m: i32 = self
            .aux
            .trim_start_matches('+')
            .parse()
            .map_err(|_| CliError::field("aux", format!("expected +4 or -4, got `{}`", self.aux)))?;
        Ok(Aux::from_m(m)?)
    }

    pub fn build(&self, run: &mut Run) -> CliResult<(CesiumParams, ControlSystem)> {
        let params = self.params(run)?;
        let sys = build_restricted_system(&params, self.aux()?)?;
        Ok((params, sys))
    }
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// JSON file overriding search configuration fields.
    #[arg(long = "search-config")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub segments: Option<usize>,
    /// Segment duration in seconds.
    #[arg(long)]
    pub segment_duration: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub goal: Option<f64>,
}

impl SearchArgs {
    pub fn build(
        &self,
        sys: &ControlSystem,
        params: &CesiumParams,
        run: &mut Run,
    ) -> CliResult<SearchConfig> {
        let mut cfg = SearchConfig::for_system(sys, params.segment_duration);
        if let Some(p) = &self.config {
            cfg = merge(&cfg, read_json_value(p, run)?, "search config")?;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = self.segments {
            cfg.segment_count = v;
        }
        if let Some(v) = self.segment_duration {
            cfg.segment_duration = v;
        }
        if let Some(v) = self.max_iterations {
            cfg.max_iterations = v;
        }
        if let Some(v) = self.goal {
            cfg.fidelity_goal = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    #[serde(default)]
    #[allow(dead_code)]
    name: Option<String>,
    amplitudes: Vec<[f64; 2]>,
}

/// `basis:<i>`, `fx:<m>` (the F=3 state with `Fx = m`), `haar:<seed>`, or a
/// JSON file with an `amplitudes` array of `[re, im]` pairs.
pub fn parse_state(spec: &str, field: &str, run: &mut Run) -> CliResult<StateVector> {
    let d = RESTRICTED_DIM;
    let bad = |reason: String| CliError::field(field, reason);
    if let Some(i) = spec.strip_prefix("basis:") {
        let i: usize = i.parse().map_err(|_| bad(format!("bad level `{i}`")))?;
        return Ok(StateVector::basis(d, i)?);
    }
    if let Some(m) = spec.strip_prefix("fx:") {
        let m: i32 = m.parse().map_err(|_| bad(format!("bad projection `{m}`")))?;
        return Ok(f3_x_state(m, d)?);
    }
    if let Some(seed) = spec.strip_prefix("haar:") {
        let seed: u64 = seed.parse().map_err(|_| bad(format!("bad seed `{seed}`")))?;
        return Ok(haar_random_state(d, &mut rng_from_seed(seed))?);
    }
    let file: StateFile = read_json(Path::new(spec), run)?;
    let amps: Vec<C64> = file.amplitudes.iter().map(|z| C64::new(z[0], z[1])).collect();
    StateVector::from_amplitudes(&amps).map_err(|e| bad(e.to_string()))
}
