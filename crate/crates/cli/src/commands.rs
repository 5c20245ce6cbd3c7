// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qsynth::cesium::{
    basis_labels, build_restricted_system, embed_gate, Aux, CesiumParams, F3_LEVELS, FIDUCIAL_INDEX,
    RESTRICTED_DIM,
};
use qsynth::control::lie_algebra_dimension;
use qsynth::ec::{
    ec_maps_ideal, ec_maps_synthesized, ec_sweep, linear_grid, Averaging, EcConfig, LandeSign, MapMode,
};
use qsynth::eigen_synth::{synthesize_unitary, synthesize_unitary_exact, StepReport, SynthesisReport};
use qsynth::gates::{dft_h, verify_clifford_relations, GateKind, GateSpec, SConvention};
use qsynth::io::{ec_result_to_string, waveform_to_string, wigner_grid_to_string};
use qsynth::linalg::{block_trace_fidelity, CMatrix, CVector, UnitaryMatrix, C64};
use qsynth::search::{default_segment_count, multi_start, SearchConfig};
use qsynth::subspace::{
    assemble_subspace_map, basis_error, plan_subspace_map, synthesize_subspace_map, SubspaceSpecFile,
};
use qsynth::wigner::{block_density, wigner_grid, WignerStateFile};

use crate::error::{CliError, CliResult};
use crate::inputs::{merge, parse_state, read_json, read_json_value, SearchArgs, SystemArgs};
use crate::output::{to_json, Run};

/// Tolerance for the Clifford relations.
pub const RELATION_TOL: f64 = 1e-12;

fn emit(run: &mut Run, out: Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => run.write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ControlInfo {
    name: String,
    min: f64,
    max: f64,
}

#[derive(Serialize)]
struct ModelInfo {
    preset: String,
    params: CesiumParams,
    aux: i32,
    dimension: usize,
    fiducial_index: usize,
    basis: Vec<String>,
    controls: Vec<ControlInfo>,
    reversible_drift: bool,
    lie_algebra_dimension: usize,
    default_segment_count: usize,
}

pub fn model_info(sys_args: &SystemArgs, out: Option<PathBuf>, run: &mut Run) -> CliResult<()> {
    let (params, sys) = sys_args.build(run)?;
    let aux = sys_args.aux()?;
    let info = ModelInfo {
        preset: sys_args.preset.clone(),
        params,
        aux: aux.m(),
        dimension: sys.dim(),
        fiducial_index: sys.fiducial_index(),
        basis: basis_labels(aux),
        controls: sys
            .controls()
            .iter()
            .map(|c| ControlInfo {
                name: c.name.clone(),
                min: c.min,
                max: c.max,
            })
            .collect(),
        reversible_drift: sys.is_reversible(),
        lie_algebra_dimension: lie_algebra_dimension(&sys),
        default_segment_count: default_segment_count(sys.dim(), sys.num_controls()),
    };
    run.config(&info.params, None);
    emit(run, out, &to_json(&info)?)
}

#[derive(Serialize)]
struct OptimizeReport {
    preset: String,
    aux: i32,
    initial: String,
    target: String,
    search: SearchConfig,
    fidelity: f64,
    converged: bool,
    iterations: usize,
    total_duration_s: f64,
    waveform: String,
}

pub fn optimize_state(
    sys_args: &SystemArgs,
    search: &SearchArgs,
    initial: &str,
    target: &str,
    out_dir: &Path,
    run: &mut Run,
) -> CliResult<()> {
    let (params, sys) = sys_args.build(run)?;
    let cfg = search.build(&sys, &params, run)?;
    let psi_i = parse_state(initial, "initial", run)?;
    let psi_f = parse_state(target, "target", run)?;
    run.config(&cfg, Some(cfg.seed));
    let r = multi_start(&sys, &psi_i, &psi_f, &cfg)?;
    let waveform = "waveform.csv".to_string();
    run.write(
        out_dir.join(&waveform),
        &waveform_to_string(&r.waveform, sys.num_controls())?,
    )?;
    let report = OptimizeReport {
        preset: sys_args.preset.clone(),
        aux: sys_args.aux()?.m(),
        initial: initial.to_string(),
        target: target.to_string(),
        search: cfg,
        fidelity: r.fidelity,
        converged: r.converged,
        iterations: r.iterations,
        total_duration_s: r.waveform.total_duration(),
        waveform,
    };
    run.write(out_dir.join("report.json"), &to_json(&report)?)
}

#[derive(Serialize)]
struct StepJson {
    index: usize,
    /// Eigenphase for unitaries, overlap phase for subspace rotations.
    phase: f64,
    skipped: bool,
    fidelity: f64,
    converged: bool,
    iterations: usize,
    waveform: Option<String>,
}

#[derive(Serialize)]
struct SynthesisJson {
    target: String,
    dimension: usize,
    system_dimension: usize,
    fiducial_index: usize,
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_convention: Option<SConvention>,
    #[serde(skip_serializing_if = "Option::is_none")]
    search: Option<SearchConfig>,
    trace_fidelity: f64,
    /// Trace fidelity on the target's own levels.
    gate_fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    subspace_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    basis_error: Option<f64>,
    searches: usize,
    all_converged: bool,
    total_duration_s: f64,
    steps: Vec<StepJson>,
}

fn write_steps(
    report: &SynthesisReport,
    prefix: &str,
    num_controls: usize,
    out_dir: &Path,
    run: &mut Run,
) -> CliResult<Vec<StepJson>> {
    let mut files = vec![None; report.steps.len()];
    for (i, w) in &report.waveforms {
        let name = format!("{prefix}_{i:02}.csv");
        run.write(out_dir.join(&name), &waveform_to_string(w, num_controls)?)?;
        files[*i] = Some(name);
    }
    Ok(report
        .steps
        .iter()
        .zip(files)
        .map(|(s, waveform): (&StepReport, _)| StepJson {
            index: s.index,
            phase: s.phase,
            skipped: s.skipped,
            fidelity: s.fidelity,
            converged: s.converged,
            iterations: s.iterations,
            waveform,
        })
        .collect())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    #[serde(default)]
    name: Option<String>,
    rows: Vec<Vec<[f64; 2]>>,
}

pub struct UnitaryArgs<'a> {
    pub gate: Option<&'a str>,
    pub matrix: Option<&'a Path>,
    pub d: usize,
    pub exact: bool,
    pub s_convention: SConvention,
}

pub fn build_unitary(
    args: &UnitaryArgs<'_>,
    sys_args: &SystemArgs,
    search: &SearchArgs,
    out_dir: &Path,
    run: &mut Run,
) -> CliResult<()> {
    let (name, target, is_s) = match (args.gate, args.matrix) {
        (Some(g), None) => {
            let kind: GateKind = g.parse()?;
            let spec = GateSpec::new(kind, args.d)?;
            (
                kind.to_string(),
                spec.matrix(args.s_convention)?,
                kind == GateKind::S,
            )
        }
        (None, Some(path)) => {
            let file: MatrixFile = read_json(path, run)?;
            let d = file.rows.len();
            if let Some(bad) = file.rows.iter().position(|r| r.len() != d) {
                return Err(CliError::field(
                    &format!("rows[{bad}]"),
                    format!("expected {d} entries"),
                ));
            }
            let m = CMatrix::from_fn(d, d, |r, c| C64::new(file.rows[r][c][0], file.rows[r][c][1]));
            let name = file.name.unwrap_or_else(|| path.display().to_string());
            (name, UnitaryMatrix::new(m)?, false)
        }
        _ => return Err(CliError::field("gate", "give exactly one of --gate and --matrix")),
    };
    let d = target.dim();
    // 7-level targets live on the F=3 block with the fiducial as spectator.
    let embedded = d == F3_LEVELS;
    let full = if embedded {
        UnitaryMatrix::new(embed_gate(target.as_matrix())?)?
    } else {
        target.clone()
    };

    let (report, fiducial, search_cfg, num_controls) = if args.exact {
        let fiducial = if embedded { FIDUCIAL_INDEX } else { d - 1 };
        run.config(
            &serde_json::json!({"target": name, "d": d, "mode": "exact"}),
            None,
        );
        (synthesize_unitary_exact(&full, fiducial)?, fiducial, None, 0)
    } else {
        if full.dim() != RESTRICTED_DIM {
            return Err(CliError::field(
                "d",
                format!("searched synthesis runs on the 8-level system and needs d = 7 or 8, got {d} (use --exact-mappers)"),
            ));
        }
        let (params, sys) = sys_args.build(run)?;
        let cfg = search.build(&sys, &params, run)?;
        run.config(&cfg, Some(cfg.seed));
        (
            synthesize_unitary(&sys, &full, &cfg)?,
            sys.fiducial_index(),
            Some(cfg),
            sys.num_controls(),
        )
    };
    let gate_fidelity = if embedded {
        block_trace_fidelity(&full, &report.assembled, &(0..F3_LEVELS).collect::<Vec<_>>())?
    } else {
        report.trace_fidelity
    };
    let steps = write_steps(&report, "step", num_controls, out_dir, run)?;
    let json = SynthesisJson {
        target: name,
        dimension: d,
        system_dimension: full.dim(),
        fiducial_index: fiducial,
        mode: if args.exact { "exact" } else { "searched" },
        s_convention: is_s.then_some(args.s_convention),
        search: search_cfg,
        trace_fidelity: report.trace_fidelity,
        gate_fidelity,
        subspace_fidelity: None,
        basis_error: None,
        searches: report.searches,
        all_converged: report.all_converged(),
        total_duration_s: report.waveform_duration(),
        steps,
    };
    run.write(out_dir.join("report.json"), &to_json(&json)?)
}

pub fn build_subspace_map(
    spec_path: &Path,
    exact: bool,
    sys_args: &SystemArgs,
    search: &SearchArgs,
    out_dir: &Path,
    run: &mut Run,
) -> CliResult<()> {
    let file: SubspaceSpecFile = read_json(spec_path, run)?;
    let spec = file.to_spec()?;
    let name = spec_path.display().to_string();
    let json = if exact {
        run.config(&file, None);
        let steps = plan_subspace_map(&spec)?;
        let t = assemble_subspace_map(&steps, &spec)?;
        SynthesisJson {
            target: name,
            dimension: spec.dim(),
            system_dimension: spec.dim(),
            fiducial_index: 0,
            mode: "exact",
            s_convention: None,
            search: None,
            trace_fidelity: 1.0,
            gate_fidelity: 1.0,
            subspace_fidelity: Some(1.0),
            basis_error: Some(basis_error(&t, &spec)),
            searches: 0,
            all_converged: true,
            total_duration_s: 0.0,
            steps: steps
                .iter()
                .enumerate()
                .map(|(k, s)| StepJson {
                    index: k,
                    phase: s.theta,
                    skipped: s.skipped(),
                    fidelity: 1.0,
                    converged: true,
                    iterations: 0,
                    waveform: None,
                })
                .collect(),
        }
    } else {
        let (params, sys) = sys_args.build(run)?;
        let cfg = search.build(&sys, &params, run)?;
        run.config(&serde_json::json!({"spec": file, "search": cfg}), Some(cfg.seed));
        let report = synthesize_subspace_map(&sys, &spec, &cfg)?;
        let steps = write_steps(&report, "rotation", sys.num_controls(), out_dir, run)?;
        SynthesisJson {
            target: name,
            dimension: spec.dim(),
            system_dimension: sys.dim(),
            fiducial_index: sys.fiducial_index(),
            mode: "searched",
            s_convention: None,
            search: Some(cfg),
            trace_fidelity: report.trace_fidelity,
            gate_fidelity: report.subspace_fidelity.unwrap_or(report.trace_fidelity),
            subspace_fidelity: report.subspace_fidelity,
            basis_error: Some(basis_error(&report.assembled, &spec)),
            searches: report.searches,
            all_converged: report.all_converged(),
            total_duration_s: report.waveform_duration(),
            steps,
        }
    };
    run.write(out_dir.join("report.json"), &to_json(&json)?)
}

pub struct EcArgs {
    pub preset: MapMode,
    pub config: Option<PathBuf>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub epsilon: Option<Vec<f64>>,
    pub averaging: Option<Averaging>,
    pub lande_sign: Option<LandeSign>,
    pub search_config: Option<PathBuf>,
    pub restarts: Option<usize>,
}

#[derive(Serialize)]
struct MapSummary {
    map: &'static str,
    subspace_fidelity: Option<f64>,
    searches: usize,
}

#[derive(Serialize)]
struct EcMetadata {
    seed: u64,
    samples: usize,
    maps: MapMode,
    averaging: Averaging,
    lande_sign: LandeSign,
    epsilon_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    search: Option<SearchConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    synthesized_maps: Option<Vec<MapSummary>>,
    csv: String,
}

pub fn ec_sweep_cmd(args: &EcArgs, params: &CesiumParams, out_dir: &Path, run: &mut Run) -> CliResult<()> {
    let mut cfg = EcConfig {
        epsilon_grid: linear_grid(0.02, 0.3, 15),
        samples: 200,
        seed: 0,
        maps: args.preset,
        averaging: Averaging::MonteCarlo,
        lande_sign: LandeSign::Opposite,
    };
    if let Some(p) = &args.config {
        cfg = merge(&cfg, read_json_value(p, run)?, "ec config")?;
    }
    cfg.maps = args.preset;
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.epsilon {
        cfg.epsilon_grid = v.clone();
    }
    if let Some(v) = args.averaging {
        cfg.averaging = v;
    }
    if let Some(v) = args.lande_sign {
        cfg.lande_sign = v;
    }
    cfg.validate()?;

    let (maps, search) = match cfg.maps {
        MapMode::Ideal => (ec_maps_ideal()?, None),
        MapMode::Synthesized => {
            let sys = build_restricted_system(params, Aux::Plus4)?;
            let mut s = SearchConfig::for_system(&sys, params.segment_duration);
            if let Some(p) = &args.search_config {
                s = merge(&s, read_json_value(p, run)?, "search config")?;
            }
            s.seed = cfg.seed;
            if let Some(r) = args.restarts {
                s.restarts = r;
            }
            s.validate()?;
            (ec_maps_synthesized(params, &s)?, Some(s))
        }
    };
    run.config(&serde_json::json!({"ec": cfg, "search": search}), Some(cfg.seed));
    let result = ec_sweep(&cfg, &maps)?;
    let csv = "ec_sweep.csv".to_string();
    run.write(out_dir.join(&csv), &ec_result_to_string(&result)?)?;
    let synthesized_maps = maps.reports.as_ref().map(|reports| {
        ["encode", "syndrome", "recover"]
            .into_iter()
            .zip(reports)
            .map(|(map, r)| MapSummary {
                map,
                subspace_fidelity: r.subspace_fidelity,
                searches: r.searches,
            })
            .collect()
    });
    let meta = EcMetadata {
        seed: cfg.seed,
        samples: cfg.samples,
        maps: cfg.maps,
        averaging: cfg.averaging,
        lande_sign: cfg.lande_sign,
        epsilon_grid: cfg.epsilon_grid,
        search,
        synthesized_maps,
        csv,
    };
    run.write(out_dir.join("ec_sweep.json"), &to_json(&meta)?)
}

pub struct WignerArgs {
    pub state: Option<PathBuf>,
    pub level: Option<usize>,
    pub fourier: bool,
    pub n_theta: usize,
    pub n_phi: usize,
}

pub fn wigner_cmd(args: &WignerArgs, out: &Path, run: &mut Run) -> CliResult<()> {
    let rho = match (&args.state, args.level) {
        (Some(path), None) => {
            let file: WignerStateFile = read_json(path, run)?;
            file.to_density()?
        }
        (None, Some(level)) => {
            if level >= F3_LEVELS {
                return Err(CliError::field(
                    "level",
                    format!("must be below {F3_LEVELS}, got {level}"),
                ));
            }
            let v = if args.fourier {
                dft_h(F3_LEVELS)?.as_matrix().column(level).into_owned()
            } else {
                let mut v = CVector::zeros(F3_LEVELS);
                v[level] = C64::new(1.0, 0.0);
                v
            };
            block_density(&v, 0..F3_LEVELS)?
        }
        _ => {
            return Err(CliError::field(
                "state",
                "give exactly one of --state and --level",
            ))
        }
    };
    run.config(
        &serde_json::json!({"level": args.level, "fourier": args.fourier, "n_theta": args.n_theta, "n_phi": args.n_phi}),
        None,
    );
    let grid = wigner_grid(&rho, args.n_theta, args.n_phi)?;
    run.write(out.to_path_buf(), &wigner_grid_to_string(&grid)?)
}

pub fn verify_clifford(
    d: usize,
    convention: SConvention,
    out: Option<PathBuf>,
    run: &mut Run,
) -> CliResult<()> {
    run.config(&serde_json::json!({"d": d, "s_convention": convention}), None);
    let report = verify_clifford_relations(d, convention)?;
    for f in report.failures(RELATION_TOL) {
        eprintln!(
            "WARNING: relation `{}` fails at d = {d}: max deviation {:.3e} ({:.3e} up to global phase)",
            f.relation, f.deviation, f.deviation_up_to_phase
        );
    }
    emit(run, out, &to_json(&report)?)
}
