// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Phase-error correction of a qubit embedded in the cesium ground
//! manifold.
//!
//! The simulation space has nine levels: the seven `F = 3` sublevels
//! (`m = 3 … -3`), then `|4, 4⟩` and `|4, -4⟩`. The physical qubit is
//! `α|3,3_z⟩ + β|4,4_z⟩`; it is encoded on `{|3,3_x⟩, |3,-3_x⟩}`, dephased by
//! `e^{-2iεG}`, the `|m_x| = 2` error states are moved to the `F = 4`
//! stretched states, `F` is measured, and on `F = 4` the error subspace is
//! moved back before decoding.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cesium::{build_restricted_system, f3_x_state, Aux, CesiumParams, F3_LEVELS, FIDUCIAL_INDEX};
use crate::eigen_synth::{step_seed, SynthesisReport};
use crate::error::{Error, Result};
use crate::linalg::{c, rng_stream, CMatrix, CVector, SeededRng, StateVector, UnitaryMatrix, C64};
use crate::search::SearchConfig;
use crate::subspace::{
    assemble_subspace_map, plan_subspace_map, realize_rotation, synthesize_subspace_map_with,
    RealizedRotation, SubspaceMapSpec,
};

pub const EC_DIM: usize = 9;
pub const PLUS4_INDEX: usize = 7;
pub const MINUS4_INDEX: usize = 8;
const LEAK_TOL: f64 = 1e-12;

/// Relative sign of the Zeeman phase on `F = 4` versus `F = 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandeSign {
    /// Opposite g-factors (`g_4 = -g_3`), as in the cesium ground state.
    #[default]
    Opposite,
    /// Every level rotates with its own `m`.
    Same,
}

/// Generator of the dephasing error on the 9-level space.
pub fn error_generator(sign: LandeSign) -> CMatrix {
    let s = match sign {
        LandeSign::Opposite => -1.0,
        LandeSign::Same => 1.0,
    };
    let mut g = CMatrix::zeros(EC_DIM, EC_DIM);
    for i in 0..F3_LEVELS {
        g[(i, i)] = c(3.0 - i as f64);
    }
    g[(PLUS4_INDEX, PLUS4_INDEX)] = c(4.0 * s);
    g[(MINUS4_INDEX, MINUS4_INDEX)] = c(-4.0 * s);
    g
}

/// `e^{-2iεG}`.
pub fn error_channel(epsilon: f64, sign: LandeSign) -> Result<UnitaryMatrix> {
    if !epsilon.is_finite() {
        return Err(Error::NonFinite("epsilon"));
    }
    let g = error_generator(sign);
    let m = CMatrix::from_fn(EC_DIM, EC_DIM, |r, col| {
        if r == col {
            C64::from_polar(1.0, -2.0 * epsilon * g[(r, r)].re)
        } else {
            c(0.0)
        }
    });
    UnitaryMatrix::new(m)
}

fn basis(i: usize) -> StateVector {
    StateVector::basis(EC_DIM, i).expect("index inside the 9-level space")
}

fn x_state(m: i32) -> StateVector {
    f3_x_state(m, EC_DIM).expect("valid F = 3 projection")
}

/// Encode, syndrome and recovery maps as subspace specs, in protocol order.
pub fn ec_specs() -> [SubspaceMapSpec; 3] {
    let mk = |a: Vec<StateVector>, b: Vec<StateVector>| {
        SubspaceMapSpec::new(a, b, true).expect("orthonormal protocol bases")
    };
    [
        mk(vec![basis(PLUS4_INDEX), basis(0)], vec![x_state(3), x_state(-3)]),
        mk(
            vec![x_state(2), x_state(-2)],
            vec![basis(PLUS4_INDEX), basis(MINUS4_INDEX)],
        ),
        mk(
            vec![basis(PLUS4_INDEX), basis(MINUS4_INDEX)],
            vec![x_state(3), x_state(-3)],
        ),
    ]
}

#[derive(Debug, Clone)]
pub struct EcMaps {
    pub encode: UnitaryMatrix,
    pub syndrome: UnitaryMatrix,
    pub recover: UnitaryMatrix,
    /// Synthesis reports for encode, syndrome and recovery, when searched.
    pub reports: Option<Vec<SynthesisReport>>,
}

/// The three maps built exactly, with phase correction.
pub fn ec_maps_ideal() -> Result<EcMaps> {
    let specs = ec_specs();
    let build = |spec: &SubspaceMapSpec| assemble_subspace_map(&plan_subspace_map(spec)?, spec);
    Ok(EcMaps {
        encode: build(&specs[0])?,
        syndrome: build(&specs[1])?,
        recover: build(&specs[2])?,
        reports: None,
    })
}

/// Level of the 9-level space that plays the fiducial for `aux`.
fn aux_level(aux: Aux) -> usize {
    match aux {
        Aux::Plus4 => PLUS4_INDEX,
        Aux::Minus4 => MINUS4_INDEX,
    }
}

/// Picks the auxiliary state whose system contains `φ`: a rotation touching
/// `|4,-4⟩` runs with `|4,-4⟩` as fiducial, any other with `|4,4⟩`.
pub fn aux_for(phi: &StateVector) -> Result<Aux> {
    let v = phi.as_vector();
    let (plus, minus) = (v[PLUS4_INDEX].norm_sqr(), v[MINUS4_INDEX].norm_sqr());
    match (plus > LEAK_TOL, minus > LEAK_TOL) {
        (true, true) => Err(Error::OutsideBlock {
            weight: plus.min(minus),
        }),
        (false, true) => Ok(Aux::Minus4),
        _ => Ok(Aux::Plus4),
    }
}

fn restrict(phi: &StateVector, aux: Aux) -> Result<StateVector> {
    let v = phi.as_vector();
    let mut out = CVector::zeros(F3_LEVELS + 1);
    out.rows_mut(0, F3_LEVELS).copy_from(&v.rows(0, F3_LEVELS));
    out[FIDUCIAL_INDEX] = v[aux_level(aux)];
    StateVector::normalized(out)
}

fn embed(u: &UnitaryMatrix, aux: Aux) -> UnitaryMatrix {
    let map = |i: usize| if i < F3_LEVELS { i } else { aux_level(aux) };
    let mut m = CMatrix::identity(EC_DIM, EC_DIM);
    for r in 0..=F3_LEVELS {
        for col in 0..=F3_LEVELS {
            m[(map(r), map(col))] = u.as_matrix()[(r, col)];
        }
    }
    UnitaryMatrix::from_unchecked(m)
}

/// The three maps realized by searched π-rotations on the two 8-level
/// systems, switching the auxiliary state per rotation.
pub fn ec_maps_synthesized(params: &CesiumParams, cfg: &SearchConfig) -> Result<EcMaps> {
    cfg.validate()?;
    let plus = build_restricted_system(params, Aux::Plus4)?;
    let minus = build_restricted_system(params, Aux::Minus4)?;
    let specs = ec_specs();
    let mut reports = Vec::with_capacity(3);
    for (m, spec) in specs.iter().enumerate() {
        let report = synthesize_subspace_map_with(spec, |k, phi| -> Result<RealizedRotation> {
            let aux = aux_for(phi)?;
            let sys = match aux {
                Aux::Plus4 => &plus,
                Aux::Minus4 => &minus,
            };
            let cfg_k = SearchConfig {
                seed: step_seed(cfg.seed, 8 * m + k),
                ..cfg.clone()
            };
            let r = realize_rotation(sys, &restrict(phi, aux)?, &cfg_k)?;
            Ok(RealizedRotation {
                unitary: embed(&r.unitary, aux),
                ..r
            })
        })?;
        reports.push(report);
    }
    Ok(EcMaps {
        encode: reports[0].assembled.clone(),
        syndrome: reports[1].assembled.clone(),
        recover: reports[2].assembled.clone(),
        reports: Some(reports),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FOutcome {
    F3,
    F4,
}

/// Probability of `outcome` and the renormalized post-measurement state.
pub fn project_f(state: &CVector, outcome: FOutcome) -> Result<(CVector, f64)> {
    if state.len() != EC_DIM {
        return Err(Error::DimensionMismatch {
            expected: EC_DIM,
            found: state.len(),
        });
    }
    let mut out = state.clone();
    for (i, z) in out.iter_mut().enumerate() {
        let in_f3 = i < F3_LEVELS;
        if in_f3 != (outcome == FOutcome::F3) {
            *z = c(0.0);
        }
    }
    let p = out.norm_squared();
    if p <= 0.0 {
        return Err(Error::ZeroProbabilityBranch(match outcome {
            FOutcome::F3 => "F = 3",
            FOutcome::F4 => "F = 4",
        }));
    }
    let norm = p.sqrt();
    Ok((out.unscale(norm), p / state.norm_squared()))
}

/// Projective measurement of `F`, sampled with `rng`.
pub fn qnd_measure_f<R: Rng + ?Sized>(
    state: &StateVector,
    rng: &mut R,
) -> Result<(FOutcome, StateVector, f64)> {
    let v = state.as_vector();
    let p4: f64 = v.rows(F3_LEVELS, EC_DIM - F3_LEVELS).norm_squared();
    let outcome = if rng.random::<f64>() < p4 {
        FOutcome::F4
    } else {
        FOutcome::F3
    };
    let (collapsed, p) = project_f(v, outcome)?;
    Ok((outcome, StateVector::new(collapsed)?, p))
}

/// Physical qubit `α|3,3_z⟩ + β|4,4_z⟩`.
pub fn physical_state(alpha: C64, beta: C64) -> Result<StateVector> {
    let mut v = CVector::zeros(EC_DIM);
    v[0] = alpha;
    v[PLUS4_INDEX] = beta;
    StateVector::new(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub fidelity: f64,
    pub triggered: bool,
    /// Probability of the `F = 4` outcome before sampling.
    pub p_f4: f64,
}

fn fidelity(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm_sqr().min(1.0)
}

/// Fidelity of the state left in the `F = 3` / `F = 4` branch after
/// recovery and decoding.
fn branch_fidelity(maps: &EcMaps, psi: &CVector, before: &CVector, outcome: FOutcome) -> Result<f64> {
    let (collapsed, _) = project_f(before, outcome)?;
    let recovered = match outcome {
        FOutcome::F3 => collapsed,
        FOutcome::F4 => maps.recover.as_matrix() * collapsed,
    };
    let decoded = maps.encode.as_matrix().ad_mul(&recovered);
    Ok(fidelity(psi, &decoded))
}

fn syndrome_state(maps: &EcMaps, psi: &StateVector, error: &UnitaryMatrix) -> CVector {
    let encoded = maps.encode.as_matrix() * psi.as_vector();
    let dephased = error.as_matrix() * encoded;
    maps.syndrome.as_matrix() * dephased
}

/// One protocol run on `ψ = α|3,3_z⟩ + β|4,4_z⟩`. With `correct = false` the
/// error acts on the unencoded state and the fidelity is returned directly.
pub fn run_ec_trial<R: Rng + ?Sized>(
    amplitudes: [C64; 2],
    epsilon: f64,
    maps: &EcMaps,
    sign: LandeSign,
    rng: &mut R,
    correct: bool,
) -> Result<TrialOutcome> {
    let psi = physical_state(amplitudes[0], amplitudes[1])?;
    let error = error_channel(epsilon, sign)?;
    if !correct {
        let after = error.as_matrix() * psi.as_vector();
        return Ok(TrialOutcome {
            fidelity: fidelity(psi.as_vector(), &after),
            triggered: false,
            p_f4: 0.0,
        });
    }
    let before = syndrome_state(maps, &psi, &error);
    let before_state = StateVector::normalized(before.clone())?;
    let p_f4 = before.rows(F3_LEVELS, EC_DIM - F3_LEVELS).norm_squared();
    let (outcome, _, _) = qnd_measure_f(&before_state, rng)?;
    Ok(TrialOutcome {
        fidelity: branch_fidelity(maps, psi.as_vector(), &before, outcome)?,
        triggered: outcome == FOutcome::F4,
        p_f4,
    })
}

/// Outcome-averaged corrected fidelity and `P(F = 4)`, without sampling.
pub fn expected_corrected_fidelity(
    amplitudes: [C64; 2],
    epsilon: f64,
    maps: &EcMaps,
    sign: LandeSign,
) -> Result<(f64, f64)> {
    let psi = physical_state(amplitudes[0], amplitudes[1])?;
    let error = error_channel(epsilon, sign)?;
    let before = syndrome_state(maps, &psi, &error);
    let p4 = before.rows(F3_LEVELS, EC_DIM - F3_LEVELS).norm_squared();
    let mut total = 0.0;
    for (outcome, p) in [(FOutcome::F3, 1.0 - p4), (FOutcome::F4, p4)] {
        if p > 0.0 {
            total += p * branch_fidelity(maps, psi.as_vector(), &before, outcome)?;
        }
    }
    Ok((total, p4))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Haar-random qubit states with sampled measurement outcomes.
    #[default]
    MonteCarlo,
    /// The six Bloch-axis states with outcome-averaged fidelities.
    AxisStates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapMode {
    #[default]
    Ideal,
    Synthesized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EcConfig {
    /// Radians; the error rotates by `2ε`.
    pub epsilon_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub maps: MapMode,
    #[serde(default)]
    pub averaging: Averaging,
    #[serde(default)]
    pub lande_sign: LandeSign,
}

impl EcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon_grid.is_empty() {
            return Err(Error::config("epsilon_grid", "must not be empty"));
        }
        if let Some(e) = self.epsilon_grid.iter().find(|e| !e.is_finite()) {
            return Err(Error::config("epsilon_grid", format!("non-finite value {e}")));
        }
        if self.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        Ok(())
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcPoint {
    pub epsilon: f64,
    pub corrected: f64,
    pub uncorrected: f64,
    pub trigger_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcResult {
    pub points: Vec<EcPoint>,
}

/// Haar-random qubit amplitudes.
pub fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> [C64; 2] {
    let cos2: f64 = rng.random();
    let (a, b) = (cos2.sqrt(), (1.0 - cos2).sqrt());
    let phase = rng.random::<f64>() * TAU;
    [c(a), C64::from_polar(b, phase)]
}

/// The six eigenstates of the qubit Pauli operators.
pub fn axis_states() -> [[C64; 2]; 6] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        [c(1.0), c(0.0)],
        [c(0.0), c(1.0)],
        [c(h), c(h)],
        [c(h), c(-h)],
        [c(h), C64::new(0.0, h)],
        [c(h), C64::new(0.0, -h)],
    ]
}

fn trial_rng(seed: u64, eps_index: usize, sample: usize) -> SeededRng {
    rng_stream(seed, ((eps_index as u64) << 32) | sample as u64)
}

/// Average corrected and uncorrected fidelities over the grid. Trials are
/// independent and run in parallel; each owns the stream
/// `(ε index << 32) | sample` of `cfg.seed`.
pub fn ec_sweep(cfg: &EcConfig, maps: &EcMaps) -> Result<EcResult> {
    cfg.validate()?;
    let points = cfg
        .epsilon_grid
        .iter()
        .enumerate()
        .map(|(ei, &eps)| -> Result<EcPoint> {
            let trials: Vec<(f64, f64, f64)> = match cfg.averaging {
                Averaging::MonteCarlo => (0..cfg.samples)
                    .into_par_iter()
                    .map(|s| -> Result<(f64, f64, f64)> {
                        let mut rng = trial_rng(cfg.seed, ei, s);
                        let amps = haar_qubit(&mut rng);
                        let fixed = run_ec_trial(amps, eps, maps, cfg.lande_sign, &mut rng, true)?;
                        let free = run_ec_trial(amps, eps, maps, cfg.lande_sign, &mut rng, false)?;
                        Ok((
                            fixed.fidelity,
                            free.fidelity,
                            if fixed.triggered { 1.0 } else { 0.0 },
                        ))
                    })
                    .collect::<Result<_>>()?,
                Averaging::AxisStates => axis_states()
                    .par_iter()
                    .map(|&amps| -> Result<(f64, f64, f64)> {
                        let (fixed, p4) = expected_corrected_fidelity(amps, eps, maps, cfg.lande_sign)?;
                        let mut unused = trial_rng(cfg.seed, ei, 0);
                        let free = run_ec_trial(amps, eps, maps, cfg.lande_sign, &mut unused, false)?;
                        Ok((fixed, free.fidelity, p4))
                    })
                    .collect::<Result<_>>()?,
            };
            let n = trials.len() as f64;
            let sum = trials
                .iter()
                .fold((0.0, 0.0, 0.0), |acc, t| (acc.0 + t.0, acc.1 + t.1, acc.2 + t.2));
            Ok(EcPoint {
                epsilon: eps,
                corrected: (sum.0 / n).clamp(0.0, 1.0),
                uncorrected: (sum.1 / n).clamp(0.0, 1.0),
                trigger_rate: sum.2 / n,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EcResult { points })
}

/// Least-squares slope of `log(1 - F)` against `log ε` over points with
/// `lo <= ε <= hi`.
pub fn infidelity_slope(points: &[EcPoint], lo: f64, hi: f64, corrected: bool) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.epsilon >= lo && p.epsilon <= hi && p.epsilon > 0.0)
        .map(|p| {
            let f = if corrected { p.corrected } else { p.uncorrected };
            (p.epsilon.ln(), (1.0 - f).max(1e-300).ln())
        })
        .collect();
    if xy.len() < 2 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
