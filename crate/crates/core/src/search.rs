// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Gradient-ascent search for waveforms mapping one pure state to another.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{ControlSystem, Segment, Waveform};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, rng_stream, CMatrix, CVector, SeededRng, StateVector, C64};

const ARMIJO: f64 = 1e-4;
const GRADIENT_FLOOR: f64 = 1e-9;
const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub segment_count: usize,
    /// Seconds.
    pub segment_duration: f64,
    /// Initial ascent step in amplitude units.
    pub step_size: f64,
    pub fidelity_goal: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub restarts: usize,
    pub line_search: bool,
}

impl SearchConfig {
    /// Defaults for `sys`: enough segments that `segment_count · K >= 2d²`.
    pub fn for_system(sys: &ControlSystem, segment_duration: f64) -> Self {
        Self {
            segment_count: default_segment_count(sys.dim(), sys.num_controls()),
            segment_duration,
            step_size: 1.0,
            fidelity_goal: 0.99,
            max_iterations: 5000,
            seed: 0,
            restarts: 1,
            line_search: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segment_count == 0 {
            return Err(Error::config("segment_count", "must be at least 1"));
        }
        if !(self.segment_duration.is_finite() && self.segment_duration > 0.0) {
            return Err(Error::config("segment_duration", "must be positive and finite"));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::config("step_size", "must be positive and finite"));
        }
        if !(self.fidelity_goal > 0.0 && self.fidelity_goal <= 1.0) {
            return Err(Error::config("fidelity_goal", "must lie in (0, 1]"));
        }
        if self.restarts == 0 {
            return Err(Error::config("restarts", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of free control variables for `sys`.
    pub fn control_variables(&self, sys: &ControlSystem) -> usize {
        self.segment_count * sys.num_controls()
    }
}

/// `⌈2d² / K⌉`, twice the `d² - 1` variables a full-rank search needs.
pub fn default_segment_count(d: usize, num_controls: usize) -> usize {
    (2 * d * d).div_ceil(num_controls.max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub waveform: Waveform,
    pub fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_history: Vec<f64>,
}

fn check_states(sys: &ControlSystem, psi_i: &StateVector, psi_f: &StateVector) -> Result<()> {
    for psi in [psi_i, psi_f] {
        if psi.dim() != sys.dim() {
            return Err(Error::DimensionMismatch {
                expected: sys.dim(),
                found: psi.dim(),
            });
        }
    }
    Ok(())
}

/// `J = |⟨ψ_f|U(T)|ψ_i⟩|²`.
pub fn objective_state_prep(
    sys: &ControlSystem,
    w: &Waveform,
    psi_i: &StateVector,
    psi_f: &StateVector,
) -> Result<f64> {
    check_states(sys, psi_i, psi_f)?;
    sys.validate(w)?;
    let mut psi = psi_i.as_vector().clone();
    for seg in &w.segments {
        let (values, v) = hermitian_eigen(&sys.hamiltonian(&seg.amplitudes));
        psi = evolve(&values, &v, seg.duration, &psi);
    }
    Ok(psi_f.as_vector().dotc(&psi).norm_sqr().min(1.0))
}

/// `∂J/∂u_{m,k}` for every segment `m` and control `k`, segment-major.
pub fn gradient_state_prep(
    sys: &ControlSystem,
    w: &Waveform,
    psi_i: &StateVector,
    psi_f: &StateVector,
) -> Result<Vec<f64>> {
    check_states(sys, psi_i, psi_f)?;
    sys.validate(w)?;
    let durations: Vec<f64> = w.segments.iter().map(|s| s.duration).collect();
    let amps = w.flat_amplitudes();
    let (_, grad) = value_and_gradient(sys, &durations, &amps, psi_i.as_vector(), psi_f.as_vector());
    Ok(grad)
}

fn evolve(values: &[f64], v: &CMatrix, tau: f64, psi: &CVector) -> CVector {
    let mut a = v.ad_mul(psi);
    for (z, lambda) in a.iter_mut().zip(values) {
        *z *= C64::from_polar(1.0, -lambda * tau);
    }
    v * a
}

fn evolve_back(values: &[f64], v: &CMatrix, tau: f64, chi: &CVector) -> CVector {
    let mut b = v.ad_mul(chi);
    for (z, lambda) in b.iter_mut().zip(values) {
        *z *= C64::from_polar(1.0, lambda * tau);
    }
    v * b
}

fn objective_flat(
    sys: &ControlSystem,
    durations: &[f64],
    amps: &[f64],
    psi_i: &CVector,
    psi_f: &CVector,
) -> f64 {
    let k = sys.num_controls();
    let mut psi = psi_i.clone();
    for (m, &tau) in durations.iter().enumerate() {
        let (values, v) = hermitian_eigen(&sys.hamiltonian(&amps[m * k..(m + 1) * k]));
        psi = evolve(&values, &v, tau, &psi);
    }
    psi_f.dotc(&psi).norm_sqr().min(1.0)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn value_and_gradient(
    sys: &ControlSystem,
    durations: &[f64],
    amps: &[f64],
    psi_i: &CVector,
    psi_f: &CVector,
) -> (f64, Vec<f64>) {
    let k = sys.num_controls();
    let n = durations.len();
    let d = sys.dim();
    let eigs: Vec<(Vec<f64>, CMatrix)> = (0..n)
        .map(|m| hermitian_eigen(&sys.hamiltonian(&amps[m * k..(m + 1) * k])))
        .collect();

    // forward[m] is the state before segment m.
    let mut forward = Vec::with_capacity(n + 1);
    forward.push(psi_i.clone());
    for (m, (values, v)) in eigs.iter().enumerate() {
        let next = evolve(values, v, durations[m], &forward[m]);
        forward.push(next);
    }
    let z = psi_f.dotc(&forward[n]);

    let mut grad = vec![0.0; n * k];
    let mut chi = psi_f.clone();
    for m in (0..n).rev() {
        let (values, v) = &eigs[m];
        let tau = durations[m];
        let a = v.ad_mul(&forward[m]);
        let b = v.ad_mul(&chi);
        let mut cmat = CMatrix::zeros(d, d);
        for p in 0..d {
            for q in 0..d {
                let mean = 0.5 * (values[p] + values[q]);
                let gap = values[p] - values[q];
                let kernel = C64::new(0.0, -tau) * C64::from_polar(1.0, -mean * tau) * sinc(0.5 * gap * tau);
                cmat[(p, q)] = b[p].conj() * kernel * a[q];
            }
        }
        let y = v.conjugate() * cmat * v.transpose();
        for (j, ctl) in sys.controls().iter().enumerate() {
            let dz: C64 = ctl
                .generator
                .as_matrix()
                .iter()
                .zip(y.iter())
                .map(|(h, y)| h * y)
                .sum();
            grad[m * k + j] = 2.0 * (z.conj() * dz).re;
        }
        chi = evolve_back(values, v, tau, &chi);
    }
    (z.norm_sqr().min(1.0), grad)
}

fn project(sys: &ControlSystem, amps: &mut [f64]) {
    let k = sys.num_controls();
    for (i, u) in amps.iter_mut().enumerate() {
        let ctl = &sys.controls()[i % k];
        *u = u.clamp(ctl.min, ctl.max);
    }
}

/// Gradient with components that push into an active bound removed.
fn projected_gradient_norm(sys: &ControlSystem, amps: &[f64], grad: &[f64]) -> f64 {
    let k = sys.num_controls();
    grad.iter()
        .enumerate()
        .map(|(i, &g)| {
            let ctl = &sys.controls()[i % k];
            let blocked = (amps[i] >= ctl.max && g > 0.0) || (amps[i] <= ctl.min && g < 0.0);
            if blocked {
                0.0
            } else {
                g * g
            }
        })
        .sum::<f64>()
        .sqrt()
}

fn random_seed_amplitudes(sys: &ControlSystem, count: usize, rng: &mut SeededRng) -> Vec<f64> {
    let k = sys.num_controls();
    (0..count * k)
        .map(|i| {
            let ctl = &sys.controls()[i % k];
            let quarter = 0.25 * (ctl.max - ctl.min);
            let (lo, hi) = (ctl.min + quarter, ctl.max - quarter);
            if hi > lo {
                rng.random_range(lo..hi)
            } else {
                lo
            }
        })
        .collect()
}

/// Single gradient-ascent run from a random seed drawn from `rng`.
fn ascend(
    sys: &ControlSystem,
    psi_i: &StateVector,
    psi_f: &StateVector,
    cfg: &SearchConfig,
    rng: &mut SeededRng,
) -> SearchResult {
    let n = cfg.segment_count;
    let durations = vec![cfg.segment_duration; n];
    let (pi, pf) = (psi_i.as_vector(), psi_f.as_vector());

    // An all-zero waveform that already meets the goal is returned untouched.
    let zeros = vec![0.0; n * sys.num_controls()];
    let zero_allowed = sys.controls().iter().all(|c| c.contains(0.0));
    if zero_allowed {
        let j0 = objective_flat(sys, &durations, &zeros, pi, pf);
        if j0 >= cfg.fidelity_goal {
            return finish(sys, cfg, zeros, 0, vec![j0], psi_i, psi_f);
        }
    }

    let mut amps = random_seed_amplitudes(sys, n, rng);
    let (mut j, mut grad) = value_and_gradient(sys, &durations, &amps, pi, pf);
    let mut history = vec![j];
    let mut step = cfg.step_size;
    let mut iterations = 0;
    while iterations < cfg.max_iterations && j < cfg.fidelity_goal {
        if projected_gradient_norm(sys, &amps, &grad) < GRADIENT_FLOOR {
            break;
        }
        iterations += 1;
        if cfg.line_search {
            let mut accepted = None;
            while step >= MIN_STEP {
                let mut trial: Vec<f64> = amps.iter().zip(&grad).map(|(u, g)| u + step * g).collect();
                project(sys, &mut trial);
                let ascent: f64 = trial
                    .iter()
                    .zip(&amps)
                    .zip(&grad)
                    .map(|((t, u), g)| (t - u) * g)
                    .sum();
                let jt = objective_flat(sys, &durations, &trial, pi, pf);
                if jt >= j + ARMIJO * ascent {
                    accepted = Some(trial);
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some(trial) => {
                    amps = trial;
                    step *= 2.0;
                }
                None => break,
            }
        } else {
            amps.iter_mut().zip(&grad).for_each(|(u, g)| *u += step * g);
            project(sys, &mut amps);
        }
        (j, grad) = value_and_gradient(sys, &durations, &amps, pi, pf);
        history.push(j);
    }
    finish(sys, cfg, amps, iterations, history, psi_i, psi_f)
}

fn finish(
    sys: &ControlSystem,
    cfg: &SearchConfig,
    amps: Vec<f64>,
    iterations: usize,
    objective_history: Vec<f64>,
    psi_i: &StateVector,
    psi_f: &StateVector,
) -> SearchResult {
    let k = sys.num_controls();
    let waveform = Waveform::new(
        amps.chunks(k)
            .map(|a| Segment {
                duration: cfg.segment_duration,
                amplitudes: a.to_vec(),
            })
            .collect(),
    );
    let fidelity = objective_state_prep(sys, &waveform, psi_i, psi_f).expect("validated waveform");
    SearchResult {
        waveform,
        fidelity,
        iterations,
        converged: fidelity >= cfg.fidelity_goal,
        objective_history,
    }
}

/// One gradient-ascent run seeded from stream 0 of `cfg.seed`.
pub fn search_state_map(
    sys: &ControlSystem,
    psi_i: &StateVector,
    psi_f: &StateVector,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    check_states(sys, psi_i, psi_f)?;
    cfg.validate()?;
    Ok(ascend(sys, psi_i, psi_f, cfg, &mut rng_stream(cfg.seed, 0)))
}

/// `cfg.restarts` independent runs, restart `r` on stream `r`; the first run
/// with the highest fidelity is returned.
pub fn multi_start(
    sys: &ControlSystem,
    psi_i: &StateVector,
    psi_f: &StateVector,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    check_states(sys, psi_i, psi_f)?;
    cfg.validate()?;
    let runs: Vec<SearchResult> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|r| ascend(sys, psi_i, psi_f, cfg, &mut rng_stream(cfg.seed, r)))
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.fidelity > runs[best].fidelity {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).expect("restarts >= 1"))
}
