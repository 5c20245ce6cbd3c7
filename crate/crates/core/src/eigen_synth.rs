// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Full unitaries from their eigen-decomposition,
//! `W = Π_j V_j† e^{-iλ_j|0⟩⟨0|} V_j` with `V_j|φ_j⟩ = |0⟩` up to phase.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{propagate, ControlSystem, Waveform};
use crate::error::{Error, Result};
use crate::linalg::{c, eig_unitary, trace_fidelity, CMatrix, StateVector, UnitaryMatrix, C64};
use crate::search::{multi_start, SearchConfig};

/// Eigenphases this close to 0 (mod 2π) need no factor.
pub const SKIP_PHASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum Mapper {
    /// Algebraic reflection, exact to roundoff.
    Exact(UnitaryMatrix),
    /// A searched waveform together with the propagator it realizes.
    Searched {
        waveform: Waveform,
        fidelity: f64,
        converged: bool,
        realized: UnitaryMatrix,
    },
}

impl Mapper {
    pub fn unitary(&self) -> &UnitaryMatrix {
        match self {
            Mapper::Exact(v) => v,
            Mapper::Searched { realized, .. } => realized,
        }
    }
}

/// `|⟨fiducial|V|φ⟩|²`.
pub fn mapper_fidelity(v: &UnitaryMatrix, phi: &StateVector, fiducial_index: usize) -> f64 {
    let row = v.as_matrix().row(fiducial_index);
    (row * phi.as_vector())[(0, 0)].norm_sqr().min(1.0)
}

#[derive(Debug, Clone)]
pub struct EigenPlanStep {
    /// Radians in `[0, 2π)`.
    pub phase: f64,
    pub eigenvector: StateVector,
    pub skippable: bool,
    pub mapper: Option<Mapper>,
}

/// One eigen-decomposition step of `W`, in the order returned by the
/// spectral decomposition.
pub fn plan_unitary(w: &UnitaryMatrix) -> Result<Vec<EigenPlanStep>> {
    let spec = eig_unitary(w)?;
    Ok(spec
        .phases
        .into_iter()
        .zip(spec.vectors)
        .map(|(phase, eigenvector)| EigenPlanStep {
            phase,
            eigenvector,
            skippable: phase <= SKIP_PHASE_TOL || (TAU - phase) <= SKIP_PHASE_TOL,
            mapper: None,
        })
        .collect())
}

/// Householder reflection sending `φ` to `e^{iθ}|fiducial⟩`, with `θ` the
/// phase of `φ`'s fiducial amplitude.
pub fn exact_mapper(phi: &StateVector, fiducial_index: usize) -> Result<UnitaryMatrix> {
    let d = phi.dim();
    if fiducial_index >= d {
        return Err(Error::IndexOutOfRange {
            index: fiducial_index,
            dim: d,
        });
    }
    let x = phi.as_vector();
    let f = x[fiducial_index];
    let rotor = if f.norm() > 0.0 { f / f.norm() } else { c(1.0) };
    let mut v = x.clone();
    v[fiducial_index] -= rotor;
    let vv = v.norm_squared();
    if vv < 1e-28 {
        return Ok(UnitaryMatrix::identity(d));
    }
    let h = CMatrix::identity(d, d) - (&v * v.adjoint()) * c(2.0 / vv);
    Ok(UnitaryMatrix::from_unchecked(h))
}

/// Attaches an exact mapper to every non-skippable step.
pub fn attach_exact_mappers(steps: &mut [EigenPlanStep], fiducial_index: usize) -> Result<()> {
    for step in steps.iter_mut().filter(|s| !s.skippable) {
        step.mapper = Some(Mapper::Exact(exact_mapper(&step.eigenvector, fiducial_index)?));
    }
    Ok(())
}

/// `V† e^{-iλ|0⟩⟨0|} V = I + (e^{-iλ} - 1) V†|0⟩⟨0|V`.
fn step_factor(v: &UnitaryMatrix, phase: f64, fiducial_index: usize) -> CMatrix {
    let d = v.dim();
    let row = v.as_matrix().row(fiducial_index).adjoint();
    CMatrix::identity(d, d) + (&row * row.adjoint()) * (C64::from_polar(1.0, -phase) - c(1.0))
}

/// Product of the step factors applied in index order (step 0 rightmost).
pub fn assemble_unitary(steps: &[EigenPlanStep], d: usize, fiducial_index: usize) -> Result<UnitaryMatrix> {
    if fiducial_index >= d {
        return Err(Error::IndexOutOfRange {
            index: fiducial_index,
            dim: d,
        });
    }
    let mut u = CMatrix::identity(d, d);
    for (i, step) in steps.iter().enumerate() {
        if step.skippable {
            continue;
        }
        let mapper = step.mapper.as_ref().ok_or(Error::MissingMapper { step: i })?;
        let v = mapper.unitary();
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.dim(),
            });
        }
        u = step_factor(v, step.phase, fiducial_index) * u;
    }
    Ok(UnitaryMatrix::from_unchecked(u))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub phase: f64,
    pub skipped: bool,
    /// `|⟨0|V_j|φ_j⟩|²`; 1 for skipped and exact steps.
    pub fidelity: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub target: UnitaryMatrix,
    pub assembled: UnitaryMatrix,
    pub trace_fidelity: f64,
    /// Fidelity restricted to the mapped subspace, for subspace maps.
    pub subspace_fidelity: Option<f64>,
    pub steps: Vec<StepReport>,
    /// Searched waveforms by step index.
    pub waveforms: Vec<(usize, Waveform)>,
    pub searches: usize,
}

impl SynthesisReport {
    pub fn step_fidelities(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.fidelity).collect()
    }

    pub fn skipped_steps(&self) -> Vec<usize> {
        self.steps.iter().filter(|s| s.skipped).map(|s| s.index).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.steps.iter().all(|s| s.converged)
    }

    /// Total duration of the searched waveforms and their inverses.
    pub fn waveform_duration(&self) -> f64 {
        2.0 * self
            .waveforms
            .iter()
            .map(|(_, w)| w.total_duration())
            .sum::<f64>()
    }
}

/// Per-step seed so that steps searched in parallel use unrelated streams.
pub(crate) fn step_seed(seed: u64, step: usize) -> u64 {
    seed ^ ((step as u64 + 1) << 40)
}

/// Searches `φ_j → |0⟩` for every non-skippable eigenvector of `W` and
/// assembles the result with exact adjoints of the searched propagators.
pub fn synthesize_unitary(
    sys: &ControlSystem,
    w: &UnitaryMatrix,
    cfg: &SearchConfig,
) -> Result<SynthesisReport> {
    if w.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: w.dim(),
        });
    }
    cfg.validate()?;
    let fiducial_index = sys.fiducial_index();
    let fiducial = StateVector::basis(sys.dim(), fiducial_index)?;
    let mut steps = plan_unitary(w)?;

    let searched: Vec<(usize, Result<(Mapper, usize)>)> = steps
        .par_iter()
        .enumerate()
        .filter(|(_, s)| !s.skippable)
        .map(|(i, s)| {
            let cfg_i = SearchConfig {
                seed: step_seed(cfg.seed, i),
                ..cfg.clone()
            };
            let run = || -> Result<(Mapper, usize)> {
                let r = multi_start(sys, &s.eigenvector, &fiducial, &cfg_i)?;
                let realized = propagate(sys, &r.waveform)?;
                Ok((
                    Mapper::Searched {
                        waveform: r.waveform,
                        fidelity: r.fidelity,
                        converged: r.converged,
                        realized,
                    },
                    r.iterations,
                ))
            };
            (i, run())
        })
        .collect();

    let searches = searched.len();
    let mut iterations = vec![0; steps.len()];
    for (i, res) in searched {
        let (mapper, its) = res?;
        steps[i].mapper = Some(mapper);
        iterations[i] = its;
    }
    let assembled = assemble_unitary(&steps, sys.dim(), fiducial_index)?;
    let fidelity = trace_fidelity(w, &assembled)?;

    let mut waveforms = Vec::new();
    let reports = steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (fidelity, converged) = match &s.mapper {
                Some(Mapper::Searched {
                    waveform,
                    fidelity,
                    converged,
                    ..
                }) => {
                    waveforms.push((i, waveform.clone()));
                    (*fidelity, *converged)
                }
                _ => (1.0, true),
            };
            StepReport {
                index: i,
                phase: s.phase,
                skipped: s.skippable,
                fidelity,
                converged,
                iterations: iterations[i],
            }
        })
        .collect();

    Ok(SynthesisReport {
        target: w.clone(),
        assembled,
        trace_fidelity: fidelity,
        subspace_fidelity: None,
        steps: reports,
        waveforms,
        searches,
    })
}

/// The same pipeline with exact mappers and no searches.
pub fn synthesize_unitary_exact(w: &UnitaryMatrix, fiducial_index: usize) -> Result<SynthesisReport> {
    let mut steps = plan_unitary(w)?;
    attach_exact_mappers(&mut steps, fiducial_index)?;
    let assembled = assemble_unitary(&steps, w.dim(), fiducial_index)?;
    let fidelity = trace_fidelity(w, &assembled)?;
    let reports = steps
        .iter()
        .enumerate()
        .map(|(i, s)| StepReport {
            index: i,
            phase: s.phase,
            skipped: s.skippable,
            fidelity: s.mapper.as_ref().map_or(1.0, |m| {
                mapper_fidelity(m.unitary(), &s.eigenvector, fiducial_index)
            }),
            converged: true,
            iterations: 0,
        })
        .collect();
    Ok(SynthesisReport {
        target: w.clone(),
        assembled,
        trace_fidelity: fidelity,
        subspace_fidelity: None,
        steps: reports,
        waveforms: Vec::new(),
        searches: 0,
    })
}
