// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Maps between `n`-dimensional subspaces built from π-rotations
//! `S(a, b) = I - 2|φ⟩⟨φ|`, each fixing everything already mapped.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{propagate, ControlSystem, Waveform};
use crate::eigen_synth::{step_seed, StepReport, SynthesisReport};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, StateVector, UnitaryMatrix, C64};
use crate::search::{multi_start, SearchConfig};

/// Rotations with `‖a - b'‖` at or below this are the identity.
pub const SKIP_TOL: f64 = 1e-9;
/// Overlaps at or below this are treated as zero when fixing `θ`.
pub const ZERO_OVERLAP_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SubspaceMapSpec {
    pub source: Vec<StateVector>,
    pub target: Vec<StateVector>,
    pub phase_correction: bool,
}

fn check_orthonormal(basis: &[StateVector]) -> Result<()> {
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let overlap = basis[i].inner(&basis[j])?;
            let expected = if i == j { 1.0 } else { 0.0 };
            let err = (overlap - c(expected)).norm();
            if err > ORTHONORMAL_TOL {
                return Err(Error::NotOrthonormal {
                    i,
                    j,
                    overlap: overlap.norm(),
                });
            }
        }
    }
    Ok(())
}

impl SubspaceMapSpec {
    pub fn new(source: Vec<StateVector>, target: Vec<StateVector>, phase_correction: bool) -> Result<Self> {
        let spec = Self {
            source,
            target,
            phase_correction,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.source.len();
        if n == 0 {
            return Err(Error::config("source", "at least one basis vector is required"));
        }
        if self.target.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.target.len(),
            });
        }
        let d = self.dim();
        if n > d {
            return Err(Error::config(
                "source",
                format!("{n} vectors exceed dimension {d}"),
            ));
        }
        for v in self.source.iter().chain(&self.target) {
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.dim(),
                });
            }
        }
        check_orthonormal(&self.source)?;
        check_orthonormal(&self.target)
    }

    pub fn dim(&self) -> usize {
        self.source[0].dim()
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct PairRotation {
    pub unitary: UnitaryMatrix,
    /// `θ = arg⟨b|a⟩`; the rotation sends `a` to `e^{iθ}b`.
    pub theta: f64,
    /// `φ`, or `None` when the rotation is skipped.
    pub reflection: Option<StateVector>,
}

fn reflection_matrix(phi: &CVector) -> CMatrix {
    let d = phi.len();
    CMatrix::identity(d, d) - (phi * phi.adjoint()) * c(2.0)
}

/// `S = I - 2|φ⟩⟨φ|` with `φ ∝ a - e^{iθ}b`.
pub fn pair_rotation(a: &StateVector, b: &StateVector) -> Result<PairRotation> {
    let overlap = b.inner(a)?;
    let theta = if overlap.norm() <= ZERO_OVERLAP_TOL {
        0.0
    } else {
        overlap.arg()
    };
    let diff = a.as_vector() - b.as_vector() * C64::from_polar(1.0, theta);
    let d = a.dim();
    if diff.norm() <= SKIP_TOL {
        return Ok(PairRotation {
            unitary: UnitaryMatrix::identity(d),
            theta,
            reflection: None,
        });
    }
    let phi = StateVector::normalized(diff)?;
    Ok(PairRotation {
        unitary: UnitaryMatrix::from_unchecked(reflection_matrix(phi.as_vector())),
        theta,
        reflection: Some(phi),
    })
}

#[derive(Debug, Clone)]
pub struct RotationStep {
    /// `ã_k = s_{k-1}⋯s_1 a_k`.
    pub rotated_source: StateVector,
    /// `b_k' = e^{iθ_k} b_k`.
    pub target: StateVector,
    pub reflection: Option<StateVector>,
    pub theta: f64,
    pub rotation: UnitaryMatrix,
}

impl RotationStep {
    pub fn skipped(&self) -> bool {
        self.reflection.is_none()
    }
}

/// Sequential plan of the rotations `s_1, …, s_n`.
pub fn plan_subspace_map(spec: &SubspaceMapSpec) -> Result<Vec<RotationStep>> {
    spec.validate()?;
    let d = spec.dim();
    let mut so_far = CMatrix::identity(d, d);
    let mut steps = Vec::with_capacity(spec.len());
    for (a, b) in spec.source.iter().zip(&spec.target) {
        let rotated = StateVector::normalized(&so_far * a.as_vector())?;
        let rot = pair_rotation(&rotated, b)?;
        so_far = rot.unitary.as_matrix() * so_far;
        steps.push(RotationStep {
            rotated_source: rotated,
            target: b.scale_phase(rot.theta),
            reflection: rot.reflection,
            theta: rot.theta,
            rotation: rot.unitary,
        });
    }
    Ok(steps)
}

/// `Π_k e^{-iθ_k|b_k⟩⟨b_k|}`, undoing the rephased targets.
pub fn phase_correction(steps: &[RotationStep], spec: &SubspaceMapSpec) -> UnitaryMatrix {
    let d = spec.dim();
    let mut m = CMatrix::identity(d, d);
    for (step, b) in steps.iter().zip(&spec.target) {
        if step.theta != 0.0 {
            m += b.projector() * (C64::from_polar(1.0, -step.theta) - c(1.0));
        }
    }
    UnitaryMatrix::from_unchecked(m)
}

fn fold(rotations: impl IntoIterator<Item = CMatrix>, d: usize) -> CMatrix {
    rotations
        .into_iter()
        .fold(CMatrix::identity(d, d), |acc, s| s * acc)
}

/// `T = C · s_n ⋯ s_1`, with `C` the phase correction when requested.
pub fn assemble_subspace_map(steps: &[RotationStep], spec: &SubspaceMapSpec) -> Result<UnitaryMatrix> {
    if steps.len() != spec.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.len(),
            found: steps.len(),
        });
    }
    let d = spec.dim();
    let mut t = fold(steps.iter().map(|s| s.rotation.as_matrix().clone()), d);
    if spec.phase_correction {
        t = phase_correction(steps, spec).as_matrix() * t;
    }
    Ok(UnitaryMatrix::from_unchecked(t))
}

/// Product of independent rotations `S(a_i, b_i)`, without carrying earlier
/// rotations into later sources. Generally not a subspace map.
pub fn naive_subspace_map(spec: &SubspaceMapSpec) -> Result<UnitaryMatrix> {
    spec.validate()?;
    let rotations = spec
        .source
        .iter()
        .zip(&spec.target)
        .map(|(a, b)| pair_rotation(a, b).map(|r| r.unitary.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    Ok(UnitaryMatrix::from_unchecked(fold(rotations, spec.dim())))
}

/// `max_i ‖T a_i - b_i‖`.
pub fn basis_error(t: &UnitaryMatrix, spec: &SubspaceMapSpec) -> f64 {
    spec.source
        .iter()
        .zip(&spec.target)
        .map(|(a, b)| (t.as_matrix() * a.as_vector() - b.as_vector()).norm())
        .fold(0.0, f64::max)
}

/// `|Σ_i ⟨T_ideal a_i|T a_i⟩| / n`: trace fidelity restricted to the source
/// subspace.
pub fn subspace_fidelity(ideal: &UnitaryMatrix, realized: &UnitaryMatrix, spec: &SubspaceMapSpec) -> f64 {
    let sum: C64 = spec
        .source
        .iter()
        .map(|a| {
            let want = ideal.as_matrix() * a.as_vector();
            let got = realized.as_matrix() * a.as_vector();
            want.dotc(&got)
        })
        .sum();
    (sum.norm() / spec.len() as f64).min(1.0)
}

/// One rotation as realized on hardware.
#[derive(Debug, Clone)]
pub struct RealizedRotation {
    /// The full-space rotation actually applied.
    pub unitary: UnitaryMatrix,
    pub fidelity: f64,
    pub converged: bool,
    pub iterations: usize,
    pub waveform: Option<Waveform>,
}

/// Searches `φ → |fiducial⟩` on `sys` and realizes `V† e^{-iπ|0⟩⟨0|} V`.
pub fn realize_rotation(
    sys: &ControlSystem,
    phi: &StateVector,
    cfg: &SearchConfig,
) -> Result<RealizedRotation> {
    let fiducial = StateVector::basis(sys.dim(), sys.fiducial_index())?;
    let r = multi_start(sys, phi, &fiducial, cfg)?;
    let v = propagate(sys, &r.waveform)?;
    let row = v.as_matrix().row(sys.fiducial_index()).adjoint();
    let d = sys.dim();
    let s = CMatrix::identity(d, d) + (&row * row.adjoint()) * (C64::from_polar(1.0, -PI) - c(1.0));
    Ok(RealizedRotation {
        unitary: UnitaryMatrix::from_unchecked(s),
        fidelity: r.fidelity,
        converged: r.converged,
        iterations: r.iterations,
        waveform: Some(r.waveform),
    })
}

/// Plans ideally, then realizes every non-skipped rotation with `realize`
/// (called with the step index and `φ_k`, possibly in parallel). Phase
/// correction, when requested, is applied as an exact factor.
pub fn synthesize_subspace_map_with<F>(spec: &SubspaceMapSpec, realize: F) -> Result<SynthesisReport>
where
    F: Fn(usize, &StateVector) -> Result<RealizedRotation> + Sync,
{
    let steps = plan_subspace_map(spec)?;
    let ideal = assemble_subspace_map(&steps, spec)?;
    let d = spec.dim();

    let realized: Vec<(usize, Result<RealizedRotation>)> = steps
        .par_iter()
        .enumerate()
        .filter_map(|(k, s)| s.reflection.as_ref().map(|phi| (k, realize(k, phi))))
        .collect();
    let searches = realized.len();

    let mut rotations: Vec<CMatrix> = steps.iter().map(|s| s.rotation.as_matrix().clone()).collect();
    let mut reports: Vec<StepReport> = steps
        .iter()
        .enumerate()
        .map(|(k, s)| StepReport {
            index: k,
            phase: s.theta,
            skipped: s.skipped(),
            fidelity: 1.0,
            converged: true,
            iterations: 0,
        })
        .collect();
    let mut waveforms = Vec::new();
    for (k, res) in realized {
        let r = res?;
        if r.unitary.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: r.unitary.dim(),
            });
        }
        rotations[k] = r.unitary.into_matrix();
        reports[k].fidelity = r.fidelity;
        reports[k].converged = r.converged;
        reports[k].iterations = r.iterations;
        if let Some(w) = r.waveform {
            waveforms.push((k, w));
        }
    }

    let mut t = fold(rotations, d);
    if spec.phase_correction {
        t = phase_correction(&steps, spec).as_matrix() * t;
    }
    let assembled = UnitaryMatrix::from_unchecked(t);
    let fidelity = subspace_fidelity(&ideal, &assembled, spec);
    Ok(SynthesisReport {
        trace_fidelity: crate::linalg::trace_fidelity(&ideal, &assembled)?,
        subspace_fidelity: Some(fidelity),
        target: ideal,
        assembled,
        steps: reports,
        waveforms,
        searches,
    })
}

/// One search per non-skipped rotation on `sys`.
pub fn synthesize_subspace_map(
    sys: &ControlSystem,
    spec: &SubspaceMapSpec,
    cfg: &SearchConfig,
) -> Result<SynthesisReport> {
    if spec.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: spec.dim(),
        });
    }
    cfg.validate()?;
    synthesize_subspace_map_with(spec, |k, phi| {
        let cfg_k = SearchConfig {
            seed: step_seed(cfg.seed, k),
            ..cfg.clone()
        };
        realize_rotation(sys, phi, &cfg_k)
    })
}

/// Named basis vector in a spec file; amplitudes are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedVector {
    pub name: String,
    pub amplitudes: Vec<[f64; 2]>,
}

impl NamedVector {
    pub fn to_state(&self) -> Result<StateVector> {
        let v: Vec<C64> = self
            .amplitudes
            .iter()
            .map(|[re, im]| C64::new(*re, *im))
            .collect();
        StateVector::from_amplitudes(&v)
            .map_err(|e| Error::config(format!("vector `{}`", self.name), e.to_string()))
    }
}

/// On-disk form of a [`SubspaceMapSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceSpecFile {
    pub source: Vec<NamedVector>,
    pub target: Vec<NamedVector>,
    #[serde(default = "default_true")]
    pub phase_correction: bool,
}

fn default_true() -> bool {
    true
}

impl SubspaceSpecFile {
    pub fn to_spec(&self) -> Result<SubspaceMapSpec> {
        let source = self
            .source
            .iter()
            .map(NamedVector::to_state)
            .collect::<Result<Vec<_>>>()?;
        let target = self
            .target
            .iter()
            .map(NamedVector::to_state)
            .collect::<Result<Vec<_>>>()?;
        SubspaceMapSpec::new(source, target, self.phase_correction)
    }
}
