// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Bilinear control systems `H(t) = H₀ + Σ_k u_k(t) H_k` driven by
//! piecewise-constant waveforms.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, exp_from_eigen, hermitian_eigen, CMatrix, HermitianMatrix, UnitaryMatrix, C64};

/// One control channel: a generator and the box bounds on its amplitude.
#[derive(Debug, Clone)]
pub struct Control {
    pub name: String,
    pub generator: HermitianMatrix,
    pub min: f64,
    pub max: f64,
}

impl Control {
    pub fn new(name: impl Into<String>, generator: HermitianMatrix, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            generator,
            min,
            max,
        }
    }

    pub fn contains(&self, amplitude: f64) -> bool {
        amplitude >= self.min && amplitude <= self.max
    }
}

#[derive(Debug, Clone)]
pub struct ControlSystem {
    drift: HermitianMatrix,
    controls: Vec<Control>,
    fiducial_index: usize,
    reversible_drift: bool,
}

impl ControlSystem {
    pub fn new(
        drift: HermitianMatrix,
        controls: Vec<Control>,
        fiducial_index: usize,
        reversible_drift: bool,
    ) -> Result<Self> {
        let dim = drift.dim();
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if fiducial_index >= dim {
            return Err(Error::IndexOutOfRange {
                index: fiducial_index,
                dim,
            });
        }
        for (k, ctl) in controls.iter().enumerate() {
            if ctl.generator.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: ctl.generator.dim(),
                });
            }
            if !(ctl.min.is_finite() && ctl.max.is_finite()) || ctl.min > ctl.max {
                return Err(Error::config(
                    format!("controls[{k}].bounds"),
                    format!("invalid interval [{}, {}]", ctl.min, ctl.max),
                ));
            }
        }
        Ok(Self {
            drift,
            controls,
            fiducial_index,
            reversible_drift,
        })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn drift(&self) -> &HermitianMatrix {
        &self.drift
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn fiducial_index(&self) -> usize {
        self.fiducial_index
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible_drift
    }

    /// The same controls with `-H₀` as drift.
    pub fn with_negated_drift(&self) -> ControlSystem {
        ControlSystem {
            drift: self.drift.scaled(-1.0),
            ..self.clone()
        }
    }

    /// `H₀ + Σ_k u_k H_k` for one segment.
    pub(crate) fn hamiltonian(&self, amplitudes: &[f64]) -> CMatrix {
        let mut h = self.drift.as_matrix().clone();
        for (ctl, &u) in self.controls.iter().zip(amplitudes) {
            if u != 0.0 {
                h += ctl.generator.as_matrix() * c(u);
            }
        }
        h
    }

    /// Checks durations, control counts and amplitude bounds.
    pub fn validate(&self, w: &Waveform) -> Result<()> {
        for (i, seg) in w.segments.iter().enumerate() {
            if !(seg.duration.is_finite() && seg.duration > 0.0) {
                return Err(Error::InvalidDuration {
                    segment: i,
                    duration: seg.duration,
                });
            }
            if seg.amplitudes.len() != self.num_controls() {
                return Err(Error::ControlCountMismatch {
                    segment: i,
                    expected: self.num_controls(),
                    found: seg.amplitudes.len(),
                });
            }
            for (k, (&u, ctl)) in seg.amplitudes.iter().zip(&self.controls).enumerate() {
                if !ctl.contains(u) {
                    return Err(Error::AmplitudeOutOfBounds {
                        segment: i,
                        control: k,
                        value: u,
                        min: ctl.min,
                        max: ctl.max,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Seconds.
    pub duration: f64,
    pub amplitudes: Vec<f64>,
}

/// Piecewise-constant control waveform; segment 0 is applied first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Waveform {
    pub segments: Vec<Segment>,
}

impl Waveform {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    /// Equal-duration segments with amplitudes given segment-major.
    pub fn uniform(duration: f64, num_controls: usize, amplitudes: &[f64]) -> Self {
        assert!(num_controls > 0 && amplitudes.len().is_multiple_of(num_controls));
        Self {
            segments: amplitudes
                .chunks(num_controls)
                .map(|a| Segment {
                    duration,
                    amplitudes: a.to_vec(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// All amplitudes, segment-major.
    pub fn flat_amplitudes(&self) -> Vec<f64> {
        self.segments
            .iter()
            .flat_map(|s| s.amplitudes.iter().copied())
            .collect()
    }

    /// Waveform followed by `other`.
    pub fn then(&self, other: &Waveform) -> Waveform {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        Waveform { segments }
    }
}

/// Time-ordered propagator, last segment leftmost.
pub fn propagate(sys: &ControlSystem, w: &Waveform) -> Result<UnitaryMatrix> {
    sys.validate(w)?;
    let d = sys.dim();
    let mut u = CMatrix::identity(d, d);
    for seg in &w.segments {
        let eig = hermitian_eigen(&sys.hamiltonian(&seg.amplitudes));
        u = exp_from_eigen(&eig, seg.duration) * u;
    }
    Ok(UnitaryMatrix::from_unchecked(u))
}

/// `propagate(sys, w)†`, the exact inverse used by every synthesis pipeline.
pub fn apply_adjoint(sys: &ControlSystem, w: &Waveform) -> Result<UnitaryMatrix> {
    Ok(propagate(sys, w)?.adjoint())
}

/// Time-reversed waveform: segment order reversed, amplitudes negated.
///
/// Under the negated drift (see [`ControlSystem::with_negated_drift`]) the
/// result propagates to the adjoint of the original. Bound violations report
/// the index of the offending segment in `w`.
pub fn reverse_waveform(sys: &ControlSystem, w: &Waveform) -> Result<Waveform> {
    sys.validate(w)?;
    let drift_is_zero = sys.drift().as_matrix().iter().all(|z| *z == C64::new(0.0, 0.0));
    if !sys.is_reversible() && !drift_is_zero {
        return Err(Error::IrreversibleDrift);
    }
    let mut segments = Vec::with_capacity(w.len());
    for (i, seg) in w.segments.iter().enumerate().rev() {
        let amplitudes: Vec<f64> = seg.amplitudes.iter().map(|u| -u).collect();
        for (k, (&u, ctl)) in amplitudes.iter().zip(sys.controls()).enumerate() {
            if !ctl.contains(u) {
                return Err(Error::AmplitudeOutOfBounds {
                    segment: i,
                    control: k,
                    value: u,
                    min: ctl.min,
                    max: ctl.max,
                });
            }
        }
        segments.push(Segment {
            duration: seg.duration,
            amplitudes,
        });
    }
    Ok(Waveform { segments })
}

/// Dimension of the real Lie algebra generated by `{iH₀, iH_1, …, iH_K}`,
/// found by closing the span under commutators with the generators. A value
/// of `d² - 1` or more (su(d) or u(d)) certifies full controllability.
pub fn lie_algebra_dimension(sys: &ControlSystem) -> usize {
    let d = sys.dim();
    let target = d * d;
    let generators: Vec<CMatrix> = std::iter::once(sys.drift())
        .chain(sys.controls().iter().map(|c| &c.generator))
        .filter(|h| h.as_matrix().norm() > 0.0)
        .map(|h| h.as_matrix() * C64::new(0.0, 1.0 / h.as_matrix().norm()))
        .collect();

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut frontier: Vec<CMatrix> = Vec::new();
    // Generators and frontier elements have unit norm, so commutators that
    // vanish analytically come out at roundoff level.
    let push = |m: &CMatrix, basis: &mut Vec<Vec<f64>>| -> Option<CMatrix> {
        let mut v: Vec<f64> = m.iter().flat_map(|z| [z.re, z.im]).collect();
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if scale < 1e-10 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= scale);
        // Two passes of Gram-Schmidt keep the basis orthonormal to roundoff.
        for _ in 0..2 {
            for b in basis.iter() {
                let dot: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let residual = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if residual < 1e-8 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= residual);
        let out = CMatrix::from_fn(d, d, |r, col| {
            let k = 2 * (col * d + r);
            C64::new(v[k], v[k + 1])
        });
        basis.push(v);
        Some(out)
    };

    for g in &generators {
        if let Some(m) = push(g, &mut basis) {
            frontier.push(m);
        }
    }
    while !frontier.is_empty() && basis.len() < target {
        let mut next = Vec::new();
        for a in &frontier {
            for g in &generators {
                let comm = a * g - g * a;
                if let Some(m) = push(&comm, &mut basis) {
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    basis.len()
}

/// The factor `e^{-iλ|0⟩⟨0|}` on the fiducial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseImprint {
    angle: f64,
    fiducial_index: usize,
}

impl PhaseImprint {
    pub fn new(angle: f64, fiducial_index: usize) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::NonFinite("imprint angle"));
        }
        let angle = angle.rem_euclid(TAU);
        Ok(Self {
            angle: if angle >= TAU { 0.0 } else { angle },
            fiducial_index,
        })
    }

    /// Radians in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn fiducial_index(&self) -> usize {
        self.fiducial_index
    }
}

/// Diagonal unitary with `e^{-iλ}` at the fiducial position and 1 elsewhere.
pub fn phase_imprint_unitary(d: usize, p: &PhaseImprint) -> Result<UnitaryMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if p.fiducial_index >= d {
        return Err(Error::IndexOutOfRange {
            index: p.fiducial_index,
            dim: d,
        });
    }
    let mut m = CMatrix::identity(d, d);
    m[(p.fiducial_index, p.fiducial_index)] = C64::from_polar(1.0, -p.angle);
    Ok(UnitaryMatrix::from_unchecked(m))
}
