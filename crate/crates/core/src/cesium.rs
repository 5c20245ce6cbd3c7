// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Restricted ¹³³Cs ground-state control model.
//!
//! Eight levels: the seven `F = 3` sublevels `|3,3⟩ … |3,-3⟩` (indices 0..6)
//! plus one stretched `F = 4` sublevel (index 7), which serves as the
//! fiducial state. Controls, in order:
//!
//! 1. `rf_x`: `Fx` on the `F = 3` block
//! 2. `rf_y`: `Fy` on the `F = 3` block
//! 3. `uw_x`: `(|e⟩⟨g| + |g⟩⟨e|)/2` between the fiducial and its stretched partner
//! 4. `uw_y`: `(i|e⟩⟨g| - i|g⟩⟨e|)/2`
//! 5. `light_shift`: `|e⟩⟨e|`
//!
//! Each generator is scaled by its rate bound, so amplitudes are
//! dimensionless in `[-1, 1]`. The drift is `rf_detuning · Fz` on the
//! `F = 3` block (rotating frame).

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::control::{Control, ControlSystem, Segment, Waveform};
use crate::error::{Error, Result};
use crate::linalg::{c, mat_exp, CMatrix, HermitianMatrix, StateVector, C64};

pub const F3_LEVELS: usize = 7;
pub const RESTRICTED_DIM: usize = 8;
pub const FIDUCIAL_INDEX: usize = 7;
pub const DEFAULT_PRESET: &str = "cs133-f3-aux4";

/// Angular momentum matrices for spin `F` in the `|F, m⟩` basis ordered
/// `m = F, F-1, …, -F`.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    two_f: u32,
    pub fx: HermitianMatrix,
    pub fy: HermitianMatrix,
    pub fz: HermitianMatrix,
}

impl SpinOperators {
    pub fn f(&self) -> f64 {
        self.two_f as f64 / 2.0
    }

    pub fn two_f(&self) -> u32 {
        self.two_f
    }

    pub fn dim(&self) -> usize {
        self.two_f as usize + 1
    }

    /// `m` of basis index `i`.
    pub fn m_of(&self, i: usize) -> f64 {
        self.f() - i as f64
    }
}

fn two_f_of(f: f64) -> Result<u32> {
    let two_f = 2.0 * f;
    if !two_f.is_finite() || two_f < 0.0 || two_f.fract() != 0.0 || two_f > 200.0 {
        return Err(Error::InvalidSpin((two_f * 1.0).round() as i64));
    }
    Ok(two_f as u32)
}

/// Ladder-operator construction of `Fx`, `Fy`, `Fz`.
pub fn spin_operators(f: f64) -> Result<SpinOperators> {
    let two_f = two_f_of(f)?;
    let d = two_f as usize + 1;
    let m_of = |i: usize| f - i as f64;
    let mut raise = CMatrix::zeros(d, d);
    for i in 1..d {
        let m = m_of(i);
        raise[(i - 1, i)] = c((f * (f + 1.0) - m * (m + 1.0)).sqrt());
    }
    let lower = raise.adjoint();
    let fx = (&raise + &lower) * c(0.5);
    let fy = (&raise - &lower) * C64::new(0.0, -0.5);
    let fz = CMatrix::from_fn(d, d, |r, col| if r == col { c(m_of(r)) } else { c(0.0) });
    Ok(SpinOperators {
        two_f,
        fx: HermitianMatrix::new(fx)?,
        fy: HermitianMatrix::new(fy)?,
        fz: HermitianMatrix::new(fz)?,
    })
}

/// Which stretched `F = 4` sublevel plays the fiducial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aux {
    /// `|4, 4⟩`, microwave-coupled to `|3, 3⟩`.
    Plus4,
    /// `|4, -4⟩`, microwave-coupled to `|3, -3⟩`.
    Minus4,
}

impl Aux {
    pub fn from_m(m: i32) -> Result<Self> {
        match m {
            4 => Ok(Aux::Plus4),
            -4 => Ok(Aux::Minus4),
            other => Err(Error::InvalidAux(other)),
        }
    }

    pub fn m(self) -> i32 {
        match self {
            Aux::Plus4 => 4,
            Aux::Minus4 => -4,
        }
    }

    /// Index of the `F = 3` level the microwaves couple to.
    pub fn partner_index(self) -> usize {
        match self {
            Aux::Plus4 => 0,
            Aux::Minus4 => F3_LEVELS - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CesiumParams {
    /// Bound on the rf x/y rotation rates, rad/s.
    pub rf_rabi_max: f64,
    /// Bound on the microwave coupling rate, rad/s.
    pub uw_rabi_max: f64,
    /// Bound on the fiducial light-shift rate, rad/s.
    pub lightshift_max: f64,
    /// Drift `rf_detuning · Fz` on the `F = 3` block, rad/s.
    pub rf_detuning: f64,
    /// Default segment duration for searches, seconds.
    pub segment_duration: f64,
}

impl Default for CesiumParams {
    fn default() -> Self {
        Self {
            rf_rabi_max: TAU * 25e3,
            uw_rabi_max: TAU * 25e3,
            lightshift_max: TAU * 25e3,
            rf_detuning: 0.0,
            segment_duration: 10e-6,
        }
    }
}

impl CesiumParams {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            DEFAULT_PRESET => Ok(Self::default()),
            other => Err(Error::config("preset", format!("unknown preset `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rf_rabi_max", self.rf_rabi_max),
            ("uw_rabi_max", self.uw_rabi_max),
            ("lightshift_max", self.lightshift_max),
            ("segment_duration", self.segment_duration),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        if !self.rf_detuning.is_finite() {
            return Err(Error::config("rf_detuning", "must be finite"));
        }
        Ok(())
    }
}

/// Embeds an operator on the `F = 3` block into the 8-level space, zero on
/// the fiducial row and column.
fn embed_block(block: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(RESTRICTED_DIM, RESTRICTED_DIM);
    m.view_mut((0, 0), (F3_LEVELS, F3_LEVELS)).copy_from(block);
    m
}

/// Extends a 7-level gate by the identity on the fiducial.
pub fn embed_gate(gate: &CMatrix) -> Result<CMatrix> {
    if gate.nrows() != F3_LEVELS || gate.ncols() != F3_LEVELS {
        return Err(Error::DimensionMismatch {
            expected: F3_LEVELS,
            found: gate.nrows(),
        });
    }
    let mut m = embed_block(gate);
    m[(FIDUCIAL_INDEX, FIDUCIAL_INDEX)] = c(1.0);
    Ok(m)
}

/// The 8-level control system with the given auxiliary fiducial.
pub fn build_restricted_system(params: &CesiumParams, aux: Aux) -> Result<ControlSystem> {
    params.validate()?;
    let spin = spin_operators(3.0)?;
    let e = FIDUCIAL_INDEX;
    let g = aux.partner_index();

    let rf_x = embed_block(spin.fx.as_matrix()) * c(params.rf_rabi_max);
    let rf_y = embed_block(spin.fy.as_matrix()) * c(params.rf_rabi_max);
    let mut uw_x = CMatrix::zeros(RESTRICTED_DIM, RESTRICTED_DIM);
    uw_x[(e, g)] = c(0.5 * params.uw_rabi_max);
    uw_x[(g, e)] = c(0.5 * params.uw_rabi_max);
    let mut uw_y = CMatrix::zeros(RESTRICTED_DIM, RESTRICTED_DIM);
    uw_y[(e, g)] = C64::new(0.0, 0.5 * params.uw_rabi_max);
    uw_y[(g, e)] = C64::new(0.0, -0.5 * params.uw_rabi_max);
    let mut light = CMatrix::zeros(RESTRICTED_DIM, RESTRICTED_DIM);
    light[(e, e)] = c(params.lightshift_max);
    let drift = embed_block(spin.fz.as_matrix()) * c(params.rf_detuning);

    let controls = vec![
        Control::new("rf_x", HermitianMatrix::new(rf_x)?, -1.0, 1.0),
        Control::new("rf_y", HermitianMatrix::new(rf_y)?, -1.0, 1.0),
        Control::new("uw_x", HermitianMatrix::new(uw_x)?, -1.0, 1.0),
        Control::new("uw_y", HermitianMatrix::new(uw_y)?, -1.0, 1.0),
        Control::new("light_shift", HermitianMatrix::new(light)?, -1.0, 1.0),
    ];
    ControlSystem::new(HermitianMatrix::new(drift)?, controls, FIDUCIAL_INDEX, true)
}

/// Labels of the 8 basis states, in index order.
pub fn basis_labels(aux: Aux) -> Vec<String> {
    let mut labels: Vec<String> = (0..F3_LEVELS).map(|i| format!("|3,{}>", 3 - i as i32)).collect();
    labels.push(format!("|4,{}>", aux.m()));
    labels
}

/// `Fz` on the 8-level space, with the fiducial assigned its own `m` (±4).
pub fn restricted_fz(aux: Aux) -> CMatrix {
    let mut m = CMatrix::zeros(RESTRICTED_DIM, RESTRICTED_DIM);
    for i in 0..F3_LEVELS {
        m[(i, i)] = c(3.0 - i as f64);
    }
    m[(FIDUCIAL_INDEX, FIDUCIAL_INDEX)] = c(aux.m() as f64);
    m
}

/// Single light-shift segment imprinting phase `λ` on the fiducial.
pub fn light_shift_segment(params: &CesiumParams, lambda: f64) -> Waveform {
    Waveform::new(vec![Segment {
        duration: lambda.rem_euclid(TAU) / params.lightshift_max,
        amplitudes: vec![0.0, 0.0, 0.0, 0.0, 1.0],
    }])
}

/// Stretched state along `x`: `e^{-i(π/2)Fy} |F, m_z = m_x⟩`.
pub fn x_basis_state(f: f64, m_x: f64) -> Result<StateVector> {
    let spin = spin_operators(f)?;
    let index = f - m_x;
    if m_x.abs() > f || index.fract() != 0.0 {
        return Err(Error::InvalidProjection { f, m: m_x });
    }
    let rot = mat_exp(&spin.fy, FRAC_PI_2)?;
    rot.apply(&StateVector::basis(spin.dim(), index as usize)?)
}

/// `x_basis_state(3, m_x)` placed in a `dim`-level space whose first seven
/// levels are the `F = 3` block.
pub fn f3_x_state(m_x: i32, dim: usize) -> Result<StateVector> {
    let block = x_basis_state(3.0, m_x as f64)?;
    let mut v = crate::linalg::CVector::zeros(dim);
    v.rows_mut(0, F3_LEVELS).copy_from(block.as_vector());
    StateVector::new(v)
}
