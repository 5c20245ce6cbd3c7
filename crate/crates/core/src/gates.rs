// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Generalized Pauli operators and single-qudit Clifford generators.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, UnitaryMatrix, C64};

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

/// `ω^k` with `ω = e^{2πi/d}`; `k` is reduced mod `d` first.
fn omega_pow(k: i64, d: usize) -> C64 {
    let r = k.rem_euclid(d as i64);
    C64::from_polar(1.0, TAU * r as f64 / d as f64)
}

fn permutation(d: usize, image: impl Fn(usize) -> usize) -> UnitaryMatrix {
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        m[(image(j), j)] = c(1.0);
    }
    UnitaryMatrix::from_unchecked(m)
}

/// `X|j⟩ = |j ⊕ 1⟩`.
pub fn pauli_x(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    Ok(permutation(d, |j| (j + 1) % d))
}

/// `Z|j⟩ = ω^j|j⟩`.
pub fn pauli_z(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    Ok(UnitaryMatrix::from_unchecked(CMatrix::from_fn(d, d, |r, col| {
        if r == col {
            omega_pow(r as i64, d)
        } else {
            c(0.0)
        }
    })))
}

/// Discrete Fourier transform, `H|j⟩ = d^{-1/2} Σ_k ω^{jk}|k⟩`.
pub fn dft_h(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    Ok(UnitaryMatrix::from_unchecked(CMatrix::from_fn(d, d, |k, j| {
        omega_pow((j * k) as i64, d) * norm
    })))
}

/// Which quadratic phase the `S` gate carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SConvention {
    /// Exponent split on the parity of the level `j`:
    /// `j(j-1)/2` for odd `j`, `j²/2` for even `j`, reduced mod `d`.
    #[default]
    LevelParity,
    /// Exponent split on the parity of the dimension: `ω^{j(j-1)/2}` for
    /// odd `d`, `e^{iπj²/d}` for even `d`.
    DimensionParity,
}

impl FromStr for SConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "level-parity" => Ok(SConvention::LevelParity),
            "dimension-parity" => Ok(SConvention::DimensionParity),
            other => Err(Error::config(
                "s-convention",
                format!("unknown convention `{other}` (expected level-parity or dimension-parity)"),
            )),
        }
    }
}

/// Nonlinear phase gate.
pub fn phase_s(d: usize, convention: SConvention) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let phase = |j: usize| -> C64 {
        let j = j as i64;
        match convention {
            SConvention::LevelParity if j % 2 == 1 => omega_pow(j * (j - 1) / 2, d),
            SConvention::LevelParity => omega_pow(j * j / 2, d),
            SConvention::DimensionParity if d % 2 == 1 => omega_pow(j * (j - 1) / 2, d),
            SConvention::DimensionParity => {
                C64::from_polar(1.0, PI * ((j * j) % (2 * d as i64)) as f64 / d as f64)
            }
        }
    };
    Ok(UnitaryMatrix::from_unchecked(CMatrix::from_fn(d, d, |r, col| {
        if r == col {
            phase(r)
        } else {
            c(0.0)
        }
    })))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Inverse of `a` modulo `d`.
pub fn mod_inverse(a: i64, d: usize) -> Result<i64> {
    let m = d as i64;
    let a = a.rem_euclid(m);
    if gcd(a, m) != 1 {
        return Err(Error::NotCoprime { a, d });
    }
    let (mut r0, mut r1) = (m, a);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    Ok(t0.rem_euclid(m))
}

/// `G_a|j⟩ = |aj mod d⟩`.
pub fn mult_g(a: i64, d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let m = d as i64;
    if gcd(a.rem_euclid(m), m) != 1 {
        return Err(Error::NotCoprime { a, d });
    }
    Ok(permutation(d, |j| (a * j as i64).rem_euclid(m) as usize))
}

/// Integer matrix power by repeated multiplication; negative powers use the
/// adjoint.
pub fn unitary_power(u: &UnitaryMatrix, k: i64) -> UnitaryMatrix {
    let base = if k < 0 { u.adjoint() } else { u.clone() };
    let mut out = CMatrix::identity(u.dim(), u.dim());
    for _ in 0..k.unsigned_abs() {
        out = base.as_matrix() * out;
    }
    UnitaryMatrix::from_unchecked(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    X,
    Z,
    H,
    S,
    G(i64),
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" => Ok(GateKind::X),
            "Z" => Ok(GateKind::Z),
            "H" => Ok(GateKind::H),
            "S" => Ok(GateKind::S),
            _ => match s.strip_prefix("G:").map(str::parse::<i64>) {
                Some(Ok(a)) => Ok(GateKind::G(a)),
                _ => Err(Error::UnknownGate(s.to_string())),
            },
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::X => write!(f, "X"),
            GateKind::Z => write!(f, "Z"),
            GateKind::H => write!(f, "H"),
            GateKind::S => write!(f, "S"),
            GateKind::G(a) => write!(f, "G:{a}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub d: usize,
}

impl GateSpec {
    pub fn new(kind: GateKind, d: usize) -> Result<Self> {
        check_dim(d)?;
        if let GateKind::G(a) = kind {
            mod_inverse(a, d)?;
        }
        Ok(Self { kind, d })
    }

    pub fn matrix(&self, convention: SConvention) -> Result<UnitaryMatrix> {
        match self.kind {
            GateKind::X => pauli_x(self.d),
            GateKind::Z => pauli_z(self.d),
            GateKind::H => dft_h(self.d),
            GateKind::S => phase_s(self.d, convention),
            GateKind::G(a) => mult_g(a, self.d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub relation: String,
    /// Largest entry of `|lhs - rhs|`.
    pub deviation: f64,
    /// The same after removing the best global phase from `lhs`.
    pub deviation_up_to_phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffordReport {
    pub d: usize,
    pub s_convention: SConvention,
    pub relations: Vec<RelationCheck>,
}

impl CliffordReport {
    pub fn max_deviation(&self) -> f64 {
        self.relations.iter().map(|r| r.deviation).fold(0.0, f64::max)
    }

    pub fn failures(&self, tol: f64) -> Vec<&RelationCheck> {
        self.relations.iter().filter(|r| r.deviation > tol).collect()
    }
}

fn conjugate(g: &UnitaryMatrix, p: &UnitaryMatrix) -> CMatrix {
    g.as_matrix() * p.as_matrix() * g.as_matrix().adjoint()
}

fn check(relation: String, lhs: CMatrix, rhs: &UnitaryMatrix) -> RelationCheck {
    let rhs = rhs.as_matrix();
    let deviation = (&lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let overlap: C64 = rhs.iter().zip(lhs.iter()).map(|(r, l)| l.conj() * r).sum();
    let rotor = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        c(1.0)
    };
    let aligned = lhs * rotor;
    let deviation_up_to_phase = (&aligned - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
    RelationCheck {
        relation,
        deviation,
        deviation_up_to_phase,
    }
}

/// Evaluates the conjugation relations of `H`, `S` and `G_a` (for every
/// `a` coprime to `d`).
pub fn verify_clifford_relations(d: usize, convention: SConvention) -> Result<CliffordReport> {
    check_dim(d)?;
    let x = pauli_x(d)?;
    let z = pauli_z(d)?;
    let h = dft_h(d)?;
    let s = phase_s(d, convention)?;
    let xz = UnitaryMatrix::from_unchecked(x.as_matrix() * z.as_matrix());

    let mut relations = vec![
        check("H X H† = Z".into(), conjugate(&h, &x), &z),
        check("H Z H† = X^-1".into(), conjugate(&h, &z), &x.adjoint()),
        check("S X S† = X Z".into(), conjugate(&s, &x), &xz),
        check("S Z S† = Z".into(), conjugate(&s, &z), &z),
    ];
    for a in 1..d as i64 {
        let Ok(inv) = mod_inverse(a, d) else {
            continue;
        };
        let g = mult_g(a, d)?;
        relations.push(check(
            format!("G_{a} X G_{a}† = X^{a}"),
            conjugate(&g, &x),
            &unitary_power(&x, a),
        ));
        relations.push(check(
            format!("G_{a} Z G_{a}† = Z^{inv}"),
            conjugate(&g, &z),
            &unitary_power(&z, inv),
        ));
    }
    Ok(CliffordReport {
        d,
        s_convention: convention,
        relations,
    })
}
