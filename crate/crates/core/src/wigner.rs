// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin Wigner functions on the sphere.
//!
//! `W(θ,φ) = Σ_{k=0}^{2F} Σ_{q=-k}^{k} ρ_kq Y_kq(θ,φ)` with
//! `ρ_kq = Tr(ρ T_kq†)` and orthonormal spherical tensors
//! `⟨F m|T_kq|F m'⟩ = (-1)^{F-m} √(2k+1) (F k F; -m q m')`. Basis index `i`
//! of a block is `m = F - i`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, HermitianMatrix, StateVector, C64};

/// Weight tolerated outside the spin block before a state is rejected.
pub const BLOCK_TOL: f64 = 1e-10;

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Wigner 3j symbol from doubled arguments (`tj = 2j`, `tm = 2m`), by the
/// Racah formula.
pub fn wigner_3j(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    let parity_ok = [(tj1, tm1), (tj2, tm2), (tj3, tm3)]
        .iter()
        .all(|&(j, m)| m.abs() <= j && (j + m) % 2 == 0);
    if !parity_ok || tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() || (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i64| x / 2;
    let (j1pj2mj3, j1mj2pj3, mj1pj2pj3) = (h(tj1 + tj2 - tj3), h(tj1 - tj2 + tj3), h(-tj1 + tj2 + tj3));
    let delta =
        factorial(j1pj2mj3) * factorial(j1mj2pj3) * factorial(mj1pj2pj3) / factorial(h(tj1 + tj2 + tj3) + 1);
    let norm = [tj1 + tm1, tj1 - tm1, tj2 + tm2, tj2 - tm2, tj3 + tm3, tj3 - tm3]
        .iter()
        .map(|&x| factorial(h(x)))
        .product::<f64>();

    let a = h(tj3 - tj2 + tm1);
    let b = h(tj3 - tj1 - tm2);
    let c = j1pj2mj3;
    let e = h(tj1 - tm1);
    let f = h(tj2 + tm2);
    let k_min = 0.max(-a).max(-b);
    let k_max = c.min(e).min(f);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(a + k)
            * factorial(b + k)
            * factorial(c - k)
            * factorial(e - k)
            * factorial(f - k);
        sum += if k % 2 == 0 { 1.0 } else { -1.0 } / den;
    }
    let phase_exp = h(tj1 - tj2 - tm3);
    let sign = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * (delta * norm).sqrt() * sum
}

fn block_spin(dim: usize) -> Result<i64> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(dim as i64 - 1)
}

/// Spherical tensor `T_kq` on a spin block of dimension `dim = 2F + 1`.
pub fn spherical_tensor(dim: usize, k: i64, q: i64) -> Result<CMatrix> {
    let tf = block_spin(dim)?;
    if k < 0 || k > tf || q.abs() > k {
        return Err(Error::config(
            "k, q",
            format!("no tensor T_{k},{q} on spin {}/2", tf),
        ));
    }
    let scale = ((2 * k + 1) as f64).sqrt();
    Ok(CMatrix::from_fn(dim, dim, |r, col| {
        // doubled m values
        let tm = tf - 2 * r as i64;
        let tmp = tf - 2 * col as i64;
        let sign = if ((tf - tm) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        C64::new(sign * scale * wigner_3j(tf, 2 * k, tf, -tm, 2 * q, tmp), 0.0)
    }))
}

/// Associated Legendre function `P_l^m(x)` for `m ≥ 0`, with the
/// Condon–Shortley phase.
fn legendre(l: i64, m: i64, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm2 = pmm;
    for ll in (m + 2)..=l {
        let p = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm2) / (ll - m) as f64;
        pm2 = pm1;
        pm1 = p;
    }
    pm1
}

/// Orthonormal spherical harmonic `Y_lm(θ, φ)`.
pub fn spherical_harmonic(l: i64, m: i64, theta: f64, phi: f64) -> C64 {
    if m.abs() > l {
        return C64::new(0.0, 0.0);
    }
    let am = m.abs();
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let y = C64::from_polar(norm * legendre(l, am, theta.cos()), am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Multipole moments `ρ_kq = Tr(ρ T_kq†)`, indexed `[k][q + k]`.
pub fn multipoles(rho: &HermitianMatrix) -> Result<Vec<Vec<C64>>> {
    let dim = rho.dim();
    let tf = block_spin(dim)?;
    (0..=tf)
        .map(|k| {
            (-k..=k)
                .map(|q| {
                    let t = spherical_tensor(dim, k, q)?;
                    Ok((rho.as_matrix() * t.adjoint()).trace())
                })
                .collect()
        })
        .collect()
}

/// Wigner function sampled on a regular `θ × φ` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    /// `n_θ` latitudes from 0 to π inclusive.
    pub thetas: Vec<f64>,
    /// `n_φ` longitudes `2πj/n_φ`.
    pub phis: Vec<f64>,
    /// Row `i` holds `θ_i`.
    pub values: DMatrix<f64>,
}

impl WignerGrid {
    /// Largest value and its `(row, column)`.
    pub fn argmax(&self) -> (f64, usize, usize) {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                if self.values[(i, j)] > best.0 {
                    best = (self.values[(i, j)], i, j);
                }
            }
        }
        best
    }

    /// Largest per-row variance over `φ`.
    pub fn max_row_variance(&self) -> f64 {
        self.values
            .row_iter()
            .map(|row| {
                let n = row.len() as f64;
                let mean = row.sum() / n;
                row.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n
            })
            .fold(0.0, f64::max)
    }
}

/// Wigner grid of a density matrix on a single spin block.
pub fn wigner_grid(rho: &HermitianMatrix, n_theta: usize, n_phi: usize) -> Result<WignerGrid> {
    if n_theta < 2 || n_phi < 1 {
        return Err(Error::config(
            "resolution",
            format!("need n_theta >= 2 and n_phi >= 1, got {n_theta} x {n_phi}"),
        ));
    }
    let moments = multipoles(rho)?;
    let thetas: Vec<f64> = (0..n_theta)
        .map(|i| PI * i as f64 / (n_theta - 1) as f64)
        .collect();
    let phis: Vec<f64> = (0..n_phi).map(|j| TAU * j as f64 / n_phi as f64).collect();
    // ρ_{k,-q} Y_{k,-q} is the conjugate of ρ_kq Y_kq for Hermitian ρ, so
    // only q ≥ 0 is summed.
    let values = DMatrix::from_fn(n_theta, n_phi, |i, j| {
        let mut w = 0.0;
        for (k, row) in moments.iter().enumerate() {
            let k = k as i64;
            for q in 0..=k {
                let term = row[(q + k) as usize] * spherical_harmonic(k, q, thetas[i], phis[j]);
                w += if q == 0 { term.re } else { 2.0 * term.re };
            }
        }
        w
    });
    Ok(WignerGrid { thetas, phis, values })
}

/// `|ψ⟩⟨ψ|` restricted to `levels`, rejecting weight elsewhere.
pub fn block_density(state: &CVector, levels: std::ops::Range<usize>) -> Result<HermitianMatrix> {
    let d = state.len();
    if levels.end > d || levels.is_empty() {
        return Err(Error::IndexOutOfRange {
            index: levels.end,
            dim: d,
        });
    }
    let outside: f64 = (0..d)
        .filter(|i| !levels.contains(i))
        .map(|i| state[i].norm_sqr())
        .sum();
    if outside > BLOCK_TOL {
        return Err(Error::OutsideBlock { weight: outside });
    }
    let v = StateVector::normalized(state.rows(levels.start, levels.len()).into_owned())?;
    HermitianMatrix::new(v.projector())
}

/// Same as [`block_density`] for a density matrix.
pub fn block_density_matrix(rho: &CMatrix, levels: std::ops::Range<usize>) -> Result<HermitianMatrix> {
    let d = rho.nrows();
    if levels.end > d || levels.is_empty() {
        return Err(Error::IndexOutOfRange {
            index: levels.end,
            dim: d,
        });
    }
    let outside = (0..d)
        .filter(|i| !levels.contains(i))
        .map(|i| rho[(i, i)].re.abs())
        .sum::<f64>();
    if outside > BLOCK_TOL {
        return Err(Error::OutsideBlock { weight: outside });
    }
    let n = levels.len();
    HermitianMatrix::new(rho.view((levels.start, levels.start), (n, n)).into_owned())
}

fn default_block_start() -> usize {
    0
}

/// Input file for the `wigner` command: either a pure state or a density
/// matrix, plus the levels forming the spin block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerStateFile {
    #[serde(default)]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub density: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default = "default_block_start")]
    pub block_start: usize,
    /// Defaults to every level from `block_start` on.
    #[serde(default)]
    pub block_len: Option<usize>,
}

impl WignerStateFile {
    pub fn to_density(&self) -> Result<HermitianMatrix> {
        let pair = |z: &[f64; 2]| C64::new(z[0], z[1]);
        match (&self.amplitudes, &self.density) {
            (Some(a), None) => {
                let v = CVector::from_iterator(a.len(), a.iter().map(pair));
                block_density(&v, self.levels(a.len())?)
            }
            (None, Some(rows)) => {
                let d = rows.len();
                if let Some(bad) = rows.iter().position(|r| r.len() != d) {
                    return Err(Error::config(
                        format!("density[{bad}]"),
                        format!("expected {d} entries, found {}", rows[bad].len()),
                    ));
                }
                let m = CMatrix::from_fn(d, d, |r, c| pair(&rows[r][c]));
                block_density_matrix(&m, self.levels(d)?)
            }
            _ => Err(Error::config(
                "amplitudes",
                "give exactly one of `amplitudes` and `density`",
            )),
        }
    }

    fn levels(&self, d: usize) -> Result<std::ops::Range<usize>> {
        let len = self.block_len.unwrap_or(d.saturating_sub(self.block_start));
        if len == 0 || self.block_start + len > d {
            return Err(Error::config(
                "block_len",
                format!(
                    "block {}..{} does not fit in {d} levels",
                    self.block_start,
                    self.block_start + len
                ),
            ));
        }
        Ok(self.block_start..self.block_start + len)
    }
}
