// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for small quantum systems.
//!
//! Everything here works on `d <= 64` dense matrices. The newtypes carry the
//! invariants the rest of the crate relies on: [`StateVector`] is unit norm,
//! [`UnitaryMatrix`] satisfies `U†U = I` and [`HermitianMatrix`] is
//! self-adjoint, each checked once at construction.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Seedable generator used for every stochastic operation in the crate.
pub type SeededRng = ChaCha20Rng;

pub const STATE_NORM_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenphases closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-9;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent generator for sub-task `stream` of a seeded computation.
pub fn rng_stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-entry deviation of `m` from the identity.
pub fn identity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m - CMatrix::identity(n, n)))
}

fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    Ok(m.nrows())
}

fn require_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Unit-norm pure state of dimension `d >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidDimension(amplitudes.len()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(amplitudes))
    }

    /// Rescales `v` to unit norm.
    pub fn normalized(v: CVector) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::InvalidDimension(v.len()));
        }
        let norm = v.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite("state vector"));
        }
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self(v.unscale(norm)))
    }

    pub fn from_amplitudes(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    /// Standard basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        require_same_dim(self.dim(), other.dim())?;
        Ok(self.0.dotc(&other.0))
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }

    pub fn scale_phase(&self, theta: f64) -> StateVector {
        StateVector(self.0.map(|z| z * C64::from_polar(1.0, theta)))
    }
}

/// `d x d` unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        require_square(&m)?;
        let deviation = identity_deviation(&(m.adjoint() * &m));
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is unitary by construction.
    pub(crate) fn from_unchecked(m: CMatrix) -> Self {
        debug_assert!(identity_deviation(&(m.adjoint() * &m)) < 1e-8);
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self(self.0.adjoint())
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        require_same_dim(self.dim(), rhs.dim())?;
        Ok(Self(&self.0 * &rhs.0))
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        require_same_dim(self.dim(), psi.dim())?;
        StateVector::normalized(&self.0 * psi.as_vector())
    }

    /// Max-entry deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        identity_deviation(&(self.0.adjoint() * &self.0))
    }
}

/// Self-adjoint generator, in angular-frequency units.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        require_square(&m)?;
        let deviation = max_abs(&(&m - m.adjoint()));
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn scaled(&self, s: f64) -> HermitianMatrix {
        Self(self.0.scale(s))
    }
}

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues and the
/// unitary whose columns are the matching eigenvectors.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `exp(-i H t)`.
pub fn mat_exp(h: &HermitianMatrix, t: f64) -> Result<UnitaryMatrix> {
    if !t.is_finite() {
        return Err(Error::NonFinite("evolution time"));
    }
    Ok(UnitaryMatrix::from_unchecked(exp_from_eigen(
        &hermitian_eigen(h.as_matrix()),
        t,
    )))
}

pub(crate) fn exp_from_eigen((values, vectors): &(Vec<f64>, CMatrix), t: f64) -> CMatrix {
    let mut scaled = vectors.clone();
    for (j, lambda) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lambda * t);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    scaled * vectors.adjoint()
}

/// Eigenphases and eigenvectors of a unitary, `U = Σ_j e^{-iλ_j} |φ_j⟩⟨φ_j|`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// `λ_j` in `[0, 2π)`.
    pub phases: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, StateVector::dim)
    }

    pub fn reassemble(&self) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (lambda, phi) in self.phases.iter().zip(&self.vectors) {
            out += phi.projector() * C64::from_polar(1.0, -lambda);
        }
        out
    }
}

// Weights for the Hermitian combination Re(U) + γ Im(U). Distinct unitary
// eigenvalues collide under a given γ only on a measure-zero set, and each
// recursion level retries with the next weight.
const SPLIT_WEIGHTS: [f64; 4] = [
    0.754_877_666_246_692_7,
    -0.569_840_290_998_053_3,
    1.324_717_957_244_746,
    -0.414_213_562_373_095_1,
];
const CLUSTER_GAP: f64 = 1e-6;

/// Orthonormal eigenbasis of a normal matrix, via its commuting Hermitian
/// parts.
fn diagonalize_normal(m: &CMatrix, depth: usize) -> CMatrix {
    let n = m.nrows();
    let adj = m.adjoint();
    let re = (m + &adj) * c(0.5);
    let im = (m - &adj) * C64::new(0.0, -0.5);
    let h = re + im * c(SPLIT_WEIGHTS[depth % SPLIT_WEIGHTS.len()]);
    let (values, vectors) = hermitian_eigen(&h);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut q = CMatrix::from_fn(n, n, |r, col| vectors[(r, order[col])]);
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sorted[end] - sorted[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 && depth < 2 * SPLIT_WEIGHTS.len() {
            let block = q.columns(start, end - start).into_owned();
            let sub = block.adjoint() * m * &block;
            if off_diagonal_norm(&sub) > 1e-13 {
                let rotated = &block * diagonalize_normal(&sub, depth + 1);
                q.columns_mut(start, end - start).copy_from(&rotated);
            }
        }
        start = end;
    }
    q
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for col in 0..m.ncols() {
        for r in (0..m.nrows()).filter(|&r| r != col) {
            acc += m[(r, col)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Spectral decomposition of a unitary with eigenphases `λ_j = -arg(μ_j)`
/// mapped into `[0, 2π)`.
pub fn eig_unitary(u: &UnitaryMatrix) -> Result<SpectralDecomposition> {
    let deviation = u.unitarity_error();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let m = u.as_matrix();
    let n = m.nrows();
    let mut q = diagonalize_normal(m, 0);
    let diag = q.adjoint() * m * &q;
    let phases: Vec<f64> = (0..n)
        .map(|j| {
            let lambda = (-diag[(j, j)].arg()).rem_euclid(TAU);
            if lambda >= TAU {
                0.0
            } else {
                lambda
            }
        })
        .collect();

    // Re-orthonormalize each degenerate cluster; any basis of the eigenspace
    // is acceptable.
    let mut seen = vec![false; n];
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let cluster: Vec<usize> = (i..n)
            .filter(|&j| !seen[j] && circular_distance(phases[i], phases[j]) < DEGENERACY_TOL)
            .collect();
        for &j in &cluster {
            seen[j] = true;
        }
        if cluster.len() > 1 {
            gram_schmidt_columns(&mut q, &cluster);
        }
    }

    let vectors = (0..n)
        .map(|j| StateVector::normalized(q.column(j).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralDecomposition { phases, vectors })
}

pub(crate) fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn gram_schmidt_columns(q: &mut CMatrix, cols: &[usize]) {
    for (k, &j) in cols.iter().enumerate() {
        let mut v = q.column(j).into_owned();
        for &p in &cols[..k] {
            let prev = q.column(p).into_owned();
            let overlap = prev.dotc(&v);
            v -= prev * overlap;
        }
        let norm = v.norm();
        q.set_column(j, &v.unscale(norm));
    }
}

/// `|Tr(W†U)| / d`, insensitive to global phase.
pub fn trace_fidelity(w: &UnitaryMatrix, u: &UnitaryMatrix) -> Result<f64> {
    require_same_dim(w.dim(), u.dim())?;
    let tr = w
        .as_matrix()
        .iter()
        .zip(u.as_matrix().iter())
        .fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b);
    Ok((tr.norm() / w.dim() as f64).min(1.0))
}

/// `|Tr(P W†U P)| / n` for the projector `P` onto the listed basis levels.
pub fn block_trace_fidelity(w: &UnitaryMatrix, u: &UnitaryMatrix, levels: &[usize]) -> Result<f64> {
    require_same_dim(w.dim(), u.dim())?;
    if levels.is_empty() {
        return Err(Error::InvalidDimension(0));
    }
    let d = w.dim();
    if let Some(&index) = levels.iter().find(|&&i| i >= d) {
        return Err(Error::IndexOutOfRange { index, dim: d });
    }
    let prod = w.as_matrix().adjoint() * u.as_matrix();
    let tr: C64 = levels.iter().map(|&i| prod[(i, i)]).sum();
    Ok((tr.norm() / levels.len() as f64).min(1.0))
}

/// `|⟨χ|ψ⟩|²`.
pub fn state_fidelity(psi: &StateVector, chi: &StateVector) -> Result<f64> {
    Ok(chi.inner(psi)?.norm_sqr().min(1.0))
}

/// Vector of i.i.d. standard complex Gaussians.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Pure state drawn from the unitarily invariant measure.
pub fn haar_random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<StateVector> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    StateVector::normalized(complex_gaussian(d, rng))
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal folded back into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let g = CMatrix::from_column_slice(d, d, complex_gaussian(d * d, rng).as_slice());
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let phase = r[(j, j)] / r[(j, j)].norm();
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    Ok(UnitaryMatrix::from_unchecked(q))
}

/// Random Hermitian matrix with Gaussian entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = CMatrix::from_column_slice(d, d, complex_gaussian(d * d, rng).as_slice());
    HermitianMatrix((&g + g.adjoint()) * c(0.5))
}
