// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

//! Synthesis of unitary maps and subspace maps on finite-dimensional
//! controllable quantum systems.
//!
//! Full unitaries are assembled from their eigen-decomposition: every
//! eigenvector is mapped onto a fiducial state by a searched control
//! waveform, the eigenphase is imprinted on the fiducial state, and the map
//! is undone. Subspace maps are built from a sequence of π-rotations that
//! act as the identity on everything already mapped.

pub mod cesium;
pub mod control;
pub mod ec;
pub mod eigen_synth;
pub mod error;
pub mod gates;
pub mod io;
pub mod linalg;
pub mod search;
pub mod subspace;
pub mod wigner;

pub use error::{Error, Result};
