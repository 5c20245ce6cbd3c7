// Copyright 2026 The qsynth Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use qsynth::cesium::{build_restricted_system, Aux, CesiumParams};
use qsynth::control::{propagate, Control, ControlSystem, Segment, Waveform};
use qsynth::linalg::{haar_random_state, rng_from_seed, CMatrix, HermitianMatrix, StateVector, C64};
use qsynth::search::{
    gradient_state_prep, multi_start, objective_state_prep, search_state_map, SearchConfig,
};
use rand::Rng;

fn qubit_x() -> ControlSystem {
    let mut sx = CMatrix::zeros(2, 2);
    sx[(0, 1)] = C64::new(0.5, 0.0);
    sx[(1, 0)] = C64::new(0.5, 0.0);
    ControlSystem::new(
        HermitianMatrix::zeros(2),
        vec![Control::new("x", HermitianMatrix::new(sx).unwrap(), -10.0, 10.0)],
        0,
        true,
    )
    .unwrap()
}

fn cesium() -> ControlSystem {
    build_restricted_system(&CesiumParams::default(), Aux::Plus4).unwrap()
}

fn random_waveform<R: Rng>(sys: &ControlSystem, n: usize, tau: f64, rng: &mut R) -> Waveform {
    Waveform::new(
        (0..n)
            .map(|_| Segment {
                duration: tau,
                amplitudes: sys
                    .controls()
                    .iter()
                    .map(|c| rng.random_range(c.min..c.max))
                    .collect(),
            })
            .collect(),
    )
}

fn finite_difference(sys: &ControlSystem, w: &Waveform, a: &StateVector, b: &StateVector) -> Vec<f64> {
    let h = 1e-6;
    let k = sys.num_controls();
    let mut out = Vec::new();
    for m in 0..w.len() {
        for j in 0..k {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus.segments[m].amplitudes[j] += h;
            minus.segments[m].amplitudes[j] -= h;
            // Stay inside the box: evaluate on a widened copy of the bounds.
            let jp = objective_state_prep(&widen(sys), &plus, a, b).unwrap();
            let jm = objective_state_prep(&widen(sys), &minus, a, b).unwrap();
            out.push((jp - jm) / (2.0 * h));
        }
    }
    out
}

fn widen(sys: &ControlSystem) -> ControlSystem {
    let controls = sys
        .controls()
        .iter()
        .map(|c| Control::new(c.name.clone(), c.generator.clone(), c.min - 1.0, c.max + 1.0))
        .collect();
    ControlSystem::new(sys.drift().clone(), controls, sys.fiducial_index(), true).unwrap()
}

fn assert_gradient_matches(sys: &ControlSystem, w: &Waveform, a: &StateVector, b: &StateVector) {
    let exact = gradient_state_prep(sys, w, a, b).unwrap();
    let fd = finite_difference(sys, w, a, b);
    for (i, (g, f)) in exact.iter().zip(&fd).enumerate() {
        if g.abs() > 1e-8 {
            let rel = (g - f).abs() / g.abs();
            assert!(rel < 1e-5, "component {i}: analytic {g} vs fd {f} (rel {rel:e})");
        }
    }
}

#[test]
fn objective_identity_and_orthogonal() {
    let sys = qubit_x();
    let zero = StateVector::basis(2, 0).unwrap();
    let one = StateVector::basis(2, 1).unwrap();
    let empty = Waveform::default();
    assert_eq!(objective_state_prep(&sys, &empty, &zero, &zero).unwrap(), 1.0);
    assert_eq!(objective_state_prep(&sys, &empty, &zero, &one).unwrap(), 0.0);
}

#[test]
fn objective_matches_propagate_then_overlap() {
    let sys = cesium();
    let mut rng = rng_from_seed(3);
    let w = random_waveform(&sys, 12, 1e-5, &mut rng);
    let a = haar_random_state(8, &mut rng).unwrap();
    let b = haar_random_state(8, &mut rng).unwrap();
    let u = propagate(&sys, &w).unwrap();
    let direct = b.inner(&u.apply(&a).unwrap()).unwrap().norm_sqr();
    let j = objective_state_prep(&sys, &w, &a, &b).unwrap();
    assert!((j - direct).abs() < 1e-14);
}

#[test]
fn objective_rejects_dimension_mismatch() {
    let sys = cesium();
    let a = StateVector::basis(2, 0).unwrap();
    let b = StateVector::basis(8, 0).unwrap();
    assert!(objective_state_prep(&sys, &Waveform::default(), &a, &b).is_err());
}

#[test]
fn two_level_gradient_is_analytic() {
    let sys = qubit_x();
    let zero = StateVector::basis(2, 0).unwrap();
    let one = StateVector::basis(2, 1).unwrap();
    for (u, tau) in [(0.3, 1.0), (2.1, 0.7), (-4.0, 0.25)] {
        let w = Waveform::uniform(tau, 1, &[u]);
        let j = objective_state_prep(&sys, &w, &zero, &one).unwrap();
        assert!((j - (u * tau / 2.0_f64).sin().powi(2)).abs() < 1e-12);
        let g = gradient_state_prep(&sys, &w, &zero, &one).unwrap();
        assert!((g[0] - 0.5 * tau * (u * tau).sin()).abs() < 1e-8);
    }
}

#[test]
fn gradient_vanishes_at_optimum() {
    let sys = qubit_x();
    let zero = StateVector::basis(2, 0).unwrap();
    let one = StateVector::basis(2, 1).unwrap();
    let w = Waveform::uniform(1.0, 1, &[std::f64::consts::PI]);
    let g = gradient_state_prep(&sys, &w, &zero, &one).unwrap();
    assert!(g[0].abs() <= 1e-8);
}

#[test]
fn cesium_gradient_matches_finite_differences() {
    let sys = cesium();
    let mut rng = rng_from_seed(11);
    for _ in 0..3 {
        let w = random_waveform(&sys, 10, 1e-5, &mut rng);
        let a = haar_random_state(8, &mut rng).unwrap();
        let b = haar_random_state(8, &mut rng).unwrap();
        assert_gradient_matches(&sys, &w, &a, &b);
    }
}

#[test]
fn identical_states_converge_at_iteration_zero() {
    let sys = cesium();
    let psi = haar_random_state(8, &mut rng_from_seed(1)).unwrap();
    let cfg = SearchConfig::for_system(&sys, 1e-5);
    let r = search_state_map(&sys, &psi, &psi, &cfg).unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations, 0);
}

#[test]
fn pi_pulse_is_found() {
    let sys = qubit_x();
    let zero = StateVector::basis(2, 0).unwrap();
    let one = StateVector::basis(2, 1).unwrap();
    let cfg = SearchConfig {
        segment_count: 1,
        segment_duration: 0.5,
        fidelity_goal: 0.9999,
        max_iterations: 200,
        ..SearchConfig::for_system(&sys, 0.5)
    };
    let r = search_state_map(&sys, &zero, &one, &cfg).unwrap();
    assert!(r.fidelity >= 0.9999, "J = {}", r.fidelity);
    assert!(r.iterations <= 200);
}

#[test]
fn search_is_deterministic_and_monotone() {
    let sys = cesium();
    let mut rng = rng_from_seed(21);
    let a = haar_random_state(8, &mut rng).unwrap();
    let b = haar_random_state(8, &mut rng).unwrap();
    let cfg = SearchConfig {
        seed: 5,
        ..SearchConfig::for_system(&sys, 1e-5)
    };
    let r1 = search_state_map(&sys, &a, &b, &cfg).unwrap();
    let r2 = search_state_map(&sys, &a, &b, &cfg).unwrap();
    assert_eq!(r1, r2);
    for pair in r1.objective_history.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12);
    }
    let recomputed = objective_state_prep(&sys, &r1.waveform, &a, &b).unwrap();
    assert!((recomputed - r1.fidelity).abs() <= 1e-12);
    assert_eq!(r1.converged, r1.fidelity >= cfg.fidelity_goal);
}

#[test]
fn multi_start_contract() {
    let sys = cesium();
    let mut rng = rng_from_seed(8);
    let a = haar_random_state(8, &mut rng).unwrap();
    let b = haar_random_state(8, &mut rng).unwrap();
    let base = SearchConfig {
        seed: 9,
        max_iterations: 30,
        ..SearchConfig::for_system(&sys, 1e-5)
    };
    let single = search_state_map(&sys, &a, &b, &base).unwrap();
    assert_eq!(multi_start(&sys, &a, &b, &base).unwrap(), single);

    let five = SearchConfig { restarts: 5, ..base };
    let best = multi_start(&sys, &a, &b, &five).unwrap();
    assert!(best.fidelity >= single.fidelity);
}

#[test]
fn search_rejects_bad_config() {
    let sys = cesium();
    let psi = StateVector::basis(8, 0).unwrap();
    let cfg = SearchConfig {
        fidelity_goal: 1.5,
        ..SearchConfig::for_system(&sys, 1e-5)
    };
    assert!(search_state_map(&sys, &psi, &psi, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn qubit_gradient_matches_finite_differences(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let mut sys_rng = rng_from_seed(seed ^ 0x5eed);
        let h0 = qsynth::linalg::random_hermitian(2, &mut sys_rng);
        let h1 = qsynth::linalg::random_hermitian(2, &mut sys_rng);
        let sys = ControlSystem::new(
            h0,
            vec![Control::new("u", h1, -1.0, 1.0)],
            0,
            true,
        )
        .unwrap();
        let w = random_waveform(&sys, n, 0.4, &mut rng);
        let a = haar_random_state(2, &mut rng).unwrap();
        let b = haar_random_state(2, &mut rng).unwrap();
        assert_gradient_matches(&sys, &w, &a, &b);
    }
}
