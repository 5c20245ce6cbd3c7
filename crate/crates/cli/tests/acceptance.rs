//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are expected to fail; the process
//! exits non-zero on any other failure, or if a known failure starts to
//! pass. Pass criterion numbers as arguments to run a subset.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qsynth::cesium::{build_restricted_system, embed_gate, Aux, CesiumParams, F3_LEVELS, FIDUCIAL_INDEX};
use qsynth::control::{Control, ControlSystem, Segment, Waveform};
use qsynth::ec::{
    ec_maps_ideal, ec_sweep, infidelity_slope, linear_grid, Averaging, EcConfig, LandeSign, MapMode,
};
use qsynth::eigen_synth::{synthesize_unitary, synthesize_unitary_exact, SynthesisReport};
use qsynth::gates::{dft_h, verify_clifford_relations, GateKind, GateSpec, SConvention};
use qsynth::linalg::{
    haar_random_state, haar_random_unitary, identity_deviation, rng_from_seed, CMatrix, CVector,
    HermitianMatrix, SeededRng, StateVector, UnitaryMatrix, C64,
};
use qsynth::search::{gradient_state_prep, multi_start, objective_state_prep, SearchConfig};
use qsynth::subspace::{
    assemble_subspace_map, basis_error, naive_subspace_map, plan_subspace_map, synthesize_subspace_map,
    SubspaceMapSpec,
};
use qsynth::wigner::{block_density, wigner_grid};
use rand::Rng;

/// Criteria that fail by construction; see the README.
const KNOWN_FAILURES: &[u32] = &[7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn cesium() -> ControlSystem {
    build_restricted_system(&CesiumParams::default(), Aux::Plus4).unwrap()
}

fn random_basis(d: usize, n: usize, rng: &mut SeededRng) -> Vec<StateVector> {
    let u = haar_random_unitary(d, rng).unwrap();
    (0..n)
        .map(|j| StateVector::normalized(u.as_matrix().column(j).into_owned()).unwrap())
        .collect()
}

fn exact_eigen_assembly() -> Outcome {
    let mut rng = rng_from_seed(1);
    let mut worst = 1.0f64;
    for d in 2..=8 {
        for _ in 0..50 {
            let w = haar_random_unitary(d, &mut rng).unwrap();
            let r = synthesize_unitary_exact(&w, d - 1).unwrap();
            worst = worst.min(r.trace_fidelity);
        }
    }
    outcome(
        worst >= 1.0 - 1e-10,
        format!("350 targets, worst trace fidelity 1 - {:.1e}", 1.0 - worst),
    )
}

fn subspace_map_correctness() -> Outcome {
    let mut rng = rng_from_seed(2);
    let (mut map_err, mut unit_err, mut lemma) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let d = rng.random_range(2..=8);
        let n = rng.random_range(1..=d);
        let spec =
            SubspaceMapSpec::new(random_basis(d, n, &mut rng), random_basis(d, n, &mut rng), true).unwrap();
        let steps = plan_subspace_map(&spec).unwrap();
        let t = assemble_subspace_map(&steps, &spec).unwrap();
        map_err = map_err.max(basis_error(&t, &spec));
        unit_err = unit_err.max(identity_deviation(&(t.as_matrix().adjoint() * t.as_matrix())));
        for (j, step) in steps.iter().enumerate() {
            for b in &spec.target[..j] {
                lemma = lemma.max(b.as_vector().dotc(step.rotated_source.as_vector()).norm());
            }
        }
    }
    // Recorded witness: independent rotations do not compose into a map.
    let mut wrng = rng_from_seed(2009);
    let source = random_basis(4, 2, &mut wrng);
    let spec = SubspaceMapSpec::new(source, random_basis(4, 2, &mut wrng), true).unwrap();
    let naive = naive_subspace_map(&spec).unwrap();
    let naive_err = spec
        .source
        .iter()
        .zip(&spec.target)
        .map(|(a, b)| 1.0 - b.as_vector().dotc(&(naive.as_matrix() * a.as_vector())).norm())
        .fold(0.0, f64::max);
    outcome(
        map_err <= 1e-9 && unit_err <= 1e-10 && lemma <= 1e-9 && naive_err > 1e-3,
        format!(
            "max |Ta-b| {map_err:.1e}, |T'T-I| {unit_err:.1e}, lemma {lemma:.1e}, naive witness misses by {naive_err:.3}"
        ),
    )
}

fn two_level() -> ControlSystem {
    let h = |m: [[f64; 2]; 2], im: [[f64; 2]; 2]| {
        HermitianMatrix::new(CMatrix::from_fn(2, 2, |r, c| C64::new(m[r][c], im[r][c]))).unwrap()
    };
    let zero = [[0.0; 2]; 2];
    let drift = h([[0.5, 0.0], [0.0, -0.5]], zero).scaled(0.7);
    let sx = h([[0.0, 0.5], [0.5, 0.0]], zero);
    let sy = h(zero, [[0.0, -0.5], [0.5, 0.0]]);
    ControlSystem::new(
        drift,
        vec![Control::new("x", sx, -2.0, 2.0), Control::new("y", sy, -2.0, 2.0)],
        0,
        true,
    )
    .unwrap()
}

fn widened(sys: &ControlSystem) -> ControlSystem {
    let controls = sys
        .controls()
        .iter()
        .map(|c| Control::new(c.name.clone(), c.generator.clone(), c.min - 1.0, c.max + 1.0))
        .collect();
    ControlSystem::new(sys.drift().clone(), controls, sys.fiducial_index(), true).unwrap()
}

fn gradient_relative_error(sys: &ControlSystem, segments: usize, tau: f64, rng: &mut SeededRng) -> f64 {
    let w = Waveform::new(
        (0..segments)
            .map(|_| Segment {
                duration: tau,
                amplitudes: sys
                    .controls()
                    .iter()
                    .map(|c| rng.random_range(c.min..c.max))
                    .collect(),
            })
            .collect(),
    );
    let a = haar_random_state(sys.dim(), rng).unwrap();
    let b = haar_random_state(sys.dim(), rng).unwrap();
    let g = gradient_state_prep(sys, &w, &a, &b).unwrap();
    let wide = widened(sys);
    let h = 1e-6;
    let k = sys.num_controls();
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (i, gi) in g.iter().enumerate() {
        let (m, j) = (i / k, i % k);
        let mut plus = w.clone();
        let mut minus = w.clone();
        plus.segments[m].amplitudes[j] += h;
        minus.segments[m].amplitudes[j] -= h;
        let fd = (objective_state_prep(&wide, &plus, &a, &b).unwrap()
            - objective_state_prep(&wide, &minus, &a, &b).unwrap())
            / (2.0 * h);
        diff += (fd - gi).powi(2);
        norm += gi * gi;
    }
    diff.sqrt() / norm.sqrt().max(1e-8)
}

fn gradient_fidelity() -> Outcome {
    let mut rng = rng_from_seed(3);
    let qubit = two_level();
    let cs = cesium();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        worst = worst.max(gradient_relative_error(&qubit, 6, 0.4, &mut rng));
    }
    for _ in 0..10 {
        worst = worst.max(gradient_relative_error(&cs, 12, 1e-5, &mut rng));
    }
    outcome(
        worst <= 1e-5,
        format!("20 instances, worst relative error {worst:.1e}"),
    )
}

fn state_prep_convergence() -> Outcome {
    let sys = cesium();
    let cfg = SearchConfig {
        restarts: 3,
        max_iterations: 5000,
        seed: 4,
        ..SearchConfig::for_system(&sys, 1e-5)
    };
    let fiducial = StateVector::basis(8, FIDUCIAL_INDEX).unwrap();
    let mut rng = rng_from_seed(4);
    let targets: Vec<StateVector> = (0..20).map(|_| haar_random_state(8, &mut rng).unwrap()).collect();
    let fids: Vec<f64> = targets
        .iter()
        .map(|t| multi_start(&sys, &fiducial, t, &cfg).unwrap().fidelity)
        .collect();
    let hits = fids.iter().filter(|&&f| f >= 0.99).count();
    let worst = fids.iter().copied().fold(1.0, f64::min);
    outcome(
        hits >= 18,
        format!("{hits}/20 reach J >= 0.99 (worst {worst:.4})"),
    )
}

fn five_gates() -> Vec<(&'static str, UnitaryMatrix)> {
    [
        ("Z", GateKind::Z),
        ("X", GateKind::X),
        ("H", GateKind::H),
        ("S", GateKind::S),
        ("G3", GateKind::G(3)),
    ]
    .into_iter()
    .map(|(n, k)| {
        let g = GateSpec::new(k, F3_LEVELS)
            .unwrap()
            .matrix(SConvention::default())
            .unwrap();
        (n, UnitaryMatrix::new(embed_gate(g.as_matrix()).unwrap()).unwrap())
    })
    .collect()
}

thread_local! {
    static GATE_REPORTS: std::cell::RefCell<Vec<(&'static str, SynthesisReport)>> = const { std::cell::RefCell::new(Vec::new()) };
}

fn gate_synthesis() -> Outcome {
    let sys = cesium();
    let cfg = SearchConfig {
        restarts: 3,
        seed: 5,
        ..SearchConfig::for_system(&sys, 1e-5)
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, target) in five_gates() {
        let exact = synthesize_unitary_exact(&target, FIDUCIAL_INDEX).unwrap();
        let r = synthesize_unitary(&sys, &target, &cfg).unwrap();
        let maps_ok = r.steps.iter().all(|s| s.fidelity >= 0.99);
        let ok = exact.trace_fidelity >= 1.0 - 1e-10 && (!maps_ok || r.trace_fidelity >= 0.97);
        pass &= ok;
        parts.push(format!(
            "{name} {:.4}{} exact 1-{:.0e}",
            r.trace_fidelity,
            if maps_ok { "" } else { " (a state map < 0.99)" },
            1.0 - exact.trace_fidelity
        ));
        GATE_REPORTS.with(|g| g.borrow_mut().push((name, r)));
    }
    outcome(pass, parts.join("; "))
}

fn search_count_bound() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let sys = cesium();
    let cfg = SearchConfig {
        restarts: 3,
        seed: 5,
        ..SearchConfig::for_system(&sys, 1e-5)
    };
    let mut reports = GATE_REPORTS.with(|g| std::mem::take(&mut *g.borrow_mut()));
    if reports.is_empty() {
        reports = five_gates()
            .into_iter()
            .map(|(n, t)| (n, synthesize_unitary(&sys, &t, &cfg).unwrap()))
            .collect();
    }
    for (name, r) in &reports {
        let searched = r.steps.iter().filter(|s| !s.skipped).count();
        let ok = r.searches <= F3_LEVELS && r.searches == searched && r.waveforms.len() == searched;
        pass &= ok;
        parts.push(format!("{name} {}", r.searches));
    }
    let mut rng = rng_from_seed(6);
    let mut exact_max = 0;
    for d in 2..=8 {
        for _ in 0..10 {
            let r = synthesize_unitary_exact(&haar_random_unitary(d, &mut rng).unwrap(), d - 1).unwrap();
            pass &= r.searches <= d;
            exact_max = exact_max.max(r.searches as isize - d as isize);
        }
    }
    // Subspace maps, including pairs that need no rotation.
    let quick = SearchConfig {
        max_iterations: 300,
        seed: 6,
        ..SearchConfig::for_system(&sys, 1e-5)
    };
    let mut sub = Vec::new();
    for n in 1..=3 {
        let source = random_basis(8, n, &mut rng);
        let target = if n == 3 {
            // First pair already in place; the rest go to the complement.
            let u = haar_random_unitary(8, &mut rng).unwrap();
            let p = CMatrix::identity(8, 8) - source[0].projector();
            let mut t = vec![source[0].clone()];
            for j in 0..8 {
                if t.len() == n {
                    break;
                }
                let mut v = &p * u.as_matrix().column(j);
                for prev in &t[1..] {
                    v -= prev.as_vector() * prev.as_vector().dotc(&v);
                }
                t.push(StateVector::normalized(v).unwrap());
            }
            t
        } else {
            random_basis(8, n, &mut rng)
        };
        let spec = SubspaceMapSpec::new(source, target, true).unwrap();
        let skipped = plan_subspace_map(&spec)
            .unwrap()
            .iter()
            .filter(|s| s.skipped())
            .count();
        let r = synthesize_subspace_map(&sys, &spec, &quick).unwrap();
        pass &= r.searches == n - skipped;
        sub.push(format!("n={n} skipped={skipped} searches={}", r.searches));
    }
    outcome(
        pass,
        format!(
            "gate searches [{}] <= 7; exact Haar max(searches - d) = {exact_max}; subspace {}",
            parts.join(", "),
            sub.join(", ")
        ),
    )
}

fn clifford_relations() -> Outcome {
    let mut failures = Vec::new();
    let mut alt = 0.0f64;
    for d in [2, 3, 5, 7] {
        let r = verify_clifford_relations(d, SConvention::LevelParity).unwrap();
        for f in r.failures(1e-12) {
            failures.push(format!("d={d} `{}` off by {:.2}", f.relation, f.deviation));
        }
        let other = verify_clifford_relations(d, SConvention::DimensionParity).unwrap();
        alt = alt.max(
            other
                .relations
                .iter()
                .map(|c| c.deviation_up_to_phase)
                .fold(0.0, f64::max),
        );
    }
    let detail = if failures.is_empty() {
        "all relations within 1e-12".to_string()
    } else {
        format!(
            "level-parity S: {}; dimension-parity S holds up to phase within {alt:.0e}",
            failures.join(", ")
        )
    };
    outcome(failures.is_empty(), detail)
}

fn error_correction() -> Outcome {
    let cfg = EcConfig {
        epsilon_grid: linear_grid(0.02, 0.3, 15),
        samples: 200,
        seed: 8,
        maps: MapMode::Ideal,
        averaging: Averaging::MonteCarlo,
        lande_sign: LandeSign::default(),
    };
    let res = ec_sweep(&cfg, &ec_maps_ideal().unwrap()).unwrap();
    let ordered = res.points.iter().all(|p| p.corrected >= p.uncorrected);
    let sc = infidelity_slope(&res.points, 0.02, 0.1, true).unwrap();
    let su = infidelity_slope(&res.points, 0.02, 0.1, false).unwrap();
    let ratio = sc / su;
    outcome(
        ordered && (1.5..=2.5).contains(&ratio),
        format!(
            "ordering {}, slopes corrected {sc:.2} / uncorrected {su:.2} = {ratio:.2}",
            if ordered { "holds" } else { "violated" }
        ),
    )
}

fn wigner_checks() -> Outcome {
    let mut var = 0.0f64;
    for m in 0..F3_LEVELS {
        let mut v = CVector::zeros(F3_LEVELS);
        v[m] = C64::new(1.0, 0.0);
        let g = wigner_grid(&block_density(&v, 0..F3_LEVELS).unwrap(), 61, 140).unwrap();
        var = var.max(g.max_row_variance());
    }
    let h = dft_h(F3_LEVELS).unwrap();
    let mut longitudes = Vec::new();
    for j in 0..F3_LEVELS {
        let v = h.as_matrix().column(j).into_owned();
        let g = wigner_grid(&block_density(&v, 0..F3_LEVELS).unwrap(), 61, 140).unwrap();
        let (_, _, col) = g.argmax();
        longitudes.push(g.phis[col]);
    }
    let tau = std::f64::consts::TAU;
    let mut sep = f64::INFINITY;
    for i in 0..longitudes.len() {
        for j in i + 1..longitudes.len() {
            let d = (longitudes[i] - longitudes[j]).rem_euclid(tau);
            sep = sep.min(d.min(tau - d));
        }
    }
    outcome(
        var <= 1e-10 && sep >= tau / 14.0 - 1e-12,
        format!(
            "max row variance {var:.1e}; DFT maxima min separation {sep:.3} rad (need {:.3})",
            tau / 14.0
        ),
    )
}

fn run_cli(args: &[&str], dir: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_qsynth"))
        .args(args)
        .current_dir(dir)
        .env_remove("QSYNTH_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        out.insert(
            p.file_name().unwrap().to_string_lossy().into_owned(),
            std::fs::read(&p).unwrap(),
        );
    }
    out
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    std::fs::write(root.path().join("spec.json"), subspace_spec_json()).unwrap();
    std::fs::write(
        root.path().join("quick.json"),
        r#"{"max_iterations": 40, "restarts": 2}"#,
    )
    .unwrap();
    let commands: &[(&str, &[&str])] = &[
        (
            "optimize-state",
            &[
                "optimize-state",
                "--initial",
                "haar:1",
                "--target",
                "haar:2",
                "--seed",
                "9",
                "--restarts",
                "2",
            ],
        ),
        (
            "build-unitary",
            &[
                "build-unitary",
                "--gate",
                "H",
                "--seed",
                "9",
                "--max-iterations",
                "40",
                "--restarts",
                "2",
            ],
        ),
        (
            "build-subspace-map",
            &[
                "build-subspace-map",
                "--spec",
                "../spec.json",
                "--seed",
                "9",
                "--max-iterations",
                "40",
            ],
        ),
        ("ec-sweep ideal", &["ec-sweep", "--samples", "200", "--seed", "7"]),
        (
            "ec-sweep synthesized",
            &[
                "ec-sweep",
                "--preset",
                "synthesized",
                "--samples",
                "50",
                "--seed",
                "9",
                "--search-config",
                "../quick.json",
            ],
        ),
        ("wigner", &["wigner", "--level", "2", "--fourier"]),
        ("verify-clifford", &["verify-clifford", "--d", "5"]),
    ];
    let mut bad = Vec::new();
    let mut files = 0;
    for (i, (name, args)) in commands.iter().enumerate() {
        let mut snaps = Vec::new();
        for rep in 0..2 {
            let dir = root.path().join(format!("{i}-{rep}"));
            std::fs::create_dir(&dir).unwrap();
            let mut full: Vec<&str> = args.to_vec();
            match *name {
                "wigner" => full.extend(["--out", "w.csv"]),
                "verify-clifford" => full.extend(["--out", "r.json"]),
                _ => full.extend(["--out-dir", "."]),
            }
            if let Err(e) = run_cli(&full, &dir) {
                return outcome(false, e);
            }
            snaps.push(snapshot(&dir));
        }
        files += snaps[0].len();
        if snaps[0] != snaps[1] || snaps[0].is_empty() {
            bad.push(*name);
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!(
                "{} commands, {files} artifacts byte-identical on rerun",
                commands.len()
            )
        } else {
            format!("outputs differ: {}", bad.join(", "))
        },
    )
}

fn subspace_spec_json() -> String {
    let mut rng = rng_from_seed(10);
    let vecs = |v: Vec<StateVector>| -> serde_json::Value {
        v.iter()
            .enumerate()
            .map(|(i, s)| {
                serde_json::json!({
                    "name": format!("v{i}"),
                    "amplitudes": s.as_vector().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                })
            })
            .collect()
    };
    serde_json::json!({
        "source": vecs(random_basis(8, 2, &mut rng)),
        "target": vecs(random_basis(8, 2, &mut rng)),
    })
    .to_string()
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "exact eigen-assembly",
            budget: Some(Duration::from_secs(5)),
            run: exact_eigen_assembly,
        },
        Criterion {
            id: 2,
            name: "subspace-map correctness",
            budget: Some(Duration::from_secs(5)),
            run: subspace_map_correctness,
        },
        Criterion {
            id: 3,
            name: "gradient fidelity",
            budget: Some(Duration::from_secs(30)),
            run: gradient_fidelity,
        },
        Criterion {
            id: 4,
            name: "state-prep convergence",
            budget: Some(Duration::from_secs(600)),
            run: state_prep_convergence,
        },
        Criterion {
            id: 5,
            name: "gate synthesis",
            budget: Some(Duration::from_secs(3600)),
            run: gate_synthesis,
        },
        Criterion {
            id: 6,
            name: "search-count bound",
            budget: None,
            run: search_count_bound,
        },
        Criterion {
            id: 7,
            name: "Clifford relations",
            budget: None,
            run: clifford_relations,
        },
        Criterion {
            id: 8,
            name: "error-correction ordering and scaling",
            budget: Some(Duration::from_secs(120)),
            run: error_correction,
        },
        Criterion {
            id: 9,
            name: "Wigner qualitative checks",
            budget: Some(Duration::from_secs(60)),
            run: wigner_checks,
        },
        Criterion {
            id: 10,
            name: "determinism",
            budget: None,
            run: determinism,
        },
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    let mut passed = 0;
    let mut ran = 0;
    for c in &criteria {
        if !selected.is_empty() && !selected.contains(&c.id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let mut o = (c.run)();
        let elapsed = start.elapsed();
        if let Some(b) = c.budget {
            if elapsed > b {
                o.pass = false;
                o.detail
                    .push_str(&format!("; over budget ({:.0} s)", b.as_secs_f64()));
            }
        }
        let known = KNOWN_FAILURES.contains(&c.id);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = match (o.pass, known) {
            (false, true) => " (known failure)",
            (true, true) => " (known failure now passes)",
            _ => "",
        };
        println!(
            "[{tag}] {:>2} {}: {} [{:.1} s]{note}",
            c.id,
            c.name,
            o.detail,
            elapsed.as_secs_f64()
        );
        if o.pass {
            passed += 1;
        }
        if o.pass == known {
            unexpected.push(c.id);
        }
    }
    println!("acceptance: {passed}/{ran} criteria pass");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected results for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
