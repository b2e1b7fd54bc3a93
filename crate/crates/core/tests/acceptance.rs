//! Acceptance gate: one test per criterion, pinned tolerances.
//!
//! Criteria 6 and 7 run on reduced grids by default so the whole gate stays
//! within a few minutes on one core; set `SPINCHAIN_FULL_GRIDS=1` for the
//! full-density sweeps.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::Instant;

use spinchain::dynamics::{
    apply_pulse, apply_pulse_restricted, probabilities, IntegratorConfig, Pulse, StateVector,
};
use spinchain::spin_model::{
    resonant_transitions, transition_frequency, BasisState, ChainParams, TransitionTable,
};
use spinchain::sweep::{fidelity_curve, find_peaks, find_threshold, run_sweep, SweepSpec};
use spinchain::teleport::{
    attach_entangled, build_program, controlled_not_23, fidelity, hadamard_3, ideal_states,
    initial_state, measure_and_correct, InputQubit,
};
use spinchain::two_level::{analytic_evolution, rabi_2pik_halfpi, rabi_2pik_pi, TwoLevelParams};
use spinchain::Complex64;

fn full_grids() -> bool {
    std::env::var("SPINCHAIN_FULL_GRIDS").map(|v| v == "1").unwrap_or(false)
}

fn run_protocol(params: &ChainParams, rabi: f64, cfg: &IntegratorConfig) -> StateVector {
    let mut state = initial_state(&InputQubit::reference());
    for pulse in build_program(params, rabi).pulses() {
        state = apply_pulse(&state, &pulse, params, cfg).expect("integration");
    }
    state
}

/// Criterion 1: spectrum families and exact degeneracies, under 1 ms.
#[test]
fn criterion_1_spectrum_families_and_degeneracies() {
    let t0 = Instant::now();
    let p = ChainParams::reference();

    // family structure: flipping spin s costs omega_s plus +-J per first
    // neighbor and +-J' per second neighbor
    let table = TransitionTable::new(&p);
    for t in table.entries() {
        let w = p.omega[t.spin];
        let couplings: Vec<f64> = (0..4usize)
            .filter(|&k| k != t.spin)
            .filter_map(|k| match k.abs_diff(t.spin) {
                1 => Some(p.j1),
                2 => Some(p.j2),
                _ => None,
            })
            .collect();
        let matches_family = (0..1u32 << couplings.len()).any(|signs| {
            let shift: f64 = couplings
                .iter()
                .enumerate()
                .map(|(i, c)| if signs >> i & 1 == 0 { *c } else { -c })
                .sum();
            (t.freq - (w + shift)).abs() < 1e-9
        });
        assert!(
            matches_family,
            "frequency {} of spin {} outside the family structure",
            t.freq,
            t.spin
        );
    }

    // degeneracies (identical neighbor environments) at machine precision:
    // the energies are summed in different orders, so allow a few ulps
    let machine_eq = |a: f64, b: f64| (a - b).abs() <= 4.0 * f64::EPSILON * a.abs();
    let s = BasisState::new;
    let w45 = transition_frequency(s(5), s(4), &p);
    let w1213 = transition_frequency(s(13), s(12), &p);
    assert!(machine_eq(w45, w1213), "omega_45 = {w45} != omega_12,13 = {w1213}");
    let w08 = transition_frequency(s(8), s(0), &p);
    let w19 = transition_frequency(s(9), s(1), &p);
    assert!(machine_eq(w08, w19), "omega_08 = {w08} != omega_19 = {w19}");
    assert_eq!(resonant_transitions(w45, 1e-9, &p).len(), 2);

    let elapsed = t0.elapsed();
    assert!(elapsed.as_micros() < 1000, "spectrum took {elapsed:?}, budget 1 ms");
}

/// Criterion 2: final-state probabilities of the 7-pulse protocol.
#[test]
fn criterion_2_protocol_probabilities() {
    let state = run_protocol(&ChainParams::reference(), 0.1, &IntegratorConfig::default());
    let probs = probabilities(&state);
    for i in [0usize, 5, 8, 13] {
        assert!(
            (probs[i] - 1.0 / 36.0).abs() < 0.02,
            "p[{i}] = {} vs 1/36 = {}",
            probs[i],
            1.0 / 36.0
        );
    }
    for i in [1usize, 4, 9, 12] {
        assert!(
            (probs[i] - 2.0 / 9.0).abs() < 0.02,
            "p[{i}] = {} vs 2/9 = {}",
            probs[i],
            2.0 / 9.0
        );
    }
    for i in [2usize, 3, 6, 7, 10, 11, 14, 15] {
        assert!(probs[i] < 0.02, "non-resonant p[{i}] = {}", probs[i]);
    }
}

/// Criterion 3: norm conservation and step-halving stability, both <= 1e-8.
#[test]
fn criterion_3_norm_and_step_halving() {
    let params = ChainParams::reference();
    let cfg = IntegratorConfig::default();
    let state = run_protocol(&params, 0.1, &cfg);
    assert!((state.norm() - 1.0).abs() <= 1e-8, "norm error {}", (state.norm() - 1.0).abs());

    let halved = IntegratorConfig { max_phase_step: cfg.max_phase_step / 2.0, ..cfg };
    let state2 = run_protocol(&params, 0.1, &halved);
    let (p1, p2) = (probabilities(&state), probabilities(&state2));
    let dmax = p1.iter().zip(p2.iter()).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    assert!(dmax <= 1e-8, "step-halving probability change {dmax}");
}

/// Criterion 4: restricted numeric integration against the analytic
/// two-level solution, <= 1e-6.
#[test]
fn criterion_4_two_level_oracle() {
    let params = ChainParams::reference();
    let (ground, excited) = (BasisState::new(0), BasisState::new(4));
    let w_pair = transition_frequency(excited, ground, &params);
    let cfg = IntegratorConfig::default();
    let rabi = 0.1;
    for delta in [0.0, 0.8, 20.0] {
        for angle in [FRAC_PI_2, PI] {
            let pulse =
                Pulse { angle, rabi, carrier: w_pair - delta, phase: 0.0, label: None };
            let out = apply_pulse_restricted(
                &StateVector::basis(ground),
                &pulse,
                &params,
                &cfg,
                &[(ground, excited)],
            )
            .unwrap();
            let two = TwoLevelParams {
                rabi,
                detuning: delta,
                c_p0: Complex64::ZERO,
                c_m0: Complex64::ONE,
            };
            let (dp, dm) = analytic_evolution(&two, pulse.duration());
            let err = (out.amps[excited.index()] - dp)
                .norm()
                .max((out.amps[ground.index()] - dm).norm());
            assert!(err <= 1e-6, "delta {delta}, angle {angle}: error {err:.3e}");
        }
    }
}

/// Criterion 5: 2πk design values for the 2J' detuning to five decimals,
/// and the exact π/2 ↔ π identity.
///
/// For k = 6 the formula 0.8/√143 gives 0.0668994; the reference list's
/// 0.066889 transposes the last digits and contradicts the formula that the
/// identity below pins down, so the formula value is asserted.
#[test]
fn criterion_5_pik_design_values() {
    assert!((rabi_2pik_pi(0.8, 4).unwrap() - 0.10079).abs() < 5e-6);
    assert!((rabi_2pik_pi(0.8, 6).unwrap() - 0.066899).abs() < 5e-6);
    assert!((rabi_2pik_pi(0.8, 8).unwrap() - 0.050098).abs() < 5e-6);
    for delta in [0.8, 19.2, 20.0, 20.8, 40.0, 40.8] {
        for j in 1..=250 {
            assert_eq!(
                rabi_2pik_halfpi(delta, j).unwrap(),
                rabi_2pik_pi(delta, 2 * j).unwrap(),
                "identity broken at delta {delta}, j {j}"
            );
        }
    }
}

/// Criterion 6: fidelity vs J'/J rises to a plateau; the 0.98-of-plateau
/// threshold falls in [0.03, 0.06], bracketing 0.04.
#[test]
fn criterion_6_j_ratio_sweep_threshold() {
    // 60 points over (0, 0.12]
    let grid: Vec<f64> = (1..=60).map(|i| 0.002 * i as f64).collect();
    let spec = SweepSpec::j_ratio(grid);
    let rows = run_sweep(&spec);
    let curve = fidelity_curve(&rows);
    assert_eq!(curve.len(), 60, "integration failures in the sweep");

    // rising trend: first quarter mean well below last quarter mean
    let mean = |s: &[(f64, f64)]| s.iter().map(|&(_, y)| y).sum::<f64>() / s.len() as f64;
    assert!(mean(&curve[..15]) < mean(&curve[45..]) - 0.001, "no rising trend");

    let threshold = find_threshold(&curve, 0.98).expect("no threshold found");
    println!("criterion 6: threshold at J'/J = {threshold:.4}");
    assert!(
        (0.03..=0.06).contains(&threshold),
        "threshold {threshold} outside [0.03, 0.06]"
    );
}

/// Criterion 7: fidelity vs Ω peaks at the named 2J'-family design values;
/// every detected peak lies within 1% of a 2J'-family value.
///
/// The even-k design points Ω̃^(j) = Ω^(2j) (0.050098, 0.066899, 0.100791)
/// give the tallest peaks: there both the π and the π/2 pulses complete
/// whole generalized-Rabi cycles. The sweep also resolves lower secondary
/// maxima at the odd-k points Ω^(5), Ω^(7), Ω^(9), where only the π pulses
/// do; those still belong to the 2J' family, which is the domination
/// property checked here. Peaks are classified in the output.
#[test]
fn criterion_7_rabi_sweep_peaks() {
    let named = [
        rabi_2pik_pi(0.8, 8).unwrap(),
        rabi_2pik_pi(0.8, 6).unwrap(),
        rabi_2pik_pi(0.8, 4).unwrap(),
    ];
    let family: Vec<(u32, f64)> =
        (1..=12).map(|k| (k, rabi_2pik_pi(0.8, k).unwrap())).collect();

    let mut grid: Vec<f64> = if full_grids() {
        (0..240).map(|i| 0.04 + 0.08 * i as f64 / 239.0).collect()
    } else {
        (0..=40).map(|i| 0.04 + 0.002 * i as f64).collect()
    };
    // pin the design points so grid maxima land on them exactly
    for &(_, omega) in &family {
        if (0.04..=0.12).contains(&omega) {
            grid.extend([omega * 0.994, omega, omega * 1.006]);
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let spec = SweepSpec::rabi(grid);
    let rows = run_sweep(&spec);
    let curve = fidelity_curve(&rows);
    assert_eq!(curve.len(), rows.len(), "integration failures in the sweep");

    let peaks = find_peaks(&curve, 0.002);
    assert!(!peaks.is_empty(), "no peaks detected");
    for p in &peaks {
        let near = family
            .iter()
            .find(|(_, omega)| ((p.x - omega) / omega).abs() <= 0.01);
        let (k, omega) = near.unwrap_or_else(|| {
            panic!("peak at {:.5} matches no 2J'-family value within 1%", p.x)
        });
        let kind = if k % 2 == 0 { "pi/2+pi (even k)" } else { "pi only (odd k)" };
        println!(
            "criterion 7: peak at {:.5} (|F| = {:.5}, prominence {:.4}) = 2J' k={k} [{kind}], design {omega:.5}",
            p.x, p.y, p.prominence
        );
    }
    for target in named {
        assert!(
            peaks.iter().any(|p| ((p.x - target) / target).abs() <= 0.01),
            "no peak within 1% of {target:.6}"
        );
    }
}

/// Criterion 8: ideal-gate oracle — teleportation identity over 100 random
/// qubits and closed forms equal to the gate composition.
#[test]
fn criterion_8_ideal_gate_oracle() {
    // deterministic xorshift qubits with nontrivial phases
    let mut x: u64 = 0x243f6a8885a308d3;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..100 {
        let theta = PI * next();
        let c0 = Complex64::from_polar((theta / 2.0).cos(), TAU * next());
        let c1 = Complex64::from_polar((theta / 2.0).sin(), TAU * next());
        let q = InputQubit::new(c0, c1).unwrap();

        let (p1, p2, p3) = ideal_states(&q);
        let g1 = attach_entangled(&q);
        let g2 = controlled_not_23(&g1);
        let g3 = hadamard_3(&g2);
        for i in 0..16 {
            assert!((p1.amps[i] - g1.amps[i]).norm() < 1e-15);
            assert!((p2.amps[i] - g2.amps[i]).norm() < 1e-15);
            assert!((p3.amps[i] - g3.amps[i]).norm() < 1e-15);
        }

        for outcome in 0..4u8 {
            let bob = measure_and_correct(&p3, outcome).unwrap();
            let overlap = q.c0.conj() * bob.c0 + q.c1.conj() * bob.c1;
            assert!(
                (overlap.norm() - 1.0).abs() < 1e-12,
                "outcome {outcome}: |overlap| = {}",
                overlap.norm()
            );
        }
    }
    // sanity anchor: the pulse-level protocol actually reaches its target
    let state = run_protocol(&ChainParams::reference(), 0.1, &IntegratorConfig::default());
    let (_, _, psi3) = ideal_states(&InputQubit::reference());
    let f = fidelity(&state, &psi3);
    assert!(f.magnitude > 0.99, "protocol fidelity {}", f.magnitude);
}
