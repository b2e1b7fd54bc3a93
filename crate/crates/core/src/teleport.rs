//! The teleportation pulse programs, the ideal target states, fidelity, and
//! the ideal-gate oracle with measurement branches and corrections.
//!
//! Alice owns spins 3 (the input qubit) and 2; Bob owns spin 0. Spins 2 and
//! 0 start in the Bell-type resource configuration built by the entangling
//! stage. The protocol is seven pulses: three entangling, two for the
//! controlled-not, two for the final superposition stage.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use num_complex::Complex64;
// test builds link std, whose inherent f64 methods shadow the trait's
#[cfg(not(test))]
use num_traits::Float as _;

use crate::dynamics::{Pulse, StateVector};
use crate::spin_model::{BasisState, ChainParams, TransitionTable, N_STATES};

/// The qubit to teleport: amplitudes on spin 3's ground/excited states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputQubit {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl InputQubit {
    pub fn new(c0: Complex64, c1: Complex64) -> Result<Self, TeleportError> {
        let norm = c0.norm_sqr() + c1.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(TeleportError::NotNormalized { norm });
        }
        Ok(InputQubit { c0, c1 })
    }

    /// The reference input state: C0 = 1/3, C1 = √8/3.
    pub fn reference() -> Self {
        InputQubit {
            c0: Complex64::new(1.0 / 3.0, 0.0),
            c1: Complex64::new(8.0f64.sqrt() / 3.0, 0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TeleportError {
    NotNormalized { norm: f64 },
    ImpossibleOutcome { outcome: u8 },
    BadOutcome { outcome: u8 },
}

impl fmt::Display for TeleportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TeleportError::NotNormalized { norm } => {
                write!(f, "qubit is not normalized: |c0|^2+|c1|^2 = {norm}")
            }
            TeleportError::ImpossibleOutcome { outcome } => {
                write!(f, "measurement outcome {outcome:02b} has probability zero")
            }
            TeleportError::BadOutcome { outcome } => {
                write!(f, "outcome must be 0..=3, got {outcome}")
            }
        }
    }
}

impl core::error::Error for TeleportError {}

/// Protocol stage a pulse belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Entangle,
    ControlledNot,
    Hadamard,
}

#[derive(Clone, Debug)]
pub struct ProgramStep {
    pub pulse: Pulse,
    pub stage: Stage,
}

/// The ordered seven-pulse teleportation program.
#[derive(Clone, Debug)]
pub struct PulseProgram {
    steps: Vec<ProgramStep>,
}

impl PulseProgram {
    pub fn steps(&self) -> &[ProgramStep] {
        &self.steps
    }

    pub fn pulses(&self) -> Vec<Pulse> {
        self.steps.iter().map(|s| s.pulse).collect()
    }

    /// Pulses of one stage, in order.
    pub fn stage_pulses(&self, stage: Stage) -> Vec<Pulse> {
        self.steps.iter().filter(|s| s.stage == stage).map(|s| s.pulse).collect()
    }
}

/// The initial four-spin state: the input qubit on spin 3, spins 2..0 in
/// the ground state, so amps[0] = C0 and amps[8] = C1.
pub fn initial_state(q: &InputQubit) -> StateVector {
    let mut amps = [Complex64::ZERO; N_STATES];
    amps[0] = q.c0;
    amps[8] = q.c1;
    StateVector { amps, frame_time: 0.0 }
}

/// Build the seven-pulse program for the given chain, with every carrier
/// taken from the exact transition spectrum so it tracks J and J' during
/// sweeps.
///
/// Pulse phases: the carrier phase cancels exactly on resonance, so only
/// the listed phase reaches the driven pair. The values below are fixed by
/// requiring that the ideal (two-level) limit of each stage lands exactly
/// on the target states: the entangling stage on the Bell-type state, the
/// full program on the four-branch teleportation state.
pub fn build_program(params: &ChainParams, rabi: f64) -> PulseProgram {
    let table = TransitionTable::new(params);
    let s = BasisState::new;
    let r = |i: usize, j: usize, angle: f64, phase: f64, stage: Stage| ProgramStep {
        pulse: Pulse::resonant(&table, s(i), s(j), angle, rabi, phase)
            .expect("single-flip transition"),
        stage,
    };
    PulseProgram {
        steps: alloc::vec![
            r(0, 4, FRAC_PI_2, -FRAC_PI_2, Stage::Entangle),
            r(8, 12, FRAC_PI_2, -FRAC_PI_2, Stage::Entangle),
            r(4, 5, PI, -FRAC_PI_2, Stage::Entangle),
            r(8, 12, PI, -FRAC_PI_2, Stage::ControlledNot),
            r(9, 13, PI, FRAC_PI_2, Stage::ControlledNot),
            r(1, 9, FRAC_PI_2, FRAC_PI_2, Stage::Hadamard),
            r(4, 12, FRAC_PI_2, FRAC_PI_2, Stage::Hadamard),
        ],
    }
}

/// An exact target state of the ideal (gate-level) protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealState {
    pub amps: [Complex64; N_STATES],
}

impl IdealState {
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// The input qubit joined to the Bell-type resource state on spins 2 and 0:
/// (C0|0000⟩ + C0|0101⟩ + C1|1000⟩ + C1|1101⟩)/√2.
pub fn attach_entangled(q: &InputQubit) -> IdealState {
    let mut amps = [Complex64::ZERO; N_STATES];
    let w = Complex64::new(0.5f64.sqrt(), 0.0);
    amps[0] = w * q.c0;
    amps[5] = w * q.c0;
    amps[8] = w * q.c1;
    amps[13] = w * q.c1;
    IdealState { amps }
}

/// Controlled-not with spin 3 as control and spin 2 as target:
/// |i3 i2 i1 i0⟩ → |i3, i2⊕i3, i1, i0⟩.
pub fn controlled_not_23(state: &IdealState) -> IdealState {
    let mut amps = [Complex64::ZERO; N_STATES];
    for m in BasisState::all() {
        let target = if m.bit(3) == 1 { m.flip(2) } else { m };
        amps[target.index()] = state.amps[m.index()];
    }
    IdealState { amps }
}

/// Superposition (Hadamard) operation on spin 3:
/// |0...⟩ → (|0...⟩+|1...⟩)/√2, |1...⟩ → (|0...⟩−|1...⟩)/√2.
pub fn hadamard_3(state: &IdealState) -> IdealState {
    let mut amps = [Complex64::ZERO; N_STATES];
    let w = 0.5f64.sqrt();
    for m in BasisState::all() {
        let a = state.amps[m.index()];
        if a == Complex64::ZERO {
            continue;
        }
        let partner = m.flip(3);
        if m.bit(3) == 0 {
            amps[m.index()] += w * a;
            amps[partner.index()] += w * a;
        } else {
            amps[partner.index()] += w * a;
            amps[m.index()] -= w * a;
        }
    }
    IdealState { amps }
}

/// The three ideal target states: after entangling, after the
/// controlled-not, and after the final superposition stage.
pub fn ideal_states(q: &InputQubit) -> (IdealState, IdealState, IdealState) {
    let psi1 = attach_entangled(q);

    // closed forms; equality with the gate composition is checked in tests
    let w = Complex64::new(0.5f64.sqrt(), 0.0);
    let mut amps2 = [Complex64::ZERO; N_STATES];
    amps2[0] = w * q.c0;
    amps2[5] = w * q.c0;
    amps2[12] = w * q.c1;
    amps2[9] = w * q.c1;
    let psi2 = IdealState { amps: amps2 };

    let mut amps3 = [Complex64::ZERO; N_STATES];
    let h = Complex64::new(0.5, 0.0);
    for i in [0usize, 5, 8, 13] {
        amps3[i] = h * q.c0;
    }
    amps3[1] = h * q.c1;
    amps3[4] = h * q.c1;
    amps3[9] = -h * q.c1;
    amps3[12] = -h * q.c1;
    let psi3 = IdealState { amps: amps3 };

    (psi1, psi2, psi3)
}

/// Fidelity of a simulated state against an ideal target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fidelity {
    /// Σ_m conj(expected_m) · actual_m.
    pub overlap: Complex64,
    pub magnitude: f64,
    pub squared: f64,
}

pub fn fidelity(actual: &StateVector, expected: &IdealState) -> Fidelity {
    let overlap: Complex64 = expected
        .amps
        .iter()
        .zip(actual.amps.iter())
        .map(|(e, a)| e.conj() * a)
        .sum();
    let magnitude = overlap.norm();
    Fidelity { overlap, magnitude, squared: magnitude * magnitude }
}

/// Project Alice's spins (3, 2) of a final-stage state onto `outcome`
/// (bit 1 = spin 3, bit 0 = spin 2), renormalize, and apply Bob's
/// correction for that branch: identity, Not, σ_z, or σ_z·Not. Returns
/// Bob's qubit, equal to the input qubit up to a global phase.
pub fn measure_and_correct(
    state: &IdealState,
    outcome: u8,
) -> Result<InputQubit, TeleportError> {
    if outcome > 3 {
        return Err(TeleportError::BadOutcome { outcome });
    }
    let b3 = ((outcome >> 1) & 1) as usize;
    let b2 = (outcome & 1) as usize;
    let base = 8 * b3 + 4 * b2;
    // spin 1 stays in the ground state throughout the protocol
    let a0 = state.amps[base];
    let a1 = state.amps[base + 1];
    let prob = a0.norm_sqr() + a1.norm_sqr();
    if prob <= 0.0 {
        return Err(TeleportError::ImpossibleOutcome { outcome });
    }
    let scale = 1.0 / prob.sqrt();
    let (mut c0, mut c1) = (a0 * scale, a1 * scale);
    // corrections per branch: 00 identity, 01 Not, 10 sigma_z, 11 sigma_z*Not
    if b2 == 1 {
        core::mem::swap(&mut c0, &mut c1);
    }
    if b3 == 1 {
        c1 = -c1;
    }
    Ok(InputQubit { c0, c1 })
}
