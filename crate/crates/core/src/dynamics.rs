//! Time integration of the 16 interaction-picture amplitudes under rf
//! pulses, keeping all non-resonant couplings.
//!
//! The amplitudes evolve as
//!
//! ```text
//! i dD_m/dt = Σ_k (W_mk/ħ) D_k e^{i ω_mk t}
//! ```
//!
//! where `W_mk = -(ħΩ/2) e^{+i(ωt+φ)}` when `m` is the member of a
//! single-flip pair with the flipped spin in its ground orientation, and
//! `W_km` its conjugate. Each state couples to exactly its four single-flip
//! partners. Bit 0 is the ground orientation (magnetic quantum number +1/2),
//! so the ascending operator connects an excited bit to a ground bit; the
//! `e^{+i(ωt+φ)}` factor rides on that element.
//!
//! For one pair the two exponentials combine into a single drive phase
//! `θ(t) = 2π(ω_carrier − ω_pair) t + φ`, which the integrator advances with
//! a unit-modulus rotation per step instead of re-evaluating sin/cos.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use num_complex::Complex64;
// test builds link std, whose inherent f64 methods shadow the trait's
#[cfg(not(test))]
use num_traits::Float as _;

use crate::spin_model::{
    single_flip_partners, BasisState, ChainParams, TransitionTable, N_SPINS, N_STATES,
};

/// The 16 interaction-picture amplitudes and the elapsed frame time (µs).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amps: [Complex64; N_STATES],
    pub frame_time: f64,
}

impl StateVector {
    /// A single basis state at frame time zero.
    pub fn basis(state: BasisState) -> Self {
        let mut amps = [Complex64::ZERO; N_STATES];
        amps[state.index()] = Complex64::ONE;
        StateVector { amps, frame_time: 0.0 }
    }

    pub fn from_amps(amps: [Complex64; N_STATES]) -> Result<Self, DynamicsError> {
        let sv = StateVector { amps, frame_time: 0.0 };
        let norm = sv.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(DynamicsError::NotNormalized { norm });
        }
        Ok(sv)
    }

    /// Σ |D_m|².
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// |D_m|² for every basis state.
pub fn probabilities(state: &StateVector) -> [f64; N_STATES] {
    let mut p = [0.0; N_STATES];
    for (pm, a) in p.iter_mut().zip(state.amps.iter()) {
        *pm = a.norm_sqr();
    }
    p
}

/// ⟨I_k^z⟩ for each spin, each in [-1/2, +1/2].
pub fn spin_expectations(state: &StateVector) -> [f64; N_SPINS] {
    let probs = probabilities(state);
    let mut iz = [0.0; N_SPINS];
    for (spin, z) in iz.iter_mut().enumerate() {
        for m in BasisState::all() {
            let s = if m.bit(spin) == 0 { 1.0 } else { -1.0 };
            *z += 0.5 * s * probs[m.index()];
        }
    }
    iz
}

/// One rf pulse: rotation angle Ωτ (radians), Rabi frequency Ω and carrier
/// frequency (2π·MHz), and phase (radians). `label` records the transition
/// the pulse targets, for reporting only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub angle: f64,
    pub rabi: f64,
    pub carrier: f64,
    pub phase: f64,
    pub label: Option<(BasisState, BasisState)>,
}

impl Pulse {
    /// A pulse with carrier locked to the |i⟩↔|j⟩ transition frequency.
    pub fn resonant(
        table: &TransitionTable,
        i: BasisState,
        j: BasisState,
        angle: f64,
        rabi: f64,
        phase: f64,
    ) -> Option<Pulse> {
        let t = table.between(i, j)?;
        Some(Pulse { angle, rabi, carrier: t.freq, phase, label: Some((i, j)) })
    }

    /// Pulse length τ = angle / (2πΩ), in µs.
    pub fn duration(&self) -> f64 {
        self.angle / (TAU * self.rabi)
    }
}

/// Step-size control for the fixed-step integrator. The step is chosen so
/// that no drive term advances by more than `max_phase_step` radians per
/// step; `hard_step` overrides that choice when set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Maximum phase advance per step, radians. Must lie in (0, 0.5].
    pub max_phase_step: f64,
    /// Fixed step override, µs.
    pub hard_step: Option<f64>,
    /// Refuse pulses that would need more steps than this.
    pub max_steps: u64,
    /// Trajectory samples recorded per pulse by [`apply_program`].
    pub samples_per_pulse: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            max_phase_step: 0.1,
            hard_step: None,
            max_steps: 500_000_000,
            samples_per_pulse: 2000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.max_phase_step > 0.0 && self.max_phase_step <= 0.5) {
            return Err(DynamicsError::BadConfig { what: "max_phase_step must be in (0, 0.5]" });
        }
        if let Some(h) = self.hard_step {
            if !(h > 0.0) || !h.is_finite() {
                return Err(DynamicsError::BadConfig { what: "hard_step must be positive" });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DynamicsError {
    NotNormalized { norm: f64 },
    BadConfig { what: &'static str },
    StepBudgetExceeded { needed: u64, cap: u64 },
    BadPulse { what: &'static str },
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::NotNormalized { norm } => {
                write!(f, "state is not normalized: |psi|^2 = {norm}")
            }
            DynamicsError::BadConfig { what } => write!(f, "bad integrator config: {what}"),
            DynamicsError::StepBudgetExceeded { needed, cap } => {
                write!(f, "pulse needs {needed} steps, cap is {cap}")
            }
            DynamicsError::BadPulse { what } => write!(f, "bad pulse: {what}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

/// One drive term: the pair of coupled amplitude indices, the drive angular
/// frequency (rad/µs), and the phase offset.
#[derive(Clone, Copy, Debug)]
struct PairDrive {
    ground: usize,
    excited: usize,
    /// 2π(ω_carrier − ω_pair), rad/µs.
    ang_freq: f64,
}

fn pair_drives(
    pulse: &Pulse,
    params: &ChainParams,
    allowed: Option<&[(BasisState, BasisState)]>,
) -> Vec<PairDrive> {
    let table = TransitionTable::new(params);
    table
        .entries()
        .iter()
        .filter(|t| match allowed {
            None => true,
            Some(list) => list.iter().any(|&(a, b)| {
                (a, b) == (t.ground, t.excited) || (b, a) == (t.ground, t.excited)
            }),
        })
        .map(|t| PairDrive {
            ground: t.ground.index(),
            excited: t.excited.index(),
            ang_freq: TAU * (pulse.carrier - t.freq),
        })
        .collect()
}

/// Right-hand side of the amplitude ODEs at time `t`: returns dD/dt.
///
/// This is the plain-form reference; [`apply_pulse`] uses an equivalent
/// incremental-phase evaluation internally.
pub fn rhs(
    state: &StateVector,
    t: f64,
    pulse: &Pulse,
    params: &ChainParams,
) -> [Complex64; N_STATES] {
    let g = 0.5 * TAU * pulse.rabi;
    let mut d = [Complex64::ZERO; N_STATES];
    for m in BasisState::all() {
        for (k, spin) in single_flip_partners(m) {
            // theta as seen from the ground-bit member
            let (ground, excited) = if m.bit(spin) == 0 { (m, k) } else { (k, m) };
            let w_pair = crate::spin_model::transition_frequency(excited, ground, params);
            let theta = TAU * (pulse.carrier - w_pair) * t + pulse.phase;
            let z = Complex64::from_polar(1.0, theta);
            let ig = Complex64::new(0.0, g);
            d[m.index()] += if m.bit(spin) == 0 {
                ig * z * state.amps[k.index()]
            } else {
                ig * z.conj() * state.amps[k.index()]
            };
        }
    }
    d
}

struct Integrator {
    drives: Vec<PairDrive>,
    /// e^{iθ_p(t)} at the current step start.
    z: Vec<Complex64>,
    /// e^{i ang_freq h/2} per pair.
    rot_half: Vec<Complex64>,
    g: f64,
    h: f64,
    n_steps: u64,
}

impl Integrator {
    fn new(
        pulse: &Pulse,
        params: &ChainParams,
        cfg: &IntegratorConfig,
        allowed: Option<&[(BasisState, BasisState)]>,
        t0: f64,
    ) -> Result<Self, DynamicsError> {
        cfg.validate()?;
        if !(pulse.angle > 0.0) || !(pulse.rabi > 0.0) || !pulse.duration().is_finite() {
            return Err(DynamicsError::BadPulse { what: "angle and rabi must be positive" });
        }
        let drives = pair_drives(pulse, params, allowed);
        let tau = pulse.duration();
        // conservative: bound by |ω_pair| + ω_carrier, not the actual
        // one-sided drive frequency
        let f_max = drives
            .iter()
            .map(|d| (TAU * pulse.carrier - d.ang_freq).abs() + TAU * pulse.carrier.abs())
            .fold(TAU * pulse.rabi, f64::max);
        let mut h = cfg.max_phase_step / f_max;
        if let Some(hs) = cfg.hard_step {
            h = h.min(hs);
        }
        let n_steps = (tau / h).ceil() as u64;
        if n_steps > cfg.max_steps {
            return Err(DynamicsError::StepBudgetExceeded { needed: n_steps, cap: cfg.max_steps });
        }
        let n_steps = n_steps.max(1);
        let h = tau / n_steps as f64;
        let z = drives
            .iter()
            .map(|d| Complex64::from_polar(1.0, d.ang_freq * t0 + pulse.phase))
            .collect();
        let rot_half =
            drives.iter().map(|d| Complex64::from_polar(1.0, d.ang_freq * h * 0.5)).collect();
        Ok(Integrator { drives, z, rot_half, g: 0.5 * TAU * pulse.rabi, h, n_steps })
    }

    #[inline]
    fn deriv(&self, z: &[Complex64], y: &[Complex64; N_STATES]) -> [Complex64; N_STATES] {
        let mut d = [Complex64::ZERO; N_STATES];
        let ig = Complex64::new(0.0, self.g);
        for (p, zp) in self.drives.iter().zip(z.iter()) {
            d[p.ground] += ig * zp * y[p.excited];
            d[p.excited] += ig * zp.conj() * y[p.ground];
        }
        d
    }

    /// One classic RK4 step; `z` is advanced to the step end.
    fn step(&mut self, y: &mut [Complex64; N_STATES], z_mid: &mut [Complex64]) {
        let h = self.h;
        let k1 = self.deriv(&self.z, y);
        for (zm, (z0, r)) in z_mid.iter_mut().zip(self.z.iter().zip(self.rot_half.iter())) {
            *zm = z0 * r;
        }
        let mut y2 = *y;
        for (a, k) in y2.iter_mut().zip(k1.iter()) {
            *a += 0.5 * h * k;
        }
        let k2 = self.deriv(z_mid, &y2);
        let mut y3 = *y;
        for (a, k) in y3.iter_mut().zip(k2.iter()) {
            *a += 0.5 * h * k;
        }
        let k3 = self.deriv(z_mid, &y3);
        for (z, (zm, r)) in self.z.iter_mut().zip(z_mid.iter().zip(self.rot_half.iter())) {
            *z = zm * r;
        }
        let mut y4 = *y;
        for (a, k) in y4.iter_mut().zip(k3.iter()) {
            *a += h * k;
        }
        let k4 = self.deriv(&self.z, &y4);
        let w = h / 6.0;
        for (i, a) in y.iter_mut().enumerate() {
            *a += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }

    /// Keep the drive phasors on the unit circle over long integrations.
    fn renormalize_phasors(&mut self) {
        for z in self.z.iter_mut() {
            *z /= z.norm();
        }
    }
}

fn integrate(
    state: &StateVector,
    pulse: &Pulse,
    params: &ChainParams,
    cfg: &IntegratorConfig,
    allowed: Option<&[(BasisState, BasisState)]>,
    mut on_sample: Option<&mut dyn FnMut(f64, &[Complex64; N_STATES])>,
) -> Result<StateVector, DynamicsError> {
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(DynamicsError::NotNormalized { norm });
    }
    let t0 = state.frame_time;
    let mut integ = Integrator::new(pulse, params, cfg, allowed, t0)?;
    let mut y = state.amps;
    let mut z_mid = integ.z.clone();
    let sample_every = if on_sample.is_some() {
        (integ.n_steps / cfg.samples_per_pulse.max(1) as u64).max(1)
    } else {
        u64::MAX
    };
    for i in 0..integ.n_steps {
        integ.step(&mut y, &mut z_mid);
        if i % 65_536 == 65_535 {
            integ.renormalize_phasors();
        }
        if let Some(cb) = on_sample.as_deref_mut() {
            if (i + 1) % sample_every == 0 || i + 1 == integ.n_steps {
                cb(t0 + (i + 1) as f64 * integ.h, &y);
            }
        }
    }
    Ok(StateVector { amps: y, frame_time: t0 + pulse.duration() })
}

/// Advance `state` through one pulse of duration τ = angle/(2πΩ).
pub fn apply_pulse(
    state: &StateVector,
    pulse: &Pulse,
    params: &ChainParams,
    cfg: &IntegratorConfig,
) -> Result<StateVector, DynamicsError> {
    integrate(state, pulse, params, cfg, None, None)
}

/// Same as [`apply_pulse`] but with the couplings restricted to the listed
/// pairs. Verification tool: isolating one pair reduces the dynamics to the
/// analytic two-level problem.
pub fn apply_pulse_restricted(
    state: &StateVector,
    pulse: &Pulse,
    params: &ChainParams,
    cfg: &IntegratorConfig,
    allowed: &[(BasisState, BasisState)],
) -> Result<StateVector, DynamicsError> {
    integrate(state, pulse, params, cfg, Some(allowed), None)
}

/// One trajectory sample: frame time, populations, spin expectations.
#[derive(Clone, Copy, Debug)]
pub struct Sample {
    pub t: f64,
    pub probs: [f64; N_STATES],
    pub spin_z: [f64; N_SPINS],
}

/// Result of running a pulse sequence.
#[derive(Clone, Debug)]
pub struct ProgramRun {
    pub state: StateVector,
    pub trajectory: Vec<Sample>,
    /// (start, end) frame times of each pulse.
    pub pulse_spans: Vec<(f64, f64)>,
}

/// Fold [`apply_pulse`] over a pulse sequence, recording sampled
/// populations along the way.
pub fn apply_program(
    state: &StateVector,
    pulses: &[Pulse],
    params: &ChainParams,
    cfg: &IntegratorConfig,
) -> Result<ProgramRun, DynamicsError> {
    let mut trajectory = Vec::with_capacity(pulses.len() * cfg.samples_per_pulse);
    let mut spans = Vec::with_capacity(pulses.len());
    let mut current = state.clone();
    let record = |traj: &mut Vec<Sample>, t: f64, amps: &[Complex64; N_STATES]| {
        let sv = StateVector { amps: *amps, frame_time: t };
        traj.push(Sample { t, probs: probabilities(&sv), spin_z: spin_expectations(&sv) });
    };
    record(&mut trajectory, current.frame_time, &current.amps);
    for pulse in pulses {
        let t_start = current.frame_time;
        let mut cb = |t: f64, amps: &[Complex64; N_STATES]| record(&mut trajectory, t, amps);
        current = integrate(&current, pulse, params, cfg, None, Some(&mut cb))?;
        spans.push((t_start, current.frame_time));
    }
    Ok(ProgramRun { state: current, trajectory, pulse_spans: spans })
}
