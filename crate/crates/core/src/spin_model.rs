//! Static spectral structure of the four-spin register: energies, transition
//! frequencies, single-flip connectivity, and resonance lookup.
//!
//! The bare Hamiltonian is diagonal on the computational basis
//! `|i3 i2 i1 i0⟩` with bit 0 the ground orientation and bit 1 the excited
//! one. Its eigenvalues (divided by ħ, in 2π·MHz) are
//!
//! ```text
//! E_m = -1/2 [ Σ_k (-1)^{i_k} ω_k
//!            + J  Σ_{k=0..2} (-1)^{i_k + i_{k+1}}
//!            + J' Σ_{k=0..1} (-1)^{i_k + i_{k+2}} ]
//! ```

use alloc::vec::Vec;
use core::fmt;

pub const N_SPINS: usize = 4;
pub const N_STATES: usize = 16;

/// Larmor frequencies and coupling constants, all in 2π·MHz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams {
    /// Larmor frequency of each spin.
    pub omega: [f64; N_SPINS],
    /// First-neighbor coupling J.
    pub j1: f64,
    /// Second-neighbor coupling J'.
    pub j2: f64,
}

impl ChainParams {
    /// The reference parameter set: ω = (100, 200, 400, 800), J = 10,
    /// J' = 0.4, all in 2π·MHz.
    pub const fn reference() -> Self {
        ChainParams { omega: [100.0, 200.0, 400.0, 800.0], j1: 10.0, j2: 0.4 }
    }

    /// Same chain with the second-neighbor coupling set to `ratio * j1`.
    pub fn with_j_ratio(&self, ratio: f64) -> Self {
        ChainParams { j2: ratio * self.j1, ..*self }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (k, &w) in self.omega.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(ParamError::NonPositiveOmega { spin: k, value: w });
            }
        }
        for k in 0..N_SPINS {
            for l in (k + 1)..N_SPINS {
                if self.omega[k] == self.omega[l] {
                    return Err(ParamError::DegenerateOmega { spins: (k, l) });
                }
            }
        }
        if !self.j1.is_finite() || self.j1 <= 0.0 {
            return Err(ParamError::BadCoupling { name: "j1", value: self.j1 });
        }
        if !self.j2.is_finite() || self.j2 < 0.0 {
            return Err(ParamError::BadCoupling { name: "j2", value: self.j2 });
        }
        Ok(())
    }
}

impl Default for ChainParams {
    fn default() -> Self {
        Self::reference()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamError {
    NonPositiveOmega { spin: usize, value: f64 },
    DegenerateOmega { spins: (usize, usize) },
    BadCoupling { name: &'static str, value: f64 },
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::NonPositiveOmega { spin, value } => {
                write!(f, "omega[{spin}] must be finite and positive, got {value}")
            }
            ParamError::DegenerateOmega { spins: (a, b) } => {
                write!(f, "omega[{a}] and omega[{b}] must be distinct")
            }
            ParamError::BadCoupling { name, value } => {
                write!(f, "coupling {name} out of range: {value}")
            }
        }
    }
}

impl core::error::Error for ParamError {}

/// One of the 16 register states `|i3 i2 i1 i0⟩`, with `i0` the least
/// significant bit of the index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState(u8);

impl BasisState {
    pub const fn new(index: usize) -> Self {
        assert!(index < N_STATES);
        BasisState(index as u8)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    /// Orientation of spin `k`: 0 = ground, 1 = excited.
    pub const fn bit(self, k: usize) -> u8 {
        (self.0 >> k) & 1
    }

    /// The state with spin `k` flipped.
    pub const fn flip(self, k: usize) -> Self {
        BasisState(self.0 ^ (1 << k))
    }

    pub fn all() -> impl Iterator<Item = BasisState> {
        (0..N_STATES).map(BasisState::new)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}{}{}{}>", self.bit(3), self.bit(2), self.bit(1), self.bit(0))
    }
}

fn sign(bit: u8) -> f64 {
    if bit == 0 { 1.0 } else { -1.0 }
}

/// Eigenvalue of `state` divided by ħ, in 2π·MHz.
pub fn energy(state: BasisState, params: &ChainParams) -> f64 {
    let mut acc = 0.0;
    for k in 0..N_SPINS {
        acc += sign(state.bit(k)) * params.omega[k];
    }
    for k in 0..N_SPINS - 1 {
        acc += params.j1 * sign(state.bit(k) ^ state.bit(k + 1));
    }
    for k in 0..N_SPINS - 2 {
        acc += params.j2 * sign(state.bit(k) ^ state.bit(k + 2));
    }
    -0.5 * acc
}

/// Signed transition frequency ω_mk = (E_m − E_k)/ħ, in 2π·MHz.
pub fn transition_frequency(m: BasisState, k: BasisState, params: &ChainParams) -> f64 {
    energy(m, params) - energy(k, params)
}

/// The four states differing from `state` in exactly one spin, with the
/// flipped spin index.
pub fn single_flip_partners(state: BasisState) -> [(BasisState, usize); N_SPINS] {
    [
        (state.flip(0), 0),
        (state.flip(1), 1),
        (state.flip(2), 2),
        (state.flip(3), 3),
    ]
}

/// One single-flip transition. `ground` is the member with the flipped spin
/// in its ground orientation (the smaller index), `excited` the other;
/// `freq` = |E_excited − E_ground| ≥ 0 for positive Larmor frequencies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub ground: BasisState,
    pub excited: BasisState,
    pub freq: f64,
    pub spin: usize,
}

/// All 32 single-flip transitions of a chain, precomputed once per
/// parameter set. Sweeps re-query these heavily, so build it once and share.
#[derive(Clone, Debug)]
pub struct TransitionTable {
    entries: Vec<Transition>,
}

/// Default tolerance for resonance lookup, in 2π·MHz. Degeneracies that are
/// exact in the model (identical neighbor bits) match at machine precision.
pub const RESONANCE_TOL: f64 = 1e-9;

impl TransitionTable {
    pub fn new(params: &ChainParams) -> Self {
        let mut entries = Vec::with_capacity(32);
        for m in BasisState::all() {
            for (k, spin) in single_flip_partners(m) {
                if m < k {
                    let freq = transition_frequency(k, m, params);
                    entries.push(Transition { ground: m, excited: k, freq, spin });
                }
            }
        }
        TransitionTable { entries }
    }

    pub fn entries(&self) -> &[Transition] {
        &self.entries
    }

    /// The transition connecting `m` and `k`, if they differ in one spin.
    pub fn between(&self, m: BasisState, k: BasisState) -> Option<&Transition> {
        let (lo, hi) = if m < k { (m, k) } else { (k, m) };
        self.entries.iter().find(|t| t.ground == lo && t.excited == hi)
    }

    /// All transitions with ||ω_mk| − freq| ≤ tol.
    pub fn resonant(&self, freq: f64, tol: f64) -> Vec<&Transition> {
        debug_assert!(tol >= 0.0);
        self.entries.iter().filter(|t| (t.freq - freq).abs() <= tol).collect()
    }
}

/// All single-flip transitions resonant with `freq` within `tol`.
pub fn resonant_transitions(freq: f64, tol: f64, params: &ChainParams) -> Vec<Transition> {
    TransitionTable::new(params)
        .resonant(freq, tol)
        .into_iter()
        .copied()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ChainParams {
        ChainParams::reference()
    }

    #[test]
    fn ground_state_energy() {
        // -(1500 + 3*10 + 2*0.4)/2
        assert!((energy(BasisState::new(0), &params()) - -765.4).abs() < 1e-9);
    }

    #[test]
    fn all_excited_energy() {
        // sign of the omega sum flips, coupling terms unchanged
        assert!((energy(BasisState::new(15), &params()) - 734.6).abs() < 1e-9);
    }

    #[test]
    fn decoupled_symmetric_chain() {
        let p = ChainParams { omega: [7.0; 4], j1: f64::MIN_POSITIVE, j2: 0.0 };
        // j1 must be > 0 for validity; use a negligible value and compare to
        // the counting formula.
        for s in BasisState::all() {
            let n1: u32 = (0..4).map(|k| s.bit(k) as u32).sum();
            let n0 = 4 - n1;
            let expect = -0.5 * 7.0 * (n0 as f64 - n1 as f64);
            assert!((energy(s, &p) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn spin2_flip_from_ground() {
        let w = transition_frequency(BasisState::new(0), BasisState::new(4), &params());
        assert!((w - (-420.4)).abs() < 1e-12);
        // omega_2 + 2J + J'
        assert!((w.abs() - (400.0 + 2.0 * 10.0 + 0.4)).abs() < 1e-12);
    }

    #[test]
    fn transition_frequency_antisymmetric() {
        let p = params();
        for m in BasisState::all() {
            for k in BasisState::all() {
                let a = transition_frequency(m, k, &p);
                let b = transition_frequency(k, m, &p);
                assert_eq!(a, -b);
            }
        }
    }

    #[test]
    fn spin0_flip_degeneracy() {
        // (4,5) and (12,13) flip spin 0 with the same neighbor bits; spin 3
        // does not couple to spin 0 at all.
        let p = params();
        let a = transition_frequency(BasisState::new(5), BasisState::new(4), &p);
        let b = transition_frequency(BasisState::new(13), BasisState::new(12), &p);
        assert_eq!(a, b);
        assert!((a - 109.6).abs() < 1e-12); // omega_0 + J - J'
    }

    #[test]
    fn partners_of_0_15_5() {
        let ix = |s: BasisState| s.index();
        let p0: std::vec::Vec<usize> =
            single_flip_partners(BasisState::new(0)).iter().map(|(s, _)| ix(*s)).collect();
        assert_eq!(p0, [1, 2, 4, 8]);
        let p15: std::vec::Vec<usize> =
            single_flip_partners(BasisState::new(15)).iter().map(|(s, _)| ix(*s)).collect();
        assert_eq!(p15, [14, 13, 11, 7]);
        let p5: std::vec::Vec<usize> =
            single_flip_partners(BasisState::new(5)).iter().map(|(s, _)| ix(*s)).collect();
        assert_eq!(p5, [4, 7, 1, 13]);
    }

    #[test]
    fn resonance_lookup() {
        let p = params();
        let pairs = |freq: f64| -> std::vec::Vec<(usize, usize)> {
            resonant_transitions(freq, 1e-6, &p)
                .iter()
                .map(|t| (t.ground.index(), t.excited.index()))
                .collect()
        };
        assert_eq!(pairs(109.6), [(4, 5), (12, 13)]);
        assert_eq!(pairs(110.4), [(0, 1), (8, 9)]);
        assert!(pairs(0.0).is_empty());
    }

    #[test]
    fn spectrum_sum_rule() {
        // every omega, J, J' term cancels pairwise under global bit flip
        let total: f64 = BasisState::all().map(|s| energy(s, &params())).sum();
        assert!(total.abs() < 1e-9);
    }

    #[test]
    fn flip_cost_depends_only_on_neighbor_bits() {
        let p = params();
        let table = TransitionTable::new(&p);
        for t in table.entries() {
            for u in table.entries() {
                if t.spin != u.spin {
                    continue;
                }
                let same_env = (0..4).filter(|&k| k != t.spin).all(|k| {
                    let coupled = k.abs_diff(t.spin) <= 2;
                    !coupled || t.ground.bit(k) == u.ground.bit(k)
                });
                if same_env {
                    assert!((t.freq - u.freq).abs() < 1e-9, "{t:?} vs {u:?}");
                }
            }
        }
    }

    #[test]
    fn first_neighbor_only_frequencies() {
        let p = ChainParams { j2: 0.0, ..params() };
        let table = TransitionTable::new(&p);
        for t in table.entries() {
            let w = p.omega[t.spin];
            let j = p.j1;
            let ok = [w, w + j, w - j, w + 2.0 * j, w - 2.0 * j]
                .iter()
                .any(|v| (t.freq - v).abs() < 1e-9);
            assert!(ok, "unexpected frequency {} for spin {}", t.freq, t.spin);
        }
    }

    #[test]
    fn validate_rejects_bad_params() {
        let mut p = params();
        p.omega[1] = p.omega[0];
        assert!(matches!(p.validate(), Err(ParamError::DegenerateOmega { .. })));
        let mut p = params();
        p.j1 = 0.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.j2 = f64::NAN;
        assert!(p.validate().is_err());
        assert!(params().validate().is_ok());
    }
}
