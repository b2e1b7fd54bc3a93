//! Analytic two-level Rabi dynamics and the 2πk pulse-design method.
//!
//! An isolated detuned pair evolves under
//!
//! ```text
//! i dD_m/dt = -(Ω/2) e^{-iΔt} D_p      i dD_p/dt = -(Ω/2) e^{+iΔt} D_m
//! ```
//!
//! (angular units; `p` the excited member, `m` the ground one, Δ the pair
//! frequency minus the carrier). Choosing Ω so the generalized Rabi phase
//! completes whole cycles during a pulse returns non-resonant populations
//! to their start: Ω = |Δ|/√(4k²−1) for a π pulse, |Δ|/√(16k²−1) for π/2.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use num_complex::Complex64;
// test builds link std, whose inherent f64 methods shadow the trait's
#[cfg(not(test))]
use num_traits::Float as _;

use crate::spin_model::ChainParams;

/// Parameters of the isolated pair: Rabi frequency and detuning in 2π·MHz,
/// initial amplitudes of the excited (`c_p0`) and ground (`c_m0`) members.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelParams {
    pub rabi: f64,
    pub detuning: f64,
    pub c_p0: Complex64,
    pub c_m0: Complex64,
}

impl TwoLevelParams {
    /// Generalized Rabi frequency Ω_e = √(Ω² + Δ²), in 2π·MHz.
    pub fn effective_rabi(&self) -> f64 {
        (self.rabi * self.rabi + self.detuning * self.detuning).sqrt()
    }
}

/// Closed-form amplitudes (D_p(t), D_m(t)) of the isolated pair at time `t`
/// in µs. Unit norm is preserved exactly.
pub fn analytic_evolution(p: &TwoLevelParams, t: f64) -> (Complex64, Complex64) {
    let we = TAU * p.effective_rabi();
    let dd = TAU * p.detuning;
    let om = TAU * p.rabi;
    let half = 0.5 * we * t;
    let (s, c) = half.sin_cos();
    let (ds, os) = if we == 0.0 {
        (0.0, 0.0)
    } else {
        (dd / we * s, om / we * s)
    };
    let bracket_p = p.c_p0 * Complex64::new(c, -ds) + Complex64::new(0.0, os) * p.c_m0;
    let bracket_m = p.c_m0 * Complex64::new(c, ds) + Complex64::new(0.0, os) * p.c_p0;
    let rot = Complex64::from_polar(1.0, 0.5 * dd * t);
    (bracket_p * rot, bracket_m * rot.conj())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoLevelError {
    ZeroK,
    ZeroDetuning,
}

impl fmt::Display for TwoLevelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwoLevelError::ZeroK => write!(f, "k must be a positive integer"),
            TwoLevelError::ZeroDetuning => write!(f, "detuning must be nonzero"),
        }
    }
}

impl core::error::Error for TwoLevelError {}

/// Rabi frequency Ω = |Δ|/√(4k²−1) making a π pulse complete k generalized
/// Rabi cycles on a pair detuned by Δ.
pub fn rabi_2pik_pi(delta: f64, k: u32) -> Result<f64, TwoLevelError> {
    if k == 0 {
        return Err(TwoLevelError::ZeroK);
    }
    if delta == 0.0 {
        return Err(TwoLevelError::ZeroDetuning);
    }
    let k = k as f64;
    Ok(delta.abs() / (4.0 * k * k - 1.0).sqrt())
}

/// Rabi frequency Ω = |Δ|/√(16k²−1), the π/2-pulse analogue. Satisfies
/// `rabi_2pik_halfpi(d, j) == rabi_2pik_pi(d, 2j)` exactly.
pub fn rabi_2pik_halfpi(delta: f64, k: u32) -> Result<f64, TwoLevelError> {
    if k == 0 {
        return Err(TwoLevelError::ZeroK);
    }
    if delta == 0.0 {
        return Err(TwoLevelError::ZeroDetuning);
    }
    let k = k as f64;
    Ok(delta.abs() / (16.0 * k * k - 1.0).sqrt())
}

/// The detunings a pulse can see on this chain, built from J and J'.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetuningLabel {
    TwoJPrime,
    TwoJ,
    TwoJMinusTwoJPrime,
    TwoJPlusTwoJPrime,
    FourJ,
    FourJPlusTwoJPrime,
}

impl DetuningLabel {
    pub const ALL: [DetuningLabel; 6] = [
        DetuningLabel::TwoJPrime,
        DetuningLabel::TwoJ,
        DetuningLabel::TwoJMinusTwoJPrime,
        DetuningLabel::TwoJPlusTwoJPrime,
        DetuningLabel::FourJ,
        DetuningLabel::FourJPlusTwoJPrime,
    ];

    pub fn value(self, params: &ChainParams) -> f64 {
        let (j, jp) = (params.j1, params.j2);
        match self {
            DetuningLabel::TwoJPrime => 2.0 * jp,
            DetuningLabel::TwoJ => 2.0 * j,
            DetuningLabel::TwoJMinusTwoJPrime => 2.0 * j - 2.0 * jp,
            DetuningLabel::TwoJPlusTwoJPrime => 2.0 * j + 2.0 * jp,
            DetuningLabel::FourJ => 4.0 * j,
            DetuningLabel::FourJPlusTwoJPrime => 4.0 * j + 2.0 * jp,
        }
    }
}

impl fmt::Display for DetuningLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DetuningLabel::TwoJPrime => "2J'",
            DetuningLabel::TwoJ => "2J",
            DetuningLabel::TwoJMinusTwoJPrime => "2J-2J'",
            DetuningLabel::TwoJPlusTwoJPrime => "2J+2J'",
            DetuningLabel::FourJ => "4J",
            DetuningLabel::FourJPlusTwoJPrime => "4J+2J'",
        };
        f.write_str(s)
    }
}

/// Labeled detuning values for one parameter set.
#[derive(Clone, Debug)]
pub struct DetuningCatalog {
    entries: Vec<(DetuningLabel, f64)>,
}

impl DetuningCatalog {
    pub fn new(params: &ChainParams) -> Self {
        let entries =
            DetuningLabel::ALL.iter().map(|&l| (l, l.value(params))).collect();
        DetuningCatalog { entries }
    }

    pub fn entries(&self) -> &[(DetuningLabel, f64)] {
        &self.entries
    }
}

/// One π-pulse design point Ω_Δ^(k).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatalogPoint {
    pub label: DetuningLabel,
    pub delta: f64,
    pub k: u32,
    pub omega: f64,
}

/// A group of design points from different detuning families that share
/// (within the tolerance) one Rabi frequency. `members[0]` is the anchor.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub members: Vec<CatalogPoint>,
}

impl Cluster {
    pub fn anchor(&self) -> &CatalogPoint {
        &self.members[0]
    }
}

/// Find Rabi frequencies where π-pulse design points from different
/// detuning families coincide.
///
/// The family with the smallest nonzero detuning has the sparsest ladder of
/// Ω^(k) values inside the window; its points anchor the clusters, and every
/// point of every other family within `cluster_tol` (relative) joins the
/// anchor's cluster. Zero detunings are skipped. Clusters come out ordered
/// by descending Rabi frequency.
pub fn coincidence_scan(
    catalog: &DetuningCatalog,
    k_max: u32,
    omega_window: (f64, f64),
    cluster_tol: f64,
) -> Vec<Cluster> {
    let (lo, hi) = omega_window;
    let families: Vec<(DetuningLabel, f64)> = catalog
        .entries()
        .iter()
        .copied()
        .filter(|&(_, d)| d > 0.0)
        .collect();
    let Some(&(anchor_label, anchor_delta)) = families
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite detunings"))
    else {
        return Vec::new();
    };

    let points_of = |label: DetuningLabel, delta: f64| -> Vec<CatalogPoint> {
        (1..=k_max)
            .filter_map(|k| {
                let omega = rabi_2pik_pi(delta, k).ok()?;
                (omega >= lo && omega <= hi).then_some(CatalogPoint { label, delta, k, omega })
            })
            .collect()
    };

    let mut clusters = Vec::new();
    for anchor in points_of(anchor_label, anchor_delta) {
        let mut members = alloc::vec![anchor];
        for &(label, delta) in &families {
            if label == anchor_label {
                continue;
            }
            for p in points_of(label, delta) {
                if ((p.omega - anchor.omega) / anchor.omega).abs() <= cluster_tol {
                    members.push(p);
                }
            }
        }
        clusters.push(Cluster { members });
    }
    clusters.sort_by(|a, b| {
        b.anchor().omega.partial_cmp(&a.anchor().omega).expect("finite omegas")
    });
    clusters
}
