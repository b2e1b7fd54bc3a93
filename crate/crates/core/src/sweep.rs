//! Fidelity sweeps over the coupling ratio J'/J and the Rabi frequency,
//! plus threshold and peak extraction on the resulting curves.

use alloc::vec::Vec;

use crate::dynamics::{apply_pulse, probabilities, DynamicsError, IntegratorConfig};
use crate::spin_model::{ChainParams, N_STATES};
use crate::teleport::{build_program, fidelity, ideal_states, initial_state, Fidelity, InputQubit};

/// Which knob the sweep turns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepControl {
    /// The coupling ratio J'/J; carriers are recomputed at every point so
    /// each pulse stays resonant with its own chain.
    JRatio,
    /// The Rabi frequency, at fixed chain parameters.
    Rabi,
}

/// A sweep: the control, the grid of control values, and everything held
/// fixed across points.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub control: SweepControl,
    pub grid: Vec<f64>,
    pub base: ChainParams,
    pub qubit: InputQubit,
    /// Rabi frequency used when sweeping J'/J.
    pub rabi: f64,
    pub integrator: IntegratorConfig,
}

impl SweepSpec {
    pub fn j_ratio(grid: Vec<f64>) -> Self {
        SweepSpec {
            control: SweepControl::JRatio,
            grid,
            base: ChainParams::reference(),
            qubit: InputQubit::reference(),
            rabi: 0.1,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn rabi(grid: Vec<f64>) -> Self {
        SweepSpec { control: SweepControl::Rabi, ..SweepSpec::j_ratio(grid) }
    }
}

/// The observables at one sweep point: fidelity of the final state against
/// the ideal teleported state, and the final populations.
#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub fidelity: Fidelity,
    pub probs: [f64; N_STATES],
    pub duration: f64,
}

/// One grid point; integration failures are recorded, not fatal.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub value: f64,
    pub result: Result<SweepPoint, DynamicsError>,
}

/// Run the full seven-pulse protocol at one control value.
pub fn evaluate_point(spec: &SweepSpec, value: f64) -> Result<SweepPoint, DynamicsError> {
    let (params, rabi) = match spec.control {
        SweepControl::JRatio => (spec.base.with_j_ratio(value), spec.rabi),
        SweepControl::Rabi => (spec.base, value),
    };
    let program = build_program(&params, rabi);
    let mut state = initial_state(&spec.qubit);
    for pulse in program.pulses() {
        state = apply_pulse(&state, &pulse, &params, &spec.integrator)?;
    }
    let (_, _, psi3) = ideal_states(&spec.qubit);
    // undo the free interaction-picture phase difference? none: ideal states
    // are defined in the same interaction picture, where free evolution is
    // already absorbed into the frame
    let f = fidelity(&state, &psi3);
    Ok(SweepPoint { value, fidelity: f, probs: probabilities(&state), duration: state.frame_time })
}

/// Evaluate every grid point in order.
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    spec.grid
        .iter()
        .map(|&v| SweepRow { value: v, result: evaluate_point(spec, v) })
        .collect()
}

pub fn sweep_j_ratio(grid: Vec<f64>) -> Vec<SweepRow> {
    run_sweep(&SweepSpec::j_ratio(grid))
}

pub fn sweep_rabi(grid: Vec<f64>) -> Vec<SweepRow> {
    run_sweep(&SweepSpec::rabi(grid))
}

/// Successful rows as (control value, fidelity magnitude) pairs.
pub fn fidelity_curve(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| r.result.as_ref().ok().map(|p| (r.value, p.fidelity.magnitude)))
        .collect()
}

/// The smallest control value from which the curve stays at or above
/// `level` times its plateau.
///
/// The plateau is the median of the top decile of y values, which is robust
/// to a few rough points. Requiring the curve to *stay* above the cut makes
/// the answer meaningful for curves that oscillate while converging to the
/// plateau: early excursions above the cut do not count. A curve entirely
/// above the cut yields its first grid point; one ending below yields
/// `None`.
pub fn find_threshold(points: &[(f64, f64)], level: f64) -> Option<f64> {
    if points.is_empty() || !(level > 0.0 && level < 1.0) {
        return None;
    }
    let mut ys: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    ys.sort_by(|a, b| a.partial_cmp(b).expect("finite fidelities"));
    let top = &ys[ys.len() - ys.len().div_ceil(10)..];
    let plateau = top[top.len() / 2];
    let cut = level * plateau;
    let mut threshold = None;
    for &(x, y) in points.iter().rev() {
        if y < cut {
            break;
        }
        threshold = Some(x);
    }
    threshold
}

/// A local maximum of a sampled curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    /// Height above the higher of the two flanking valleys.
    pub prominence: f64,
}

/// Local maxima with prominence at least `min_prominence`, in grid order.
///
/// A point is a candidate when it is at least as high as both neighbors
/// (plateaus report their first point). Each candidate's flanking valleys
/// are the lowest values between it and the nearest higher point (or the
/// ends of the grid).
pub fn find_peaks(points: &[(f64, f64)], min_prominence: f64) -> Vec<Peak> {
    let n = points.len();
    let mut peaks = Vec::new();
    let y = |i: usize| points[i].1;
    let mut i = 1;
    while i + 1 < n {
        if y(i) < y(i - 1) || y(i) < y(i + 1) {
            i += 1;
            continue;
        }
        // skip to the far edge of a plateau, keep its first index
        let start = i;
        while i + 1 < n && y(i + 1) == y(start) {
            i += 1;
        }
        if i + 1 < n && y(i + 1) > y(start) {
            i += 1;
            continue;
        }
        let mut left = y(start);
        for j in (0..start).rev() {
            left = left.min(y(j));
            if y(j) > y(start) {
                break;
            }
        }
        let mut right = y(start);
        for j in i + 1..n {
            right = right.min(y(j));
            if y(j) > y(start) {
                break;
            }
        }
        let prominence = y(start) - left.max(right);
        if prominence > 0.0 && prominence >= min_prominence {
            peaks.push(Peak { index: start, x: points[start].0, y: y(start), prominence });
        }
        i += 1;
    }
    peaks
}
