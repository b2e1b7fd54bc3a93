//! Pulse-level simulation of a four-spin nuclear chain with first- and
//! second-neighbor Ising couplings.
//!
//! The chain is driven by resonant rf pulses; amplitudes are integrated in
//! the interaction representation, keeping every non-resonant coupling.
//! Frequencies are plain numbers in units of 2π·MHz, time is in µs, and
//! phases accumulate as 2π·f·t.
//!
//! The crate is `no_std` (with `alloc`); IO, CLI, and file formats live in
//! the companion `spinchain-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod spin_model;
pub mod sweep;
pub mod teleport;
pub mod two_level;

pub use num_complex::Complex64;
