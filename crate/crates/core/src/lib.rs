//! Encoding integer factorization as Ising models on an idealized Pegasus-style
//! qubit grid, and solving them with a classical annealing simulator.
//!
//! The pipeline mirrors how such problems are run on real annealing hardware:
//!
//! 1. [`topology`] models the hardware graph (tiles, couplers, faults).
//! 2. [`synth`] synthesizes penalty functions for small Boolean gadgets
//!    (controlled full adders and friends) and verifies them exhaustively.
//! 3. [`multiplier`] composes gadget penalties into an m-by-n-bit
//!    shift-and-add multiplier with qubit sharing and chains.
//! 4. [`sampler`] solves Ising models with brute force or a schedule-driven
//!    Metropolis annealer (forward with pause, reverse).
//! 5. [`strategy`] orchestrates multi-stage searches, including iterated
//!    reverse annealing.
//! 6. [`analysis`] computes post-hoc metrics and report tables.

pub mod analysis;
pub mod config;
pub mod ising;
pub mod multiplier;
pub mod sampler;
pub mod strategy;
pub mod synth;
pub mod topology;

mod error;

pub use error::Error;

/// Flat qubit identifier, stable across runs for a fixed grid shape.
pub type Qubit = u32;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
