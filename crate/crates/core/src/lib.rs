//! Qudit state-vector simulation of quantum-walk entanglement swapping.
//!
//! The crate is organised bottom-up:
//!
//! * [`qudit`]: dense qudit states, operators and exhaustive measurement.
//! * [`walk`]: the walk-based swapping and merging protocols, their
//!   correction rules and the published correction tables.
//! * [`network`]: resource networks, Steiner trees and merge scheduling.
//! * [`fractal`]: Sierpinski-gasket networks and their analytics.
//! * [`mqss`]: multiparty secret sharing over walk-generated GHZ states.
//! * [`readout`]: transfer-matrix readout correction and noisy counts.

pub mod error;
pub mod fractal;
pub mod mqss;
pub mod network;
pub mod qudit;
pub mod readout;
pub mod walk;

pub use error::{Error, Result};
pub use qudit::{
    basis_state, canonical_bell, canonical_ghz, fidelity, fourier_op, measure_all_branches,
    pauli_ops, shift_op, tensor, BasisTag, Branch, Measured, OperatorMatrix, PauliOps, QuditState,
};
pub use walk::{
    correction_for, run_protocol, verify_table, walk_step, CorrectionOp, ProtocolKind,
    ProtocolResult, ProtocolSpec,
};

/// Seed used when callers do not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;
