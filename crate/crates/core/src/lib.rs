//! Synthesis and verification of constant-depth circuits built from modular
//! counting gates (MOD_m) together with AND, OR and NOT, for symmetric
//! Boolean functions.

pub mod acc0;
pub mod arith;
pub mod cc0;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod linearize;
pub mod sympoly;
pub mod verify;

pub use circuit::{Circuit, CircuitBuilder, Gate, GateId, Metrics, ModGate};
pub use error::{Error, Result};
