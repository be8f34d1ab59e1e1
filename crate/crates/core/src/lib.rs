//! Truncated Fock-space simulation of qubit-to-cat-state teleportation over
//! entangled coherent states, the associated verification and pseudo
//! Pauli-x gadgets, and cavity self-Kerr engineering with a fluxonium and a
//! transmon.

pub mod error;
pub mod fock;
pub mod gadgets;
pub mod kerr;
pub mod states;
pub mod teleport;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
