//! Perfect quantum state transfer on qubit spin networks.
//!
//! The crate builds network graphs ([`graph`]), their XX and Heisenberg
//! Hamiltonians ([`spin`]), evolves single excitations ([`dynamics`]),
//! certifies or refutes perfect state transfer ([`pst`]) and computes the
//! classical random-walk hitting times on the same graphs ([`walk`]).

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod pst;
pub mod sparse;
pub mod spin;
pub mod walk;

pub use error::{Error, Result};
