//! Simulation laboratory for key distribution via entanglement-encrypted carriers.
//!
//! The crate is organized in layers:
//!
//! * [`qcore`] — exact dense state-vector simulation of mixed-dimension qudit
//!   registers: construction, tensor composition, unitary application,
//!   projective measurement, fidelity and reduced-state rank.
//! * [`runtime`] — the protocol execution fabric: party roles, subsystem
//!   custody, the interceptable quantum channel, the public classical board
//!   and per-round transcripts.
//! * [`protocols`] — the protocol state machines (the two-party Bell-key
//!   families, their higher-dimensional repairs, and the three-party GHZ
//!   secret-sharing family).
//! * [`adversaries`] — attack strategies expressed as channel interceptors
//!   with classical post-processing over the public board.
//! * [`analysis`] — Monte Carlo experiment runner, statistics, and the
//!   transmission-efficiency calculus.
//! * [`verify`] — exact-oracle checks of every protocol state construction
//!   against independently written amplitude formulas.
//! * [`cli`] — command-line front end.

pub mod adversaries;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod protocols;
pub mod qcore;
pub mod runtime;
pub mod verify;

pub use error::{Error, Result};
