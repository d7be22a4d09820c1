//! Exact dense state-vector simulation of registers of mixed-dimension
//! qudits.
//!
//! Conventions:
//! * amplitudes are row-major over the layout dims (last subsystem fastest);
//! * gate matrices are row-major with column `c` the image of |c>;
//! * tolerances: 1e-10 for algebraic identities, 1e-9 eigenvalue cutoff for
//!   reduced-state rank.

mod eig;
mod gates;
mod layout;
mod state;

pub use gates::{
    hadamard_gate, pauli_x, rotation_gate, shift_gate, ControlledGateSpec, Gate, ALGEBRAIC_TOL,
};
pub use layout::{Label, SubsystemLayout, DEFAULT_MAX_AMPLITUDES};
pub use state::{
    basis_state, bell_state, bell_state_labeled, ghz_state, ghz_state_labeled, MeasurementRecord,
    StateVector, RANK_EIGENVALUE_CUTOFF,
};
