//! The three optimal circuits (broadcast, purify, phase-conjugate) and the
//! per-copy statistics they produce.

mod circuit;
mod report;

pub use circuit::{
    build_broadcast_circuit, build_phase_conjugate_circuit, build_purify_circuit, CircuitSpec,
    Stage,
};
pub use report::{
    predicted_output_state, run_broadcast, run_broadcast_state, run_map, run_phase_conjugate,
    run_phase_conjugate_state, run_purify, run_purify_state, BroadcastReport, MapKind, INPUT_TOL,
    REPORT_TOL,
};
