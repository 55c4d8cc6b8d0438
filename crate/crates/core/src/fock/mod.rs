//! Brute-force truncated Fock-space back end used as an independent oracle
//! for the Gaussian simulator.

mod density;
mod ops;
mod oracle;

pub use density::{fidelity, FockDensity};
pub use ops::{ladder, FockGate, GateLabel};
pub use oracle::{
    displaced_thermal_fock, oracle_broadcast, oracle_phase_conjugate, oracle_purify, OracleCopy,
    OracleOptions, OracleReport, MAX_LIVE_MODES, MAX_STATE_DIM, MIN_SAMPLES,
};
