use thiserror::Error;

use crate::compiler::parser::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid device: {0}")]
    InvalidDevice(String),

    /// Every qubit has `C_m (D - C_m) = 0`, so the coupling normalisation vanishes.
    #[error("degenerate device: coupling normalisation beta is zero")]
    DegenerateDevice,

    #[error("flux {0} outside the canonical branch [0, 0.5] flux quanta")]
    FluxOutOfRange(f64),

    #[error("target Josephson energy {target_hz} Hz outside [0, {max_hz}] Hz")]
    EnergyOutOfRange { target_hz: f64, max_hz: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{n} qubits exceeds the dense simulation cap of {cap}; not simulable at desk scale")]
    SizeCap { n: usize, cap: usize },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("resonance violated in cluster {cluster:?}: frequencies differ by relative {spread:e}")]
    ResonanceViolation { cluster: Vec<usize>, spread: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-Hermitian operator: max deviation {0:e}")]
    NonHermitian(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("preparation invalid: {0}")]
    PreparationInvalid(String),

    #[error("coupling rates across clusters are not uniform: relative spread {spread:e} exceeds {tolerance:e}")]
    NonuniformCoupling { spread: f64, tolerance: f64 },

    #[error("zero coupling between qubits {0} and {1}")]
    ZeroCoupling(usize, usize),

    #[error("qubit {qubit} cannot reach {target_ghz} GHz (maximum {max_ghz} GHz)")]
    UnreachableFrequency {
        qubit: usize,
        target_ghz: f64,
        max_ghz: f64,
    },

    #[error("frequency crowding: {0}")]
    Crowding(String),

    #[error("layer {layer}: allocation infeasible: {reason}")]
    LayerInfeasible { layer: usize, reason: String },

    #[error("layer {layer}: {reason}")]
    InvalidLayer { layer: usize, reason: String },

    #[error("qubit {qubit} out of range for a {n}-qubit device")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("schema: {0}")]
    Schema(String),

    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}
