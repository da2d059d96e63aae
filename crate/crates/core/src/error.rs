use crate::Qubit;

/// Crate-wide error type. Variants name the offending element where the
/// operation contract requires it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown qubit {0}")]
    UnknownQubit(Qubit),
    #[error("unknown coupler ({0}, {1})")]
    UnknownCoupler(Qubit, Qubit),
    #[error("qubits {0} and {1} are not coupled")]
    NotCoupled(Qubit, Qubit),
    #[error("state is missing variable {0}")]
    MissingVariable(Qubit),
    #[error("states cover different variable sets")]
    VariableMismatch,
    #[error("penalty function variables do not match the gadget layout")]
    LayoutMismatch,
    #[error("model has {0} free variables, above the brute-force cap of {1}")]
    TooManyVariables(usize, usize),
    #[error("gadget truth table is a contradiction; no satisfying assignment anchors energy 0")]
    Contradiction,
    #[error("synthesis infeasible: {0}")]
    Infeasible(String),
    #[error("synthesis budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("multiplier version {0} has no builder (layout descriptor only)")]
    UnimplementedVersion(String),
    #[error("no clean placement region for a {rows}x{cols}-tile footprint")]
    NoCleanRegion { rows: u32, cols: u32 },
    #[error("faulty {0} inside placement footprint")]
    FaultInFootprint(String),
    #[error("target {0} does not fit in {1} product bits")]
    TargetTooLarge(u128, u32),
    #[error("coefficient out of range after composition: {0}")]
    RangeViolation(String),
    #[error("empty sample set")]
    EmptySampleSet,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
