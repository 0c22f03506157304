//! Error type shared by all simulator modules.

/// Errors produced by the simulator core.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    /// Operand shapes are incompatible for the requested operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix was constructed with a NaN or infinite entry.
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// A Hermitian solve hit a pivot below the relative threshold.
    #[error("matrix is singular or too ill-conditioned to factor")]
    Singular,

    /// Dedicated allocation needs more slots than the frame provides.
    #[error(
        "allocation capacity exceeded: {sensors} sensors x {slots_per_sensor} slots each \
         need more than the {slots} available"
    )]
    CapacityExceeded {
        sensors: usize,
        slots_per_sensor: usize,
        slots: usize,
    },

    /// Phase configuration length does not match the RIS element count.
    #[error("phase configuration has {got} coefficients, expected {expected}")]
    PhaseLengthMismatch { expected: usize, got: usize },

    /// Exhaustive phase enumeration would exceed the size guard.
    #[error("phase enumeration of {bits}-bit x {elements} elements exceeds the 24-bit guard")]
    EnumerationTooLarge { bits: u8, elements: usize },

    /// A configuration value is out of its admissible range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
