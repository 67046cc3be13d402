use thiserror::Error;

/// Failure modes of the energy pipeline.
///
/// `VanishingNorm` is the physically meaningful one: the antisymmetrized
/// state has zero norm (exactly at q = 0 for n ≥ 2, or numerically
/// indistinguishable from zero at the precision cap), so the Rayleigh
/// quotient is undefined there.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error(
        "vanishing norm: signed overlap sum indistinguishable from zero \
         (condition {condition:.3e} at {bits} bits)"
    )]
    VanishingNorm { condition: f64, bits: u32 },

    #[error("no bracketing minimum: energy scan over p in [1e-4, 1e4] found no interior minimum")]
    NoBracket,

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("mixing parameter undefined: fermion and boson references coincide")]
    UndefinedMu,
}

pub type Result<T> = std::result::Result<T, Error>;
