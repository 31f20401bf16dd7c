use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),

    /// A constructed ring instance fails one of the Frobenius/local axioms.
    #[error("ring axiom violated: {0}")]
    RingAxiom(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what}: size {size} exceeds limit {limit} (use force to override)")]
    Guard { what: String, size: u128, limit: u128 },

    /// A computed object contradicts a proven structural fact (for instance an
    /// unsolvable lift congruence or a violated distance inequality).
    #[error("consistency failure: {0}")]
    Consistency(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Refused because the computation is infeasible at the configured limits.
    Guard,
    /// The input is malformed or violates a precondition.
    Invalid,
    /// The theory was violated; the interesting outcome for a research tool.
    Consistency,
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Guard { .. } | Error::Overflow(_) => Category::Guard,
            Error::Consistency(_) => Category::Consistency,
            _ => Category::Invalid,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }
}

/// Enumeration budgets. Every exhaustive routine checks its search space
/// against one of the constants below unless `force` is set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Limits {
    pub force: bool,
}

/// Codeword enumeration in distance computations.
pub const ENUMERATION_LIMIT: u128 = 1 << 26;
/// Full scans of the ambient space used as test oracles.
pub const BRUTE_FORCE_LIMIT: u128 = 1 << 24;
/// Monomial group enumeration: |SL2(R)|^n * n!.
pub const MONOMIAL_LIMIT: u128 = 1 << 20;
/// Codes whose symplectic isometry group is enumerated.
pub const SYMP_CODE_LIMIT: u128 = 1 << 12;
/// Candidate image tuples visited during isometry-group enumeration.
pub const SYMP_SEARCH_LIMIT: u128 = 1 << 24;
/// Dimension q^n of the complex realizer.
pub const REALIZER_LIMIT: u128 = 64;

impl Limits {
    pub fn forced() -> Self {
        Limits { force: true }
    }

    pub fn check(&self, what: &str, size: u128, limit: u128) -> Result<()> {
        if size > limit && !self.force {
            return Err(Error::Guard { what: what.to_string(), size, limit });
        }
        Ok(())
    }
}
