use thiserror::Error;

use crate::fps::Caps;

pub type Result<T> = std::result::Result<T, Error>;

/// Order at which an identity failed: ε-power and total degree
/// (form degree plus y-degree).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Location {
    pub eps_order: u32,
    pub total_degree: u32,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(ε{}, degree {})", self.eps_order, self.total_degree)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cap mismatch: {0:?} vs {1:?}")]
    CapMismatch(Caps, Caps),
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("x-degree {degree} exceeds cap N_x = {cap}")]
    XDegreeOverflow { degree: u32, cap: u32 },
    #[error("series not divisible by eps^{k}: term of eps-order {found} present")]
    NotDivisible { k: u32, found: u32 },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("christoffel not symmetric: Γ^{j}_{{{k}{l}}} != Γ^{j}_{{{l}{k}}}")]
    AsymmetricChristoffel { j: usize, k: usize, l: usize },
    #[error("chart is not a Darboux section for Ω₀ (direction {direction})")]
    NonSymplectic { direction: usize },
    #[error("darboux_check failed: residual {0}")]
    NotDarboux(String),
    #[error("delta_inv applied to a form that is not δ-closed")]
    NotDeltaClosed,
    #[error("{stage}: identity violated at {location}")]
    TheoryViolation { stage: String, location: Location },
}
