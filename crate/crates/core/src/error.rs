use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("operands belong to different rings")]
    RingMismatch,
    #[error("relation for variable `{0}` is not monic of positive degree")]
    NonMonicRelation(String),
    #[error("invalid ring presentation: {0}")]
    InvalidRing(String),
    #[error("hom images do not satisfy the source relations: {0}")]
    InvalidHom(String),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("inverse witness does not verify")]
    BadInverse,
    #[error("unipotent inverse did not terminate within {0} steps")]
    UnipotentFail(usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("pair is not compatible over the bottom corner")]
    Incompatible,
    #[error("exact division by {0} failed")]
    Division(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = AlgebraError> = std::result::Result<T, E>;
