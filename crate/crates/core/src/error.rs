//! Error type shared by every module of the library.

use thiserror::Error;

/// Failures reported by library operations.
///
/// Every variant corresponds to a violated precondition of the called
/// operation; none of them signal a bug except [`Error::InternalInvariant`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the zero vector has no primitive representative")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ambient ranks differ: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("lattice maps have different targets: {left} vs {right} rows")]
    TargetMismatch { left: usize, right: usize },
    #[error("cone is not strongly convex")]
    NotStronglyConvex,
    #[error("rank {rank} exceeds the supported maximum {max}")]
    RankTooLarge { rank: usize, max: usize },
    #[error("no strictly positive bounding functional exists for the generators")]
    Unbounded,
    #[error("fan does not refine the base fan")]
    NotARefinement,
    #[error("cone is not simplicial of full rank: {0}")]
    NotSimplicial(String),
    #[error("lattice map sends a cone outside every cone of the base fan")]
    IncompatibleMap,
    #[error("cones are not adjacent across a wall: {0}")]
    NotAdjacent(String),
    #[error("wall relation has fewer than two negative coefficients")]
    NotAFlippingWall,
    #[error("cone is not smooth: {0}")]
    NotSmooth(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("invalid wall relation: {0}")]
    InvalidWallRelation(String),
    #[error("exponent triples map to different lattice points")]
    LatticePointMismatch,
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("unknown fixture: {0}")]
    UnknownFixture(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

impl Error {
    /// Stable machine-readable identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroVector => "ZeroVector",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::RankMismatch { .. } => "RankMismatch",
            Error::TargetMismatch { .. } => "TargetMismatch",
            Error::NotStronglyConvex => "NotStronglyConvex",
            Error::RankTooLarge { .. } => "RankTooLarge",
            Error::Unbounded => "Unbounded",
            Error::NotARefinement => "NotARefinement",
            Error::NotSimplicial(_) => "NotSimplicial",
            Error::IncompatibleMap => "IncompatibleMap",
            Error::NotAdjacent(_) => "NotAdjacent",
            Error::NotAFlippingWall => "NotAFlippingWall",
            Error::NotSmooth(_) => "NotSmooth",
            Error::PreconditionFailed(_) => "PreconditionFailed",
            Error::InvalidWallRelation(_) => "InvalidWallRelation",
            Error::LatticePointMismatch => "LatticePointMismatch",
            Error::InvalidFan(_) => "InvalidFan",
            Error::UnknownFixture(_) => "UnknownFixture",
            Error::InternalInvariant(_) => "InternalInvariant",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
