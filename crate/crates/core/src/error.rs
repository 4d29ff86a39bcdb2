use alloc::string::String;

/// Errors raised by the geometry kernel, the reductions and the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("homogeneous vector is zero")]
    ZeroVector,
    #[error("point coincides with the camera center")]
    CenterProjection,
    #[error("line passes through a camera center")]
    LineThroughCenter,
    #[error("camera centers coincide")]
    CoincidentCenters,
    #[error("planes coincide")]
    CoincidentPlanes,
    #[error("points are proportional")]
    ProportionalPoints,
    #[error("line lies in the plane")]
    LineInPlane,
    #[error("camera matrix does not have rank 3")]
    RankDeficientCamera,
    #[error("rank deficiency: {0}")]
    RankDeficiency(&'static str),
    #[error("expected {expected} views, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("bad slice pattern: {0}")]
    BadSlicePattern(String),
    #[error("a patch denominator vanishes identically")]
    DegenerateDenominator,
    #[error("polynomial is zero")]
    ZeroPolynomial,
    #[error("solution lies at infinity of the affine patch")]
    PatchInfinity,
    #[error("anchor point coincides with a camera center")]
    CenterCoincidence,
    #[error("image line cannot be represented in the affine patch")]
    LineAtInfinity,
    #[error("no finite real critical point")]
    NoRealSolution,
    #[error("could not generate a generic scene in {0} attempts")]
    DegenerateScene(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
