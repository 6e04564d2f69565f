use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown constellation `{0}` (expected one of psk4, s4, psk8, qam8cross, s8)")]
    UnknownConstellation(String),

    #[error("a constellation needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("constellation points must be finite")]
    NonFinite,

    #[error("constellation has zero energy")]
    ZeroEnergy,

    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),

    #[error("network map is not a valid {size}x{size} grid over symbols 1..: {reason}")]
    MalformedMap { size: usize, reason: String },

    #[error("network map of order {map} does not fit a constellation of size {constellation}")]
    SizeMismatch { map: usize, constellation: usize },

    #[error("no published square `{id}` for constellation `{constellation}`")]
    UnknownSquare { constellation: String, id: String },

    #[error("transform {0} does not map the constellation onto itself")]
    NotASymmetry(String),

    #[error("derived map does not remove fade state {state}")]
    VerificationFailed { state: String },

    #[error("fade state {state} forces two cells of one row or column into a cluster")]
    ExclusiveLawConflict { state: String },

    #[error("no removing map found for fade state {state}")]
    NoRemovingMap { state: String },

    #[error("fade states must differ and be singular for a transition boundary")]
    InvalidBoundaryPair,

    #[error("degenerate transition circle (r^2 = {discriminant})")]
    DegenerateBoundary { discriminant: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
