use thiserror::Error;

/// Errors raised by every module. Variants group into the CLI exit classes:
/// validation (2), numerical failure (3) and size limits (4).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("point {0} is not inside the open disk (margin {1:e})")]
    OutsideDisk(String, f64),
    #[error("degenerate geodesic: endpoints coincide")]
    DegenerateGeodesic,
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("tree has a single branch point and cannot be reduced")]
    Irreducible,
    #[error("generators cross: {0}")]
    NotSimple(String),
    #[error("pullback matching is not unique: {0} admissible matchings")]
    NonUniqueMatching(usize),
    #[error("graph is not realizable as a Tischler dual: {0}")]
    NotRealizable(String),
    #[error("blowup tree at vertex {vertex} has {got} ends, expected {want}")]
    EndCountMismatch { vertex: usize, got: usize, want: usize },
    #[error("blowup attachment violates cyclic order at vertex {0}")]
    CyclicOrderViolation(usize),
    #[error("decoration does not match the faces of the graph: {0}")]
    DecorationMismatch(String),
    #[error("root finder lost roots: {0}")]
    RootFindFailure(String),
    #[error("fixed-point bracketing failed: {0}")]
    BracketFailure(String),
    #[error("continuation points collided: {0}")]
    ContinuationStepCollision(String),
    #[error("critical clustering unstable across the top of the grid")]
    UnstableClustering,
    #[error("ambiguous projection: {0}")]
    AmbiguousProjection(String),
    #[error("no admissible direction for the new zero at vertex {0}")]
    AngleStarvation(usize),
    #[error("normal form solve failed: {0}")]
    NormalFormFailure(String),
    #[error("prescribed critical point solve failed: {0}")]
    SolveFailure(String),
    #[error("realization does not match the tree: {0}")]
    RealizationMismatch(String),
    #[error("parameter step too large after {0} refinements")]
    StepTooLarge(usize),
    #[error("traced points collided: {0}")]
    Collision(String),
    #[error("paths do not share an endpoint")]
    EndpointMismatch,
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            SizeLimit(_) => 4,
            RootFindFailure(_) | BracketFailure(_) | ContinuationStepCollision(_) | UnstableClustering
            | AmbiguousProjection(_) | AngleStarvation(_) | NormalFormFailure(_) | SolveFailure(_)
            | RealizationMismatch(_) | StepTooLarge(_) | Collision(_) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        use Error::*;
        match self {
            Invalid(_) => "Invalid",
            OutsideDisk(..) => "OutsideDisk",
            DegenerateGeodesic => "DegenerateGeodesic",
            SizeLimit(_) => "SizeLimit",
            Irreducible => "Irreducible",
            NotSimple(_) => "NotSimple",
            NonUniqueMatching(_) => "NonUniqueMatching",
            NotRealizable(_) => "NotRealizable",
            EndCountMismatch { .. } => "EndCountMismatch",
            CyclicOrderViolation(_) => "CyclicOrderViolation",
            DecorationMismatch(_) => "DecorationMismatch",
            RootFindFailure(_) => "RootFindFailure",
            BracketFailure(_) => "BracketFailure",
            ContinuationStepCollision(_) => "ContinuationStepCollision",
            UnstableClustering => "UnstableClustering",
            AmbiguousProjection(_) => "AmbiguousProjection",
            AngleStarvation(_) => "AngleStarvation",
            NormalFormFailure(_) => "NormalFormFailure",
            SolveFailure(_) => "SolveFailure",
            RealizationMismatch(_) => "RealizationMismatch",
            StepTooLarge(_) => "StepTooLarge",
            Collision(_) => "Collision",
            EndpointMismatch => "EndpointMismatch",
            MissingArtifact(_) => "MissingArtifact",
            Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
