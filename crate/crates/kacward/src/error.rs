use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {0} out of range")]
    BadVertex(usize),
    #[error("duplicate vertex id {0}")]
    DuplicateVertexId(i64),
    #[error("edge {0} is a self-loop")]
    SelfLoop(usize),
    #[error("edge {0} has zero length")]
    ZeroLength(usize),
    #[error("edges {0} and {1} cross or overlap")]
    Crossing(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no edges")]
    Empty,
    #[error("edge weight {weight} on edge {edge} is not usable")]
    BadWeight { edge: usize, weight: f64 },
    #[error("boundary vertex {0} is not univalent on the outer face")]
    BadBoundary(usize),
    #[error("graph has no usable boundary: {0}")]
    NoBoundary(String),
    #[error("turning angle undefined: {0}")]
    Angle(String),
    #[error("no face contains the point ({0}, {1})")]
    NoFace(f64, f64),
    #[error("face {0} is the outer face")]
    OuterFace(usize),
    #[error("cut paths not found: {0}")]
    Infeasible(String),
    #[error("matrix is singular (pivot {pivot:e}, scale {scale:e})")]
    Singular { pivot: f64, scale: f64 },
    #[error("matrix entry ({i},{j}) violates antisymmetry or realness by {residue:e}")]
    NotSkew { i: usize, j: usize, residue: f64 },
    #[error("index {0} out of range")]
    UnknownLabel(usize),
    #[error("index {0} repeated")]
    RepeatedLabel(usize),
    #[error("identity check failed: {what} residual {residual:e}")]
    Identity { what: String, residual: f64 },
    #[error("enumeration over budget: {0}")]
    Budget(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("operation needs the plane but the graph is on the torus")]
    NotPlanar,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::BadVertex(_) => "bad_vertex",
            Error::DuplicateVertexId(_) => "duplicate_vertex_id",
            Error::SelfLoop(_) => "self_loop",
            Error::ZeroLength(_) => "zero_length",
            Error::Crossing(..) => "crossing",
            Error::Disconnected => "disconnected",
            Error::Empty => "empty",
            Error::BadWeight { .. } => "bad_weight",
            Error::BadBoundary(_) => "bad_boundary",
            Error::NoBoundary(_) => "no_boundary",
            Error::Angle(_) => "angle",
            Error::NoFace(..) => "no_face",
            Error::OuterFace(_) => "outer_face",
            Error::Infeasible(_) => "infeasible",
            Error::Singular { .. } => "singular",
            Error::NotSkew { .. } => "not_skew",
            Error::UnknownLabel(_) => "unknown_label",
            Error::RepeatedLabel(_) => "repeated_label",
            Error::Identity { .. } => "identity",
            Error::Budget(_) => "budget",
            Error::Invalid(_) => "invalid",
            Error::NotPlanar => "not_planar",
        }
    }

    /// Whether the error comes from the numerics rather than the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::NotSkew { .. } | Error::Identity { .. } | Error::Angle(_))
    }
}
