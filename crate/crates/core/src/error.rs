use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("repeated consecutive vertex at index {0}")]
    RepeatedVertex(usize),

    #[error("polygon is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),

    #[error("zero interior angle at vertex {0}")]
    ZeroAngle(usize),

    #[error("element boundary is not counter-clockwise (signed area {0})")]
    Orientation(f64),

    #[error("edge {0} is degenerate")]
    DegenerateEdge(usize),

    #[error("invalid edge geometry: {0}")]
    EdgeGeometry(String),

    #[error("point ({x}, {y}) is not on the element boundary")]
    NotOnBoundary { x: f64, y: f64 },

    #[error("point ({x}, {y}) is not strictly inside the element")]
    NotInterior { x: f64, y: f64 },

    #[error("double-layer kernel is undefined at vertex node {0}")]
    KernelAtVertex(usize),

    #[error("Nystrom system is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("Nystrom residual {residual:e} exceeds {limit:e}")]
    Residual { residual: f64, limit: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("element is not star-shaped with respect to any tested center")]
    NotStarShaped,

    #[error("non-conforming mesh: {0}")]
    NonConforming(String),

    #[error("harmonic solutions belong to different operators")]
    OperatorMismatch,

    #[error("no Dirichlet edges are marked")]
    NoDirichletEdges,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
