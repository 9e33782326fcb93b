use thiserror::Error;

/// Errors produced by mesh construction, file ingestion and the solver.
#[derive(Debug, Error)]
pub enum CgksError {
    #[error("cell {cell} has non-positive volume {volume:.3e}")]
    NonPositiveVolume { cell: usize, volume: f64 },

    #[error("cell {cell}: face {face} is oriented inward")]
    InvertedFace { cell: usize, face: usize },

    #[error("cell {cell}: degenerate tetrahedron in volume decomposition")]
    DegenerateCell { cell: usize },

    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("unsupported element type {code} at line {line}")]
    UnsupportedElement { code: i32, line: usize },

    #[error("unmatched periodic face with centroid ({0:.6}, {1:.6}, {2:.6})", .centroid[0], .centroid[1], .centroid[2])]
    UnmatchedPeriodicFace { centroid: [f64; 3] },

    #[error("non-physical state: {context} ({component} = {value:.6e})")]
    NonPhysical {
        context: &'static str,
        component: &'static str,
        value: f64,
    },

    #[error("flux evaluation failed at face {face}: {source}")]
    FluxAtFace {
        face: usize,
        #[source]
        source: Box<CgksError>,
    },

    #[error("step aborted at t = {time:.6e}: non-physical average in cell {cell}")]
    StepAbort { cell: usize, time: f64 },

    #[error("boundary patch '{0}' has no boundary condition assigned")]
    UnboundPatch(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Invalid(String),
}
