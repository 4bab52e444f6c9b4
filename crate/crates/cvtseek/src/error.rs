use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point too close to the origin has no radial projection onto the sphere.
    #[error("degenerate point: norm {norm:.3e} too small to project")]
    DegeneratePoint { norm: f64 },

    /// A Voronoi cell received no mesh points; the caller must re-seed its generator.
    #[error("empty cell for generator {cell}")]
    EmptyCell { cell: usize },

    /// Robot positions whose second moment is singular or too ill-conditioned to invert.
    #[error("degenerate formation: {0}")]
    DegenerateFormation(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),

    #[error("scenario parse failure: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
