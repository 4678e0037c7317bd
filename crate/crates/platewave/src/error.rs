use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A Fourier mode sits on a cutoff (|alpha_n| = kappa), where the
    /// propagation constant vanishes and the mode expansion degenerates.
    #[error("cutoff configuration: |alpha_{n}| = kappa within tolerance (Wood anomaly)")]
    CutoffMode { n: i32 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("mesh generation failed to reach quality floor: {0}")]
    MeshConvergence(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),

    #[error("non-manifold edge ({a},{b}): {count} adjacent triangles")]
    NonManifoldEdge { a: usize, b: usize, count: usize },

    #[error("singular pivot at row {row} of the factorization")]
    SingularPivot { row: usize },

    #[error("solver residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualFailure { residual: f64, tol: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
