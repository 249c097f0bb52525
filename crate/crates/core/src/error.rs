use thiserror::Error;

use crate::model::Diagnostic;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("zero-offset spring connects node `{0}` to itself")]
    ZeroSelfSpring(String),
    #[error("spring references unknown node `{0}`")]
    UnknownNodeId(String),
    #[error("unknown built-in model `{0}` (expected one of: mono1d, chain2n, trichain3, penta2d)")]
    UnknownBuiltin(String),
    #[error("no spring label or node id named `{0}`")]
    UnknownConstantName(String),
    #[error("value for `{name}` must be nonnegative (masses positive), got {value}")]
    NegativeValue { name: String, value: f64 },
    #[error("model is invalid:\n{}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("Hermitian eigensolver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("reduced stiffness is indefinite: eigenvalue {eigenvalue:e} below -1e-9 * {norm:e}")]
    IndefiniteStiffness { eigenvalue: f64, norm: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("path needs at least 2 vertices and 2 samples per segment")]
    InvalidPath,
    #[error("path segment {0} starts and ends at the same wavevector")]
    DegenerateSegment(usize),
    #[error("wavevector has {found} components, model dimension is {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grid resolution {0} is below the minimum of 16")]
    ResolutionTooLow(usize),
    #[error("band {band} out of range (model has {bands} bands)")]
    BandOutOfRange { band: usize, bands: usize },
    #[error("at mu = {mu:?}: {source}")]
    Eigen {
        mu: Vec<f64>,
        #[source]
        source: EigenError,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("supercell needs at least one cell per direction and {expected} directions")]
    BadCells { expected: usize },
    #[error("supercell has {supercell} frequencies but Bloch sampling produced {bloch}")]
    SizeMismatch { supercell: usize, bloch: usize },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error(
        "combined-cell assembly needs a 1-D single-node chain with springs at offsets 1 and 2 only"
    )]
    NotTwoNeighborChain,
}
