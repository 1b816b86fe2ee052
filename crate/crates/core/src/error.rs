use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("coefficient array has length {found}, expected {expected}")]
    CoefficientLength { expected: usize, found: usize },

    #[error("non-finite coefficient at flat index {index}")]
    NonFinite { index: usize },

    #[error("function norm {norm:e} is not above the nonzero threshold {tol:e}")]
    NonzeroRequired { norm: f64, tol: f64 },

    #[error("grid half-width {half_width} is below the required {required} for degree {degree}")]
    GridTooNarrow {
        half_width: f64,
        required: f64,
        degree: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("operator is not Hermitian on this input: imaginary part {imag:e} exceeds {bound:e}")]
    NotHermitian { imag: f64, bound: f64 },

    #[error(
        "translation plan rejected for shift {shift:?} at source degree {source_degree}: \
         padded degree {padded_degree}, measured defect {defect:e} exceeds {tol:e}"
    )]
    PlanRejected {
        shift: Vec<f64>,
        source_degree: usize,
        padded_degree: usize,
        defect: f64,
        tol: f64,
    },

    #[error("degree {degree} too small for the Gaussian section at {center:?}: lost L2 mass fraction {mass_defect:e}")]
    SectionTruncation {
        center: Vec<f64>,
        degree: usize,
        mass_defect: f64,
    },

    #[error(
        "fiber is not in the zero-expectation subspace: |Q(g)| = {expectation:e} exceeds {tol:e}"
    )]
    NotInFiber { expectation: f64, tol: f64 },

    #[error("direction is not tangent to the fiber: |DQ(g0)(g)| = {value:e} exceeds {tol:e}")]
    DirectionNotTangent { value: f64, tol: f64 },

    #[error("shift {shift:?} exceeds the configured maximum |x| <= {max}")]
    ShiftOutOfRange { shift: Vec<f64>, max: f64 },

    #[error("sample outside chart {chart}: {detail}")]
    SampleOutsideChart { chart: usize, detail: String },

    #[error("point {point:?} is not in the overlap of charts {from} and {to}")]
    OutOfOverlap {
        from: usize,
        to: usize,
        point: Vec<f64>,
    },

    #[error("unknown chart index {0}")]
    UnknownChart(usize),

    #[error("invalid atlas: {0}")]
    InvalidAtlas(String),

    #[error(
        "tangent test needs at least 4 strictly decreasing t values in (0, 1] spanning two decades"
    )]
    InvalidTGrid,

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("check `{0}` does not support convergence sweeps")]
    UnsupportedSweep(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
