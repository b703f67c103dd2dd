use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("factorization breakdown: pivot {pivot:e} at row {row}")]
    Breakdown { row: usize, pivot: f64 },

    #[error("singular triangular factor: zero diagonal at row {row}")]
    SingularFactor { row: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("eigenvalue iteration did not converge after {sweeps} sweeps (subdiagonal norm {subdiag_norm:e})")]
    NoConvergence { sweeps: usize, subdiag_norm: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate diagonal: entry {index} is {value:e}")]
    DegenerateDiagonal { index: usize, value: f64 },

    #[error("row {row} of B has no nonzeros")]
    EmptyRow { row: usize },

    #[error("unsupported form: {0}")]
    Unsupported(String),

    #[error("assembly consistency check failed: {0}")]
    Assembly(String),

    #[error("condensed D is not positive semidefinite (smallest eigenvalue {lambda_min:e})")]
    CondensationSign { lambda_min: f64 },

    #[error("dimension {n} exceeds the dense limit {cap}; {hint}")]
    ScaleLimit { n: usize, cap: usize, hint: String },

    #[error("Krylov breakdown: {0}")]
    KrylovBreakdown(String),

    #[error("{block} block: {source}")]
    Inner {
        block: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn in_block(self, block: &'static str) -> Self {
        Error::Inner {
            block,
            source: Box::new(self),
        }
    }

    /// Labels an error with the pipeline stage (module) it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
