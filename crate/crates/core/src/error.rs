use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("leg index {0} out of range 1..=3")]
    LegIndex(usize),

    /// One of the interpolated coefficients of degree 29..32 did not vanish.
    #[error("degree collapse failed: |h_{degree}| = {ratio:.3e} of max coefficient")]
    CollapseFailure { degree: usize, ratio: f64 },

    #[error("determinant of the elimination matrix vanishes identically")]
    SingularGeometry,

    #[error("root finder did not converge (worst residual {residual:.3e})")]
    NonConvergence { residual: f64 },

    #[error("complex root {re} + {im}i has no conjugate partner")]
    UnpairedComplexRoot { re: f64, im: f64 },

    /// First component of the null vector vanishes: some half-angle equals π.
    #[error("root at infinity in the half-angle tangents at sigma = {sigma}")]
    RootAtInfinity { sigma: f64 },

    #[error("null space of the elimination matrix is not one-dimensional at sigma = {sigma}")]
    AmbiguousNullSpace { sigma: f64 },

    #[error("Newton refinement diverged")]
    RefinementDiverged,

    #[error("odd coefficient h_{degree} = {ratio:.3e} of max coefficient in a type-II instance")]
    OddCoefficientLeak { degree: usize, ratio: f64 },

    #[error("not supported: {0}")]
    NotSupported(String),
}
