use thiserror::Error;

/// Errors reported by the solvers and constructors in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("arc-length quadrature did not converge (achieved residual {residual:.3e})")]
    Quadrature { residual: f64 },

    #[error("epsilon = {epsilon} is not admissible: epsilon * sup|k| = {product:.4} must stay below 1/2")]
    InadmissibleEpsilon { epsilon: f64, product: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("poisson solve did not reach tolerance (relative residual {residual:.3e} after {iterations} iterations)")]
    PoissonResidual { residual: f64, iterations: usize },

    #[error("eigensolver did not converge: residual norms {residuals:?}")]
    EigenNonConvergence { residuals: Vec<f64> },

    #[error("singular block encountered while factorizing the shifted operator")]
    SingularBlock,

    #[error("grid mismatch: expected {expected} values, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("spectral gap bound unavailable: {0}")]
    GapUnavailable(String),

    #[error("kappa^2 = {kappa_sq} lies outside the admissible interval ({lower}, {upper})")]
    KappaOutsideWindow { kappa_sq: f64, lower: f64, upper: f64 },

    #[error("phase undefined: min |psi| on the boundary line is {min:.3e}, below 0.1 * max = {max:.3e}")]
    PhaseUndefined { min: f64, max: f64 },

    #[error("order-parameter overlap with the ansatz vanishes; phase alpha is undefined")]
    DegenerateOverlap,

    #[error("result is not converged")]
    NotConverged,

    #[error("the exact form does not decouple into Fourier fibers; use the reduced form")]
    ExactFormRejected,
}

pub type Result<T> = std::result::Result<T, Error>;
