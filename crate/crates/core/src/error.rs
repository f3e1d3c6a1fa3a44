use thiserror::Error;

/// Errors produced by the super-resolution toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty support")]
    EmptySupport,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no super-resolution regime: N = {n_grid} must exceed 2fc+1 = {n_samples}")]
    NoSuperResolution { n_grid: usize, n_samples: usize },

    #[error("kernel requires even cutoff (got fc = {0})")]
    OddCutoff(usize),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("separation too small: interpolation system is singular or ill-conditioned (condition estimate {condition:.3e})")]
    SeparationTooSmall { condition: f64 },

    #[error("solver did not converge after {iterations} iterations (primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e})")]
    NonConvergence {
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
    },

    #[error("dual solution carries no support information (degenerate dual polynomial)")]
    Degenerate,

    #[error("rank-deficient support: {0}; increase the duplicate-merge tolerance")]
    RankDeficient(String),

    #[error("vector is not in the null space of the partial Fourier operator (relative residual {0:.3e})")]
    NotInNullSpace(f64),

    #[error("constant not established for SRF = {0} (requires SRF >= 3.03)")]
    ConstantNotEstablished(f64),

    #[error("infeasible packing: cannot place {k} points with separation {separation} on a grid of {n_grid}")]
    InfeasiblePacking {
        k: usize,
        separation: usize,
        n_grid: usize,
    },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("i/o format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
