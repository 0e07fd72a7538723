use thiserror::Error;

/// Errors surfaced by the convex-analysis and solver layers.
#[derive(Debug, Error)]
pub enum OrliczError {
    #[error("conjugate maximizer hit the sample-grid boundary at eta = {eta:.6e}; enlarge xi_max (currently {xi_max:.3e})")]
    GridTooCoarse { eta: f64, xi_max: f64 },

    #[error("convex envelope unsupported for dimension {0} (only d <= 2)")]
    DimensionUnsupported(usize),

    #[error("sampled M(y,xi) = 0 for xi != 0 at x = ({0:.4}, {1:.4}); not an N-function")]
    DegeneratePair(f64, f64),

    #[error("cannot cover the domain with cubes of half-edge delta = {0}")]
    CoveringFailure(f64),

    #[error("minorant slope not finite on the grid interior near s = {0:.4e}")]
    NonIntegrable(f64),

    #[error("bad operator parameters: {0}")]
    BadParameters(String),

    #[error("regularizer does not grow essentially more rapidly than the governing modular function (tail ratio {0:.3e})")]
    GrowthMismatch(f64),

    #[error("|A(x,xi)| = {0:.3e} exceeds the validated conjugate range {1:.3e}")]
    ConjugateRangeExceeded(f64, f64),

    #[error("Luxemburg bisection bracket [{0:.1e}, {1:.1e}] failed: modular stays above 1")]
    Unbounded(f64, f64),

    #[error("cutoff support invalid: tau + r = {0} must be < T = {1}")]
    BadSupport(f64, f64),

    #[error("mollifier radius delta = {0} must be < R/4 = {1}")]
    DeltaTooLarge(f64, f64),

    #[error("nonlinear solve did not converge at step {step}: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence {
        step: usize,
        residual: f64,
        iterations: usize,
    },

    #[error("test function violates support conditions: {0}")]
    BadTestFunction(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, OrliczError>;
