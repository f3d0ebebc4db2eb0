use num_complex::Complex64;

/// Error type shared by all modules of the crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Geometry parameters violate their invariants.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Adaptive quadrature exhausted its refinement budget. Carries the best
    /// estimate obtained so far together with the error bound it could reach.
    #[error("quadrature did not converge after {refinements} refinements (best estimate {estimate}, error bound {error_bound:.3e})")]
    Convergence {
        estimate: Complex64,
        error_bound: f64,
        refinements: usize,
    },

    /// A mode-projection integral failed at a specific transverse wavenumber.
    #[error("mode decomposition failed at k_t = {k_t:.6e} 1/m: {source}")]
    ModeNode {
        k_t: f64,
        #[source]
        source: Box<Error>,
    },

    /// The maximizer landed on the search-interval boundary.
    #[error("maximum at search boundary u = {u:.6}; not an interior optimum")]
    BoundaryMaximum { u: f64 },

    /// Least-squares iteration exceeded its iteration cap.
    #[error("fit did not converge within {0} iterations")]
    FitNonConvergence(usize),

    /// Input data violates a precondition (bad spectrum file, too few points, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
