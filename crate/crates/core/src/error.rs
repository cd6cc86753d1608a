use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter or argument is outside its valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects that must share a grid (or shape) do not.
    #[error("usage error: {0}")]
    Usage(String),

    /// The phase window does not contain the state; `lost_norm` is the
    /// fraction of the norm found in the outermost strips of the window.
    #[error("phase window too small: {lost_norm:.3e} of the norm lies at the window edge (limit {limit:.1e})")]
    WindowTooSmall { lost_norm: f64, limit: f64 },

    /// A computed mode does not decay before the hard walls of its window.
    #[error("mode {mode} not confined: edge amplitude ratio {edge_ratio:.3e} exceeds {limit:.1e}; enlarge the window")]
    NotConfined {
        mode: usize,
        edge_ratio: f64,
        limit: f64,
    },

    #[error("eigensolver failed{}: {reason}", match .kappa_index { Some(i) => format!(" at kappa index {i}"), None => String::new() })]
    Numeric {
        kappa_index: Option<usize>,
        reason: String,
    },

    /// The retained modes do not capture enough of the initial state.
    #[error("mode capture {capture:.8} below threshold {threshold:.8} (deficit {deficit:.3e})")]
    CaptureBelowThreshold {
        capture: f64,
        threshold: f64,
        deficit: f64,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
