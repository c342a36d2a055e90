use thiserror::Error;

/// Errors produced by the geometry, function and energy layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An address digit outside `1..=5`, or an address too long to encode.
    #[error("invalid address: {0}")]
    InvalidAddress(String),

    /// A numeric argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The number of supplied values does not match the target lattice.
    #[error("shape mismatch: expected {expected} values, found {found}")]
    Shape { expected: usize, found: usize },

    /// A level below the level of the input object.
    #[error("level {requested} is below the minimum level {minimum}")]
    Level { requested: u32, minimum: u32 },

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("vertices {0} and {1} are not adjacent")]
    Adjacency(usize, usize),

    /// A region descriptor that is not geodesically convex.
    #[error("region error: {0}")]
    Region(String),

    /// The working level cannot resolve the requested radius or region.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// The request exceeds the configured level cap or memory budget.
    #[error("resource error: {0}")]
    Resource(String),

    #[error("unsupported representation: {0}")]
    Representation(String),

    /// Exact arithmetic cannot represent `|x|^p` for a non-integer `p`.
    #[error("exponent {0} is not supported by this scalar type")]
    UnsupportedExponent(f64),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
