use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = 2 is not supported")]
    EvenPrime,
    #[error("a group needs at least one cyclic factor")]
    EmptyExponents,
    #[error("cyclic factor exponents must be positive")]
    ZeroExponent,
    #[error("{p}^{exponent} exceeds the supported modulus range")]
    ModulusTooLarge { p: u64, exponent: u32 },
    #[error("index {index} out of range for a group of order {order}")]
    IndexOutOfRange { index: u64, order: u64 },
    #[error("coordinate {coord} out of range at position {position}")]
    CoordinateOutOfRange { position: usize, coord: u64 },
    #[error("element has {got} coordinates, group has rank {rank}")]
    RankMismatch { got: usize, rank: usize },
    #[error("{i}! is not invertible modulo powers of {p}")]
    FactorialNotInvertible { i: u64, p: u64 },
    #[error("map is not additive: generator {generator} image has order exceeding its generator")]
    NotAdditive { generator: usize },
    #[error("not a brace: {reason} (witness {witness:?})")]
    NotABrace { reason: String, witness: Vec<Vec<u64>> },
    #[error("carrier of order {order} is too large to enumerate (limit {limit})")]
    IntractableClosure { order: u64, limit: u64 },
    #[error("representative dependence detected: {0}")]
    RepresentativeDependence(String),
    #[error("section dependence detected: {0}")]
    SectionDependence(String),
    #[error("depth-zero descent: floor((p-1)/4) = 0 for p = {0}")]
    DepthZero(u64),
    #[error("element is outside p^{k}A")]
    OutsidePowerSubgroup { k: u32 },
    #[error("group-of-flows iteration did not converge within {steps} steps")]
    FlowsDivergence { steps: usize },
    #[error("nilpotency class {class} is not below p = {p}")]
    ClassBound { class: usize, p: u64 },
    #[error("mismatched primes {0} and {1}")]
    MismatchedPrime(u64, u64),
    #[error("invalid parameters: {0}")]
    InvalidArgument(String),
    #[error("invalid document: {0}")]
    Document(String),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
