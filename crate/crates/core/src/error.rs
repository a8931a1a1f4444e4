use thiserror::Error;

/// Everything that can go wrong across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("modulus {0} is reducible over Z_p")]
    ReducibleModulus(String),
    #[error("field of order {q} exceeds the supported maximum {max}")]
    FieldTooLarge { q: u64, max: u64 },
    #[error("ambient of {size} points exceeds the memory budget of {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("division by zero in F_q")]
    ZeroInverse,
    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("invalid exponent p = {0}: need p >= 1")]
    InvalidExponent(f64),
    #[error("need at least {needed} points, set has {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("recipe syntax error at byte {pos}: {msg}")]
    RecipeSyntax { pos: usize, msg: String },
    #[error("set is not a Sidon set: {0}")]
    NotSidon(String),
    #[error("requires odd characteristic, field has q = {0}")]
    EvenField(u32),
    #[error("exponents are not Hölder conjugates: sum of reciprocals is {0}")]
    NotConjugate(f64),
    #[error("no affine line inside a sphere of nonzero radius was found")]
    NoLineFound,
    #[error("map is not injective; {0}")]
    NotInjective(String),
    #[error("empty grid")]
    EmptyGrid,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
