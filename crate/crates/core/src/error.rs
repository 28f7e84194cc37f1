use thiserror::Error;

/// Every failure the engine reports. Check outcomes (a square that does not
/// commute, a rule an algebra violates) are report content, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate parameter label `{label}`")]
    DuplicateLabel { label: String },
    #[error("arity {arity} is declared with no parameter labels")]
    EmptyArity { arity: usize },
    #[error("unknown operation label `{0}`")]
    UnknownLabel(String),
    #[error("operation `{label}` has arity {expected}, got {got} arguments")]
    ArityMismatch {
        label: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("empty carrier")]
    EmptyCarrier,
    #[error("operation table for `{label}` is not total: {detail}")]
    IncompleteTable { label: String, detail: String },
    #[error("signature mismatch")]
    SignatureMismatch,
    #[error("map is not total: no image for `{0}`")]
    PartialMap(String),
    #[error("product of an empty sequence of algebras")]
    EmptyProduct,
    #[error("malformed rewrite rule: {0}")]
    BadRule(String),
    #[error("rewriting did not terminate within {fuel} steps")]
    FuelExhausted { fuel: u64 },
    #[error("rule mentions generator `{0}`, which has no interpretation in an algebra")]
    UninterpretedGenerator(String),
    #[error("invalid step function: {0}")]
    BadStepFn(String),
    #[error("point {0} lies outside [0,1)")]
    OutOfRange(String),
    #[error("bad interval [{a}, {b})")]
    BadInterval { a: String, b: String },
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(String),
    #[error("base function is not a valid center on [{a}, {b}): {detail}")]
    BadNeighborhoodBase { a: String, b: String, detail: String },
    #[error("invalid metric: {0}")]
    BadMetric(String),
    #[error("empty subspace")]
    EmptySubspace,
    #[error("maps are not composable: `{0}` has no image under the second map")]
    NotComposable(String),
    #[error("invalid topology: {0}")]
    BadTopology(String),
    #[error("map is not continuous: preimage of {0} is not open")]
    NotContinuous(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
