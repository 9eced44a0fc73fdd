use num_complex::Complex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("x-mode {mode} outside window [{min}, {max}]")]
    WindowOverflow { mode: i32, min: i32, max: i32 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("coefficient ({nu},{mu}) lies outside the truncation window")]
    Undecidable { nu: usize, mu: usize },

    #[error("germ is not of type ({n},{m}): entry ({nu},{mu}) is nonzero")]
    TypeViolation { n: usize, m: usize, nu: usize, mu: usize },

    #[error("obstruction {kind}_({n},{m}) = {class}")]
    Obstructed { kind: char, n: usize, m: usize, class: Complex<f64> },

    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid germ: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("{0}")]
    Usage(String),

    #[error("internal: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
