use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument fell outside its admissible interval.
    #[error("{name} = {value} is outside the admissible range {range}")]
    Range {
        name: &'static str,
        value: f64,
        range: String,
    },

    /// The eigenvalue search could not bracket the requested index.
    #[error(
        "no bracket for eigenvalue k = {k} in lambda range [{lo}, {hi}] \
         (node counts observed: {count_lo} .. {count_hi})"
    )]
    SearchRange {
        k: usize,
        lo: f64,
        hi: f64,
        count_lo: usize,
        count_hi: usize,
    },

    /// The adaptive integrator could not make progress.
    #[error("integration stalled at x = {x} (lambda = {lambda}, step = {step:e}, steps taken = {steps})")]
    Stiffness {
        x: f64,
        lambda: f64,
        step: f64,
        steps: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigenvalue {k} is degenerate (spectral gap {gap:e} below {threshold:e})")]
    Degenerate { k: usize, gap: f64, threshold: f64 },

    #[error("invalid bracket: f({lo}) = {f_lo}, f({hi}) = {f_hi}, target {target}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        target: f64,
    },

    #[error("parameter ladder exhausted: {0}")]
    LadderExhausted(String),
}

pub(crate) fn range_err(name: &'static str, value: f64, range: impl Into<String>) -> Error {
    Error::Range {
        name,
        value,
        range: range.into(),
    }
}
