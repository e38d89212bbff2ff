use thiserror::Error;

/// Errors raised by measure construction, evaluation and the regularity tests.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative weight {weight} for atom at {location}")]
    NegativeWeight { location: f64, weight: f64 },

    #[error("negative or non-finite density coefficient on [{lo}, {hi}]")]
    NegativeDensity { lo: f64, hi: f64 },

    #[error("density supports [{first_lo}, {first_hi}] and [{second_lo}, {second_hi}] overlap")]
    OverlappingDensitySupports {
        first_lo: f64,
        first_hi: f64,
        second_lo: f64,
        second_hi: f64,
    },

    #[error("density exponent p = {p} is not locally integrable (need p > -1)")]
    NonIntegrableDensityExponent { p: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid rate function: {0}")]
    InvalidRate(String),

    #[error("rate functions are not comparable symbolically: {0}")]
    Incomparable(String),

    #[error("unsupported integrand: {0}")]
    UnsupportedIntegrand(String),

    #[error("argument {re} + {im}i is not in the open upper half-plane")]
    NonUpperHalfPlaneArgument { re: f64, im: f64 },

    #[error("measure has mass outside [-1, 1] (at {location})")]
    SupportViolation { location: f64 },

    #[error("no finite nontangential limit at {tau}")]
    NoFiniteLimit { tau: f64 },

    #[error("integrability of 1/|t - tau|^{exponent} is inconclusive")]
    Inconclusive { exponent: f64 },

    #[error("not regular to order {order}: inverse moment of index {moment} diverges")]
    NotRegularToOrder { order: usize, moment: usize },

    #[error("unsupported representation: {0}")]
    UnsupportedRep(String),

    #[error("degenerate arc at d = {d}: lambda(d) = {height}")]
    DegenerateArc { d: f64, height: f64 },

    #[error("rate function is not admissible as gamma: {0}")]
    GammaNotAdmissible(String),

    #[error("lambda is not o(t)")]
    LambdaNotLittleO,

    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("separation fails at n = {n}: log2 bound {log2_bound} < {n}")]
    AssertionFailure { n: usize, log2_bound: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_upper_half_plane(z: num_complex::Complex64) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonUpperHalfPlaneArgument { re: z.re, im: z.im })
    }
}
