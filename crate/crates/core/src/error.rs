use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors across the enumeration, spectrum, and estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("word reduces to the identity and has no conjugacy class")]
    IdentityWord,

    #[error("projected class count {projected} exceeds the enumeration budget {budget}")]
    CutoffTooLarge { projected: u128, budget: u128 },

    #[error("rank {0} outside the supported range 2..=26")]
    BadRank(usize),

    #[error("matrix entries exceed 1e280 while evaluating `{word}`; use the rescaled projection path")]
    Overflow { word: String },

    #[error("class `{word}` is not loxodromic for `{label}`: eigenvalue gap {gap:.3e} <= tolerance {tol:.1e}")]
    NotLoxodromic { label: String, word: String, gap: f64, tol: f64 },

    #[error("axis angle {0} too close to 0 or pi")]
    DegenerateAxes(f64),

    #[error("invalid representation `{label}`: {reason}")]
    InvalidRepresentation { label: String, reason: String },

    #[error("pilot loxodromy validation failed for `{label}` ({failures} non-loxodromic classes of {sampled}); pass force to proceed")]
    PilotValidationFailed { label: String, failures: usize, sampled: usize },

    #[error("only {items} items inside the estimation window [{lo:.3}, {hi:.3}] (need {need})")]
    InsufficientData { items: usize, need: usize, lo: f64, hi: f64 },

    #[error("estimation window degenerate: {0}")]
    WindowDegenerate(String),

    #[error("mixed spectrum has a non-positive value {0:.3e}")]
    NonPositiveMix(f64),

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("length spectra are proportional (kappa = {kappa:.12}, max deviation {dev:.3e}); correlation is undefined")]
    ProportionalSpectra { kappa: f64, dev: f64 },

    #[error("endpoint fit unstable: rms residual {rms:.3e} exceeds {limit:.3e}")]
    EndpointFitUnstable { rms: f64, limit: f64 },

    #[error("target tangent slope {target:.4} outside sampled slope range [{lo:.4}, {hi:.4}]")]
    SlopeNotBracketed { target: f64, lo: f64, hi: f64 },

    #[error("mixed-growth objective flat: total variation {tv:.3e} < {floor:.3e}")]
    FlatObjective { tv: f64, floor: f64 },

    #[error("fewer than {need} count windows are nonempty ({got})")]
    EmptyWindows { got: usize, need: usize },

    #[error("CSV parse error at line {line}: {reason}")]
    CsvParse { line: usize, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
