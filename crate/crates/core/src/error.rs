use thiserror::Error;

/// Errors raised anywhere in the curve / period / theta / inversion pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // semigroup
    #[error("empty generator list")]
    EmptyGenerators,
    #[error("generator must be positive")]
    ZeroGenerator,
    #[error("generators have gcd {0} != 1, complement is infinite")]
    NotCofinite(u64),
    #[error("operation undefined for the genus-0 semigroup")]
    DegenerateGenusZero,

    // curve
    #[error("invalid curve spec: {0}")]
    InvalidSpec(String),
    #[error("deg A_{i} has a term x^{j} above the bound {bound}")]
    DegreeBoundViolated { i: usize, j: usize, bound: usize },
    #[error("m = {m} and n = {n} are not coprime")]
    NotCoprime { m: u64, n: u64 },
    #[error("leading coefficient of A_m is {0}, expected 1")]
    NotNormalized(String),
    #[error("valuation min rule contradicted numerically (caller must simplify)")]
    CancellationDetected,
    #[error("no regular function of weight {0} found")]
    BasisGapUnfillable(u64),
    #[error("denominator search exhausted the weight budget")]
    DenominatorSearchExhausted,
    #[error("function has a pole at the requested point")]
    PoleAtPoint,
    #[error("x0 lies within {distance:e} of branch point {index}")]
    NearBranchPoint { index: usize, distance: f64 },
    #[error("operation requires a cyclic curve")]
    NotCyclic,
    #[error("sheet {sheet} out of range for a {r}-sheeted cover")]
    BadSheet { sheet: u32, r: u32 },

    // fs_mu
    #[error("FS determinant {det:e} below the degeneracy threshold {threshold:e}")]
    DegenerateDivisor { det: f64, threshold: f64 },
    #[error("expected {expected} points, got {got}")]
    WrongPointCount { expected: usize, got: usize },
    #[error("basis has {have} elements, level {need} requested")]
    BasisTooShort { have: usize, need: usize },

    // riemann_theta
    #[error("tau is not a Riemann matrix: {0}")]
    NotRiemannMatrix(String),
    #[error("theta truncation radius {radius} exceeds the cap {cap}")]
    TruncationBudgetExceeded { radius: f64, cap: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    // periods_abel
    #[error("path passes within the branch clearance of branch point {0}")]
    BranchClearanceViolated(usize),
    #[error("harvested cycles do not span homology: {0}")]
    RankDeficientHomology(String),
    #[error("adaptive quadrature did not reach {tol:e} (estimate {estimate:e})")]
    QuadratureBudgetExceeded { tol: f64, estimate: f64 },
    #[error("tau symmetry residual {0:e} too large")]
    TauNotSymmetric(f64),
    #[error("path end does not match the requested point: {0}")]
    PathCrossesBranchCut(String),
    #[error("Riemann constant candidate rejected: {0}")]
    VanishingTestFailed(String),
    #[error("characteristic search skipped for genus {0} (enable the large search explicitly)")]
    CharacteristicSearchSkipped(usize),

    // inversion
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("divisor is special (|psi_k| = {0:e})")]
    SpecialDivisor(f64),
    #[error("theta denominator derivative vanishes ({0:e})")]
    ThetaDenominatorVanishes(f64),
    #[error("stratum level k = {k} must satisfy 1 <= i <= k < g = {g} (i = {i})")]
    StratumOutOfRange { k: usize, i: usize, g: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),

    // io
    #[error("config error at line {line}, key `{key}`: {msg}")]
    Config { line: usize, key: String, msg: String },
    #[error("period file format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("shape mismatch: file has genus {found}, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
