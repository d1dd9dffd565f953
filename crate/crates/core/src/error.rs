use thiserror::Error;

/// Errors produced by the numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shooting bracket not found within iteration budget (last height {last_height:e})")]
    NonConvergence { last_height: f64 },
    #[error("supercritical exponent: n = {n} >= 3 and p = {p} >= (n+2)/(n-2) = {critical}; no ground state exists")]
    SupercriticalExponent { n: usize, p: f64, critical: f64 },
    #[error("point at distance {dist:e} lies outside the tube of radius {eps:e}")]
    OutOfTube { dist: f64, eps: f64 },
    #[error("eigenvalue {value:e} of the linearized radial operator is within {tol:e} of zero (mode {mode}, index {index})")]
    DegenerateSpectrum {
        mode: usize,
        index: usize,
        value: f64,
        tol: f64,
    },
    #[error("unsupported manifold family: {0}")]
    UnsupportedFamily(String),
    #[error("requested value {requested:e} exceeds the computed spectral range {available:e}; request more eigenvalues")]
    RangeExceeded { requested: f64, available: f64 },
    #[error("degenerate tangent |Y'| = {speed:e} at sample {index}")]
    DegenerateTangent { index: usize, speed: f64 },
    #[error("curve is not closed: endpoint gap {gap:e} exceeds tolerance {tol:e}")]
    NonClosedCurve { gap: f64, tol: f64 },
    #[error("normal bundle twist (holonomy matrix far from a single rotation) is unsupported for fiber dimension {n}")]
    TwistedNormalBundle { n: usize },
    #[error("tube too wide: metric determinant {det:e} at (t index {it}, z index {iz}) below positivity threshold")]
    TubeTooWide { it: usize, iz: usize, det: f64 },
    #[error("singular metric on the tube grid (det = {det:e})")]
    SingularMetric { det: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("on resonance: lattice value {value:e} within tolerance {tol:e} of zero")]
    OnResonance { value: f64, tol: f64 },
    #[error("admissible window ({left:e}, {right:e}] fully excluded; N too small for the local resonance density")]
    EmptyWindow { left: f64, right: f64 },
    #[error("eigenvalue branch not trackable across eps = {eps:e} (best overlap {overlap:e})")]
    BranchCrossing { eps: f64, overlap: f64 },
    #[error("fiber operator singular at t index {it} (pivot {pivot:e})")]
    SingularFiberOperator { it: usize, pivot: f64 },
    #[error("pointwise bound |v| <= u_bar/2 violated at iteration {iter} (max ratio {ratio:e})")]
    PointwiseBoundViolated { iter: usize, ratio: f64 },
    #[error("state not positive in the interior (min value {min:e} at (t index {it}, z index {iz}))")]
    NonpositiveState { it: usize, iz: usize, min: f64 },
    #[error("eigenvalue {nu:e} above the decomposition threshold {threshold:e}")]
    ThresholdExceeded { nu: f64, threshold: f64 },
    #[error("Picard iterate left the ball of radius eps^M = {radius:e} (norm {norm:e} at step {iter})")]
    LeftBall { iter: usize, norm: f64, radius: f64 },
    #[error("no contraction: factor {factor:e} at step {iter} within budget {budget}")]
    NoContraction {
        iter: usize,
        factor: f64,
        budget: usize,
    },
    #[error("parameter contract violated: (c1)/(c2) give the empty interval ({lo:e}, {hi:e}) for i={i}, N={n_gap}, N0={n0}, p={p}; M={m}")]
    ParameterContractViolated {
        i: usize,
        n_gap: usize,
        n0: usize,
        p: f64,
        m: f64,
        lo: f64,
        hi: f64,
    },
    #[error("field has nonzero Dirichlet trace (max |u| = {max_trace:e} on the boundary)")]
    NonzeroTrace { max_trace: f64 },
    #[error("field is identically zero")]
    ZeroField,
    #[error("subcritical input: nonexistence theorem requires n >= 3 and p > (n+2)/(n-2), got n = {n}, p = {p}")]
    SubcriticalInput { n: usize, p: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("eigensolver failed to converge: {0}")]
    EigenNonConvergence(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
