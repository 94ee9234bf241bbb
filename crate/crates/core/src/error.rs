use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("extreme or over-extreme black hole: a = {a} >= M = {mass}")]
    Extreme { mass: f64, a: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("radius {r} is closer to the event horizon than the guard {guard}")]
    HorizonProximity { r: f64, guard: f64 },
    #[error("parity mismatch: k - s = {0} is not an integer")]
    Parity(f64),
    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),
    #[error("angular eigenvector {n} is nearly self-orthogonal (|vᵀv - 1| large, |vᵀv| = {vtv:e}); Jordan chains are not supported")]
    NearDegenerate { n: usize, vtv: f64 },
    #[error("frequency {omega} is outside the admissible half-plane: {reason}")]
    OutsideDomain { omega: Complex64, reason: String },
    #[error("chart range exceeded at u = {0}")]
    ChartRange(f64),
    #[error("Wronskian |w| = {w_abs:e} below threshold at omega = {omega}")]
    NearResonance { omega: Complex64, w_abs: f64 },
    #[error("Wronskian spread {spread:e} exceeds tolerance {tol:e}")]
    WronskianSpread { spread: f64, tol: f64 },
    #[error("integration step failure at u = {at}: {reason}")]
    StepFailure { at: f64, reason: String },
    #[error("potential has several local maxima (found {0})")]
    MultipleMaxima(usize),
    #[error("parameters outside the regime covered by the classification: {0}")]
    OutOfRegime(String),
    #[error("|V| = {v_abs:e} below floor at u = {u}: turning point")]
    TurningPoint { u: f64, v_abs: f64 },
    #[error("state support reaches the grid edge (amplitude {0:e})")]
    SupportAtEdge(f64),
    #[error("tail monitor {name} = {value:e} exceeds budget {budget:e}")]
    TailBudget { name: String, value: f64, budget: f64 },
    #[error("instability: norm grew by factor {factor:.3e} at t = {t}")]
    Instability { t: f64, factor: f64 },
    #[error("sequence does not converge: {0}")]
    DivergentSequence(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}
