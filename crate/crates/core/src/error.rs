use std::fmt;

use thiserror::Error;

/// Why an amplitude does not carry a positive solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InadmissibleReason {
    NonPositiveAmplitude,
    /// `f(alpha) = 0`: the amplitude is a rest point of the energy dynamics.
    RestPoint,
    /// `f(alpha) < 0`: the solution would leave `alpha` upwards.
    NegativeSource,
    /// Some `u` in `(0, alpha)` has `F(u) >= F(alpha)`.
    EnergyBarrier,
    /// `F(alpha) = F(0)` and the endpoint singularity is not integrable.
    NonIntegrableBoundary,
}

impl InadmissibleReason {
    pub fn as_str(self) -> &'static str {
        match self {
            InadmissibleReason::NonPositiveAmplitude => "alpha <= 0",
            InadmissibleReason::RestPoint => "f(alpha)=0",
            InadmissibleReason::NegativeSource => "f(alpha)<0",
            InadmissibleReason::EnergyBarrier => "F(alpha) < sup F on (0,alpha)",
            InadmissibleReason::NonIntegrableBoundary => {
                "F(alpha)=F(0) with a non-integrable endpoint singularity"
            }
        }
    }
}

impl fmt::Display for InadmissibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponent p must satisfy p > 1, got {0}")]
    InvalidExponent(f64),
    #[error("phi'(0) diverges for p = {0} < 2")]
    PhiPrimeDomain(f64),
    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),
    #[error("scan bound u_max = {u_max} must exceed gamma = {gamma}")]
    ScanWindow { gamma: f64, u_max: f64 },
    #[error("bracket [{lo}, {hi}] must lie in [gamma, inf) with lo < hi")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("F has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("quadrature did not converge: last change {change:e} after {levels} levels")]
    QuadratureNonConvergence { change: f64, levels: usize },
    #[error("integrand is not finite at x = {0:e}")]
    NonFiniteIntegrand(f64),
    #[error("amplitude {alpha} is inadmissible: {reason}")]
    Inadmissible {
        alpha: f64,
        reason: InadmissibleReason,
    },
    #[error("finite-difference stencil around alpha = {alpha} leaves the admissible set")]
    StencilInadmissible { alpha: f64 },
    #[error("profile grid needs at least 16 points, got {0}")]
    GridTooSmall(usize),
    #[error("startup step h0 = {0} must lie in (0, 1e-4]")]
    InvalidStartupStep(f64),
    #[error("f(alpha) = {0} <= 0: no decreasing solution starts at this amplitude")]
    NonPositiveSource(f64),
    #[error("u did not reach zero before x = {cap}")]
    NoCrossing { cap: f64 },
    #[error("step size underflow at x = {x}")]
    StepFailure { x: f64 },
    #[error("profile grid too coarse: interpolation mismatch {mismatch:e} exceeds {limit:e}")]
    GridTooCoarse { mismatch: f64, limit: f64 },
    #[error("profile slope vanishes at x = {0}; linearized equation is degenerate there")]
    DegenerateProfile(f64),
    #[error("alpha = {alpha} must exceed gamma = {gamma} for the crossing point to exist")]
    AlphaNotAboveGamma { alpha: f64, gamma: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
