//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building states, parsing configs, or
/// propagating them.
#[derive(Debug, Error)]
pub enum Error {
    /// Amplitude pair whose norm is too far from one to accept as a state.
    #[error("state norm² = {norm_sqr} deviates from 1 by more than {tol}")]
    NotNormalized { norm_sqr: f64, tol: f64 },

    /// Bloch vector outside the unit ball.
    #[error("Bloch vector outside the unit ball: |b|² = {norm_sqr}")]
    BlochOutsideBall { norm_sqr: f64 },

    /// Density matrix whose trace is not one.
    #[error("density-matrix trace = {trace} deviates from 1 by more than {tol}")]
    BadTrace { trace: f64, tol: f64 },

    /// Density matrix with more coherence than its populations allow.
    #[error("density-matrix positivity violated: |rho_LR|² = {coherence_sqr} > rho_LL·rho_RR = {population_product}")]
    NotPositive {
        coherence_sqr: f64,
        population_product: f64,
    },

    /// Mixture weights that do not form a probability distribution.
    #[error("mixture weights (p_L = {p_l}, p_R = {p_r}) must be non-negative and sum to 1")]
    BadWeights { p_l: f64, p_r: f64 },

    /// Parameter constraint violation (message names the offending field).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Propagation requested over a negative or non-finite time.
    #[error("invalid time span: {0}")]
    BadTimeSpan(f64),

    /// Deterministic propagation lost more norm than round-off can explain.
    #[error("norm drift {drift:e} exceeded {limit:e} at t = {t}")]
    NormDrift { drift: f64, limit: f64, t: f64 },

    /// Stochastic step drove the state into the numerical null vector.
    #[error("norm collapse in stochastic step: |a|² = {norm_sqr:e}")]
    NormCollapse { norm_sqr: f64 },

    /// More trajectories aborted than the ensemble tolerates (0.1 %).
    #[error("{aborted} of {total} trajectories aborted (first indices: {first:?})")]
    TooManyAborts {
        aborted: usize,
        total: usize,
        first: Vec<usize>,
    },

    /// Two series that must share a time grid do not.
    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    /// Config text that does not parse or violates a constraint.
    #[error("config error: {0}")]
    Config(String),

    /// Unknown preset name.
    #[error("unknown preset {0:?} (try `list-presets`)")]
    UnknownPreset(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors the caller caused (bad configuration or state
    /// construction) as opposed to runtime/numerical failures. The CLI maps
    /// usage errors to exit code 1 and everything else to exit code 2.
    pub fn is_usage_error(&self) -> bool {
        match self {
            Self::NotNormalized { .. }
            | Self::BlochOutsideBall { .. }
            | Self::BadTrace { .. }
            | Self::NotPositive { .. }
            | Self::BadWeights { .. }
            | Self::InvalidParameter(_)
            | Self::BadTimeSpan(_)
            | Self::Config(_)
            | Self::UnknownPreset(_) => true,
            Self::NormDrift { .. }
            | Self::NormCollapse { .. }
            | Self::TooManyAborts { .. }
            | Self::GridMismatch(_)
            | Self::Io(_) => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
