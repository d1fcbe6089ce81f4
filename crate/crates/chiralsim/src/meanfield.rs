//! Deterministic mean-field dynamics of the interacting two-level system.
//!
//! In rescaled time `τ = ωt` the amplitudes obey the nonlinear pair
//!
//! ```text
//! da_L/dτ = −i(Ω + v|a_R|²) a_L + i a_R
//! da_R/dτ = −i(Ω + v|a_L|²) a_R + i a_L
//! ```
//!
//! where `Ω` is a common level shift (pure gauge: no observable depends on
//! it) and `v` is the chiral discrimination strength. The flow conserves the
//! norm and the mean-field energy `E = (v/4)Z² + X`, which makes the
//! self-trapping analysis exact: a state localized in `|R⟩` can only reach
//! `Z² ≥ 1 − 16/v²`, so for `|v| > 4` the population is dynamically trapped.
//!
//! Integration is classic fixed-step RK4 without renormalization; the norm
//! drift is monitored and a drift beyond [`NORM_DRIFT_LIMIT`] aborts the run
//! rather than silently returning garbage.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{StateSeries, TimeGrid};
use crate::types::{
    bloch_from_amplitudes, rho_from_bloch, DensityMatrix2, InitialState, ModelParams,
    StateAmplitudes,
};

/// Maximum tolerated drift of `|a_L|² + |a_R|²` away from 1 during a
/// deterministic run. RK4 at the recommended steps keeps the drift orders of
/// magnitude below this; hitting the limit means `dt` is far too coarse.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Time derivative of the amplitudes (dephasing-free part).
pub fn drift(p: &ModelParams, s: &StateAmplitudes) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let nl = s.a_l.norm_sqr();
    let nr = s.a_r.norm_sqr();
    (
        -i * (p.offset + p.v * nr) * s.a_l + i * s.a_r,
        -i * (p.offset + p.v * nl) * s.a_r + i * s.a_l,
    )
}

/// One RK4 step of size `dt` for the mean-field flow.
pub fn rk4_step(p: &ModelParams, s: &StateAmplitudes, dt: f64) -> StateAmplitudes {
    let stage = |base: &StateAmplitudes, k: &(Complex64, Complex64), w: f64| StateAmplitudes {
        a_l: base.a_l + w * dt * k.0,
        a_r: base.a_r + w * dt * k.1,
    };
    let k1 = drift(p, s);
    let k2 = drift(p, &stage(s, &k1, 0.5));
    let k3 = drift(p, &stage(s, &k2, 0.5));
    let k4 = drift(p, &stage(s, &k3, 1.0));
    StateAmplitudes {
        a_l: s.a_l + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        a_r: s.a_r + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    }
}

/// Mean-field energy `E = (v/4)Z² + X`, conserved along pure trajectories.
pub fn conserved_energy(p: &ModelParams, s: &StateAmplitudes) -> f64 {
    let c = s.coherence();
    let z = s.a_r.norm_sqr() - s.a_l.norm_sqr();
    0.25 * p.v * z * z + 2.0 * c.re
}

/// A pure trajectory sampled on a grid, kept in amplitude form.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    pub times: Vec<f64>,
    pub amps: Vec<StateAmplitudes>,
    /// Largest `| |a|² − 1 |` seen at any integration step.
    pub max_norm_drift: f64,
}

impl AmplitudeSeries {
    /// Density-matrix view of the trajectory. Amplitudes are renormalized at
    /// sampling so the trace is exactly 1; the integration state itself is
    /// untouched.
    pub fn to_states(&self) -> Result<StateSeries> {
        let rhos = self
            .amps
            .iter()
            .map(|a| rho_from_bloch(&bloch_from_amplitudes(&a.renormalized())?))
            .collect::<Result<Vec<_>>>()?;
        StateSeries::new(self.times.clone(), rhos)
    }
}

/// Integrates a pure state over `grid`, recording strided samples.
///
/// Fails with [`Error::NormDrift`] if the RK4 norm drift exceeds
/// [`NORM_DRIFT_LIMIT`]; a warning is logged up front when `dt` is coarse
/// relative to the fastest deterministic frequency.
pub fn propagate_amplitudes(
    p: &ModelParams,
    s0: &StateAmplitudes,
    grid: &TimeGrid,
) -> Result<AmplitudeSeries> {
    let p = p.validated()?;
    if p.gamma != 0.0 {
        return Err(Error::InvalidParameter(
            "the deterministic propagator requires Gamma = 0; use the stochastic engine \
             for dephasing"
                .into(),
        ));
    }
    let s0 = StateAmplitudes::new(s0.a_l, s0.a_r)?;
    let dt = grid.dt();
    let fast = 2.0 + p.offset.abs() + p.v.abs();
    if dt * fast > 0.05 {
        log::warn!(
            "dt = {dt} is coarse for |Omega| + |v| + 2 = {fast}; expect visible RK4 error"
        );
    }

    let n_samples = grid.n_samples();
    let mut times = Vec::with_capacity(n_samples);
    let mut amps = Vec::with_capacity(n_samples);
    let mut s = s0;
    let mut max_drift = 0.0f64;
    let mut record = |step: usize, s: &StateAmplitudes| {
        times.push(step as f64 * dt);
        amps.push(*s);
    };
    record(0, &s);
    for step in 1..=grid.n_steps() {
        s = rk4_step(&p, &s, dt);
        let drift_now = (s.norm_sqr() - 1.0).abs();
        if !drift_now.is_finite() || drift_now > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift {
                drift: drift_now,
                limit: NORM_DRIFT_LIMIT,
                t: step as f64 * dt,
            });
        }
        max_drift = max_drift.max(drift_now);
        if grid.is_sample(step) {
            record(step, &s);
        }
    }
    Ok(AmplitudeSeries {
        times,
        amps,
        max_norm_drift: max_drift,
    })
}

/// [`propagate_amplitudes`] followed by conversion to density matrices.
pub fn propagate_pure(
    p: &ModelParams,
    s0: &StateAmplitudes,
    grid: &TimeGrid,
) -> Result<StateSeries> {
    propagate_amplitudes(p, s0, grid)?.to_states()
}

/// Evolves the incoherent mixture `p_L|L⟩⟨L| + p_R|R⟩⟨R|` as a statistical
/// ensemble of two independent mean-field trajectories, one per preparation.
/// (The dynamics is nonlinear, so a mixture is a weighted bundle of pure
/// runs, not a solution of a linear master equation.)
pub fn propagate_mixed(p: &ModelParams, p_l: f64, p_r: f64, grid: &TimeGrid) -> Result<StateSeries> {
    InitialState::Mixed { p_l, p_r }.validated()?;
    let from_l = propagate_pure(p, &StateAmplitudes::localized_l(), grid)?;
    let from_r = propagate_pure(p, &StateAmplitudes::localized_r(), grid)?;
    let rhos = from_l
        .rhos
        .iter()
        .zip(&from_r.rhos)
        .map(|(a, b)| {
            DensityMatrix2::new(
                p_l * a.rho_ll + p_r * b.rho_ll,
                p_l * a.rho_rr + p_r * b.rho_rr,
                p_l * a.rho_lr + p_r * b.rho_lr,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    StateSeries::new(from_l.times, rhos)
}

/// Dispatches on the initial-state variant: pure states use
/// [`propagate_pure`], mixtures [`propagate_mixed`].
pub fn propagate(p: &ModelParams, init: &InitialState, grid: &TimeGrid) -> Result<StateSeries> {
    match init.validated()? {
        InitialState::Mixed { p_l, p_r } => propagate_mixed(p, p_l, p_r, grid),
        pure => propagate_pure(p, &pure.amplitudes().expect("pure variant"), grid),
    }
}

/// Long-time fate of a trajectory started fully localized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trapping {
    /// `|v| < 4`: the population oscillates all the way to the opposite well.
    Untrapped,
    /// `|v| = 4`: separatrix; the population creeps asymptotically to 1/2.
    Separatrix,
    /// `|v| > 4`: the initial well keeps a majority population forever.
    Trapped {
        /// Exact turning point `min_t ρ_RR(t) = (1 + √(1 − 16/v²))/2`.
        min_rho_rr: f64,
    },
}

/// Classifies self-trapping of the localized initial state from energy
/// conservation: starting at `Z = 1`, `E = v/4`, and the reachable band
/// `|E − (v/4)Z²| ≤ √(1 − Z²)` pinches off at `√(1 − Z²) = 4/|v|`.
pub fn classify_trapping(v: f64) -> Trapping {
    let av = v.abs();
    if av < 4.0 {
        Trapping::Untrapped
    } else if av == 4.0 {
        Trapping::Separatrix
    } else {
        Trapping::Trapped {
            min_rho_rr: 0.5 * (1.0 + (1.0 - 16.0 / (v * v)).sqrt()),
        }
    }
}

/// Smallest sampled ρ_RR of a series.
pub fn min_rho_rr(series: &StateSeries) -> f64 {
    series
        .rhos
        .iter()
        .map(|r| r.rho_rr)
        .fold(f64::INFINITY, f64::min)
}

/// Oscillation period of ρ_RR, estimated from interior extrema.
///
/// The sampled trajectories of this model start at an extremum (all named
/// preparations have real amplitudes, hence `dρ_RR/dτ(0) = 0`), so
/// consecutive interior extrema are half a period apart; the estimate is
/// twice that spacing. Returns `None` when fewer than two interior extrema
/// exist (monotone or trapped-asymptotic runs, or a grid too short/coarse).
pub fn oscillation_period(series: &StateSeries) -> Option<f64> {
    let r: Vec<f64> = series.rhos.iter().map(|m| m.rho_rr).collect();
    let mut extrema = Vec::new();
    for i in 1..r.len().saturating_sub(1) {
        let s1 = r[i] - r[i - 1];
        let s2 = r[i + 1] - r[i];
        if s1 * s2 < 0.0 {
            extrema.push(i);
            if extrema.len() == 2 {
                break;
            }
        }
    }
    match extrema.as_slice() {
        [a, b] => Some(2.0 * (series.times[*b] - series.times[*a])),
        _ => None,
    }
}
