//! Stochastic trajectories of the continuously measured interacting system.
//!
//! A single trajectory follows the normalized nonlinear unraveling of
//! chirality measurement: on top of the mean-field flow, the measured
//! populations acquire a deterministic localization drift and a
//! state-dependent multiplicative noise,
//!
//! ```text
//! da_L = [mean field]dτ − Γ_d |a_R|⁴ a_L dτ − c |a_R|² a_L dη
//! da_R = [mean field]dτ − Γ_d |a_L|⁴ a_R dτ + c |a_L|² a_R dη
//! ```
//!
//! with `dη` a normalized complex Wiener increment (`E[|dη|²] = dτ`,
//! interpreted in the Itô sense). Both chiral basis states are dark states
//! of the measurement: once fully localized, drift and noise vanish and only
//! tunneling can move the state.
//!
//! Two coefficient conventions for `(Γ_d, c)` are in circulation (see
//! [`DephasingScaling`]); they describe the same family of processes with the
//! measurement rate read differently, related exactly by
//! `Quarter(Γ) ≡ Standard(Γ/4)` — pathwise, for the same noise stream.
//!
//! Integration is a hybrid scheme: the deterministic part advances with RK4,
//! the noise term is then applied with coefficients evaluated at the
//! post-RK4 state, and the state is renormalized. The noise enters at first
//! order (the scheme is strong order 1/2 overall, as expected for
//! multiplicative noise), while all deterministic error stays at RK4's
//! fourth order, which matters because the acceptance comparisons run at
//! `Γ ≪ 1` where the deterministic part dominates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{self, AmplitudeSeries};
use crate::noise::NoiseStream;
use crate::series::TimeGrid;
use crate::types::{ModelParams, StateAmplitudes};

/// If the squared norm of a trajectory falls below this (or turns
/// non-finite), the trajectory is declared collapsed and the run aborts.
pub const COLLAPSE_TOL: f64 = 1e-12;

/// Coefficient convention tying the unraveling to the measurement rate Γ.
///
/// `Standard` makes the trajectory average of the non-interacting model
/// reproduce the dephasing master equation *at rate Γ*: coherences decay as
/// `e^{−4Γτ}` (in rescaled time), matching the closed-form solutions in
/// [`crate::analytic`]. `Quarter` keeps the coefficient layout found in part
/// of the literature, which unravels the same master equation at rate Γ/4.
/// The two are related pathwise by `Quarter(Γ) = Standard(Γ/4)`; `Standard`
/// is the default everywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DephasingScaling {
    #[default]
    Standard,
    Quarter,
}

impl DephasingScaling {
    /// `(Γ_d, c²)`: the localization drift rate and the squared noise
    /// coefficient for measurement rate `gamma`.
    ///
    /// Working with `c²` keeps the identity `Quarter(Γ) = Standard(Γ/4)`
    /// exact in floating point: both paths produce bit-identical
    /// coefficients, hence bit-identical trajectories for the same stream.
    pub fn coefficients(&self, gamma: f64) -> (f64, f64) {
        match self {
            Self::Standard => (4.0 * gamma, 8.0 * gamma),
            Self::Quarter => (gamma, 2.0 * gamma),
        }
    }
}

impl std::fmt::Display for DephasingScaling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Standard => write!(f, "standard"),
            Self::Quarter => write!(f, "quarter"),
        }
    }
}

/// Measurement-induced deterministic drift (the `−Γ_d |a_∓|⁴ a_±` terms).
/// Identically zero at the two localized basis states.
pub fn dephasing_drift(
    p: &ModelParams,
    scaling: DephasingScaling,
    s: &StateAmplitudes,
) -> (Complex64, Complex64) {
    let (gd, _) = scaling.coefficients(p.gamma);
    let nl = s.a_l.norm_sqr();
    let nr = s.a_r.norm_sqr();
    (-gd * nr * nr * s.a_l, -gd * nl * nl * s.a_r)
}

/// Full deterministic drift: mean field plus measurement drift. This is the
/// vector field the RK4 stage integrates.
pub fn deterministic_drift(
    p: &ModelParams,
    scaling: DephasingScaling,
    s: &StateAmplitudes,
) -> (Complex64, Complex64) {
    let mf = meanfield::drift(p, s);
    let dep = dephasing_drift(p, scaling, s);
    (mf.0 + dep.0, mf.1 + dep.1)
}

fn rk4_deterministic(
    p: &ModelParams,
    scaling: DephasingScaling,
    s: &StateAmplitudes,
    dt: f64,
) -> StateAmplitudes {
    let stage = |base: &StateAmplitudes, k: &(Complex64, Complex64), w: f64| StateAmplitudes {
        a_l: base.a_l + w * dt * k.0,
        a_r: base.a_r + w * dt * k.1,
    };
    let k1 = deterministic_drift(p, scaling, s);
    let k2 = deterministic_drift(p, scaling, &stage(s, &k1, 0.5));
    let k3 = deterministic_drift(p, scaling, &stage(s, &k2, 0.5));
    let k4 = deterministic_drift(p, scaling, &stage(s, &k3, 1.0));
    StateAmplitudes {
        a_l: s.a_l + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        a_r: s.a_r + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    }
}

/// Outcome of one hybrid step: the renormalized state plus the norm error
/// the step produced before renormalization.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub state: StateAmplitudes,
    /// `| |a|² − 1 |` of the raw (pre-renormalization) step result.
    pub norm_error: f64,
}

/// One hybrid integration step with externally supplied noise `deta`.
///
/// Advances the deterministic flow by RK4, applies the multiplicative noise
/// with coefficients at the post-RK4 state, renormalizes, and reports the
/// pre-renormalization norm error. Fails with [`Error::NormCollapse`] if the
/// state norm collapses or turns non-finite (a sign of `Γ dt` far too large).
pub fn step(
    p: &ModelParams,
    scaling: DephasingScaling,
    s: &StateAmplitudes,
    dt: f64,
    deta: Complex64,
) -> Result<StepOutcome> {
    let det = rk4_deterministic(p, scaling, s, dt);
    let (_, c2) = scaling.coefficients(p.gamma);
    let c = c2.sqrt();
    let nl = det.a_l.norm_sqr();
    let nr = det.a_r.norm_sqr();
    let raw = StateAmplitudes {
        a_l: det.a_l - c * nr * det.a_l * deta,
        a_r: det.a_r + c * nl * det.a_r * deta,
    };
    let n = raw.norm_sqr();
    if !n.is_finite() || n < COLLAPSE_TOL {
        return Err(Error::NormCollapse { norm_sqr: n });
    }
    Ok(StepOutcome {
        state: raw.renormalized(),
        norm_error: (n - 1.0).abs(),
    })
}

/// Integrates one trajectory over `grid`, drawing noise from `stream`.
///
/// The stream is advanced exactly once per step regardless of stride, so a
/// trajectory is a pure function of `(params, scaling, initial state, grid,
/// stream key)`.
pub fn run_trajectory(
    p: &ModelParams,
    scaling: DephasingScaling,
    s0: &StateAmplitudes,
    grid: &TimeGrid,
    stream: &mut NoiseStream,
) -> Result<AmplitudeSeries> {
    let p = p.validated()?;
    let mut s = StateAmplitudes::new(s0.a_l, s0.a_r)?.renormalized();
    let dt = grid.dt();
    let mut times = Vec::with_capacity(grid.n_samples());
    let mut amps = Vec::with_capacity(grid.n_samples());
    times.push(0.0);
    amps.push(s);
    let mut max_norm_error = 0.0f64;
    for stepno in 1..=grid.n_steps() {
        let deta = stream.next_increment(dt);
        let out = step(&p, scaling, &s, dt, deta)?;
        s = out.state;
        max_norm_error = max_norm_error.max(out.norm_error);
        if grid.is_sample(stepno) {
            times.push(stepno as f64 * dt);
            amps.push(s);
        }
    }
    Ok(AmplitudeSeries {
        times,
        amps,
        max_norm_drift: max_norm_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::InitialState;
    use approx::assert_relative_eq;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(v: f64, gamma: f64) -> ModelParams {
        ModelParams::new(0.0, v, gamma).unwrap()
    }

    #[test]
    fn zero_measurement_reduces_to_mean_field() {
        let p = params(5.0, 0.0);
        let grid = TimeGrid::with_stride(5.0, 1e-3, 100).unwrap();
        let s0 = InitialState::WeaklyDelocalized.amplitudes().unwrap();
        let mut stream = NoiseStream::new(9, 0);
        let noisy = run_trajectory(&p, DephasingScaling::Standard, &s0, &grid, &mut stream)
            .unwrap();
        let det = meanfield::propagate_amplitudes(&p, &s0, &grid).unwrap();
        for i in 0..noisy.amps.len() {
            // Only difference: the stochastic path renormalizes each step.
            assert!((noisy.amps[i].a_l - det.amps[i].a_l).norm() < 1e-12);
            assert!((noisy.amps[i].a_r - det.amps[i].a_r).norm() < 1e-12);
        }
    }

    #[test]
    fn localized_states_are_dark() {
        let p = params(7.0, 3.0);
        for s in [StateAmplitudes::localized_l(), StateAmplitudes::localized_r()] {
            let dep = dephasing_drift(&p, DephasingScaling::Standard, &s);
            assert_eq!(dep.0, c64(0.0, 0.0));
            assert_eq!(dep.1, c64(0.0, 0.0));
            let full = deterministic_drift(&p, DephasingScaling::Standard, &s);
            let mf = meanfield::drift(&p, &s);
            assert_eq!(full.0, mf.0);
            assert_eq!(full.1, mf.1);
        }
    }

    #[test]
    fn step_matches_hand_expanded_euler_increment() {
        // One step against the equations written out term by term at first
        // order. dt is chosen small enough that the RK4-vs-Euler and
        // noise-coefficient-evaluation differences (both O(dt²) and
        // O(dt·|dη|)) sit far below the asserted tolerance.
        let p = ModelParams::new(1.0, 5.0, 0.8).unwrap();
        let s = InitialState::StronglyDelocalized.amplitudes().unwrap();
        let dt = 1e-6;
        let deta = c64(8e-4, -5e-4);
        let got = step(&p, DephasingScaling::Standard, &s, dt, deta)
            .unwrap()
            .state;

        let i = Complex64::i();
        let (nl, nr) = (s.a_l.norm_sqr(), s.a_r.norm_sqr());
        let (gd, c2) = (4.0 * p.gamma, 8.0 * p.gamma);
        let dl = (-i * (p.offset + p.v * nr) * s.a_l + i * s.a_r - gd * nr * nr * s.a_l) * dt
            - c2.sqrt() * nr * s.a_l * deta;
        let dr = (-i * (p.offset + p.v * nl) * s.a_r + i * s.a_l - gd * nl * nl * s.a_r) * dt
            + c2.sqrt() * nl * s.a_r * deta;
        let euler = StateAmplitudes {
            a_l: s.a_l + dl,
            a_r: s.a_r + dr,
        }
        .renormalized();
        assert!((got.a_l - euler.a_l).norm() < 1e-8);
        assert!((got.a_r - euler.a_r).norm() < 1e-8);
    }

    #[test]
    fn noise_displacement_scales_as_sqrt_gamma() {
        let s0 = InitialState::StronglyDelocalized.amplitudes().unwrap();
        let dt = 1e-5;
        let deta = c64(2e-3, 1e-3);
        let displacement = |gamma: f64| {
            let with = step(&params(0.0, gamma), DephasingScaling::Standard, &s0, dt, deta)
                .unwrap()
                .state;
            let without = step(
                &params(0.0, gamma),
                DephasingScaling::Standard,
                &s0,
                dt,
                c64(0.0, 0.0),
            )
            .unwrap()
            .state;
            ((with.a_l - without.a_l).norm_sqr() + (with.a_r - without.a_r).norm_sqr()).sqrt()
        };
        let ratio = displacement(0.4) / displacement(0.1);
        assert_relative_eq!(ratio, 2.0, epsilon = 1e-4);
    }

    #[test]
    fn quarter_scaling_is_standard_at_quarter_rate() {
        // Identical streams, Γ vs Γ/4: bit-identical trajectories.
        let grid = TimeGrid::with_stride(20.0, 1e-3, 100).unwrap();
        let s0 = InitialState::Localized.amplitudes().unwrap();
        let gamma = 1.6e-3;
        let mut stream_a = NoiseStream::new(31, 4);
        let mut stream_b = NoiseStream::new(31, 4);
        let a = run_trajectory(
            &params(3.0, gamma),
            DephasingScaling::Quarter,
            &s0,
            &grid,
            &mut stream_a,
        )
        .unwrap();
        let b = run_trajectory(
            &params(3.0, gamma / 4.0),
            DephasingScaling::Standard,
            &s0,
            &grid,
            &mut stream_b,
        )
        .unwrap();
        for i in 0..a.amps.len() {
            assert_eq!(a.amps[i].a_l, b.amps[i].a_l);
            assert_eq!(a.amps[i].a_r, b.amps[i].a_r);
        }
    }

    #[test]
    fn trajectories_are_bit_reproducible() {
        let p = params(-3.0, 1.6e-3);
        let grid = TimeGrid::with_stride(10.0, 1e-3, 50).unwrap();
        let s0 = InitialState::WeaklyDelocalized.amplitudes().unwrap();
        let run = |seed, idx| {
            let mut stream = NoiseStream::new(seed, idx);
            run_trajectory(&p, DephasingScaling::Standard, &s0, &grid, &mut stream).unwrap()
        };
        let (a, b, c) = (run(5, 11), run(5, 11), run(5, 12));
        for i in 0..a.amps.len() {
            assert_eq!(a.amps[i].a_l, b.amps[i].a_l);
            assert_eq!(a.amps[i].a_r, b.amps[i].a_r);
        }
        assert_ne!(a.amps.last().unwrap().a_l, c.amps.last().unwrap().a_l);
    }

    #[test]
    fn per_step_norm_error_stays_small() {
        let p = params(5.0, 1.6e-2);
        let grid = TimeGrid::new(20.0, 1e-3).unwrap();
        let s0 = InitialState::Localized.amplitudes().unwrap();
        let mut stream = NoiseStream::new(77, 0);
        let run = run_trajectory(&p, DephasingScaling::Standard, &s0, &grid, &mut stream)
            .unwrap();
        // The nonlinear form keeps the O(√dt) norm change cancelled between
        // the two wells; what is left is O(Γ dt).
        assert!(run.max_norm_drift < 1e-3, "norm error {}", run.max_norm_drift);
        for a in &run.amps {
            assert_relative_eq!(a.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn strong_trapping_survives_measurement_on_single_paths() {
        // v = ±10, Γ = 1.6e-3: localized runs stay in the initial well.
        let grid = TimeGrid::with_stride(20.0, 1e-3, 1000).unwrap();
        let s0 = InitialState::Localized.amplitudes().unwrap();
        for v in [10.0, -10.0] {
            let mut stream = NoiseStream::new(1234, 0);
            let run = run_trajectory(
                &params(v, 1.6e-3),
                DephasingScaling::Standard,
                &s0,
                &grid,
                &mut stream,
            )
            .unwrap();
            let last = run.amps.last().unwrap();
            assert!(
                last.a_r.norm_sqr() > 0.9,
                "v = {v}: final population {}",
                last.a_r.norm_sqr()
            );
        }
    }

    #[test]
    fn runaway_parameters_collapse_loudly() {
        // Γ dt ≫ 1 overflows the localization drift; the integrator must
        // return an error instead of NaN series.
        let p = params(0.0, 1e9);
        let grid = TimeGrid::new(1.0, 1e-2).unwrap();
        let s0 = InitialState::StronglyDelocalized.amplitudes().unwrap();
        let mut stream = NoiseStream::new(3, 3);
        let err = run_trajectory(&p, DephasingScaling::Standard, &s0, &grid, &mut stream);
        assert!(matches!(err, Err(Error::NormCollapse { .. })));
    }
}
