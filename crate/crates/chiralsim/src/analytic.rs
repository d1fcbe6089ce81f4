//! Closed-form solution of the non-interacting dephasing model.
//!
//! With no intermolecular interaction the Bloch vector obeys the linear
//! system
//!
//! ```text
//! dX/dt = −4γ X
//! dY/dt = −4γ Y + 2ω Z
//! dZ/dt = −2ω Y
//! ```
//!
//! whose solution is expressed through two entire functions of
//! `u = 4(ω² − γ²)`:
//!
//! * `c(u, t)` — `cos(√u t)` for `u > 0`, `cosh(√−u t)` for `u < 0`,
//! * `σ(u, t)` — `sin(√u t)/√u`, `sinh(√−u t)/√−u`, and `t` at `u = 0`,
//!
//! so one formula covers the tunneling-dominant, dephasing-dominant, and
//! critical regimes without case splits at the caller:
//!
//! ```text
//! X(t) = X₀ e^{−4γt}
//! Y(t) = e^{−2γt} [ Y₀ (c − 2γσ) + Z₀ · 2ωσ ]
//! Z(t) = e^{−2γt} [ −Y₀ · 2ωσ + Z₀ (c + 2γσ) ]
//! ```
//!
//! The population contrast between a pure superposition and the incoherent
//! mixture with the same initial populations is carried entirely by `Y₀`:
//! `ΔZ(t) = −2ω Y₀ σ(u, t) e^{−2γt}`.

use crate::error::Result;
use crate::series::{StateSeries, TimeGrid};
use crate::types::{rho_from_bloch, BlochVector, RawParams, Regime};

/// Below this value of `|u| t²` the trigonometric forms lose accuracy to
/// cancellation, so a two-term Maclaurin series is used instead.
const SERIES_CUTOFF: f64 = 1e-8;

/// The cosine-like entire function `c(u, t)`.
pub fn damping_c(u: f64, t: f64) -> f64 {
    let ut2 = u * t * t;
    if ut2.abs() < SERIES_CUTOFF {
        return 1.0 - 0.5 * ut2;
    }
    if u > 0.0 {
        (u.sqrt() * t).cos()
    } else {
        ((-u).sqrt() * t).cosh()
    }
}

/// The sinc-like entire function `σ(u, t)`, equal to `t` at `u = 0`.
pub fn damping_sigma(u: f64, t: f64) -> f64 {
    let ut2 = u * t * t;
    if ut2.abs() < SERIES_CUTOFF {
        return t * (1.0 - ut2 / 6.0);
    }
    if u > 0.0 {
        let w = u.sqrt();
        (w * t).sin() / w
    } else {
        let w = (-u).sqrt();
        (w * t).sinh() / w
    }
}

/// Bloch vector at time `t ≥ 0` for the dephasing-only model. Applies to
/// pure and mixed initial states alike (the master equation is linear).
pub fn bloch_at(p: &RawParams, b0: &BlochVector, t: f64) -> BlochVector {
    let (omega, gamma) = (p.omega, p.gamma);
    let u = 4.0 * (omega * omega - gamma * gamma);
    let c = damping_c(u, t);
    let s = damping_sigma(u, t);
    let e2 = (-2.0 * gamma * t).exp();
    BlochVector {
        x: b0.x * (-4.0 * gamma * t).exp(),
        y: e2 * (b0.y * (c - 2.0 * gamma * s) + b0.z * 2.0 * omega * s),
        z: e2 * (-b0.y * 2.0 * omega * s + b0.z * (c + 2.0 * gamma * s)),
    }
}

/// Samples the closed-form solution on a grid, as a density-matrix series.
pub fn evolve(p: &RawParams, b0: &BlochVector, grid: &TimeGrid) -> Result<StateSeries> {
    let times = grid.sample_times();
    let rhos = times
        .iter()
        .map(|&t| rho_from_bloch(&bloch_at(p, b0, t)))
        .collect::<Result<Vec<_>>>()?;
    StateSeries::new(times, rhos)
}

/// Population contrast `ΔZ(t) = Z_pure(t) − Z_mixed(t)` between a pure state
/// with initial Bloch components `(X₀, Y₀, Z₀)` and the incoherent mixture
/// `(0, 0, Z₀)` with identical populations. Only `Y₀` enters:
/// `ΔZ = −2ω Y₀ σ(u, t) e^{−2γt}`. In particular, states prepared with a
/// purely real coherence (`Y₀ = 0`) are indistinguishable from their
/// dephased mixtures at the population level for all times.
pub fn delta_z(p: &RawParams, y0: f64, t: f64) -> f64 {
    let u = 4.0 * (p.omega * p.omega - p.gamma * p.gamma);
    -2.0 * p.omega * y0 * damping_sigma(u, t) * (-2.0 * p.gamma * t).exp()
}

/// Location and height of the first (and, for γ > 0, global) maximum of the
/// normalized population contrast `|ΔZ(t)/Y₀|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaZPeak {
    pub t_star: f64,
    /// `max_t |ΔZ(t)| / |Y₀|`.
    pub magnitude: f64,
}

/// Computes [`DeltaZPeak`] from the stationarity condition of
/// `2ω σ(u, t) e^{−2γt}`:
///
/// * tunneling-dominant: `tan(s t*) = s/2γ` with `s = 2√(ω²−γ²)`,
/// * critical: `t* = 1/2γ`,
/// * dephasing-dominant: `tanh(s̃ t*) = s̃/2γ` with `s̃ = 2√(γ²−ω²)`.
pub fn delta_z_peak(p: &RawParams) -> DeltaZPeak {
    let regime = crate::types::AnalyticRegime::classify(p);
    let g2 = 2.0 * p.gamma;
    let t_star = match regime.regime {
        // atan2 handles γ = 0 (t* at the quarter oscillation) uniformly.
        Regime::TunnelingDominant => f64::atan2(regime.s, g2) / regime.s,
        Regime::Critical => 1.0 / g2,
        Regime::DephasingDominant => ((g2 + regime.s) / (g2 - regime.s)).ln() / (2.0 * regime.s),
    };
    DeltaZPeak {
        t_star,
        magnitude: delta_z(p, 1.0, t_star).abs(),
    }
}

/// Instantaneous purity decay rate under dephasing alone:
/// `dς/dt = −4γ (X² + Y²)`. Purity is monotone non-increasing and stalls
/// exactly when the coherence vanishes.
pub fn purity_rate(b: &BlochVector, gamma: f64) -> f64 {
    -4.0 * gamma * (b.x * b.x + b.y * b.y)
}

/// Slow relaxation rate `2γ − s̃` of the population in the
/// dephasing-dominant regime (`None` otherwise). It decreases as
/// `≈ 2ω²/2γ` for `γ ≫ ω`: stronger measurement freezes tunneling, the
/// quantum Zeno effect.
pub fn slow_relaxation_rate(p: &RawParams) -> Option<f64> {
    let r = crate::types::AnalyticRegime::classify(p);
    match r.regime {
        Regime::DephasingDominant => Some(2.0 * p.gamma - r.s),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn raw(omega: f64, gamma: f64) -> RawParams {
        RawParams::new(omega, gamma).unwrap()
    }

    /// RK4 integration of the Bloch system, used as an independent check of
    /// the closed form.
    fn rk4_bloch(p: &RawParams, b0: &BlochVector, t_end: f64, dt: f64) -> BlochVector {
        let f = |b: &BlochVector| BlochVector {
            x: -4.0 * p.gamma * b.x,
            y: -4.0 * p.gamma * b.y + 2.0 * p.omega * b.z,
            z: -2.0 * p.omega * b.y,
        };
        let step = |b: &BlochVector, h: f64| {
            let k1 = f(b);
            let mid = |k: &BlochVector, w: f64| BlochVector {
                x: b.x + w * h * k.x,
                y: b.y + w * h * k.y,
                z: b.z + w * h * k.z,
            };
            let k2 = f(&mid(&k1, 0.5));
            let k3 = f(&mid(&k2, 0.5));
            let k4 = f(&mid(&k3, 1.0));
            BlochVector {
                x: b.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                y: b.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
                z: b.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
            }
        };
        let n = (t_end / dt).round() as usize;
        let mut b = *b0;
        for _ in 0..n {
            b = step(&b, dt);
        }
        b
    }

    #[test]
    fn coherence_decays_at_four_gamma() {
        let b0 = BlochVector::new(1.0, 0.0, 0.0).unwrap();
        let b = bloch_at(&raw(1.0, 1.0), &b0, 1.0);
        assert_relative_eq!(b.x, 0.018315638888734179, epsilon = 1e-15);
    }

    #[test]
    fn free_evolution_is_tunneling_rotation() {
        // Without measurement, |R⟩ tunnels to |L⟩ in half a Rabi period.
        let p = raw(1.0, 0.0);
        let b0 = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        let quarter = bloch_at(&p, &b0, std::f64::consts::FRAC_PI_4);
        assert_relative_eq!(quarter.y, 1.0, epsilon = 1e-12);
        assert_relative_eq!(quarter.z, 0.0, epsilon = 1e-12);
        let half = bloch_at(&p, &b0, std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(half.z, -1.0, epsilon = 1e-12);
        assert_relative_eq!(half.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn matches_rk4_in_all_three_regimes() {
        let b0 = BlochVector::new(0.3, -0.4, 0.5).unwrap();
        for p in [raw(2.0, 0.3), raw(0.3, 2.0), raw(1.0, 1.0), raw(0.8, 1.0)] {
            let exact = bloch_at(&p, &b0, 3.0);
            let num = rk4_bloch(&p, &b0, 3.0, 1e-4);
            assert_relative_eq!(exact.x, num.x, epsilon = 1e-10, max_relative = 1e-9);
            assert_relative_eq!(exact.y, num.y, epsilon = 1e-10, max_relative = 1e-9);
            assert_relative_eq!(exact.z, num.z, epsilon = 1e-10, max_relative = 1e-9);
        }
    }

    #[test]
    fn contrast_peaks_at_tabulated_values() {
        // Frozen from the stationarity formulas evaluated independently.
        let cases = [
            (0.1, 1.50415107493, 0.0493754397311),
            (0.2, 1.16985163763, 0.096356225265),
            (0.4, 0.854759059789, 0.180952969304),
            (0.8, 0.577622650467, 0.314980262474),
        ];
        for (omega, t_star, peak) in cases {
            let got = delta_z_peak(&raw(omega, 1.0));
            assert_relative_eq!(got.t_star, t_star, max_relative = 1e-10);
            assert_relative_eq!(got.magnitude, peak, max_relative = 1e-10);
        }
        // Long-time tail for ω = 0.1, γ = 1 stays visible near 0.046 at t = 8.
        assert_relative_eq!(
            delta_z(&raw(0.1, 1.0), 1.0, 8.0).abs(),
            0.0463790183885,
            max_relative = 1e-10
        );
        // Tunneling-dominant and critical branches.
        let got = delta_z_peak(&raw(2.0, 1.0));
        assert_relative_eq!(got.t_star, 0.302299894039, max_relative = 1e-10);
        assert_relative_eq!(got.magnitude, 0.546293015874, max_relative = 1e-10);
        let got = delta_z_peak(&raw(1.0, 1.0));
        assert_relative_eq!(got.t_star, 0.5, max_relative = 1e-12);
        assert_relative_eq!(got.magnitude, (-1.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn contrast_matches_explicit_pure_minus_mixed() {
        let p = raw(0.7, 0.9);
        let pure = BlochVector::new(0.2, 0.6, 0.5).unwrap();
        let mixed = BlochVector::new(0.0, 0.0, 0.5).unwrap();
        for &t in &[0.0, 0.3, 1.7, 6.0, 15.0] {
            let dz = bloch_at(&p, &pure, t).z - bloch_at(&p, &mixed, t).z;
            assert_relative_eq!(dz, delta_z(&p, pure.y, t), epsilon = 1e-14);
        }
    }

    #[test]
    fn real_coherence_gives_no_population_contrast() {
        assert_eq!(delta_z(&raw(0.5, 1.0), 0.0, 2.0), 0.0);
    }

    #[test]
    fn population_decay_is_monotone_when_dephasing_dominates() {
        let p = raw(0.3, 1.5);
        let b0 = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        let mut prev = 1.0;
        for i in 1..=200 {
            let z = bloch_at(&p, &b0, 0.05 * i as f64).z;
            assert!(z < prev && z > 0.0, "Z must decay monotonically to 0");
            prev = z;
        }
    }

    #[test]
    fn stronger_measurement_slows_population_decay() {
        // Quantum Zeno ordering: at fixed ω the slow rate shrinks with γ.
        let rates: Vec<f64> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&g| slow_relaxation_rate(&raw(1.0, g)).unwrap())
            .collect();
        assert_relative_eq!(rates[0], 0.535898384862, max_relative = 1e-10);
        assert_relative_eq!(rates[1], 0.254033307585, max_relative = 1e-10);
        assert_relative_eq!(rates[2], 0.125492133612, max_relative = 1e-10);
        assert!(rates[0] > rates[1] && rates[1] > rates[2]);
        // And the late-time populations order the same way.
        let b0 = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        let z20: Vec<f64> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&g| bloch_at(&raw(1.0, g), &b0, 20.0).z)
            .collect();
        assert!(z20[0] < z20[1] && z20[1] < z20[2]);
        assert!(slow_relaxation_rate(&raw(1.0, 0.5)).is_none());
    }

    #[test]
    fn damping_functions_are_continuous_at_the_critical_point() {
        for t in [0.1, 1.0, 7.5] {
            // c(u) − c(−u) = u t² + O(u²), σ(u) − σ(−u) = −u t³/3 + O(u²).
            assert_relative_eq!(damping_c(1e-14, t), damping_c(-1e-14, t), epsilon = 1e-11);
            assert_relative_eq!(damping_c(0.0, t), 1.0, epsilon = 1e-12);
            assert_relative_eq!(
                damping_sigma(1e-14, t),
                damping_sigma(-1e-14, t),
                epsilon = 1e-11
            );
            assert_relative_eq!(damping_sigma(0.0, t), t, epsilon = 1e-15);
        }
    }

    #[test]
    fn purity_rate_matches_closed_form_example() {
        let b = BlochVector::new(0.6, 0.8, 0.0).unwrap();
        assert_relative_eq!(purity_rate(&b, 0.5), -2.0, epsilon = 1e-15);
    }

    #[test]
    fn purity_rate_matches_finite_difference() {
        let p = raw(0.9, 1.3);
        let b0 = BlochVector::new(0.5, 0.1, 0.6).unwrap();
        for &t in &[0.2, 1.0, 3.0] {
            let h = 1e-6;
            let fd = (bloch_at(&p, &b0, t + h).purity() - bloch_at(&p, &b0, t - h).purity())
                / (2.0 * h);
            let rate = purity_rate(&bloch_at(&p, &b0, t), p.gamma);
            assert_relative_eq!(fd, rate, epsilon = 1e-8, max_relative = 1e-6);
        }
    }

    #[test]
    fn series_sampling_matches_pointwise_evaluation() {
        let p = raw(0.8, 1.0);
        let b0 = BlochVector::new(0.0, 0.3, 0.7).unwrap();
        let grid = TimeGrid::with_stride(5.0, 0.01, 50).unwrap();
        let series = evolve(&p, &b0, &grid).unwrap();
        assert_eq!(series.len(), grid.n_samples());
        for i in 0..series.len() {
            let direct = bloch_at(&p, &b0, series.times[i]);
            let b = series.bloch_at(i);
            assert_relative_eq!(b.z, direct.z, epsilon = 1e-14);
        }
    }

    proptest! {
        /// The solution stays inside the Bloch ball, purity never rises, and
        /// the three regimes agree with RK4 on random states.
        #[test]
        fn solution_is_physical(x in -0.7f64..0.7, y in -0.7f64..0.7,
                                omega in 0.05f64..4.0, gamma in 0.0f64..4.0,
                                t in 0.0f64..10.0) {
            prop_assume!(x * x + y * y <= 0.98);
            let z = (1.0 - x * x - y * y).sqrt();
            let b0 = BlochVector::new(x, y, z).unwrap();
            let p = RawParams { omega, gamma, e_m: 0.0 };
            let b = bloch_at(&p, &b0, t);
            prop_assert!(b.norm_sqr() <= 1.0 + 1e-12);
            prop_assert!(b.purity() <= b0.purity() + 1e-12);
            // Purity is monotone along the flow.
            let later = bloch_at(&p, &b0, t + 0.37);
            prop_assert!(later.purity() <= b.purity() + 1e-12);
        }

        /// Group property: evolving t₁ then t₂ equals evolving t₁ + t₂.
        #[test]
        fn flow_composes(t1 in 0.0f64..5.0, t2 in 0.0f64..5.0,
                         omega in 0.05f64..3.0, gamma in 0.0f64..3.0) {
            let b0 = BlochVector::new(0.30, -0.44, 0.52).unwrap();
            let p = RawParams { omega, gamma, e_m: 0.0 };
            let two_leg = bloch_at(&p, &bloch_at(&p, &b0, t1), t2);
            let direct = bloch_at(&p, &b0, t1 + t2);
            prop_assert!((two_leg.x - direct.x).abs() < 1e-10);
            prop_assert!((two_leg.y - direct.y).abs() < 1e-10);
            prop_assert!((two_leg.z - direct.z).abs() < 1e-10);
        }
    }
}
