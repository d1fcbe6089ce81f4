//! Trajectory ensembles: averaged density matrices with Monte-Carlo error
//! bars, computed reproducibly and in parallel.
//!
//! Every trajectory's noise stream is keyed by `(seed, trajectory index)`,
//! and the per-block partial sums are folded in a fixed order, so the result
//! is bit-identical for a given configuration regardless of thread count or
//! scheduling. Runs with `Γ = 0` take an exact shortcut: the ensemble
//! average collapses to one (pure start) or two (mixed start) deterministic
//! trajectories with zero statistical error.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::meanfield;
use crate::noise::NoiseStream;
use crate::series::{SeriesStderr, StateSeries, TimeGrid};
use crate::stochastic::{run_trajectory, DephasingScaling};
use crate::types::{DensityMatrix2, InitialState, ModelParams, StateAmplitudes};
use num_complex::Complex64;

/// Trajectories per work block. Blocks are the unit of parallel scheduling
/// *and* of the deterministic reduction order.
const BLOCK: usize = 64;

/// Highest tolerated fraction of collapsed (aborted) trajectories.
pub const MAX_ABORT_FRACTION: f64 = 1e-3;

/// Ensemble-level knobs; the physics lives in [`ModelParams`] and the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub scaling: DephasingScaling,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_traj: 10_000,
            seed: 1,
            scaling: DephasingScaling::Standard,
        }
    }
}

/// Averaged ensemble observables on the sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Mean density matrix per sample, with standard errors attached.
    pub series: StateSeries,
    /// Standard error of `|ρ_LR|²` of the averaged state, per sample.
    pub stderr_coherence_sqr: Vec<f64>,
    /// Trajectories contributing to the averages.
    pub n_traj: usize,
    /// Collapsed trajectories that were dropped (always ≤ 0.1 % of the
    /// total, otherwise the run fails).
    pub aborted: usize,
    /// Largest pre-renormalization norm error seen in any step.
    pub max_norm_error: f64,
}

/// Moment sums for one sample time: means and second moments of
/// `x = |a_L|²`, `u = Re(a_L a_R*)`, `w = Im(a_L a_R*)`.
type Row = [f64; 9];

struct Accum {
    n: usize,
    rows: Vec<Row>,
    max_norm_error: f64,
    aborted: Vec<usize>,
}

impl Accum {
    fn zero(n_samples: usize) -> Self {
        Self {
            n: 0,
            rows: vec![[0.0; 9]; n_samples],
            max_norm_error: 0.0,
            aborted: Vec::new(),
        }
    }

    fn add_trajectory(&mut self, amps: &[StateAmplitudes]) {
        self.n += 1;
        for (row, a) in self.rows.iter_mut().zip(amps) {
            let x = a.a_l.norm_sqr();
            let c = a.coherence();
            let (u, w) = (c.re, c.im);
            row[0] += x;
            row[1] += u;
            row[2] += w;
            row[3] += x * x;
            row[4] += u * u;
            row[5] += w * w;
            row[6] += x * u;
            row[7] += x * w;
            row[8] += u * w;
        }
    }

    fn merge(&mut self, other: &Accum) {
        self.n += other.n;
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            for k in 0..9 {
                a[k] += b[k];
            }
        }
        self.max_norm_error = self.max_norm_error.max(other.max_norm_error);
        self.aborted.extend_from_slice(&other.aborted);
    }
}

/// Initial amplitudes for trajectory `idx` of `n`: mixtures are realized by
/// assigning the first `round(p_L · n)` trajectories to `|L⟩` and the rest
/// to `|R⟩` (exact when `p_L · n` is an integer, which holds for every
/// preset in this crate).
fn initial_for(init: &InitialState, idx: usize, n: usize) -> StateAmplitudes {
    match *init {
        InitialState::Mixed { p_l, .. } => {
            let n_l = (p_l * n as f64).round() as usize;
            if idx < n_l {
                StateAmplitudes::localized_l()
            } else {
                StateAmplitudes::localized_r()
            }
        }
        ref pure => pure.amplitudes().expect("pure variant"),
    }
}

/// Runs a trajectory ensemble and averages it.
///
/// For `Γ > 0` this integrates `cfg.n_traj` stochastic trajectories (at
/// least 2, so error bars exist); for `Γ = 0` it returns the deterministic
/// result with zero standard errors.
pub fn run_ensemble(
    p: &ModelParams,
    init: &InitialState,
    grid: &TimeGrid,
    cfg: &EnsembleConfig,
) -> Result<EnsembleResult> {
    let p = p.validated()?;
    let init = init.validated()?;
    if cfg.n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be ≥ 1".into()));
    }
    if p.gamma == 0.0 {
        return exact_ensemble(&p, &init, grid, cfg);
    }
    if cfg.n_traj < 2 {
        return Err(Error::InvalidParameter(
            "stochastic ensembles need n_traj ≥ 2 to carry error bars".into(),
        ));
    }

    let n = cfg.n_traj;
    let n_samples = grid.n_samples();
    let n_blocks = n.div_ceil(BLOCK);
    let partials: Vec<Accum> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accum::zero(n_samples);
            for idx in (b * BLOCK)..((b + 1) * BLOCK).min(n) {
                let mut stream = NoiseStream::new(cfg.seed, idx as u64);
                let s0 = initial_for(&init, idx, n);
                match run_trajectory(&p, cfg.scaling, &s0, grid, &mut stream) {
                    Ok(traj) => {
                        acc.add_trajectory(&traj.amps);
                        acc.max_norm_error = acc.max_norm_error.max(traj.max_norm_drift);
                    }
                    Err(Error::NormCollapse { .. }) => acc.aborted.push(idx),
                    Err(other) => return Err(other),
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total = Accum::zero(n_samples);
    for acc in &partials {
        total.merge(acc);
    }
    total.aborted.sort_unstable();

    let aborted = total.aborted.len();
    if aborted as f64 > MAX_ABORT_FRACTION * n as f64 || total.n < 2 {
        return Err(Error::TooManyAborts {
            aborted,
            total: n,
            first: total.aborted.iter().take(8).copied().collect(),
        });
    }
    summarize(total, grid)
}

fn exact_ensemble(
    p: &ModelParams,
    init: &InitialState,
    grid: &TimeGrid,
    _cfg: &EnsembleConfig,
) -> Result<EnsembleResult> {
    let series = meanfield::propagate(p, init, grid)?;
    let zeros = vec![0.0; series.len()];
    let mut series = series;
    series.stderr = Some(SeriesStderr {
        rho_rr: zeros.clone(),
        purity: zeros.clone(),
    });
    Ok(EnsembleResult {
        series,
        stderr_coherence_sqr: zeros,
        n_traj: 1,
        aborted: 0,
        max_norm_error: 0.0,
    })
}

fn summarize(total: Accum, grid: &TimeGrid) -> Result<EnsembleResult> {
    let n = total.n as f64;
    let mut rhos = Vec::with_capacity(total.rows.len());
    let mut se_rr = Vec::with_capacity(total.rows.len());
    let mut se_purity = Vec::with_capacity(total.rows.len());
    let mut se_coh2 = Vec::with_capacity(total.rows.len());
    for row in &total.rows {
        let (xm, um, wm) = (row[0] / n, row[1] / n, row[2] / n);
        // Unbiased sample covariances of (x, u, w).
        let cov = |sum_ab: f64, am: f64, bm: f64| (sum_ab - n * am * bm) / (n - 1.0);
        let (cxx, cuu, cww) = (
            cov(row[3], xm, xm).max(0.0),
            cov(row[4], um, um).max(0.0),
            cov(row[5], wm, wm).max(0.0),
        );
        let (cxu, cxw, cuw) = (cov(row[6], xm, um), cov(row[7], xm, wm), cov(row[8], um, wm));

        rhos.push(DensityMatrix2::new(
            xm,
            1.0 - xm,
            Complex64::new(um, wm),
        )?);
        se_rr.push((cxx / n).sqrt());
        // Delta method on ς(x̄, ū, w̄) = x̄² + (1−x̄)² + 2(ū² + w̄²):
        // gradient (2(2x̄ − 1), 4ū, 4w̄).
        let g = [2.0 * (2.0 * xm - 1.0), 4.0 * um, 4.0 * wm];
        let var_p = g[0] * g[0] * cxx
            + g[1] * g[1] * cuu
            + g[2] * g[2] * cww
            + 2.0 * (g[0] * g[1] * cxu + g[0] * g[2] * cxw + g[1] * g[2] * cuw);
        se_purity.push((var_p.max(0.0) / n).sqrt());
        // Same for |ρ_LR|² = ū² + w̄²: gradient (0, 2ū, 2w̄).
        let var_c = 4.0 * (um * um * cuu + wm * wm * cww + 2.0 * um * wm * cuw);
        se_coh2.push((var_c.max(0.0) / n).sqrt());
    }
    let mut series = StateSeries::new(grid.sample_times(), rhos)?;
    series.stderr = Some(SeriesStderr {
        rho_rr: se_rr,
        purity: se_purity,
    });
    Ok(EnsembleResult {
        series,
        stderr_coherence_sqr: se_coh2,
        n_traj: total.n,
        aborted: total.aborted.len(),
        max_norm_error: total.max_norm_error,
    })
}

/// Onset of stationarity of a sampled signal: the earliest sample time from
/// which the remaining signal stays inside a band of width `tol`. Returns
/// the onset and the mean over that suffix.
pub fn stationary_onset(times: &[f64], values: &[f64], tol: f64) -> Option<(f64, f64)> {
    if times.len() != values.len() || values.is_empty() {
        return None;
    }
    // Reverse scan: suffix_ok[i] = max(values[i..]) − min(values[i..]) ≤ tol.
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut onset = None;
    for i in (0..values.len()).rev() {
        hi = hi.max(values[i]);
        lo = lo.min(values[i]);
        if hi - lo <= tol {
            onset = Some(i);
        } else {
            break;
        }
    }
    let i = onset?;
    if i == 0 || i + 1 == values.len() {
        // Stationary from the very start is fine; stationary only at the
        // last point is not evidence of a plateau.
        if i + 1 == values.len() {
            return None;
        }
    }
    let suffix = &values[i..];
    Some((times[i], suffix.iter().sum::<f64>() / suffix.len() as f64))
}

/// How quickly a run loses purity, for ranking runs against each other.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRank {
    pub label: String,
    /// First sample time with purity below the threshold; `None` if purity
    /// never drops that far on the grid.
    pub crossing_time: Option<f64>,
    pub final_purity: f64,
}

/// Orders runs from fastest to slowest purity decay.
///
/// Runs that cross the threshold rank by crossing time; runs that never
/// cross rank after all of those, ordered by final purity (lower final
/// purity = faster decay). This two-stage metric separates regimes where
/// endpoint purity alone would invert the ranking: an untrapped run can
/// cross early yet equilibrate to a *lower* final purity than a trapped run
/// that never crosses at all.
pub fn purity_decay_ordering(runs: &[(String, &StateSeries)], threshold: f64) -> Vec<DecayRank> {
    let mut ranks: Vec<DecayRank> = runs
        .iter()
        .map(|(label, series)| {
            let purities = series.purities();
            let crossing_time = purities
                .iter()
                .position(|&p| p < threshold)
                .map(|i| series.times[i]);
            DecayRank {
                label: label.clone(),
                crossing_time,
                final_purity: *purities.last().expect("non-empty series"),
            }
        })
        .collect();
    ranks.sort_by(|a, b| {
        let ka = (a.crossing_time.unwrap_or(f64::INFINITY), a.final_purity);
        let kb = (b.crossing_time.unwrap_or(f64::INFINITY), b.final_purity);
        ka.partial_cmp(&kb).expect("finite sort keys")
    });
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::types::{BlochVector, RawParams};
    use approx::assert_relative_eq;

    fn params(v: f64, gamma: f64) -> ModelParams {
        ModelParams::new(0.0, v, gamma).unwrap()
    }

    #[test]
    fn zero_rate_pure_ensemble_is_the_deterministic_run() {
        let p = params(5.0, 0.0);
        let grid = TimeGrid::with_stride(5.0, 1e-3, 100).unwrap();
        let cfg = EnsembleConfig {
            n_traj: 100,
            ..Default::default()
        };
        let ens = run_ensemble(&p, &InitialState::Localized, &grid, &cfg).unwrap();
        let det = meanfield::propagate(&p, &InitialState::Localized, &grid).unwrap();
        assert_eq!(ens.series.rhos, det.rhos);
        assert!(ens.series.stderr.as_ref().unwrap().rho_rr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn zero_rate_mixture_is_exact() {
        let p = params(5.0, 0.0);
        let grid = TimeGrid::with_stride(5.0, 1e-3, 100).unwrap();
        let cfg = EnsembleConfig {
            n_traj: 10,
            ..Default::default()
        };
        let init = InitialState::Mixed { p_l: 0.3, p_r: 0.7 };
        let ens = run_ensemble(&p, &init, &grid, &cfg).unwrap();
        let det = meanfield::propagate_mixed(&p, 0.3, 0.7, &grid).unwrap();
        assert_eq!(ens.series.rhos, det.rhos);
    }

    #[test]
    fn result_is_identical_across_thread_pools() {
        let p = params(3.0, 1.6e-2);
        let grid = TimeGrid::with_stride(2.0, 1e-3, 40).unwrap();
        let cfg = EnsembleConfig {
            n_traj: 200,
            seed: 42,
            scaling: DephasingScaling::Standard,
        };
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| run_ensemble(&p, &InitialState::Localized, &grid, &cfg).unwrap())
        };
        let a = run_with(1);
        let b = run_with(4);
        assert_eq!(a.series.rhos, b.series.rhos);
        assert_eq!(
            a.series.stderr.as_ref().unwrap().purity,
            b.series.stderr.as_ref().unwrap().purity
        );
    }

    #[test]
    fn reproduces_the_master_equation_without_interaction() {
        // v = 0 ensemble averages must follow the closed-form solution at
        // the configured rate (rescaled time ⇒ ω = 1, γ = Γ).
        let gamma = 1.6e-2;
        let p = params(0.0, gamma);
        let grid = TimeGrid::with_stride(5.0, 1e-3, 100).unwrap();
        let cfg = EnsembleConfig {
            n_traj: 2000,
            seed: 7,
            scaling: DephasingScaling::Standard,
        };
        let init = InitialState::StronglyDelocalized;
        let ens = run_ensemble(&p, &init, &grid, &cfg).unwrap();
        let raw = RawParams::new(1.0, gamma).unwrap();
        let b0 = init.density().unwrap();
        let b0 = BlochVector::new(2.0 * b0.rho_lr.re, 0.0, b0.rho_rr - b0.rho_ll).unwrap();
        let se = ens.series.stderr.as_ref().unwrap();
        for i in 0..ens.series.len() {
            let exact = analytic::bloch_at(&raw, &b0, ens.series.times[i]);
            let got = ens.series.bloch_at(i);
            let band = 4.0 * se.rho_rr[i].max(1e-4);
            assert!(
                (got.z - exact.z).abs() < 2.0 * band.max(4e-3),
                "t = {}: Z = {} vs exact {} (band {band})",
                ens.series.times[i],
                got.z,
                exact.z
            );
        }
        // Purity of the average must track the analytic mixture, not 1.
        let i_last = ens.series.len() - 1;
        let exact_p = crate::types::rho_from_bloch(&analytic::bloch_at(
            &raw,
            &b0,
            ens.series.times[i_last],
        ))
        .unwrap()
        .purity();
        assert!((ens.series.purity_at(i_last) - exact_p).abs() < 6.0 * se.purity[i_last].max(1e-3));
    }

    #[test]
    fn mixture_allocation_and_initial_spread_are_exact() {
        let p = params(3.0, 1.6e-3);
        let grid = TimeGrid::with_stride(0.1, 1e-3, 100).unwrap();
        let cfg = EnsembleConfig {
            n_traj: 100,
            seed: 3,
            scaling: DephasingScaling::Standard,
        };
        let init = InitialState::Mixed { p_l: 0.49, p_r: 0.51 };
        let ens = run_ensemble(&p, &init, &grid, &cfg).unwrap();
        // 49 of 100 trajectories start in |L⟩ ⇒ the t = 0 average is exact
        // and its standard error is the two-point-population formula.
        assert_relative_eq!(ens.series.rhos[0].rho_rr, 0.51, epsilon = 1e-12);
        let var = (49.0 * 0.51f64.powi(2) + 51.0 * 0.49f64.powi(2)) / 99.0;
        let expected_se = (var / 100.0).sqrt();
        let se = ens.series.stderr.as_ref().unwrap();
        assert_relative_eq!(se.rho_rr[0], expected_se, epsilon = 1e-12);
        assert_eq!(ens.series.rhos[0].rho_lr, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn error_bars_shrink_as_inverse_sqrt_n() {
        let p = params(0.0, 1.6e-2);
        let grid = TimeGrid::with_stride(2.0, 1e-3, 200).unwrap();
        let se_final = |n: usize| {
            let cfg = EnsembleConfig {
                n_traj: n,
                seed: 11,
                scaling: DephasingScaling::Standard,
            };
            let ens =
                run_ensemble(&p, &InitialState::StronglyDelocalized, &grid, &cfg).unwrap();
            let se = ens.series.stderr.as_ref().unwrap();
            *se.rho_rr.last().unwrap()
        };
        let ratio = se_final(100) / se_final(400);
        assert!((ratio - 2.0).abs() < 0.5, "√N scaling violated: {ratio}");
    }

    #[test]
    fn collapsing_runs_abort_with_context() {
        let p = params(0.0, 1e9);
        let grid = TimeGrid::new(0.1, 1e-2).unwrap();
        let cfg = EnsembleConfig {
            n_traj: 8,
            ..Default::default()
        };
        match run_ensemble(&p, &InitialState::StronglyDelocalized, &grid, &cfg) {
            Err(Error::TooManyAborts { aborted, total, first }) => {
                assert_eq!(aborted, 8);
                assert_eq!(total, 8);
                assert_eq!(first[0], 0);
            }
            other => panic!("expected TooManyAborts, got {other:?}"),
        }
    }

    #[test]
    fn stationary_onset_detects_plateaus() {
        let times: Vec<f64> = (0..100).map(|i| 0.1 * i as f64).collect();
        // Decays to 0.5 with time constant 1; plateau within 1e-3 by t ≈ 6.
        let values: Vec<f64> = times.iter().map(|t| 0.5 + 0.5 * (-t).exp()).collect();
        let (onset, value) = stationary_onset(&times, &values, 1e-3).unwrap();
        assert!(onset > 5.0 && onset < 8.0, "onset {onset}");
        assert_relative_eq!(value, 0.5, epsilon = 1e-3);
        // A ramp has no plateau.
        let ramp: Vec<f64> = times.iter().map(|t| 0.1 * t).collect();
        assert_eq!(stationary_onset(&times, &ramp, 1e-3), None);
        // A constant is stationary from the start.
        let flat = vec![0.3; times.len()];
        let (onset, value) = stationary_onset(&times, &flat, 1e-3).unwrap();
        assert_eq!(onset, 0.0);
        assert_relative_eq!(value, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn decay_ordering_ranks_crossers_then_survivors() {
        let times: Vec<f64> = (0..=100).map(|i| 0.2 * i as f64).collect();
        let series_with = |rate: f64, floor: f64| {
            let rhos: Vec<DensityMatrix2> = times
                .iter()
                .map(|&t| {
                    let p = floor + (1.0 - floor) * (-rate * t).exp();
                    // Diagonal state with the requested purity:
                    // ς = q² + (1−q)² ⇒ q = (1 + √(2ς − 1))/2.
                    let q = 0.5 * (1.0 + (2.0 * p - 1.0).max(0.0).sqrt());
                    DensityMatrix2::new(1.0 - q, q, Complex64::new(0.0, 0.0)).unwrap()
                })
                .collect();
            StateSeries::new(times.clone(), rhos).unwrap()
        };
        let fast = series_with(1.0, 0.55); // crosses 0.9 early, low floor
        let slow = series_with(0.2, 0.55); // crosses later
        let high = series_with(1.0, 0.99); // never crosses, high final
        let mid = series_with(1.0, 0.93); // never crosses, lower final
        let runs = vec![
            ("high".to_string(), &high),
            ("slow".to_string(), &slow),
            ("mid".to_string(), &mid),
            ("fast".to_string(), &fast),
        ];
        let order: Vec<String> = purity_decay_ordering(&runs, 0.9)
            .into_iter()
            .map(|r| r.label)
            .collect();
        assert_eq!(order, vec!["fast", "slow", "mid", "high"]);
    }
}
