//! Uniform time grids and sampled state histories shared by the analytic,
//! deterministic, and stochastic engines.

use crate::error::{Error, Result};
use crate::types::{bloch_from_rho, BlochVector, DensityMatrix2};

/// Hard cap on integration steps per run; guards against `dt` typos that
/// would silently turn a run into hours.
pub const MAX_STEPS: usize = 200_000_000;

/// A uniform integration grid with an output stride.
///
/// The integrator takes `n_steps` steps of size `dt`; every `stride`-th state
/// (plus the initial state and always the final state) is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    dt_num: u64, // dt encoded as f64 bits; grids compare exactly
    n_steps: usize,
    stride: usize,
}

impl TimeGrid {
    /// Grid covering `[0, t_max]` with step `dt`, recording every step.
    /// `t_max` is rounded to the nearest whole number of steps.
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        Self::with_stride(t_max, dt, 1)
    }

    /// Grid covering `[0, t_max]` with step `dt`, recording every
    /// `stride`-th step.
    pub fn with_stride(t_max: f64, dt: f64, stride: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0 && t_max.is_finite() && t_max > 0.0) {
            return Err(Error::BadTimeSpan(t_max));
        }
        let n = (t_max / dt).round();
        if n < 1.0 || n > MAX_STEPS as f64 {
            return Err(Error::BadTimeSpan(t_max));
        }
        if stride == 0 {
            return Err(Error::InvalidParameter("output stride must be ≥ 1".into()));
        }
        Ok(Self {
            dt_num: dt.to_bits(),
            n_steps: n as usize,
            stride,
        })
    }

    pub fn dt(&self) -> f64 {
        f64::from_bits(self.dt_num)
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Final integration time `n_steps · dt`.
    pub fn t_max(&self) -> f64 {
        self.n_steps as f64 * self.dt()
    }

    /// True if the state after `step` integration steps is recorded.
    pub fn is_sample(&self, step: usize) -> bool {
        step == 0 || step == self.n_steps || step % self.stride == 0
    }

    /// Step indices of the recorded samples, in order.
    pub fn sample_steps(&self) -> Vec<usize> {
        let mut steps: Vec<usize> = (0..=self.n_steps).filter(|&s| self.is_sample(s)).collect();
        debug_assert!(steps.windows(2).all(|w| w[0] < w[1]));
        steps.shrink_to_fit();
        steps
    }

    /// Times of the recorded samples.
    pub fn sample_times(&self) -> Vec<f64> {
        self.sample_steps()
            .into_iter()
            .map(|s| s as f64 * self.dt())
            .collect()
    }

    pub fn n_samples(&self) -> usize {
        self.sample_steps().len()
    }
}

/// Per-sample standard errors of an ensemble average.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeriesStderr {
    /// Standard error of the mean of ρ_RR.
    pub rho_rr: Vec<f64>,
    /// Standard error of the ensemble purity (delta method over the averaged
    /// density matrix).
    pub purity: Vec<f64>,
}

/// A sampled history of the (possibly ensemble-averaged) density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSeries {
    pub times: Vec<f64>,
    pub rhos: Vec<DensityMatrix2>,
    /// Present only for stochastic ensemble averages.
    pub stderr: Option<SeriesStderr>,
}

impl StateSeries {
    pub fn new(times: Vec<f64>, rhos: Vec<DensityMatrix2>) -> Result<Self> {
        if times.len() != rhos.len() || times.is_empty() {
            return Err(Error::GridMismatch(format!(
                "series has {} times but {} states",
                times.len(),
                rhos.len()
            )));
        }
        Ok(Self {
            times,
            rhos,
            stderr: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> (f64, &DensityMatrix2) {
        let i = self.len() - 1;
        (self.times[i], &self.rhos[i])
    }

    /// Bloch vector at sample `i`. Ensemble averages can drift outside the
    /// ball by a few ulps; those are clamped by construction upstream, so
    /// this cannot fail for series produced by this crate.
    pub fn bloch_at(&self, i: usize) -> BlochVector {
        bloch_from_rho(&self.rhos[i]).expect("series states stay inside the Bloch ball")
    }

    pub fn purity_at(&self, i: usize) -> f64 {
        self.rhos[i].purity()
    }

    pub fn purities(&self) -> Vec<f64> {
        self.rhos.iter().map(|r| r.purity()).collect()
    }

    /// Index of the sample closest to time `t`.
    pub fn index_of(&self, t: f64) -> usize {
        let mut best = 0;
        let mut err = f64::INFINITY;
        for (i, &ti) in self.times.iter().enumerate() {
            let e = (ti - t).abs();
            if e < err {
                err = e;
                best = i;
            }
        }
        best
    }

    /// Checks that two series share a grid before pointwise comparison.
    pub fn assert_same_grid(&self, other: &Self) -> Result<()> {
        if self.times.len() != other.times.len()
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
        {
            return Err(Error::GridMismatch(
                "series were sampled on different time grids".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn grid_covers_span_inclusively() {
        let g = TimeGrid::new(2.0, 0.5).unwrap();
        assert_eq!(g.n_steps(), 4);
        assert_eq!(g.sample_times(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.t_max(), 2.0);
    }

    #[test]
    fn strided_grid_keeps_endpoints() {
        let g = TimeGrid::with_stride(1.0, 0.1, 3).unwrap();
        // Steps 0,3,6,9 plus the final step 10.
        assert_eq!(g.sample_steps(), vec![0, 3, 6, 9, 10]);
        assert_eq!(g.n_samples(), 5);
        let times = g.sample_times();
        assert!((times[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_rounds_to_whole_steps() {
        // 0.9999 / 1e-3 rounds to 1000 steps, not 999.
        let g = TimeGrid::new(0.9999, 1e-3).unwrap();
        assert_eq!(g.n_steps(), 1000);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 0.1).is_err());
        assert!(TimeGrid::new(-1.0, 0.1).is_err());
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, f64::NAN).is_err());
        assert!(TimeGrid::with_stride(1.0, 0.1, 0).is_err());
        assert!(TimeGrid::new(1e12, 1e-6).is_err()); // over the step cap
    }

    #[test]
    fn series_demands_matching_lengths() {
        let rho = DensityMatrix2::new(0.5, 0.5, Complex64::new(0.0, 0.0)).unwrap();
        assert!(StateSeries::new(vec![0.0, 1.0], vec![rho]).is_err());
        let s = StateSeries::new(vec![0.0, 1.0], vec![rho, rho]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.index_of(0.9), 1);
        assert_eq!(s.last().0, 1.0);
    }
}
