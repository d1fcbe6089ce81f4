//! Scenario execution: one configuration drives one of the three engines
//! over an optional parameter sweep, producing labeled series ready for
//! emission.
//!
//! A scenario names an engine (`analytic`, `deterministic`, `stochastic`),
//! an initial state, a parameter set (bare `(ω, γ)` for the analytic engine,
//! rescaled `(Ω, v, Γ)` for the other two), a time grid, and optionally a
//! sweep over one parameter. Sweep points are independent and run
//! concurrently; results come back in sweep order regardless of scheduling.

use rayon::prelude::*;

use crate::ensemble::{run_ensemble, EnsembleConfig};
use crate::error::{Error, Result};
use crate::meanfield;
use crate::series::{StateSeries, TimeGrid};
use crate::stochastic::DephasingScaling;
use crate::types::{bloch_from_rho, InitialState, ModelParams, RawParams};
use crate::{analytic, output};

/// Which solver a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Closed-form dephasing-only solution; bare `(ω, γ)` parameters.
    Analytic,
    /// Mean-field flow without measurement (`Γ = 0`); rescaled parameters.
    Deterministic,
    /// Trajectory ensembles of the measured system; rescaled parameters.
    Stochastic,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Deterministic => "deterministic",
            Self::Stochastic => "stochastic",
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "deterministic" => Ok(Self::Deterministic),
            "stochastic" => Ok(Self::Stochastic),
            other => Err(Error::Config(format!(
                "[model] engine must be one of analytic, deterministic, stochastic (got \"{other}\")"
            ))),
        }
    }
}

/// Parameter set in the engine's native units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSpec {
    /// Bare tunneling/dephasing rates, analytic engine only.
    Raw(RawParams),
    /// Rescaled interacting-model parameters.
    Scaled(ModelParams),
}

/// The swept parameter. `Omega`/`RawGamma` address the bare `(ω, γ)` pair of
/// the analytic engine; `V`/`Gamma` the rescaled pair of the other engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    V,
    Gamma,
    Omega,
    RawGamma,
}

impl SweepParameter {
    pub fn key(&self) -> &'static str {
        match self {
            Self::V => "v",
            Self::Gamma => "Gamma",
            Self::Omega => "omega",
            Self::RawGamma => "gamma",
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v" => Ok(Self::V),
            "Gamma" => Ok(Self::Gamma),
            "omega" => Ok(Self::Omega),
            "gamma" => Ok(Self::RawGamma),
            other => Err(Error::Config(format!(
                "[sweep] parameter must be one of v, Gamma, omega, gamma (got \"{other}\")"
            ))),
        }
    }
}

/// A sweep over one parameter; every other setting is shared by all points.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Output destination preferences carried from the configuration; the final
/// directory also honors a CLI flag and an environment variable upstream.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSpec {
    pub dir: Option<String>,
    pub prefix: Option<String>,
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub engine: Engine,
    pub params: ParamSpec,
    pub scaling: DephasingScaling,
    pub initial: InitialState,
    pub n_traj: usize,
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    pub output_stride: usize,
    pub sweep: Option<Sweep>,
    pub output: OutputSpec,
}

impl Scenario {
    /// Basename used for emitted files.
    pub fn prefix(&self) -> &str {
        self.output.prefix.as_deref().unwrap_or(&self.name)
    }

    /// The integration/sampling grid shared by every sweep point.
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::with_stride(self.t_max, self.dt, self.output_stride)
    }

    /// Structural validation of the engine/parameter/sweep combination.
    pub fn validate(&self) -> Result<()> {
        match (self.engine, &self.params) {
            (Engine::Analytic, ParamSpec::Raw(raw)) => {
                raw.validated()?;
            }
            (Engine::Analytic, ParamSpec::Scaled(_)) => {
                return Err(Error::Config(
                    "[model] engine=analytic takes bare parameters (omega, gamma), \
                     not rescaled ones (Omega, v, Gamma)"
                        .into(),
                ));
            }
            (_, ParamSpec::Raw(_)) => {
                return Err(Error::Config(format!(
                    "[model] engine={} takes rescaled parameters (Omega, v, Gamma), \
                     not bare ones (omega, gamma)",
                    self.engine
                )));
            }
            (Engine::Deterministic, ParamSpec::Scaled(p)) => {
                p.validated()?;
                if p.gamma != 0.0 {
                    return Err(Error::Config(
                        "[model] engine=deterministic requires Gamma = 0; \
                         use engine=stochastic for a measured system"
                            .into(),
                    ));
                }
            }
            (Engine::Stochastic, ParamSpec::Scaled(p)) => {
                p.validated()?;
            }
        }
        self.initial.validated()?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::Config("[sweep] values must be non-empty".into()));
            }
            let raw_param = matches!(sweep.parameter, SweepParameter::Omega | SweepParameter::RawGamma);
            let raw_engine = matches!(self.engine, Engine::Analytic);
            if raw_param != raw_engine {
                return Err(Error::Config(format!(
                    "[sweep] parameter \"{}\" does not apply to engine={}",
                    sweep.parameter.key(),
                    self.engine
                )));
            }
            if self.engine == Engine::Deterministic
                && sweep.parameter == SweepParameter::Gamma
                && sweep.values.iter().any(|&g| g != 0.0)
            {
                return Err(Error::Config(
                    "[sweep] engine=deterministic cannot sweep Gamma over nonzero values".into(),
                ));
            }
        }
        self.grid()?;
        if self.n_traj == 0 {
            return Err(Error::Config("[ensemble] n_traj must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Expands the sweep into per-point scenarios with human-readable labels.
    /// Without a sweep there is a single point labeled by the scenario name.
    pub fn points(&self) -> Result<Vec<(String, Scenario)>> {
        self.validate()?;
        let Some(sweep) = &self.sweep else {
            return Ok(vec![(self.name.clone(), self.clone())]);
        };
        sweep
            .values
            .iter()
            .map(|&value| {
                let mut point = self.clone();
                point.sweep = None;
                match (sweep.parameter, &mut point.params) {
                    (SweepParameter::V, ParamSpec::Scaled(p)) => p.v = value,
                    (SweepParameter::Gamma, ParamSpec::Scaled(p)) => p.gamma = value,
                    (SweepParameter::Omega, ParamSpec::Raw(p)) => p.omega = value,
                    (SweepParameter::RawGamma, ParamSpec::Raw(p)) => p.gamma = value,
                    _ => unreachable!("validate() checked sweep/engine compatibility"),
                }
                point.validate()?;
                let label = format!("{}={}", sweep.parameter.key(), output::fmt_g12(value));
                Ok((label, point))
            })
            .collect()
    }
}

/// Extra information about how a point was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunInfo {
    pub engine: Engine,
    /// Trajectories behind the averages (1 for exact/deterministic output).
    pub n_traj: usize,
    pub aborted: usize,
    pub max_norm_error: f64,
}

/// One sweep point's result.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRun {
    pub label: String,
    pub series: StateSeries,
    /// Standard error of `|ρ_LR|²`, present for stochastic points.
    pub stderr_coherence_sqr: Option<Vec<f64>>,
    pub info: RunInfo,
}

fn run_point(label: String, sc: &Scenario) -> Result<LabeledRun> {
    let grid = sc.grid()?;
    match (sc.engine, &sc.params) {
        (Engine::Analytic, ParamSpec::Raw(raw)) => {
            let b0 = bloch_from_rho(&sc.initial.density()?)?;
            let series = analytic::evolve(raw, &b0, &grid)?;
            Ok(LabeledRun {
                label,
                series,
                stderr_coherence_sqr: None,
                info: RunInfo {
                    engine: sc.engine,
                    n_traj: 1,
                    aborted: 0,
                    max_norm_error: 0.0,
                },
            })
        }
        (Engine::Deterministic, ParamSpec::Scaled(p)) => {
            let series = meanfield::propagate(p, &sc.initial, &grid)?;
            Ok(LabeledRun {
                label,
                series,
                stderr_coherence_sqr: None,
                info: RunInfo {
                    engine: sc.engine,
                    n_traj: 1,
                    aborted: 0,
                    max_norm_error: 0.0,
                },
            })
        }
        (Engine::Stochastic, ParamSpec::Scaled(p)) => {
            let cfg = EnsembleConfig {
                n_traj: sc.n_traj,
                seed: sc.seed,
                scaling: sc.scaling,
            };
            let ens = run_ensemble(p, &sc.initial, &grid, &cfg)?;
            Ok(LabeledRun {
                label,
                series: ens.series,
                stderr_coherence_sqr: Some(ens.stderr_coherence_sqr),
                info: RunInfo {
                    engine: sc.engine,
                    n_traj: ens.n_traj,
                    aborted: ens.aborted,
                    max_norm_error: ens.max_norm_error,
                },
            })
        }
        _ => unreachable!("validate() rejected the combination"),
    }
}

/// Runs every sweep point of a scenario. Points execute concurrently;
/// the returned order matches the sweep order.
pub fn run_scenario(sc: &Scenario) -> Result<Vec<LabeledRun>> {
    let points = sc.points()?;
    points
        .into_par_iter()
        .map(|(label, point)| run_point(label, &point))
        .collect()
}

/// Paired pure-vs-mixed result for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRun {
    pub label: String,
    pub pure: LabeledRun,
    pub mixed: LabeledRun,
    /// `Z_pure − Z_mixed` per sample (twice the ρ_RR difference).
    pub delta_z: Vec<f64>,
    /// `|ρ_LR|²_pure − |ρ_LR|²_mixed` per sample.
    pub delta_coherence_sqr: Vec<f64>,
    pub max_abs_delta_rho_rr: f64,
    pub t_at_max_population: f64,
    pub max_abs_delta_coherence_sqr: f64,
    pub t_at_max_coherence: f64,
    pub distinguishable_by_population: bool,
    pub distinguishable_by_coherence: bool,
}

/// Deterministic engines call two series distinguishable when they differ
/// beyond this absolute tolerance.
pub const DETERMINISTIC_DISTINGUISH_TOL: f64 = 1e-6;
/// Stochastic runs require the difference to exceed this many combined
/// standard errors somewhere on the grid.
pub const STOCHASTIC_DISTINGUISH_SIGMA: f64 = 5.0;

fn max_abs_with_time(times: &[f64], values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut max = 0.0f64;
    let mut at = times.first().copied().unwrap_or(0.0);
    for (i, v) in values.enumerate() {
        if v.abs() > max {
            max = v.abs();
            at = times[i];
        }
    }
    (max, at)
}

/// Is any pointwise difference significant, given optional per-point
/// standard errors from both sides?
fn significant(
    diffs: &[f64],
    se_a: Option<&[f64]>,
    se_b: Option<&[f64]>,
    stochastic: bool,
) -> bool {
    if !stochastic {
        return diffs.iter().any(|d| d.abs() > DETERMINISTIC_DISTINGUISH_TOL);
    }
    diffs.iter().enumerate().any(|(i, d)| {
        let va = se_a.map_or(0.0, |s| s[i] * s[i]);
        let vb = se_b.map_or(0.0, |s| s[i] * s[i]);
        let band = STOCHASTIC_DISTINGUISH_SIGMA * (va + vb).sqrt();
        // With zero estimated error (e.g. exact Γ = 0 points inside a sweep)
        // fall back to the deterministic tolerance.
        d.abs() > band.max(DETERMINISTIC_DISTINGUISH_TOL)
    })
}

/// Runs a pure scenario next to its population-equivalent mixture and
/// reports whether the two are distinguishable, per sweep point.
///
/// The mixture is derived from the pure state's populations
/// (`p_s = |a_s(0)|²`) and evolves under the same engine, grid, and seed;
/// sharing the seed pairs the noise streams across the two ensembles, which
/// only reduces the variance of the difference.
pub fn compare_pure_mixed(sc: &Scenario) -> Result<Vec<ComparisonRun>> {
    if !sc.initial.is_pure() {
        return Err(Error::Config(
            "[initial] compare-pure-mixed requires a pure initial state \
             (the mixture is derived from it)"
                .into(),
        ));
    }
    let points = sc.points()?;
    points
        .into_par_iter()
        .map(|(label, point)| {
            let pure = run_point(label.clone(), &point)?;
            let mut mixed_sc = point.clone();
            mixed_sc.initial = point.initial.dephased();
            let mixed = run_point(label.clone(), &mixed_sc)?;
            pure.series.assert_same_grid(&mixed.series)?;

            let times = &pure.series.times;
            let n = times.len();
            let mut delta_rho_rr = Vec::with_capacity(n);
            let mut delta_z = Vec::with_capacity(n);
            let mut delta_coh = Vec::with_capacity(n);
            for i in 0..n {
                let (p, m) = (&pure.series.rhos[i], &mixed.series.rhos[i]);
                let d = p.rho_rr - m.rho_rr;
                delta_rho_rr.push(d);
                delta_z.push(2.0 * d);
                delta_coh.push(p.rho_lr.norm_sqr() - m.rho_lr.norm_sqr());
            }
            let stochastic = point.engine == Engine::Stochastic;
            let se = |run: &LabeledRun| run.series.stderr.as_ref().map(|s| s.rho_rr.clone());
            let (max_pop, t_pop) = max_abs_with_time(times, delta_rho_rr.iter().copied());
            let (max_coh, t_coh) = max_abs_with_time(times, delta_coh.iter().copied());
            let pop_sig = significant(
                &delta_rho_rr,
                se(&pure).as_deref(),
                se(&mixed).as_deref(),
                stochastic,
            );
            let coh_sig = significant(
                &delta_coh,
                pure.stderr_coherence_sqr.as_deref(),
                mixed.stderr_coherence_sqr.as_deref(),
                stochastic,
            );
            Ok(ComparisonRun {
                label,
                pure,
                mixed,
                delta_z,
                delta_coherence_sqr: delta_coh,
                max_abs_delta_rho_rr: max_pop,
                t_at_max_population: t_pop,
                max_abs_delta_coherence_sqr: max_coh,
                t_at_max_coherence: t_coh,
                distinguishable_by_population: pop_sig,
                distinguishable_by_coherence: coh_sig,
            })
        })
        .collect()
}
