//! TOML configuration parsing and manifest emission.
//!
//! A run is described by a small TOML document with sections `[model]`,
//! `[initial]`, `[ensemble]`, optional `[sweep]`, and optional `[output]`.
//! The same schema, plus a `[run]` metadata section, serves as the manifest
//! written next to every emission — so a manifest parses back into exactly
//! the scenario that produced it.
//!
//! ```
//! use chiralsim::config::{parse_config, render_config};
//!
//! let text = r#"
//!     name = "demo"
//!
//!     [model]
//!     engine = "stochastic"
//!     Omega = 1.0
//!     v = 5.0
//!     Gamma = 1.6e-3
//!
//!     [initial]
//!     state = "LS"
//!
//!     [ensemble]
//!     n_traj = 200
//!     t_max = 2.0
//! "#;
//! let scenario = parse_config(text).unwrap();
//! assert_eq!(scenario.n_traj, 200);
//! assert_eq!(scenario.dt, 1e-3); // default
//! let roundtrip = parse_config(&render_config(&scenario).unwrap()).unwrap();
//! assert_eq!(roundtrip, scenario);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::RunMeta;
use crate::scenario::{Engine, OutputSpec, ParamSpec, Scenario, Sweep, SweepParameter};
use crate::stochastic::DephasingScaling;
use crate::types::{InitialState, ModelParams, RawParams};

/// Default trajectory count for stochastic runs.
pub const DEFAULT_N_TRAJ: usize = 10_000;
/// Default integration step (rescaled time units).
pub const DEFAULT_DT: f64 = 1e-3;
/// Default horizon (rescaled time units).
pub const DEFAULT_T_MAX: f64 = 20.0;
/// Default ensemble seed.
pub const DEFAULT_SEED: u64 = 1;
/// Default sampling stride (every N-th step is recorded).
pub const DEFAULT_OUTPUT_STRIDE: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    engine: String,
    /// Rescaled level offset Ω (scaled engines).
    #[serde(rename = "Omega", skip_serializing_if = "Option::is_none")]
    omega_scaled: Option<f64>,
    /// Rescaled interaction difference v (scaled engines).
    #[serde(skip_serializing_if = "Option::is_none")]
    v: Option<f64>,
    /// Rescaled measurement rate Γ (stochastic engine).
    #[serde(rename = "Gamma", skip_serializing_if = "Option::is_none")]
    gamma_scaled: Option<f64>,
    /// Dephasing-coefficient convention (stochastic engine).
    #[serde(skip_serializing_if = "Option::is_none")]
    scaling: Option<DephasingScaling>,
    /// Bare tunneling rate ω (analytic engine).
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    /// Bare dephasing rate γ (analytic engine).
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    /// Bare level asymmetry (analytic engine; default 0).
    #[serde(rename = "E_m", skip_serializing_if = "Option::is_none")]
    e_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSection {
    /// One of `LS`, `WDS`, `SDS`, `custom`, `mixed`.
    state: String,
    /// `[re, im]` left amplitude (`state = "custom"` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    a_l: Option<[f64; 2]>,
    /// `[re, im]` right amplitude (`state = "custom"` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    a_r: Option<[f64; 2]>,
    /// Left weight (`state = "mixed"` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    p_l: Option<f64>,
    /// Right weight (`state = "mixed"` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    p_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EnsembleSection {
    n_traj: usize,
    dt: f64,
    t_max: f64,
    seed: u64,
    output_stride: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            n_traj: DEFAULT_N_TRAJ,
            dt: DEFAULT_DT,
            t_max: DEFAULT_T_MAX,
            seed: DEFAULT_SEED,
            output_stride: DEFAULT_OUTPUT_STRIDE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    /// One of `v`, `Gamma` (scaled engines) or `omega`, `gamma` (analytic).
    parameter: String,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prefix: Option<String>,
}

/// Provenance metadata in manifests; ignored when re-parsing into a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    code_version: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    model: ModelSection,
    initial: InitialSection,
    #[serde(default, skip_serializing_if = "is_default_ensemble")]
    ensemble: EnsembleSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "is_default_output")]
    output: OutputSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<RunSection>,
}

fn is_default_ensemble(e: &EnsembleSection) -> bool {
    *e == EnsembleSection::default()
}

fn is_default_output(o: &OutputSection) -> bool {
    *o == OutputSection::default()
}

fn require(field: Option<f64>, msg: &str) -> Result<f64> {
    field.ok_or_else(|| Error::Config(msg.to_string()))
}

fn forbid(present: bool, msg: &str) -> Result<()> {
    if present {
        Err(Error::Config(msg.to_string()))
    } else {
        Ok(())
    }
}

impl ConfigFile {
    fn into_scenario(self, default_name: &str) -> Result<Scenario> {
        let engine: Engine = self.model.engine.parse()?;
        let m = &self.model;

        let (params, scaling) = match engine {
            Engine::Analytic => {
                forbid(
                    m.omega_scaled.is_some() || m.v.is_some() || m.gamma_scaled.is_some(),
                    "[model] engine=analytic takes bare parameters omega, gamma \
                     (and optional E_m); Omega/v/Gamma do not apply",
                )?;
                forbid(
                    m.scaling.is_some(),
                    "[model] scaling only applies to engine=stochastic",
                )?;
                let raw = RawParams {
                    omega: require(m.omega, "[model] engine=analytic requires omega")?,
                    gamma: require(m.gamma, "[model] engine=analytic requires gamma")?,
                    e_m: m.e_m.unwrap_or(0.0),
                }
                .validated()?;
                (ParamSpec::Raw(raw), DephasingScaling::Standard)
            }
            Engine::Deterministic | Engine::Stochastic => {
                forbid(
                    m.omega.is_some() || m.gamma.is_some() || m.e_m.is_some(),
                    "[model] scaled engines take Omega, v, Gamma; \
                     omega/gamma/E_m only apply to engine=analytic",
                )?;
                let gamma = if engine == Engine::Deterministic {
                    forbid(
                        m.scaling.is_some(),
                        "[model] scaling only applies to engine=stochastic",
                    )?;
                    let g = m.gamma_scaled.unwrap_or(0.0);
                    if g != 0.0 {
                        return Err(Error::Config(
                            "[model] engine=deterministic requires Gamma = 0; \
                             use engine=stochastic for a measured system"
                                .into(),
                        ));
                    }
                    g
                } else {
                    require(
                        m.gamma_scaled,
                        "[model] engine=stochastic requires Gamma (the measurement rate)",
                    )?
                };
                let params = ModelParams {
                    offset: require(
                        m.omega_scaled,
                        "[model] scaled engines require Omega (the rescaled level offset)",
                    )?,
                    v: require(
                        m.v,
                        "[model] scaled engines require v (the rescaled interaction difference)",
                    )?,
                    gamma,
                }
                .validated()?;
                (ParamSpec::Scaled(params), m.scaling.unwrap_or_default())
            }
        };

        let i = &self.initial;
        let has_amps = i.a_l.is_some() || i.a_r.is_some();
        let has_weights = i.p_l.is_some() || i.p_r.is_some();
        let initial = match i.state.as_str() {
            "LS" | "WDS" | "SDS" => {
                forbid(
                    has_amps || has_weights,
                    "[initial] named states take no additional fields",
                )?;
                match i.state.as_str() {
                    "LS" => InitialState::Localized,
                    "WDS" => InitialState::WeaklyDelocalized,
                    _ => InitialState::StronglyDelocalized,
                }
            }
            "custom" => {
                forbid(has_weights, "[initial] state=custom takes a_l, a_r, not weights")?;
                let a_l = i.a_l.ok_or_else(|| {
                    Error::Config("[initial] state=custom requires a_l = [re, im]".into())
                })?;
                let a_r = i.a_r.ok_or_else(|| {
                    Error::Config("[initial] state=custom requires a_r = [re, im]".into())
                })?;
                InitialState::Custom {
                    a_l: num_complex::Complex64::new(a_l[0], a_l[1]),
                    a_r: num_complex::Complex64::new(a_r[0], a_r[1]),
                }
            }
            "mixed" => {
                forbid(has_amps, "[initial] state=mixed takes p_l, p_r, not amplitudes")?;
                InitialState::Mixed {
                    p_l: require(i.p_l, "[initial] state=mixed requires p_l")?,
                    p_r: require(i.p_r, "[initial] state=mixed requires p_r")?,
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "[initial] state must be one of LS, WDS, SDS, custom, mixed (got \"{other}\")"
                )));
            }
        };

        let sweep = self
            .sweep
            .map(|s| -> Result<Sweep> {
                Ok(Sweep {
                    parameter: s.parameter.parse::<SweepParameter>()?,
                    values: s.values,
                })
            })
            .transpose()?;

        let sc = Scenario {
            name: self.name.unwrap_or_else(|| default_name.to_string()),
            engine,
            params,
            scaling,
            initial,
            n_traj: self.ensemble.n_traj,
            dt: self.ensemble.dt,
            t_max: self.ensemble.t_max,
            seed: self.ensemble.seed,
            output_stride: self.ensemble.output_stride,
            sweep,
            output: OutputSpec {
                dir: self.output.dir,
                prefix: self.output.prefix,
            },
        };
        sc.validate()?;
        Ok(sc)
    }

    fn from_scenario(sc: &Scenario, meta: Option<&RunMeta>) -> Self {
        let model = match (&sc.params, sc.engine) {
            (ParamSpec::Raw(raw), _) => ModelSection {
                engine: sc.engine.as_str().to_string(),
                omega_scaled: None,
                v: None,
                gamma_scaled: None,
                scaling: None,
                omega: Some(raw.omega),
                gamma: Some(raw.gamma),
                e_m: (raw.e_m != 0.0).then_some(raw.e_m),
            },
            (ParamSpec::Scaled(p), engine) => ModelSection {
                engine: sc.engine.as_str().to_string(),
                omega_scaled: Some(p.offset),
                v: Some(p.v),
                gamma_scaled: Some(p.gamma),
                scaling: (engine == Engine::Stochastic).then_some(sc.scaling),
                omega: None,
                gamma: None,
                e_m: None,
            },
        };
        let initial = match sc.initial {
            InitialState::Localized => InitialSection {
                state: "LS".into(),
                a_l: None,
                a_r: None,
                p_l: None,
                p_r: None,
            },
            InitialState::WeaklyDelocalized => InitialSection {
                state: "WDS".into(),
                a_l: None,
                a_r: None,
                p_l: None,
                p_r: None,
            },
            InitialState::StronglyDelocalized => InitialSection {
                state: "SDS".into(),
                a_l: None,
                a_r: None,
                p_l: None,
                p_r: None,
            },
            InitialState::Custom { a_l, a_r } => InitialSection {
                state: "custom".into(),
                a_l: Some([a_l.re, a_l.im]),
                a_r: Some([a_r.re, a_r.im]),
                p_l: None,
                p_r: None,
            },
            InitialState::Mixed { p_l, p_r } => InitialSection {
                state: "mixed".into(),
                a_l: None,
                a_r: None,
                p_l: Some(p_l),
                p_r: Some(p_r),
            },
        };
        Self {
            name: Some(sc.name.clone()),
            model,
            initial,
            ensemble: EnsembleSection {
                n_traj: sc.n_traj,
                dt: sc.dt,
                t_max: sc.t_max,
                seed: sc.seed,
                output_stride: sc.output_stride,
            },
            sweep: sc.sweep.as_ref().map(|s| SweepSection {
                parameter: s.parameter.key().to_string(),
                values: s.values.clone(),
            }),
            output: OutputSection {
                dir: sc.output.dir.clone(),
                prefix: sc.output.prefix.clone(),
            },
            run: meta.map(|m| RunSection {
                code_version: Some(m.code_version.clone()),
                wall_time_s: Some(m.wall_time_s),
            }),
        }
    }
}

/// Parses configuration TOML into a validated scenario. Unknown fields,
/// type mismatches, and TOML syntax errors are reported with the line and
/// field the parser stopped at; semantic violations name the section and
/// field in the message.
pub fn parse_config(text: &str) -> Result<Scenario> {
    parse_config_named(text, "run")
}

/// Like [`parse_config`], but uses `default_name` when the document has no
/// top-level `name` (the CLI passes the file stem or preset name).
pub fn parse_config_named(text: &str, default_name: &str) -> Result<Scenario> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    file.into_scenario(default_name)
}

/// Renders a scenario back to its canonical configuration TOML.
pub fn render_config(sc: &Scenario) -> Result<String> {
    render(ConfigFile::from_scenario(sc, None))
}

/// Renders a scenario plus run metadata as a manifest: a parseable
/// configuration document that reproduces the run bit-exactly.
pub fn render_manifest(sc: &Scenario, meta: &RunMeta) -> Result<String> {
    render(ConfigFile::from_scenario(sc, Some(meta)))
}

fn render(file: ConfigFile) -> Result<String> {
    toml::to_string_pretty(&file).map_err(|e| Error::Config(format!("manifest rendering: {e}")))
}
