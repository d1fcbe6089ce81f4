//! Dynamics of a two-well chiral doublet: analytic dephasing solutions,
//! mean-field interaction flows, and continuously measured stochastic
//! trajectory ensembles.
//!
//! The library models a molecule hopping between left- and right-handed
//! configurations `|L⟩`, `|R⟩` under three engines that share one state
//! vocabulary ([`types`]) and one time-series format ([`series`]):
//!
//! - [`analytic`] — closed-form solutions of the dephasing Bloch
//!   equations for the non-interacting doublet, exact for any rates.
//! - [`meanfield`] — deterministic propagation with mean-field
//!   intermolecular interactions; exhibits self-trapping above the
//!   critical interaction strength `|v| = 4`.
//! - [`stochastic`] + [`ensemble`] — quantum-trajectory unraveling of
//!   continuous chirality measurement on top of the mean-field flow,
//!   averaged over reproducible noise realizations.
//!
//! Batch work goes through [`scenario`] (validated run descriptions,
//! sweeps), [`config`] (TOML round-trip), [`presets`] (built-in catalog),
//! and [`output`] (CSV + manifest rendering); the `chiralsim-cli` crate
//! wraps those in a command line.
//!
//! # Quickstart
//!
//! Average 500 measured trajectories in the self-trapped regime and read
//! off the final right-well population and purity:
//!
//! ```
//! use chiralsim::ensemble::{run_ensemble, EnsembleConfig};
//! use chiralsim::series::TimeGrid;
//! use chiralsim::stochastic::DephasingScaling;
//! use chiralsim::types::{InitialState, ModelParams};
//!
//! let params = ModelParams::new(1.0, 5.0, 1.6e-3)?; // Ω, v, Γ
//! let grid = TimeGrid::with_stride(20.0, 1e-3, 20)?;
//! let cfg = EnsembleConfig {
//!     n_traj: 500,
//!     seed: 7,
//!     scaling: DephasingScaling::Standard,
//! };
//! let ens = run_ensemble(&params, &InitialState::Localized, &grid, &cfg)?;
//!
//! let last = ens.series.len() - 1;
//! assert!(ens.series.rhos[last].rho_rr > 0.5); // still trapped at t = 20
//! assert!(ens.series.purity_at(last) < 1.0); // measurement decohered it
//! # Ok::<(), chiralsim::Error>(())
//! ```
//!
//! Results are bit-identical for a given `(seed, n_traj)` regardless of
//! thread count. The mdbook guide under `book/` walks through each engine
//! with runnable examples.

pub mod analytic;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod meanfield;
pub mod noise;
pub mod output;
pub mod presets;
pub mod scenario;
pub mod series;
pub mod stochastic;
pub mod types;

pub use error::{Error, Result};
