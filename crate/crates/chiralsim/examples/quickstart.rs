//! Smallest end-to-end run: a measured ensemble from a localized start.
//!
//! ```text
//! cargo run --release --example quickstart
//! ```

// ANCHOR: run
use chiralsim::ensemble::{run_ensemble, EnsembleConfig};
use chiralsim::series::TimeGrid;
use chiralsim::types::{InitialState, ModelParams};

fn main() -> chiralsim::Result<()> {
    // Tunneling-scaled parameters: level offset Ω, interaction v,
    // measurement strength Γ (all in units of the tunneling rate).
    let params = ModelParams::new(1.0, 5.0, 1.6e-3)?;

    // Sample every 20th step of a dt = 1e-3 grid up to t = 20.
    let grid = TimeGrid::with_stride(20.0, 1e-3, 20)?;

    let cfg = EnsembleConfig {
        n_traj: 500,
        seed: 7,
        ..EnsembleConfig::default()
    };
    let ens = run_ensemble(&params, &InitialState::Localized, &grid, &cfg)?;

    let last = ens.series.len() - 1;
    println!(
        "t = {:>5.1}  rho_RR = {:.4}  purity = {:.4}  ({} trajectories)",
        ens.series.times[last],
        ens.series.rhos[last].rho_rr,
        ens.series.purity_at(last),
        ens.n_traj,
    );
    Ok(())
}
// ANCHOR_END: run
