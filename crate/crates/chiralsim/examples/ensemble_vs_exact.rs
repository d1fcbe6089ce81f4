//! Convergence check you can eyeball: with the interaction switched off the
//! trajectory average must reproduce the closed-form dephasing solution.
//!
//! ```text
//! cargo run --release --example ensemble_vs_exact
//! ```

// ANCHOR: compare
use chiralsim::analytic::bloch_at;
use chiralsim::ensemble::{run_ensemble, EnsembleConfig};
use chiralsim::series::TimeGrid;
use chiralsim::types::{bloch_from_rho, InitialState, ModelParams, RawParams};

fn main() -> chiralsim::Result<()> {
    let gamma = 1.6e-2;
    let init = InitialState::Localized;

    let params = ModelParams::new(1.0, 0.0, gamma)?;
    let grid = TimeGrid::with_stride(20.0, 1e-3, 20)?;
    let cfg = EnsembleConfig {
        n_traj: 2_000,
        seed: 1,
        ..EnsembleConfig::default()
    };
    let ens = run_ensemble(&params, &init, &grid, &cfg)?;

    // With v = 0 the scaled model is the bare dephasing problem with
    // tunneling 1 and measurement strength Γ.
    let raw = RawParams::new(1.0, gamma)?;
    let b0 = bloch_from_rho(&init.density()?)?;

    let se = ens.series.stderr.as_ref().expect("stochastic run has errors");
    println!("    t     Z(ensemble)   Z(exact)   stderr");
    for i in (0..ens.series.len()).step_by(200) {
        let t = ens.series.times[i];
        println!(
            "{t:>6.1}   {:+.4}      {:+.4}    {:.4}",
            ens.series.bloch_at(i).z,
            bloch_at(&raw, &b0, t).z,
            2.0 * se.rho_rr[i],
        );
    }
    Ok(())
}
// ANCHOR_END: compare
