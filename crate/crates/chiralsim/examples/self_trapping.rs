//! Self-trapping scan: minimum right-well population of a localized start
//! as the chiral interaction strength crosses the threshold.
//!
//! ```text
//! cargo run --release --example self_trapping
//! ```

// ANCHOR: scan
use chiralsim::meanfield::{classify_trapping, min_rho_rr, propagate};
use chiralsim::series::TimeGrid;
use chiralsim::types::{InitialState, ModelParams};

fn main() -> chiralsim::Result<()> {
    let grid = TimeGrid::with_stride(20.0, 1e-3, 20)?;
    for v in [0.0, 3.0, 3.9, 5.0, 10.0] {
        let p = ModelParams::new(1.0, v, 0.0)?;
        let series = propagate(&p, &InitialState::Localized, &grid)?;
        let floor = min_rho_rr(&series);
        println!(
            "v = {v:>4}: min rho_RR = {floor:.4}  predicted {:?}",
            classify_trapping(v)
        );
    }
    Ok(())
}
// ANCHOR_END: scan
