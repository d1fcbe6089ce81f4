//! Drive the scenario layer from a built-in preset and render the CSV that
//! the command-line tool would write, without touching the filesystem.
//!
//! ```text
//! cargo run --release --example preset_to_csv
//! ```

// ANCHOR: scenario
use chiralsim::output::render_csv;
use chiralsim::presets::preset;
use chiralsim::scenario::run_scenario;

fn main() -> chiralsim::Result<()> {
    let mut sc = preset("fig2")?;

    // The preset sweeps eleven interaction strengths; keep the first three
    // so the example finishes in seconds.
    sc.sweep.as_mut().unwrap().values.truncate(3);
    sc.validate()?;

    for run in run_scenario(&sc)? {
        let csv = render_csv(&run.series)?;
        let lines: Vec<&str> = csv.lines().collect();
        println!("--- {} ({} rows) ---", run.label, lines.len() - 2);
        for line in lines.iter().take(4) {
            println!("{line}");
        }
    }
    Ok(())
}
// ANCHOR_END: scenario
