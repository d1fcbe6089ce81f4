//! File emission: versioned CSV series, comparison tables, and run
//! manifests that reproduce a run bit-exactly.
//!
//! Every CSV starts with the schema comment `# chiralsim-csv-v1` (or
//! `# chiralsim-compare-csv-v1` for paired tables) followed by a header
//! row. Values are written with 12 significant digits in the shortest
//! form that round-trips, so re-running the same scenario re-emits
//! byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::scenario::{ComparisonRun, Engine, LabeledRun, Scenario};
use crate::series::StateSeries;
use crate::types::bloch_from_rho;

/// Schema tag for single-run series files.
pub const CSV_SCHEMA: &str = "# chiralsim-csv-v1";
/// Schema tag for pure-vs-mixed comparison files.
pub const COMPARE_CSV_SCHEMA: &str = "# chiralsim-compare-csv-v1";

/// Formats with 12 significant digits, in the shortest decimal form that
/// parses back to the rounded value (`0` → `"0"`, `1` → `"1"`). Plain
/// decimal keeps columns and sweep labels uniform; scientific notation
/// takes over only for extreme magnitudes where plain decimal sprawls.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float reparses");
    let plain = format!("{rounded}");
    if plain.len() <= 18 {
        plain
    } else {
        format!("{rounded:e}")
    }
}

fn push_row(out: &mut String, fields: &[f64]) {
    for (i, x) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_g12(*x));
    }
    out.push('\n');
}

/// Renders one series as CSV text. Standard-error columns appear exactly
/// when the series carries them.
pub fn render_csv(series: &StateSeries) -> Result<String> {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA);
    out.push('\n');
    out.push_str("t,rho_RR,rho_LL,re_rho_LR,im_rho_LR,X,Y,Z,purity");
    if series.stderr.is_some() {
        out.push_str(",stderr_rho_RR,stderr_purity");
    }
    out.push('\n');
    for (i, rho) in series.rhos.iter().enumerate() {
        let b = bloch_from_rho(rho)?;
        let mut fields = vec![
            series.times[i],
            rho.rho_rr,
            rho.rho_ll,
            rho.rho_lr.re,
            rho.rho_lr.im,
            b.x,
            b.y,
            b.z,
            b.purity(),
        ];
        if let Some(se) = &series.stderr {
            fields.push(se.rho_rr[i]);
            fields.push(se.purity[i]);
        }
        push_row(&mut out, &fields);
    }
    Ok(out)
}

/// Renders a pure-vs-mixed comparison as CSV text.
pub fn render_compare_csv(run: &ComparisonRun) -> Result<String> {
    let mut out = String::new();
    out.push_str(COMPARE_CSV_SCHEMA);
    out.push('\n');
    out.push_str(
        "t,rho_RR_pure,rho_RR_mixed,delta_rho_RR,delta_Z,\
         coherence_sqr_pure,coherence_sqr_mixed,delta_coherence_sqr\n",
    );
    let times = &run.pure.series.times;
    for i in 0..times.len() {
        let p = &run.pure.series.rhos[i];
        let m = &run.mixed.series.rhos[i];
        push_row(
            &mut out,
            &[
                times[i],
                p.rho_rr,
                m.rho_rr,
                p.rho_rr - m.rho_rr,
                run.delta_z[i],
                p.rho_lr.norm_sqr(),
                m.rho_lr.norm_sqr(),
                run.delta_coherence_sqr[i],
            ],
        );
    }
    Ok(out)
}

/// Replaces `=` so sweep labels stay filesystem-friendly.
fn sanitize_label(label: &str) -> String {
    label.replace('=', "_")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Metadata recorded alongside every emission.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    /// Library version that produced the files.
    pub code_version: String,
    /// Wall-clock duration of the computation, in seconds.
    pub wall_time_s: f64,
}

impl RunMeta {
    pub fn now(wall_time_s: f64) -> Self {
        Self {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s,
        }
    }
}

/// Emits one CSV per labeled run plus a manifest, returning the paths
/// written (manifest last). Files are named `{prefix}_{label}.csv` under a
/// sweep and `{prefix}.csv` otherwise.
pub fn emit_run(
    dir: &Path,
    scenario: &Scenario,
    runs: &[LabeledRun],
    meta: &RunMeta,
) -> Result<Vec<PathBuf>> {
    let prefix = scenario.prefix();
    let mut written = Vec::new();
    for run in runs {
        let file = if scenario.sweep.is_some() {
            format!("{prefix}_{}.csv", sanitize_label(&run.label))
        } else {
            format!("{prefix}.csv")
        };
        let path = dir.join(file);
        write_text(&path, &render_csv(&run.series)?)?;
        written.push(path);
    }
    let manifest = dir.join(format!("{prefix}_manifest.toml"));
    write_text(&manifest, &crate::config::render_manifest(scenario, meta)?)?;
    written.push(manifest);
    Ok(written)
}

/// Emits one comparison CSV per sweep point plus a manifest; the manifest's
/// scenario section reproduces the *pure* run (the mixture is derived).
pub fn emit_comparison(
    dir: &Path,
    scenario: &Scenario,
    runs: &[ComparisonRun],
    meta: &RunMeta,
) -> Result<Vec<PathBuf>> {
    let prefix = scenario.prefix();
    let mut written = Vec::new();
    for run in runs {
        let file = if scenario.sweep.is_some() {
            format!("{prefix}_{}_compare.csv", sanitize_label(&run.label))
        } else {
            format!("{prefix}_compare.csv")
        };
        let path = dir.join(file);
        write_text(&path, &render_compare_csv(run)?)?;
        written.push(path);
    }
    let manifest = dir.join(format!("{prefix}_compare_manifest.toml"));
    write_text(&manifest, &crate::config::render_manifest(scenario, meta)?)?;
    written.push(manifest);
    Ok(written)
}

/// One-line human summary of a point, for terminal output.
pub fn describe_run(run: &LabeledRun) -> String {
    let mut line = String::new();
    let last = run.series.len() - 1;
    let _ = write!(
        line,
        "{}: {} samples, rho_RR({}) = {}",
        run.label,
        run.series.len(),
        fmt_g12(*run.series.times.last().expect("non-empty series")),
        fmt_g12(run.series.rhos[last].rho_rr),
    );
    if run.info.engine == Engine::Stochastic {
        let _ = write!(
            line,
            " ± {} ({} trajectories, {} aborted)",
            fmt_g12(
                run.series
                    .stderr
                    .as_ref()
                    .map_or(0.0, |se| se.rho_rr[last])
            ),
            run.info.n_traj,
            run.info.aborted,
        );
    }
    line
}

/// One-line human summary of a comparison, for terminal output.
pub fn describe_comparison(run: &ComparisonRun) -> String {
    format!(
        "{}: max |Δrho_RR| = {} at t = {} ({}), max |Δ|rho_LR|²| = {} at t = {} ({})",
        run.label,
        fmt_g12(run.max_abs_delta_rho_rr),
        fmt_g12(run.t_at_max_population),
        if run.distinguishable_by_population {
            "distinguishable"
        } else {
            "not distinguishable"
        },
        fmt_g12(run.max_abs_delta_coherence_sqr),
        fmt_g12(run.t_at_max_coherence),
        if run.distinguishable_by_coherence {
            "distinguishable"
        } else {
            "not distinguishable"
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SeriesStderr;
    use crate::types::DensityMatrix2;
    use num_complex::Complex64;

    #[test]
    fn formatter_uses_shortest_roundtrip_form() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(-0.0), "0");
        assert_eq!(fmt_g12(1.0), "1");
        assert_eq!(fmt_g12(-1.0), "-1");
        assert_eq!(fmt_g12(0.5), "0.5");
        assert_eq!(fmt_g12(1.6e-4), "0.00016");
        assert_eq!(fmt_g12(1.6e-3), "0.0016");
        assert_eq!(fmt_g12(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_g12(1e-300), "1e-300");
        assert_eq!(fmt_g12(1.23456789012e-7), "1.23456789012e-7");
        assert_eq!(fmt_g12(123456789012345.0), "123456789012000");
    }

    #[test]
    fn formatter_keeps_twelve_significant_digits() {
        let x = std::f64::consts::PI;
        assert_eq!(fmt_g12(x), "3.14159265359");
        // Idempotent: formatting the reparsed value changes nothing.
        let y: f64 = fmt_g12(x).parse().unwrap();
        assert_eq!(fmt_g12(y), "3.14159265359");
    }

    fn tiny_series(with_stderr: bool) -> StateSeries {
        let rho0 = DensityMatrix2::new(0.0, 1.0, Complex64::new(0.0, 0.0)).unwrap();
        let rho1 = DensityMatrix2::new(0.25, 0.75, Complex64::new(0.25, -0.25)).unwrap();
        let stderr = with_stderr.then(|| SeriesStderr {
            rho_rr: vec![0.0, 0.01],
            purity: vec![0.0, 0.02],
        });
        StateSeries {
            times: vec![0.0, 1.0],
            rhos: vec![rho0, rho1],
            stderr,
        }
    }

    #[test]
    fn csv_has_schema_header_and_localized_first_row() {
        let text = render_csv(&tiny_series(false)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# chiralsim-csv-v1");
        assert_eq!(lines[1], "t,rho_RR,rho_LL,re_rho_LR,im_rho_LR,X,Y,Z,purity");
        assert_eq!(lines[2], "0,1,0,0,0,0,0,1,1");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn csv_stderr_columns_present_exactly_when_carried() {
        let text = render_csv(&tiny_series(true)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[1],
            "t,rho_RR,rho_LL,re_rho_LR,im_rho_LR,X,Y,Z,purity,stderr_rho_RR,stderr_purity"
        );
        assert_eq!(lines[2], "0,1,0,0,0,0,0,1,1,0,0");
        assert!(lines[3].ends_with(",0.01,0.02"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let s = tiny_series(true);
        assert_eq!(render_csv(&s).unwrap(), render_csv(&s).unwrap());
    }

    #[test]
    fn labels_sanitize_for_filenames() {
        assert_eq!(sanitize_label("v=-3.9"), "v_-3.9");
        assert_eq!(sanitize_label("Gamma=0.0016"), "Gamma_0.0016");
    }
}
