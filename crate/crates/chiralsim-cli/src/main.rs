//! `chiralsim` — batch runner for two-well chiral dynamics.
//!
//! Verbs: `run` a config file or preset, `list-presets`, run a pure state
//! next to its dephased mixture with `compare-pure-mixed`, or `validate` a
//! configuration without running it.
//!
//! Exit codes: 0 on success, 1 for configuration/usage errors, 2 for
//! runtime or numerical failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use chiralsim::config::{parse_config_named, render_config};
use chiralsim::output::{self, RunMeta};
use chiralsim::scenario::{compare_pure_mixed, run_scenario, Engine, Scenario};
use chiralsim::types::InitialState;
use chiralsim::{presets, Error};

/// Environment variable holding the default output directory.
const OUT_ENV: &str = "CHIRALSIM_OUT";

#[derive(Parser)]
#[command(
    name = "chiralsim",
    version,
    about = "Two-well chiral dynamics: analytic dephasing, mean-field flows, \
             and continuously measured trajectory ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML config file or a built-in preset name
    Run {
        /// Path to a config file, or a preset name (see `list-presets`)
        source: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the built-in presets
    ListPresets,
    /// Run a pure scenario next to its dephased mixture and report whether
    /// populations or coherences can tell them apart
    ComparePureMixed {
        /// Path to a config file, or a preset name (pure initial state)
        source: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Parse and validate a config or preset without running it
    Validate {
        /// Path to a config file, or a preset name
        source: String,
    },
}

#[derive(Args)]
struct Overrides {
    /// Override the ensemble seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trajectory count
    #[arg(long = "n-traj")]
    n_traj: Option<usize>,
    /// Override the integration step
    #[arg(long)]
    dt: Option<f64>,
    /// Output directory (beats config [output].dir and $CHIRALSIM_OUT)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A file path wins over a preset of the same name; `./fig2` or `fig2.toml`
/// always reads the file, bare `fig2` falls back to the preset.
fn load_scenario(source: &str) -> Result<Scenario, Error> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("run");
        return parse_config_named(&text, stem);
    }
    if let Some(sc) = presets::preset_text(source).map(|_| presets::preset(source)) {
        return sc;
    }
    if source.contains(std::path::MAIN_SEPARATOR) || source.ends_with(".toml") {
        return Err(Error::Config(format!("no such config file: {source}")));
    }
    Err(Error::UnknownPreset(source.to_string()))
}

fn apply_overrides(sc: &mut Scenario, o: &Overrides) -> Result<(), Error> {
    if let Some(seed) = o.seed {
        sc.seed = seed;
    }
    if let Some(n) = o.n_traj {
        sc.n_traj = n;
    }
    if let Some(dt) = o.dt {
        sc.dt = dt;
    }
    if let Some(dir) = &o.out {
        sc.output.dir = Some(dir.display().to_string());
    }
    sc.validate()
}

/// Resolved output directory: CLI flag (already folded into the scenario),
/// then config, then `$CHIRALSIM_OUT`, then the working directory.
fn out_dir(sc: &Scenario) -> PathBuf {
    sc.output
        .dir
        .as_ref()
        .map(PathBuf::from)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn initial_tag(initial: &InitialState) -> &'static str {
    match initial {
        InitialState::Localized => "LS",
        InitialState::WeaklyDelocalized => "WDS",
        InitialState::StronglyDelocalized => "SDS",
        InitialState::Custom { .. } => "custom",
        InitialState::Mixed { .. } => "mixed",
    }
}

fn sweep_tag(sc: &Scenario) -> String {
    match &sc.sweep {
        Some(s) => format!("sweep {} ({} points)", s.parameter.key(), s.values.len()),
        None => "single point".to_string(),
    }
}

fn first_comment_line(text: &str) -> &str {
    text.lines()
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .map(str::trim)
        .unwrap_or("")
}

fn cmd_run(source: &str, overrides: &Overrides) -> Result<(), Error> {
    let mut sc = load_scenario(source)?;
    apply_overrides(&mut sc, overrides)?;
    let dir = out_dir(&sc);
    sc.output.dir = Some(dir.display().to_string());
    eprintln!(
        "running {} ({}, {}, {})",
        sc.name,
        sc.engine,
        initial_tag(&sc.initial),
        sweep_tag(&sc)
    );
    let t0 = Instant::now();
    let runs = run_scenario(&sc)?;
    let meta = RunMeta::now(t0.elapsed().as_secs_f64());
    let paths = output::emit_run(&dir, &sc, &runs, &meta)?;
    for run in &runs {
        println!("{}", output::describe_run(run));
    }
    for path in &paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_compare(source: &str, overrides: &Overrides) -> Result<(), Error> {
    let mut sc = load_scenario(source)?;
    apply_overrides(&mut sc, overrides)?;
    let dir = out_dir(&sc);
    sc.output.dir = Some(dir.display().to_string());
    eprintln!(
        "comparing {} against its dephased mixture ({}, {}, {})",
        sc.name,
        sc.engine,
        initial_tag(&sc.initial),
        sweep_tag(&sc)
    );
    let t0 = Instant::now();
    let runs = compare_pure_mixed(&sc)?;
    let meta = RunMeta::now(t0.elapsed().as_secs_f64());
    let paths = output::emit_comparison(&dir, &sc, &runs, &meta)?;
    for run in &runs {
        println!("{}", output::describe_comparison(run));
    }
    let by_pop = runs.iter().filter(|r| r.distinguishable_by_population).count();
    let by_coh = runs.iter().filter(|r| r.distinguishable_by_coherence).count();
    println!(
        "{} of {} points distinguishable by population, {} by coherence",
        by_pop,
        runs.len(),
        by_coh
    );
    for path in &paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_validate(source: &str) -> Result<(), Error> {
    let sc = load_scenario(source)?;
    let grid = sc.grid()?;
    let points = sc.points()?.len();
    println!(
        "ok: {} ({}, {}, {}, {} samples over t ≤ {})",
        sc.name,
        sc.engine,
        initial_tag(&sc.initial),
        if points == 1 {
            "1 point".to_string()
        } else {
            format!("{points} points")
        },
        grid.n_samples(),
        output::fmt_g12(grid.t_max()),
    );
    println!("{}", render_config(&sc)?.trim_end());
    Ok(())
}

fn cmd_list_presets() -> Result<(), Error> {
    for name in presets::preset_names() {
        let sc = presets::preset(name)?;
        let text = presets::preset_text(name).expect("listed preset has text");
        let (traj, gamma) = match (sc.engine, &sc.params) {
            (Engine::Stochastic, chiralsim::scenario::ParamSpec::Scaled(p)) => (
                format!(", n_traj {}", sc.n_traj),
                format!(", Gamma {}", output::fmt_g12(p.gamma)),
            ),
            _ => (String::new(), String::new()),
        };
        println!(
            "{:<9} {:<13} {:<7} {}{}{}",
            name,
            sc.engine.to_string(),
            initial_tag(&sc.initial),
            sweep_tag(&sc),
            gamma,
            traj,
        );
        println!("          {}", first_comment_line(text));
    }
    println!("\nrun one with: chiralsim run <name> [--out DIR]");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too; those are successes.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { source, overrides } => cmd_run(source, overrides),
        Command::ListPresets => cmd_list_presets(),
        Command::ComparePureMixed { source, overrides } => cmd_compare(source, overrides),
        Command::Validate { source } => cmd_validate(source),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage_error() { 1 } else { 2 })
        }
    }
}
