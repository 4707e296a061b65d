//! Command-line front end. Exit codes: 0 success, 1 validation, 2 solver
//! failure, 3 I/O.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{continuous_dependence_test, internal_energy, total_entropy};
use crate::error::{Error, Result};
use crate::io::{fmt_float, load_config, write_snapshot, CsvSink, GridSpec, Preset, RunConfig};
use crate::stepper::{run, State, StepControls};
use crate::verification::{
    compare_with_explicit, reference_dt, run_mms, run_mms_temporal, ManufacturedCase,
};

#[derive(Debug, Parser)]
#[command(
    name = "tumor-thermo",
    version,
    about = "Thermodynamically consistent tumor growth simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a configured case, writing diagnostics and snapshots.
    Run(CommonArgs),
    /// Manufactured-solution convergence study.
    Mms(MmsArgs),
    /// Compare the implicit scheme with an explicit fine-step reference.
    Oracle(CommonArgs),
    /// Continuous-dependence study of a configured case and its perturbation.
    Depend(CommonArgs),
    /// Parse and validate a configuration without running it.
    CheckConfig(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Nominal time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Final time.
    #[arg(long)]
    tmax: Option<f64>,
    /// Cells per axis, one value for all axes or a comma-separated list.
    #[arg(long)]
    cells: Option<String>,
    /// Seed for random initial presets.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct MmsArgs {
    /// Output directory.
    #[arg(long, default_value = "mms-out")]
    out: PathBuf,
    /// Spatial dimension of the manufactured case (1 or 2).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Comma-separated spatial resolutions.
    #[arg(long, default_value = "16,32,64")]
    cells: String,
    /// `Δt = factor·h²` in the spatial study.
    #[arg(long, default_value_t = 1.0)]
    dt_factor: f64,
    #[arg(long)]
    quiet: bool,
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Errors are reported on stderr as a single line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let class = e.class();
            let msg = e
                .to_string()
                .replace('\\', "\\\\")
                .replace('"', "\\\"")
                .replace('\n', " ");
            eprintln!("error kind={} msg=\"{msg}\"", class.as_str());
            class.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(a) => cmd_run(&a),
        Command::Mms(a) => cmd_mms(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Depend(a) => cmd_depend(&a),
        Command::CheckConfig(a) => cmd_check(&a),
    }
}

fn parse_cells(text: &str, dim: usize) -> Result<Vec<usize>> {
    let cells = text
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<usize>()
                .map_err(|e| Error::validation("--cells", format!("`{c}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    match cells.len() {
        1 => Ok(vec![cells[0]; dim]),
        n if n == dim => Ok(cells),
        n => Err(Error::validation(
            "--cells",
            format!("{n} entries for a {dim}-dimensional grid"),
        )),
    }
}

/// Loads the configuration (or `fallback` without `--config`) and applies
/// command-line overrides.
fn resolve_config(a: &CommonArgs, fallback: Option<RunConfig>) -> Result<RunConfig> {
    let mut cfg = match (&a.config, fallback) {
        (Some(path), _) => load_config(path)?,
        (None, Some(cfg)) => cfg,
        (None, None) => {
            return Err(Error::validation(
                "--config",
                "a configuration file is required",
            ))
        }
    };
    if let Some(dt) = a.dt {
        cfg.controls.dt = dt;
    }
    if let Some(t) = a.tmax {
        cfg.t_final = t;
    }
    if let Some(cells) = &a.cells {
        cfg.grid.cells = parse_cells(cells, cfg.grid.extent.len())?;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(a: &CommonArgs, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = match &a.out {
        Some(d) => d.clone(),
        None if cfg.output.dir.is_absolute() => cfg.output.dir.clone(),
        None => cfg.base_dir.join(&cfg.output.dir),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn initial_state(cfg: &RunConfig) -> Result<State> {
    let (state, warning) = cfg.initial_state()?;
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
    Ok(state)
}

fn summary(state: &State, cfg: &RunConfig) -> String {
    let b = state.bounds();
    let s = total_entropy(state, &cfg.params).unwrap_or(f64::NAN);
    format!(
        "t={} E={} S={} min_theta={} min_phi={} min_sigma={} max_sigma={}",
        fmt_float(state.t),
        fmt_float(internal_energy(state, &cfg.params)),
        fmt_float(s),
        fmt_float(b.min_theta),
        fmt_float(b.min_phi),
        fmt_float(b.min_sigma),
        fmt_float(b.max_sigma)
    )
}

fn cmd_run(a: &CommonArgs) -> Result<()> {
    let cfg = resolve_config(a, None)?;
    let initial = initial_state(&cfg)?;
    let dir = output_dir(a, &cfg)?;
    write_text(&dir.join("config.txt"), &cfg.to_config_string())?;
    let stride = cfg.output.snapshot_stride;
    let mut snapshots = Vec::new();
    if stride > 0 {
        let name = format!("snapshot_{:06}.txt", 0);
        write_snapshot(&dir.join(&name), &initial)?;
        snapshots.push(name);
    }
    let mut csv = CsvSink::create(&dir.join(&cfg.output.csv))?;
    let mut step = 0usize;
    let outcome = run(&initial, cfg.t_final, &cfg.controls, &cfg.params, |s, r| {
        step += 1;
        csv.record(s, r, &cfg.params)?;
        if stride > 0 && step.is_multiple_of(stride) {
            let name = format!("snapshot_{step:06}.txt");
            write_snapshot(&dir.join(&name), s)?;
            snapshots.push(name);
        }
        Ok(())
    });
    let rows = csv.rows();
    csv.finish()?;
    let end = outcome?;
    write_snapshot(&dir.join("snapshot_final.txt"), &end)?;
    snapshots.push("snapshot_final.txt".into());

    let mut manifest = String::new();
    let _ = writeln!(manifest, "tool tumor-thermo {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "config config.txt");
    let _ = writeln!(manifest, "diagnostics {}", cfg.output.csv);
    let _ = writeln!(manifest, "steps {rows}");
    let _ = writeln!(manifest, "t_final {}", fmt_float(end.t));
    for s in &snapshots {
        let _ = writeln!(manifest, "snapshot {s}");
    }
    write_text(&dir.join("manifest.txt"), &manifest)?;
    if !a.quiet {
        println!("steps={rows} {}", summary(&end, &cfg));
    }
    Ok(())
}

fn cmd_check(a: &CommonArgs) -> Result<()> {
    let cfg = resolve_config(a, None)?;
    initial_state(&cfg)?;
    if !a.quiet {
        let cells: Vec<String> = cfg.grid.cells.iter().map(|c| c.to_string()).collect();
        println!(
            "ok dim={} cells={} t_final={} dt={}",
            cfg.grid.cells.len(),
            cells.join("x"),
            fmt_float(cfg.t_final),
            fmt_float(cfg.controls.dt)
        );
    }
    Ok(())
}

fn cmd_mms(a: &MmsArgs) -> Result<()> {
    if !(1..=2).contains(&a.dim) {
        return Err(Error::validation(
            "--dim",
            "manufactured case is defined for 1 or 2 dimensions",
        ));
    }
    if !(a.dt_factor.is_finite() && a.dt_factor > 0.0) {
        return Err(Error::validation("--dt-factor", "must be > 0"));
    }
    let resolutions = a
        .cells
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<usize>()
                .map_err(|e| Error::validation("--cells", format!("`{c}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let params = crate::constitutive::ModelParams::default();
    let case = ManufacturedCase::cosine(&vec![1.0; a.dim], &params);
    let controls = StepControls::default();
    let factor = a.dt_factor;
    let spatial = run_mms(&case, &resolutions, |n| factor / (n * n) as f64, &controls)?;
    let temporal = run_mms_temporal(
        &case,
        128,
        &[4e-3, 2e-3, 1e-3],
        &controls,
        crate::verification::MMS_T_FINAL,
    )?;

    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut text =
        String::from("cells,dt,err_phi,err_theta,err_sigma,order_phi,order_theta,order_sigma\n");
    for (k, (&n, &dt)) in spatial.resolutions.iter().zip(&spatial.dts).enumerate() {
        let e = spatial.errors[k];
        let o = if k == 0 {
            [f64::NAN; 3]
        } else {
            spatial.orders[k - 1]
        };
        let _ = writeln!(
            text,
            "{n},{},{},{},{},{},{},{}",
            fmt_float(dt),
            fmt_float(e[0]),
            fmt_float(e[1]),
            fmt_float(e[2]),
            fmt_float(o[0]),
            fmt_float(o[1]),
            fmt_float(o[2])
        );
    }
    write_text(&a.out.join("mms_spatial.csv"), &text)?;
    let mut text =
        String::from("cells,dt,err_phi,err_theta,err_sigma,order_phi,order_theta,order_sigma\n");
    for (k, &dt) in temporal.dts.iter().enumerate() {
        let e = temporal.errors[k];
        let o = if k == 0 {
            [f64::NAN; 3]
        } else {
            temporal.orders[k - 1]
        };
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            temporal.cells,
            fmt_float(dt),
            fmt_float(e[0]),
            fmt_float(e[1]),
            fmt_float(e[2]),
            fmt_float(o[0]),
            fmt_float(o[1]),
            fmt_float(o[2])
        );
    }
    write_text(&a.out.join("mms_temporal.csv"), &text)?;
    if !a.quiet {
        let s = spatial.min_orders();
        let t = temporal.orders.iter().fold([f64::INFINITY; 3], |m, o| {
            [m[0].min(o[0]), m[1].min(o[1]), m[2].min(o[2])]
        });
        println!(
            "spatial min order phi={:.3} theta={:.3} sigma={:.3}; temporal min order phi={:.3} theta={:.3} sigma={:.3}",
            s[0], s[1], s[2], t[0], t[1], t[2]
        );
    }
    Ok(())
}

fn default_oracle_config() -> RunConfig {
    let mut cfg = RunConfig::new(
        GridSpec {
            cells: vec![32],
            extent: vec![1.0],
        },
        0.1,
    );
    cfg.initial = crate::io::InitialSpec::Preset(Preset::Smooth);
    cfg
}

fn cmd_oracle(a: &CommonArgs) -> Result<()> {
    let cfg = resolve_config(a, Some(default_oracle_config()))?;
    let initial = initial_state(&cfg)?;
    let dt_tiny = reference_dt(&initial, 1e-6, &cfg.params);
    let dt = cfg.controls.dt;
    let dts = [dt, dt / 2.0, dt / 4.0];
    let report = compare_with_explicit(
        &initial,
        cfg.t_final,
        &dts,
        dt_tiny,
        &cfg.controls,
        &cfg.params,
    )?;
    let dir = match &a.out {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
            Some(d.clone())
        }
        None => None,
    };
    let mut text = String::from("dt,dt_reference,relative_error\n");
    for (dt, e) in report.dts.iter().zip(&report.relative_errors) {
        let _ = writeln!(
            text,
            "{},{},{}",
            fmt_float(*dt),
            fmt_float(dt_tiny),
            fmt_float(*e)
        );
    }
    if let Some(dir) = dir {
        write_text(&dir.join("oracle.csv"), &text)?;
    }
    if !a.quiet {
        print!("{text}");
    }
    Ok(())
}

fn cmd_depend(a: &CommonArgs) -> Result<()> {
    let cfg = resolve_config(a, None)?;
    let initial = initial_state(&cfg)?;
    let scale = cfg.perturbation.unwrap_or(1e-3);
    let report =
        continuous_dependence_test(&initial, scale, cfg.t_final, &cfg.controls, &cfg.params)?;
    let dir = output_dir(a, &cfg)?;
    let mut text = String::from("t,stability\n");
    for (t, v) in report.times.iter().zip(&report.values) {
        let _ = writeln!(text, "{},{}", fmt_float(*t), fmt_float(*v));
    }
    write_text(&dir.join("depend.csv"), &text)?;
    if !a.quiet {
        println!(
            "scale={} initial={} final_ratio={} exponent={} envelope_holds={}",
            fmt_float(scale),
            fmt_float(report.initial()),
            fmt_float(report.final_ratio()),
            fmt_float(report.exponent),
            report.envelope_holds
        );
    }
    Ok(())
}
