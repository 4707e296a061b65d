//! Run configuration: a line-oriented `key = value` format with `[section]`
//! headers.
//!
//! ```text
//! # comments run to end of line
//! t_final = 1.0            # required
//! seed = 42
//!
//! [grid]                   # required: cells (and extent, default 1 per axis)
//! cells = 64 64            # one entry per axis; `dim = 2` with `cells = 64` also works
//! extent = 1.0 1.0
//!
//! [model]
//! proliferation = 1.0      # 𝒫 > 0
//! apoptosis = 0.5          # 𝒜 > 0
//! consumption = 1.0        # 𝒞 > 0
//! transfer = 1.0           # ℬ > 0
//! vascular_nutrient = 1.0  # σ_B ∈ [0, 1]
//! relaxation = 1.0         # β > 0
//! specific_heat = 1.0      # c_V > 0
//! interface = 1.0          # ε > 0
//! conductivity_exponent = 2.0   # q ≥ 2
//! regulator = smoothstep   # or saturating
//!
//! [controls]
//! dt = 0.001
//! newton_tol = 1e-10
//! newton_max = 50
//! picard = false
//! picard_tol = 1e-10
//! picard_max = 50
//! linear_tol = 1e-13
//!
//! [initial]
//! preset = smooth          # rest | smooth | random | random-smooth
//! # or per field: mean followed by amplitude@k1[,k2[,k3]] cosine modes,
//! # each mode contributing amplitude·Π_a cos(k_a π x_a / L_a)
//! phi = 0.5 0.1@1 0.05@2,1
//! theta = 1.0
//! sigma = 0.5
//! # or a snapshot file, relative to the config file
//! snapshot = start.txt
//! allow_inadmissible = false
//!
//! [output]
//! dir = out
//! snapshot_stride = 0      # 0 writes only the final snapshot
//! csv = diagnostics.csv
//!
//! [perturbation]           # continuous-dependence mode
//! scale = 1e-3
//! ```
//!
//! Unknown sections or keys, duplicates and out-of-range values are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{ModelParams, Regulator};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::io::fmt_float;
use crate::stepper::{State, StepControls};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub cells: Vec<usize>,
    pub extent: Vec<f64>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(&self.cells, &self.extent)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `(0, 0, σ_B)`.
    Rest,
    /// Cosine profiles `φ = ½ + ¼b̄`, `θ = ¾ + ⅜b̄`, `σ = ½ + ¼b̄` with
    /// `b̄ = (1/dim) Σ_a cos(π x_a / L_a)`.
    Smooth,
    /// Independent uniform cell values: `φ ∈ [0,1]`, `θ ∈ [0,2]`, `σ ∈ [0,1]`.
    Random,
    /// Random low-mode cosine sums rescaled into the same ranges.
    RandomSmooth,
}

impl Preset {
    const ALL: [Preset; 4] = [
        Preset::Rest,
        Preset::Smooth,
        Preset::Random,
        Preset::RandomSmooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Rest => "rest",
            Preset::Smooth => "smooth",
            Preset::Random => "random",
            Preset::RandomSmooth => "random-smooth",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// `mean + Σ amplitude·Π_a cos(k_a π x_a / L_a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub mean: f64,
    pub modes: Vec<(f64, Vec<u32>)>,
}

impl FieldSpec {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            modes: Vec::new(),
        }
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Result<Field> {
        for (_, k) in &self.modes {
            if k.len() > grid.dim() {
                return Err(Error::validation(
                    "initial",
                    format!("mode {k:?} has more wave numbers than the grid has axes"),
                ));
            }
        }
        let ext = grid.extent().to_vec();
        Ok(Field::from_fn(grid, |x| {
            let mut v = self.mean;
            for (amp, k) in &self.modes {
                let mut c = *amp;
                for (a, &ka) in k.iter().enumerate() {
                    c *= (ka as f64 * std::f64::consts::PI * x[a] / ext[a]).cos();
                }
                v += c;
            }
            v
        }))
    }

    fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut tokens = text.split_whitespace();
        let mean = tokens
            .next()
            .ok_or("empty field specification")?
            .parse::<f64>()
            .map_err(|e| format!("mean: {e}"))?;
        let mut modes = Vec::new();
        for tok in tokens {
            let (amp, ks) = tok
                .split_once('@')
                .ok_or_else(|| format!("mode `{tok}` is not amplitude@k[,k[,k]]"))?;
            let amp = amp
                .parse::<f64>()
                .map_err(|e| format!("amplitude `{amp}`: {e}"))?;
            let ks = ks
                .split(',')
                .map(|k| {
                    k.parse::<u32>()
                        .map_err(|e| format!("wave number `{k}`: {e}"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if ks.is_empty() || ks.len() > 3 {
                return Err(format!("mode `{tok}` needs 1 to 3 wave numbers"));
            }
            modes.push((amp, ks));
        }
        if !mean.is_finite() || modes.iter().any(|(a, _)| !a.is_finite()) {
            return Err("non-finite value".into());
        }
        Ok(Self { mean, modes })
    }

    fn render(&self) -> String {
        let mut s = fmt_float(self.mean);
        for (amp, ks) in &self.modes {
            let ks: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
            s.push_str(&format!(" {}@{}", fmt_float(*amp), ks.join(",")));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Preset(Preset),
    Fields {
        phi: FieldSpec,
        theta: FieldSpec,
        sigma: FieldSpec,
    },
    /// Path as written in the config; resolved against the config directory.
    Snapshot(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub snapshot_stride: usize,
    pub csv: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshot_stride: 0,
            csv: "diagnostics.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: GridSpec,
    pub controls: StepControls,
    pub initial: InitialSpec,
    pub allow_inadmissible: bool,
    pub output: OutputSpec,
    pub t_final: f64,
    pub seed: u64,
    /// Perturbation scale of the continuous-dependence mode.
    pub perturbation: Option<f64>,
    /// Directory relative paths in the config are resolved against.
    pub base_dir: PathBuf,
}

impl RunConfig {
    /// Defaults for everything but the grid and final time.
    pub fn new(grid: GridSpec, t_final: f64) -> Self {
        Self {
            params: ModelParams::default(),
            grid,
            controls: StepControls::default(),
            initial: InitialSpec::Preset(Preset::Smooth),
            allow_inadmissible: false,
            output: OutputSpec::default(),
            t_final,
            seed: 0,
            perturbation: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.controls.validate()?;
        self.grid.build()?;
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::validation(
                "t_final",
                format!("{} must be ≥ 0", self.t_final),
            ));
        }
        if let Some(s) = self.perturbation {
            if !(s.is_finite() && s > 0.0 && s < 1.0) {
                return Err(Error::validation(
                    "perturbation.scale",
                    format!("{s} not in (0, 1)"),
                ));
            }
        }
        Ok(())
    }

    /// Builds the initial state and checks its admissibility. Returns the
    /// state and, when inadmissible data were allowed through, a warning.
    pub fn initial_state(&self) -> Result<(State, Option<String>)> {
        let grid = self.grid.build()?;
        let state = match &self.initial {
            InitialSpec::Preset(p) => preset_state(*p, &grid, &self.params, self.seed),
            InitialSpec::Fields { phi, theta, sigma } => State::new(
                phi.sample(&grid)?,
                theta.sample(&grid)?,
                sigma.sample(&grid)?,
                0.0,
            )?,
            InitialSpec::Snapshot(path) => {
                let s = crate::io::snapshot::read_snapshot(&self.base_dir.join(path))?;
                if s.grid().cells() != grid.cells() || s.grid().extent() != grid.extent() {
                    return Err(Error::validation(
                        "initial.snapshot",
                        format!(
                            "snapshot grid {:?}/{:?} differs from [grid] {:?}/{:?}",
                            s.grid().cells(),
                            s.grid().extent(),
                            grid.cells(),
                            grid.extent()
                        ),
                    ));
                }
                s
            }
        };
        if state.is_admissible() {
            return Ok((state, None));
        }
        let b = state.bounds();
        let msg = format!(
            "initial data inadmissible: min θ = {}, min φ = {}, σ ∈ [{}, {}] (need θ₀ ≥ 0, φ₀ ≥ 0, 0 ≤ σ₀ ≤ 1)",
            b.min_theta, b.min_phi, b.min_sigma, b.max_sigma
        );
        if self.allow_inadmissible {
            Ok((state, Some(msg)))
        } else {
            Err(Error::validation("initial", msg))
        }
    }

    /// Canonical text form; `parse_config` of it reproduces `self`.
    pub fn to_config_string(&self) -> String {
        let p = &self.params;
        let c = &self.controls;
        let list_f = |v: &[f64]| {
            v.iter()
                .map(|x| fmt_float(*x))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let list_u = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        s.push_str(&format!(
            "t_final = {}\nseed = {}\n",
            fmt_float(self.t_final),
            self.seed
        ));
        s.push_str(&format!(
            "\n[grid]\ncells = {}\nextent = {}\n",
            list_u(&self.grid.cells),
            list_f(&self.grid.extent)
        ));
        s.push_str("\n[model]\n");
        for (k, v) in [
            ("proliferation", p.proliferation),
            ("apoptosis", p.apoptosis),
            ("consumption", p.consumption),
            ("transfer", p.transfer),
            ("vascular_nutrient", p.vascular_nutrient),
            ("relaxation", p.relaxation),
            ("specific_heat", p.specific_heat),
            ("interface", p.interface),
            ("conductivity_exponent", p.conductivity_exponent),
        ] {
            s.push_str(&format!("{k} = {}\n", fmt_float(v)));
        }
        s.push_str(&format!("regulator = {}\n", p.regulator.name()));
        s.push_str(&format!(
            "\n[controls]\ndt = {}\nnewton_tol = {}\nnewton_max = {}\npicard = {}\npicard_tol = {}\npicard_max = {}\nlinear_tol = {}\n",
            fmt_float(c.dt),
            fmt_float(c.newton_tol),
            c.newton_max,
            c.picard_enabled,
            fmt_float(c.picard_tol),
            c.picard_max,
            fmt_float(c.linear_tol)
        ));
        s.push_str("\n[initial]\n");
        match &self.initial {
            InitialSpec::Preset(p) => s.push_str(&format!("preset = {}\n", p.name())),
            InitialSpec::Fields { phi, theta, sigma } => s.push_str(&format!(
                "phi = {}\ntheta = {}\nsigma = {}\n",
                phi.render(),
                theta.render(),
                sigma.render()
            )),
            InitialSpec::Snapshot(path) => s.push_str(&format!("snapshot = {}\n", path.display())),
        }
        s.push_str(&format!(
            "allow_inadmissible = {}\n",
            self.allow_inadmissible
        ));
        s.push_str(&format!(
            "\n[output]\ndir = {}\nsnapshot_stride = {}\ncsv = {}\n",
            self.output.dir.display(),
            self.output.snapshot_stride,
            self.output.csv
        ));
        if let Some(scale) = self.perturbation {
            s.push_str(&format!("\n[perturbation]\nscale = {}\n", fmt_float(scale)));
        }
        s
    }
}

/// Builds a preset initial state.
pub fn preset_state(preset: Preset, grid: &Arc<Grid>, p: &ModelParams, seed: u64) -> State {
    match preset {
        Preset::Rest => State::rest(grid, p),
        Preset::Smooth => {
            let ext = grid.extent().to_vec();
            let dim = grid.dim() as f64;
            let b = Field::from_fn(grid, |x| {
                x.iter()
                    .zip(&ext)
                    .map(|(xa, la)| (std::f64::consts::PI * xa / la).cos())
                    .sum::<f64>()
                    / dim
            });
            State {
                phi: b.map(|v| 0.5 + 0.25 * v),
                theta: b.map(|v| 0.75 + 0.375 * v),
                sigma: b.map(|v| 0.5 + 0.25 * v),
                t: 0.0,
            }
        }
        Preset::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = Field::from_fn(grid, |_| rng.gen_range(0.0..=1.0));
            let theta = Field::from_fn(grid, |_| rng.gen_range(0.0..=2.0));
            let sigma = Field::from_fn(grid, |_| rng.gen_range(0.0..=1.0));
            State {
                phi,
                theta,
                sigma,
                t: 0.0,
            }
        }
        Preset::RandomSmooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut field = |lo: f64, hi: f64| {
                let mut modes = Vec::new();
                let kmax = 3u32;
                let combos = (kmax + 1).pow(grid.dim() as u32);
                for c in 1..combos {
                    let ks: Vec<u32> = (0..grid.dim())
                        .map(|a| (c / (kmax + 1).pow(a as u32)) % (kmax + 1))
                        .collect();
                    let weight = 1.0 + ks.iter().map(|&k| (k * k) as f64).sum::<f64>();
                    modes.push((rng.gen_range(-1.0..1.0) / weight, ks));
                }
                let raw = FieldSpec { mean: 0.0, modes }
                    .sample(grid)
                    .expect("modes match the grid");
                let (mn, mx) = (raw.min(), raw.max());
                let span = if mx > mn { mx - mn } else { 1.0 };
                raw.map(|v| (lo + (hi - lo) * (v - mn) / span).clamp(lo, hi))
            };
            let phi = field(0.0, 1.0);
            let theta = field(0.0, 2.0);
            let sigma = field(0.0, 1.0);
            State {
                phi,
                theta,
                sigma,
                t: 0.0,
            }
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    if cfg.base_dir.as_os_str().is_empty() {
        cfg.base_dir = PathBuf::from(".");
    }
    Ok(cfg)
}

struct Entry {
    line: usize,
    value: String,
}

fn config_err(line: usize, key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        reason: reason.into(),
    }
}

const SECTIONS: [&str; 7] = [
    "",
    "grid",
    "model",
    "controls",
    "initial",
    "output",
    "perturbation",
];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "" => &["t_final", "seed"],
        "grid" => &["dim", "cells", "extent"],
        "model" => &[
            "proliferation",
            "apoptosis",
            "consumption",
            "transfer",
            "vascular_nutrient",
            "relaxation",
            "specific_heat",
            "interface",
            "conductivity_exponent",
            "regulator",
        ],
        "controls" => &[
            "dt",
            "newton_tol",
            "newton_max",
            "picard",
            "picard_tol",
            "picard_max",
            "linear_tol",
        ],
        "initial" => &[
            "preset",
            "phi",
            "theta",
            "sigma",
            "snapshot",
            "allow_inadmissible",
        ],
        "output" => &["dir", "snapshot_stride", "csv"],
        "perturbation" => &["scale"],
        _ => &[],
    }
}

/// Parses and validates configuration text. Relative paths stay relative to
/// the current directory; [`load_config`] rebases them on the file location.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
    let mut section = String::new();
    let mut seen_sections = vec![String::new()];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| config_err(line_no, line, "unterminated section header"))?
                .trim();
            if !SECTIONS.contains(&name) || name.is_empty() {
                return Err(config_err(line_no, name, "unknown section"));
            }
            if seen_sections.iter().any(|s| s == name) {
                return Err(config_err(line_no, name, "duplicate section"));
            }
            seen_sections.push(name.to_string());
            section = name.to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(line_no, line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if !allowed_keys(&section).contains(&key) {
            let shown = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            return Err(config_err(line_no, &shown, "unknown key"));
        }
        if value.is_empty() {
            return Err(config_err(line_no, key, "missing value"));
        }
        let slot = (section.clone(), key.to_string());
        if entries.contains_key(&slot) {
            return Err(config_err(line_no, key, "duplicate key"));
        }
        entries.insert(
            slot,
            Entry {
                line: line_no,
                value: value.to_string(),
            },
        );
    }

    let mut take = |sec: &str, key: &str| entries.remove(&(sec.to_string(), key.to_string()));
    let num = |e: &Entry, key: &str| -> Result<f64> {
        e.value
            .parse::<f64>()
            .map_err(|err| config_err(e.line, key, format!("`{}`: {err}", e.value)))
    };
    let int = |e: &Entry, key: &str| -> Result<usize> {
        e.value
            .parse::<usize>()
            .map_err(|err| config_err(e.line, key, format!("`{}`: {err}", e.value)))
    };
    let boolean = |e: &Entry, key: &str| -> Result<bool> {
        match e.value.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(config_err(
                e.line,
                key,
                format!("`{other}` is not true/false"),
            )),
        }
    };

    let t_final = match take("", "t_final") {
        Some(e) => num(&e, "t_final")?,
        None => return Err(config_err(0, "t_final", "required key missing")),
    };

    let cells_entry = take("grid", "cells")
        .ok_or_else(|| config_err(0, "grid.cells", "required [grid] cells missing"))?;
    let mut cells = cells_entry
        .value
        .split_whitespace()
        .map(|v| {
            v.parse::<usize>()
                .map_err(|err| config_err(cells_entry.line, "grid.cells", format!("`{v}`: {err}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(e) = take("grid", "dim") {
        let dim = int(&e, "grid.dim")?;
        if !(1..=3).contains(&dim) {
            return Err(config_err(e.line, "grid.dim", "must be 1, 2 or 3"));
        }
        if cells.len() == 1 {
            cells = vec![cells[0]; dim];
        } else if cells.len() != dim {
            return Err(config_err(
                e.line,
                "grid.dim",
                "disagrees with the number of cells entries",
            ));
        }
    }
    let extent = match take("grid", "extent") {
        Some(e) => {
            let mut v = e
                .value
                .split_whitespace()
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|err| config_err(e.line, "grid.extent", format!("`{x}`: {err}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if v.len() == 1 && cells.len() > 1 {
                v = vec![v[0]; cells.len()];
            }
            v
        }
        None => vec![1.0; cells.len()],
    };

    let mut cfg = RunConfig::new(GridSpec { cells, extent }, t_final);
    if let Some(e) = take("", "seed") {
        cfg.seed = e
            .value
            .parse::<u64>()
            .map_err(|err| config_err(e.line, "seed", err.to_string()))?;
    }

    let p = &mut cfg.params;
    for (key, slot) in [
        ("proliferation", &mut p.proliferation),
        ("apoptosis", &mut p.apoptosis),
        ("consumption", &mut p.consumption),
        ("transfer", &mut p.transfer),
        ("vascular_nutrient", &mut p.vascular_nutrient),
        ("relaxation", &mut p.relaxation),
        ("specific_heat", &mut p.specific_heat),
        ("interface", &mut p.interface),
        ("conductivity_exponent", &mut p.conductivity_exponent),
    ] {
        if let Some(e) = take("model", key) {
            *slot = num(&e, key)?;
        }
    }
    if let Some(e) = take("model", "regulator") {
        p.regulator = Regulator::from_name(&e.value).ok_or_else(|| {
            config_err(
                e.line,
                "regulator",
                format!("unknown regulator `{}`", e.value),
            )
        })?;
    }

    let c = &mut cfg.controls;
    for (key, slot) in [
        ("dt", &mut c.dt),
        ("newton_tol", &mut c.newton_tol),
        ("picard_tol", &mut c.picard_tol),
        ("linear_tol", &mut c.linear_tol),
    ] {
        if let Some(e) = take("controls", key) {
            *slot = num(&e, key)?;
        }
    }
    for (key, slot) in [
        ("newton_max", &mut c.newton_max),
        ("picard_max", &mut c.picard_max),
    ] {
        if let Some(e) = take("controls", key) {
            *slot = int(&e, key)?;
        }
    }
    if let Some(e) = take("controls", "picard") {
        c.picard_enabled = boolean(&e, "picard")?;
    }

    let preset = take("initial", "preset");
    let fields = [
        take("initial", "phi"),
        take("initial", "theta"),
        take("initial", "sigma"),
    ];
    let snapshot = take("initial", "snapshot");
    let given = preset.is_some() as usize
        + fields.iter().any(Option::is_some) as usize
        + snapshot.is_some() as usize;
    if given > 1 {
        let line = [&preset, &snapshot]
            .into_iter()
            .chain(fields.iter())
            .flatten()
            .map(|e| e.line)
            .max()
            .unwrap_or(0);
        return Err(config_err(
            line,
            "initial",
            "give exactly one of preset, per-field specs, snapshot",
        ));
    }
    if let Some(e) = preset {
        cfg.initial = InitialSpec::Preset(Preset::from_name(&e.value).ok_or_else(|| {
            config_err(e.line, "preset", format!("unknown preset `{}`", e.value))
        })?);
    } else if fields.iter().any(Option::is_some) {
        let [phi, theta, sigma] = fields;
        let parse = |e: Option<Entry>, key: &str| -> Result<FieldSpec> {
            match e {
                Some(e) => FieldSpec::parse(&e.value).map_err(|r| config_err(e.line, key, r)),
                None => Err(config_err(
                    0,
                    key,
                    "per-field initial data need phi, theta and sigma",
                )),
            }
        };
        cfg.initial = InitialSpec::Fields {
            phi: parse(phi, "phi")?,
            theta: parse(theta, "theta")?,
            sigma: parse(sigma, "sigma")?,
        };
    } else if let Some(e) = snapshot {
        cfg.initial = InitialSpec::Snapshot(PathBuf::from(e.value));
    }
    if let Some(e) = take("initial", "allow_inadmissible") {
        cfg.allow_inadmissible = boolean(&e, "allow_inadmissible")?;
    }

    if let Some(e) = take("output", "dir") {
        cfg.output.dir = PathBuf::from(e.value);
    }
    if let Some(e) = take("output", "snapshot_stride") {
        cfg.output.snapshot_stride = int(&e, "snapshot_stride")?;
    }
    if let Some(e) = take("output", "csv") {
        cfg.output.csv = e.value;
    }
    if let Some(e) = take("perturbation", "scale") {
        cfg.perturbation = Some(num(&e, "perturbation.scale")?);
    }
    debug_assert!(entries.is_empty());

    cfg.validate()?;
    Ok(cfg)
}
