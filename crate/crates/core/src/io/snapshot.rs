//! Plain-text snapshots of a state.
//!
//! ```text
//! tumor-thermo-snapshot 1
//! dim 2
//! cells 32 32
//! extent 1.0 1.0
//! time 0.5
//! phi
//! <one value per line, row-major>
//! theta
//! ...
//! sigma
//! ...
//! end
//! ```
//!
//! Floats use the shortest representation that parses back to the same bits.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::io::fmt_float;
use crate::stepper::State;

const MAGIC: &str = "tumor-thermo-snapshot";
const VERSION: u32 = 1;

pub fn snapshot_to_string(state: &State) -> String {
    let g = state.grid();
    let mut s = String::new();
    let join_u = g
        .cells()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let join_f = g
        .extent()
        .iter()
        .map(|e| fmt_float(*e))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(s, "{MAGIC} {VERSION}");
    let _ = writeln!(s, "dim {}", g.dim());
    let _ = writeln!(s, "cells {join_u}");
    let _ = writeln!(s, "extent {join_f}");
    let _ = writeln!(s, "time {}", fmt_float(state.t));
    for (name, f) in [
        ("phi", &state.phi),
        ("theta", &state.theta),
        ("sigma", &state.sigma),
    ] {
        let _ = writeln!(s, "{name}");
        for v in f.values() {
            let _ = writeln!(s, "{}", fmt_float(*v));
        }
    }
    s.push_str("end\n");
    s
}

pub fn write_snapshot(path: &Path, state: &State) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(snapshot_to_string(state).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<State> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text).map_err(|reason| Error::Snapshot {
        path: path.to_path_buf(),
        reason,
    })
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> std::result::Result<(usize, &'a str), String> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| format!("shape mismatch: file truncated before {what}"))
    }

    fn labeled(&mut self, label: &str) -> std::result::Result<(usize, Vec<&'a str>), String> {
        let (no, line) = self.next(label)?;
        let mut it = line.split_whitespace();
        if it.next() != Some(label) {
            return Err(format!("line {no}: expected `{label}`"));
        }
        Ok((no, it.collect()))
    }

    fn block(&mut self, label: &str, grid: &Arc<Grid>) -> std::result::Result<Field, String> {
        self.labeled(label)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let (no, line) = self.next(label)?;
            let v: f64 = line
                .parse()
                .map_err(|e| format!("line {no}: {label}: {e}"))?;
            if !v.is_finite() {
                return Err(format!("line {no}: non-finite {label} value"));
            }
            values.push(v);
        }
        Field::new(grid, values).map_err(|e| e.to_string())
    }
}

fn parse_list<T: std::str::FromStr>(
    no: usize,
    label: &str,
    items: &[&str],
) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    items
        .iter()
        .map(|c| {
            c.parse::<T>()
                .map_err(|e| format!("line {no}: {label}: {e}"))
        })
        .collect()
}

/// Parses snapshot text; the error is a human-readable reason.
pub fn parse_snapshot(text: &str) -> std::result::Result<State, String> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, header) = lines.next("header")?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err("not a snapshot file".into());
    }
    match parts.next().map(str::parse::<u32>) {
        Some(Ok(VERSION)) => {}
        Some(Ok(v)) => return Err(format!("unsupported snapshot version {v}")),
        _ => return Err("missing snapshot version".into()),
    }

    let (no, dim) = lines.labeled("dim")?;
    let dim: Vec<usize> = parse_list(no, "dim", &dim)?;
    let [dim] = dim[..] else {
        return Err(format!("line {no}: dim takes one value"));
    };
    let (no, cells) = lines.labeled("cells")?;
    let cells: Vec<usize> = parse_list(no, "cells", &cells)?;
    let (no, extent) = lines.labeled("extent")?;
    let extent: Vec<f64> = parse_list(no, "extent", &extent)?;
    if cells.len() != dim || extent.len() != dim {
        return Err(format!(
            "shape mismatch: dim {dim} with {} cell counts and {} extents",
            cells.len(),
            extent.len()
        ));
    }
    let (no, time) = lines.labeled("time")?;
    let time: Vec<f64> = parse_list(no, "time", &time)?;
    let [t] = time[..] else {
        return Err(format!("line {no}: time takes one value"));
    };
    if !t.is_finite() {
        return Err(format!("line {no}: non-finite time"));
    }
    let grid = Arc::new(Grid::new(&cells, &extent).map_err(|e| e.to_string())?);
    let phi = lines.block("phi", &grid)?;
    let theta = lines.block("theta", &grid)?;
    let sigma = lines.block("sigma", &grid)?;
    match lines.next("end")? {
        (_, "end") => {}
        (no, other) => return Err(format!("line {no}: expected `end`, found `{other}`")),
    }
    State::new(phi, theta, sigma, t).map_err(|e| e.to_string())
}
