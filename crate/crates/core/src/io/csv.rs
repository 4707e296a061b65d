//! Per-step diagnostics as CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::constitutive::ModelParams;
use crate::diagnostics::{internal_energy, total_entropy};
use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::stepper::{State, StepReport};

pub const CSV_HEADER: [&str; 15] = [
    "step",
    "t",
    "dt_used",
    "E",
    "S",
    "energy_residual",
    "entropy_increment",
    "min_theta",
    "min_phi",
    "min_sigma",
    "max_sigma",
    "newton_iters_phi",
    "newton_iters_theta",
    "picard_iters",
    "picard_contraction",
];

/// One CSV line (without newline) for the state reached after `step` steps.
pub fn csv_row(step: usize, state: &State, report: &StepReport, p: &ModelParams) -> String {
    let entropy = total_entropy(state, p).unwrap_or(f64::NAN);
    let floats = [
        state.t,
        report.dt_used,
        internal_energy(state, p),
        entropy,
        report.energy_residual,
        report.entropy_increment,
        report.min_theta,
        report.min_phi,
        report.min_sigma,
        report.max_sigma,
    ];
    let mut cols = vec![step.to_string()];
    cols.extend(floats.iter().map(|v| fmt_float(*v)));
    cols.push(report.newton_iters_phi.to_string());
    cols.push(report.newton_iters_theta.to_string());
    cols.push(report.picard_iters.to_string());
    cols.push(fmt_float(report.picard_contraction));
    cols.join(",")
}

/// Streams diagnostics rows to a file; the header is written on creation.
pub struct CsvSink {
    path: PathBuf,
    out: BufWriter<File>,
    rows: usize,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut sink = Self {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            rows: 0,
        };
        sink.line(&CSV_HEADER.join(","))?;
        Ok(sink)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn record(&mut self, state: &State, report: &StepReport, p: &ModelParams) -> Result<()> {
        self.rows += 1;
        let row = csv_row(self.rows, state, report, p);
        self.line(&row)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::stepper::{advance, StepControls};
    use std::sync::Arc;

    #[test]
    fn header_only_when_nothing_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        CsvSink::create(&path).unwrap().finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn rows_have_every_column() {
        let g = Arc::new(Grid::interval(8, 1.0).unwrap());
        let p = ModelParams::default();
        let s = State::constant(&g, 0.3, 1.0, 0.5);
        let (next, report) = advance(&s, &StepControls::default(), &p).unwrap();
        let row = csv_row(1, &next, &report, &p);
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), CSV_HEADER.len());
        assert_eq!(cols[0], "1");
        assert_eq!(cols[1].parse::<f64>().unwrap(), next.t);
        assert!(cols.iter().all(|c| !c.is_empty()));
    }
}
