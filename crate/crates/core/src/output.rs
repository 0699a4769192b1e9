//! CSV writers and readers.
//!
//! Every file has a one-line header and writes floats with 17 significant
//! digits, so reading a file back reproduces the values bit for bit.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::diagnostics::DiagSample;
use crate::geometry_map::{eulerian_positions, InterfaceTrack};
use crate::grid_state::{Grid, SimState};
use crate::mms::ConvergenceTable;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("row {row}, column {column}: cannot parse `{text}` as a number")]
    Parse { row: usize, column: usize, text: String },
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<File, OutputError> {
    File::create(path).map_err(|source| OutputError::Io { path: path.display().to_string(), source })
}

fn open(path: &Path) -> Result<File, OutputError> {
    File::open(path).map_err(|source| OutputError::Io { path: path.display().to_string(), source })
}

fn write_rows<W: Write, const K: usize>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = [f64; K]>,
) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_f64(x)))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_timeseries<W: Write>(out: W, series: &[DiagSample]) -> Result<(), OutputError> {
    write_rows(out, &DiagSample::COLUMNS, series.iter().map(DiagSample::to_row))
}

pub fn write_timeseries_file(path: &Path, series: &[DiagSample]) -> Result<(), OutputError> {
    write_timeseries(create(path)?, series)
}

pub fn read_timeseries<R: io::Read>(input: R) -> Result<Vec<DiagSample>, OutputError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != DiagSample::COLUMNS {
        return Err(OutputError::Header { expected: DiagSample::COLUMNS.join(","), found: header.join(",") });
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut vals = [0.0; 17];
        for (column, (slot, text)) in vals.iter_mut().zip(rec.iter()).enumerate() {
            *slot = text
                .trim()
                .parse()
                .map_err(|_| OutputError::Parse { row: row + 1, column: column + 1, text: text.to_string() })?;
        }
        out.push(DiagSample::from_row(&vals));
    }
    Ok(out)
}

pub fn read_timeseries_file(path: &Path) -> Result<Vec<DiagSample>, OutputError> {
    read_timeseries(open(path)?)
}

pub fn write_interfaces<W: Write>(out: W, track: &InterfaceTrack) -> Result<(), OutputError> {
    write_rows(out, &InterfaceTrack::COLUMNS, (0..track.len()).map(|k| track.row(k)))
}

pub fn write_interfaces_file(path: &Path, track: &InterfaceTrack) -> Result<(), OutputError> {
    write_interfaces(create(path)?, track)
}

/// One row per cell: `y_center, v, theta, b2, b3`.
pub fn write_snapshot_cells<W: Write>(out: W, state: &SimState, grid: &Grid) -> Result<(), OutputError> {
    write_rows(
        out,
        &["y_center", "v", "theta", "b2", "b3"],
        (0..grid.n_cells()).map(|i| [grid.cell_center(i), state.v[i], state.theta[i], state.b[i][0], state.b[i][1]]),
    )
}

/// One row per node: `y_node, x_eulerian, u, w2, w3`.
pub fn write_snapshot_nodes<W: Write>(
    out: W,
    state: &SimState,
    grid: &Grid,
    a_left: f64,
) -> Result<(), OutputError> {
    let x = eulerian_positions(state, grid, a_left);
    write_rows(
        out,
        &["y_node", "x_eulerian", "u", "w2", "w3"],
        (0..grid.n_nodes()).map(|j| [grid.node(j), x[j], state.u[j], state.w[j][0], state.w[j][1]]),
    )
}

/// `level, N, field, L2_error, Linf_error, observed_order`; the order is
/// empty on the coarsest level.
pub fn write_convergence<W: Write>(out: W, table: &ConvergenceTable) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "N", "field", "L2_error", "Linf_error", "observed_order"])?;
    for r in &table.rows {
        w.write_record([
            r.level.to_string(),
            r.n.to_string(),
            r.field.to_string(),
            fmt_f64(r.l2),
            fmt_f64(r.linf),
            r.order.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_convergence_file(path: &Path, table: &ConvergenceTable) -> Result<(), OutputError> {
    write_convergence(create(path)?, table)
}

pub fn write_text_file(path: &Path, text: &str) -> Result<(), OutputError> {
    std::fs::write(path, text).map_err(|source| OutputError::Io { path: path.display().to_string(), source })
}
