//! CSV export/import for maps and spectra. Matrix form: the header row
//! carries the column-axis values, the first column carries the row-axis
//! values, so files round-trip without side metadata. Floats are written
//! with Rust's shortest round-trip formatting, making reloads exact.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Matrix-form CSV: `# comment` lines, then a header row
/// `row_label\col_label,c0,c1,...`, then one row per row-axis value.
pub fn write_matrix_csv(
    w: &mut impl Write,
    comments: &[String],
    row_label: &str,
    col_label: &str,
    row_axis: &[f64],
    col_axis: &[f64],
    values: &[Vec<f64>],
) -> Result<()> {
    if values.len() != row_axis.len() {
        return Err(Error::dim("matrix csv: row count does not match row axis"));
    }
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    write!(w, "{row_label}\\{col_label}")?;
    for c in col_axis {
        write!(w, ",{c}")?;
    }
    writeln!(w)?;
    for (r, row) in row_axis.iter().zip(values.iter()) {
        if row.len() != col_axis.len() {
            return Err(Error::dim("matrix csv: column count does not match column axis"));
        }
        write!(w, "{r}")?;
        for v in row {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Parsed matrix CSV.
pub struct MatrixCsv {
    pub row_axis: Vec<f64>,
    pub col_axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn read_matrix_csv(r: impl BufRead) -> Result<MatrixCsv> {
    let mut col_axis = Vec::new();
    let mut row_axis = Vec::new();
    let mut values = Vec::new();
    let mut saw_header = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            let mut parts = line.split(',');
            parts.next(); // label cell
            for p in parts {
                col_axis.push(
                    p.parse::<f64>()
                        .map_err(|e| Error::Io(format!("bad column axis value {p:?}: {e}")))?,
                );
            }
            saw_header = true;
            continue;
        }
        let mut parts = line.split(',');
        let head = parts.next().ok_or_else(|| Error::Io("empty csv row".into()))?;
        row_axis.push(
            head.parse::<f64>()
                .map_err(|e| Error::Io(format!("bad row axis value {head:?}: {e}")))?,
        );
        let row: std::result::Result<Vec<f64>, _> = parts.map(|p| p.parse::<f64>()).collect();
        let row = row.map_err(|e| Error::Io(format!("bad csv value: {e}")))?;
        if row.len() != col_axis.len() {
            return Err(Error::Io("ragged csv row".into()));
        }
        values.push(row);
    }
    if !saw_header {
        return Err(Error::Io("matrix csv has no header row".into()));
    }
    Ok(MatrixCsv { row_axis, col_axis, values })
}
