//! Deterministic machine-readable output: CSV with a header row, comma
//! separator, and 17 significant digits per value (lossless for doubles),
//! plus pretty-printed JSON with sorted keys. Identical inputs produce
//! byte-identical files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use lamb_core::{Error, Result};

/// One double, 17 significant digits, scientific notation.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::invalid(format!("cannot write {}: {e}", path.display()))
}

/// Write a CSV file from a header line (without newline) and rows of
/// doubles.
pub fn write_csv<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut line = String::new();
    writeln!(w, "{header}").map_err(|e| io_err(path, e))?;
    for row in rows {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&fmt(*v));
        }
        writeln!(w, "{line}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// [`write_csv`] with a leading integer index column (iteration counters
/// don't want scientific notation).
pub fn write_csv_indexed<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = (usize, Vec<f64>)>,
{
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}").map_err(|e| io_err(path, e))?;
    for (n, row) in rows {
        let mut line = n.to_string();
        for v in &row {
            line.push(',');
            line.push_str(&fmt(*v));
        }
        writeln!(w, "{line}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Write pretty-printed JSON (`serde_json::Value` keeps object keys sorted,
/// so the bytes are stable).
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::invalid(format!("cannot serialize {}: {e}", path.display())))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}
