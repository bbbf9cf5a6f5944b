use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;
use tempfile::NamedTempFile;

/// Round-trip formatting for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory CSV table with a header row.
pub struct Csv(csv::Writer<Vec<u8>>);

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header.iter().map(|h| h.as_ref()))
            .expect("write to memory");
        Self(w)
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        self.0.write_record(cells).expect("write to memory");
    }

    pub fn into_string(self) -> String {
        let bytes = self.0.into_inner().expect("flush to memory");
        String::from_utf8(bytes).expect("CSV cells are ASCII")
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run leaves nothing behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)
        .with_context(|| format!("out: cannot create a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("out: cannot write {}", path.display()))?;
    Ok(())
}

pub fn json(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// CSV to `out` (report on stdout) or CSV to stdout (report on stderr).
pub fn emit_data(out: Option<&Path>, csv: &str, report: &Value) -> Result<()> {
    match out {
        Some(path) => {
            write_atomic(path, csv)?;
            io::stdout().write_all(json(report).as_bytes())?;
        }
        None => {
            io::stdout().write_all(csv.as_bytes())?;
            io::stderr().write_all(json(report).as_bytes())?;
        }
    }
    Ok(())
}

/// Report to stdout, and to `out` when given.
pub fn emit_report(out: Option<&Path>, report: &Value) -> Result<()> {
    let text = json(report);
    if let Some(path) = out {
        write_atomic(path, &text)?;
    }
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}
