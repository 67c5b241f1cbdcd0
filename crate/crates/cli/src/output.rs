//! CSV emission: header always, `{:.16e}` numbers, `inf` for unbounded values.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use adoption_core::scenarios::{Cell, Table};

use crate::CliError;

pub const OUT_DIR_VAR: &str = "ADOPTION_OUT_DIR";

pub fn format_cell(cell: &Cell) -> String {
    match cell {
        Cell::Num(v) if v.is_infinite() && *v > 0.0 => "inf".to_owned(),
        Cell::Num(v) if v.is_infinite() => "-inf".to_owned(),
        Cell::Num(v) => format!("{v:.16e}"),
        Cell::Inf => "inf".to_owned(),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

pub fn write_table<W: Write>(out: W, table: &Table) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(format_cell))?;
    }
    w.flush()?;
    Ok(())
}

/// Relative paths land under `$ADOPTION_OUT_DIR` when it is set.
pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_owned(),
    }
}

/// Writes to `path` (created with its parents) or to stdout.
pub fn emit(table: &Table, path: Option<&Path>) -> Result<Option<PathBuf>, CliError> {
    match path {
        None => {
            write_table(io::stdout().lock(), table)?;
            Ok(None)
        }
        Some(p) => {
            let p = resolve(p);
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            write_table(fs::File::create(&p)?, table)?;
            Ok(Some(p))
        }
    }
}
