use std::io::Write;

use serde_json::json;

use crate::config::{Emit, RunConfig};
use crate::run::{Report, Table};
use crate::CliError;

fn csv_bytes(t: &Table) -> Result<Vec<u8>, CliError> {
    let io = |e: csv::Error| CliError::Validation(e.to_string());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&t.header).map_err(io)?;
    for r in &t.rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Validation(e.to_string()))
}

/// Space-aligned columns holding the same strings as the CSV.
fn table_text(t: &Table) -> String {
    let mut widths: Vec<usize> = t.header.iter().map(|h| h.chars().count()).collect();
    for r in &t.rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut t.header.iter().copied());
    for r in &t.rows {
        line(&mut r.iter().map(String::as_str));
    }
    out
}

pub fn emit(cfg: &RunConfig, report: &Report) -> Result<(), CliError> {
    let bytes = match cfg.output.emit {
        Emit::Json => {
            let doc = json!({ "provenance": cfg, "result": report.result });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Validation(e.to_string()))?;
            s.push('\n');
            s.into_bytes()
        }
        Emit::Csv => csv_bytes(&report.table)?,
        Emit::Table => table_text(&report.table).into_bytes(),
    };
    match &cfg.output.path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Validation(format!("{}: {e}", p.display()))),
        None => Ok(std::io::stdout().lock().write_all(&bytes)?),
    }
}
