//! Diagnostics time series as CSV.
//!
//! Lines starting with `#` are comments. The first non-comment line is the
//! column header; reals are written in shortest round-trip exponent form and
//! flags as `0`/`1`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, CSV_COLUMNS};
use crate::error::{Error, Result};
use crate::littlewood_paley::TRUNCATION_NOTE;

pub fn header_line() -> String {
    CSV_COLUMNS.join(",")
}

pub fn format_row(r: &DiagnosticsRecord) -> String {
    let mut cols: Vec<String> = r.reals().iter().map(|x| format!("{x:e}")).collect();
    cols.push(u8::from(r.criterion_ok).to_string());
    cols.push(u8::from(r.blowup_flag).to_string());
    cols.join(",")
}

fn flag(s: &str, line: usize) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::InvalidArgument(format!(
            "line {line}: bad flag `{s}`"
        ))),
    }
}

pub fn parse_row(text: &str, line: usize) -> Result<DiagnosticsRecord> {
    let cols: Vec<&str> = text.trim().split(',').collect();
    if cols.len() != CSV_COLUMNS.len() {
        return Err(Error::InvalidArgument(format!(
            "line {line}: expected {} columns, got {}",
            CSV_COLUMNS.len(),
            cols.len()
        )));
    }
    let mut v = [0.0; 13];
    for (slot, c) in v.iter_mut().zip(&cols) {
        *slot = c
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("line {line}: bad number `{c}`")))?;
    }
    Ok(DiagnosticsRecord {
        t: v[0],
        energy: v[1],
        dissipation: v[2],
        besov_u: v[3],
        besov_grad_d: v[4],
        grad_u_l2: v[5],
        delta_d_l2: v[6],
        acc_h2: v[7],
        acc_bkm: v[8],
        acc_hw: v[9],
        acc_llw: v[10],
        div_u_max: v[11],
        sphere_defect_max: v[12],
        criterion_ok: flag(cols[13], line)?,
        blowup_flag: flag(cols[14], line)?,
    })
}

/// Comment lines and the header row of an existing file, plus its records.
pub struct CsvContents {
    pub preamble: Vec<String>,
    pub records: Vec<DiagnosticsRecord>,
}

pub fn read_csv(path: &Path) -> Result<CsvContents> {
    let reader = BufReader::new(File::open(path)?);
    let mut preamble = Vec::new();
    let mut records = Vec::new();
    let mut header_seen = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if !header_seen {
            if line.trim() == header_line() {
                header_seen = true;
            } else if !line.starts_with('#') {
                return Err(Error::InvalidArgument(format!(
                    "{}: line {} is neither a comment nor the column header",
                    path.display(),
                    i + 1
                )));
            }
            preamble.push(line);
        } else if !line.trim().is_empty() {
            records.push(parse_row(&line, i + 1)?);
        }
    }
    if !header_seen {
        return Err(Error::InvalidArgument(format!(
            "{}: missing column header",
            path.display()
        )));
    }
    Ok(CsvContents { preamble, records })
}

/// Buffered writer owning the diagnostics file.
pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    /// Creates (truncating) `path` and writes the comment block and header.
    pub fn create(path: &Path, comments: &[String]) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "# nlcsim diagnostics")?;
        writeln!(out, "# {TRUNCATION_NOTE}")?;
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", header_line())?;
        Ok(CsvWriter { out })
    }

    /// Rewrites `path` keeping its preamble and the records with `t <= t_max`,
    /// then continues appending. Used when resuming from a checkpoint.
    pub fn resume(path: &Path, t_max: f64) -> Result<Self> {
        let old = read_csv(path)?;
        let mut out = BufWriter::new(File::create(path)?);
        for line in &old.preamble {
            writeln!(out, "{line}")?;
        }
        let mut w = CsvWriter { out };
        for r in old.records.iter().filter(|r| r.t <= t_max) {
            w.write(r)?;
        }
        Ok(w)
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.out, "{}", format_row(r))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
