use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::run::RunRecord;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown output format '{s}'"))),
        }
    }
}

pub const CSV_HEADER: [&str; 10] = ["R", "L", "T", "N", "q", "method", "err_frobenius", "asymmetry", "wall_ms", "iters"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(records: &[&RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in records {
        let p = &rec.result.params;
        w.write_record([
            format_float(p.r),
            format_float(p.l),
            p.t.map(format_float).unwrap_or_else(|| "inf".into()),
            p.n_modes.to_string(),
            p.q.to_string(),
            rec.result.method.to_string(),
            format_float(rec.frobenius_error),
            format_float(rec.result.diagnostics.asymmetry),
            format_float(rec.wall_time_ms),
            rec.result.diagnostics.solver_iterations.to_string(),
        ])?;
    }
    w.flush().map_err(|source| Error::Io { path: "<csv>".into(), source })?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[&RunRecord], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, records)?;
    Ok(())
}

/// Writes `records` sorted by `R` to `path`.
pub fn emit_results(records: &[&RunRecord], format: OutputFormat, path: &Path) -> Result<()> {
    if records.is_empty() {
        return invalid("no records to write");
    }
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| a.result.params.r.total_cmp(&b.result.params.r));
    let io_err = |source| Error::Io { path: path.display().to_string(), source };
    let mut file = BufWriter::new(File::create(path).map_err(io_err)?);
    match format {
        OutputFormat::Csv => write_csv(&sorted, &mut file)?,
        OutputFormat::Json => write_json(&sorted, &mut file)?,
    }
    file.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, 12.7, f64::MAX] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
