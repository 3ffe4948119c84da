//! CSV reports.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use serde::Deserialize;
use vsv_core::EstimatorResult;

use crate::error::HarnessError;

pub const HEADER: [&str; 9] = ["estimator", "H", "N", "paths", "mean", "sd", "stderr", "runtime_ms", "seed"];

/// One estimator evaluated on one `(N, H)` configuration.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReportRow {
    pub estimator: String,
    #[serde(rename = "H")]
    pub hurst: f64,
    #[serde(rename = "N")]
    pub steps: usize,
    pub paths: usize,
    pub mean: f64,
    pub sd: f64,
    pub stderr: f64,
    pub runtime_ms: u64,
    pub seed: u64,
}

impl ReportRow {
    /// `runtime` is `None` when timing is disabled and is written as zero.
    pub fn from_result(r: &EstimatorResult, hurst: f64, seed: u64, runtime: Option<Duration>) -> Self {
        Self {
            estimator: r.kind.id().to_string(),
            hurst,
            steps: r.steps,
            paths: r.paths,
            mean: r.mean,
            sd: r.sd,
            stderr: r.stderr,
            runtime_ms: runtime.map_or(0, |d| d.as_millis() as u64),
            seed,
        }
    }

    fn record(&self) -> [String; 9] {
        [
            self.estimator.clone(),
            format_sig(self.hurst),
            self.steps.to_string(),
            self.paths.to_string(),
            format_sig(self.mean),
            format_sig(self.sd),
            format_sig(self.stderr),
            self.runtime_ms.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Formats `x` with 6 significant digits, switching to exponent notation
/// outside `[1e-5, 1e15)`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mut exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return format!("{x:.5e}");
    }
    let mut s = fixed(x, exp);
    // rounding can carry into the next decade, e.g. 9.999996 -> 10.00000
    let rounded: f64 = s.parse().expect("formatted float");
    if rounded.abs() >= 10f64.powi(exp + 1) {
        exp += 1;
        s = fixed(x, exp);
    }
    s
}

fn fixed(x: f64, exp: i32) -> String {
    if exp <= 5 {
        format!("{x:.*}", (5 - exp) as usize)
    } else {
        let unit = 10f64.powi(exp - 5);
        format!("{:.0}", (x / unit).round() * unit)
    }
}

/// Writes the CSV to any sink.
pub fn write_report<W: Write>(rows: &[ReportRow], sink: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()
}

/// The CSV as a string.
pub fn render_report(rows: &[ReportRow]) -> String {
    let mut buf = Vec::new();
    write_report(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

/// Writes the CSV to `path`, replacing any existing file.
pub fn emit_report(rows: &[ReportRow], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let path = path.as_ref();
    let io_err = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err)?;
    let mut sink = BufWriter::new(file);
    write_report(rows, &mut sink).map_err(io_err)?;
    sink.flush().map_err(io_err)
}

/// Parses a report produced by [`write_report`].
pub fn read_report<R: io::Read>(source: R) -> Result<Vec<ReportRow>, csv::Error> {
    csv::Reader::from_reader(source).deserialize().collect()
}
