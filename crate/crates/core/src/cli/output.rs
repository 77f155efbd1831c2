//! Trajectory CSVs, summary metrics and atomic file writes.

use std::fs;
use std::io;
use std::path::Path;

use crate::dynamics::{FailureInfo, Trajectory};

pub const CSV_HEADER: &str = "time,ergotropy_B10,ergotropy_B11,ergotropy_global,energy_total,trace,purity";
pub const SUMMARY_HEADER: &str = "value,peak_ergotropy,time_of_peak,stabilization_time,post_peak_oscillation,final_ergotropy,status";
/// Prefix of the trailing line written when a run stops early.
pub const FAILURE_MARKER: &str = "# status=failed";
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g12(x: f64) -> String {
    format_sig(x, SIGNIFICANT_DIGITS)
}

/// Renders the trajectory; a failure appends the marker line.
pub fn trajectory_csv(traj: &Trajectory, failure: Option<&FailureInfo>) -> String {
    let b10 = traj.cell_labels.iter().position(|l| l == "B10");
    let b11 = traj.cell_labels.iter().position(|l| l == "B11");
    let mut out = String::with_capacity(64 * (traj.samples.len() + 2));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let cell = |k: Option<usize>| k.map_or(f64::NAN, |k| s.cell_ergotropy[k]);
        let row = [s.time, cell(b10), cell(b11), s.global_ergotropy, s.total_energy, s.trace, s.purity];
        let fields: Vec<String> = row.iter().map(|&v| g12(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    if let Some(f) = failure {
        let reason = f.reason.replace(['\n', '"'], " ");
        out.push_str(&format!("{FAILURE_MARKER} last_good_time={} reason=\"{reason}\"\n", g12(f.last_good_time)));
    }
    out
}

/// Parsed trajectory CSV: named columns of values, plus whether it was marked failed.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub failed: bool,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<CsvTable, String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().ok_or("empty CSV")?.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut failed = false;
    for (k, line) in lines.enumerate() {
        if line.starts_with(FAILURE_MARKER) {
            failed = true;
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|e| format!("row {}: {v:?}: {e}", k + 2)))
            .collect::<Result<_, _>>()?;
        if row.len() != header.len() {
            return Err(format!("row {} has {} fields, expected {}", k + 2, row.len(), header.len()));
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows, failed })
}

/// Scalar figures of merit for one ergotropy curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveMetrics {
    pub peak: f64,
    pub time_of_peak: f64,
    /// First time after which the curve stays within `band·|final|` of its final value.
    pub stabilization_time: f64,
    /// `max − min` from the peak onwards.
    pub post_peak_oscillation: f64,
    pub final_value: f64,
}

pub fn curve_metrics(times: &[f64], values: &[f64], band: f64) -> Option<CurveMetrics> {
    if times.is_empty() || times.len() != values.len() {
        return None;
    }
    let mut peak_idx = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[peak_idx] {
            peak_idx = k;
        }
    }
    let final_value = *values.last().unwrap();
    let tol = band * final_value.abs();
    let settled_from = values.iter().rposition(|v| (v - final_value).abs() > tol).map_or(0, |k| k + 1);
    let tail = &values[peak_idx..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    Some(CurveMetrics {
        peak: values[peak_idx],
        time_of_peak: times[peak_idx],
        stabilization_time: times[settled_from.min(times.len() - 1)],
        post_peak_oscillation: hi - lo,
        final_value,
    })
}

/// One summary row; `None` metrics mark a failed point.
pub fn summary_row(value: f64, metrics: Option<&CurveMetrics>) -> String {
    match metrics {
        Some(m) => format!(
            "{},{},{},{},{},{},ok",
            g12(value),
            g12(m.peak),
            g12(m.time_of_peak),
            g12(m.stabilization_time),
            g12(m.post_peak_oscillation),
            g12(m.final_value)
        ),
        None => format!("{},nan,nan,nan,nan,nan,failed", g12(value)),
    }
}

/// Writes via a sibling temp file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}
