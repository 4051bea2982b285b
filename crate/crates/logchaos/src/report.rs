//! Fixed-schema CSV and JSON emission.
//!
//! Schemas are versioned by column list; writers emit shortest
//! round-trip float text (plus `nan` / `inf` spellings), so re-parsing a
//! series CSV and re-fitting reproduces the summary bit-for-bit. Rung
//! diagnostics that do not enter the fit (jitter, kurtosis, warning flags)
//! live in the JSON manifest, not the CSV.

use crate::error::{Error, Result};
use crate::estimators::{EstimateSeries, MethodTag, RungEstimate};
use crate::fit::LineFit;
use crate::theory::{
    annealed_exponent, branch_frozen, branch_high_temp, branch_intermediate, classify_regime,
    participation_exponent, quenched_exponent, tilt_parameter, ModelParams, RegimeLabel,
};
use serde::{Deserialize, Serialize};

/// Column schema of an estimate-series CSV (one row per ladder rung).
pub const SERIES_COLUMNS: [&str; 10] = [
    "beta2",
    "q",
    "d",
    "eps",
    "log_eps",
    "log_estimate",
    "stderr",
    "n_replicas",
    "ess",
    "method",
];

/// Column schema of a fit-summary CSV (single row).
pub const FIT_COLUMNS: [&str; 5] = ["slope", "slope_stderr", "r2", "theory_value", "abs_error"];

/// Column schema of a theory table.
pub const THEORY_COLUMNS: [&str; 9] = [
    "beta2",
    "regime",
    "eta_q",
    "teta_q",
    "hat_eta_q",
    "f1",
    "f2",
    "f3",
    "c_star",
];

/// Column schema of a sweep table (one row per `beta2`).
pub const SWEEP_COLUMNS: [&str; 10] = [
    "beta2",
    "q",
    "d",
    "method",
    "regime",
    "slope",
    "slope_stderr",
    "r2",
    "theory_value",
    "abs_error",
];

/// Formats a float with shortest round-trip precision; `nan`, `inf`,
/// `-inf` spelled out.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Parses a float written by [`fmt_float`].
pub fn parse_float(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("invalid float field '{s}'"))),
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Config(format!("invalid integer field '{s}'")))
}

fn io_err(msg: String) -> Error {
    Error::Io(std::io::Error::other(msg))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| io_err(format!("csv flush failed: {e}")))?;
    String::from_utf8(bytes).map_err(|_| io_err("csv output is not UTF-8".into()))
}

fn check_header(got: &csv::StringRecord, want: &[&str], what: &str) -> Result<()> {
    if got.len() != want.len() || got.iter().zip(want).any(|(g, w)| g != *w) {
        return Err(Error::Config(format!(
            "{what} header mismatch: expected {want:?}, got {:?}",
            got.iter().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

/// Serializes an estimate series to CSV text.
pub fn series_to_csv(series: &EstimateSeries) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(SERIES_COLUMNS)
        .map_err(|e| io_err(format!("csv write failed: {e}")))?;
    let p = &series.params;
    for rung in &series.rungs {
        w.write_record([
            fmt_float(p.beta2),
            fmt_float(p.q),
            p.d.to_string(),
            fmt_float(rung.eps),
            fmt_float(rung.eps.ln()),
            fmt_float(rung.log_estimate),
            fmt_float(rung.stderr),
            rung.n_replicas.to_string(),
            fmt_float(rung.ess),
            series.method.as_str().to_string(),
        ])
        .map_err(|e| io_err(format!("csv write failed: {e}")))?;
    }
    finish_csv(w)
}

/// Parses an estimate series back from CSV text. Model parameters and the
/// method tag must be consistent across rows; `log_eps` must match
/// `ln(eps)`. Diagnostics absent from the CSV (jitter, kurtosis, warning
/// flags, medians) are restored as neutral defaults.
pub fn series_from_csv(text: &str) -> Result<EstimateSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("series csv: {e}")))?
        .clone();
    check_header(&headers, &SERIES_COLUMNS, "series csv")?;

    let mut params: Option<ModelParams> = None;
    let mut method: Option<MethodTag> = None;
    let mut rungs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Config(format!("series csv row {i}: {e}")))?;
        if record.len() != SERIES_COLUMNS.len() {
            return Err(Error::Config(format!(
                "series csv row {i}: expected {} fields, got {}",
                SERIES_COLUMNS.len(),
                record.len()
            )));
        }
        let beta2 = parse_float(&record[0])?;
        let q = parse_float(&record[1])?;
        let d = parse_usize(&record[2])? as u32;
        let row_params = ModelParams::new(beta2, q, d)?;
        let row_method = MethodTag::parse(&record[9])?;
        match (&params, &method) {
            (None, None) => {
                params = Some(row_params);
                method = Some(row_method);
            }
            (Some(p), Some(m)) => {
                if *p != row_params || *m != row_method {
                    return Err(Error::Config(format!(
                        "series csv row {i}: model/method differs from earlier rows"
                    )));
                }
            }
            _ => unreachable!(),
        }
        let eps = parse_float(&record[3])?;
        let log_eps = parse_float(&record[4])?;
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::Config(format!(
                "series csv row {i}: eps must be positive and finite, got {eps}"
            )));
        }
        if (log_eps - eps.ln()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "series csv row {i}: log_eps {log_eps} does not match ln(eps) {}",
                eps.ln()
            )));
        }
        rungs.push(RungEstimate {
            eps,
            log_estimate: parse_float(&record[5])?,
            stderr: parse_float(&record[6])?,
            n_replicas: parse_usize(&record[7])?,
            ess: parse_float(&record[8])?,
            excess_kurtosis: 0.0,
            heavy_tail_warning: false,
            low_ess_warning: false,
            median_log: None,
            jitter: 0.0,
        });
    }
    let params = params.ok_or_else(|| Error::Config("series csv has no data rows".into()))?;
    Ok(EstimateSeries {
        method: method.unwrap(),
        params,
        rungs,
        warnings: Vec::new(),
    })
}

/// A parsed fit-summary row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSummary {
    pub slope: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub theory_value: f64,
    pub abs_error: f64,
}

/// Serializes a fit summary (single data row) to CSV text.
pub fn fit_to_csv(fit: &LineFit, theory_value: f64) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(FIT_COLUMNS)
        .map_err(|e| io_err(format!("csv write failed: {e}")))?;
    w.write_record([
        fmt_float(fit.slope),
        fmt_float(fit.slope_stderr),
        fmt_float(fit.r_squared),
        fmt_float(theory_value),
        fmt_float((fit.slope - theory_value).abs()),
    ])
    .map_err(|e| io_err(format!("csv write failed: {e}")))?;
    finish_csv(w)
}

/// Parses a fit-summary CSV written by [`fit_to_csv`].
pub fn fit_from_csv(text: &str) -> Result<FitSummary> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("fit csv: {e}")))?
        .clone();
    check_header(&headers, &FIT_COLUMNS, "fit csv")?;
    let mut rows = reader.records();
    let record = rows
        .next()
        .ok_or_else(|| Error::Config("fit csv has no data row".into()))?
        .map_err(|e| Error::Config(format!("fit csv: {e}")))?;
    if rows.next().is_some() {
        return Err(Error::Config("fit csv must have exactly one data row".into()));
    }
    Ok(FitSummary {
        slope: parse_float(&record[0])?,
        slope_stderr: parse_float(&record[1])?,
        r_squared: parse_float(&record[2])?,
        theory_value: parse_float(&record[3])?,
        abs_error: parse_float(&record[4])?,
    })
}

/// Builds the theory table for fixed `(q, d)` over a `beta2` grid: both
/// exponents, the participation exponent, the three annealed branch curves
/// (`f2` is `inf` at `beta2 = 0`), and the clipped tilt parameter
/// (`nan` at `beta2 = 0`, where no tilt exists).
pub fn theory_table_csv(q: f64, d: u32, beta2_grid: &[f64]) -> Result<String> {
    if beta2_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "theory table needs a non-empty beta2 grid".into(),
        ));
    }
    let mut w = csv_writer();
    w.write_record(THEORY_COLUMNS)
        .map_err(|e| io_err(format!("csv write failed: {e}")))?;
    for &beta2 in beta2_grid {
        let p = ModelParams::new(beta2, q, d)?;
        let dim = p.dim();
        let c_star = tilt_parameter(&p).unwrap_or(f64::NAN);
        w.write_record([
            fmt_float(beta2),
            classify_regime(&p).label.as_str().to_string(),
            fmt_float(quenched_exponent(&p)),
            fmt_float(annealed_exponent(&p)),
            fmt_float(participation_exponent(&p)),
            fmt_float(branch_high_temp(beta2, q)),
            fmt_float(branch_intermediate(beta2, q, dim)),
            fmt_float(branch_frozen(q, dim)),
            fmt_float(c_star),
        ])
        .map_err(|e| io_err(format!("csv write failed: {e}")))?;
    }
    finish_csv(w)
}

/// One sweep-table row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub beta2: f64,
    pub q: f64,
    pub d: u32,
    pub method: MethodTag,
    pub regime: RegimeLabel,
    pub fit: LineFit,
    pub theory_value: f64,
}

/// Serializes sweep rows to CSV text.
pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(SWEEP_COLUMNS)
        .map_err(|e| io_err(format!("csv write failed: {e}")))?;
    for row in rows {
        w.write_record([
            fmt_float(row.beta2),
            fmt_float(row.q),
            row.d.to_string(),
            row.method.as_str().to_string(),
            row.regime.as_str().to_string(),
            fmt_float(row.fit.slope),
            fmt_float(row.fit.slope_stderr),
            fmt_float(row.fit.r_squared),
            fmt_float(row.theory_value),
            fmt_float((row.fit.slope - row.theory_value).abs()),
        ])
        .map_err(|e| io_err(format!("csv write failed: {e}")))?;
    }
    finish_csv(w)
}

/// Description of the deterministic seed-derivation scheme, recorded in
/// every manifest.
pub const SEED_SCHEME: &str =
    "chacha8: field stream ((rung+1)<<44)|replica; location stream subtask(master, 0xF1E1D)";

/// Jitter actually applied at one rung.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterRecord {
    pub eps: f64,
    pub jitter: f64,
}

/// Everything needed to reproduce a run bit-exactly: the verbatim config
/// text, the effective seed, and the command, plus diagnostics (per-rung
/// jitter, warnings, wall clock). `wall_clock_seconds` is zeroed under
/// `--deterministic` so the manifest itself becomes byte-stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub library_version: String,
    pub command: String,
    pub config_text: String,
    pub seed: u64,
    pub seed_scheme: String,
    pub deterministic: bool,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub per_rung_jitter: Vec<JitterRecord>,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// Serializes a manifest to pretty JSON (trailing newline included).
pub fn manifest_to_json(manifest: &RunManifest) -> Result<String> {
    let mut s = serde_json::to_string_pretty(manifest)
        .map_err(|e| io_err(format!("manifest serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Parses a manifest from JSON text.
pub fn manifest_from_json(text: &str) -> Result<RunManifest> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("manifest parse error: {e}")))
}

/// Extracts the per-rung jitter records of a series for the manifest.
pub fn jitter_records(series: &EstimateSeries) -> Vec<JitterRecord> {
    series
        .rungs
        .iter()
        .map(|r| JitterRecord {
            eps: r.eps,
            jitter: r.jitter,
        })
        .collect()
}
