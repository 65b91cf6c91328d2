//! Report documents and atomic writes.
//!
//! A report is a JSON object `{kind, seed, params, generated_at, timing_ms,
//! result}` whose body is a pure function of (spec, seed): reruns match
//! byte for byte once the two volatile fields (`generated_at`, `timing_ms`)
//! are excluded. CSV output renders the kind's row table, when it has one.

use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(CliError::Validation(format!(
                "format must be `json` or `csv`, got `{other}`"
            ))),
        }
    }
}

/// A rectangular table attached to a report for CSV rendering.
#[derive(Debug, Clone, Serialize)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDoc {
    pub kind: String,
    pub seed: u64,
    pub params: Value,
    /// Unix seconds at generation; excluded from reproducibility comparisons.
    pub generated_at: u64,
    /// Wall-clock milliseconds; excluded from reproducibility comparisons.
    pub timing_ms: f64,
    pub result: Value,
    #[serde(skip)]
    pub table: Option<CsvTable>,
}

impl ReportDoc {
    pub fn new(kind: &str, seed: u64, params: Value, result: Value) -> Self {
        ReportDoc {
            kind: kind.to_string(),
            seed,
            params,
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            timing_ms: 0.0,
            result,
            table: None,
        }
    }

    pub fn with_table(mut self, table: CsvTable) -> Self {
        self.table = Some(table);
        self
    }

    pub fn render_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn render_csv(&self) -> Result<String, CliError> {
        let table = self.table.as_ref().ok_or_else(|| {
            CliError::Validation(format!(
                "kind `{}` has no CSV table; use --format json",
                self.kind
            ))
        })?;
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&table.header).map_err(csv_err)?;
        for row in &table.rows {
            writer.write_record(row).map_err(csv_err)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(format!("csv encoding failed: {e}"))
}

/// The reproducible portion of a serialized report: everything except the
/// two volatile fields.
pub fn reproducible_body(report_json: &Value) -> Value {
    let mut body = report_json.clone();
    if let Some(map) = body.as_object_mut() {
        map.remove("generated_at");
        map.remove("timing_ms");
    }
    body
}

/// Atomic write: render to a temporary file in the target directory, then
/// rename over the destination. A missing parent directory fails without
/// leaving a partial file.
pub fn write_report(doc: &ReportDoc, path: &Path, format: OutputFormat) -> Result<(), CliError> {
    let payload = match format {
        OutputFormat::Json => doc.render_json(),
        OutputFormat::Csv => doc.render_csv()?,
    };
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&parent)
        .map_err(|e| CliError::Runtime(format!("cannot create temp file in {parent:?}: {e}")))?;
    use std::io::Write;
    tmp.write_all(payload.as_bytes())
        .map_err(|e| CliError::Runtime(format!("write failed: {e}")))?;
    tmp.persist(path)
        .map_err(|e| CliError::Runtime(format!("rename into place failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_doc() -> ReportDoc {
        ReportDoc::new(
            "net-coverage",
            7,
            serde_json::json!({"d": 2}),
            serde_json::json!({"fraction": 0.5}),
        )
        .with_table(CsvTable {
            header: vec!["d".into(), "fraction".into()],
            rows: vec![vec!["2".into(), "0.5".into()]],
        })
    }

    #[test]
    fn json_round_trip() {
        let doc = sample_doc();
        let text = doc.render_json();
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, serde_json::to_value(&doc).unwrap());
    }

    #[test]
    fn csv_has_header_row() {
        let doc = sample_doc();
        let text = doc.render_csv().unwrap();
        assert!(text.starts_with("d,fraction\n"));
        assert!(text.contains("2,0.5"));
    }

    #[test]
    fn csv_quoting_is_standard() {
        let mut doc = sample_doc();
        doc.table.as_mut().unwrap().rows[0][1] = "a,b\"c".into();
        let text = doc.render_csv().unwrap();
        assert!(text.contains("\"a,b\"\"c\""), "{text}");
    }

    #[test]
    fn write_to_missing_directory_fails_without_partial_file() {
        let doc = sample_doc();
        let missing = Path::new("/nonexistent-dir-for-sure/report.json");
        assert!(write_report(&doc, missing, OutputFormat::Json).is_err());
        assert!(!missing.exists());
    }

    #[test]
    fn atomic_write_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let doc = sample_doc();
        write_report(&doc, &path, OutputFormat::Json).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, doc.render_json());
    }

    #[test]
    fn volatile_fields_are_stripped_for_comparison() {
        let doc = sample_doc();
        let a = reproducible_body(&serde_json::to_value(&doc).unwrap());
        let mut later = sample_doc();
        later.generated_at += 100;
        later.timing_ms = 12.5;
        let b = reproducible_body(&serde_json::to_value(&later).unwrap());
        assert_eq!(a, b);
    }
}
