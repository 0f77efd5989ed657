//! Reading inputs, writing reports.

use std::fs;
use std::path::{Path, PathBuf};

use kummer_secant::PeriodMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::Failure;

/// A rectangular table destined for CSV.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// JSON document plus optional residual table.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
}

impl Report {
    pub fn new<T: Serialize>(value: &T, table: Option<Table>) -> Self {
        Report {
            json: serde_json::to_value(value).expect("reports serialize"),
            table,
        }
    }
}

pub fn read_value(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| located(path, e))
}

fn located(path: &Path, e: serde_path_to_error::Error<serde_json::Error>) -> Failure {
    let at = e.path().to_string();
    if at == "." || at.is_empty() {
        Failure::input(format!("{}: {}", path.display(), e.inner()))
    } else {
        Failure::input(format!("{}: at `{at}`: {}", path.display(), e.inner()))
    }
}

/// Deserializes `value`, or its member under the first of `keys` present
/// (scenario files wrap the payload together with the period matrix).
pub fn extract<T: DeserializeOwned>(path: &Path, value: &Value, keys: &[&str]) -> Result<T, Failure> {
    let (inner, prefix) = match keys.iter().find(|k| value.get(**k).is_some()) {
        Some(k) => (&value[*k], format!("{k}.")),
        None => (value, String::new()),
    };
    serde_path_to_error::deserialize(inner.clone()).map_err(|e| {
        let at = format!("{prefix}{}", e.path());
        Failure::input(format!("{}: at `{}`: {}", path.display(), at.trim_end_matches('.'), e.inner()))
    })
}

/// The period matrix from `--tau`, else from a `tau` member of the input.
pub fn period_matrix(tau: Option<&Path>, input: Option<(&Path, &Value)>) -> Result<PeriodMatrix, Failure> {
    if let Some(path) = tau {
        let v = read_value(path)?;
        return extract(path, &v, &[]);
    }
    if let Some((path, v)) = input {
        if v.get("tau").is_some() {
            return extract(path, v, &["tau"]);
        }
    }
    Err(Failure::input("--tau is required (or an input file carrying `tau`)".into()))
}

pub fn table_path(output: &Path) -> PathBuf {
    let p = output.with_extension("csv");
    if p == output {
        let mut s = output.as_os_str().to_owned();
        s.push(".table.csv");
        PathBuf::from(s)
    } else {
        p
    }
}

/// Writes the JSON to `output` (stdout when absent) and the table, if any,
/// next to it with a `.csv` extension.
pub fn write_report(report: &Report, output: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(&report.json).expect("valid JSON") + "\n";
    match output {
        None => print!("{text}"),
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            if let Some(table) = &report.table {
                let csv_path = table_path(path);
                let io_err = |e: csv::Error| Failure::input(format!("{}: {e}", csv_path.display()));
                let mut w = csv::Writer::from_path(&csv_path).map_err(io_err)?;
                w.write_record(&table.header).map_err(io_err)?;
                for row in &table.rows {
                    w.write_record(row).map_err(io_err)?;
                }
                w.flush()
                    .map_err(|e| Failure::input(format!("{}: {e}", csv_path.display())))?;
            }
        }
    }
    Ok(())
}
