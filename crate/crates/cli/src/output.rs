//! Output files. Every CSV starts with a `# columns: ...` comment line
//! followed by the header row; every JSON document carries a `schema` key.

use crate::error::CliError;
use serde::Serialize;
use serde_json::Value;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const POPULATIONS: [&str; 4] = ["time_s", "area_progress", "level", "population"];
pub const DENSITY: [&str; 4] = ["area_progress", "doppler_over_rabi", "level", "density"];
pub const DELTA: [&str; 3] = ["time_s", "method", "delta"];
pub const S_TABLE: [&str; 8] =
    ["gamma_rad_s", "mode", "value_re", "value_im", "quadrature_re", "quadrature_im", "abs_diff", "t_s"];

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, columns: &[&str]) -> Result<Self, CliError> {
        let mut file = BufWriter::new(File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
        writeln!(file, "# columns: {}", columns.join(","))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(columns)?;
        Ok(CsvOut { path: path.to_path_buf(), writer })
    }

    pub fn row<I, T>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

/// Serialises `value` with an added `schema` key.
pub fn write_json<T: Serialize>(path: &Path, schema: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    match &mut v {
        Value::Object(map) => {
            map.insert("schema".into(), Value::String(schema.into()));
        }
        other => {
            v = serde_json::json!({ "schema": schema, "value": other.take() });
        }
    }
    let text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_comment_then_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let mut w = CsvOut::create(&p, &DELTA).unwrap();
        w.row([num(0.5), "ours".into(), num(1e-3)]).unwrap();
        w.finish().unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec!["# columns: time_s,method,delta", "time_s,method,delta", "5e-1,ours,1e-3"]);
    }

    #[test]
    fn json_gets_schema() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        write_json(&p, "test", &serde_json::json!({"a": 1})).unwrap();
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v["schema"], "test");
        assert_eq!(v["a"], 1);
    }
}
