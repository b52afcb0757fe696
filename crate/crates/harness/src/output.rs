//! CSV trajectories and JSON summaries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::runner::Row;
use crate::{Result, OUT_DIR_ENV};

/// Output path: explicit flag, then config, then `$DRIFTEVO_OUT_DIR/<default_name>`, then `./<default_name>`.
pub fn resolve_out(flag: Option<&Path>, config: Option<&Path>, default_name: &str) -> PathBuf {
    if let Some(p) = flag.or(config) {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(default_name),
        _ => PathBuf::from(default_name),
    }
}

/// `run.csv` -> `run.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

/// Trajectory CSV with the resolved config on a leading `#` line.
pub struct CsvSink {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    pub fn create(path: &Path, config: &Value) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "# config: {}", serde_json::to_string(config).expect("json"))?;
        Ok(CsvSink { writer: csv::Writer::from_writer(file) })
    }

    pub fn write_rows(&mut self, rows: &[Row]) -> Result<()> {
        for r in rows {
            self.writer.serialize(r)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| crate::HarnessError::Io(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_name() {
        assert_eq!(summary_path(Path::new("out/run.csv")), PathBuf::from("out/run.summary.json"));
    }

    #[test]
    fn explicit_paths_win() {
        assert_eq!(resolve_out(Some(Path::new("a.csv")), Some(Path::new("b.csv")), "run.csv"), PathBuf::from("a.csv"));
        assert_eq!(resolve_out(None, Some(Path::new("b.csv")), "run.csv"), PathBuf::from("b.csv"));
    }
}
