//! Output directory: JSON documents, headered CSV tables and the run
//! manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn record(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.root.join(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.record(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Numeric table; non-finite values are written as `inf`, `-inf`, `NaN`.
    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let path = self.record(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Table whose leading columns are text.
    pub fn write_labeled_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = (Vec<String>, Vec<f64>)>,
    {
        let path = self.record(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for (label, row) in rows {
            let mut record = label;
            record.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Wall time lives in its own file so every other output is a pure
    /// function of the inputs and the seed.
    pub fn write_timing(&self, seconds: f64) -> Result<(), CliError> {
        let mut f = fs::File::create(self.root.join(TIMING_FILE))?;
        writeln!(f, "{{\n  \"wall_time_seconds\": {seconds}\n}}")?;
        Ok(())
    }
}

pub const TIMING_FILE: &str = "timing.json";

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: &'a C,
    pub rows_used: Option<usize>,
    pub rows_dropped: Option<usize>,
    pub outputs: Vec<String>,
    pub timing_file: &'a str,
    /// Set when the command failed after the output directory was created.
    pub error: Option<String>,
}
