//! Output directory handling. Every file lands via write-to-temp-then-rename,
//! so readers never see a partial CSV.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

pub const MANIFEST: &str = "manifest.json";
pub const OUT_ENV: &str = "HOKDV_OUT";
pub const DEFAULT_OUT: &str = "hokdv-out";

pub struct OutDir {
    path: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(path)?;
        Ok(OutDir { path: path.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Names of the files written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> std::io::Result<()> {
        let mut f = self.begin()?;
        f.write_all(contents)?;
        self.commit(f, name)
    }

    /// Temporary file in the output directory, to be finished with [`Self::commit`].
    pub fn begin(&self) -> std::io::Result<NamedTempFile> {
        NamedTempFile::new_in(&self.path)
    }

    pub fn commit(&mut self, file: NamedTempFile, name: &str) -> std::io::Result<()> {
        file.as_file().sync_all()?;
        file.persist(self.path.join(name)).map_err(|e| e.error)?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    /// Writes a CSV from a header and rows of already formatted cells.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(self.begin()?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let f = w.into_inner().map_err(|e| e.into_error())?;
        self.commit(f, name)
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub status: String,
    pub exit_code: i32,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    /// Resolved configuration including defaults.
    pub config: BTreeMap<String, serde_json::Value>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Shortest round-trip text for a float, the form used in every CSV cell.
pub fn cell(x: f64) -> String {
    format!("{x:?}")
}
