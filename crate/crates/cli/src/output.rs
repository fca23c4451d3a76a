//! Atomic CSV/JSON outputs and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub command: String,
    pub files: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Output directory of one run. Files are written through a temporary
/// file in the same directory and renamed into place.
pub struct OutputDir {
    dir: PathBuf,
    config_hash: String,
    command: String,
    files: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(dir: &Path, config_hash: String, command: String) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
        Ok(OutputDir { dir: dir.to_path_buf(), config_hash, command, files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let io = |e| CliError::io(target.display().to_string(), e);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&target).map_err(|e| io(e.error))?;
        Ok(())
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        self.write_atomic(name, bytes)?;
        self.files.push(ManifestEntry { file: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    /// CSV with a leading `# config_hash=…` comment line.
    pub fn csv<R>(&mut self, name: &str, header: &[&str], rows: R) -> Result<(), CliError>
    where
        R: IntoIterator,
        R::Item: IntoIterator,
        <R::Item as IntoIterator>::Item: ToString,
    {
        let mut buf = format!("# config_hash={}\n", self.config_hash).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let csv_err = |e: csv::Error| CliError::io(name, std::io::Error::other(e));
            w.write_record(header).map_err(csv_err)?;
            for row in rows {
                let fields: Vec<String> = row.into_iter().map(|x| x.to_string()).collect();
                w.write_record(&fields).map_err(csv_err)?;
            }
            w.flush().map_err(|e| CliError::io(name, e))?;
        }
        self.record(name, &buf)
    }

    /// Pretty JSON with a top-level `config_hash` field.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let stamped = Stamped { config_hash: &self.config_hash, body };
        let mut bytes = serde_json::to_vec_pretty(&stamped).map_err(|e| CliError::io(name, e.into()))?;
        bytes.push(b'\n');
        self.record(name, &bytes)
    }

    /// Writes the manifest last; returns it.
    pub fn finish(self) -> Result<Manifest, CliError> {
        let manifest = Manifest { config_hash: self.config_hash.clone(), command: self.command.clone(), files: self.files };
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::io(MANIFEST, e.into()))?;
        bytes.push(b'\n');
        let out = OutputDir { dir: self.dir, config_hash: self.config_hash, command: self.command, files: Vec::new() };
        out.write_atomic(MANIFEST, &bytes)?;
        Ok(manifest)
    }
}

/// Re-hashes every file listed in the manifest of `dir`; returns the names
/// whose hash differs.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, CliError> {
    let path = dir.join(MANIFEST);
    let text = fs::read(&path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let manifest: Manifest =
        serde_json::from_slice(&text).map_err(|e| CliError::Schema(format!("manifest: {e}")))?;
    let mut bad = Vec::new();
    for entry in manifest.files {
        let p = dir.join(&entry.file);
        let bytes = fs::read(&p).map_err(|e| CliError::io(p.display().to_string(), e))?;
        if sha256_hex(&bytes) != entry.sha256 {
            bad.push(entry.file);
        }
    }
    Ok(bad)
}
