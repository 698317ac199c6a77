//! Output files and the run manifest.
//!
//! Every file is written to a temporary sibling and renamed into place. The
//! manifest goes last, so a directory holding `manifest.json` holds every
//! file the manifest lists.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Range(format!("`{}` is not a file path", path.display())))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical JSON form of the validated config.
    pub config_hash: String,
    pub version: String,
    pub seed: Option<u64>,
    /// File name to SHA-256, for every output except the manifest.
    pub outputs: BTreeMap<String, String>,
    /// Walk steps scheduled by the run.
    pub steps: u64,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    /// Equality on everything except the wall clock.
    pub fn same_run(&self, other: &RunManifest) -> bool {
        RunManifest {
            wall_clock_seconds: 0.0,
            ..self.clone()
        } == RunManifest {
            wall_clock_seconds: 0.0,
            ..other.clone()
        }
    }

    pub fn read(dir: &Path) -> Result<RunManifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// Collects outputs for one run directory.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    checksums: BTreeMap<String, String>,
    pub steps: u64,
}

impl OutputSet {
    /// Creates the directory and removes a manifest left by an earlier run,
    /// so the directory never pairs a stale manifest with new files.
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let old = dir.join(MANIFEST_FILE);
        if old.exists() {
            fs::remove_file(&old).map_err(|e| Error::io(&old, e))?;
        }
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            checksums: BTreeMap::new(),
            steps: 0,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if name == MANIFEST_FILE {
            return Err(Error::Range(format!("`{MANIFEST_FILE}` is reserved")));
        }
        write_atomic(&self.dir.join(name), bytes)?;
        self.checksums.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).expect("output serializes");
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn finish(self, command: &str, config_hash: String, seed: Option<u64>, wall_clock_seconds: f64) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            outputs: self.checksums,
            steps: self.steps,
            wall_clock_seconds,
        };
        let mut s = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        s.push('\n');
        write_atomic(&self.dir.join(MANIFEST_FILE), s.as_bytes())?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn outputs_then_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::create(dir.path()).unwrap();
        out.write("a.txt", b"hello").unwrap();
        assert!(!dir.path().join(MANIFEST_FILE).exists());
        let m = out.finish("gen", "h".into(), None, 0.5).unwrap();
        assert_eq!(RunManifest::read(dir.path()).unwrap(), m);
        assert_eq!(m.outputs["a.txt"], sha256_hex(b"hello"));
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 2, "no temporary files left: {names:?}");
        // a new run clears the old manifest first
        OutputSet::create(dir.path()).unwrap();
        assert!(!dir.path().join(MANIFEST_FILE).exists());
    }
}
