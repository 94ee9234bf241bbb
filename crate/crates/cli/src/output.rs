//! Output directory with its manifest, and the content-addressed result cache.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const CACHE_FORMAT: u32 = 1;
pub const CACHE_ENV: &str = "TEUKOLSKY_CACHE_DIR";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the canonical JSON form (sorted keys) of a value.
pub fn canonical_hash<T: Serialize>(v: &T) -> Result<String, CliError> {
    let value = serde_json::to_value(v)?;
    Ok(sha256_hex(serde_json::to_string(&value)?.as_bytes()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub schema: u32,
    pub command: String,
    pub versions: Value,
    pub config_hash: String,
    /// The configuration with every default filled in.
    pub config: Value,
    pub cache: &'static str,
    pub summary: Value,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
}

/// Every file of a run goes through this writer so the manifest lists all of them.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), files: vec![], started: Instant::now() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        if name.contains('/') || name == "manifest.json" {
            return Err(CliError::Compute(format!("invalid output name {name}")));
        }
        fs::write(self.root.join(name), bytes)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.into(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_vec_pretty(v)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn read(&self, name: &str) -> Result<Vec<u8>, CliError> {
        Ok(fs::read(self.root.join(name))?)
    }

    pub fn finish<C: Serialize>(
        self,
        command: &str,
        config: &C,
        cache: &'static str,
        summary: Value,
    ) -> Result<PathBuf, CliError> {
        let manifest = Manifest {
            schema: crate::config::SCHEMA_VERSION,
            command: command.into(),
            versions: serde_json::json!({
                "teukolsky": teukolsky::VERSION,
                "teukolsky-cli": env!("CARGO_PKG_VERSION"),
            }),
            config_hash: canonical_hash(config)?,
            config: serde_json::to_value(config)?,
            cache,
            summary,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            files: self.files,
        };
        let path = self.root.join("manifest.json");
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    cache_format: u32,
    version: String,
    files: Vec<FileEntry>,
    summary: Value,
}

/// Content-addressed store of whole command results under `$TEUKOLSKY_CACHE_DIR`.
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn from_env() -> Option<Cache> {
        let root = std::env::var_os(CACHE_ENV).map(PathBuf::from).or_else(|| {
            std::env::var_os("XDG_CACHE_HOME")
                .map(PathBuf::from)
                .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))
                .map(|p| p.join("teukolsky"))
        })?;
        Some(Cache { root })
    }

    pub fn key<C: Serialize>(command: &str, config: &C) -> Result<String, CliError> {
        canonical_hash(&serde_json::json!({
            "command": command,
            "config": config,
            "cache_format": CACHE_FORMAT,
            "version": teukolsky::VERSION,
        }))
    }

    /// Copies a cached result into `out`. Entries of another format or version, or with corrupt
    /// files, are removed and reported as a miss.
    pub fn restore(&self, key: &str, out: &mut OutputDir) -> Option<Value> {
        let dir = self.root.join(key);
        let entry: CacheEntry = serde_json::from_slice(&fs::read(dir.join("entry.json")).ok()?).ok().or_else(|| {
            let _ = fs::remove_dir_all(&dir);
            None
        })?;
        let valid = entry.cache_format == CACHE_FORMAT && entry.version == teukolsky::VERSION;
        let contents: Option<Vec<Vec<u8>>> = valid
            .then(|| {
                entry
                    .files
                    .iter()
                    .map(|f| fs::read(dir.join(&f.name)).ok().filter(|b| sha256_hex(b) == f.sha256))
                    .collect()
            })
            .flatten();
        let Some(contents) = contents else {
            log::info!("discarding stale cache entry {key}");
            let _ = fs::remove_dir_all(&dir);
            return None;
        };
        for (f, bytes) in entry.files.iter().zip(contents) {
            out.write(&f.name, &bytes).ok()?;
        }
        Some(entry.summary)
    }

    /// Stores the files written so far to `out`.
    pub fn store(&self, key: &str, out: &OutputDir, summary: &Value) -> Result<(), CliError> {
        fs::create_dir_all(&self.root)?;
        let tmp = self.root.join(format!(".{key}.{}", std::process::id()));
        fs::create_dir_all(&tmp)?;
        for f in out.files() {
            fs::write(tmp.join(&f.name), out.read(&f.name)?)?;
        }
        let entry = CacheEntry {
            cache_format: CACHE_FORMAT,
            version: teukolsky::VERSION.into(),
            files: out.files().to_vec(),
            summary: summary.clone(),
        };
        fs::write(tmp.join("entry.json"), serde_json::to_vec(&entry)?)?;
        let dest = self.root.join(key);
        let _ = fs::remove_dir_all(&dest);
        fs::rename(&tmp, &dest)?;
        Ok(())
    }
}
