//! Content addressed store of JSON payloads under the cache root. Entries
//! are `{key, payload}`; the file name is the sha256 of the key.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const ENV_ROOT: &str = "TRANSFER_CACHE_DIR";
pub const ENV_PARANOID: &str = "TRANSFER_CACHE_PARANOID";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheKey {
    pub kind: String,
    pub law: String,
    pub prec: u32,
    pub qprec: i64,
}

impl CacheKey {
    pub fn new(kind: &str, law: &str, prec: u32, qprec: i64) -> CacheKey {
        CacheKey { kind: kind.into(), law: law.into(), prec, qprec }
    }

    fn to_json(&self) -> Value {
        json!({"kind": self.kind, "law": self.law, "prec": self.prec, "qprec": self.qprec})
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().to_string().as_bytes()))
    }
}

pub struct Cache {
    root: Option<PathBuf>,
    paranoid: bool,
}

impl Cache {
    pub fn new(root: Option<PathBuf>) -> Cache {
        let paranoid = std::env::var(ENV_PARANOID).is_ok_and(|v| !v.is_empty() && v != "0");
        Cache { root, paranoid }
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    fn path(&self, key: &CacheKey) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(format!("{}.json", key.digest())))
    }

    fn read(&self, key: &CacheKey, path: &Path) -> Option<Value> {
        let text = fs::read_to_string(path).ok()?;
        let entry: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(_) => {
                eprintln!("warning: corrupt cache entry {}, recomputing", path.display());
                return None;
            }
        };
        if entry.get("key") != Some(&key.to_json()) || entry.get("payload").is_none() {
            eprintln!("warning: cache entry {} does not match its key, recomputing", path.display());
            return None;
        }
        entry.get("payload").cloned()
    }

    fn write(&self, key: &CacheKey, path: &Path, payload: &Value) -> std::io::Result<()> {
        let dir = path.parent().expect("cache files live in the root");
        fs::create_dir_all(dir)?;
        let text = json!({"key": key.to_json(), "payload": payload}).to_string();
        let tmp = dir.join(format!(".{}.{}.tmp", key.digest(), std::process::id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    }

    pub fn get_or_compute<E>(&self, key: &CacheKey, compute: impl Fn() -> Result<Value, E>) -> Result<Value, E> {
        let Some(path) = self.path(key) else {
            return compute();
        };
        if let Some(hit) = self.read(key, &path) {
            if !self.paranoid {
                return Ok(hit);
            }
            let fresh = compute()?;
            if fresh != hit {
                eprintln!("warning: cache entry {} differs from recomputation, overwriting", path.display());
                self.store(key, &path, &fresh);
            }
            return Ok(fresh);
        }
        let fresh = compute()?;
        self.store(key, &path, &fresh);
        Ok(fresh)
    }

    fn store(&self, key: &CacheKey, path: &Path, payload: &Value) {
        if let Err(e) = self.write(key, path, payload) {
            eprintln!("warning: could not write cache entry {}: {e}", path.display());
        }
    }

    /// Number of entries and their total size in bytes.
    pub fn stats(&self) -> (usize, u64) {
        let Some(root) = &self.root else { return (0, 0) };
        let Ok(dir) = fs::read_dir(root) else { return (0, 0) };
        let mut n = 0;
        let mut bytes = 0;
        for e in dir.flatten() {
            let p = e.path();
            if p.extension().is_some_and(|x| x == "json") {
                n += 1;
                bytes += e.metadata().map(|m| m.len()).unwrap_or(0);
            }
        }
        (n, bytes)
    }

    pub fn clear(&self) -> std::io::Result<usize> {
        let Some(root) = &self.root else { return Ok(0) };
        let Ok(dir) = fs::read_dir(root) else { return Ok(0) };
        let mut n = 0;
        for e in dir.flatten() {
            let p = e.path();
            if p.extension().is_some_and(|x| x == "json" || x == "tmp") {
                fs::remove_file(&p)?;
                n += 1;
            }
        }
        Ok(n)
    }
}
