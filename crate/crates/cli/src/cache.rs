//! Directory of exact counts, one plain-text file per `(n, r)`.
//!
//! A record looks like
//!
//! ```text
//! n=8
//! r=3
//! exact_count=4806
//! backend=band_dp
//! tool_version=0.1.0
//! timestamp=2026-01-01T00:00:00Z
//! ```
//!
//! Files are written to a temporary name and renamed into place, and an
//! existing record is never overwritten, so each key has a single writer.
//! Loading checks that a record is well formed and in range; only
//! [`Cache::recheck`] recomputes counts.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use permball::oracle::{ball_size_exact_with, Backend, ExactCount, ExactOptions};
use permball::BallSpec;

use crate::error::{CliError, CliResult};
use crate::TOOL_VERSION;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheRecord {
    pub n: usize,
    pub r: usize,
    pub exact_count: BigUint,
    pub backend: Backend,
    pub tool_version: String,
    pub timestamp: String,
}

impl CacheRecord {
    pub fn new(spec: BallSpec, count: &ExactCount, backend: Backend) -> Self {
        CacheRecord {
            n: spec.n(),
            r: spec.r(),
            exact_count: count.value().clone(),
            backend,
            tool_version: TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "n={}\nr={}\nexact_count={}\nbackend={}\ntool_version={}\ntimestamp={}\n",
            self.n,
            self.r,
            self.exact_count,
            self.backend.name(),
            self.tool_version,
            self.timestamp
        )
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut fields = std::collections::HashMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line.split_once('=').ok_or_else(|| format!("malformed line {line:?}"))?;
            if fields.insert(k.trim(), v.trim()).is_some() {
                return Err(format!("duplicate field {k:?}"));
            }
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| format!("missing field {k:?}"));
        let num = |k: &str| get(k)?.parse::<usize>().map_err(|e| format!("field {k}: {e}"));
        Ok(CacheRecord {
            n: num("n")?,
            r: num("r")?,
            exact_count: get("exact_count")?.parse().map_err(|e| format!("field exact_count: {e}"))?,
            backend: get("backend")?.parse().map_err(|e| format!("field backend: {e}"))?,
            tool_version: get("tool_version")?.to_string(),
            timestamp: get("timestamp")?.to_string(),
        })
    }

    pub fn spec(&self) -> Result<BallSpec, String> {
        BallSpec::new(self.n, self.r).map_err(|e| e.to_string())
    }

    /// The stored count, range-checked against its key.
    pub fn count(&self) -> Result<ExactCount, String> {
        ExactCount::new(self.spec()?, self.exact_count.clone()).map_err(|e| e.to_string())
    }
}

/// Outcome of recomputing one cached record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecheckFailure {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> CliResult<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Cache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, n: usize, r: usize) -> PathBuf {
        self.dir.join(format!("n{n}_r{r}.txt"))
    }

    /// The record for `spec`, if present. A record that does not parse, does
    /// not match its file name, or holds an impossible count is an error.
    pub fn load(&self, spec: BallSpec) -> CliResult<Option<CacheRecord>> {
        let path = self.path_for(spec.n(), spec.r());
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CliError::io(path, e)),
        };
        let bad = |why: String| CliError::Verification(format!("corrupt cache record {}: {why}", path.display()));
        let record = CacheRecord::parse(&text).map_err(bad)?;
        if (record.n, record.r) != (spec.n(), spec.r()) {
            return Err(bad(format!("holds n={}, r={}", record.n, record.r)));
        }
        record.count().map_err(bad)?;
        Ok(Some(record))
    }

    /// Writes `record` unless a record for the key already exists.
    pub fn store(&self, record: &CacheRecord) -> CliResult<()> {
        let path = self.path_for(record.n, record.r);
        let io_err = |e| CliError::io(&path, e);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io_err)?;
        tmp.write_all(record.to_text().as_bytes()).map_err(io_err)?;
        tmp.as_file().sync_all().map_err(io_err)?;
        match tmp.persist_noclobber(&path) {
            Ok(_) => Ok(()),
            Err(e) if e.error.kind() == io::ErrorKind::AlreadyExists => Ok(()),
            Err(e) => Err(io_err(e.error)),
        }
    }

    /// The exact count for `spec`, read from the cache or computed and stored.
    /// The flag reports whether the cache supplied it.
    pub fn exact(&self, spec: BallSpec, options: &ExactOptions) -> CliResult<(ExactCount, Backend, bool)> {
        if let Some(rec) = self.load(spec)? {
            let count = rec.count().map_err(CliError::Verification)?;
            return Ok((count, rec.backend, true));
        }
        let result = ball_size_exact_with(spec, options)?;
        self.store(&CacheRecord::new(spec, &result.count, result.backend))?;
        Ok((result.count, result.backend, false))
    }

    /// Every `*.txt` file in the cache, sorted by name.
    pub fn record_paths(&self) -> CliResult<Vec<PathBuf>> {
        let entries = fs::read_dir(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let mut paths = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| CliError::io(&self.dir, e))?.path();
            if path.extension().is_some_and(|x| x == "txt") {
                paths.push(path);
            }
        }
        paths.sort();
        Ok(paths)
    }

    /// Recomputes every cached count and reports the ones that disagree.
    pub fn recheck(&self, options: &ExactOptions) -> CliResult<(usize, Vec<RecheckFailure>)> {
        let mut failures = Vec::new();
        let paths = self.record_paths()?;
        for path in &paths {
            let fail = |reason: String| RecheckFailure { path: path.clone(), reason };
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let record = match CacheRecord::parse(&text) {
                Ok(r) => r,
                Err(why) => {
                    failures.push(fail(why));
                    continue;
                }
            };
            if path != &self.path_for(record.n, record.r) {
                failures.push(fail(format!("file name does not match n={}, r={}", record.n, record.r)));
                continue;
            }
            let spec = match record.spec() {
                Ok(s) => s,
                Err(why) => {
                    failures.push(fail(why));
                    continue;
                }
            };
            match ball_size_exact_with(spec, options) {
                Ok(res) if res.count.value() == &record.exact_count => {}
                Ok(res) => failures.push(fail(format!(
                    "n={} r={}: stored {} but recomputed {} ({})",
                    record.n, record.r, record.exact_count, res.count, res.backend
                ))),
                Err(e) => failures.push(fail(format!("cannot recompute: {e}"))),
            }
        }
        Ok((paths.len(), failures))
    }
}
