//! On-disk cache of classification reports keyed by (tool version, n, stage).

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use crescent_core::{classify_pipeline, Budget, ClassificationReport};
use sha2::{Digest, Sha256};

use crate::artifact::{to_json, TOOL_VERSION};
use crate::error::CliError;

pub const CACHE_ENV: &str = "CRESCENT_CACHE_DIR";
const DEFAULT_DIR: &str = ".crescent-cache";

pub fn cache_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))
}

pub fn cache_key(n: usize, stage: &str) -> String {
    hex::encode(Sha256::digest(format!("{TOOL_VERSION}|n={n}|stage={stage}")))
}

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    fn path(&self, n: usize, stage: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}.json", cache_key(n, stage))))
    }

    /// Cached report if present and readable, otherwise a fresh one that is
    /// then stored. A failed store only warns.
    pub fn classification(&self, n: usize, budget: &Budget) -> Result<(ClassificationReport, bool), CliError> {
        budget.check(n)?;
        let path = self.path(n, "classify");
        if let Some(p) = &path {
            if let Ok(text) = fs::read_to_string(p) {
                match serde_json::from_str::<ClassificationReport>(&text) {
                    Ok(r) if r.n == n => return Ok((r, true)),
                    _ => eprintln!("warning: ignoring unreadable cache entry {}", p.display()),
                }
            }
        }
        let report = classify_pipeline(n, budget)?;
        if let Some(p) = &path {
            let stored = p.parent().map_or(Ok(()), fs::create_dir_all).and_then(|_| fs::write(p, to_json(&report)));
            if let Err(e) = stored {
                eprintln!("warning: could not write cache entry {}: {e}", p.display());
            }
        }
        Ok((report, false))
    }
}
