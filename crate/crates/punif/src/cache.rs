//! On-disk cache of enumerated level sets.
//!
//! One JSON file per `(n, d, k, construction)`; the construction string is
//! hashed together with the format version into the file name, so a changed
//! construction never reads a stale file. Unreadable or mismatching files
//! are rebuilt and overwritten.

use std::fs;
use std::path::{Path, PathBuf};

use punif_core::galois::Register;
use punif_core::hierarchy::{
    enumerate_level, Completeness, LevelSet, CONSTRUCTION_CLIFFORD_BFS, CONSTRUCTION_PHASE, CONSTRUCTION_SEMI_CLIFFORD,
    CONSTRUCTION_WEYL,
};
use punif_core::matcore::DEFAULT_UNITARITY_TOL;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::matrix_json::MatrixFile;

pub const CACHE_VERSION: u32 = 1;
pub const CACHE_DIR_ENV: &str = "PUNIF_CACHE_DIR";

const CONSTRUCTIONS: [&str; 4] =
    [CONSTRUCTION_PHASE, CONSTRUCTION_WEYL, CONSTRUCTION_CLIFFORD_BFS, CONSTRUCTION_SEMI_CLIFFORD];

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    n: usize,
    d: u32,
    k: u32,
    construction: String,
    construction_hash: String,
    completeness: String,
    representatives: Vec<MatrixFile>,
}

pub fn construction_hash(construction: &str) -> String {
    let digest = Sha256::digest(format!("punif-level-cache/v{CACHE_VERSION}/{construction}").as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn completeness_name(c: Completeness) -> &'static str {
    match c {
        Completeness::Exact => "exact",
        Completeness::CandidateFamily => "candidate-family",
    }
}

#[derive(Clone, Debug)]
pub struct LevelCache {
    dir: PathBuf,
}

impl LevelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        LevelCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, n: usize, d: u32, k: u32, construction: &str) -> PathBuf {
        self.dir.join(format!("level-n{n}-d{d}-k{k}-{}.json", construction_hash(construction)))
    }

    /// Loads a level set built by `construction`, if a valid file exists.
    pub fn load(&self, n: usize, d: u32, k: u32, construction: &str) -> Option<LevelSet> {
        let text = fs::read_to_string(self.path_for(n, d, k, construction)).ok()?;
        let file: CacheFile = serde_json::from_str(&text).ok()?;
        if file.version != CACHE_VERSION
            || (file.n, file.d, file.k) != (n, d, k)
            || file.construction != construction
            || file.construction_hash != construction_hash(construction)
        {
            return None;
        }
        let construction = CONSTRUCTIONS.iter().copied().find(|c| *c == file.construction)?;
        let completeness = match file.completeness.as_str() {
            "exact" => Completeness::Exact,
            "candidate-family" => Completeness::CandidateFamily,
            _ => return None,
        };
        let reg = Register::new(n, d).ok()?;
        let mut representatives = Vec::with_capacity(file.representatives.len());
        for m in &file.representatives {
            let u = m.to_unitary(DEFAULT_UNITARITY_TOL).ok()?;
            if u.register() != reg {
                return None;
            }
            representatives.push(u);
        }
        if representatives.is_empty() {
            return None;
        }
        Some(LevelSet { level: k, reg, representatives, completeness, construction })
    }

    pub fn store(&self, set: &LevelSet) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let file = CacheFile {
            version: CACHE_VERSION,
            n: set.reg.n,
            d: set.reg.d.get(),
            k: set.level,
            construction: set.construction.to_string(),
            construction_hash: construction_hash(set.construction),
            completeness: completeness_name(set.completeness).to_string(),
            representatives: set.representatives.iter().map(|u| MatrixFile::from_operator(u)).collect(),
        };
        let path = self.path_for(file.n, file.d, file.k, set.construction);
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec(&file)?).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Enumerates level `k`, going through `cache` when one is given.
/// The flag is true on a cache hit.
pub fn level_set(cache: Option<&LevelCache>, n: usize, d: u32, k: u32) -> Result<(LevelSet, bool)> {
    let Some(cache) = cache else {
        return Ok((enumerate_level(n, d, k)?, false));
    };
    let construction = match k {
        0 => CONSTRUCTION_PHASE,
        1 => CONSTRUCTION_WEYL,
        2 => CONSTRUCTION_CLIFFORD_BFS,
        _ => CONSTRUCTION_SEMI_CLIFFORD,
    };
    if let Some(set) = cache.load(n, d, k, construction) {
        return Ok((set, true));
    }
    let set = enumerate_level(n, d, k)?;
    if set.construction == construction {
        cache.store(&set)?;
    }
    Ok((set, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = LevelCache::new(dir.path());
        let (first, hit) = level_set(Some(&cache), 1, 2, 2).unwrap();
        assert!(!hit);
        let (second, hit) = level_set(Some(&cache), 1, 2, 2).unwrap();
        assert!(hit);
        assert_eq!(first.len(), second.len());
        assert_eq!(second.completeness, Completeness::Exact);
        for (a, b) in first.representatives.iter().zip(&second.representatives) {
            assert_eq!(a.operator(), b.operator());
        }
        second.validate().unwrap();
    }

    #[test]
    fn corrupt_or_stale_files_are_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let cache = LevelCache::new(dir.path());
        let path = cache.path_for(1, 3, 1, CONSTRUCTION_WEYL);
        fs::write(&path, "not json").unwrap();
        let (set, hit) = level_set(Some(&cache), 1, 3, 1).unwrap();
        assert!(!hit);
        assert_eq!(set.len(), 9);
        let text = fs::read_to_string(&path).unwrap().replace("\"version\":1", "\"version\":0");
        fs::write(&path, text).unwrap();
        assert!(cache.load(1, 3, 1, CONSTRUCTION_WEYL).is_none());
        assert_ne!(construction_hash(CONSTRUCTION_WEYL), construction_hash(CONSTRUCTION_PHASE));
    }

    #[test]
    fn out_of_scope_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let e = level_set(Some(&LevelCache::new(dir.path())), 2, 2, 2).unwrap_err();
        assert_eq!(e.exit_code(), crate::error::exit::OUT_OF_SCOPE);
    }
}
