//! Prime tables shared across runs, optionally cached on disk.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use super::run::write_atomic;
use crate::error::Result;
use crate::prime_kernel::PrimeTable;

/// Environment variable naming the table cache directory.
pub const TABLE_CACHE_ENV: &str = "MODAVG_TABLE_CACHE";

pub struct TableSource {
    cache_dir: Option<PathBuf>,
    memo: Mutex<HashMap<u64, Arc<PrimeTable>>>,
}

impl TableSource {
    pub fn in_memory() -> Self {
        TableSource { cache_dir: None, memo: Mutex::new(HashMap::new()) }
    }

    pub fn with_cache_dir(dir: Option<PathBuf>) -> Self {
        TableSource { cache_dir: dir, memo: Mutex::new(HashMap::new()) }
    }

    pub fn cache_path(&self, horizon: u64) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join(format!("primes-{horizon}.bin")))
    }

    /// Table for exactly `horizon`: memory, then disk cache, then a fresh sieve
    /// (written back to the cache when one is configured).
    pub fn get(&self, horizon: u64) -> Result<Arc<PrimeTable>> {
        if let Some(t) = self.memo.lock().expect("table memo").get(&horizon) {
            return Ok(t.clone());
        }
        let path = self.cache_path(horizon);
        let cached = path
            .as_ref()
            .filter(|p| p.exists())
            .and_then(|p| std::fs::File::open(p).ok())
            .and_then(|f| PrimeTable::read_cache(std::io::BufReader::new(f)).ok())
            .filter(|t| t.horizon() == horizon);
        let table = match cached {
            Some(t) => t,
            None => {
                let t = PrimeTable::new(horizon)?;
                if let Some(p) = &path {
                    let mut buf = Vec::new();
                    t.write_cache(&mut buf)?;
                    write_atomic(p, &buf)?;
                }
                t
            }
        };
        let table = Arc::new(table);
        self.memo.lock().expect("table memo").insert(horizon, table.clone());
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let src = TableSource::with_cache_dir(Some(dir.path().to_path_buf()));
        let a = src.get(1000).unwrap();
        assert!(src.cache_path(1000).unwrap().exists());
        let fresh = TableSource::with_cache_dir(Some(dir.path().to_path_buf()));
        let b = fresh.get(1000).unwrap();
        assert_eq!(a.primes(), b.primes());
        assert!(TableSource::in_memory().get(1).is_err());
    }
}
