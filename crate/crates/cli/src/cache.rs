//! On-disk cache of enumeration results, keyed by polarization, target norm and version.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use enriq_core::DivisorClass;

/// Bumped whenever the stored layout or the enumeration order changes.
const FORMAT: u32 = 1;

pub fn code_version() -> String {
    format!("{}+{}", env!("CARGO_PKG_VERSION"), FORMAT)
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct Entry {
    h: [i64; 10],
    norm: i64,
    version: String,
    classes: Vec<[i64; 10]>,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(h: &DivisorClass, norm: i64) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("ulrich|{:?}|{norm}|{}", h.tripled(), code_version()));
        hex::encode(hasher.finalize())
    }

    fn path(&self, h: &DivisorClass, norm: i64) -> PathBuf {
        self.dir.join(format!("{}.json", Self::key(h, norm)))
    }

    /// Stored classes, or `None` when missing, unreadable or written for other inputs.
    pub fn load(&self, h: &DivisorClass, norm: i64) -> Option<Vec<DivisorClass>> {
        let text = fs::read_to_string(self.path(h, norm)).ok()?;
        let e: Entry = serde_json::from_str(&text).ok()?;
        if e.h != *h.tripled() || e.norm != norm || e.version != code_version() {
            return None;
        }
        e.classes.into_iter().map(|t| DivisorClass::from_tripled(t).ok()).collect()
    }

    pub fn store(&self, h: &DivisorClass, norm: i64, classes: &[DivisorClass]) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let e = Entry {
            h: *h.tripled(),
            norm,
            version: code_version(),
            classes: classes.iter().map(|c| *c.tripled()).collect(),
        };
        let path = self.path(h, norm);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(&e)?)?;
        fs::rename(tmp, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use enriq_core::fano_delta;

    #[test]
    fn round_trip_and_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let h = fano_delta();
        assert!(c.load(&h, -18).is_none());
        let xs = vec![DivisorClass::e(1), DivisorClass::e(2) - DivisorClass::e(3)];
        c.store(&h, -18, &xs).unwrap();
        assert_eq!(c.load(&h, -18).unwrap(), xs);
        assert!(c.load(&h, -20).is_none());
        assert_ne!(Cache::key(&h, -18), Cache::key(&(2 * h), -18));
        fs::write(c.path(&h, -18), "not json").unwrap();
        assert!(c.load(&h, -18).is_none());
    }
}
