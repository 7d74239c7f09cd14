//! Regression-locked constants.
//!
//! Empirical maxima (sweep ratios, counting-chain constants) have no closed
//! form to assert against, so the first run on a given grid freezes what it
//! saw into a plain-text store and every later run must reproduce it.  The
//! store is meant to be committed; CI then compares and never rewrites an
//! existing entry.
//!
//! One entry per line: `target|fingerprint|value|tolerance`, where the
//! fingerprint is a human-readable description of the exact grid.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use charlab::{Error, Result};

/// What happened when an observation met the store.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LockOutcome {
    /// No entry existed; the observation is now the locked value.
    Initialized,
    /// The observation reproduced the locked value within tolerance.
    Matched { locked: f64 },
    /// The observation disagrees with the locked value — a regression.
    Drifted { locked: f64, tolerance: f64 },
}

impl fmt::Display for LockOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LockOutcome::Initialized => write!(f, "initialized"),
            LockOutcome::Matched { locked } => write!(f, "matched locked value {locked}"),
            LockOutcome::Drifted { locked, tolerance } => {
                write!(f, "drifted from locked value {locked} (tolerance {tolerance})")
            }
        }
    }
}

/// The on-disk map from (target, grid fingerprint) to a locked constant.
#[derive(Debug)]
pub struct RegressionStore {
    path: PathBuf,
    entries: BTreeMap<(String, String), (f64, f64)>,
    added: usize,
}

impl RegressionStore {
    /// Open a store, treating a missing file as empty.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut entries = BTreeMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Domain(format!("cannot read lock store {}: {e}", path.display())))?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let parts: Vec<&str> = line.split('|').collect();
                if parts.len() != 4 {
                    return Err(Error::Domain(format!(
                        "lock store {}: line {} has {} fields, expected 4",
                        path.display(),
                        idx + 1,
                        parts.len()
                    )));
                }
                let value: f64 = parts[2].parse().map_err(|_| {
                    Error::Domain(format!("lock store line {}: bad value `{}`", idx + 1, parts[2]))
                })?;
                let tol: f64 = parts[3].parse().map_err(|_| {
                    Error::Domain(format!("lock store line {}: bad tolerance `{}`", idx + 1, parts[3]))
                })?;
                entries.insert((parts[0].to_string(), parts[1].to_string()), (value, tol));
            }
        }
        Ok(RegressionStore { path, entries, added: 0 })
    }

    /// The committed store at the repository root.
    pub fn default_path() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../locks/constants.txt")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The locked (value, tolerance) for a key, if present.
    pub fn get(&self, target: &str, fingerprint: &str) -> Option<(f64, f64)> {
        self.entries.get(&(target.to_string(), fingerprint.to_string())).copied()
    }

    /// Compare an observation against the locked value, or lock it if the
    /// key is new.  Matching means |observed − locked| ≤ tol·max(1, |locked|);
    /// a deterministic pipeline should reproduce locked values exactly, and
    /// the tolerance only absorbs cross-platform rounding.
    pub fn check_or_init(
        &mut self,
        target: &str,
        fingerprint: &str,
        observed: f64,
        tolerance: f64,
    ) -> Result<LockOutcome> {
        if target.contains('|') || fingerprint.contains('|') {
            return Err(Error::Domain("lock keys must not contain `|`".into()));
        }
        if !observed.is_finite() {
            return Err(Error::Domain(format!(
                "cannot lock non-finite value {observed} for {target}|{fingerprint}"
            )));
        }
        let key = (target.to_string(), fingerprint.to_string());
        match self.entries.get(&key) {
            Some(&(locked, tol)) => {
                if (observed - locked).abs() <= tol * locked.abs().max(1.0) {
                    Ok(LockOutcome::Matched { locked })
                } else {
                    Ok(LockOutcome::Drifted { locked, tolerance: tol })
                }
            }
            None => {
                self.entries.insert(key, (observed, tolerance));
                self.added += 1;
                Ok(LockOutcome::Initialized)
            }
        }
    }

    /// Write the store back, but only when this session added new entries —
    /// existing values are never rewritten.
    pub fn save(&mut self) -> Result<()> {
        if self.added == 0 {
            return Ok(());
        }
        if let Some(dir) = self.path.parent() {
            std::fs::create_dir_all(dir)
                .map_err(|e| Error::Domain(format!("cannot create {}: {e}", dir.display())))?;
        }
        let mut text = String::from(
            "# Regression-locked constants: target|fingerprint|value|tolerance.\n\
             # Entries are frozen on first run; re-runs on the same grid must\n\
             # reproduce them.  Delete a line only to deliberately re-baseline.\n",
        );
        for ((target, fingerprint), (value, tol)) in &self.entries {
            text.push_str(&format!("{target}|{fingerprint}|{value}|{tol}\n"));
        }
        std::fs::write(&self.path, text)
            .map_err(|e| Error::Domain(format!("cannot write lock store {}: {e}", self.path.display())))?;
        self.added = 0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_then_match_then_drift() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.txt");

        let mut store = RegressionStore::open(&path).unwrap();
        assert!(store.is_empty());
        let first = store.check_or_init("theorem1", "grid-a", 1.25, 1e-9).unwrap();
        assert_eq!(first, LockOutcome::Initialized);
        store.save().unwrap();

        let mut reopened = RegressionStore::open(&path).unwrap();
        assert_eq!(reopened.len(), 1);
        assert_eq!(reopened.get("theorem1", "grid-a"), Some((1.25, 1e-9)));
        let again = reopened.check_or_init("theorem1", "grid-a", 1.25, 1e-9).unwrap();
        assert_eq!(again, LockOutcome::Matched { locked: 1.25 });
        let drift = reopened.check_or_init("theorem1", "grid-a", 1.2500001, 1e-9).unwrap();
        assert!(matches!(drift, LockOutcome::Drifted { locked, .. } if locked == 1.25));
    }

    #[test]
    fn save_is_a_no_op_without_new_entries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.txt");
        let mut store = RegressionStore::open(&path).unwrap();
        store.save().unwrap();
        assert!(!path.exists());
    }

    #[test]
    fn values_round_trip_through_text() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.txt");
        let value = 0.123456789012345678;
        {
            let mut store = RegressionStore::open(&path).unwrap();
            store.check_or_init("aset-chain", "s=3,4;link=A", value, 1e-9).unwrap();
            store.save().unwrap();
        }
        let store = RegressionStore::open(&path).unwrap();
        let (locked, _) = store.get("aset-chain", "s=3,4;link=A").unwrap();
        assert_eq!(locked.to_bits(), value.to_bits());
    }

    #[test]
    fn malformed_stores_and_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.txt");
        std::fs::write(&path, "theorem1|grid\n").unwrap();
        assert!(RegressionStore::open(&path).is_err());

        let empty = dir.path().join("fresh.txt");
        let mut store = RegressionStore::open(&empty).unwrap();
        assert!(store.check_or_init("a|b", "fp", 1.0, 1e-9).is_err());
        assert!(store.check_or_init("a", "fp", f64::INFINITY, 1e-9).is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("constants.txt");
        std::fs::write(&path, "# header\n\ntheorem1|g|2.5|1e-9\n").unwrap();
        let store = RegressionStore::open(&path).unwrap();
        assert_eq!(store.get("theorem1", "g"), Some((2.5, 1e-9)));
    }
}
