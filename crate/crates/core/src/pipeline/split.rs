//! Seeded train/validation split.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    /// Strictly between 0 and 1.
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitConfig {
    pub const DEFAULT_TRAIN_FRACTION: f64 = 0.9;

    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::domain(format!(
                "train fraction must lie strictly between 0 and 1, got {train_fraction}"
            )));
        }
        Ok(SplitConfig {
            train_fraction,
            seed,
        })
    }
}

/// Shuffles `ids` with a ChaCha8 stream seeded by `cfg.seed` and sends the
/// first `floor(train_fraction * n)` to train.
///
/// Ids are sorted before shuffling, so the result depends only on the id set.
pub fn split_dataset(ids: &[String], cfg: &SplitConfig) -> Result<(Vec<String>, Vec<String>)> {
    let n = ids.len();
    if n < 2 {
        return Err(Error::domain(format!(
            "need at least 2 ids to split, got {n}"
        )));
    }
    let mut seen = HashSet::with_capacity(n);
    if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(Error::DuplicateImageId(dup.clone()));
    }

    // the epsilon keeps decimal ratios like 0.57 * 100 from flooring to 56
    let n_train = (cfg.train_fraction * n as f64 + 1e-9).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::domain(format!(
            "fraction {} of {n} ids leaves an empty split",
            cfg.train_fraction
        )));
    }

    let mut shuffled = ids.to_vec();
    shuffled.sort();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let val = shuffled.split_off(n_train);
    Ok((shuffled, val))
}

/// Writes `train.txt` and `val.txt`, one id per line.
pub fn write_split_lists(dir: &Path, train: &[String], val: &[String]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, ids) in [("train.txt", train), ("val.txt", val)] {
        let path = dir.join(name);
        let body: String = ids.iter().map(|id| format!("{id}\n")).collect();
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("img_{i:04}")).collect()
    }

    #[test]
    fn dataset_sizes() {
        let cfg = SplitConfig::new(0.9, 7).unwrap();
        let (t, v) = split_dataset(&ids(330), &cfg).unwrap();
        assert_eq!((t.len(), v.len()), (297, 33));
        let (t, v) = split_dataset(&ids(659), &cfg).unwrap();
        assert_eq!((t.len(), v.len()), (593, 66));
    }

    #[test]
    fn deterministic_and_order_free() {
        let cfg = SplitConfig::new(0.9, 42).unwrap();
        let a = split_dataset(&ids(100), &cfg).unwrap();
        assert_eq!(a, split_dataset(&ids(100), &cfg).unwrap());
        let mut reversed = ids(100);
        reversed.reverse();
        assert_eq!(a, split_dataset(&reversed, &cfg).unwrap());
        let other = split_dataset(&ids(100), &SplitConfig::new(0.9, 43).unwrap()).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn decimal_fraction_floors_exactly() {
        let (t, _) = split_dataset(&ids(100), &SplitConfig::new(0.57, 1).unwrap()).unwrap();
        assert_eq!(t.len(), 57);
    }

    #[test]
    fn errors() {
        assert!(SplitConfig::new(1.0, 0).is_err());
        assert!(SplitConfig::new(0.0, 0).is_err());
        let cfg = SplitConfig::new(0.9, 0).unwrap();
        assert!(split_dataset(&ids(1), &cfg).is_err());
        assert!(split_dataset(&ids(5), &SplitConfig::new(0.1, 0).unwrap()).is_err());
        assert_eq!(split_dataset(&ids(5), &cfg).unwrap().1.len(), 1);
        let dup = vec!["a".to_string(), "a".to_string(), "b".to_string()];
        assert!(matches!(
            split_dataset(&dup, &cfg),
            Err(Error::DuplicateImageId(_))
        ));
    }

    #[test]
    fn lists_are_newline_terminated() {
        let dir = tempfile::tempdir().unwrap();
        write_split_lists(dir.path(), &["a".into(), "b".into()], &["c".into()]).unwrap();
        assert_eq!(
            fs::read_to_string(dir.path().join("train.txt")).unwrap(),
            "a\nb\n"
        );
        assert_eq!(
            fs::read_to_string(dir.path().join("val.txt")).unwrap(),
            "c\n"
        );
    }
}
