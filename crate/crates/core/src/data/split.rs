use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chronological train → validation → test partition of the timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub train: Range<usize>,
    pub val: Range<usize>,
    pub test: Range<usize>,
}

/// Splits `n` timestamps at `floor(train·n)` and `floor((train+val)·n)`.
pub fn make_splits(n: usize, fractions: (f64, f64, f64)) -> Result<SplitSpec> {
    let (tr, va, te) = fractions;
    for (name, f) in [("train_fraction", tr), ("val_fraction", va), ("test_fraction", te)] {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::config(format!("data.{name}"), format!("must lie in (0, 1), got {f}")));
        }
    }
    if (tr + va + te - 1.0).abs() > 1e-9 {
        return Err(Error::config("data.fractions", format!("must sum to 1, got {}", tr + va + te)));
    }
    // the epsilon keeps exact products such as 0.8·100 from flooring to 79
    let cut = |f: f64| (((f * n as f64) + 1e-9).floor() as usize).min(n);
    let train_end = cut(tr);
    let val_end = cut(tr + va).max(train_end);
    Ok(SplitSpec {
        train_fraction: tr,
        val_fraction: va,
        test_fraction: te,
        train: 0..train_end,
        val: train_end..val_end,
        test: val_end..n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hundred_rows() {
        let s = make_splits(100, (0.7, 0.1, 0.2)).unwrap();
        assert_eq!((s.train, s.val, s.test), (0..70, 70..80, 80..100));
    }

    #[test]
    fn weather_sized_split() {
        let s = make_splits(52_696, (0.7, 0.1, 0.2)).unwrap();
        assert_eq!(s.train, 0..36_887);
        assert_eq!(s.val, 36_887..42_156);
        assert_eq!(s.test, 42_156..52_696);
    }

    #[test]
    fn invalid_fractions() {
        assert!(make_splits(100, (0.5, 0.5, 0.1)).is_err());
        assert!(make_splits(100, (0.7, 0.0, 0.3)).is_err());
        assert!(make_splits(100, (1.2, -0.1, -0.1)).is_err());
    }

    proptest! {
        #[test]
        fn ranges_partition_in_order(n in 0usize..200_000) {
            let s = make_splits(n, (0.7, 0.1, 0.2)).unwrap();
            prop_assert_eq!(s.train.start, 0);
            prop_assert_eq!(s.train.end, s.val.start);
            prop_assert_eq!(s.val.end, s.test.start);
            prop_assert_eq!(s.test.end, n);
            prop_assert_eq!(s.train.end, (7 * n) / 10);
            prop_assert_eq!(s.val.end, (8 * n) / 10);
        }
    }
}
