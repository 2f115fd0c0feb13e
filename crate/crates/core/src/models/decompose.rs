use crate::error::{Error, Result};

/// Trend/seasonal split of a lookback window.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionPair {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
}

/// Centered moving average with replicated edges as the trend; the remainder
/// is the seasonal part.
pub fn decompose(x: &[f64], kernel: usize) -> Result<DecompositionPair> {
    if x.is_empty() {
        return Err(Error::InvalidInput("cannot decompose an empty series".into()));
    }
    if kernel.is_multiple_of(2) || kernel >= 2 * x.len() {
        return Err(Error::InvalidInput(format!(
            "moving-average kernel must be odd and at most {}, got {kernel}",
            2 * x.len() - 1
        )));
    }
    let half = (kernel - 1) / 2;
    let n = x.len() as isize;
    let at = |i: isize| x[i.clamp(0, n - 1) as usize];
    let trend: Vec<f64> = (0..n)
        .map(|i| (i - half as isize..=i + half as isize).map(at).sum::<f64>() / kernel as f64)
        .collect();
    let seasonal = x.iter().zip(&trend).map(|(v, t)| v - t).collect();
    Ok(DecompositionPair { trend, seasonal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_computed_example() {
        let d = decompose(&[1.0, 2.0, 3.0, 4.0, 5.0], 3).unwrap();
        let want = [4.0 / 3.0, 2.0, 3.0, 4.0, 14.0 / 3.0];
        for (a, b) in d.trend.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_series_and_unit_kernel() {
        let d = decompose(&[2.5; 9], 7).unwrap();
        assert!(d.trend.iter().all(|t| (t - 2.5).abs() < 1e-15));
        assert!(d.seasonal.iter().all(|s| s.abs() < 1e-15));
        let x = [0.3, -1.0, 4.0];
        let d = decompose(&x, 1).unwrap();
        assert_eq!(d.trend, x.to_vec());
        assert!(d.seasonal.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn rejects_even_kernel_and_empty_input() {
        assert!(decompose(&[1.0, 2.0, 3.0], 2).is_err());
        assert!(decompose(&[], 1).is_err());
        assert!(decompose(&[1.0, 2.0], 5).is_err());
    }

    proptest! {
        #[test]
        fn parts_reconstruct_input(
            x in prop::collection::vec(-100.0f64..100.0, 1..64),
            k in 0usize..32,
        ) {
            let kernel = (2 * k + 1).min(2 * x.len() - 1);
            let d = decompose(&x, kernel).unwrap();
            for i in 0..x.len() {
                prop_assert!((d.trend[i] + d.seasonal[i] - x[i]).abs() <= 1e-12);
            }
        }
    }
}
