use crate::error::{ensure_len, Error, Result};

/// Mean squared error and its gradient with respect to `pred`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    ensure_len("mse target", pred.len(), target.len())?;
    if pred.is_empty() {
        return Err(Error::InvalidInput("mse of empty vectors".into()));
    }
    let n = pred.len() as f64;
    let diff: Vec<f64> = pred.iter().zip(target).map(|(p, t)| p - t).collect();
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
    let grad = diff.iter().map(|d| 2.0 * d / n).collect();
    Ok((loss, grad))
}

/// Mean absolute error.
pub fn mae(pred: &[f64], target: &[f64]) -> Result<f64> {
    ensure_len("mae target", pred.len(), target.len())?;
    if pred.is_empty() {
        return Err(Error::InvalidInput("mae of empty vectors".into()));
    }
    Ok(pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_examples() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), (0.0, vec![0.0, 0.0]));
        assert_eq!(mse_loss(&[1.0, 3.0], &[1.0, 1.0]).unwrap(), (2.0, vec![0.0, 2.0]));
        assert_eq!(mae(&[1.0, 3.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse_loss(&[], &[]).is_err());
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(
            pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..12)
        ) {
            let (pred, target): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let (_, g) = mse_loss(&pred, &target).unwrap();
            let h = 1e-5;
            for i in 0..pred.len() {
                let mut p = pred.clone();
                p[i] += h;
                let up = mse_loss(&p, &target).unwrap().0;
                p[i] -= 2.0 * h;
                let down = mse_loss(&p, &target).unwrap().0;
                prop_assert!(((up - down) / (2.0 * h) - g[i]).abs() < 1e-7);
            }
        }
    }
}
