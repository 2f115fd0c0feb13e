//! Seeded synthetic series for fixtures, demos and benchmarks.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::TimeSeriesTable;
use crate::error::Result;

/// Samples per day at a 10-minute granularity.
pub const STEPS_PER_DAY: usize = 144;

/// A multichannel series resembling 10-minute meteorological data: each
/// channel mixes a daily cycle, a slow drift, AR(1) noise and occasional
/// level shifts, at its own scale and offset.
pub fn weather_like(rows: usize, channels: usize, seed: u64) -> Result<TimeSeriesTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::with_capacity(channels);
    for _ in 0..channels {
        let scale = 10f64.powf(rng.random_range(-1.0..2.5));
        let offset = rng.random_range(-2.0..2.0) * scale;
        let daily = rng.random_range(0.2..1.0);
        let phase = rng.random_range(0.0..TAU);
        let drift_period = rng.random_range(20.0..60.0) * STEPS_PER_DAY as f64;
        let drift = rng.random_range(0.2..1.5);
        let ar = rng.random_range(0.85..0.99);
        let noise = rng.random_range(0.02..0.15);
        let mut eps = 0.0;
        let mut level = 0.0;
        let col = (0..rows)
            .map(|i| {
                let t = i as f64;
                eps = ar * eps + noise * (rng.random::<f64>() - 0.5) * 3.46;
                if rng.random::<f64>() < 1e-3 {
                    level += rng.random_range(-0.3..0.3);
                }
                let v = daily * (TAU * t / STEPS_PER_DAY as f64 + phase).sin()
                    + drift * (TAU * t / drift_period).sin()
                    + level
                    + eps;
                offset + scale * v
            })
            .collect();
        columns.push(col);
    }
    let names = (0..channels).map(|m| format!("feature_{m}")).collect();
    let stamps = (0..rows)
        .map(|i| {
            let minutes = (i + 1) * 10;
            format!("day{:05} {:02}:{:02}", minutes / 1440, (minutes % 1440) / 60, minutes % 60)
        })
        .collect();
    TimeSeriesTable::from_columns(names, columns)?.with_timestamps(stamps)
}

/// Sum of sinusoids. Any such series obeys a linear recurrence of order
/// `2·periods.len()`, so its future is an exact linear function of a long
/// enough lookback.
pub fn sinusoids(rows: usize, periods: &[f64], amplitudes: &[f64]) -> Vec<f64> {
    (0..rows)
        .map(|i| {
            periods
                .iter()
                .zip(amplitudes)
                .enumerate()
                .map(|(k, (p, a))| a * (TAU * i as f64 / p + 0.7 * k as f64).sin())
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let a = weather_like(500, 3, 7).unwrap();
        let b = weather_like(500, 3, 7).unwrap();
        let c = weather_like(500, 3, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.num_channels(), 3);
        assert_eq!(a.num_timestamps(), 500);
    }
}
