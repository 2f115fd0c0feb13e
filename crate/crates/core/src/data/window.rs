use std::ops::Range;

use super::table::TimeSeriesTable;
use crate::error::{Error, Result};

/// One training/evaluation example: a lookback window and the values that
/// immediately follow it, for a single channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSample<'a> {
    pub lookback: &'a [f64],
    pub target: &'a [f64],
    pub channel: usize,
    pub start_time: usize,
}

/// Start times of every stride-1 window whose target lies entirely inside
/// `range`; the lookback may reach back before `range.start` but never before
/// timestamp 0.
pub fn window_starts(range: &Range<usize>, lookback: usize, horizon: usize) -> Range<usize> {
    let first = range.start.saturating_sub(lookback);
    let Some(last_target_start) = range.end.checked_sub(horizon) else {
        return 0..0;
    };
    if last_target_start < range.start || last_target_start < lookback {
        return 0..0;
    }
    let last = last_target_start - lookback;
    if last < first {
        0..0
    } else {
        first..last + 1
    }
}

/// Number of windows per channel: `window_starts(..).len()`.
pub fn window_count(range: &Range<usize>, lookback: usize, horizon: usize) -> usize {
    window_starts(range, lookback, horizon).len()
}

/// Windows of one channel, ordered by start time.
pub fn window_iter<'a>(
    table: &'a TimeSeriesTable,
    range: Range<usize>,
    lookback: usize,
    horizon: usize,
    channel: usize,
) -> Result<impl Iterator<Item = WindowSample<'a>> + 'a> {
    check_args(table, &range, lookback, horizon)?;
    if channel >= table.num_channels() {
        return Err(Error::InvalidInput(format!("channel {channel} out of range")));
    }
    let col = table.channel(channel);
    Ok(window_starts(&range, lookback, horizon).map(move |s| WindowSample {
        lookback: &col[s..s + lookback],
        target: &col[s + lookback..s + lookback + horizon],
        channel,
        start_time: s,
    }))
}

fn check_args(table: &TimeSeriesTable, range: &Range<usize>, lookback: usize, horizon: usize) -> Result<()> {
    if lookback == 0 || horizon == 0 {
        return Err(Error::InvalidInput("lookback and horizon must be at least 1".into()));
    }
    if range.end > table.num_timestamps() || range.start > range.end {
        return Err(Error::InvalidInput(format!(
            "range {range:?} outside a table of {} timestamps",
            table.num_timestamps()
        )));
    }
    Ok(())
}

/// Indexed access to `(input, target)` pairs.
pub trait SampleSet: Sync {
    fn len(&self) -> usize;

    fn sample(&self, index: usize) -> (&[f64], &[f64]);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All windows of all channels over one split range, channel-major.
#[derive(Debug, Clone)]
pub struct WindowDataset<'a> {
    table: &'a TimeSeriesTable,
    starts: Range<usize>,
    lookback: usize,
    horizon: usize,
}

impl<'a> WindowDataset<'a> {
    pub fn new(table: &'a TimeSeriesTable, range: Range<usize>, lookback: usize, horizon: usize) -> Result<Self> {
        check_args(table, &range, lookback, horizon)?;
        Ok(Self {
            table,
            starts: window_starts(&range, lookback, horizon),
            lookback,
            horizon,
        })
    }

    pub fn per_channel(&self) -> usize {
        self.starts.len()
    }

    pub fn lookback(&self) -> usize {
        self.lookback
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn window(&self, index: usize) -> WindowSample<'a> {
        let per = self.per_channel();
        let channel = index / per;
        let s = self.starts.start + index % per;
        let col = self.table.channel(channel);
        WindowSample {
            lookback: &col[s..s + self.lookback],
            target: &col[s + self.lookback..s + self.lookback + self.horizon],
            channel,
            start_time: s,
        }
    }
}

impl SampleSet for WindowDataset<'_> {
    fn len(&self) -> usize {
        self.per_channel() * self.table.num_channels()
    }

    fn sample(&self, index: usize) -> (&[f64], &[f64]) {
        let w = self.window(index);
        (w.lookback, w.target)
    }
}

/// Owned `(input, target)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InMemorySamples {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl InMemorySamples {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::dim("sample targets", inputs.len(), targets.len()));
        }
        Ok(Self { inputs, targets })
    }
}

impl SampleSet for InMemorySamples {
    fn len(&self) -> usize {
        self.inputs.len()
    }

    fn sample(&self, index: usize) -> (&[f64], &[f64]) {
        (&self.inputs[index], &self.targets[index])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_count(range: &Range<usize>, l: usize, t: usize) -> usize {
        (0..range.end)
            .filter(|&s| s + l >= range.start && s + l + t <= range.end)
            .count()
    }

    fn ramp(n: usize, channels: usize) -> TimeSeriesTable {
        let cols = (0..channels).map(|m| (0..n).map(|i| (i + 1000 * m) as f64).collect()).collect();
        TimeSeriesTable::from_columns((0..channels).map(|m| format!("c{m}")).collect(), cols).unwrap()
    }

    #[test]
    fn counting_rule_matches_brute_force() {
        for start in [0, 3, 10, 40] {
            for end in start..60 {
                for l in 1..12 {
                    for t in 1..8 {
                        let r = start..end;
                        assert_eq!(window_count(&r, l, t), brute_force_count(&r, l, t), "{r:?} L={l} T={t}");
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_examples() {
        // a range exactly T long with enough history yields one window
        assert_eq!(window_count(&(20..24), 10, 4), 1);
        // no preceding history: n − L − T + 1
        assert_eq!(window_count(&(0..50), 10, 4), 37);
        assert_eq!(window_count(&(0..10), 8, 4), 0);
        // weather-sized test split with L=336, T=96
        assert_eq!(window_count(&(42_156..52_696), 336, 96), 10_540 - 96 + 1);
    }

    #[test]
    fn windows_are_aligned_and_ordered() {
        let t = ramp(40, 2);
        let ws: Vec<_> = window_iter(&t, 28..32, 5, 2, 1).unwrap().collect();
        assert_eq!(ws.len(), 3);
        for (i, w) in ws.iter().enumerate() {
            assert_eq!(w.start_time, 23 + i);
            assert_eq!(w.target[0], t.value(w.start_time + 5, 1));
            assert_eq!(w.lookback.len(), 5);
            assert_eq!(w.lookback[4] + 1.0, w.target[0]);
        }
        assert!(window_iter(&t, 0..4, 5, 2, 0).unwrap().next().is_none());
        assert!(window_iter(&t, 0..4, 0, 2, 0).is_err());
        assert!(window_iter(&t, 0..4, 1, 2, 2).is_err());
    }

    #[test]
    fn dataset_is_channel_major() {
        let t = ramp(30, 3);
        let d = WindowDataset::new(&t, 0..30, 4, 2).unwrap();
        assert_eq!(d.per_channel(), 25);
        assert_eq!(d.len(), 75);
        let w = d.window(26);
        assert_eq!((w.channel, w.start_time), (1, 1));
        let (x, y) = d.sample(26);
        assert_eq!(x, &[1001.0, 1002.0, 1003.0, 1004.0]);
        assert_eq!(y, &[1005.0, 1006.0]);
    }
}
