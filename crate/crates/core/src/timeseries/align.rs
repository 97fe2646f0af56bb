//! Assignment of raw samples to the nearest grid timestamps.

use thiserror::Error;

use super::{Grid, RawSample, TimeSeries};

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("mixed sensor ids in one alignment batch: `{first}` and `{second}`")]
    MixedSensors { first: String, second: String },
}

/// Places each sample on the nearest grid timestamp.
///
/// A sample is kept when its distance to an existing grid timestamp is at
/// most half a step; a sample exactly halfway between two timestamps goes to
/// the earlier one. When several samples land on one cell, the one closest
/// to the cell timestamp wins, with ties broken toward the earlier (then
/// smaller) sample so the result is independent of input order.
pub fn align_to_grid(samples: &[RawSample], grid: Grid) -> Result<TimeSeries, AlignError> {
    let sensor = samples.first().map(|s| s.sensor.clone()).unwrap_or_default();

    // (distance, sample time, value): the full tie-break key.
    let mut best: Vec<Option<(i64, i64, f64)>> = vec![None; grid.cell_count()];
    let step_us = i64::from(grid.step_secs()) * 1_000_000;

    for sample in samples {
        if sample.sensor != sensor {
            return Err(AlignError::MixedSensors {
                first: sensor,
                second: sample.sensor.clone(),
            });
        }
        let off_us = (sample.at - grid.start())
            .num_microseconds()
            .expect("offset fits in microseconds");
        let below = off_us.div_euclid(step_us);
        // Candidates are the grid cells on either side of the sample; the
        // earlier one is tried first so exact midpoints resolve to it.
        let mut chosen: Option<(i64, i64)> = None;
        for cell in [below, below + 1] {
            if cell < 0 || cell as usize >= grid.cell_count() {
                continue;
            }
            let dist = (off_us - cell * step_us).abs();
            if 2 * dist > step_us {
                continue;
            }
            if chosen.is_none_or(|(d, _)| dist < d) {
                chosen = Some((dist, cell));
            }
        }
        let Some((dist, cell)) = chosen else { continue };
        // Values are finite, so the plain tuple order is total here.
        let key = (dist, sample.at.timestamp_micros(), sample.value);
        let slot = &mut best[cell as usize];
        if slot.is_none_or(|incumbent| key < incumbent) {
            *slot = Some(key);
        }
    }

    let cells = best.into_iter().map(|b| b.map(|(_, _, v)| v)).collect();
    Ok(TimeSeries::new(sensor, grid, cells))
}
