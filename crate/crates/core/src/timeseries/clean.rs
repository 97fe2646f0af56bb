//! Outlier removal and gap interpolation on aligned series.

use super::{PlausibilityBounds, TimeSeries};

/// How many cells each outlier pass removed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutlierCounts {
    /// Values outside the static min/max range.
    pub range: usize,
    /// Values whose jump from the previous present value exceeded `max_step`.
    pub jump: usize,
}

impl OutlierCounts {
    pub fn total(&self) -> usize {
        self.range + self.jump
    }
}

/// Blanks implausible values.
///
/// First pass: values outside `[min, max]` become missing. Second pass: a
/// value whose jump from the previous *present* value exceeds `max_step`
/// becomes missing. Removed values never feed the jump comparison, so one
/// spike does not take its successors with it. The operation is idempotent
/// for fixed bounds.
pub fn detect_outliers(
    series: &TimeSeries,
    bounds: &PlausibilityBounds,
) -> (TimeSeries, OutlierCounts) {
    debug_assert!(
        bounds.sensor.is_empty() || bounds.sensor == series.sensor(),
        "bounds for `{}` applied to series `{}`",
        bounds.sensor,
        series.sensor()
    );

    let mut out = series.clone();
    let mut counts = OutlierCounts::default();

    if bounds.min.is_some() || bounds.max.is_some() {
        for cell in out.cells_mut().iter_mut() {
            if let Some(v) = *cell {
                let below = bounds.min.is_some_and(|min| v < min);
                let above = bounds.max.is_some_and(|max| v > max);
                if below || above {
                    *cell = None;
                    counts.range += 1;
                }
            }
        }
    }

    if let Some(max_step) = bounds.max_step {
        let mut prev: Option<f64> = None;
        for cell in out.cells_mut().iter_mut() {
            if let Some(v) = *cell {
                match prev {
                    Some(p) if (v - p).abs() > max_step => {
                        *cell = None;
                        counts.jump += 1;
                    }
                    _ => prev = Some(v),
                }
            }
        }
    }

    (out, counts)
}

/// Fills short gaps by linear interpolation.
///
/// A run of missing cells is filled when it is at most `max_gap_cells` long
/// and has present values on both sides; boundary gaps stay missing. Present
/// values are never altered, so the operation is idempotent.
pub fn interpolate_gaps(series: &TimeSeries, max_gap_cells: usize) -> (TimeSeries, usize) {
    let mut out = series.clone();
    let cells = out.cells_mut();
    let mut filled = 0usize;

    let mut i = 0;
    while i < cells.len() {
        if cells[i].is_some() {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < cells.len() && cells[i].is_none() {
            i += 1;
        }
        let run_len = i - run_start;
        if run_len > max_gap_cells || run_start == 0 || i == cells.len() {
            continue;
        }
        let left = cells[run_start - 1].expect("run starts after a present cell");
        let right = cells[i].expect("run ends before a present cell");
        let span = (run_len + 1) as f64;
        for (k, cell) in cells[run_start..i].iter_mut().enumerate() {
            *cell = Some(left + (right - left) * ((k + 1) as f64) / span);
            filled += 1;
        }
    }

    (out, filled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::Grid;
    use chrono::{DateTime, Utc};

    fn series(values: &[Option<f64>]) -> TimeSeries {
        let start: DateTime<Utc> = "2011-01-10T00:00:00Z".parse().unwrap();
        let end = start + chrono::Duration::seconds(900 * values.len() as i64);
        let grid = Grid::new(start, end, 900).unwrap();
        TimeSeries::new("s", grid, values.to_vec())
    }

    fn bounds(min: Option<f64>, max: Option<f64>, max_step: Option<f64>) -> PlausibilityBounds {
        PlausibilityBounds {
            sensor: "s".into(),
            min,
            max,
            max_step,
        }
    }

    #[test]
    fn range_violation_removed() {
        let input = series(&[Some(20.0), Some(900.0), Some(21.0)]);
        let (out, counts) = detect_outliers(&input, &bounds(Some(-30.0), Some(60.0), None));
        assert_eq!(out.cells(), &[Some(20.0), None, Some(21.0)]);
        assert_eq!(counts, OutlierCounts { range: 1, jump: 0 });
    }

    #[test]
    fn no_bounds_is_identity() {
        let input = series(&[Some(20.0), Some(900.0), None]);
        let (out, counts) = detect_outliers(&input, &bounds(None, None, None));
        assert_eq!(out, input);
        assert_eq!(counts.total(), 0);
    }

    #[test]
    fn jump_violations_do_not_cascade() {
        // The spike is removed; the return to 20 compares against the
        // previous present value (20), not the removed 55.
        let input = series(&[Some(20.0), Some(20.0), Some(55.0), Some(20.0)]);
        let (out, counts) = detect_outliers(&input, &bounds(None, None, Some(10.0)));
        assert_eq!(out.cells(), &[Some(20.0), Some(20.0), None, Some(20.0)]);
        assert_eq!(counts, OutlierCounts { range: 0, jump: 1 });
    }

    #[test]
    fn consecutive_jumps_both_removed() {
        let input = series(&[Some(0.0), Some(11.0), Some(12.0)]);
        let (out, counts) = detect_outliers(&input, &bounds(None, None, Some(10.0)));
        assert_eq!(out.cells(), &[Some(0.0), None, None]);
        assert_eq!(counts.jump, 2);
    }

    #[test]
    fn outlier_removal_is_idempotent() {
        let input = series(&[Some(20.0), Some(20.0), Some(55.0), Some(20.0), Some(-99.0)]);
        let b = bounds(Some(-30.0), Some(60.0), Some(10.0));
        let (once, _) = detect_outliers(&input, &b);
        let (twice, counts) = detect_outliers(&once, &b);
        assert_eq!(once, twice);
        assert_eq!(counts.total(), 0);
    }

    #[test]
    fn single_gap_filled_linearly() {
        let input = series(&[Some(20.0), None, Some(22.0)]);
        let (out, filled) = interpolate_gaps(&input, 1);
        assert_eq!(out.cells(), &[Some(20.0), Some(21.0), Some(22.0)]);
        assert_eq!(filled, 1);
    }

    #[test]
    fn long_gap_stays_missing() {
        let input = series(&[Some(20.0), None, None, Some(23.0)]);
        let (out, filled) = interpolate_gaps(&input, 1);
        assert_eq!(out, input);
        assert_eq!(filled, 0);
        // but a two-cell budget fills it
        let (out, filled) = interpolate_gaps(&input, 2);
        assert_eq!(out.cells(), &[Some(20.0), Some(21.0), Some(22.0), Some(23.0)]);
        assert_eq!(filled, 2);
    }

    #[test]
    fn boundary_gaps_never_filled() {
        let leading = series(&[None, Some(20.0)]);
        assert_eq!(interpolate_gaps(&leading, 1).0, leading);
        let trailing = series(&[Some(20.0), None]);
        assert_eq!(interpolate_gaps(&trailing, 1).0, trailing);
        let all_missing = series(&[None, None, None]);
        assert_eq!(interpolate_gaps(&all_missing, 5).0, all_missing);
    }

    #[test]
    fn interpolation_is_idempotent() {
        let input = series(&[Some(20.0), None, Some(22.0), None, None, Some(25.0)]);
        let (once, _) = interpolate_gaps(&input, 1);
        let (twice, filled) = interpolate_gaps(&once, 1);
        assert_eq!(once, twice);
        assert_eq!(filled, 0);
    }

    #[test]
    fn zero_gap_budget_is_identity() {
        let input = series(&[Some(20.0), None, Some(22.0)]);
        assert_eq!(interpolate_gaps(&input, 0).0, input);
    }
}
