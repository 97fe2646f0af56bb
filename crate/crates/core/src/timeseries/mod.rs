//! Ingestion and preprocessing of logged sensor and marker data.
//!
//! Raw logs arrive as timestamped samples in arbitrary order. The pipeline
//! turns them into equidistant series on a shared evaluation grid:
//! alignment first, then outlier removal, then gap interpolation — in that
//! order, so outliers never anchor interpolated values.

mod align;
mod clean;
mod csv_io;

pub use align::align_to_grid;
pub use clean::{detect_outliers, interpolate_gaps, OutlierCounts};
pub use csv_io::{
    parse_bounds_csv, parse_marker_csv, parse_sensor_csv, BoundsCsv, IngestError, MarkerCsv,
    SensorCsv,
};

use chrono::{DateTime, Utc};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid start {start} must be before end {end}")]
    EmptyRange {
        start: DateTime<Utc>,
        end: DateTime<Utc>,
    },
    #[error("grid step must be at least 1 second")]
    ZeroStep,
    #[error("span of {span_secs} s is not a whole number of {step_secs} s steps")]
    UnevenSpan { span_secs: i64, step_secs: u32 },
}

/// An equidistant timestamp lattice: `cells` timestamps starting at `start`,
/// spaced `step_secs` apart. The end bound is exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    start: DateTime<Utc>,
    step_secs: u32,
    cells: usize,
}

impl Grid {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>, step_secs: u32) -> Result<Grid, GridError> {
        if step_secs == 0 {
            return Err(GridError::ZeroStep);
        }
        if start >= end {
            return Err(GridError::EmptyRange { start, end });
        }
        let span_secs = (end - start).num_seconds();
        if span_secs % i64::from(step_secs) != 0 {
            return Err(GridError::UnevenSpan {
                span_secs,
                step_secs,
            });
        }
        Ok(Grid {
            start,
            step_secs,
            cells: (span_secs / i64::from(step_secs)) as usize,
        })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    /// Exclusive end of the grid.
    pub fn end(&self) -> DateTime<Utc> {
        self.start + chrono::Duration::seconds(i64::from(self.step_secs) * self.cells as i64)
    }

    pub fn step_secs(&self) -> u32 {
        self.step_secs
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn timestamp(&self, cell: usize) -> DateTime<Utc> {
        debug_assert!(cell < self.cells);
        self.start + chrono::Duration::seconds(i64::from(self.step_secs) * cell as i64)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = DateTime<Utc>> + '_ {
        (0..self.cells).map(|i| self.timestamp(i))
    }
}

/// A single logged measurement before grid alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub sensor: String,
    pub at: DateTime<Utc>,
    pub value: f64,
}

/// One sensor's values on a grid; `None` cells carry no data.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    sensor: String,
    grid: Grid,
    cells: Vec<Option<f64>>,
}

impl TimeSeries {
    pub fn new(sensor: impl Into<String>, grid: Grid, cells: Vec<Option<f64>>) -> TimeSeries {
        let cells_len = cells.len();
        assert_eq!(
            cells_len,
            grid.cell_count(),
            "series length must equal grid cell count"
        );
        debug_assert!(cells.iter().flatten().all(|v| v.is_finite()));
        TimeSeries {
            sensor: sensor.into(),
            grid,
            cells,
        }
    }

    pub fn empty(sensor: impl Into<String>, grid: Grid) -> TimeSeries {
        TimeSeries {
            sensor: sensor.into(),
            grid,
            cells: vec![None; grid.cell_count()],
        }
    }

    pub fn sensor(&self) -> &str {
        &self.sensor
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn cells(&self) -> &[Option<f64>] {
        &self.cells
    }

    pub fn value(&self, cell: usize) -> Option<f64> {
        self.cells[cell]
    }

    pub fn present_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub(crate) fn cells_mut(&mut self) -> &mut Vec<Option<f64>> {
        &mut self.cells
    }
}

/// Mode markers logged by the BMS for one state space, sampled onto a grid
/// with step-hold semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSeries {
    statespace: String,
    grid: Grid,
    cells: Vec<Option<String>>,
}

impl MarkerSeries {
    pub fn new(
        statespace: impl Into<String>,
        grid: Grid,
        cells: Vec<Option<String>>,
    ) -> MarkerSeries {
        assert_eq!(cells.len(), grid.cell_count());
        MarkerSeries {
            statespace: statespace.into(),
            grid,
            cells,
        }
    }

    pub fn statespace(&self) -> &str {
        &self.statespace
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn cells(&self) -> &[Option<String>] {
        &self.cells
    }

    pub fn marker(&self, cell: usize) -> Option<&str> {
        self.cells[cell].as_deref()
    }
}

/// Static plausibility limits for one sensor. Unset fields disable the
/// corresponding check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlausibilityBounds {
    pub sensor: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Largest tolerated |Δvalue| between a value and the previous present one.
    pub max_step: Option<f64>,
}
