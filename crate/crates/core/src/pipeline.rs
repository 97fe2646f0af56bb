//! Batch workflow: ingest logged data, preprocess it onto the evaluation
//! grid, evaluate every state space and reconcile markers.
//!
//! Preprocessing runs per sensor in the normative order align → outlier
//! removal → gap interpolation.

use std::collections::HashMap;

use chrono_tz::Tz;
use thiserror::Error;

use crate::eval::{EvalContext, EvalError, DEFAULT_EQ_EPS};
use crate::report::{summarize, RunCounters, Summary};
use crate::spec::ast::SpaceMode;
use crate::spec::ResolvedSpec;
use crate::statespace::{
    eval_statespace, reconcile_markers, transition_diagnostics, MarkerReconciliation,
    StateSpaceResult, TransitionDiagnostic,
};
use crate::timeseries::{
    align_to_grid, detect_outliers, interpolate_gaps, parse_bounds_csv, parse_marker_csv,
    parse_sensor_csv, Grid, IngestError, PlausibilityBounds, RawSample, TimeSeries,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("the spec defines no state space to evaluate")]
    NoStateSpaces,
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Knobs of one evaluation run.
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub grid: Grid,
    pub zone: Tz,
    pub eq_eps: f64,
    pub max_gap_cells: usize,
    /// Overrides the declared mode of every state space when set.
    pub mode_override: Option<SpaceMode>,
}

impl PipelineOptions {
    pub fn new(grid: Grid) -> Self {
        PipelineOptions {
            grid,
            zone: Tz::UTC,
            eq_eps: DEFAULT_EQ_EPS,
            max_gap_cells: 1,
            mode_override: None,
        }
    }
}

/// Everything produced for one state space.
#[derive(Debug, Clone)]
pub struct SpaceOutcome {
    pub result: StateSpaceResult,
    /// Present when a marker stream for this space was supplied.
    pub reconciliation: Option<MarkerReconciliation>,
    pub transitions: Vec<TransitionDiagnostic>,
    pub summary: Summary,
}

/// Output of one run, spaces in document order.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub spaces: Vec<SpaceOutcome>,
    /// Run-wide preprocessing counters (mismatches are per space).
    pub counters: RunCounters,
}

impl PipelineOutput {
    pub fn any_violated(&self) -> bool {
        self.spaces
            .iter()
            .any(|s| s.result.verdict.counts().1 > 0)
    }

    pub fn any_no_data(&self) -> bool {
        self.spaces
            .iter()
            .any(|s| s.result.verdict.counts().2 > 0)
    }
}

/// Runs preprocess → evaluate → reconcile over in-memory CSV logs.
pub fn run_pipeline(
    spec: &ResolvedSpec,
    sensor_csvs: &[&[u8]],
    marker_csv: Option<&[u8]>,
    bounds_csv: Option<&[u8]>,
    opts: &PipelineOptions,
) -> Result<PipelineOutput, PipelineError> {
    if spec.statespaces().next().is_none() {
        return Err(PipelineError::NoStateSpaces);
    }
    let grid = opts.grid;

    let mut by_sensor: HashMap<String, Vec<RawSample>> = HashMap::new();
    let mut counters = RunCounters::default();
    for bytes in sensor_csvs {
        let parsed = parse_sensor_csv(bytes)?;
        counters.rejected_rows += parsed.rejected_rows;
        for sample in parsed.samples {
            by_sensor.entry(sample.sensor.clone()).or_default().push(sample);
        }
    }

    let bounds = match bounds_csv {
        Some(bytes) => {
            let parsed = parse_bounds_csv(bytes)?;
            counters.rejected_rows += parsed.rejected_rows;
            parsed.bounds
        }
        None => HashMap::new(),
    };

    let mut dataset: HashMap<String, TimeSeries> = HashMap::new();
    let mut required: Vec<String> = spec.required_sensor_ids().into_iter().collect();
    required.sort();
    for sensor in required {
        let Some(samples) = by_sensor.get(&sensor) else {
            continue; // EvalContext::new reports the full missing set
        };
        // one sensor id per bucket by construction
        let aligned = align_to_grid(samples, grid).expect("sensor buckets are keyed by id");
        let sensor_bounds = bounds.get(&sensor).cloned().unwrap_or(PlausibilityBounds {
            sensor: sensor.clone(),
            ..Default::default()
        });
        let (cleaned, outliers) = detect_outliers(&aligned, &sensor_bounds);
        counters.outlier_cells += outliers.total();
        let (filled, interpolated) = interpolate_gaps(&cleaned, opts.max_gap_cells);
        counters.interpolated_cells += interpolated;
        dataset.insert(sensor, filled);
    }

    let markers = match marker_csv {
        Some(bytes) => {
            let parsed = parse_marker_csv(bytes, grid)?;
            counters.rejected_rows += parsed.rejected_rows;
            parsed.series
        }
        None => HashMap::new(),
    };

    let first_offset = *grid.timestamp(0).with_timezone(&opts.zone).offset();
    counters.offset_shifted_cells = grid
        .timestamps()
        .filter(|t| t.with_timezone(&opts.zone).offset() != &first_offset)
        .count();

    let ctx = EvalContext::new(spec, &dataset, grid)?
        .with_zone(opts.zone)
        .with_eq_eps(opts.eq_eps);

    let mut spaces = Vec::new();
    for declared in spec.statespaces() {
        let mut ss = declared.clone();
        if let Some(mode) = opts.mode_override {
            ss.mode = mode;
        }
        let mut result = eval_statespace(&ss, &ctx)?;

        let marker_series = markers.get(&ss.name);
        result.observed_markers = marker_series.cloned();

        let reconciliation = marker_series.map(|series| {
            let marker_map: HashMap<String, String> = ss
                .states
                .iter()
                .filter_map(|s| s.marker_value.clone().map(|m| (s.id.clone(), m)))
                .collect();
            reconcile_markers(&result, series, &marker_map)
        });
        let transitions = marker_series
            .map(|series| transition_diagnostics(series, &ss))
            .unwrap_or_default();

        let space_counters = RunCounters {
            marker_mismatches: reconciliation
                .as_ref()
                .map_or(0, |r| r.mismatches.len()),
            ..counters
        };
        let summary = summarize(&result, &space_counters);

        spaces.push(SpaceOutcome {
            result,
            reconciliation,
            transitions,
            summary,
        });
    }

    Ok(PipelineOutput { spaces, counters })
}
