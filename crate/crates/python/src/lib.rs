//! Python bindings: spec checking, scenario generation and full evaluation
//! runs driven from Python.
//!
//! ```python
//! import bmspec
//! sensors, markers, spec = bmspec.generate_scenario(days=1, seed=42)
//! run = bmspec.evaluate(spec, [sensors], markers,
//!                       start="2011-01-10T00:00:00Z",
//!                       end="2011-01-11T00:00:00Z")
//! print(run.verdict_counts("RoomControl"))
//! ```

use chrono::{DateTime, NaiveDate, Utc};
use chrono_tz::Tz;
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use bmspec_core::pipeline::{run_pipeline, PipelineOptions, SpaceOutcome};
use bmspec_core::report::{build_carpet, export_results_csv, render_svg, CarpetKind};
use bmspec_core::scenario::{self, FaultInjection, FaultKind, ScenarioConfig};
use bmspec_core::spec::ast::SpaceMode;
use bmspec_core::spec::{parse_spec, pretty_print, resolve_spec, Resolved};
use bmspec_core::statespace::ActiveStates;
use bmspec_core::timeseries::Grid;

fn value_err(msg: impl Into<String>) -> PyErr {
    PyValueError::new_err(msg.into())
}

fn parse_utc(s: &str, what: &str) -> PyResult<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| value_err(format!("{what} `{s}` is not an ISO-8601 timestamp")))
}

fn parse_tz(s: &str) -> PyResult<Tz> {
    s.parse()
        .map_err(|_| value_err(format!("unknown timezone `{s}`")))
}

fn load_spec(text: &str) -> PyResult<Resolved> {
    let parsed = parse_spec(text).map_err(|d| value_err(d.render("<spec>")))?;
    resolve_spec(parsed.doc).map_err(|d| value_err(d.render("<spec>")))
}

/// Parses and validates spec text; returns a list of diagnostic dicts with
/// `severity`, `message`, `line` and `col`. An empty list means the spec is
/// valid; warnings are included but do not make it invalid.
#[pyfunction]
fn check_spec(py: Python<'_>, text: &str) -> PyResult<Vec<Py<PyDict>>> {
    let mut diags = Vec::new();
    match parse_spec(text) {
        Err(errors) => diags.extend(errors),
        Ok(parsed) => {
            diags.extend(parsed.warnings);
            match resolve_spec(parsed.doc) {
                Err(errors) => diags.extend(errors),
                Ok(resolved) => diags.extend(resolved.warnings),
            }
        }
    }
    diags
        .into_iter()
        .map(|d| {
            let dict = PyDict::new(py);
            dict.set_item("severity", d.severity.to_string())?;
            dict.set_item("message", d.message)?;
            dict.set_item("line", d.loc.line)?;
            dict.set_item("col", d.loc.col)?;
            Ok(dict.unbind())
        })
        .collect()
}

/// Reformats spec text into its canonical form.
#[pyfunction]
fn format_spec(text: &str) -> PyResult<String> {
    let parsed = parse_spec(text).map_err(|d| value_err(d.render("<spec>")))?;
    Ok(pretty_print(&parsed.doc))
}

fn fault_from_tuple(fault: (String, String, String, f64)) -> PyResult<FaultInjection> {
    let (kind, from, to, magnitude) = fault;
    let kind = FaultKind::parse_name(&kind).ok_or_else(|| {
        value_err(format!(
            "unknown fault kind `{kind}`; expected stuck-mode, setpoint-drift, wrong-marker or sensor-gap"
        ))
    })?;
    Ok(FaultInjection {
        kind,
        from: parse_utc(&from, "fault start")?,
        to: parse_utc(&to, "fault end")?,
        magnitude,
    })
}

/// Generates the room-temperature example scenario. Returns
/// `(sensor_csv, marker_csv, spec_text)`. Faults are
/// `(kind, from, to, magnitude)` tuples.
#[pyfunction]
#[pyo3(signature = (days=1, step=900, seed=42, reference=21.0, start_date="2011-01-10", faults=None))]
fn generate_scenario(
    py: Python<'_>,
    days: u32,
    step: u32,
    seed: u64,
    reference: f64,
    start_date: &str,
    faults: Option<Vec<(String, String, String, f64)>>,
) -> PyResult<(Py<PyBytes>, Py<PyBytes>, String)> {
    let start_date = start_date
        .parse::<NaiveDate>()
        .map_err(|_| value_err(format!("start_date `{start_date}` is not YYYY-MM-DD")))?;
    let config = ScenarioConfig {
        days,
        step_secs: step,
        seed,
        reference_value: reference,
        start_date,
        ..ScenarioConfig::default()
    };
    let faults = faults
        .unwrap_or_default()
        .into_iter()
        .map(fault_from_tuple)
        .collect::<PyResult<Vec<_>>>()?;
    let scenario = scenario::generate(&config, &faults).map_err(|e| value_err(e.to_string()))?;
    Ok((
        PyBytes::new(py, &scenario.sensor_csv).unbind(),
        PyBytes::new(py, &scenario.marker_csv).unbind(),
        scenario.spec_text,
    ))
}

/// One finished evaluation run over all state spaces in the spec.
#[pyclass]
struct Evaluation {
    spaces: Vec<SpaceOutcome>,
    zone: Tz,
}

impl Evaluation {
    fn space(&self, name: &str) -> PyResult<&SpaceOutcome> {
        self.spaces
            .iter()
            .find(|s| s.result.statespace == name)
            .ok_or_else(|| PyKeyError::new_err(format!("no state space named `{name}`")))
    }
}

#[pymethods]
impl Evaluation {
    /// Names of the evaluated state spaces, in document order.
    fn statespaces(&self) -> Vec<String> {
        self.spaces
            .iter()
            .map(|s| s.result.statespace.clone())
            .collect()
    }

    /// `(satisfied, violated, no_data)` verdict cell counts.
    fn verdict_counts(&self, statespace: &str) -> PyResult<(usize, usize, usize)> {
        Ok(self.space(statespace)?.result.verdict.counts())
    }

    /// Per-cell verdict labels: `satisfied`, `violated` or `no-data`.
    fn verdict_labels(&self, statespace: &str) -> PyResult<Vec<&'static str>> {
        Ok(self
            .space(statespace)?
            .result
            .verdict
            .cells()
            .iter()
            .map(|t| t.label())
            .collect())
    }

    /// Per-cell satisfied-state sets; `None` marks an undecidable cell.
    fn active_states(&self, statespace: &str) -> PyResult<Vec<Option<Vec<String>>>> {
        Ok(self
            .space(statespace)?
            .result
            .active
            .iter()
            .map(|a| match a {
                ActiveStates::Known(ids) => Some(ids.clone()),
                ActiveStates::NoData => None,
            })
            .collect())
    }

    /// Marker mismatches as `(cell_index, expected_states, observed_marker)`.
    #[allow(clippy::type_complexity)]
    fn mismatches(&self, statespace: &str) -> PyResult<Vec<(usize, Vec<String>, Option<String>)>> {
        Ok(self
            .space(statespace)?
            .reconciliation
            .as_ref()
            .map(|rec| {
                rec.mismatches
                    .iter()
                    .map(|m| {
                        (
                            m.cell_index,
                            m.expected_states.clone(),
                            m.observed_marker.clone(),
                        )
                    })
                    .collect()
            })
            .unwrap_or_default())
    }

    /// Observed marker changes as `(from, to, count, declared)`.
    fn transitions(&self, statespace: &str) -> PyResult<Vec<(String, String, u64, bool)>> {
        Ok(self
            .space(statespace)?
            .transitions
            .iter()
            .map(|t| {
                (
                    t.from_marker.clone(),
                    t.to_marker.clone(),
                    t.count,
                    t.declared,
                )
            })
            .collect())
    }

    /// Human-readable run summary for one state space.
    fn summary_text(&self, statespace: &str) -> PyResult<String> {
        Ok(self.space(statespace)?.summary.to_text())
    }

    /// The canonical results CSV for one state space.
    fn results_csv(&self, py: Python<'_>, statespace: &str) -> PyResult<Py<PyBytes>> {
        let bytes = export_results_csv(&self.space(statespace)?.result);
        Ok(PyBytes::new(py, &bytes).unbind())
    }

    /// Carpet plot SVG; `kind` is `"states"` or `"verdict"`.
    #[pyo3(signature = (statespace, kind="states"))]
    fn carpet_svg(&self, py: Python<'_>, statespace: &str, kind: &str) -> PyResult<Py<PyBytes>> {
        let kind = match kind {
            "states" => CarpetKind::States,
            "verdict" => CarpetKind::Verdict,
            other => return Err(value_err(format!("kind must be states or verdict, not `{other}`"))),
        };
        let carpet = build_carpet(&self.space(statespace)?.result, kind, self.zone)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(PyBytes::new(py, &render_svg(&carpet)).unbind())
    }

    fn __repr__(&self) -> String {
        let names: Vec<&str> = self
            .spaces
            .iter()
            .map(|s| s.result.statespace.as_str())
            .collect();
        format!("Evaluation(statespaces={names:?})")
    }
}

/// Runs the full pipeline: preprocesses `sensor_csvs` onto the grid, then
/// evaluates every state space in `spec_text` and reconciles markers.
#[pyfunction]
#[pyo3(signature = (spec_text, sensor_csvs, marker_csv=None, bounds_csv=None, *,
                    start, end, step=900, tz="UTC", mode=None, eq_eps=1e-9, max_gap=1))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    spec_text: &str,
    sensor_csvs: Vec<Vec<u8>>,
    marker_csv: Option<Vec<u8>>,
    bounds_csv: Option<Vec<u8>>,
    start: &str,
    end: &str,
    step: u32,
    tz: &str,
    mode: Option<&str>,
    eq_eps: f64,
    max_gap: usize,
) -> PyResult<Evaluation> {
    let resolved = load_spec(spec_text)?;
    let grid = Grid::new(
        parse_utc(start, "start")?,
        parse_utc(end, "end")?,
        step,
    )
    .map_err(|e| value_err(e.to_string()))?;
    let zone = parse_tz(tz)?;
    let mode_override = match mode {
        None => None,
        Some("exclusive") => Some(SpaceMode::Exclusive),
        Some("permissive") => Some(SpaceMode::Permissive),
        Some(other) => {
            return Err(value_err(format!(
                "mode must be exclusive or permissive, not `{other}`"
            )))
        }
    };

    let mut opts = PipelineOptions::new(grid);
    opts.zone = zone;
    opts.eq_eps = eq_eps;
    opts.max_gap_cells = max_gap;
    opts.mode_override = mode_override;

    let refs: Vec<&[u8]> = sensor_csvs.iter().map(|b| b.as_slice()).collect();
    let output = run_pipeline(
        &resolved.spec,
        &refs,
        marker_csv.as_deref(),
        bounds_csv.as_deref(),
        &opts,
    )
    .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;

    Ok(Evaluation {
        spaces: output.spaces,
        zone,
    })
}

#[pymodule]
fn bmspec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check_spec, m)?)?;
    m.add_function(wrap_pyfunction!(format_spec, m)?)?;
    m.add_function(wrap_pyfunction!(generate_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_class::<Evaluation>()?;
    Ok(())
}
