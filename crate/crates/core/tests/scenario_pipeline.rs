//! End-to-end checks of the generated scenario through the full pipeline:
//! generation → ingestion → preprocessing → evaluation → reconciliation.

use bmspec_core::eval::TriState;
use bmspec_core::pipeline::{run_pipeline, PipelineOptions, PipelineOutput};
use bmspec_core::scenario::{generate, FaultInjection, FaultKind, ScenarioConfig};
use bmspec_core::spec::{parse_spec, resolve_spec};
use chrono::{DateTime, Utc};

fn utc(s: &str) -> DateTime<Utc> {
    s.parse().unwrap()
}

fn run(config: &ScenarioConfig, faults: &[FaultInjection]) -> PipelineOutput {
    let scenario = generate(config, faults).unwrap();
    let resolved = resolve_spec(parse_spec(&scenario.spec_text).unwrap().doc).unwrap();
    run_pipeline(
        &resolved.spec,
        &[&scenario.sensor_csv],
        Some(&scenario.marker_csv),
        None,
        &PipelineOptions::new(scenario.grid),
    )
    .unwrap()
}

fn fault(kind: FaultKind, from: &str, to: &str, magnitude: f64) -> FaultInjection {
    FaultInjection {
        kind,
        from: utc(from),
        to: utc(to),
        magnitude,
    }
}

fn violated_cells(output: &PipelineOutput) -> Vec<usize> {
    output.spaces[0]
        .result
        .verdict
        .cells()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_violated())
        .map(|(i, _)| i)
        .collect()
}

#[test]
fn clean_week_satisfied_everywhere() {
    let config = ScenarioConfig {
        days: 7,
        ..ScenarioConfig::default()
    };
    let output = run(&config, &[]);
    let outcome = &output.spaces[0];
    assert_eq!(outcome.result.verdict.counts(), (7 * 96, 0, 0));
    assert!(outcome.reconciliation.as_ref().unwrap().mismatches.is_empty());
    // marker changes observed: exactly the declared mode cycle
    assert!(!outcome.transitions.is_empty());
    assert!(outcome.transitions.iter().all(|t| t.declared));
}

#[test]
fn wrong_marker_fault_yields_exactly_four_mismatches() {
    let output = run(
        &ScenarioConfig::default(),
        &[fault(
            FaultKind::WrongMarker,
            "2011-01-10T13:00:00Z",
            "2011-01-10T14:00:00Z",
            0.0,
        )],
    );
    let outcome = &output.spaces[0];
    // states are unaffected, only the marker log lies
    assert_eq!(outcome.result.verdict.counts(), (96, 0, 0));
    let rec = outcome.reconciliation.as_ref().unwrap();
    assert_eq!(rec.mismatches.len(), 4, "3600 s / 900 s = 4 cells");
    let cells: Vec<usize> = rec.mismatches.iter().map(|m| m.cell_index).collect();
    assert_eq!(cells, vec![52, 53, 54, 55]); // 13:00..14:00
    for m in &rec.mismatches {
        assert_eq!(m.expected_states, vec!["MainMode".to_string()]);
        assert_eq!(m.observed_marker.as_deref(), Some("NIGHT"));
    }
}

#[test]
fn single_cell_sensor_gap_is_interpolated_away() {
    let output = run(
        &ScenarioConfig::default(),
        &[fault(
            FaultKind::SensorGap,
            "2011-01-10T10:00:00Z",
            "2011-01-10T10:15:00Z",
            0.0,
        )],
    );
    let outcome = &output.spaces[0];
    assert_eq!(output.counters.interpolated_cells, 1);
    assert_eq!(outcome.result.verdict.counts(), (96, 0, 0));
}

#[test]
fn long_sensor_gap_turns_cells_no_data_not_violated() {
    let output = run(
        &ScenarioConfig::default(),
        &[fault(
            FaultKind::SensorGap,
            "2011-01-10T10:00:00Z",
            "2011-01-10T11:00:00Z",
            0.0,
        )],
    );
    let outcome = &output.spaces[0];
    let (sat, vio, nd) = outcome.result.verdict.counts();
    assert_eq!(vio, 0);
    assert_eq!(nd, 4);
    assert_eq!(sat, 92);
    // the no-data cells are exactly the gap
    let nd_cells: Vec<usize> = outcome
        .result
        .verdict
        .cells()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_no_data())
        .map(|(i, _)| i)
        .collect();
    assert_eq!(nd_cells, vec![40, 41, 42, 43]);
}

#[test]
fn stuck_mode_after_working_hours_is_red_exactly_in_window() {
    // At 22:00 the controller must switch to night mode; stuck keeps it in
    // the sleep behavior (reference temperature, SLEEP marker).
    let window = ("2011-01-10T22:00:00Z", "2011-01-10T23:00:00Z");
    let output = run(
        &ScenarioConfig::default(),
        &[fault(FaultKind::StuckMode, window.0, window.1, 0.0)],
    );
    let outcome = &output.spaces[0];
    assert_eq!(violated_cells(&output), vec![88, 89, 90, 91]); // 22:00..23:00
    // every state is violated there: an undefined facility state
    for cell in 88..92 {
        assert!(outcome
            .result
            .per_state
            .iter()
            .all(|s| s.series.get(cell) == TriState::Violated));
        assert_eq!(
            outcome.result.active[cell],
            bmspec_core::statespace::ActiveStates::Known(vec![])
        );
    }
}

#[test]
fn setpoint_drift_beyond_band_violates_main_mode() {
    let output = run(
        &ScenarioConfig::default(),
        &[fault(
            FaultKind::SetpointDrift,
            "2011-01-10T09:00:00Z",
            "2011-01-10T10:00:00Z",
            5.0,
        )],
    );
    assert_eq!(violated_cells(&output), vec![36, 37, 38, 39]); // 09:00..10:00
    // a drift inside the ±3 band is not a violation
    let tolerable = run(
        &ScenarioConfig::default(),
        &[fault(
            FaultKind::SetpointDrift,
            "2011-01-10T09:00:00Z",
            "2011-01-10T10:00:00Z",
            2.0,
        )],
    );
    assert!(violated_cells(&tolerable).is_empty());
}

#[test]
fn fault_locality_bounds_the_violation_set() {
    let config = ScenarioConfig {
        days: 2,
        ..ScenarioConfig::default()
    };
    let faults = [
        fault(
            FaultKind::StuckMode,
            "2011-01-10T22:00:00Z",
            "2011-01-11T00:00:00Z",
            0.0,
        ),
        fault(
            FaultKind::SetpointDrift,
            "2011-01-11T13:00:00Z",
            "2011-01-11T14:00:00Z",
            8.0,
        ),
    ];
    let clean = run(&config, &[]);
    let faulted = run(&config, &faults);
    let grid = faulted.spaces[0].result.verdict.grid();

    let clean_cells = violated_cells(&clean);
    let faulted_cells = violated_cells(&faulted);
    assert!(clean_cells.is_empty());
    assert!(!faulted_cells.is_empty());

    let in_some_window = |i: usize| {
        let t = grid.timestamp(i);
        faults.iter().any(|f| f.from <= t && t < f.to)
    };
    for cell in &faulted_cells {
        assert!(
            in_some_window(*cell),
            "violated cell {cell} at {} lies outside every fault window",
            grid.timestamp(*cell)
        );
    }
}

#[test]
fn scenario_respects_custom_shape() {
    let config = ScenarioConfig {
        days: 3,
        step_secs: 1800,
        reference_value: 22.5,
        night_start_min: 23 * 60,
        night_end_min: 5 * 60,
        presence_windows: vec![(7 * 60, 12 * 60), (13 * 60, 17 * 60)],
        seed: 7,
        ..ScenarioConfig::default()
    };
    let output = run(&config, &[]);
    let outcome = &output.spaces[0];
    assert_eq!(outcome.result.verdict.counts(), (3 * 48, 0, 0));
    let summary = &outcome.summary;
    assert!(summary.categories.contains_key("MainMode"));
    assert!(summary.categories.contains_key("SleepMode"));
    assert!(summary.categories.contains_key("NightMode"));
}
