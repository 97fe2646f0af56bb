//! Canonical machine-readable serialization of a [`StateSpaceResult`].
//!
//! Layout: one metadata comment line, a fixed header, then one row per grid
//! cell.
//!
//! ```text
//! # statespace=RoomControl mode=exclusive start=2011-01-10T00:00:00Z step=900 cells=96 markers=1
//! timestamp,state:MainMode,...,space_rules,verdict,active,marker
//! ```
//!
//! The `active` column joins state ids with `+`, an empty field is the empty
//! set and the literal `no-data` an undecidable cell (identifiers cannot
//! contain `-`, so this cannot collide). An empty `marker` field is a
//! missing marker; empty markers are rejected at ingest.

use chrono::{DateTime, SecondsFormat, Utc};

use crate::eval::{TriState, TriStateSeries};
use crate::spec::ast::SpaceMode;
use crate::statespace::{ActiveStates, StateResult, StateSpaceResult};
use crate::timeseries::{Grid, MarkerSeries};

use super::ReportError;

const ACTIVE_NO_DATA: &str = "no-data";
const ACTIVE_SEP: char = '+';

fn ts(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Serializes one evaluated state space.
pub fn export_results_csv(result: &StateSpaceResult) -> Vec<u8> {
    let grid = result.verdict.grid();
    let mut out = format!(
        "# statespace={} mode={} start={} step={} cells={} markers={}\n",
        result.statespace,
        result.mode.keyword(),
        ts(grid.start()),
        grid.step_secs(),
        grid.cell_count(),
        u8::from(result.observed_markers.is_some()),
    )
    .into_bytes();

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = vec!["timestamp".into()];
    header.extend(result.per_state.iter().map(|s| format!("state:{}", s.state_id)));
    header.extend(["space_rules".into(), "verdict".into(), "active".into(), "marker".into()]);
    w.write_record(&header).expect("writing to memory");

    for cell in 0..grid.cell_count() {
        let mut row: Vec<String> = vec![ts(grid.timestamp(cell))];
        row.extend(
            result
                .per_state
                .iter()
                .map(|s| s.series.get(cell).label().to_string()),
        );
        row.push(result.space_rules.get(cell).label().to_string());
        row.push(result.verdict.get(cell).label().to_string());
        row.push(match &result.active[cell] {
            ActiveStates::NoData => ACTIVE_NO_DATA.to_string(),
            ActiveStates::Known(ids) => ids.join(&ACTIVE_SEP.to_string()),
        });
        row.push(
            result
                .observed_markers
                .as_ref()
                .and_then(|m| m.marker(cell))
                .unwrap_or("")
                .to_string(),
        );
        w.write_record(&row).expect("writing to memory");
    }

    out.extend(w.into_inner().expect("writing to memory"));
    out
}

fn bad(msg: impl Into<String>) -> ReportError {
    ReportError::BadFormat(msg.into())
}

/// Reads a serialized result back; the inverse of [`export_results_csv`].
pub fn read_results_csv(bytes: &[u8]) -> Result<StateSpaceResult, ReportError> {
    let text = std::str::from_utf8(bytes).map_err(|_| bad("not UTF-8"))?;
    let (meta_line, body) = text
        .split_once('\n')
        .ok_or_else(|| bad("missing metadata line"))?;
    let meta_line = meta_line
        .trim_end_matches('\r')
        .strip_prefix("# ")
        .ok_or_else(|| bad("first line must be a `# key=value ...` metadata comment"))?;

    let mut statespace = None;
    let mut mode = None;
    let mut start = None;
    let mut step = None;
    let mut cells = None;
    let mut markers_present = None;
    for token in meta_line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| bad(format!("malformed metadata token `{token}`")))?;
        match key {
            "statespace" => statespace = Some(value.to_string()),
            "mode" => {
                mode = Some(match value {
                    "exclusive" => SpaceMode::Exclusive,
                    "permissive" => SpaceMode::Permissive,
                    other => return Err(bad(format!("unknown mode `{other}`"))),
                })
            }
            "start" => {
                start = Some(
                    DateTime::parse_from_rfc3339(value)
                        .map_err(|_| bad("unparseable start timestamp"))?
                        .with_timezone(&Utc),
                )
            }
            "step" => step = value.parse::<u32>().ok(),
            "cells" => cells = value.parse::<usize>().ok(),
            "markers" => markers_present = Some(value == "1"),
            _ => {} // unknown keys are tolerated
        }
    }
    let statespace = statespace.ok_or_else(|| bad("metadata lacks statespace"))?;
    let mode = mode.ok_or_else(|| bad("metadata lacks mode"))?;
    let start = start.ok_or_else(|| bad("metadata lacks start"))?;
    let step = step.ok_or_else(|| bad("metadata lacks step"))?;
    let cells = cells.ok_or_else(|| bad("metadata lacks cells"))?;
    let markers_present = markers_present.ok_or_else(|| bad("metadata lacks markers"))?;
    if cells == 0 {
        return Err(bad("cells must be positive"));
    }

    let end = start + chrono::Duration::seconds(i64::from(step) * cells as i64);
    let grid = Grid::new(start, end, step).map_err(|e| bad(e.to_string()))?;

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(body.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let fields: Vec<&str> = header.iter().collect();
    if fields.first() != Some(&"timestamp") || fields.len() < 5 {
        return Err(bad("unexpected header"));
    }
    let tail = &fields[fields.len() - 4..];
    if tail != ["space_rules", "verdict", "active", "marker"] {
        return Err(bad("unexpected header"));
    }
    let state_ids: Vec<String> = fields[1..fields.len() - 4]
        .iter()
        .map(|f| {
            f.strip_prefix("state:")
                .map(|s| s.to_string())
                .ok_or_else(|| bad(format!("unexpected column `{f}`")))
        })
        .collect::<Result<_, _>>()?;

    let n_states = state_ids.len();
    let mut state_cells: Vec<Vec<TriState>> = vec![Vec::with_capacity(cells); n_states];
    let mut space_rules = Vec::with_capacity(cells);
    let mut verdict = Vec::with_capacity(cells);
    let mut active = Vec::with_capacity(cells);
    let mut marker_cells: Vec<Option<String>> = Vec::with_capacity(cells);

    let parse_tri = |s: &str| TriState::parse_label(s).ok_or_else(|| bad(format!("bad tri-state `{s}`")));

    let mut row_count = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != fields.len() {
            return Err(bad("row width does not match header"));
        }
        if row_count >= cells {
            return Err(bad("more rows than metadata cells"));
        }
        let at = DateTime::parse_from_rfc3339(record.get(0).unwrap())
            .map_err(|_| bad("unparseable row timestamp"))?
            .with_timezone(&Utc);
        if at != grid.timestamp(row_count) {
            return Err(bad(format!("row {row_count} timestamp is off-grid")));
        }
        for (i, state_column) in state_cells.iter_mut().enumerate() {
            state_column.push(parse_tri(record.get(1 + i).unwrap())?);
        }
        space_rules.push(parse_tri(record.get(1 + n_states).unwrap())?);
        verdict.push(parse_tri(record.get(2 + n_states).unwrap())?);
        let active_field = record.get(3 + n_states).unwrap();
        active.push(if active_field == ACTIVE_NO_DATA {
            ActiveStates::NoData
        } else if active_field.is_empty() {
            ActiveStates::Known(Vec::new())
        } else {
            ActiveStates::Known(active_field.split(ACTIVE_SEP).map(String::from).collect())
        });
        let marker_field = record.get(4 + n_states).unwrap();
        marker_cells.push(if marker_field.is_empty() {
            None
        } else {
            Some(marker_field.to_string())
        });
        row_count += 1;
    }
    if row_count != cells {
        return Err(bad(format!(
            "truncated: {row_count} rows for {cells} cells"
        )));
    }

    let per_state = state_ids
        .into_iter()
        .zip(state_cells)
        .map(|(state_id, cells)| StateResult {
            series: TriStateSeries::new(format!("is{state_id}"), grid, cells),
            state_id,
        })
        .collect();

    Ok(StateSpaceResult {
        space_rules: TriStateSeries::new(format!("{statespace}.rules"), grid, space_rules),
        verdict: TriStateSeries::new(statespace.clone(), grid, verdict),
        statespace,
        mode,
        per_state,
        active,
        observed_markers: if markers_present {
            Some(MarkerSeries::new(
                "from-results".to_string(),
                grid,
                marker_cells,
            ))
        } else {
            None
        },
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::synthetic_result;
    use super::*;

    #[test]
    fn shape_of_export() {
        let result = synthetic_result(1, 900);
        let bytes = export_results_csv(&result);
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 1 + 96); // meta + header + cells
        assert!(lines[0].starts_with("# statespace=S mode=exclusive"));
        assert_eq!(
            lines[1],
            "timestamp,state:Mode,space_rules,verdict,active,marker"
        );
        assert!(lines[2].starts_with("2011-01-10T00:00:00Z,satisfied,"));
    }

    #[test]
    fn roundtrip_without_markers() {
        let result = synthetic_result(2, 900);
        let back = read_results_csv(&export_results_csv(&result)).unwrap();
        assert_eq!(back.statespace, result.statespace);
        assert_eq!(back.mode, result.mode);
        assert_eq!(back.verdict, result.verdict);
        assert_eq!(back.active, result.active);
        assert_eq!(back.per_state.len(), result.per_state.len());
        for (a, b) in back.per_state.iter().zip(&result.per_state) {
            assert_eq!(a.state_id, b.state_id);
            assert_eq!(a.series.cells(), b.series.cells());
        }
        assert!(back.observed_markers.is_none());
    }

    #[test]
    fn roundtrip_with_markers() {
        let mut result = synthetic_result(1, 900);
        let grid = result.verdict.grid();
        let markers: Vec<Option<String>> = (0..grid.cell_count())
            .map(|i| {
                if i % 5 == 0 {
                    None
                } else {
                    Some(format!("M{}", i % 3))
                }
            })
            .collect();
        result.observed_markers = Some(MarkerSeries::new("from-results", grid, markers));
        let back = read_results_csv(&export_results_csv(&result)).unwrap();
        assert_eq!(back.observed_markers, result.observed_markers);
    }

    #[test]
    fn truncated_file_rejected() {
        let result = synthetic_result(1, 900);
        let bytes = export_results_csv(&result);
        let text = String::from_utf8(bytes).unwrap();
        let truncated: String = text.lines().take(50).collect::<Vec<_>>().join("\n");
        let err = read_results_csv(truncated.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("truncated"));
    }

    #[test]
    fn missing_metadata_rejected() {
        assert!(read_results_csv(b"timestamp,verdict\n").is_err());
        assert!(read_results_csv(b"").is_err());
        assert!(read_results_csv(b"# statespace=S\ntimestamp\n").is_err());
    }

    #[test]
    fn off_grid_timestamp_rejected() {
        let result = synthetic_result(1, 900);
        let text = String::from_utf8(export_results_csv(&result)).unwrap();
        let tampered = text.replace("2011-01-10T05:00:00Z", "2011-01-10T05:03:00Z");
        assert!(read_results_csv(tampered.as_bytes()).is_err());
    }
}
