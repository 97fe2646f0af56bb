//! CSV ingestion for sensor logs, marker logs and plausibility bounds.
//!
//! Formats (UTF-8, header row required, ISO-8601 timestamps):
//!
//! ```text
//! sensor_id,timestamp,value           sensor log
//! timestamp,statespace,marker         marker log
//! sensor_id,min,max,max_step          bounds config (empty field = unset)
//! ```
//!
//! Malformed rows are counted and skipped; they only become an error when a
//! sensor log contains no valid row at all.

use std::collections::HashMap;

use chrono::{DateTime, Utc};
use thiserror::Error;

use super::{Grid, MarkerSeries, PlausibilityBounds, RawSample};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing or malformed header: expected `{expected}`")]
    BadHeader { expected: &'static str },
    #[error("no valid rows in input ({rejected} rejected)")]
    NoValidRows { rejected: u64 },
    #[error("failed to read CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Parsed sensor log.
#[derive(Debug, Clone, Default)]
pub struct SensorCsv {
    pub samples: Vec<RawSample>,
    pub rejected_rows: u64,
}

/// Marker log sampled onto a grid, one series per state space.
#[derive(Debug, Clone)]
pub struct MarkerCsv {
    pub series: HashMap<String, MarkerSeries>,
    pub rejected_rows: u64,
}

/// Parsed bounds config keyed by sensor id.
#[derive(Debug, Clone, Default)]
pub struct BoundsCsv {
    pub bounds: HashMap<String, PlausibilityBounds>,
    pub rejected_rows: u64,
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes)
}

fn check_header(
    rdr: &mut csv::Reader<&[u8]>,
    expected: &'static [&'static str],
    expected_joined: &'static str,
) -> Result<(), IngestError> {
    let headers = rdr
        .headers()
        .map_err(|_| IngestError::BadHeader {
            expected: expected_joined,
        })?
        .clone();
    let ok = headers.len() == expected.len()
        && headers
            .iter()
            .zip(expected)
            .all(|(got, want)| got.eq_ignore_ascii_case(want));
    if ok {
        Ok(())
    } else {
        Err(IngestError::BadHeader {
            expected: expected_joined,
        })
    }
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s)
        .ok()
        .map(|t| t.with_timezone(&Utc))
}

/// Reads a sensor log. Rows may arrive in any order; rows with unparseable
/// timestamps or non-finite values are rejected and counted.
pub fn parse_sensor_csv(bytes: &[u8]) -> Result<SensorCsv, IngestError> {
    let mut rdr = reader(bytes);
    check_header(&mut rdr, &["sensor_id", "timestamp", "value"], "sensor_id,timestamp,value")?;

    let mut samples = Vec::new();
    let mut rejected = 0u64;
    for record in rdr.records() {
        let Ok(record) = record else {
            rejected += 1;
            continue;
        };
        let fields = (record.get(0), record.get(1), record.get(2));
        let (Some(sensor), Some(ts), Some(value)) = fields else {
            rejected += 1;
            continue;
        };
        let (Some(at), Ok(value)) = (parse_timestamp(ts), value.parse::<f64>()) else {
            rejected += 1;
            continue;
        };
        if sensor.is_empty() || !value.is_finite() {
            rejected += 1;
            continue;
        }
        samples.push(RawSample {
            sensor: sensor.to_string(),
            at,
            value,
        });
    }

    if samples.is_empty() {
        return Err(IngestError::NoValidRows { rejected });
    }
    Ok(SensorCsv {
        samples,
        rejected_rows: rejected,
    })
}

/// Reads a marker log and samples it onto `grid` with step-hold semantics:
/// a cell holds the most recent marker at or before the cell timestamp;
/// cells before the first event stay missing.
pub fn parse_marker_csv(bytes: &[u8], grid: Grid) -> Result<MarkerCsv, IngestError> {
    let mut rdr = reader(bytes);
    check_header(&mut rdr, &["timestamp", "statespace", "marker"], "timestamp,statespace,marker")?;

    let mut events: HashMap<String, Vec<(DateTime<Utc>, String)>> = HashMap::new();
    let mut rejected = 0u64;
    for record in rdr.records() {
        let Ok(record) = record else {
            rejected += 1;
            continue;
        };
        let fields = (record.get(0), record.get(1), record.get(2));
        let (Some(ts), Some(space), Some(marker)) = fields else {
            rejected += 1;
            continue;
        };
        let Some(at) = parse_timestamp(ts) else {
            rejected += 1;
            continue;
        };
        if space.is_empty() || marker.is_empty() {
            rejected += 1;
            continue;
        }
        events
            .entry(space.to_string())
            .or_default()
            .push((at, marker.to_string()));
    }

    let mut series = HashMap::new();
    for (space, mut evs) in events {
        // Stable by timestamp: the later log row wins on equal timestamps.
        evs.sort_by_key(|(at, _)| *at);
        let mut cells: Vec<Option<String>> = Vec::with_capacity(grid.cell_count());
        let mut next = 0usize;
        let mut current: Option<&str> = None;
        for t in grid.timestamps() {
            while next < evs.len() && evs[next].0 <= t {
                current = Some(evs[next].1.as_str());
                next += 1;
            }
            cells.push(current.map(|s| s.to_string()));
        }
        series.insert(space.clone(), MarkerSeries::new(space, grid, cells));
    }

    Ok(MarkerCsv {
        series,
        rejected_rows: rejected,
    })
}

/// Reads a plausibility-bounds config. Later rows override earlier ones for
/// the same sensor.
pub fn parse_bounds_csv(bytes: &[u8]) -> Result<BoundsCsv, IngestError> {
    let mut rdr = reader(bytes);
    check_header(&mut rdr, &["sensor_id", "min", "max", "max_step"], "sensor_id,min,max,max_step")?;

    fn optional_num(field: Option<&str>) -> Result<Option<f64>, ()> {
        match field {
            None | Some("") => Ok(None),
            Some(s) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(()),
            },
        }
    }

    let mut bounds = HashMap::new();
    let mut rejected = 0u64;
    for record in rdr.records() {
        let Ok(record) = record else {
            rejected += 1;
            continue;
        };
        let Some(sensor) = record.get(0).filter(|s| !s.is_empty()) else {
            rejected += 1;
            continue;
        };
        let parsed = (
            optional_num(record.get(1)),
            optional_num(record.get(2)),
            optional_num(record.get(3)),
        );
        let (Ok(min), Ok(max), Ok(max_step)) = parsed else {
            rejected += 1;
            continue;
        };
        if let (Some(lo), Some(hi)) = (min, max) {
            if lo > hi {
                rejected += 1;
                continue;
            }
        }
        bounds.insert(
            sensor.to_string(),
            PlausibilityBounds {
                sensor: sensor.to_string(),
                min,
                max,
                max_step,
            },
        );
    }

    Ok(BoundsCsv {
        bounds,
        rejected_rows: rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day_grid() -> Grid {
        let start: DateTime<Utc> = "2011-01-10T00:00:00Z".parse().unwrap();
        Grid::new(start, start + chrono::Duration::days(1), 900).unwrap()
    }

    #[test]
    fn sensor_row_parses() {
        let csv = b"sensor_id,timestamp,value\n000-000-001,2011-01-10T22:00:00Z,18.0\n";
        let parsed = parse_sensor_csv(csv).unwrap();
        assert_eq!(parsed.samples.len(), 1);
        assert_eq!(parsed.rejected_rows, 0);
        let s = &parsed.samples[0];
        assert_eq!(s.sensor, "000-000-001");
        assert_eq!(s.value, 18.0);
        assert_eq!(s.at, "2011-01-10T22:00:00Z".parse::<DateTime<Utc>>().unwrap());
    }

    #[test]
    fn offset_timestamps_convert_to_utc() {
        let csv = b"sensor_id,timestamp,value\ns,2011-01-10T23:00:00+01:00,1.5\n";
        let parsed = parse_sensor_csv(csv).unwrap();
        assert_eq!(
            parsed.samples[0].at,
            "2011-01-10T22:00:00Z".parse::<DateTime<Utc>>().unwrap()
        );
    }

    #[test]
    fn empty_data_section_is_an_error() {
        let err = parse_sensor_csv(b"sensor_id,timestamp,value\n").unwrap_err();
        assert!(matches!(err, IngestError::NoValidRows { rejected: 0 }));
    }

    #[test]
    fn nan_value_rejected_and_counted() {
        let csv = b"sensor_id,timestamp,value\ns,2011-01-10T22:00:00Z,NaN\ns,2011-01-10T22:15:00Z,1.0\n";
        let parsed = parse_sensor_csv(csv).unwrap();
        assert_eq!(parsed.samples.len(), 1);
        assert_eq!(parsed.rejected_rows, 1);
    }

    #[test]
    fn bad_header_rejected() {
        let err = parse_sensor_csv(b"a,b,c\nx,y,z\n").unwrap_err();
        assert!(matches!(err, IngestError::BadHeader { .. }));
    }

    #[test]
    fn marker_step_hold() {
        let csv = b"timestamp,statespace,marker\n\
            2011-01-10T08:00:00Z,RoomControl,MAIN\n\
            2011-01-10T22:00:00Z,RoomControl,NIGHT\n";
        let parsed = parse_marker_csv(csv, day_grid()).unwrap();
        let series = &parsed.series["RoomControl"];
        assert_eq!(series.marker(0), None); // before the first event
        assert_eq!(series.marker(32), Some("MAIN")); // 08:00
        assert_eq!(series.marker(87), Some("MAIN")); // 21:45
        assert_eq!(series.marker(88), Some("NIGHT")); // 22:00
        assert_eq!(series.marker(95), Some("NIGHT")); // 23:45
    }

    #[test]
    fn single_event_holds_to_end() {
        let csv = b"timestamp,statespace,marker\n2011-01-10T06:00:00Z,S,MAIN\n";
        let parsed = parse_marker_csv(csv, day_grid()).unwrap();
        let series = &parsed.series["S"];
        for (i, t) in day_grid().timestamps().enumerate() {
            let expect = if t >= "2011-01-10T06:00:00Z".parse::<DateTime<Utc>>().unwrap() {
                Some("MAIN")
            } else {
                None
            };
            assert_eq!(series.marker(i), expect);
        }
    }

    #[test]
    fn no_events_no_series() {
        let parsed = parse_marker_csv(b"timestamp,statespace,marker\n", day_grid()).unwrap();
        assert!(parsed.series.is_empty());
    }

    #[test]
    fn bounds_with_unset_fields() {
        let csv = b"sensor_id,min,max,max_step\ns1,-30,60,\ns2,,,10\n";
        let parsed = parse_bounds_csv(csv).unwrap();
        assert_eq!(parsed.bounds["s1"].min, Some(-30.0));
        assert_eq!(parsed.bounds["s1"].max, Some(60.0));
        assert_eq!(parsed.bounds["s1"].max_step, None);
        assert_eq!(parsed.bounds["s2"].min, None);
        assert_eq!(parsed.bounds["s2"].max_step, Some(10.0));
    }

    #[test]
    fn inverted_bounds_rejected() {
        let csv = b"sensor_id,min,max,max_step\ns1,60,-30,\n";
        let parsed = parse_bounds_csv(csv).unwrap();
        assert!(parsed.bounds.is_empty());
        assert_eq!(parsed.rejected_rows, 1);
    }
}
