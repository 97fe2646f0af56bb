//! Synthetic room-temperature-control scenario.
//!
//! Generates logged data for a facility with three daily modes — main
//! (people present, temperature tracks the configured reference), sleep
//! (daytime, nobody present, reference held) and night (setback to 18 °C) —
//! together with the matching spec and marker stream. With no faults the
//! data satisfies the spec in exclusive mode on every cell, which makes the
//! generator the end-to-end fixture for the whole pipeline; each injected
//! fault breaks that promise only inside its window.
//!
//! The plant model is a first-order lag toward the active mode's target
//! with a quarter-step time constant plus seeded measurement noise of
//! 0.1 K amplitude. The only contract is spec satisfaction, not thermal
//! realism.

use chrono::{DateTime, NaiveDate, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::timeseries::{Grid, GridError};

pub const TEMPERATURE_SENSOR: &str = "000-000-001";
pub const PRESENCE_SENSOR: &str = "000-000-002";
pub const SETPOINT_SENSOR: &str = "000-000-003";

pub const STATESPACE: &str = "RoomControl";
pub const MARKER_MAIN: &str = "MAIN";
pub const MARKER_SLEEP: &str = "SLEEP";
pub const MARKER_NIGHT: &str = "NIGHT";

const NIGHT_VALUE: f64 = 18.0;
const NOISE_AMPLITUDE: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("fault window start must precede its end")]
    EmptyFaultWindow,
    #[error("fault window lies outside the scenario span")]
    FaultOutOfSpan,
    #[error("overlapping contradictory faults: {first} and {second}")]
    ContradictoryFaults {
        first: &'static str,
        second: &'static str,
    },
}

/// Shape of the generated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub days: u32,
    pub step_secs: u32,
    pub reference_value: f64,
    /// Night window, minutes since midnight (wraps when start > end).
    pub night_start_min: u16,
    pub night_end_min: u16,
    /// Daily presence windows, minutes since midnight.
    pub presence_windows: Vec<(u16, u16)>,
    /// First day of the scenario; data starts at 00:00 UTC.
    pub start_date: NaiveDate,
    /// Fixes all generated noise.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            days: 1,
            step_secs: 900,
            reference_value: 21.0,
            night_start_min: 22 * 60,
            night_end_min: 6 * 60,
            presence_windows: vec![(8 * 60, 18 * 60)],
            // a Monday
            start_date: NaiveDate::from_ymd_opt(2011, 1, 10).unwrap(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    /// The controller keeps the mode it was in when the window starts.
    StuckMode,
    /// The setpoint sensor drifts by `magnitude`.
    SetpointDrift,
    /// The marker stream reports a wrong mode.
    WrongMarker,
    /// The temperature sensor logs nothing.
    SensorGap,
}

impl FaultKind {
    pub fn name(&self) -> &'static str {
        match self {
            FaultKind::StuckMode => "stuck-mode",
            FaultKind::SetpointDrift => "setpoint-drift",
            FaultKind::WrongMarker => "wrong-marker",
            FaultKind::SensorGap => "sensor-gap",
        }
    }

    pub fn parse_name(s: &str) -> Option<FaultKind> {
        match s {
            "stuck-mode" => Some(FaultKind::StuckMode),
            "setpoint-drift" => Some(FaultKind::SetpointDrift),
            "wrong-marker" => Some(FaultKind::WrongMarker),
            "sensor-gap" => Some(FaultKind::SensorGap),
            _ => None,
        }
    }

    /// Which generated signals the fault rewrites. Overlapping faults that
    /// share a channel contradict each other; a sensor gap only deletes
    /// samples and composes with everything.
    fn channels(&self) -> &'static [&'static str] {
        match self {
            FaultKind::StuckMode => &["temperature", "marker"],
            FaultKind::SetpointDrift => &["setpoint", "temperature"],
            FaultKind::WrongMarker => &["marker"],
            FaultKind::SensorGap => &[],
        }
    }
}

/// One fault, active in `[from, to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultInjection {
    pub kind: FaultKind,
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
    /// Setpoint offset for `SetpointDrift`; ignored otherwise.
    pub magnitude: f64,
}

impl FaultInjection {
    fn covers(&self, t: DateTime<Utc>) -> bool {
        self.from <= t && t < self.to
    }
}

/// Everything [`generate`] emits.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScenario {
    pub sensor_csv: Vec<u8>,
    pub marker_csv: Vec<u8>,
    pub spec_text: String,
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Main,
    Sleep,
    Night,
}

impl Mode {
    fn marker(self) -> &'static str {
        match self {
            Mode::Main => MARKER_MAIN,
            Mode::Sleep => MARKER_SLEEP,
            Mode::Night => MARKER_NIGHT,
        }
    }
}

/// Same end-exclusive, wrap-aware window test the evaluator applies to
/// time routines.
fn in_daily_window(second_of_day: u32, start_min: u16, end_min: u16) -> bool {
    let start = u32::from(start_min) * 60;
    let end = u32::from(end_min) * 60;
    if start < end {
        second_of_day >= start && second_of_day < end
    } else if start > end {
        second_of_day >= start || second_of_day < end
    } else {
        false
    }
}

fn validate(config: &ScenarioConfig, faults: &[FaultInjection], grid: Grid) -> Result<(), ScenarioError> {
    if config.days == 0 {
        return Err(ScenarioError::InvalidConfig("days must be at least 1".into()));
    }
    if 86_400 % config.step_secs != 0 {
        return Err(ScenarioError::InvalidConfig(
            "step must divide a day".into(),
        ));
    }
    if !config.reference_value.is_finite() {
        return Err(ScenarioError::InvalidConfig("reference value must be finite".into()));
    }
    let minute_ok = |m: u16| m < 24 * 60;
    if !minute_ok(config.night_start_min) || !minute_ok(config.night_end_min) {
        return Err(ScenarioError::InvalidConfig("night window out of range".into()));
    }
    for (s, e) in &config.presence_windows {
        if !minute_ok(*s) || !minute_ok(*e) {
            return Err(ScenarioError::InvalidConfig("presence window out of range".into()));
        }
    }

    for fault in faults {
        if fault.from >= fault.to {
            return Err(ScenarioError::EmptyFaultWindow);
        }
        if fault.from < grid.start() || fault.to > grid.end() {
            return Err(ScenarioError::FaultOutOfSpan);
        }
    }
    for (i, a) in faults.iter().enumerate() {
        for b in &faults[i + 1..] {
            let overlap = a.from < b.to && b.from < a.to;
            let shared = a
                .kind
                .channels()
                .iter()
                .any(|c| b.kind.channels().contains(c));
            if overlap && shared {
                return Err(ScenarioError::ContradictoryFaults {
                    first: a.kind.name(),
                    second: b.kind.name(),
                });
            }
        }
    }
    Ok(())
}

/// Generates sensor and marker logs plus the matching spec text.
pub fn generate(
    config: &ScenarioConfig,
    faults: &[FaultInjection],
) -> Result<GeneratedScenario, ScenarioError> {
    let start = config
        .start_date
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists")
        .and_utc();
    let end = start + chrono::Duration::days(i64::from(config.days));
    let grid = Grid::new(start, end, config.step_secs)?;
    validate(config, faults, grid)?;

    let scheduled_mode = |t: DateTime<Utc>| -> Mode {
        let sod = t.time().num_seconds_from_midnight();
        if in_daily_window(sod, config.night_start_min, config.night_end_min) {
            Mode::Night
        } else if config
            .presence_windows
            .iter()
            .any(|(s, e)| in_daily_window(sod, *s, *e))
        {
            Mode::Main
        } else {
            Mode::Sleep
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // quarter-step time constant: one step decays the residual by e^-4
    let decay = (-4.0_f64).exp();
    let step = chrono::Duration::seconds(i64::from(config.step_secs));

    let mut sensor_csv = String::from("sensor_id,timestamp,value\n");
    let mut marker_csv = String::from("timestamp,statespace,marker\n");
    let mut temp_state = f64::NAN;
    let mut previous_marker: Option<&'static str> = None;

    for (i, t) in grid.timestamps().enumerate() {
        let scheduled = scheduled_mode(t);

        let mut effective = scheduled;
        let mut marker = scheduled.marker();
        let mut setpoint = config.reference_value;
        let mut gap = false;
        for fault in faults.iter().filter(|f| f.covers(t)) {
            match fault.kind {
                FaultKind::StuckMode => {
                    let before = (fault.from - step).max(grid.start());
                    effective = scheduled_mode(before);
                    marker = effective.marker();
                }
                FaultKind::SetpointDrift => setpoint += fault.magnitude,
                FaultKind::WrongMarker => {
                    marker = if scheduled == Mode::Night {
                        MARKER_MAIN
                    } else {
                        MARKER_NIGHT
                    };
                }
                FaultKind::SensorGap => gap = true,
            }
        }

        let target = match effective {
            Mode::Night => NIGHT_VALUE,
            Mode::Main | Mode::Sleep => setpoint,
        };
        temp_state = if i == 0 {
            target
        } else {
            target + (temp_state - target) * decay
        };
        // one draw per cell keeps the stream aligned across fault variants
        let noise = rng.random_range(-NOISE_AMPLITUDE..=NOISE_AMPLITUDE);

        let ts = t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        if !gap {
            sensor_csv.push_str(&format!(
                "{TEMPERATURE_SENSOR},{ts},{:.3}\n",
                temp_state + noise
            ));
        }
        let presence = if config
            .presence_windows
            .iter()
            .any(|(s, e)| in_daily_window(t.time().num_seconds_from_midnight(), *s, *e))
        {
            1.0
        } else {
            0.0
        };
        sensor_csv.push_str(&format!("{PRESENCE_SENSOR},{ts},{presence:.3}\n"));
        sensor_csv.push_str(&format!("{SETPOINT_SENSOR},{ts},{setpoint:.3}\n"));

        if previous_marker != Some(marker) {
            marker_csv.push_str(&format!("{ts},{STATESPACE},{marker}\n"));
            previous_marker = Some(marker);
        }
    }

    Ok(GeneratedScenario {
        sensor_csv: sensor_csv.into_bytes(),
        marker_csv: marker_csv.into_bytes(),
        spec_text: spec_text(config),
        grid,
    })
}

fn hhmm(minutes: u16) -> String {
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

/// The spec the generated data is expected to satisfy in exclusive mode.
fn spec_text(config: &ScenarioConfig) -> String {
    let reference = config.reference_value;
    format!(
        r#"// Room temperature control: three modes on a daily schedule.
// Generated fixture; regenerate instead of editing by hand.

constant referenceValue = {reference};
constant nightValue = {NIGHT_VALUE};

timeroutine isNight {{
  daily {night_start} .. {night_end};
}}

characteristic controlCurve {{
  x = "{SETPOINT_SENSOR}";
  y = "{TEMPERATURE_SENSOR}";
  points {{ ({lo}, {lo}) ({hi}, {hi}) }}
  margin 1;
}}

rule arePeoplePresent {{
  sensors {{
    I1 = "{PRESENCE_SENSOR}";
  }}
  I1 > 0
}}

rule nobodyPresent {{
  not arePeoplePresent
}}

rule isDay {{
  not isNight
}}

rule isNightTime {{
  isNight
}}

rule referenceValueChange {{
  sensors {{
    I1 = "{SETPOINT_SENSOR}";
  }}
  // an `or` between these bounds would hold for every reading and never
  // flag a deviation; the band needs `and`
  (I1 >= referenceValue - 3) and (I1 <= referenceValue + 3)
}}

rule satisfiesCharacteristic {{
  satisfies(controlCurve)
}}

rule isNightSetback {{
  sensors {{
    I1 = "{TEMPERATURE_SENSOR}";
  }}
  abs(I1 - nightValue) <= 0.5
}}

statespace {STATESPACE} {{
  mode exclusive;
  state MainMode marker "{MARKER_MAIN}" {{
    rules {{ isDay; arePeoplePresent; referenceValueChange; satisfiesCharacteristic; }}
  }}
  state SleepMode marker "{MARKER_SLEEP}" {{
    rules {{ isDay; nobodyPresent; }}
  }}
  state NightMode marker "{MARKER_NIGHT}" {{
    rules {{ isNightTime; isNightSetback; }}
  }}
  transition MainMode -- SleepMode "presence change";
  transition SleepMode -- NightMode "night window";
  transition MainMode -- NightMode "night window";
}}
"#,
        night_start = hhmm(config.night_start_min),
        night_end = hhmm(config.night_end_min),
        lo = reference - 6.0,
        hi = reference + 6.0,
    )
}
