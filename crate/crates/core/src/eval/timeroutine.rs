//! Calendar predicate evaluation.

use chrono::{DateTime, Datelike, Timelike, Utc};
use chrono_tz::Tz;

use crate::spec::ast::TimeRoutineDef;

/// True iff the local wall-clock time at `at` falls into any clause window.
///
/// Windows are end-exclusive; a window whose start is after its end wraps
/// past midnight and matches `[start, 24:00) ∪ [00:00, end)`. Day filters
/// test the local date of the evaluated timestamp. Conversion goes through
/// the IANA zone, so DST shifts move the windows with the wall clock.
pub fn eval_time_routine(tr: &TimeRoutineDef, at: DateTime<Utc>, zone: Tz) -> bool {
    let local = at.with_timezone(&zone);
    let second_of_day = local.num_seconds_from_midnight();
    let weekday = local.weekday();

    tr.clauses.iter().any(|w| {
        if let Some(days) = &w.days {
            if !days.contains(&weekday) {
                return false;
            }
        }
        let start = u32::from(w.start_min) * 60;
        let end = u32::from(w.end_min) * 60;
        if start < end {
            second_of_day >= start && second_of_day < end
        } else if start > end {
            second_of_day >= start || second_of_day < end
        } else {
            false
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::ast::ElementDef;
    use crate::spec::parser::parse_spec;

    fn routine(text: &str) -> TimeRoutineDef {
        let doc = parse_spec(text).unwrap().doc;
        match &doc.elements[0] {
            ElementDef::TimeRoutine(tr) => tr.clone(),
            _ => panic!("expected time routine"),
        }
    }

    fn utc(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    #[test]
    fn night_window() {
        let night = routine("timeroutine isNight { daily 22:00 .. 06:00; }");
        assert!(eval_time_routine(&night, utc("2011-01-10T23:30:00Z"), Tz::UTC));
        assert!(eval_time_routine(&night, utc("2011-01-10T03:00:00Z"), Tz::UTC));
        assert!(eval_time_routine(&night, utc("2011-01-10T22:00:00Z"), Tz::UTC));
        // end-exclusive
        assert!(!eval_time_routine(&night, utc("2011-01-10T06:00:00Z"), Tz::UTC));
        assert!(!eval_time_routine(&night, utc("2011-01-10T12:00:00Z"), Tz::UTC));
        assert!(eval_time_routine(&night, utc("2011-01-10T05:59:59Z"), Tz::UTC));
    }

    #[test]
    fn wrapped_window_split_oracle() {
        // [start, 24:00) ∪ [00:00, end) computed by hand for 22:00..06:00
        let night = routine("timeroutine isNight { daily 22:00 .. 06:00; }");
        for hour in 0..24 {
            let t = utc(&format!("2011-01-10T{hour:02}:00:00Z"));
            let expect = !(6..22).contains(&hour);
            assert_eq!(eval_time_routine(&night, t, Tz::UTC), expect, "hour {hour}");
        }
    }

    #[test]
    fn day_filter_uses_local_date() {
        // 2011-01-10 is a Monday.
        let mondays = routine("timeroutine t { daily 08:00 .. 10:00 on mon; }");
        assert!(eval_time_routine(&mondays, utc("2011-01-10T09:00:00Z"), Tz::UTC));
        assert!(!eval_time_routine(&mondays, utc("2011-01-11T09:00:00Z"), Tz::UTC));
    }

    #[test]
    fn zone_shifts_the_window() {
        let night = routine("timeroutine isNight { daily 22:00 .. 06:00; }");
        // 21:30 UTC is 22:30 in Berlin (winter, +01:00)
        let t = utc("2011-01-10T21:30:00Z");
        assert!(!eval_time_routine(&night, t, Tz::UTC));
        assert!(eval_time_routine(&night, t, Tz::Europe__Berlin));
    }

    #[test]
    fn dst_transition_keeps_wall_clock_semantics() {
        // Europe/Berlin springs forward on 2011-03-27 02:00 -> 03:00.
        let morning = routine("timeroutine t { daily 03:00 .. 04:00; }");
        // 01:30 UTC that day is 03:30 local (+02:00 after the jump).
        assert!(eval_time_routine(
            &morning,
            utc("2011-03-27T01:30:00Z"),
            Tz::Europe__Berlin
        ));
        // The day before, 01:30 UTC is 02:30 local.
        assert!(!eval_time_routine(
            &morning,
            utc("2011-03-26T01:30:00Z"),
            Tz::Europe__Berlin
        ));
    }

    #[test]
    fn full_day_window() {
        let always = routine("timeroutine t { daily 00:00 .. 24:00; }");
        assert!(eval_time_routine(&always, utc("2011-01-10T00:00:00Z"), Tz::UTC));
        assert!(eval_time_routine(&always, utc("2011-01-10T23:59:59Z"), Tz::UTC));
    }
}
