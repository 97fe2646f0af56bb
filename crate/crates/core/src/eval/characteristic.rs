//! Characteristic-band checks.

use crate::spec::ast::CharacteristicDef;

use super::TriState;

/// Piecewise-linear interpolation through the characteristic's points.
/// Returns `None` outside the defined x domain.
pub fn characteristic_value(ch: &CharacteristicDef, x: f64) -> Option<f64> {
    let pts = &ch.points;
    let first = pts.first()?;
    let last = pts.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let mut seg = pts.len() - 2;
    for i in 0..pts.len() - 1 {
        if x <= pts[i + 1].0 {
            seg = i;
            break;
        }
    }
    let (x0, y0) = pts[seg];
    let (x1, y1) = pts[seg + 1];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Checks whether `(x, y)` lies within the characteristic's margin band.
///
/// Satisfied iff `|y - f(x)| <= margin` where `f` is the piecewise-linear
/// interpolation through the defining points. Outside the defined x domain
/// the check is undecidable and yields no-data.
pub fn eval_characteristic(ch: &CharacteristicDef, x: f64, y: f64) -> TriState {
    match characteristic_value(ch, x) {
        None => TriState::NoData,
        Some(fx) => TriState::from_bool((y - fx).abs() <= ch.margin),
    }
}
