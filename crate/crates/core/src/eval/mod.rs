//! Per-timestamp evaluation of expressions, rules, functions, time routines
//! and characteristic predicates, with explicit no-data propagation.
//!
//! Boolean connectives follow Kleene three-valued logic: `and` with one
//! violated operand is violated, `or` with one satisfied operand is
//! satisfied, `implies` with a violated antecedent is satisfied; every other
//! combination involving no-data stays no-data. Numeric operations propagate
//! missing operands, and a division by zero or non-finite result becomes
//! numeric no-data rather than an error.

mod characteristic;
mod timeroutine;
mod tristate;

pub use characteristic::{characteristic_value, eval_characteristic};
pub use timeroutine::eval_time_routine;
pub use tristate::TriState;

use std::collections::HashMap;
use std::rc::Rc;

use chrono_tz::Tz;
use thiserror::Error;

use crate::spec::ast::{BinOp, CharacteristicDef, ElementDef, Expr, SensorBinding};
use crate::spec::resolve::{ResolvedSpec, ValueKind};
use crate::timeseries::{Grid, TimeSeries};

/// Default absolute tolerance on `=`, `>=` and `<=` comparisons.
///
/// Strict equality on measured values would be unsatisfiable; an explicit
/// band in the spec is still the better tool.
pub const DEFAULT_EQ_EPS: f64 = 1e-9;

/// Result of evaluating one expression at one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Bool(TriState),
    Num(f64),
    NumNoData,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("dataset is missing required sensors: {}", ids.join(", "))]
    MissingSensors { ids: Vec<String> },
    #[error("sensor `{sensor}` is not on the evaluation grid")]
    GridMismatch { sensor: String },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element `{name}` is a {kind} and has no per-timestamp series")]
    NotASeries { name: String, kind: &'static str },
}

/// Everything needed to evaluate a resolved spec over one grid.
#[derive(Debug, Clone)]
pub struct EvalContext<'a> {
    spec: &'a ResolvedSpec,
    dataset: &'a HashMap<String, TimeSeries>,
    grid: Grid,
    zone: Tz,
    eq_eps: f64,
}

impl<'a> EvalContext<'a> {
    /// Builds a context, verifying that every required sensor is present in
    /// the dataset on the evaluation grid.
    pub fn new(
        spec: &'a ResolvedSpec,
        dataset: &'a HashMap<String, TimeSeries>,
        grid: Grid,
    ) -> Result<Self, EvalError> {
        let missing: Vec<String> = spec
            .required_sensor_ids()
            .into_iter()
            .filter(|id| !dataset.contains_key(id))
            .collect();
        if !missing.is_empty() {
            return Err(EvalError::MissingSensors { ids: missing });
        }
        let mut sensors: Vec<&String> = dataset.keys().collect();
        sensors.sort();
        for id in sensors {
            if dataset[id].grid() != grid {
                return Err(EvalError::GridMismatch { sensor: id.clone() });
            }
        }
        Ok(EvalContext {
            spec,
            dataset,
            grid,
            zone: Tz::UTC,
            eq_eps: DEFAULT_EQ_EPS,
        })
    }

    /// IANA zone used by time routines (default UTC).
    pub fn with_zone(mut self, zone: Tz) -> Self {
        self.zone = zone;
        self
    }

    pub fn with_eq_eps(mut self, eq_eps: f64) -> Self {
        self.eq_eps = eq_eps;
        self
    }

    pub fn spec(&self) -> &ResolvedSpec {
        self.spec
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn zone(&self) -> Tz {
        self.zone
    }

    pub fn eq_eps(&self) -> f64 {
        self.eq_eps
    }
}

/// A rule's (or any boolean element's) per-cell results.
#[derive(Debug, Clone, PartialEq)]
pub struct TriStateSeries {
    pub element: String,
    grid: Grid,
    cells: Vec<TriState>,
}

impl TriStateSeries {
    pub fn new(element: impl Into<String>, grid: Grid, cells: Vec<TriState>) -> Self {
        assert_eq!(cells.len(), grid.cell_count());
        TriStateSeries {
            element: element.into(),
            grid,
            cells,
        }
    }

    pub fn uniform(element: impl Into<String>, grid: Grid, value: TriState) -> Self {
        Self::new(element, grid, vec![value; grid.cell_count()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn cells(&self) -> &[TriState] {
        &self.cells
    }

    pub fn get(&self, cell: usize) -> TriState {
        self.cells[cell]
    }

    /// (satisfied, violated, no-data) cell counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for t in &self.cells {
            match t {
                TriState::Satisfied => c.0 += 1,
                TriState::Violated => c.1 += 1,
                TriState::NoData => c.2 += 1,
            }
        }
        c
    }
}

/// A function's per-cell results; `None` is numeric no-data.
#[derive(Debug, Clone, PartialEq)]
pub struct NumSeries {
    pub element: String,
    grid: Grid,
    cells: Vec<Option<f64>>,
}

impl NumSeries {
    pub fn new(element: impl Into<String>, grid: Grid, cells: Vec<Option<f64>>) -> Self {
        assert_eq!(cells.len(), grid.cell_count());
        NumSeries {
            element: element.into(),
            grid,
            cells,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn cells(&self) -> &[Option<f64>] {
        &self.cells
    }

    pub fn get(&self, cell: usize) -> Option<f64> {
        self.cells[cell]
    }
}

/// Series of either kind, as produced by [`eval_element_series`].
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesValue {
    Tri(TriStateSeries),
    Num(NumSeries),
}

impl SeriesValue {
    pub fn as_tri(&self) -> Option<&TriStateSeries> {
        match self {
            SeriesValue::Tri(t) => Some(t),
            SeriesValue::Num(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<&NumSeries> {
        match self {
            SeriesValue::Num(n) => Some(n),
            SeriesValue::Tri(_) => None,
        }
    }

    fn value_at(&self, cell: usize) -> Value {
        match self {
            SeriesValue::Tri(t) => Value::Bool(t.get(cell)),
            SeriesValue::Num(n) => match n.get(cell) {
                Some(v) => Value::Num(v),
                None => Value::NumNoData,
            },
        }
    }
}

/// Memoizing series evaluator over one context.
///
/// Element series are computed at most once per evaluator; referenced
/// elements are resolved bottom-up, which terminates because resolved specs
/// are acyclic. All evaluation is pure, so memoization is unobservable.
pub struct Evaluator<'a> {
    ctx: &'a EvalContext<'a>,
    cache: HashMap<String, Rc<SeriesValue>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(ctx: &'a EvalContext<'a>) -> Self {
        Evaluator {
            ctx,
            cache: HashMap::new(),
        }
    }

    pub fn ctx(&self) -> &EvalContext<'a> {
        self.ctx
    }

    /// The per-timestamp series of a named element.
    ///
    /// Rules and time routines yield tri-state series; functions and
    /// constants yield numeric series. Characteristics and state spaces have
    /// no standalone series.
    pub fn element_series(&mut self, name: &str) -> Result<Rc<SeriesValue>, EvalError> {
        if let Some(cached) = self.cache.get(name) {
            return Ok(Rc::clone(cached));
        }
        let grid = self.ctx.grid;
        let series = match self.ctx.spec.element(name) {
            None => return Err(EvalError::UnknownElement(name.to_string())),
            Some(ElementDef::Rule(r)) => {
                let body = r.body.clone();
                let sensors = r.sensors.clone();
                self.body_series(name, &sensors, &body)?
            }
            Some(ElementDef::Function(f)) => {
                let body = f.body.clone();
                let sensors = f.sensors.clone();
                self.body_series(name, &sensors, &body)?
            }
            Some(ElementDef::TimeRoutine(tr)) => {
                let zone = self.ctx.zone;
                let cells = grid
                    .timestamps()
                    .map(|t| TriState::from_bool(eval_time_routine(tr, t, zone)))
                    .collect();
                SeriesValue::Tri(TriStateSeries::new(name, grid, cells))
            }
            Some(ElementDef::Constant(c)) => SeriesValue::Num(NumSeries::new(
                name,
                grid,
                vec![Some(c.value); grid.cell_count()],
            )),
            Some(other @ ElementDef::Characteristic(_))
            | Some(other @ ElementDef::StateSpace(_)) => {
                return Err(EvalError::NotASeries {
                    name: name.to_string(),
                    kind: other.kind_name(),
                })
            }
        };
        let rc = Rc::new(series);
        self.cache.insert(name.to_string(), Rc::clone(&rc));
        Ok(rc)
    }

    /// Evaluates an expression body over the whole grid under an element's
    /// sensor bindings. Used for inferred rules as well as declared ones.
    pub fn body_series(
        &mut self,
        element: &str,
        sensors: &[SensorBinding],
        body: &Expr,
    ) -> Result<SeriesValue, EvalError> {
        let frame = self.build_frame(sensors, body)?;
        let grid = self.ctx.grid;
        let n = grid.cell_count();
        match self.ctx.spec.expr_kind(body, sensors) {
            ValueKind::Boolean => {
                let mut cells = Vec::with_capacity(n);
                for i in 0..n {
                    cells.push(as_tri(frame.eval(body, i)));
                }
                Ok(SeriesValue::Tri(TriStateSeries::new(element, grid, cells)))
            }
            ValueKind::Numeric => {
                let mut cells = Vec::with_capacity(n);
                for i in 0..n {
                    cells.push(as_num(frame.eval(body, i)));
                }
                Ok(SeriesValue::Num(NumSeries::new(element, grid, cells)))
            }
        }
    }

    /// Evaluates one expression at one cell under an element's bindings.
    pub fn expr_at(
        &mut self,
        expr: &Expr,
        sensors: &[SensorBinding],
        cell: usize,
    ) -> Result<Value, EvalError> {
        let frame = self.build_frame(sensors, expr)?;
        Ok(frame.eval(expr, cell))
    }

    /// Resolves every name the expression can touch: local sensors to their
    /// dataset series, referenced elements to memoized series (computing
    /// them first), and `satisfies` targets to their sensor pair.
    ///
    /// The frame borrows from the context, not the evaluator, so it stays
    /// usable after further cache growth.
    fn build_frame<'s>(
        &mut self,
        sensors: &'s [SensorBinding],
        body: &Expr,
    ) -> Result<Frame<'s>, EvalError>
    where
        'a: 's,
    {
        let ctx: &'a EvalContext<'a> = self.ctx;
        let mut element_refs: Vec<String> = Vec::new();
        let mut char_refs: Vec<String> = Vec::new();
        body.walk(&mut |e| match e {
            Expr::Ref(name, _) => {
                if !sensors.iter().any(|s| s.local_id == *name)
                    && !element_refs.iter().any(|n| n == name)
                {
                    element_refs.push(name.clone());
                }
            }
            Expr::Satisfies(name, _) if !char_refs.iter().any(|n| n == name) => {
                char_refs.push(name.clone());
            }
            _ => {}
        });

        let mut deps = HashMap::new();
        for name in element_refs {
            let series = self.element_series(&name)?;
            deps.insert(name, series);
        }

        let mut chars = HashMap::new();
        for name in char_refs {
            let def = ctx
                .spec
                .characteristic(&name)
                .ok_or_else(|| EvalError::UnknownElement(name.clone()))?;
            let x = ctx.dataset.get(&def.x_sensor).ok_or_else(|| {
                EvalError::MissingSensors {
                    ids: vec![def.x_sensor.clone()],
                }
            })?;
            let y = ctx.dataset.get(&def.y_sensor).ok_or_else(|| {
                EvalError::MissingSensors {
                    ids: vec![def.y_sensor.clone()],
                }
            })?;
            chars.insert(name, CharBinding { def, x, y });
        }

        let mut sensor_series = HashMap::new();
        for binding in sensors {
            let series = ctx.dataset.get(&binding.bms_id).ok_or_else(|| {
                EvalError::MissingSensors {
                    ids: vec![binding.bms_id.clone()],
                }
            })?;
            sensor_series.insert(binding.local_id.as_str(), series);
        }

        Ok(Frame {
            spec: ctx.spec,
            sensors,
            sensor_series,
            deps,
            chars,
            eq_eps: ctx.eq_eps,
        })
    }
}

struct CharBinding<'f> {
    def: &'f CharacteristicDef,
    x: &'f TimeSeries,
    y: &'f TimeSeries,
}

/// All names an expression needs, bound for fast per-cell evaluation.
struct Frame<'f> {
    spec: &'f ResolvedSpec,
    sensors: &'f [SensorBinding],
    sensor_series: HashMap<&'f str, &'f TimeSeries>,
    deps: HashMap<String, Rc<SeriesValue>>,
    chars: HashMap<String, CharBinding<'f>>,
    eq_eps: f64,
}

impl Frame<'_> {
    fn eval(&self, expr: &Expr, cell: usize) -> Value {
        match expr {
            Expr::Bool(b, _) => Value::Bool(TriState::from_bool(*b)),
            Expr::Num(n, _) => Value::Num(*n),
            Expr::Ref(name, _) => {
                if let Some(series) = self.sensor_series.get(name.as_str()) {
                    return match series.value(cell) {
                        Some(v) => Value::Num(v),
                        None => Value::NumNoData,
                    };
                }
                match self.deps.get(name) {
                    Some(series) => series.value_at(cell),
                    None => unreachable!("unresolved reference `{name}` reached evaluation"),
                }
            }
            Expr::Satisfies(name, _) => {
                let binding = &self.chars[name];
                match (binding.x.value(cell), binding.y.value(cell)) {
                    (Some(x), Some(y)) => Value::Bool(eval_characteristic(binding.def, x, y)),
                    _ => Value::Bool(TriState::NoData),
                }
            }
            Expr::Not(inner, _) => Value::Bool(as_tri(self.eval(inner, cell)).not()),
            Expr::Neg(inner, _) => match as_num(self.eval(inner, cell)) {
                Some(v) => num_value(-v),
                None => Value::NumNoData,
            },
            Expr::Abs(inner, _) => match as_num(self.eval(inner, cell)) {
                Some(v) => num_value(v.abs()),
                None => Value::NumNoData,
            },
            Expr::Binary { op, lhs, rhs, .. } => {
                if op.is_logic() {
                    let l = as_tri(self.eval(lhs, cell));
                    let r = as_tri(self.eval(rhs, cell));
                    return Value::Bool(match op {
                        BinOp::And => l.and(r),
                        BinOp::Or => l.or(r),
                        BinOp::Implies => l.implies(r),
                        _ => unreachable!(),
                    });
                }
                let l = as_num(self.eval(lhs, cell));
                let r = as_num(self.eval(rhs, cell));
                let (Some(l), Some(r)) = (l, r) else {
                    return if op.is_comparison() {
                        Value::Bool(TriState::NoData)
                    } else {
                        Value::NumNoData
                    };
                };
                match op {
                    BinOp::Eq => Value::Bool(TriState::from_bool((l - r).abs() <= self.eq_eps)),
                    BinOp::Ge => Value::Bool(TriState::from_bool(l > r || (l - r).abs() <= self.eq_eps)),
                    BinOp::Le => Value::Bool(TriState::from_bool(l < r || (l - r).abs() <= self.eq_eps)),
                    BinOp::Gt => Value::Bool(TriState::from_bool(l > r)),
                    BinOp::Lt => Value::Bool(TriState::from_bool(l < r)),
                    BinOp::Add => num_value(l + r),
                    BinOp::Sub => num_value(l - r),
                    BinOp::Mul => num_value(l * r),
                    BinOp::Div => {
                        if r == 0.0 {
                            Value::NumNoData
                        } else {
                            num_value(l / r)
                        }
                    }
                    _ => unreachable!(),
                }
            }
            Expr::If { cond, then, els, .. } => match as_tri(self.eval(cond, cell)) {
                TriState::Satisfied => self.eval(then, cell),
                TriState::Violated => self.eval(els, cell),
                TriState::NoData => match self.spec.expr_kind(then, self.sensors) {
                    ValueKind::Boolean => Value::Bool(TriState::NoData),
                    ValueKind::Numeric => Value::NumNoData,
                },
            },
        }
    }
}

fn num_value(v: f64) -> Value {
    if v.is_finite() {
        Value::Num(v)
    } else {
        Value::NumNoData
    }
}

fn as_tri(v: Value) -> TriState {
    match v {
        Value::Bool(t) => t,
        Value::Num(_) | Value::NumNoData => {
            unreachable!("numeric value where a boolean was type-checked")
        }
    }
}

fn as_num(v: Value) -> Option<f64> {
    match v {
        Value::Num(n) => Some(n),
        Value::NumNoData => None,
        Value::Bool(_) => unreachable!("boolean value where a numeric was type-checked"),
    }
}

/// Evaluates one type-checked expression at one cell under `sensors`.
///
/// Convenience wrapper over [`Evaluator`]; referenced element series are
/// computed on the fly, so batch work should use [`eval_element_series`] or
/// a shared [`Evaluator`] instead.
pub fn eval_expr(
    expr: &Expr,
    ctx: &EvalContext,
    sensors: &[SensorBinding],
    cell: usize,
) -> Result<Value, EvalError> {
    Evaluator::new(ctx).expr_at(expr, sensors, cell)
}

/// Evaluates the named element over the whole grid.
pub fn eval_element_series(name: &str, ctx: &EvalContext) -> Result<SeriesValue, EvalError> {
    let rc = Evaluator::new(ctx).element_series(name)?;
    Ok(Rc::try_unwrap(rc).unwrap_or_else(|rc| (*rc).clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{parse_spec, resolve_spec};
    use chrono::{DateTime, Utc};

    fn utc(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    fn day_grid() -> Grid {
        Grid::new(utc("2011-01-10T00:00:00Z"), utc("2011-01-11T00:00:00Z"), 900).unwrap()
    }

    fn constant_series(sensor: &str, grid: Grid, value: f64) -> TimeSeries {
        TimeSeries::new(sensor, grid, vec![Some(value); grid.cell_count()])
    }

    const EXAMPLE_SPEC: &str = r#"
constant referenceValue = 21;
timeroutine isNight { daily 22:00 .. 06:00; }
rule isNightMode {
  sensors { I1 = "000-000-001"; }
  if isNight then I1 = 18.0 else true
}
rule referenceValueChange {
  sensors { I1 = "000-000-003"; }
  (I1 >= referenceValue - 3) or (I1 <= referenceValue + 3)
}
"#;

    fn cell_at(grid: Grid, ts: &str) -> usize {
        let t = utc(ts);
        grid.timestamps().position(|g| g == t).unwrap()
    }

    #[test]
    fn night_mode_rule_cells() {
        let resolved = resolve_spec(parse_spec(EXAMPLE_SPEC).unwrap().doc).unwrap();
        let grid = day_grid();
        let mut dataset = HashMap::new();
        dataset.insert("000-000-001".to_string(), constant_series("000-000-001", grid, 18.0));
        dataset.insert("000-000-003".to_string(), constant_series("000-000-003", grid, 25.0));
        let ctx = EvalContext::new(&resolved.spec, &dataset, grid).unwrap();

        let rule = resolved.spec.rule("isNightMode").unwrap();
        // 23:00 is night; the sensor reads 18.0
        let at_night = cell_at(grid, "2011-01-10T23:00:00Z");
        assert_eq!(
            eval_expr(&rule.body, &ctx, &rule.sensors, at_night).unwrap(),
            Value::Bool(TriState::Satisfied)
        );
        // 12:00 is not night; any reading satisfies vacuously
        let at_noon = cell_at(grid, "2011-01-10T12:00:00Z");
        assert_eq!(
            eval_expr(&rule.body, &ctx, &rule.sensors, at_noon).unwrap(),
            Value::Bool(TriState::Satisfied)
        );
    }

    #[test]
    fn reference_band_with_or_is_a_tautology() {
        // (25 >= 21 - 3) or (25 <= 21 + 3): the first disjunct already holds.
        let resolved = resolve_spec(parse_spec(EXAMPLE_SPEC).unwrap().doc).unwrap();
        let grid = day_grid();
        let mut dataset = HashMap::new();
        dataset.insert("000-000-001".to_string(), constant_series("000-000-001", grid, 18.0));
        dataset.insert("000-000-003".to_string(), constant_series("000-000-003", grid, 25.0));
        let ctx = EvalContext::new(&resolved.spec, &dataset, grid).unwrap();
        let rule = resolved.spec.rule("referenceValueChange").unwrap();
        assert_eq!(
            eval_expr(&rule.body, &ctx, &rule.sensors, 0).unwrap(),
            Value::Bool(TriState::Satisfied)
        );
    }

    #[test]
    fn kleene_dominance_beats_missing_sensor() {
        let text = r#"
rule r {
  sensors { I1 = "s"; }
  I1 > 0 and false
}
"#;
        let resolved = resolve_spec(parse_spec(text).unwrap().doc).unwrap();
        let grid = day_grid();
        let mut dataset = HashMap::new();
        dataset.insert("s".to_string(), TimeSeries::empty("s", grid));
        let ctx = EvalContext::new(&resolved.spec, &dataset, grid).unwrap();
        let rule = resolved.spec.rule("r").unwrap();
        assert_eq!(
            eval_expr(&rule.body, &ctx, &rule.sensors, 0).unwrap(),
            Value::Bool(TriState::Violated)
        );
    }

    #[test]
    fn missing_sensor_everywhere_gives_all_no_data() {
        let text = r#"
rule r {
  sensors { I1 = "s"; }
  I1 > 0
}
"#;
        let resolved = resolve_spec(parse_spec(text).unwrap().doc).unwrap();
        let grid = day_grid();
        let mut dataset = HashMap::new();
        dataset.insert("s".to_string(), TimeSeries::empty("s", grid));
        let ctx = EvalContext::new(&resolved.spec, &dataset, grid).unwrap();
        let series = eval_element_series("r", &ctx).unwrap();
        let tri = series.as_tri().unwrap();
        assert_eq!(tri.counts(), (0, 0, grid.cell_count()));
    }

    #[test]
    fn constant_true_rule_is_all_satisfied() {
        let resolved = resolve_spec(parse_spec("rule r { true }").unwrap().doc).unwrap();
        let grid = day_grid();
        let dataset = HashMap::new();
        let ctx = EvalContext::new(&resolved.spec, &dataset, grid).unwrap();
        let series = eval_element_series("r", &ctx).unwrap();
        assert_eq!(series.as_tri().unwrap().counts(), (grid.cell_count(), 0, 0));
    }

    #[test]
    fn division_by_zero_is_numeric_no_data() {
        let text = r#"
function f { 1 / (1 - 1) }
rule r { 1 / (1 - 1) > 0 }
"#;
        let resolved = resolve_spec(parse_spec(text).unwrap().doc).unwrap();
        let grid = day_grid();
        let dataset = HashMap::new();
        let ctx = EvalContext::new(&resolved.spec, &dataset, grid).unwrap();
        let f = eval_element_series("f", &ctx).unwrap();
        assert_eq!(f.as_num().unwrap().get(0), None);
        let r = eval_element_series("r", &ctx).unwrap();
        assert_eq!(r.as_tri().unwrap().get(0), TriState::NoData);
    }

    #[test]
    fn comparison_tolerance_applies_to_eq_ge_le() {
        let text = r#"
rule eq { 1.0 = 1.0000000000001 }
rule ge { 1.0 >= 1.0000000000001 }
rule le { 1.0000000000001 <= 1.0 }
rule gt { 1.0 > 1.0 - 1e-12 }
"#;
        let resolved = resolve_spec(parse_spec(text).unwrap().doc).unwrap();
        let grid = day_grid();
        let dataset = HashMap::new();
        let ctx = EvalContext::new(&resolved.spec, &dataset, grid).unwrap();
        for name in ["eq", "ge", "le", "gt"] {
            let series = eval_element_series(name, &ctx).unwrap();
            assert_eq!(series.as_tri().unwrap().get(0), TriState::Satisfied, "{name}");
        }
        // with a zero tolerance, the eq rule flips
        let strict = EvalContext::new(&resolved.spec, &dataset, grid)
            .unwrap()
            .with_eq_eps(0.0);
        let series = eval_element_series("eq", &strict).unwrap();
        assert_eq!(series.as_tri().unwrap().get(0), TriState::Violated);
    }

    #[test]
    fn if_with_no_data_condition_is_no_data() {
        let text = r#"
rule r {
  sensors { I1 = "s"; }
  if I1 > 0 then true else true
}
function f {
  sensors { I1 = "s"; }
  if I1 > 0 then 1 else 2
}
"#;
        let resolved = resolve_spec(parse_spec(text).unwrap().doc).unwrap();
        let grid = day_grid();
        let mut dataset = HashMap::new();
        dataset.insert("s".to_string(), TimeSeries::empty("s", grid));
        let ctx = EvalContext::new(&resolved.spec, &dataset, grid).unwrap();
        assert_eq!(
            eval_element_series("r", &ctx).unwrap().as_tri().unwrap().get(0),
            TriState::NoData
        );
        assert_eq!(
            eval_element_series("f", &ctx).unwrap().as_num().unwrap().get(0),
            None
        );
    }

    #[test]
    fn missing_required_sensor_rejected_up_front() {
        let text = r#"
rule r {
  sensors { I1 = "absent-sensor"; }
  I1 > 0
}
"#;
        let resolved = resolve_spec(parse_spec(text).unwrap().doc).unwrap();
        let dataset = HashMap::new();
        let err = EvalContext::new(&resolved.spec, &dataset, day_grid()).unwrap_err();
        assert_eq!(
            err,
            EvalError::MissingSensors {
                ids: vec!["absent-sensor".to_string()]
            }
        );
    }

    #[test]
    fn statespace_has_no_series() {
        let text = "statespace S { state A { } }";
        let resolved = resolve_spec(parse_spec(text).unwrap().doc).unwrap();
        let dataset = HashMap::new();
        let ctx = EvalContext::new(&resolved.spec, &dataset, day_grid()).unwrap();
        assert!(matches!(
            eval_element_series("S", &ctx),
            Err(EvalError::NotASeries { .. })
        ));
    }

    #[test]
    fn rule_references_are_memoized_consistently() {
        let text = r#"
rule base {
  sensors { I1 = "s"; }
  I1 > 10
}
rule derived { base and base }
"#;
        let resolved = resolve_spec(parse_spec(text).unwrap().doc).unwrap();
        let grid = day_grid();
        let mut dataset = HashMap::new();
        dataset.insert("s".to_string(), constant_series("s", grid, 20.0));
        let ctx = EvalContext::new(&resolved.spec, &dataset, grid).unwrap();
        let mut ev = Evaluator::new(&ctx);
        let derived = ev.element_series("derived").unwrap();
        assert_eq!(derived.as_tri().unwrap().counts(), (grid.cell_count(), 0, 0));
        // base landed in the cache as a side effect
        let base = ev.element_series("base").unwrap();
        assert_eq!(base.as_tri().unwrap().counts(), (grid.cell_count(), 0, 0));
    }
}
