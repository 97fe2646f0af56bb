//! Name resolution, type checking and cycle detection.
//!
//! A [`ResolvedSpec`] guarantees:
//! - every reference in every expression binds to a sensor or element,
//! - rule bodies are boolean and function bodies numeric, with operand
//!   types enforced throughout,
//! - the reference graph between rules and functions is acyclic,
//! - state spaces only name rules in their `rules` blocks.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::diag::{Diagnostics, Loc};
use crate::spec::ast::*;

/// Static type of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Boolean,
    Numeric,
}

impl ValueKind {
    fn name(self) -> &'static str {
        match self {
            ValueKind::Boolean => "boolean",
            ValueKind::Numeric => "numeric",
        }
    }
}

/// A validated document with a name index over its elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSpec {
    doc: SpecDocument,
    index: HashMap<String, usize>,
}

/// Successful resolution: the spec plus any non-fatal warnings.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: ResolvedSpec,
    pub warnings: Diagnostics,
}

impl ResolvedSpec {
    pub fn document(&self) -> &SpecDocument {
        &self.doc
    }

    pub fn element(&self, name: &str) -> Option<&ElementDef> {
        self.index.get(name).map(|&i| &self.doc.elements[i])
    }

    pub fn rule(&self, name: &str) -> Option<&RuleDef> {
        match self.element(name) {
            Some(ElementDef::Rule(r)) => Some(r),
            _ => None,
        }
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        match self.element(name) {
            Some(ElementDef::Function(f)) => Some(f),
            _ => None,
        }
    }

    pub fn constant(&self, name: &str) -> Option<&ConstantDef> {
        match self.element(name) {
            Some(ElementDef::Constant(c)) => Some(c),
            _ => None,
        }
    }

    pub fn time_routine(&self, name: &str) -> Option<&TimeRoutineDef> {
        match self.element(name) {
            Some(ElementDef::TimeRoutine(t)) => Some(t),
            _ => None,
        }
    }

    pub fn characteristic(&self, name: &str) -> Option<&CharacteristicDef> {
        match self.element(name) {
            Some(ElementDef::Characteristic(c)) => Some(c),
            _ => None,
        }
    }

    pub fn statespace(&self, name: &str) -> Option<&StateSpaceDef> {
        match self.element(name) {
            Some(ElementDef::StateSpace(s)) => Some(s),
            _ => None,
        }
    }

    pub fn statespaces(&self) -> impl Iterator<Item = &StateSpaceDef> {
        self.doc.elements.iter().filter_map(|e| match e {
            ElementDef::StateSpace(s) => Some(s),
            _ => None,
        })
    }

    /// Every BMS sensor id the spec can read: all sensor bindings of all
    /// rules and functions, plus the x/y sensors of every characteristic
    /// referenced through `satisfies(...)`.
    pub fn required_sensor_ids(&self) -> BTreeSet<String> {
        let mut ids = BTreeSet::new();
        let mut referenced_chars: BTreeSet<&str> = BTreeSet::new();
        for el in &self.doc.elements {
            let (sensors, body) = match el {
                ElementDef::Rule(r) => (&r.sensors, &r.body),
                ElementDef::Function(f) => (&f.sensors, &f.body),
                _ => continue,
            };
            for s in sensors {
                ids.insert(s.bms_id.clone());
            }
            body.walk(&mut |e| {
                if let Expr::Satisfies(name, _) = e {
                    referenced_chars.insert(name);
                }
            });
        }
        for name in referenced_chars {
            if let Some(ch) = self.characteristic(name) {
                ids.insert(ch.x_sensor.clone());
                ids.insert(ch.y_sensor.clone());
            }
        }
        ids
    }

    /// Static type of a validated expression evaluated with `sensors` in
    /// scope. Total on resolved specs.
    pub fn expr_kind(&self, expr: &Expr, sensors: &[SensorBinding]) -> ValueKind {
        match expr {
            Expr::Bool(..) | Expr::Satisfies(..) | Expr::Not(..) => ValueKind::Boolean,
            Expr::Num(..) | Expr::Neg(..) | Expr::Abs(..) => ValueKind::Numeric,
            Expr::Binary { op, .. } => {
                if op.is_logic() || op.is_comparison() {
                    ValueKind::Boolean
                } else {
                    ValueKind::Numeric
                }
            }
            Expr::If { then, .. } => self.expr_kind(then, sensors),
            Expr::Ref(name, _) => {
                if sensors.iter().any(|s| s.local_id == *name) {
                    return ValueKind::Numeric;
                }
                match self.element(name) {
                    Some(ElementDef::Rule(_)) | Some(ElementDef::TimeRoutine(_)) => {
                        ValueKind::Boolean
                    }
                    _ => ValueKind::Numeric,
                }
            }
        }
    }
}

/// Validates a parsed document. See the module docs for what is enforced.
pub fn resolve_spec(doc: SpecDocument) -> Result<Resolved, Diagnostics> {
    let mut index = HashMap::new();
    for (i, el) in doc.elements.iter().enumerate() {
        // The parser rejects duplicates; keep the first on the defensive path.
        index.entry(el.name().to_string()).or_insert(i);
    }
    let spec = ResolvedSpec { doc, index };

    let mut errors = Diagnostics::new();
    let mut warnings = Diagnostics::new();

    for el in &spec.doc.elements {
        match el {
            ElementDef::Rule(r) => {
                let mut ck = TypeChecker {
                    spec: &spec,
                    sensors: &r.sensors,
                    errors: &mut errors,
                    warnings: &mut warnings,
                };
                if let Some(ValueKind::Numeric) = ck.infer(&r.body) {
                    errors.error(
                        format!("boolean required: rule `{}` has a numeric body", r.name),
                        r.body.loc(),
                    );
                }
            }
            ElementDef::Function(f) => {
                let mut ck = TypeChecker {
                    spec: &spec,
                    sensors: &f.sensors,
                    errors: &mut errors,
                    warnings: &mut warnings,
                };
                if let Some(ValueKind::Boolean) = ck.infer(&f.body) {
                    errors.error(
                        format!("numeric required: function `{}` has a boolean body", f.name),
                        f.body.loc(),
                    );
                }
            }
            ElementDef::StateSpace(ss) => {
                check_statespace(&spec, ss, &mut errors, &mut warnings)
            }
            _ => {}
        }
    }

    check_cycles(&spec, &mut errors);

    if errors.has_errors() {
        Err(errors)
    } else {
        Ok(Resolved { spec, warnings })
    }
}

fn check_statespace(
    spec: &ResolvedSpec,
    ss: &StateSpaceDef,
    errors: &mut Diagnostics,
    warnings: &mut Diagnostics,
) {
    let check_rule_ref = |r: &NameRef, errors: &mut Diagnostics| match spec.element(&r.name) {
        None => errors.error(
            format!("undefined reference `{}` in state space `{}`", r.name, ss.name),
            r.loc,
        ),
        Some(ElementDef::Rule(_)) => {}
        Some(other) => errors.error(
            format!(
                "state space `{}` requires a rule here, but `{}` is a {}",
                ss.name,
                r.name,
                other.kind_name()
            ),
            r.loc,
        ),
    };

    for r in &ss.space_rules {
        check_rule_ref(r, errors);
    }
    for state in &ss.states {
        for r in &state.rule_refs {
            check_rule_ref(r, errors);
        }
        if state.rule_refs.is_empty() {
            warnings.warning(
                format!(
                    "state `{}` declares no rules; it is satisfied by default",
                    state.id
                ),
                state.loc,
            );
        }
    }

    let mut seen_markers: HashMap<&str, &str> = HashMap::new();
    for state in &ss.states {
        if let Some(m) = &state.marker_value {
            if let Some(first) = seen_markers.get(m.as_str()) {
                warnings.warning(
                    format!(
                        "states `{first}` and `{}` declare the same marker \"{m}\"",
                        state.id
                    ),
                    state.loc,
                );
            } else {
                seen_markers.insert(m, &state.id);
            }
        }
    }
}

struct TypeChecker<'a> {
    spec: &'a ResolvedSpec,
    sensors: &'a [SensorBinding],
    errors: &'a mut Diagnostics,
    warnings: &'a mut Diagnostics,
}

impl TypeChecker<'_> {
    /// Infers the type of `expr`, reporting any errors found. Returns `None`
    /// when a sub-expression already failed, to avoid cascading messages.
    fn infer(&mut self, expr: &Expr) -> Option<ValueKind> {
        match expr {
            Expr::Bool(..) => Some(ValueKind::Boolean),
            Expr::Num(..) => Some(ValueKind::Numeric),
            Expr::Ref(name, loc) => self.infer_ref(name, *loc),
            Expr::Satisfies(name, loc) => {
                match self.spec.element(name) {
                    Some(ElementDef::Characteristic(_)) => Some(ValueKind::Boolean),
                    Some(other) => {
                        self.errors.error(
                            format!(
                                "satisfies(...) needs a characteristic, but `{name}` is a {}",
                                other.kind_name()
                            ),
                            *loc,
                        );
                        None
                    }
                    None => {
                        self.errors
                            .error(format!("undefined reference `{name}`"), *loc);
                        None
                    }
                }
            }
            Expr::Not(inner, loc) => {
                self.expect_kind(inner, ValueKind::Boolean, "not", *loc);
                Some(ValueKind::Boolean)
            }
            Expr::Neg(inner, loc) => {
                self.expect_kind(inner, ValueKind::Numeric, "unary -", *loc);
                Some(ValueKind::Numeric)
            }
            Expr::Abs(inner, loc) => {
                self.expect_kind(inner, ValueKind::Numeric, "abs", *loc);
                Some(ValueKind::Numeric)
            }
            Expr::Binary { op, lhs, rhs, loc } => {
                let operand = if op.is_logic() {
                    ValueKind::Boolean
                } else {
                    ValueKind::Numeric
                };
                self.expect_kind(lhs, operand, op.symbol(), *loc);
                self.expect_kind(rhs, operand, op.symbol(), *loc);
                Some(if op.is_logic() || op.is_comparison() {
                    ValueKind::Boolean
                } else {
                    ValueKind::Numeric
                })
            }
            Expr::If { cond, then, els, loc } => {
                self.expect_kind(cond, ValueKind::Boolean, "if condition", *loc);
                let t = self.infer(then);
                let e = self.infer(els);
                match (t, e) {
                    (Some(a), Some(b)) if a != b => {
                        self.errors.error(
                            format!(
                                "if branches must have one common type; then is {}, else is {}",
                                a.name(),
                                b.name()
                            ),
                            *loc,
                        );
                        None
                    }
                    (Some(a), _) => Some(a),
                    (None, other) => other,
                }
            }
        }
    }

    fn infer_ref(&mut self, name: &str, loc: Loc) -> Option<ValueKind> {
        if self.sensors.iter().any(|s| s.local_id == name) {
            if self.spec.element(name).is_some() {
                self.warnings.warning(
                    format!("sensor id `{name}` shadows the element of the same name"),
                    loc,
                );
            }
            return Some(ValueKind::Numeric);
        }
        match self.spec.element(name) {
            Some(ElementDef::Rule(_)) | Some(ElementDef::TimeRoutine(_)) => {
                Some(ValueKind::Boolean)
            }
            Some(ElementDef::Function(_)) | Some(ElementDef::Constant(_)) => {
                Some(ValueKind::Numeric)
            }
            Some(ElementDef::Characteristic(_)) => {
                self.errors.error(
                    format!("characteristic `{name}` can only be used via satisfies({name})"),
                    loc,
                );
                None
            }
            Some(ElementDef::StateSpace(_)) => {
                self.errors.error(
                    format!("state space `{name}` cannot be referenced inside an expression"),
                    loc,
                );
                None
            }
            None => {
                self.errors
                    .error(format!("undefined reference `{name}`"), loc);
                None
            }
        }
    }

    fn expect_kind(&mut self, expr: &Expr, want: ValueKind, op: &str, loc: Loc) {
        if let Some(got) = self.infer(expr) {
            if got != want {
                self.errors.error(
                    format!(
                        "`{op}` requires {} operands, found a {} expression",
                        want.name(),
                        got.name()
                    ),
                    loc,
                );
            }
        }
    }
}

/// Detects reference cycles among rules and functions and reports the
/// offending path, e.g. `a -> b -> a`.
fn check_cycles(spec: &ResolvedSpec, errors: &mut Diagnostics) {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }

    fn deps<'a>(spec: &'a ResolvedSpec, name: &str) -> Vec<&'a str> {
        let (sensors, body) = match spec.element(name) {
            Some(ElementDef::Rule(r)) => (&r.sensors, &r.body),
            Some(ElementDef::Function(f)) => (&f.sensors, &f.body),
            _ => return Vec::new(),
        };
        let mut out = Vec::new();
        body.walk(&mut |e| {
            if let Expr::Ref(target, _) = e {
                let shadowed = sensors.iter().any(|s| s.local_id == *target);
                if !shadowed
                    && matches!(
                        spec.element(target),
                        Some(ElementDef::Rule(_)) | Some(ElementDef::Function(_))
                    )
                {
                    out.push(target.as_str());
                }
            }
        });
        out
    }

    fn visit<'a>(
        spec: &'a ResolvedSpec,
        name: &'a str,
        colors: &mut HashMap<&'a str, Color>,
        stack: &mut Vec<&'a str>,
        reported: &mut HashSet<String>,
        errors: &mut Diagnostics,
    ) {
        colors.insert(name, Color::Grey);
        stack.push(name);
        for dep in deps(spec, name) {
            match colors.get(dep).copied().unwrap_or(Color::White) {
                Color::White => visit(spec, dep, colors, stack, reported, errors),
                Color::Grey => {
                    let start = stack.iter().position(|&n| n == dep).unwrap_or(0);
                    let mut path: Vec<&str> = stack[start..].to_vec();
                    path.push(dep);
                    let rendered = path.join(" -> ");
                    if reported.insert(rendered.clone()) {
                        let loc = spec.element(dep).map(|e| e.loc()).unwrap_or_default();
                        errors.error(format!("reference cycle: {rendered}"), loc);
                    }
                }
                Color::Black => {}
            }
        }
        stack.pop();
        colors.insert(name, Color::Black);
    }

    let mut colors: HashMap<&str, Color> = HashMap::new();
    let mut reported = HashSet::new();
    for el in &spec.doc.elements {
        if matches!(el, ElementDef::Rule(_) | ElementDef::Function(_))
            && colors.get(el.name()).copied().unwrap_or(Color::White) == Color::White
        {
            let mut stack = Vec::new();
            visit(spec, el.name(), &mut colors, &mut stack, &mut reported, errors);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parser::parse_spec;

    fn resolve(text: &str) -> Result<Resolved, Diagnostics> {
        resolve_spec(parse_spec(text).unwrap().doc)
    }

    const EXAMPLE_RULES: &str = r#"
constant referenceValue = 21;
timeroutine isNight { daily 22:00 .. 06:00; }
rule isNightMode {
  sensors { I1 = "000-000-001"; }
  if isNight then I1 = 18.0 else true
}
rule arePeoplePresent {
  sensors { I1 = "000-000-002"; }
  I1 > 0
}
rule referenceValueChange {
  sensors { I1 = "000-000-003"; }
  (I1 >= referenceValue - 3) or (I1 <= referenceValue + 3)
}
"#;

    #[test]
    fn example_rules_resolve() {
        let resolved = resolve(EXAMPLE_RULES).unwrap();
        let ids = resolved.spec.required_sensor_ids();
        let expect: BTreeSet<String> = ["000-000-001", "000-000-002", "000-000-003"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(ids, expect);
    }

    #[test]
    fn constants_only_need_no_sensors() {
        let resolved = resolve("constant a = 1;\nconstant b = 2;").unwrap();
        assert!(resolved.spec.required_sensor_ids().is_empty());
    }

    #[test]
    fn satisfies_pulls_in_characteristic_sensors() {
        let text = r#"
characteristic curve { x = "x-1"; y = "y-1"; points { (0, 0) (1, 1) } margin 0.5; }
characteristic unused { x = "x-2"; y = "y-2"; points { (0, 0) (1, 1) } margin 0.5; }
rule r { satisfies(curve) }
"#;
        let resolved = resolve(text).unwrap();
        let ids = resolved.spec.required_sensor_ids();
        assert!(ids.contains("x-1") && ids.contains("y-1"));
        assert!(!ids.contains("x-2") && !ids.contains("y-2"));
    }

    #[test]
    fn undefined_reference_is_an_error() {
        let err = resolve("rule r { missing }").unwrap_err();
        assert!(err
            .iter()
            .any(|d| d.message.contains("undefined reference `missing`")));
    }

    #[test]
    fn two_cycle_reports_path() {
        let err = resolve("rule a { b }\nrule b { a }").unwrap_err();
        assert!(
            err.iter().any(|d| d.message.contains("a -> b -> a")
                || d.message.contains("b -> a -> b")),
            "got: {err}"
        );
    }

    #[test]
    fn self_cycle_reports_path() {
        let err = resolve("rule a { a and true }").unwrap_err();
        assert!(err.iter().any(|d| d.message.contains("a -> a")));
    }

    #[test]
    fn rule_with_numeric_body_rejected() {
        let err = resolve("function someFunction { 1 + 1 }\nrule r { someFunction }").unwrap_err();
        assert!(err.iter().any(|d| d.message.contains("boolean required")));
    }

    #[test]
    fn function_with_boolean_body_rejected() {
        let err = resolve("function f { true }").unwrap_err();
        assert!(err.iter().any(|d| d.message.contains("numeric required")));
    }

    #[test]
    fn operand_type_mismatches_rejected() {
        assert!(resolve("rule r { 1 and true }").is_err());
        assert!(resolve("rule r { true > 1 }").is_err());
        assert!(resolve("rule r { if 1 then true else false }").is_err());
        assert!(resolve("rule r { if true then true else 1 }").is_err());
        assert!(resolve("function f { abs(true) }").is_err());
    }

    #[test]
    fn statespace_needs_rules_not_functions() {
        let text = r#"
function f { 1 }
statespace S {
  state A { rules { f; } }
}
"#;
        let err = resolve(text).unwrap_err();
        assert!(err
            .iter()
            .any(|d| d.message.contains("requires a rule here, but `f` is a function")));
    }

    #[test]
    fn empty_state_warns() {
        let resolved = resolve("statespace S { state A { } }").unwrap();
        assert!(resolved
            .warnings
            .iter()
            .any(|w| w.message.contains("declares no rules")));
    }

    #[test]
    fn sensor_shadowing_warns() {
        let text = r#"
constant I1 = 5;
rule r {
  sensors { I1 = "000-000-001"; }
  I1 > 0
}
"#;
        let resolved = resolve(text).unwrap();
        assert!(resolved
            .warnings
            .iter()
            .any(|w| w.message.contains("shadows the element")));
    }

    #[test]
    fn characteristic_direct_reference_rejected() {
        let text = r#"
characteristic curve { x = "a"; y = "b"; points { (0, 0) (1, 1) } margin 0.5; }
rule r { curve }
"#;
        let err = resolve(text).unwrap_err();
        assert!(err.iter().any(|d| d.message.contains("satisfies(curve)")));
    }
}
