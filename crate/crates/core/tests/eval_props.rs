//! Property tests for the expression evaluator against an independent
//! brute-force oracle, plus exhaustive checks of the three-valued logic.

use std::collections::HashMap;

use proptest::prelude::*;

use bmspec_core::diag::Loc;
use bmspec_core::eval::{eval_expr, EvalContext, TriState, Value, DEFAULT_EQ_EPS};
use bmspec_core::spec::ast::{BinOp, Expr, SensorBinding};
use bmspec_core::spec::{parse_spec, resolve_spec, Resolved};
use bmspec_core::timeseries::{Grid, TimeSeries};

const SENSORS: [&str; 3] = ["I1", "I2", "I3"];

// ---- independent oracle ---------------------------------------------------
//
// A deliberately separate tree walker over plain Options, written from the
// truth tables rather than shared combinators.

#[derive(Debug, Clone, Copy, PartialEq)]
enum OracleVal {
    B(Option<bool>),
    N(Option<f64>),
}

fn oracle_eval(expr: &Expr, env: &[Option<f64>; 3]) -> OracleVal {
    use OracleVal::{B, N};
    match expr {
        Expr::Bool(b, _) => B(Some(*b)),
        Expr::Num(n, _) => N(Some(*n)),
        Expr::Ref(name, _) => {
            let idx = SENSORS.iter().position(|s| s == name).expect("sensor ref");
            N(env[idx])
        }
        Expr::Satisfies(..) => unreachable!("generator emits no characteristics"),
        Expr::Not(inner, _) => {
            let B(v) = oracle_eval(inner, env) else { unreachable!() };
            B(match v {
                Some(true) => Some(false),
                Some(false) => Some(true),
                None => None,
            })
        }
        Expr::Neg(inner, _) => {
            let N(v) = oracle_eval(inner, env) else { unreachable!() };
            N(v.map(|x| -x).filter(|x| x.is_finite()))
        }
        Expr::Abs(inner, _) => {
            let N(v) = oracle_eval(inner, env) else { unreachable!() };
            N(v.map(f64::abs).filter(|x| x.is_finite()))
        }
        Expr::Binary { op, lhs, rhs, .. } => match op {
            BinOp::And => {
                let (B(l), B(r)) = (oracle_eval(lhs, env), oracle_eval(rhs, env)) else {
                    unreachable!()
                };
                B(if l == Some(false) || r == Some(false) {
                    Some(false)
                } else if l == Some(true) && r == Some(true) {
                    Some(true)
                } else {
                    None
                })
            }
            BinOp::Or => {
                let (B(l), B(r)) = (oracle_eval(lhs, env), oracle_eval(rhs, env)) else {
                    unreachable!()
                };
                B(if l == Some(true) || r == Some(true) {
                    Some(true)
                } else if l == Some(false) && r == Some(false) {
                    Some(false)
                } else {
                    None
                })
            }
            BinOp::Implies => {
                let (B(l), B(r)) = (oracle_eval(lhs, env), oracle_eval(rhs, env)) else {
                    unreachable!()
                };
                B(if l == Some(false) || r == Some(true) {
                    Some(true)
                } else if l == Some(true) && r == Some(false) {
                    Some(false)
                } else {
                    None
                })
            }
            BinOp::Eq | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => {
                let (N(l), N(r)) = (oracle_eval(lhs, env), oracle_eval(rhs, env)) else {
                    unreachable!()
                };
                match (l, r) {
                    (Some(l), Some(r)) => B(Some(match op {
                        BinOp::Eq => (l - r).abs() <= DEFAULT_EQ_EPS,
                        BinOp::Ge => l > r || (l - r).abs() <= DEFAULT_EQ_EPS,
                        BinOp::Le => l < r || (l - r).abs() <= DEFAULT_EQ_EPS,
                        BinOp::Gt => l > r,
                        BinOp::Lt => l < r,
                        _ => unreachable!(),
                    })),
                    _ => B(None),
                }
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                let (N(l), N(r)) = (oracle_eval(lhs, env), oracle_eval(rhs, env)) else {
                    unreachable!()
                };
                match (l, r) {
                    (Some(l), Some(r)) => {
                        let out = match op {
                            BinOp::Add => Some(l + r),
                            BinOp::Sub => Some(l - r),
                            BinOp::Mul => Some(l * r),
                            BinOp::Div => {
                                if r == 0.0 {
                                    None
                                } else {
                                    Some(l / r)
                                }
                            }
                            _ => unreachable!(),
                        };
                        N(out.filter(|x| x.is_finite()))
                    }
                    _ => N(None),
                }
            }
        },
        Expr::If { cond, then, els, .. } => {
            let B(c) = oracle_eval(cond, env) else { unreachable!() };
            match c {
                Some(true) => oracle_eval(then, env),
                Some(false) => oracle_eval(els, env),
                None => match oracle_eval(then, env) {
                    B(_) => B(None),
                    N(_) => N(None),
                },
            }
        }
    }
}

// ---- expression generator --------------------------------------------------

fn num_leaf() -> BoxedStrategy<Expr> {
    prop_oneof![
        (0u32..100).prop_map(|n| Expr::Num(f64::from(n), Loc::default())),
        (0usize..3).prop_map(|i| Expr::Ref(SENSORS[i].to_string(), Loc::default())),
    ]
    .boxed()
}

fn num_expr(depth: u32) -> BoxedStrategy<Expr> {
    if depth == 0 {
        return num_leaf();
    }
    prop_oneof![
        3 => num_leaf(),
        1 => num_expr(depth - 1).prop_map(|e| Expr::Neg(Box::new(e), Loc::default())),
        1 => num_expr(depth - 1).prop_map(|e| Expr::Abs(Box::new(e), Loc::default())),
        3 => (
            prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div)
            ],
            num_expr(depth - 1),
            num_expr(depth - 1)
        )
            .prop_map(|(op, lhs, rhs)| Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc: Loc::default(),
            }),
        1 => (bool_expr(depth - 1), num_expr(depth - 1), num_expr(depth - 1)).prop_map(
            |(cond, then, els)| Expr::If {
                cond: Box::new(cond),
                then: Box::new(then),
                els: Box::new(els),
                loc: Loc::default(),
            }
        ),
    ]
    .boxed()
}

fn bool_expr(depth: u32) -> BoxedStrategy<Expr> {
    if depth == 0 {
        return any::<bool>()
            .prop_map(|b| Expr::Bool(b, Loc::default()))
            .boxed();
    }
    prop_oneof![
        1 => any::<bool>().prop_map(|b| Expr::Bool(b, Loc::default())),
        3 => (
            prop_oneof![
                Just(BinOp::Eq),
                Just(BinOp::Lt),
                Just(BinOp::Gt),
                Just(BinOp::Le),
                Just(BinOp::Ge)
            ],
            num_expr(depth - 1),
            num_expr(depth - 1)
        )
            .prop_map(|(op, lhs, rhs)| Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc: Loc::default(),
            }),
        2 => (
            prop_oneof![Just(BinOp::And), Just(BinOp::Or), Just(BinOp::Implies)],
            bool_expr(depth - 1),
            bool_expr(depth - 1)
        )
            .prop_map(|(op, lhs, rhs)| Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc: Loc::default(),
            }),
        1 => bool_expr(depth - 1).prop_map(|e| Expr::Not(Box::new(e), Loc::default())),
        1 => (bool_expr(depth - 1), bool_expr(depth - 1), bool_expr(depth - 1)).prop_map(
            |(cond, then, els)| Expr::If {
                cond: Box::new(cond),
                then: Box::new(then),
                els: Box::new(els),
                loc: Loc::default(),
            }
        ),
    ]
    .boxed()
}

fn sensor_value() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![
        2 => (-50i32..=50).prop_map(|v| Some(f64::from(v))),
        1 => Just(None),
    ]
}

// ---- production-side harness ------------------------------------------------

/// One-cell context over the three test sensors.
struct Harness {
    resolved: Resolved,
    dataset: HashMap<String, TimeSeries>,
    grid: Grid,
}

impl Harness {
    fn new(env: &[Option<f64>; 3]) -> Harness {
        let resolved = resolve_spec(
            parse_spec(
                r#"rule host { sensors { I1 = "I1"; I2 = "I2"; I3 = "I3"; } true }"#,
            )
            .unwrap()
            .doc,
        )
        .unwrap();
        let start: chrono::DateTime<chrono::Utc> = "2011-01-10T00:00:00Z".parse().unwrap();
        let grid = Grid::new(start, start + chrono::Duration::seconds(900), 900).unwrap();
        let mut dataset = HashMap::new();
        for (i, sensor) in SENSORS.iter().enumerate() {
            dataset.insert(
                sensor.to_string(),
                TimeSeries::new(*sensor, grid, vec![env[i]]),
            );
        }
        Harness {
            resolved,
            dataset,
            grid,
        }
    }

    fn bindings(&self) -> Vec<SensorBinding> {
        self.resolved.spec.rule("host").unwrap().sensors.clone()
    }

    fn eval(&self, expr: &Expr) -> Value {
        let ctx = EvalContext::new(&self.resolved.spec, &self.dataset, self.grid).unwrap();
        eval_expr(expr, &ctx, &self.bindings(), 0).unwrap()
    }
}

fn agree(production: Value, oracle: OracleVal) -> bool {
    match (production, oracle) {
        (Value::Bool(t), OracleVal::B(b)) => t.to_bool() == b,
        (Value::Num(v), OracleVal::N(Some(o))) => v == o,
        (Value::NumNoData, OracleVal::N(None)) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn evaluator_matches_brute_force_oracle(
        expr in bool_expr(6),
        env in [sensor_value(), sensor_value(), sensor_value()],
    ) {
        let harness = Harness::new(&env);
        prop_assert!(
            agree(harness.eval(&expr), oracle_eval(&expr, &env)),
            "expr: {expr:?} env: {env:?}"
        );
    }

    #[test]
    fn numeric_evaluator_matches_oracle(
        expr in num_expr(6),
        env in [sensor_value(), sensor_value(), sensor_value()],
    ) {
        let harness = Harness::new(&env);
        prop_assert!(
            agree(harness.eval(&expr), oracle_eval(&expr, &env)),
            "expr: {expr:?} env: {env:?}"
        );
    }

    /// Filling in a missing sensor value may decide a no-data cell but never
    /// flips a decided one.
    #[test]
    fn information_is_monotone(
        expr in bool_expr(5),
        base in (-50i32..=50).prop_map(f64::from),
        fills in proptest::collection::vec(-50i32..=50, 5),
    ) {
        let holed = [Some(base), None, Some(-base)];
        let unknown_result = Harness::new(&holed).eval(&expr);
        let Value::Bool(before) = unknown_result else { panic!("bool expr") };
        for fill in fills {
            let filled = [Some(base), Some(f64::from(fill)), Some(-base)];
            let Value::Bool(after) = Harness::new(&filled).eval(&expr) else {
                panic!("bool expr")
            };
            match before {
                TriState::Satisfied | TriState::Violated => prop_assert_eq!(
                    before, after,
                    "decided result changed when I2 was filled with {}", fill
                ),
                TriState::NoData => {} // any refinement is fine
            }
        }
    }
}

// ---- exhaustive three-valued laws -------------------------------------------

#[test]
fn kleene_connectives_by_enumeration() {
    use TriState::*;
    let table = TriState::ALL;
    // binary tables pinned case by case
    let and_expect = |a: TriState, b: TriState| match (a, b) {
        (Violated, _) | (_, Violated) => Violated,
        (Satisfied, Satisfied) => Satisfied,
        _ => NoData,
    };
    let or_expect = |a: TriState, b: TriState| match (a, b) {
        (Satisfied, _) | (_, Satisfied) => Satisfied,
        (Violated, Violated) => Violated,
        _ => NoData,
    };
    for a in table {
        for b in table {
            assert_eq!(a.and(b), and_expect(a, b), "and({a}, {b})");
            assert_eq!(a.or(b), or_expect(a, b), "or({a}, {b})");
            assert_eq!(a.implies(b), a.not().or(b), "implies({a}, {b})");
        }
    }
}

#[test]
fn kleene_laws_hold() {
    let table = TriState::ALL;
    for a in table {
        assert_eq!(a.not().not(), a, "double negation");
        for b in table {
            assert_eq!(a.and(b), b.and(a), "and commutes");
            assert_eq!(a.or(b), b.or(a), "or commutes");
            // De Morgan
            assert_eq!(a.and(b).not(), a.not().or(b.not()));
            assert_eq!(a.or(b).not(), a.not().and(b.not()));
            for c in table {
                assert_eq!(a.and(b.and(c)), a.and(b).and(c), "and associates");
                assert_eq!(a.or(b.or(c)), a.or(b).or(c), "or associates");
            }
        }
    }
}
