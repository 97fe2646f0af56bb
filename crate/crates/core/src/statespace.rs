//! State and state-space evaluation, integrating-rule inference, marker
//! reconciliation and transition diagnostics.
//!
//! A state is satisfied at a timestamp iff the conjunction of its rules is;
//! the space verdict additionally requires the space-level rules. In
//! exclusive mode exactly one state may be satisfied with all others
//! violated; permissive mode asks for at least one. Cells whose verdict
//! hinges on a no-data state stay no-data, so monitoring gaps never read as
//! compliance or violation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::diag::Loc;
use crate::eval::{EvalContext, EvalError, Evaluator, SeriesValue, TriState, TriStateSeries};
use crate::spec::ast::{BinOp, Expr, RuleDef, SpaceMode, StateDef, StateSpaceDef};
use crate::timeseries::MarkerSeries;

/// One state's per-cell satisfaction.
#[derive(Debug, Clone, PartialEq)]
pub struct StateResult {
    pub state_id: String,
    pub series: TriStateSeries,
}

/// The set of satisfied states in one cell, when it is decidable.
#[derive(Debug, Clone, PartialEq)]
pub enum ActiveStates {
    Known(Vec<String>),
    NoData,
}

impl ActiveStates {
    pub fn as_known(&self) -> Option<&[String]> {
        match self {
            ActiveStates::Known(v) => Some(v),
            ActiveStates::NoData => None,
        }
    }
}

/// Full evaluation of one state space over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceResult {
    pub statespace: String,
    pub mode: SpaceMode,
    pub per_state: Vec<StateResult>,
    /// Conjunction of the space-level rules (satisfied when none declared).
    pub space_rules: TriStateSeries,
    /// Space verdict per cell.
    pub verdict: TriStateSeries,
    /// Satisfied-state sets per cell.
    pub active: Vec<ActiveStates>,
    /// Markers observed for this space, when a marker log was supplied.
    pub observed_markers: Option<MarkerSeries>,
}

/// One discrepancy between the satisfied states and the logged marker.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerMismatch {
    pub cell_index: usize,
    /// States satisfied per the spec at that cell.
    pub expected_states: Vec<String>,
    pub observed_marker: Option<String>,
}

/// Outcome of comparing a marker log against evaluated states.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarkerReconciliation {
    pub mismatches: Vec<MarkerMismatch>,
    /// Cells where the comparison was decidable.
    pub examined: usize,
    /// Cells skipped because the marker was missing or the active set no-data.
    pub skipped: usize,
    /// States that declare no marker and therefore never take part.
    pub unmapped_states: Vec<String>,
}

/// One observed marker change, aggregated over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionDiagnostic {
    pub from_marker: String,
    pub to_marker: String,
    pub count: u64,
    /// Whether the change matches a declared undirected transition.
    pub declared: bool,
}

/// Builds the integrating rule `is<StateId>`: the conjunction of the state's
/// rules. A state without rules yields the literal `true`.
pub fn infer_state_rule(state: &StateDef) -> RuleDef {
    let loc = Loc::default();
    let body = state
        .rule_refs
        .iter()
        .map(|r| Expr::Ref(r.name.clone(), loc))
        .reduce(|lhs, rhs| Expr::Binary {
            op: BinOp::And,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            loc,
        })
        .unwrap_or(Expr::Bool(true, loc));
    RuleDef {
        name: format!("is{}", state.id),
        sensors: Vec::new(),
        body,
        loc: state.loc,
    }
}

/// Builds the integrating rule `is<SpaceName>Satisfied`: the disjunction of
/// all inferred state rules. This is the permissive reading; the exclusive
/// verdict comes from [`eval_statespace`].
pub fn infer_space_rule(ss: &StateSpaceDef) -> RuleDef {
    let loc = Loc::default();
    let body = ss
        .states
        .iter()
        .map(|s| Expr::Ref(format!("is{}", s.id), loc))
        .reduce(|lhs, rhs| Expr::Binary {
            op: BinOp::Or,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            loc,
        })
        .expect("state spaces declare at least one state");
    RuleDef {
        name: format!("is{}Satisfied", ss.name),
        sensors: Vec::new(),
        body,
        loc: ss.loc,
    }
}

/// Combination of the per-state values for one cell under `mode`, before
/// space rules are applied.
fn combine_states(mode: SpaceMode, states: &[TriState]) -> TriState {
    match mode {
        SpaceMode::Permissive => states
            .iter()
            .copied()
            .fold(TriState::Violated, TriState::or),
        SpaceMode::Exclusive => {
            let satisfied = states.iter().filter(|t| t.is_satisfied()).count();
            let no_data = states.iter().filter(|t| t.is_no_data()).count();
            if satisfied >= 2 {
                TriState::Violated
            } else if no_data > 0 {
                TriState::NoData
            } else if satisfied == 1 {
                TriState::Satisfied
            } else {
                // every state violated: the facility is in an undefined state
                TriState::Violated
            }
        }
    }
}

/// Evaluates a state space cell by cell.
///
/// Per cell, the verdict is the Kleene conjunction of the mode combination
/// over the states and the space-level rules. The active set is the set of
/// satisfied states; it degrades to no-data exactly when a no-data state
/// leaves the verdict undecided (i.e. the combination is no-data and the
/// space rules are not already violated).
pub fn eval_statespace(
    ss: &StateSpaceDef,
    ctx: &EvalContext,
) -> Result<StateSpaceResult, EvalError> {
    let grid = ctx.grid();
    let mut evaluator = Evaluator::new(ctx);

    let mut per_state = Vec::with_capacity(ss.states.len());
    for state in &ss.states {
        let inferred = infer_state_rule(state);
        let series = match evaluator.body_series(&inferred.name, &[], &inferred.body)? {
            SeriesValue::Tri(t) => t,
            SeriesValue::Num(_) => unreachable!("state rules are boolean by resolution"),
        };
        per_state.push(StateResult {
            state_id: state.id.clone(),
            series,
        });
    }

    let mut space_rules = TriStateSeries::uniform(
        format!("{}.rules", ss.name),
        grid,
        TriState::Satisfied,
    );
    for rule in &ss.space_rules {
        let series = evaluator.element_series(&rule.name)?;
        let tri = series
            .as_tri()
            .expect("space rules are boolean by resolution");
        let cells = space_rules
            .cells()
            .iter()
            .zip(tri.cells())
            .map(|(a, b)| a.and(*b))
            .collect();
        space_rules = TriStateSeries::new(format!("{}.rules", ss.name), grid, cells);
    }

    let n = grid.cell_count();
    let mut verdict_cells = Vec::with_capacity(n);
    let mut active = Vec::with_capacity(n);
    let mut state_buf = Vec::with_capacity(per_state.len());
    for cell in 0..n {
        state_buf.clear();
        state_buf.extend(per_state.iter().map(|s| s.series.get(cell)));
        let combination = combine_states(ss.mode, &state_buf);
        let gate = space_rules.get(cell);
        verdict_cells.push(combination.and(gate));
        if combination.is_no_data() && !gate.is_violated() {
            active.push(ActiveStates::NoData);
        } else {
            let satisfied = per_state
                .iter()
                .zip(&state_buf)
                .filter(|(_, t)| t.is_satisfied())
                .map(|(s, _)| s.state_id.clone())
                .collect();
            active.push(ActiveStates::Known(satisfied));
        }
    }

    Ok(StateSpaceResult {
        statespace: ss.name.clone(),
        mode: ss.mode,
        per_state,
        space_rules,
        verdict: TriStateSeries::new(ss.name.clone(), grid, verdict_cells),
        active,
        observed_markers: None,
    })
}

/// Compares evaluated states against the logged markers.
///
/// Cells with a missing marker or a no-data active set are skipped. A
/// mismatch is recorded when the observed marker's state is not in the
/// active set, or when the marker maps to no declared state while some state
/// is active.
pub fn reconcile_markers(
    result: &StateSpaceResult,
    markers: &MarkerSeries,
    marker_map: &HashMap<String, String>,
) -> MarkerReconciliation {
    let mut marker_states: HashMap<&str, Vec<&str>> = HashMap::new();
    for (state, marker) in marker_map {
        marker_states
            .entry(marker.as_str())
            .or_default()
            .push(state.as_str());
    }

    let mut unmapped_states: Vec<String> = result
        .per_state
        .iter()
        .map(|s| s.state_id.clone())
        .filter(|id| !marker_map.contains_key(id))
        .collect();
    unmapped_states.sort();

    let mut out = MarkerReconciliation {
        unmapped_states,
        ..Default::default()
    };

    for cell in 0..result.verdict.grid().cell_count() {
        let Some(observed) = markers.marker(cell) else {
            out.skipped += 1;
            continue;
        };
        let ActiveStates::Known(active) = &result.active[cell] else {
            out.skipped += 1;
            continue;
        };
        out.examined += 1;
        let mismatch = match marker_states.get(observed) {
            Some(states) => !states.iter().any(|s| active.iter().any(|a| a == s)),
            None => !active.is_empty(),
        };
        if mismatch {
            out.mismatches.push(MarkerMismatch {
                cell_index: cell,
                expected_states: active.clone(),
                observed_marker: Some(observed.to_string()),
            });
        }
    }

    out
}

/// Counts observed adjacent-cell marker changes and checks each change
/// against the declared undirected transitions. Consecutive equal markers
/// are not changes, and pairs spanning a missing cell are not counted.
pub fn transition_diagnostics(
    markers: &MarkerSeries,
    ss: &StateSpaceDef,
) -> Vec<TransitionDiagnostic> {
    let marker_state: HashMap<&str, &str> = ss
        .states
        .iter()
        .filter_map(|s| s.marker_value.as_deref().map(|m| (m, s.id.as_str())))
        .collect();
    let declared: BTreeSet<(&str, &str)> = ss
        .transitions
        .iter()
        .map(|t| normalize(t.from.as_str(), t.to.as_str()))
        .collect();

    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for pair in markers.cells().windows(2) {
        let (Some(a), Some(b)) = (&pair[0], &pair[1]) else {
            continue;
        };
        if a != b {
            *counts.entry((a.clone(), b.clone())).or_default() += 1;
        }
    }

    counts
        .into_iter()
        .map(|((from_marker, to_marker), count)| {
            let is_declared = match (
                marker_state.get(from_marker.as_str()),
                marker_state.get(to_marker.as_str()),
            ) {
                (Some(a), Some(b)) => declared.contains(&normalize(a, b)),
                _ => false,
            };
            TransitionDiagnostic {
                from_marker,
                to_marker,
                count,
                declared: is_declared,
            }
        })
        .collect()
}

fn normalize<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
