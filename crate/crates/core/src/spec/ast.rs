//! Abstract syntax tree for the specification language.
//!
//! All nodes carry a [`Loc`] for diagnostics; locations are excluded from
//! structural equality (see [`Loc`]).

use chrono::Weekday;

use crate::diag::Loc;

/// A parsed specification document: an ordered list of element definitions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecDocument {
    pub source_name: String,
    pub elements: Vec<ElementDef>,
}

impl SpecDocument {
    pub fn element(&self, name: &str) -> Option<&ElementDef> {
        self.elements.iter().find(|e| e.name() == name)
    }
}

/// Any top-level element. All element kinds share one flat namespace.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementDef {
    Rule(RuleDef),
    Function(FunctionDef),
    Constant(ConstantDef),
    TimeRoutine(TimeRoutineDef),
    Characteristic(CharacteristicDef),
    StateSpace(StateSpaceDef),
}

impl ElementDef {
    pub fn name(&self) -> &str {
        match self {
            ElementDef::Rule(d) => &d.name,
            ElementDef::Function(d) => &d.name,
            ElementDef::Constant(d) => &d.name,
            ElementDef::TimeRoutine(d) => &d.name,
            ElementDef::Characteristic(d) => &d.name,
            ElementDef::StateSpace(d) => &d.name,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ElementDef::Rule(_) => "rule",
            ElementDef::Function(_) => "function",
            ElementDef::Constant(_) => "constant",
            ElementDef::TimeRoutine(_) => "timeroutine",
            ElementDef::Characteristic(_) => "characteristic",
            ElementDef::StateSpace(_) => "statespace",
        }
    }

    pub fn loc(&self) -> Loc {
        match self {
            ElementDef::Rule(d) => d.loc,
            ElementDef::Function(d) => d.loc,
            ElementDef::Constant(d) => d.loc,
            ElementDef::TimeRoutine(d) => d.loc,
            ElementDef::Characteristic(d) => d.loc,
            ElementDef::StateSpace(d) => d.loc,
        }
    }
}

/// Binds a readable local identifier to a BMS sensor id, e.g. `I1 = "000-000-001"`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorBinding {
    pub local_id: String,
    pub bms_id: String,
    pub loc: Loc,
}

/// A rule: evaluates to a logical value per timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleDef {
    pub name: String,
    pub sensors: Vec<SensorBinding>,
    pub body: Expr,
    pub loc: Loc,
}

/// A function: evaluates to a numeric value per timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub sensors: Vec<SensorBinding>,
    pub body: Expr,
    pub loc: Loc,
}

/// A named, unit-free numeric value configured once and referenced elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantDef {
    pub name: String,
    pub value: f64,
    pub loc: Loc,
}

/// A calendar predicate built from daily windows.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeRoutineDef {
    pub name: String,
    pub clauses: Vec<DailyWindow>,
    pub loc: Loc,
}

/// One `daily HH:MM .. HH:MM [on days]` clause.
///
/// Start and end are minutes since local midnight; `start > end` is legal
/// and wraps past midnight. The end is exclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyWindow {
    pub start_min: u16,
    pub end_min: u16,
    pub days: Option<Vec<Weekday>>,
    pub loc: Loc,
}

/// A defining piecewise-linear curve between two sensors plus a symmetric
/// acceptance margin around it.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicDef {
    pub name: String,
    pub x_sensor: String,
    pub y_sensor: String,
    pub points: Vec<(f64, f64)>,
    pub margin: f64,
    pub loc: Loc,
}

/// How many states may be satisfied at once for the space to be satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpaceMode {
    /// Exactly one state must be satisfied.
    #[default]
    Exclusive,
    /// At least one state must be satisfied.
    Permissive,
}

impl SpaceMode {
    pub fn keyword(&self) -> &'static str {
        match self {
            SpaceMode::Exclusive => "exclusive",
            SpaceMode::Permissive => "permissive",
        }
    }
}

/// A by-name reference, e.g. a rule named inside a state.
#[derive(Debug, Clone, PartialEq)]
pub struct NameRef {
    pub name: String,
    pub loc: Loc,
}

/// Documentation-only `initial`/`final` prefix on a state declaration.
/// Accepted for round-tripping but never evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateAnnotation {
    Initial,
    Final,
}

/// One facility mode, defined by a conjunction of rules.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDef {
    pub id: String,
    pub marker_value: Option<String>,
    pub rule_refs: Vec<NameRef>,
    pub annotation: Option<StateAnnotation>,
    pub loc: Loc,
}

/// An undirected, documentation-only transition between two states.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionDef {
    pub from: String,
    pub to: String,
    pub note: Option<String>,
    pub loc: Loc,
}

/// A set of states plus undirected transitions, optionally gated by
/// space-level rules.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceDef {
    pub name: String,
    pub mode: SpaceMode,
    pub space_rules: Vec<NameRef>,
    pub states: Vec<StateDef>,
    pub transitions: Vec<TransitionDef>,
    pub loc: Loc,
}

impl StateSpaceDef {
    pub fn state(&self, id: &str) -> Option<&StateDef> {
        self.states.iter().find(|s| s.id == id)
    }
}

/// Binary operators, lowest precedence first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Implies,
    Or,
    And,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Implies => "implies",
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub fn is_comparison(&self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge)
    }

    pub fn is_logic(&self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Implies)
    }
}

/// Expression tree of rule and function bodies.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// `true` / `false`.
    Bool(bool, Loc),
    /// Non-negative numeric literal; negative values appear as [`Expr::Neg`].
    Num(f64, Loc),
    /// Reference to a sensor local id, constant, rule, function or time routine.
    Ref(String, Loc),
    /// `not e`.
    Not(Box<Expr>, Loc),
    /// `-e`.
    Neg(Box<Expr>, Loc),
    /// `abs(e)`.
    Abs(Box<Expr>, Loc),
    /// Built-in characteristic predicate `satisfies(name)`.
    Satisfies(String, Loc),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        loc: Loc,
    },
    If {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Box<Expr>,
        loc: Loc,
    },
}

impl Expr {
    pub fn loc(&self) -> Loc {
        match self {
            Expr::Bool(_, loc)
            | Expr::Num(_, loc)
            | Expr::Ref(_, loc)
            | Expr::Not(_, loc)
            | Expr::Neg(_, loc)
            | Expr::Abs(_, loc)
            | Expr::Satisfies(_, loc)
            | Expr::Binary { loc, .. }
            | Expr::If { loc, .. } => *loc,
        }
    }

    /// Calls `f` on this node and every descendant.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Bool(..) | Expr::Num(..) | Expr::Ref(..) | Expr::Satisfies(..) => {}
            Expr::Not(e, _) | Expr::Neg(e, _) | Expr::Abs(e, _) => e.walk(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::If { cond, then, els, .. } => {
                cond.walk(f);
                then.walk(f);
                els.walk(f);
            }
        }
    }
}
