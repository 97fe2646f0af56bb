//! Three-valued evaluation results with Kleene connectives.

use std::fmt;

/// Evaluation result of a rule or state at one grid timestamp.
///
/// `NoData` marks a cell that cannot be decided, either because a sensor
/// value is missing or because a characteristic was queried outside its
/// defined domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriState {
    Satisfied,
    Violated,
    NoData,
}

impl TriState {
    pub const ALL: [TriState; 3] = [TriState::Satisfied, TriState::Violated, TriState::NoData];

    pub fn from_bool(b: bool) -> TriState {
        if b {
            TriState::Satisfied
        } else {
            TriState::Violated
        }
    }

    pub fn to_bool(self) -> Option<bool> {
        match self {
            TriState::Satisfied => Some(true),
            TriState::Violated => Some(false),
            TriState::NoData => None,
        }
    }

    pub fn is_satisfied(self) -> bool {
        self == TriState::Satisfied
    }

    pub fn is_violated(self) -> bool {
        self == TriState::Violated
    }

    pub fn is_no_data(self) -> bool {
        self == TriState::NoData
    }

    /// Kleene conjunction: one violated operand decides the result.
    pub fn and(self, rhs: TriState) -> TriState {
        match (self, rhs) {
            (TriState::Violated, _) | (_, TriState::Violated) => TriState::Violated,
            (TriState::Satisfied, TriState::Satisfied) => TriState::Satisfied,
            _ => TriState::NoData,
        }
    }

    /// Kleene disjunction: one satisfied operand decides the result.
    pub fn or(self, rhs: TriState) -> TriState {
        match (self, rhs) {
            (TriState::Satisfied, _) | (_, TriState::Satisfied) => TriState::Satisfied,
            (TriState::Violated, TriState::Violated) => TriState::Violated,
            _ => TriState::NoData,
        }
    }

    #[allow(clippy::should_implement_trait)] // `!x` is also provided below
    pub fn not(self) -> TriState {
        match self {
            TriState::Satisfied => TriState::Violated,
            TriState::Violated => TriState::Satisfied,
            TriState::NoData => TriState::NoData,
        }
    }

    /// Kleene implication: a violated antecedent satisfies the implication.
    pub fn implies(self, rhs: TriState) -> TriState {
        self.not().or(rhs)
    }

    pub fn label(self) -> &'static str {
        match self {
            TriState::Satisfied => "satisfied",
            TriState::Violated => "violated",
            TriState::NoData => "no-data",
        }
    }

    pub fn parse_label(s: &str) -> Option<TriState> {
        match s {
            "satisfied" => Some(TriState::Satisfied),
            "violated" => Some(TriState::Violated),
            "no-data" => Some(TriState::NoData),
            _ => None,
        }
    }
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::ops::Not for TriState {
    type Output = TriState;

    fn not(self) -> TriState {
        TriState::not(self)
    }
}

impl std::ops::BitAnd for TriState {
    type Output = TriState;

    fn bitand(self, rhs: TriState) -> TriState {
        self.and(rhs)
    }
}

impl std::ops::BitOr for TriState {
    type Output = TriState;

    fn bitor(self, rhs: TriState) -> TriState {
        self.or(rhs)
    }
}
