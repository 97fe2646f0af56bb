//! Recursive-descent parser for the specification language.
//!
//! Grammar (informal):
//!
//! ```text
//! spec    := element*
//! element := "constant" ID "=" NUM ";"
//!          | "timeroutine" ID "{" ("daily" TIME ".." TIME ("on" DAYLIST)? ";")+ "}"
//!          | "characteristic" ID "{" "x" "=" STR ";" "y" "=" STR ";"
//!                "points" "{" ("(" NUM "," NUM ")")+ "}" "margin" NUM ";" "}"
//!          | ("rule"|"function") ID "{" ("sensors" "{" (ID "=" STR ";")+ "}")? expr "}"
//!          | "statespace" ID "{" ("mode" ("exclusive"|"permissive") ";")?
//!                ("rules" "{" (ID ";")+ "}")?
//!                (("initial"|"final")? "state" ID ("marker" STR)? "{" ("rules" "{" (ID ";")* "}")? "}")+
//!                ("transition" ID "--" ID (STR)? ";")* "}"
//! ```
//!
//! Operator precedence, lowest to highest: `if/then/else`, `implies`
//! (right-associative), `or`, `and`, `not`, comparisons (non-associative),
//! `+ -`, `* /`, unary `-`, primaries. Section keywords such as `sensors`,
//! `daily` or `state` are contextual identifiers, so they stay usable as
//! element names.

use std::collections::HashMap;

use chrono::Weekday;

use crate::diag::{Diagnostic, Diagnostics, Loc};
use crate::spec::ast::*;
use crate::spec::lexer::{lex, Tok, Token};

/// Successful parse: the document plus any non-fatal warnings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub doc: SpecDocument,
    pub warnings: Diagnostics,
}

/// Parses spec text into a [`SpecDocument`].
///
/// On failure returns at least one error diagnostic; the parser resynchronizes
/// at element boundaries so several errors can be reported in one pass.
pub fn parse_spec(text: &str) -> Result<Parsed, Diagnostics> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        expr_depth: 0,
        errors: Diagnostics::new(),
        warnings: Diagnostics::new(),
    };
    let doc = p.parse_document();
    if p.errors.has_errors() {
        Err(p.errors)
    } else {
        Ok(Parsed {
            doc,
            warnings: p.warnings,
        })
    }
}

/// Deep enough for any hand-written rule, shallow enough that recursive
/// descent cannot exhaust the stack on adversarial input.
const MAX_EXPR_DEPTH: u32 = 200;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    expr_depth: u32,
    errors: Diagnostics,
    warnings: Diagnostics,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        let i = (self.pos + 1).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn loc(&self) -> Loc {
        self.tokens[self.pos].loc
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(Diagnostic::error(
                format!("expected {}, found {}", tok, self.peek()),
                self.loc(),
            ))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Loc)> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok((name, loc))
            }
            other => Err(Diagnostic::error(
                format!("expected {what}, found {other}"),
                loc,
            )),
        }
    }

    fn expect_string(&mut self, what: &str) -> PResult<(String, Loc)> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok((s, loc))
            }
            other => Err(Diagnostic::error(
                format!("expected {what}, found {other}"),
                loc,
            )),
        }
    }

    /// Number with optional leading minus, for constants and curve points.
    fn expect_signed_num(&mut self, what: &str) -> PResult<f64> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let loc = self.loc();
        match *self.peek() {
            Tok::Num(n) => {
                self.bump();
                Ok(if negative { -n } else { n })
            }
            ref other => Err(Diagnostic::error(
                format!("expected {what}, found {other}"),
                loc,
            )),
        }
    }

    /// True when the current token is the contextual keyword `word`.
    fn at_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.at_word(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<Loc> {
        let loc = self.loc();
        if self.eat_word(word) {
            Ok(loc)
        } else {
            Err(Diagnostic::error(
                format!("expected `{word}`, found {}", self.peek()),
                loc,
            ))
        }
    }

    // ---- document ------------------------------------------------------

    fn parse_document(&mut self) -> SpecDocument {
        let mut elements = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::KwConstant
                | Tok::KwTimeroutine
                | Tok::KwCharacteristic
                | Tok::KwRule
                | Tok::KwFunction
                | Tok::KwStatespace => match self.parse_element() {
                    Ok(el) => elements.push(el),
                    Err(d) => {
                        self.errors.push(d);
                        self.synchronize();
                    }
                },
                other => {
                    self.errors.error(
                        format!("expected an element declaration, found {other}"),
                        self.loc(),
                    );
                    self.bump();
                    self.synchronize();
                }
            }
        }
        self.check_duplicate_names(&elements);
        SpecDocument {
            source_name: "<spec>".to_string(),
            elements,
        }
    }

    /// Skips ahead to the next element-start keyword after a parse error.
    fn synchronize(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof
                | Tok::KwConstant
                | Tok::KwTimeroutine
                | Tok::KwCharacteristic
                | Tok::KwRule
                | Tok::KwFunction
                | Tok::KwStatespace => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn check_duplicate_names(&mut self, elements: &[ElementDef]) {
        let mut seen: HashMap<&str, Loc> = HashMap::new();
        for el in elements {
            if let Some(first) = seen.get(el.name()) {
                self.errors.error(
                    format!(
                        "duplicate element name `{}` (first defined at {first})",
                        el.name()
                    ),
                    el.loc(),
                );
            } else {
                seen.insert(el.name(), el.loc());
            }
        }
    }

    fn parse_element(&mut self) -> PResult<ElementDef> {
        self.expr_depth = 0;
        match self.peek() {
            Tok::KwConstant => self.parse_constant().map(ElementDef::Constant),
            Tok::KwTimeroutine => self.parse_timeroutine().map(ElementDef::TimeRoutine),
            Tok::KwCharacteristic => self.parse_characteristic().map(ElementDef::Characteristic),
            Tok::KwRule => self.parse_rule_or_function(true),
            Tok::KwFunction => self.parse_rule_or_function(false),
            Tok::KwStatespace => self.parse_statespace().map(ElementDef::StateSpace),
            _ => unreachable!("caller checked for element keyword"),
        }
    }

    // ---- simple elements -------------------------------------------------

    fn parse_constant(&mut self) -> PResult<ConstantDef> {
        let loc = self.bump().loc;
        let (name, _) = self.expect_ident("constant name")?;
        self.expect(Tok::Eq)?;
        let value = self.expect_signed_num("constant value")?;
        self.expect(Tok::Semi)?;
        Ok(ConstantDef { name, value, loc })
    }

    fn parse_timeroutine(&mut self) -> PResult<TimeRoutineDef> {
        let loc = self.bump().loc;
        let (name, _) = self.expect_ident("time routine name")?;
        self.expect(Tok::LBrace)?;
        let mut clauses = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            clauses.push(self.parse_daily_window()?);
        }
        if clauses.is_empty() {
            return Err(Diagnostic::error(
                "time routine needs at least one `daily` clause",
                self.loc(),
            ));
        }
        self.expect(Tok::RBrace)?;
        Ok(TimeRoutineDef { name, clauses, loc })
    }

    fn parse_daily_window(&mut self) -> PResult<DailyWindow> {
        let loc = self.expect_word("daily")?;
        let start_min = self.parse_time_of_day()?;
        if start_min == 24 * 60 {
            return Err(Diagnostic::error(
                "24:00 can only be used as a window end",
                loc,
            ));
        }
        self.expect(Tok::DotDot)?;
        let end_min = self.parse_time_of_day()?;
        let days = if self.at_word("on") {
            self.bump();
            let mut days = Vec::new();
            loop {
                let (word, dloc) = self.expect_ident("day name")?;
                days.push(parse_day(&word, dloc)?);
                if !matches!(self.peek(), Tok::Comma) {
                    break;
                }
                self.bump();
            }
            Some(days)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        if start_min == end_min {
            self.warnings.warning(
                "window start equals end; the window never matches",
                loc,
            );
        }
        Ok(DailyWindow {
            start_min,
            end_min,
            days,
            loc,
        })
    }

    /// `HH:MM`, 24-hour clock. `24:00` is allowed as an end-of-day bound.
    fn parse_time_of_day(&mut self) -> PResult<u16> {
        let loc = self.loc();
        let hour = match *self.peek() {
            Tok::Num(n) => {
                self.bump();
                n
            }
            ref other => {
                return Err(Diagnostic::error(
                    format!("expected time of day `HH:MM`, found {other}"),
                    loc,
                ))
            }
        };
        self.expect(Tok::Colon)?;
        let mloc = self.loc();
        let minute = match *self.peek() {
            Tok::Num(n) => {
                self.bump();
                n
            }
            ref other => {
                return Err(Diagnostic::error(
                    format!("expected minutes, found {other}"),
                    mloc,
                ))
            }
        };
        if hour.fract() != 0.0 || minute.fract() != 0.0 {
            return Err(Diagnostic::error("time of day must use whole numbers", loc));
        }
        let (hour, minute) = (hour as i64, minute as i64);
        let valid = (0..=23).contains(&hour) && (0..=59).contains(&minute)
            || (hour == 24 && minute == 0);
        if !valid {
            return Err(Diagnostic::error(
                format!("invalid time of day `{hour:02}:{minute:02}`"),
                loc,
            ));
        }
        Ok((hour * 60 + minute) as u16)
    }

    fn parse_characteristic(&mut self) -> PResult<CharacteristicDef> {
        let loc = self.bump().loc;
        let (name, _) = self.expect_ident("characteristic name")?;
        self.expect(Tok::LBrace)?;
        self.expect_word("x")?;
        self.expect(Tok::Eq)?;
        let (x_sensor, _) = self.expect_string("sensor id string")?;
        self.expect(Tok::Semi)?;
        self.expect_word("y")?;
        self.expect(Tok::Eq)?;
        let (y_sensor, _) = self.expect_string("sensor id string")?;
        self.expect(Tok::Semi)?;
        let points_loc = self.expect_word("points")?;
        self.expect(Tok::LBrace)?;
        let mut points = Vec::new();
        while *self.peek() == Tok::LParen {
            self.bump();
            let x = self.expect_signed_num("x coordinate")?;
            self.expect(Tok::Comma)?;
            let y = self.expect_signed_num("y coordinate")?;
            self.expect(Tok::RParen)?;
            points.push((x, y));
        }
        self.expect(Tok::RBrace)?;
        if points.len() < 2 {
            return Err(Diagnostic::error(
                "characteristic needs at least two points",
                points_loc,
            ));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Diagnostic::error(
                "characteristic x values must be strictly increasing",
                points_loc,
            ));
        }
        let margin_loc = self.expect_word("margin")?;
        let margin = self.expect_signed_num("margin value")?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::RBrace)?;
        if margin < 0.0 {
            return Err(Diagnostic::error("margin must be non-negative", margin_loc));
        }
        Ok(CharacteristicDef {
            name,
            x_sensor,
            y_sensor,
            points,
            margin,
            loc,
        })
    }

    // ---- rules and functions ---------------------------------------------

    fn parse_rule_or_function(&mut self, is_rule: bool) -> PResult<ElementDef> {
        let loc = self.bump().loc;
        let (name, _) = self.expect_ident(if is_rule { "rule name" } else { "function name" })?;
        self.expect(Tok::LBrace)?;

        let mut sensors = Vec::new();
        // `sensors` is contextual: only a section header when followed by `{`.
        if self.at_word("sensors") && *self.peek2() == Tok::LBrace {
            self.bump();
            self.bump();
            let mut seen: HashMap<String, Loc> = HashMap::new();
            loop {
                let (local_id, bloc) = self.expect_ident("sensor local id")?;
                self.expect(Tok::Eq)?;
                let (bms_id, _) = self.expect_string("BMS sensor id string")?;
                self.expect(Tok::Semi)?;
                if let Some(first) = seen.get(&local_id) {
                    return Err(Diagnostic::error(
                        format!("duplicate sensor local id `{local_id}` (first bound at {first})"),
                        bloc,
                    ));
                }
                seen.insert(local_id.clone(), bloc);
                sensors.push(SensorBinding {
                    local_id,
                    bms_id,
                    loc: bloc,
                });
                if *self.peek() == Tok::RBrace {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
        }

        let body = self.parse_expr()?;
        self.expect(Tok::RBrace)?;
        Ok(if is_rule {
            ElementDef::Rule(RuleDef {
                name,
                sensors,
                body,
                loc,
            })
        } else {
            ElementDef::Function(FunctionDef {
                name,
                sensors,
                body,
                loc,
            })
        })
    }

    // ---- state spaces ------------------------------------------------------

    fn parse_statespace(&mut self) -> PResult<StateSpaceDef> {
        let loc = self.bump().loc;
        let (name, _) = self.expect_ident("state space name")?;
        self.expect(Tok::LBrace)?;

        let mut mode = SpaceMode::Exclusive;
        if self.at_word("mode") {
            self.bump();
            let (word, mloc) = self.expect_ident("`exclusive` or `permissive`")?;
            mode = match word.as_str() {
                "exclusive" => SpaceMode::Exclusive,
                "permissive" => SpaceMode::Permissive,
                other => {
                    return Err(Diagnostic::error(
                        format!("unknown mode `{other}`; expected `exclusive` or `permissive`"),
                        mloc,
                    ))
                }
            };
            self.expect(Tok::Semi)?;
        }

        let mut space_rules = Vec::new();
        if self.at_word("rules") {
            self.bump();
            self.expect(Tok::LBrace)?;
            loop {
                let (rule, rloc) = self.expect_ident("rule name")?;
                self.expect(Tok::Semi)?;
                space_rules.push(NameRef {
                    name: rule,
                    loc: rloc,
                });
                if *self.peek() == Tok::RBrace {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
        }

        let mut states: Vec<StateDef> = Vec::new();
        while self.at_word("state") || self.at_word("initial") || self.at_word("final") {
            states.push(self.parse_state()?);
        }
        if states.is_empty() {
            return Err(Diagnostic::error(
                format!("state space `{name}` declares no states"),
                loc,
            ));
        }
        {
            let mut seen: HashMap<&str, Loc> = HashMap::new();
            for s in &states {
                if let Some(first) = seen.get(s.id.as_str()) {
                    return Err(Diagnostic::error(
                        format!("duplicate state id `{}` (first declared at {first})", s.id),
                        s.loc,
                    ));
                }
                seen.insert(&s.id, s.loc);
            }
        }

        let mut transitions: Vec<TransitionDef> = Vec::new();
        while self.at_word("transition") {
            let tloc = self.bump().loc;
            let (from, floc) = self.expect_ident("state id")?;
            self.expect(Tok::Minus)?;
            self.expect(Tok::Minus)?;
            let (to, toloc) = self.expect_ident("state id")?;
            let note = if let Tok::Str(s) = self.peek().clone() {
                self.bump();
                Some(s)
            } else {
                None
            };
            self.expect(Tok::Semi)?;
            for (id, idloc) in [(&from, floc), (&to, toloc)] {
                if !states.iter().any(|s| &s.id == id) {
                    return Err(Diagnostic::error(
                        format!("transition names undeclared state `{id}`"),
                        idloc,
                    ));
                }
            }
            let duplicate = transitions.iter().any(|t| {
                (t.from == from && t.to == to) || (t.from == to && t.to == from)
            });
            if duplicate {
                self.warnings.warning(
                    format!("duplicate transition between `{from}` and `{to}`"),
                    tloc,
                );
            }
            transitions.push(TransitionDef {
                from,
                to,
                note,
                loc: tloc,
            });
        }

        self.expect(Tok::RBrace)?;
        Ok(StateSpaceDef {
            name,
            mode,
            space_rules,
            states,
            transitions,
            loc,
        })
    }

    fn parse_state(&mut self) -> PResult<StateDef> {
        let annotation = if self.at_word("initial") {
            self.bump();
            Some(StateAnnotation::Initial)
        } else if self.at_word("final") {
            self.bump();
            Some(StateAnnotation::Final)
        } else {
            None
        };
        let loc = self.expect_word("state")?;
        if let Some(a) = annotation {
            let word = match a {
                StateAnnotation::Initial => "initial",
                StateAnnotation::Final => "final",
            };
            self.warnings.warning(
                format!("`{word}` state annotations are kept for documentation but ignored by evaluation"),
                loc,
            );
        }
        let (id, _) = self.expect_ident("state id")?;
        let marker_value = if self.at_word("marker") {
            self.bump();
            let (s, _) = self.expect_string("marker string")?;
            Some(s)
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        let mut rule_refs = Vec::new();
        if self.at_word("rules") {
            self.bump();
            self.expect(Tok::LBrace)?;
            while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                let (rule, rloc) = self.expect_ident("rule name")?;
                self.expect(Tok::Semi)?;
                rule_refs.push(NameRef {
                    name: rule,
                    loc: rloc,
                });
            }
            self.expect(Tok::RBrace)?;
        }
        self.expect(Tok::RBrace)?;
        Ok(StateDef {
            id,
            marker_value,
            rule_refs,
            annotation,
            loc,
        })
    }

    // ---- expressions ---------------------------------------------------

    fn enter_nesting(&mut self) -> PResult<()> {
        self.expr_depth += 1;
        if self.expr_depth > MAX_EXPR_DEPTH {
            Err(Diagnostic::error(
                format!("expression nesting exceeds {MAX_EXPR_DEPTH} levels"),
                self.loc(),
            ))
        } else {
            Ok(())
        }
    }

    fn parse_expr(&mut self) -> PResult<Expr> {
        self.enter_nesting()?;
        let result = self.parse_expr_inner();
        self.expr_depth -= 1;
        result
    }

    fn parse_expr_inner(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::KwIf {
            let loc = self.bump().loc;
            let cond = self.parse_expr()?;
            self.expect(Tok::KwThen)?;
            let then = self.parse_expr()?;
            self.expect(Tok::KwElse)?;
            let els = self.parse_expr()?;
            return Ok(Expr::If {
                cond: Box::new(cond),
                then: Box::new(then),
                els: Box::new(els),
                loc,
            });
        }
        self.parse_implies()
    }

    fn parse_implies(&mut self) -> PResult<Expr> {
        let lhs = self.parse_or()?;
        if *self.peek() == Tok::KwImplies {
            let loc = self.bump().loc;
            // Right-associative; the consequent may itself be an `if`.
            let rhs = self.parse_expr()?;
            return Ok(Expr::Binary {
                op: BinOp::Implies,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            });
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_and()?;
        while *self.peek() == Tok::KwOr {
            let loc = self.bump().loc;
            let rhs = self.parse_and()?;
            lhs = Expr::Binary {
                op: BinOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            };
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_not()?;
        while *self.peek() == Tok::KwAnd {
            let loc = self.bump().loc;
            let rhs = self.parse_not()?;
            lhs = Expr::Binary {
                op: BinOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            };
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::KwNot {
            let loc = self.bump().loc;
            self.enter_nesting()?;
            let inner = self.parse_not();
            self.expr_depth -= 1;
            return Ok(Expr::Not(Box::new(inner?), loc));
        }
        self.parse_comparison()
    }

    fn comparison_op(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Eq => Some(BinOp::Eq),
            Tok::Lt => Some(BinOp::Lt),
            Tok::Gt => Some(BinOp::Gt),
            Tok::Le => Some(BinOp::Le),
            Tok::Ge => Some(BinOp::Ge),
            _ => None,
        }
    }

    fn parse_comparison(&mut self) -> PResult<Expr> {
        let lhs = self.parse_additive()?;
        if let Some(op) = self.comparison_op() {
            let loc = self.bump().loc;
            let rhs = self.parse_additive()?;
            if self.comparison_op().is_some() {
                return Err(Diagnostic::error(
                    "comparisons cannot be chained; use parentheses and a logic operator",
                    self.loc(),
                ));
            }
            return Ok(Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            });
        }
        Ok(lhs)
    }

    fn parse_additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let loc = self.bump().loc;
            let rhs = self.parse_multiplicative()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            };
        }
        Ok(lhs)
    }

    fn parse_multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            let loc = self.bump().loc;
            let rhs = self.parse_unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                loc,
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            let loc = self.bump().loc;
            self.enter_nesting()?;
            let inner = self.parse_unary();
            self.expr_depth -= 1;
            return Ok(Expr::Neg(Box::new(inner?), loc));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(n, loc))
            }
            Tok::KwTrue => {
                self.bump();
                Ok(Expr::Bool(true, loc))
            }
            Tok::KwFalse => {
                self.bump();
                Ok(Expr::Bool(false, loc))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    match name.as_str() {
                        "abs" => {
                            self.bump();
                            let inner = self.parse_expr()?;
                            self.expect(Tok::RParen)?;
                            Ok(Expr::Abs(Box::new(inner), loc))
                        }
                        "satisfies" => {
                            self.bump();
                            let (ch, _) = self.expect_ident("characteristic name")?;
                            self.expect(Tok::RParen)?;
                            Ok(Expr::Satisfies(ch, loc))
                        }
                        other => Err(Diagnostic::error(
                            format!(
                                "unknown built-in `{other}`; only `abs(...)` and `satisfies(...)` can be called"
                            ),
                            loc,
                        )),
                    }
                } else {
                    Ok(Expr::Ref(name, loc))
                }
            }
            other => Err(Diagnostic::error(
                format!("expected an expression, found {other}"),
                loc,
            )),
        }
    }
}

fn parse_day(word: &str, loc: Loc) -> PResult<Weekday> {
    Ok(match word {
        "mon" => Weekday::Mon,
        "tue" => Weekday::Tue,
        "wed" => Weekday::Wed,
        "thu" => Weekday::Thu,
        "fri" => Weekday::Fri,
        "sat" => Weekday::Sat,
        "sun" => Weekday::Sun,
        other => {
            return Err(Diagnostic::error(
                format!("unknown day `{other}`; expected mon, tue, wed, thu, fri, sat or sun"),
                loc,
            ))
        }
    })
}
