//! Canonical formatting of spec documents.
//!
//! Printing is the inverse of parsing up to layout: `parse(pretty_print(d))`
//! is structurally equal to `d` for every parser-produced document.
//! Expressions are emitted with minimal parenthesization.

use chrono::Weekday;

use crate::spec::ast::*;

/// Binding strength of an expression for parenthesization, higher is tighter.
fn precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::If { .. } => 0,
        Expr::Binary { op, .. } => match op {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul | BinOp::Div => 7,
        },
        Expr::Not(..) => 4,
        Expr::Neg(..) => 8,
        Expr::Bool(..) | Expr::Num(..) | Expr::Ref(..) | Expr::Abs(..) | Expr::Satisfies(..) => 9,
    }
}

fn write_expr(out: &mut String, expr: &Expr, min_prec: u8) {
    let prec = precedence(expr);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match expr {
        Expr::Bool(b, _) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Num(n, _) => out.push_str(&n.to_string()),
        Expr::Ref(name, _) => out.push_str(name),
        Expr::Satisfies(name, _) => {
            out.push_str("satisfies(");
            out.push_str(name);
            out.push(')');
        }
        Expr::Abs(inner, _) => {
            out.push_str("abs(");
            write_expr(out, inner, 0);
            out.push(')');
        }
        Expr::Not(inner, _) => {
            out.push_str("not ");
            write_expr(out, inner, 4);
        }
        Expr::Neg(inner, _) => {
            out.push('-');
            write_expr(out, inner, 8);
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let (lhs_min, rhs_min) = match op {
                // right-associative; the consequent may be any expression
                BinOp::Implies => (2, 0),
                BinOp::Or => (2, 3),
                BinOp::And => (3, 4),
                // non-associative
                BinOp::Eq | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => (6, 6),
                BinOp::Add | BinOp::Sub => (6, 7),
                BinOp::Mul | BinOp::Div => (7, 8),
            };
            write_expr(out, lhs, lhs_min);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, rhs, rhs_min);
        }
        Expr::If { cond, then, els, .. } => {
            out.push_str("if ");
            write_expr(out, cond, 0);
            out.push_str(" then ");
            write_expr(out, then, 0);
            out.push_str(" else ");
            write_expr(out, els, 0);
        }
    }
    if parens {
        out.push(')');
    }
}

/// Formats one expression on a single line.
pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, 0);
    out
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

fn day_name(d: Weekday) -> &'static str {
    match d {
        Weekday::Mon => "mon",
        Weekday::Tue => "tue",
        Weekday::Wed => "wed",
        Weekday::Thu => "thu",
        Weekday::Fri => "fri",
        Weekday::Sat => "sat",
        Weekday::Sun => "sun",
    }
}

fn time_of_day(minutes: u16) -> String {
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

fn write_sensors(out: &mut String, sensors: &[SensorBinding]) {
    if sensors.is_empty() {
        return;
    }
    out.push_str("  sensors {\n");
    for s in sensors {
        out.push_str(&format!("    {} = {};\n", s.local_id, quote(&s.bms_id)));
    }
    out.push_str("  }\n");
}

/// Formats one element definition.
pub fn print_element(el: &ElementDef) -> String {
    let mut out = String::new();
    match el {
        ElementDef::Constant(c) => {
            out.push_str(&format!("constant {} = {};\n", c.name, c.value));
        }
        ElementDef::TimeRoutine(tr) => {
            out.push_str(&format!("timeroutine {} {{\n", tr.name));
            for w in &tr.clauses {
                out.push_str(&format!(
                    "  daily {} .. {}",
                    time_of_day(w.start_min),
                    time_of_day(w.end_min)
                ));
                if let Some(days) = &w.days {
                    out.push_str(" on ");
                    let names: Vec<_> = days.iter().map(|d| day_name(*d)).collect();
                    out.push_str(&names.join(", "));
                }
                out.push_str(";\n");
            }
            out.push_str("}\n");
        }
        ElementDef::Characteristic(ch) => {
            out.push_str(&format!("characteristic {} {{\n", ch.name));
            out.push_str(&format!("  x = {};\n", quote(&ch.x_sensor)));
            out.push_str(&format!("  y = {};\n", quote(&ch.y_sensor)));
            out.push_str("  points {");
            for (x, y) in &ch.points {
                out.push_str(&format!(" ({x}, {y})"));
            }
            out.push_str(" }\n");
            out.push_str(&format!("  margin {};\n", ch.margin));
            out.push_str("}\n");
        }
        ElementDef::Rule(r) => {
            out.push_str(&format!("rule {} {{\n", r.name));
            write_sensors(&mut out, &r.sensors);
            out.push_str(&format!("  {}\n}}\n", print_expr(&r.body)));
        }
        ElementDef::Function(f) => {
            out.push_str(&format!("function {} {{\n", f.name));
            write_sensors(&mut out, &f.sensors);
            out.push_str(&format!("  {}\n}}\n", print_expr(&f.body)));
        }
        ElementDef::StateSpace(ss) => {
            out.push_str(&format!("statespace {} {{\n", ss.name));
            out.push_str(&format!("  mode {};\n", ss.mode.keyword()));
            if !ss.space_rules.is_empty() {
                out.push_str("  rules {");
                for r in &ss.space_rules {
                    out.push_str(&format!(" {};", r.name));
                }
                out.push_str(" }\n");
            }
            for s in &ss.states {
                out.push_str("  ");
                match s.annotation {
                    Some(StateAnnotation::Initial) => out.push_str("initial "),
                    Some(StateAnnotation::Final) => out.push_str("final "),
                    None => {}
                }
                out.push_str(&format!("state {}", s.id));
                if let Some(m) = &s.marker_value {
                    out.push_str(&format!(" marker {}", quote(m)));
                }
                out.push_str(" {\n");
                if !s.rule_refs.is_empty() {
                    out.push_str("    rules {");
                    for r in &s.rule_refs {
                        out.push_str(&format!(" {};", r.name));
                    }
                    out.push_str(" }\n");
                }
                out.push_str("  }\n");
            }
            for t in &ss.transitions {
                out.push_str(&format!("  transition {} -- {}", t.from, t.to));
                if let Some(note) = &t.note {
                    out.push(' ');
                    out.push_str(&quote(note));
                }
                out.push_str(";\n");
            }
            out.push_str("}\n");
        }
    }
    out
}

/// Formats a whole document in canonical form.
pub fn pretty_print(doc: &SpecDocument) -> String {
    let mut out = String::new();
    for (i, el) in doc.elements.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&print_element(el));
    }
    out
}
