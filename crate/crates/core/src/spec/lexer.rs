//! Lexer for `.ens` specification text.

use std::fmt;

use crate::diag::{Diagnostic, Loc};

/// Token kinds. `&&`, `||` and `!` are normalized to the keyword operators
/// at lex time; pretty-printing always emits the keyword form.
#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(f64),
    Str(String),

    KwRule,
    KwFunction,
    KwConstant,
    KwTimeroutine,
    KwCharacteristic,
    KwStatespace,
    KwIf,
    KwThen,
    KwElse,
    KwAnd,
    KwOr,
    KwNot,
    KwImplies,
    KwTrue,
    KwFalse,

    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Colon,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    DotDot,

    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Str(s) => write!(f, "string \"{s}\""),
            Tok::KwRule => f.write_str("`rule`"),
            Tok::KwFunction => f.write_str("`function`"),
            Tok::KwConstant => f.write_str("`constant`"),
            Tok::KwTimeroutine => f.write_str("`timeroutine`"),
            Tok::KwCharacteristic => f.write_str("`characteristic`"),
            Tok::KwStatespace => f.write_str("`statespace`"),
            Tok::KwIf => f.write_str("`if`"),
            Tok::KwThen => f.write_str("`then`"),
            Tok::KwElse => f.write_str("`else`"),
            Tok::KwAnd => f.write_str("`and`"),
            Tok::KwOr => f.write_str("`or`"),
            Tok::KwNot => f.write_str("`not`"),
            Tok::KwImplies => f.write_str("`implies`"),
            Tok::KwTrue => f.write_str("`true`"),
            Tok::KwFalse => f.write_str("`false`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

fn keyword(ident: &str) -> Option<Tok> {
    Some(match ident {
        "rule" => Tok::KwRule,
        "function" => Tok::KwFunction,
        "constant" => Tok::KwConstant,
        "timeroutine" => Tok::KwTimeroutine,
        "characteristic" => Tok::KwCharacteristic,
        "statespace" => Tok::KwStatespace,
        "if" => Tok::KwIf,
        "then" => Tok::KwThen,
        "else" => Tok::KwElse,
        "and" => Tok::KwAnd,
        "or" => Tok::KwOr,
        "not" => Tok::KwNot,
        "implies" => Tok::KwImplies,
        "true" => Tok::KwTrue,
        "false" => Tok::KwFalse,
        _ => return None,
    })
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn loc(&self) -> Loc {
        Loc::new(self.line, self.col)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.bump();
            true
        } else {
            false
        }
    }
}

/// Splits `text` into tokens, ending with a single [`Tok::Eof`].
pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lx = Lexer::new(text);
    let mut out = Vec::new();

    loop {
        // Skip whitespace and `//` comments.
        loop {
            match lx.peek() {
                Some(c) if c.is_whitespace() => {
                    lx.bump();
                }
                Some('/') => {
                    // Only a comment if followed by a second slash.
                    let mut ahead = lx.chars.clone();
                    ahead.next();
                    if ahead.peek() == Some(&'/') {
                        while let Some(c) = lx.peek() {
                            if c == '\n' {
                                break;
                            }
                            lx.bump();
                        }
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }

        let loc = lx.loc();
        let Some(c) = lx.peek() else {
            out.push(Token { tok: Tok::Eof, loc });
            return Ok(out);
        };

        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(c) = lx.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    lx.bump();
                } else {
                    break;
                }
            }
            keyword(&ident).unwrap_or(Tok::Ident(ident))
        } else if c.is_ascii_digit() {
            let mut lit = String::new();
            while let Some(c) = lx.peek() {
                if c.is_ascii_digit() {
                    lit.push(c);
                    lx.bump();
                } else {
                    break;
                }
            }
            // Fractional part only when the dot is followed by a digit,
            // so `10..20` lexes as `10`, `..`, `20`.
            if lx.peek() == Some('.') {
                let mut ahead = lx.chars.clone();
                ahead.next();
                if matches!(ahead.peek(), Some(d) if d.is_ascii_digit()) {
                    lit.push('.');
                    lx.bump();
                    while let Some(c) = lx.peek() {
                        if c.is_ascii_digit() {
                            lit.push(c);
                            lx.bump();
                        } else {
                            break;
                        }
                    }
                }
            }
            if matches!(lx.peek(), Some('e' | 'E')) {
                let mut ahead = lx.chars.clone();
                ahead.next();
                let next = ahead.peek().copied();
                let signed = matches!(next, Some('+' | '-'));
                if signed {
                    ahead.next();
                }
                if matches!(ahead.peek(), Some(d) if d.is_ascii_digit()) {
                    lit.push('e');
                    lx.bump();
                    if signed {
                        lit.push(next.unwrap());
                        lx.bump();
                    }
                    while let Some(c) = lx.peek() {
                        if c.is_ascii_digit() {
                            lit.push(c);
                            lx.bump();
                        } else {
                            break;
                        }
                    }
                }
            }
            let value: f64 = lit
                .parse()
                .map_err(|_| Diagnostic::error(format!("malformed number `{lit}`"), loc))?;
            if !value.is_finite() {
                return Err(Diagnostic::error(
                    format!("number `{lit}` is out of range"),
                    loc,
                ));
            }
            Tok::Num(value)
        } else if c == '"' {
            lx.bump();
            let mut s = String::new();
            loop {
                match lx.bump() {
                    Some('"') => break,
                    Some('\\') => match lx.bump() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some(other) => {
                            return Err(Diagnostic::error(
                                format!("unknown escape `\\{other}` in string"),
                                loc,
                            ))
                        }
                        None => return Err(Diagnostic::error("unterminated string", loc)),
                    },
                    Some('\n') | None => {
                        return Err(Diagnostic::error("unterminated string", loc))
                    }
                    Some(other) => s.push(other),
                }
            }
            Tok::Str(s)
        } else {
            lx.bump();
            match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '<' => {
                    if lx.eat('=') {
                        Tok::Le
                    } else {
                        Tok::Lt
                    }
                }
                '>' => {
                    if lx.eat('=') {
                        Tok::Ge
                    } else {
                        Tok::Gt
                    }
                }
                '.' => {
                    if lx.eat('.') {
                        Tok::DotDot
                    } else {
                        return Err(Diagnostic::error("unexpected `.`", loc));
                    }
                }
                '&' => {
                    if lx.eat('&') {
                        Tok::KwAnd
                    } else {
                        return Err(Diagnostic::error("unexpected `&` (did you mean `&&`?)", loc));
                    }
                }
                '|' => {
                    if lx.eat('|') {
                        Tok::KwOr
                    } else {
                        return Err(Diagnostic::error("unexpected `|` (did you mean `||`?)", loc));
                    }
                }
                '!' => Tok::KwNot,
                other => {
                    return Err(Diagnostic::error(
                        format!("unexpected character `{other}`"),
                        loc,
                    ))
                }
            }
        };
        out.push(Token { tok, loc });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Tok> {
        lex(text).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_ranges() {
        assert_eq!(
            kinds("10..20"),
            vec![Tok::Num(10.0), Tok::DotDot, Tok::Num(20.0), Tok::Eof]
        );
        assert_eq!(kinds("18.0"), vec![Tok::Num(18.0), Tok::Eof]);
        assert_eq!(kinds("1e-9"), vec![Tok::Num(1e-9), Tok::Eof]);
    }

    #[test]
    fn operator_spellings_normalize() {
        assert_eq!(
            kinds("a && b || !c"),
            vec![
                Tok::Ident("a".into()),
                Tok::KwAnd,
                Tok::Ident("b".into()),
                Tok::KwOr,
                Tok::KwNot,
                Tok::Ident("c".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_skipped() {
        assert_eq!(
            kinds("a // comment\nb"),
            vec![Tok::Ident("a".into()), Tok::Ident("b".into()), Tok::Eof]
        );
    }

    #[test]
    fn string_with_escape() {
        assert_eq!(
            kinds(r#""a\"b""#),
            vec![Tok::Str("a\"b".into()), Tok::Eof]
        );
    }

    #[test]
    fn locations_are_tracked() {
        let toks = lex("ab\n  cd").unwrap();
        assert_eq!((toks[0].loc.line, toks[0].loc.col), (1, 1));
        assert_eq!((toks[1].loc.line, toks[1].loc.col), (2, 3));
    }

    #[test]
    fn huge_number_rejected() {
        assert!(lex("1e999").is_err());
    }

    #[test]
    fn unterminated_string_rejected() {
        assert!(lex("\"abc").is_err());
        assert!(lex("\"abc\ndef\"").is_err());
    }
}
