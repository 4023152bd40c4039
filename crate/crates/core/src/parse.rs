//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+'|'-') term)*
//! term    := unary (('*'|'/') unary)*
//! unary   := '-' unary | factor
//! factor  := base ('^' integer)?          integer may carry a sign
//! base    := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Numbers are decimal integers; ratios arise from '/' and fold to exact
//! rationals. Identifiers resolve against the chart's coordinates, the
//! declared parameters, the elementary functions, and the declared
//! opaque symbols; opaque symbols accept trailing apostrophes for
//! derivative orders (`f''(u)`).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::chart::Chart;
use crate::error::ParseError;
use crate::expr::{Elementary, Expr};

/// Identifiers visible to the parser beyond the chart coordinates.
#[derive(Debug, Clone, Default)]
pub struct Declarations {
    pub params: BTreeSet<String>,
    pub opaques: BTreeSet<String>,
}

impl Declarations {
    pub fn with_opaques<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        Declarations {
            params: BTreeSet::new(),
            opaques: names.into_iter().map(Into::into).collect(),
        }
    }
}

/// Parses against a bare chart (no parameters or opaque symbols).
pub fn parse_expr(text: &str, chart: &Chart) -> Result<Expr, ParseError> {
    parse_expr_with(text, chart, &Declarations::default())
}

pub fn parse_expr_with(
    text: &str,
    chart: &Chart,
    decls: &Declarations,
) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        chart,
        decls,
        input_len: text.len(),
    };
    let e = parser.expr()?;
    match parser.peek() {
        None => Ok(e),
        Some((tok, at)) => Err(ParseError::new(
            *at,
            format!("unexpected {}", tok.describe()),
        )),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(BigInt),
    Ident { name: String, quotes: u32 },
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(n) => format!("number '{n}'"),
            Token::Ident { name, quotes } => {
                format!("identifier '{}{}'", name, "'".repeat(*quotes as usize))
            }
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Caret => "'^'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                out.push((Token::Plus, i));
                i += 1;
            }
            b'-' => {
                out.push((Token::Minus, i));
                i += 1;
            }
            b'*' => {
                out.push((Token::Star, i));
                i += 1;
            }
            b'/' => {
                out.push((Token::Slash, i));
                i += 1;
            }
            b'^' => {
                out.push((Token::Caret, i));
                i += 1;
            }
            b'(' => {
                out.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Token::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    return Err(ParseError::new(
                        i,
                        "decimal fractions are not part of the grammar; write an exact ratio p/q",
                    ));
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((Token::Num(n), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let mut quotes = 0u32;
                while i < bytes.len() && bytes[i] == b'\'' {
                    quotes += 1;
                    i += 1;
                }
                out.push((
                    Token::Ident {
                        name: text[start..i - quotes as usize].to_string(),
                        quotes,
                    },
                    start,
                ));
            }
            _ => {
                return Err(ParseError::new(
                    i,
                    format!("unexpected character '{}'", &text[i..].chars().next().unwrap()),
                ))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    chart: &'a Chart,
    decls: &'a Declarations,
    input_len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, at)| *at)
            .unwrap_or(self.input_len)
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some((tok, _)) if tok == want => Ok(()),
            Some((tok, at)) => Err(ParseError::new(
                at,
                format!("expected {what}, found {}", tok.describe()),
            )),
            None => Err(ParseError::new(
                self.input_len,
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some((Token::Plus, _)) => {
                    self.next();
                    terms.push(self.term()?);
                }
                Some((Token::Minus, _)) => {
                    self.next();
                    terms.push(Expr::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Some((Token::Star, _)) => {
                    self.next();
                    factors.push(self.unary()?);
                }
                Some((Token::Slash, _)) => {
                    self.next();
                    let rhs = self.unary()?;
                    factors.push(Expr::pow(rhs, -1));
                }
                _ => break,
            }
        }
        Ok(Expr::product(factors))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some((Token::Minus, _))) {
            self.next();
            return Ok(Expr::neg(self.unary()?));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if matches!(self.peek(), Some((Token::Caret, _))) {
            self.next();
            let negative = if matches!(self.peek(), Some((Token::Minus, _))) {
                self.next();
                true
            } else {
                false
            };
            let at = self.here();
            match self.next() {
                Some((Token::Num(n), _)) => {
                    let k: i32 = n.try_into().map_err(|_| {
                        ParseError::new(at, "exponent out of range for a 32-bit integer")
                    })?;
                    Ok(Expr::pow(base, if negative { -k } else { k }))
                }
                Some((tok, at)) => Err(ParseError::new(
                    at,
                    format!("expected integer exponent, found {}", tok.describe()),
                )),
                None => Err(ParseError::new(
                    self.input_len,
                    "expected integer exponent, found end of input",
                )),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        match self.next() {
            Some((Token::Num(n), _)) => Ok(Expr::rational(BigRational::from_integer(n))),
            Some((Token::LParen, _)) => {
                let e = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(e)
            }
            Some((Token::Ident { name, quotes }, at)) => self.ident(name, quotes, at),
            Some((tok, at)) => Err(ParseError::new(
                at,
                format!("expected an expression, found {}", tok.describe()),
            )),
            None => Err(ParseError::new(at, "expected an expression, found end of input")),
        }
    }

    fn ident(&mut self, name: String, quotes: u32, at: usize) -> Result<Expr, ParseError> {
        if quotes > 0 && !self.decls.opaques.contains(&name) {
            return Err(ParseError::new(
                at,
                format!("derivative marks are only valid on declared opaque symbols, got '{name}'"),
            ));
        }
        if self.decls.opaques.contains(&name) {
            self.expect(Token::LParen, "'(' after opaque symbol")?;
            let arg = self.expr()?;
            self.expect(Token::RParen, "')'")?;
            return Ok(Expr::opaque(name, quotes, arg));
        }
        if let Some(head) = Elementary::from_name(&name) {
            self.expect(Token::LParen, "'(' after function name")?;
            let arg = self.expr()?;
            self.expect(Token::RParen, "')'")?;
            return Ok(Expr::func(head, arg));
        }
        if let Some(i) = self.chart.coord_index(&name) {
            return Ok(Expr::var(i));
        }
        if self.decls.params.contains(&name) {
            return Ok(Expr::param(name));
        }
        Err(ParseError::new(
            at,
            format!(
                "unknown identifier '{name}' (not a coordinate, parameter, or declared opaque symbol)"
            ),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Bindings;

    fn chart3() -> std::sync::Arc<Chart> {
        Chart::boxed(&["x1", "x2", "x3"], -2.0, 2.0).unwrap()
    }

    #[test]
    fn parses_sum_of_power_and_var() {
        let chart = chart3();
        let e = parse_expr("x1^2 + x2", &chart).unwrap();
        assert_eq!(
            e,
            Expr::sum(vec![Expr::pow(Expr::var(0), 2), Expr::var(1)])
        );
    }

    #[test]
    fn parses_atan_quotient() {
        let chart = chart3();
        let e = parse_expr("atan(x2/x1)", &chart).unwrap();
        assert_eq!(
            e,
            Expr::func(
                Elementary::Atan,
                Expr::product(vec![Expr::var(1), Expr::pow(Expr::var(0), -1)])
            )
        );
    }

    #[test]
    fn evaluates_product_of_sum() {
        let chart = chart3();
        let e = parse_expr("x1*(x2+x3)", &chart).unwrap();
        let v = e.eval(&[1.0, 2.0, 3.0], &Bindings::empty()).unwrap();
        assert_eq!(v, 5.0);
    }

    #[test]
    fn ratio_literals_fold_exactly() {
        let chart = chart3();
        assert_eq!(parse_expr("1/2", &chart).unwrap(), Expr::ratio(1, 2));
        assert_eq!(parse_expr("-3/6", &chart).unwrap(), Expr::ratio(-1, 2));
    }

    #[test]
    fn unknown_identifier_reports_position() {
        let chart = chart3();
        let err = parse_expr("x1 + bogus", &chart).unwrap_err();
        assert_eq!(err.pos, 5);
        assert!(err.message.contains("bogus"));
    }

    #[test]
    fn syntax_error_reports_position() {
        let chart = chart3();
        let err = parse_expr("x1 + * x2", &chart).unwrap_err();
        assert_eq!(err.pos, 5);
    }

    #[test]
    fn unary_minus_binds_below_power() {
        let chart = chart3();
        let e = parse_expr("-x1^2", &chart).unwrap();
        assert_eq!(e, Expr::neg(Expr::pow(Expr::var(0), 2)));
    }

    #[test]
    fn opaque_symbols_and_derivative_marks() {
        let chart = chart3();
        let decls = Declarations::with_opaques(["f"]);
        let e = parse_expr_with("f''(x1^2)", &chart, &decls).unwrap();
        assert_eq!(e, Expr::opaque("f", 2, Expr::pow(Expr::var(0), 2)));
        assert!(parse_expr("f(x1)", &chart).is_err());
    }

    #[test]
    fn print_parse_round_trip_is_identity_on_canonical_trees() {
        let chart = chart3();
        let decls = Declarations::with_opaques(["f"]);
        for text in [
            "x1^2 + x2",
            "atan(x2/x1) + x3",
            "-x2/(x1^2 + x2^2)",
            "1/2*x1 - 7/3",
            "f'(x1*x2) * sin(x3)",
            "x1*x2*x3 - 2*x1",
            "1/x1",
            "(x1 + x2)^3",
        ] {
            let e = parse_expr_with(text, &chart, &decls).unwrap();
            let printed = chart.render(&e);
            let back = parse_expr_with(&printed, &chart, &decls).unwrap();
            assert_eq!(back, e, "round trip failed: {text} -> {printed}");
        }
    }
}
