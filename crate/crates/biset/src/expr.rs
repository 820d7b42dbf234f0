//! Expression language for metric functions of the three coordinates
//! `x`, `xi`, `eta`.
//!
//! The grammar is deliberately small: decimal literals with an optional
//! exponent, the three variables (with `ξ`/`η` accepted as synonyms for
//! `xi`/`eta`), `+ - * / ^`, unary minus, parentheses, and the function
//! calls `exp`, `ln`, `sin`, `cos`, `tanh`, `sqrt`. `^` is right-associative
//! and binds tighter than unary minus. Anything that is defined everywhere
//! parses; points where a subexpression leaves the real domain surface as
//! evaluation errors, not parse errors.

use std::fmt;

use crate::scalar::{DomainError, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Xi,
    Eta,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Xi => "xi",
            Var::Eta => "eta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Tanh,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Number(f64),
    Variable(Var),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Number(_) | Node::Variable(_) | Node::Call(..) => 5,
            Node::Neg(_) => 3,
            Node::Binary(op, ..) => op.precedence(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Number(v) => write!(f, "{v}"),
            Node::Variable(v) => write!(f, "{}", v.name()),
            Node::Neg(inner) => {
                write!(f, "-")?;
                if inner.precedence() < 3 {
                    write!(f, "(")?;
                    inner.fmt_prec(f)?;
                    write!(f, ")")
                } else {
                    inner.fmt_prec(f)
                }
            }
            Node::Binary(op, lhs, rhs) => {
                let p = op.precedence();
                // Equal precedence re-parses on the recursive side only:
                // parenthesize the left of `^` and the right of the rest.
                let left_parens = lhs.precedence() < p
                    || (lhs.precedence() == p && *op == BinOp::Pow);
                let right_parens = rhs.precedence() < p
                    || (rhs.precedence() == p && *op != BinOp::Pow);
                if left_parens {
                    write!(f, "(")?;
                    lhs.fmt_prec(f)?;
                    write!(f, ")")?;
                } else {
                    lhs.fmt_prec(f)?;
                }
                match op {
                    BinOp::Add | BinOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => write!(f, "{}", op.symbol())?,
                }
                if right_parens {
                    write!(f, "(")?;
                    rhs.fmt_prec(f)?;
                    write!(f, ")")
                } else {
                    rhs.fmt_prec(f)
                }
            }
            Node::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.fmt_prec(f)?;
                write!(f, ")")
            }
        }
    }

    pub fn eval_scalar<T: Scalar>(&self, x: T, xi: T, eta: T) -> Result<T, DomainError> {
        match self {
            Node::Number(v) => Ok(T::constant(*v)),
            Node::Variable(Var::X) => Ok(x),
            Node::Variable(Var::Xi) => Ok(xi),
            Node::Variable(Var::Eta) => Ok(eta),
            Node::Neg(inner) => Ok(-inner.eval_scalar(x, xi, eta)?),
            Node::Binary(op, lhs, rhs) => {
                let l = lhs.eval_scalar(x, xi, eta)?;
                let r = rhs.eval_scalar(x, xi, eta)?;
                match op {
                    BinOp::Add => Ok(l + r),
                    BinOp::Sub => Ok(l - r),
                    BinOp::Mul => Ok(l * r),
                    BinOp::Div => l.checked_div(r).map_err(|e| e.with_context(self.to_string())),
                    BinOp::Pow => l.checked_pow(r).map_err(|e| e.with_context(self.to_string())),
                }
            }
            Node::Call(func, arg) => {
                let a = arg.eval_scalar(x, xi, eta)?;
                let out = match func {
                    Func::Exp => a.checked_exp(),
                    Func::Ln => a.checked_ln(),
                    Func::Sqrt => a.checked_sqrt(),
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Tanh => Ok(a.tanh()),
                };
                out.map_err(|e| e.with_context(self.to_string()))
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f)
    }
}

/// Parsed metric expression over the variables `x`, `xi`, `eta`.
///
/// Printing with `Display` and re-parsing yields a structurally identical
/// tree for every tree this parser produces. (Hand-built trees holding
/// negative literals print through unary minus instead.)
#[derive(Debug, Clone, PartialEq)]
pub struct MetricExpr {
    root: Node,
}

impl MetricExpr {
    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval_scalar<T: Scalar>(&self, x: T, xi: T, eta: T) -> Result<T, DomainError> {
        self.root.eval_scalar(x, xi, eta)
    }
}

impl fmt::Display for MetricExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Malformed input: what was expected and what was found instead.
    Syntax { expected: String, found: String },
    /// An identifier that is neither a variable nor a known function.
    UnknownIdentifier { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl std::error::Error for ParseError {}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax { expected, found } => write!(
                f,
                "syntax error at byte {}: expected {expected}, found {found}",
                self.offset
            ),
            ParseErrorKind::UnknownIdentifier { name } => {
                write!(f, "unknown identifier `{name}` at byte {}", self.offset)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
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
            Token::Number(v) => format!("number `{v}`"),
            Token::Ident(s) => format!("`{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_whitespace(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn next_token(&mut self) -> Result<Option<(usize, Token)>, ParseError> {
        self.skip_whitespace();
        let start = self.pos;
        let rest = self.rest();
        let mut chars = rest.chars();
        let c = match chars.next() {
            None => return Ok(None),
            Some(c) => c,
        };
        let simple = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += c.len_utf8();
            return Ok(Some((start, tok)));
        }
        if c.is_ascii_digit() {
            let len = number_length(rest);
            let text = &rest[..len];
            self.pos += len;
            let value: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                kind: ParseErrorKind::Syntax {
                    expected: "a decimal literal".into(),
                    found: format!("`{text}`"),
                },
            })?;
            return Ok(Some((start, Token::Number(value))));
        }
        if c.is_alphabetic() || c == '_' {
            let len = rest
                .char_indices()
                .find(|(_, ch)| !(ch.is_alphanumeric() || *ch == '_'))
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            let text = &rest[..len];
            self.pos += len;
            return Ok(Some((start, Token::Ident(text.to_string()))));
        }
        Err(ParseError {
            offset: start,
            kind: ParseErrorKind::Syntax {
                expected: "an expression".into(),
                found: format!("`{c}`"),
            },
        })
    }
}

/// Length of the leading numeric literal: digits, optional fraction,
/// optional exponent. The exponent marker is consumed only when an actual
/// exponent follows, so `2eta` lexes as `2` then `eta`.
fn number_length(s: &str) -> usize {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        let mut j = i + 1;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > i + 1 {
            i = j;
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let digits_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > digits_start {
            i = j;
        }
    }
    i
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    index: usize,
    end_offset: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.index)
            .map(|(o, _)| *o)
            .unwrap_or(self.end_offset)
    }

    fn advance(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.index).map(|(_, t)| t.clone());
        if tok.is_some() {
            self.index += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        let found = self
            .peek()
            .map(Token::describe)
            .unwrap_or_else(|| "end of input".into());
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Syntax {
                expected: expected.into(),
                found,
            },
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token::RParen) => {
                self.advance();
                Ok(())
            }
            _ => Err(self.error("`)`")),
        }
    }

    fn parse_expr(&mut self) -> Result<Node, ParseError> {
        let mut node = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_term()?;
            node = Node::Binary(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn parse_term(&mut self) -> Result<Node, ParseError> {
        let mut node = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_unary()?;
            node = Node::Binary(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn parse_unary(&mut self) -> Result<Node, ParseError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.advance();
            let inner = self.parse_unary()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Node, ParseError> {
        let base = self.parse_atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.advance();
            // The exponent re-enters at unary level, which makes `^`
            // right-associative and lets `x^-2` parse without parentheses.
            let exponent = self.parse_unary()?;
            return Ok(Node::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Node, ParseError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Token::Number(v)) => {
                self.advance();
                Ok(Node::Number(v))
            }
            Some(Token::LParen) => {
                self.advance();
                let inner = self.parse_expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.advance();
                match name.as_str() {
                    "x" => Ok(Node::Variable(Var::X)),
                    "xi" | "ξ" => Ok(Node::Variable(Var::Xi)),
                    "eta" | "η" => Ok(Node::Variable(Var::Eta)),
                    other => {
                        if let Some(func) = Func::from_name(other) {
                            match self.peek() {
                                Some(Token::LParen) => {
                                    self.advance();
                                    let arg = self.parse_expr()?;
                                    self.expect_rparen()?;
                                    Ok(Node::Call(func, Box::new(arg)))
                                }
                                _ => Err(self.error("`(` after function name")),
                            }
                        } else {
                            Err(ParseError {
                                offset,
                                kind: ParseErrorKind::UnknownIdentifier {
                                    name: other.to_string(),
                                },
                            })
                        }
                    }
                }
            }
            _ => Err(self.error("an expression")),
        }
    }
}

/// Parses an expression over `x`, `xi`, `eta` with standard precedence.
pub fn parse_metric_expr(src: &str) -> Result<MetricExpr, ParseError> {
    let mut lexer = Lexer::new(src);
    let mut tokens = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        tokens.push(tok);
    }
    let mut parser = Parser {
        tokens,
        index: 0,
        end_offset: src.len(),
    };
    let root = parser.parse_expr()?;
    if parser.peek().is_some() {
        return Err(parser.error("end of input or an operator"));
    }
    Ok(MetricExpr { root })
}

/// Evaluates an expression with the three variables bound.
pub fn eval_expr(e: &MetricExpr, x: f64, xi: f64, eta: f64) -> Result<f64, DomainError> {
    e.eval_scalar(x, xi, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form_parses() {
        let e = parse_metric_expr("x*xi + eta").unwrap();
        let expected = Node::Binary(
            BinOp::Add,
            Box::new(Node::Binary(
                BinOp::Mul,
                Box::new(Node::Variable(Var::X)),
                Box::new(Node::Variable(Var::Xi)),
            )),
            Box::new(Node::Variable(Var::Eta)),
        );
        assert_eq!(*e.root(), expected);
    }

    #[test]
    fn single_call_parses() {
        let e = parse_metric_expr("exp(x)").unwrap();
        assert_eq!(
            *e.root(),
            Node::Call(Func::Exp, Box::new(Node::Variable(Var::X)))
        );
    }

    #[test]
    fn malformed_input_reports_offset() {
        let err = parse_metric_expr("x + * xi").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(matches!(err.kind, ParseErrorKind::Syntax { .. }));
    }

    #[test]
    fn unknown_identifier_is_named() {
        let err = parse_metric_expr("x + foo").unwrap_err();
        match err.kind {
            ParseErrorKind::UnknownIdentifier { name } => assert_eq!(name, "foo"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn greek_aliases() {
        let e = parse_metric_expr("x*ξ + η").unwrap();
        assert_eq!(eval_expr(&e, 2.0, 3.0, 4.0).unwrap(), 10.0);
        assert_eq!(e.to_string(), "x*xi + eta");
    }

    #[test]
    fn eval_examples() {
        let e = parse_metric_expr("x*xi + eta").unwrap();
        assert_eq!(eval_expr(&e, 2.0, 3.0, 4.0).unwrap(), 10.0);
        let proj = parse_metric_expr("eta").unwrap();
        assert_eq!(eval_expr(&proj, -3.3, 9.1, 7.0).unwrap(), 7.0);
        let inv = parse_metric_expr("1/x").unwrap();
        let err = eval_expr(&inv, 0.0, 1.0, 1.0).unwrap_err();
        assert_eq!(err.context(), Some("1/x"));
        assert!(err.reason().contains("division by zero"));
    }

    #[test]
    fn canonical_eval_is_exact_machine_arithmetic() {
        let e = parse_metric_expr("x*xi+eta").unwrap();
        for &(x, xi, eta) in &[
            (0.1, -7.25, 3.75),
            (1e8, -2.5e-3, 19.0),
            (-0.3333, 0.77, -1e5),
        ] {
            assert_eq!(eval_expr(&e, x, xi, eta).unwrap(), x * xi + eta);
        }
    }

    #[test]
    fn power_is_right_associative_and_tighter_than_unary_minus() {
        let e = parse_metric_expr("2^3^2").unwrap();
        assert_eq!(eval_expr(&e, 0.0, 0.0, 0.0).unwrap(), 512.0);
        let n = parse_metric_expr("-x^2").unwrap();
        assert_eq!(eval_expr(&n, 3.0, 0.0, 0.0).unwrap(), -9.0);
        let m = parse_metric_expr("x^-1").unwrap();
        assert_eq!(eval_expr(&m, 4.0, 0.0, 0.0).unwrap(), 0.25);
    }

    #[test]
    fn domain_error_names_offending_node() {
        let e = parse_metric_expr("ln(x - xi)").unwrap();
        let err = eval_expr(&e, 1.0, 2.0, 0.0).unwrap_err();
        assert_eq!(err.context(), Some("ln(x - xi)"));
        let s = parse_metric_expr("sqrt(eta)").unwrap();
        assert!(eval_expr(&s, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn pow_of_negative_base_with_fraction_is_domain_error() {
        let e = parse_metric_expr("x^0.5").unwrap();
        assert!(eval_expr(&e, -2.0, 0.0, 0.0).is_err());
        let i = parse_metric_expr("x^3").unwrap();
        assert_eq!(eval_expr(&i, -2.0, 0.0, 0.0).unwrap(), -8.0);
    }

    #[test]
    fn exponent_literal_lexing() {
        let e = parse_metric_expr("2e3 + x").unwrap();
        assert_eq!(eval_expr(&e, 1.0, 0.0, 0.0).unwrap(), 2001.0);
        // `2eta` must not swallow the identifier as an exponent; without an
        // explicit operator it is a syntax error.
        assert!(parse_metric_expr("2eta").is_err());
        let f = parse_metric_expr("2*eta").unwrap();
        assert_eq!(eval_expr(&f, 0.0, 0.0, 3.0).unwrap(), 6.0);
        let g = parse_metric_expr("1.5e-2").unwrap();
        assert_eq!(eval_expr(&g, 0.0, 0.0, 0.0).unwrap(), 0.015);
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        assert!(parse_metric_expr("x x").is_err());
        assert!(parse_metric_expr("(x").is_err());
        assert!(parse_metric_expr("").is_err());
    }

    fn arb_node() -> impl Strategy<Value = Node> {
        let leaf = prop_oneof![
            (0u32..1000u32, 0u32..100u32).prop_map(|(a, b)| {
                Node::Number(a as f64 + b as f64 / 100.0)
            }),
            prop_oneof![
                Just(Node::Variable(Var::X)),
                Just(Node::Variable(Var::Xi)),
                Just(Node::Variable(Var::Eta)),
            ],
        ];
        leaf.prop_recursive(5, 64, 3, |inner| {
            prop_oneof![
                (inner.clone()).prop_map(|n| Node::Neg(Box::new(n))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Node::Binary(op, Box::new(l), Box::new(r))),
                (
                    prop_oneof![
                        Just(Func::Exp),
                        Just(Func::Ln),
                        Just(Func::Sin),
                        Just(Func::Cos),
                        Just(Func::Tanh),
                        Just(Func::Sqrt)
                    ],
                    inner
                )
                    .prop_map(|(f, a)| Node::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(root in arb_node()) {
            let printed = root.to_string();
            let reparsed = parse_metric_expr(&printed)
                .unwrap_or_else(|e| panic!("failed to reparse `{printed}`: {e}"));
            prop_assert_eq!(reparsed.root(), &root);
        }
    }
}
