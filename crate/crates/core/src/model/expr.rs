//! A small arithmetic language over the single variable `t`.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := number | "t" | "e" | "pi" | func "(" expr ("," expr)? ")" | "(" expr ")" | "-" factor
//! func   := "sin" | "cos" | "exp" | "ln" | "abs" | "max2" | "min2"
//! ```
//!
//! `max2` and `min2` take two comma-separated arguments, every other function
//! takes exactly one. Numbers are decimal literals with an optional exponent.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }

    fn syntax(offset: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
    Max2,
    Min2,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            "max2" => Func::Max2,
            "min2" => Func::Min2,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Max2 => "max2",
            Func::Min2 => "min2",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Max2 | Func::Min2 => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedConst {
    E,
    Pi,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::E => std::f64::consts::E,
            NamedConst::Pi => std::f64::consts::PI,
        }
    }
}

/// Expression tree over the variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(NamedConst),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.expr()?;
        match parser.peek() {
            (Token::End, _) => Ok(expr),
            (tok, offset) => Err(ParseError::syntax(
                offset,
                format!("unexpected {} after expression", tok.describe()),
            )),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Const(c) => c.value(),
            Expr::Var => t,
            Expr::Neg(inner) => -inner.eval(t),
            Expr::Binary(op, lhs, rhs) => {
                let (a, b) = (lhs.eval(t), rhs.eval(t));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Call(func, args) => {
                let a = args[0].eval(t);
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Abs => a.abs(),
                    Func::Max2 => a.max(args[1].eval(t)),
                    Func::Min2 => a.min(args[1].eval(t)),
                }
            }
        }
    }

    /// Whether the tree mentions `t` at all.
    pub fn depends_on_t(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Neg(inner) => inner.depends_on_t(),
            Expr::Binary(_, a, b) => a.depends_on_t() || b.depends_on_t(),
            Expr::Call(_, args) => args.iter().any(Expr::depends_on_t),
        }
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, vec![arg])
    }
}

/// Prints a fully parenthesised form that parses back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{})", -v)
            }
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Const(NamedConst::E) => f.write_str("e"),
            Expr::Const(NamedConst::Pi) => f.write_str("pi"),
            Expr::Var => f.write_str("t"),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
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
    LParen,
    RParen,
    Comma,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => format!("number {v}"),
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            b',' => Some(Token::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            tokens.push((tok, start));
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            i = scan_number(bytes, i);
            let literal = &text[start..i];
            let value: f64 = literal
                .parse()
                .map_err(|_| ParseError::syntax(start, format!("malformed number `{literal}`")))?;
            tokens.push((Token::Number(value), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push((Token::Ident(text[start..i].to_string()), start));
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(ParseError::syntax(
                start,
                format!("unexpected character `{ch}`"),
            ));
        }
    }
    tokens.push((Token::End, text.len()));
    Ok(tokens)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    // An exponent only counts when digits follow; otherwise `e` is left for
    // the next token.
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> (Token, usize) {
        self.tokens[self.pos].clone()
    }

    fn bump(&mut self) -> (Token, usize) {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        let (tok, offset) = self.bump();
        if tok == want {
            Ok(())
        } else {
            Err(ParseError::syntax(
                offset,
                format!("expected {}, found {}", want.describe(), tok.describe()),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().0 {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().0 {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Token::Number(v) => Ok(Expr::Num(v)),
            Token::Minus => Ok(Expr::Neg(Box::new(self.factor()?))),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Token::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::Var),
                "e" => Ok(Expr::Const(NamedConst::E)),
                "pi" => Ok(Expr::Const(NamedConst::Pi)),
                other => {
                    let func =
                        Func::from_name(other).ok_or_else(|| ParseError::UnknownIdentifier {
                            name: other.to_string(),
                            offset,
                        })?;
                    self.call(func)
                }
            },
            other => Err(ParseError::syntax(
                offset,
                format!("expected a value, found {}", other.describe()),
            )),
        }
    }

    fn call(&mut self, func: Func) -> Result<Expr, ParseError> {
        self.expect(Token::LParen)?;
        let mut args = vec![self.expr()?];
        while self.peek().0 == Token::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        let (_, close_offset) = self.peek();
        self.expect(Token::RParen)?;
        if args.len() != func.arity() {
            return Err(ParseError::syntax(
                close_offset,
                format!(
                    "`{}` takes {} argument(s), got {}",
                    func.name(),
                    func.arity(),
                    args.len()
                ),
            ));
        }
        Ok(Expr::Call(func, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn eval(text: &str, t: f64) -> f64 {
        Expr::parse(text).unwrap().eval(t)
    }

    #[test]
    fn literal_examples() {
        assert_eq!(eval("0.5", 17.0), 0.5);
        assert_eq!(eval("exp(0 - t)", 0.0), 1.0);
        assert!((eval("sin(t) + 2", PI / 2.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(eval("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(eval("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(eval("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(eval("-t * 2", 3.0), -6.0);
        assert_eq!(eval("--t", 3.0), 3.0);
        assert_eq!(eval("2 - -1", 0.0), 3.0);
        assert_eq!(eval("max2(t, 1) + min2(t, 1)", 4.0), 5.0);
        assert_eq!(eval("1.5e2 + 2E-1", 0.0), 150.2);
        assert_eq!(eval(".5", 0.0), 0.5);
        assert!((eval("pi", 0.0) - PI).abs() == 0.0);
        assert!((eval("ln(e)", 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(eval("abs(0 - 3)", 0.0), 3.0);
    }

    #[test]
    fn errors_carry_offsets() {
        match Expr::parse("1 + foo(t)") {
            Err(ParseError::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(Expr::parse("1 +").unwrap_err().offset(), 3);
        assert_eq!(Expr::parse("(t").unwrap_err().offset(), 2);
        assert_eq!(Expr::parse("t $ 2").unwrap_err().offset(), 2);
        assert_eq!(Expr::parse("2 t").unwrap_err().offset(), 2);
        assert!(matches!(
            Expr::parse("max2(t)"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            Expr::parse("sin(t, 1)"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(Expr::parse("").is_err());
    }

    #[test]
    fn exponent_needs_digits() {
        // `2e` is the number 2 followed by the constant e, which is not a valid juxtaposition.
        assert!(Expr::parse("2e").is_err());
        assert_eq!(eval("2*e", 0.0), 2.0 * std::f64::consts::E);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-5.0f64..5.0).prop_map(Expr::Num),
            Just(Expr::Var),
            Just(Expr::Const(NamedConst::E)),
            Just(Expr::Const(NamedConst::Pi)),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
                (
                    prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Abs)],
                    inner.clone()
                )
                    .prop_map(|(f, a)| Expr::call(f, a)),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Max2, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_preserves_evaluation(
            expr in arb_expr(),
            ts in proptest::collection::vec(-50.0f64..50.0, 100),
        ) {
            let printed = expr.to_string();
            let reparsed = Expr::parse(&printed).unwrap();
            let reprinted = reparsed.to_string();
            let again = Expr::parse(&reprinted).unwrap();
            for t in ts {
                let (a, b) = (reparsed.eval(t), again.eval(t));
                prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
                let c = expr.eval(t);
                prop_assert!(a.to_bits() == c.to_bits() || (a.is_nan() && c.is_nan()));
            }
        }
    }
}
