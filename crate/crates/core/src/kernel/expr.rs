//! A small expression language for kernel pieces.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | 's' | 't' | 'pi' | func '(' sum ')' | '(' sum ')'
//! func    := sin | cos | exp | log | sqrt | abs
//! ```
//!
//! `^` binds tighter than unary minus and is right associative, so `-2^2`
//! is `-4` and `2^3^2` is `512`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    S,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Pi,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluates at `(s, t)`.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::S) => s,
            Expr::Var(Var::T) => t,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(s, t)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval(s, t)?;
                let b = r.eval(s, t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::Domain("division by zero".into()));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let v = a.powf(b);
                        if v.is_nan() {
                            return Err(Error::Domain(format!("{a}^{b} is undefined")));
                        }
                        v
                    }
                }
            }
            Expr::Call(f, arg) => {
                let x = arg.eval(s, t)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Abs => x.abs(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(Error::Domain(format!("log of nonpositive value {x}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(Error::Domain(format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                }
            }
        })
    }
}

/// Fully parenthesised form that [`parse_expr`] reads back.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "({v:?})"),
            Expr::Var(Var::S) => f.write_str("s"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
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
                let lexeme = &text[start..i];
                let v = lexeme.parse::<f64>().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("malformed number `{lexeme}`"),
                })?;
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Error {
        Error::Parse {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "s" => Ok(Expr::Var(Var::S)),
                    "t" => Ok(Expr::Var(Var::T)),
                    "pi" => Ok(Expr::Pi),
                    _ => match Func::from_name(&name) {
                        Some(func) => {
                            if *self.peek() != Tok::LParen {
                                return Err(self.unexpected(&format!("`(` after `{name}`")));
                            }
                            self.bump();
                            let arg = self.sum()?;
                            self.expect_rparen()?;
                            Ok(Expr::Call(func, Box::new(arg)))
                        }
                        None => Err(Error::UnknownIdentifier { name, offset }),
                    },
                }
            }
            _ => Err(self.unexpected("a number, variable, function or `(`")),
        }
    }
}

/// Parses an expression in the variables `s` and `t`.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

/// Evaluates `e` at `(s, t)`.
pub fn eval_expr(e: &Expr, s: f64, t: f64) -> Result<f64> {
    e.eval(s, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(text: &str, s: f64, t: f64) -> Result<f64> {
        parse_expr(text)?.eval(s, t)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("2+3*4^2", 0.0, 0.0).unwrap(), 50.0);
        assert_eq!(ev("-2^2", 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0).unwrap(), 512.0);
        assert_eq!(ev("2^-1", 0.0, 0.0).unwrap(), 0.5);
        assert_eq!(ev("8/4/2", 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(ev("1-2-3", 0.0, 0.0).unwrap(), -4.0);
        assert_eq!(ev(" ( 1 + 2 ) * 3 ", 0.0, 0.0).unwrap(), 9.0);
        assert_eq!(ev("1.5e2 + 2E-1", 0.0, 0.0).unwrap(), 150.2);
    }

    #[test]
    fn variables_and_functions() {
        assert_eq!(ev("s*(1-t)", 0.25, 0.5).unwrap(), 0.125);
        assert_eq!(ev("t*(1-s)", 0.5, 0.25).unwrap(), 0.125);
        assert!((ev("sin(pi*s)", 0.5, 0.0).unwrap() - 1.0).abs() < 1e-16);
        assert_eq!(ev("abs(s-t)", 0.25, 0.75).unwrap(), 0.5);
        assert!((ev("exp(log(s)) + sqrt(t)*cos(0)", 2.0, 9.0).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(ev("log(s)", 0.0, 0.3), Err(Error::Domain(_))));
        assert!(matches!(ev("sqrt(s-1)", 0.5, 0.3), Err(Error::Domain(_))));
        assert!(matches!(ev("1/(s-t)", 0.5, 0.5), Err(Error::Domain(_))));
        assert!(matches!(ev("(-1)^0.5", 0.5, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_expr("s*(").unwrap_err(),
            Error::Parse {
                offset: 3,
                message: "expected a number, variable, function or `(`, found end of input"
                    .into()
            }
        );
        assert!(matches!(parse_expr("(s+t"), Err(Error::Parse { offset: 4, .. })));
        assert!(matches!(parse_expr("s t"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(parse_expr("s # t"), Err(Error::Parse { offset: 2, .. })));
        assert!(matches!(parse_expr("sin s"), Err(Error::Parse { offset: 4, .. })));
        assert!(matches!(parse_expr(""), Err(Error::Parse { offset: 0, .. })));
        assert_eq!(
            parse_expr("s + foo(t)").unwrap_err(),
            Error::UnknownIdentifier {
                name: "foo".into(),
                offset: 4
            }
        );
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-10.0f64..10.0).prop_map(Expr::Num),
            Just(Expr::Var(Var::S)),
            Just(Expr::Var(Var::T)),
            Just(Expr::Pi),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
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
                    .prop_map(|(op, l, r)| Expr::Binary(op, Box::new(l), Box::new(r))),
                (
                    prop_oneof![
                        Just(Func::Sin),
                        Just(Func::Cos),
                        Just(Func::Exp),
                        Just(Func::Log),
                        Just(Func::Sqrt),
                        Just(Func::Abs)
                    ],
                    inner
                )
                    .prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr(), samples in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 100)) {
            let back = parse_expr(&e.to_string()).unwrap();
            for (s, t) in samples {
                match (e.eval(s, t), back.eval(s, t)) {
                    (Ok(a), Ok(b)) => {
                        if a.is_finite() {
                            prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
                        } else {
                            prop_assert!(a == b || (a.is_nan() && b.is_nan()));
                        }
                    }
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "mismatch {:?} vs {:?}", a, b),
                }
            }
        }
    }
}
