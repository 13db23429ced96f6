//! A small scalar expression language for writing vector fields as text.
//!
//! ```text
//! field  := expr (";" expr)*
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" base)?
//! base   := number | "x" digits | func "(" expr ("," expr)* ")" | "(" expr ")" | "-" base
//! ```
//!
//! Variables are `x1 ... xn`. Functions are `log exp sqrt abs sin cos min max`.
//! There are no conditionals; non-smooth fields are written with `abs`, `min`,
//! `max`, `log` and `sqrt`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Log,
    Exp,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "log" => Func::Log,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

/// Parsed scalar expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index: `x1` is `Var(0)`.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Evaluate at `x`. Domain violations surface as NaN or infinity; callers
    /// decide whether that is a singularity.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Call(f, args) => match f {
                Func::Log => args[0].eval(x).ln(),
                Func::Exp => args[0].eval(x).exp(),
                Func::Sqrt => args[0].eval(x).sqrt(),
                Func::Abs => args[0].eval(x).abs(),
                Func::Sin => args[0].eval(x).sin(),
                Func::Cos => args[0].eval(x).cos(),
                Func::Min => args
                    .iter()
                    .map(|a| a.eval(x))
                    .fold(f64::INFINITY, nan_min),
                Func::Max => args
                    .iter()
                    .map(|a| a.eval(x))
                    .fold(f64::NEG_INFINITY, nan_max),
            },
        }
    }

    /// Largest variable index referenced, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) => e.arity(),
            Expr::Bin(_, a, b) => a.arity().max(b.arity()),
            Expr::Call(_, args) => args.iter().map(Expr::arity).max().unwrap_or(0),
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b == b.trunc() && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

// min/max that propagate NaN instead of swallowing it.
fn nan_min(acc: f64, v: f64) -> f64 {
    if acc.is_nan() || v.is_nan() {
        f64::NAN
    } else {
        acc.min(v)
    }
}

fn nan_max(acc: f64, v: f64) -> f64 {
    if acc.is_nan() || v.is_nan() {
        f64::NAN
    } else {
        acc.max(v)
    }
}

/// Prints in a fully parenthesised form that re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v >= 0.0 => write!(f, "{v:?}"),
            Expr::Num(v) => write!(f, "(-{:?})", -v),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Print a field as `expr; expr; ...`.
pub fn print_field(components: &[Expr]) -> String {
    components
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parse a `;`-separated list of `n` component expressions over `x1..xn`.
pub fn parse_field(text: &str, n: usize) -> Result<Vec<Expr>> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut p = Parser::new(text, n)?;
    let mut comps = vec![p.expr()?];
    while p.eat(&Tok::Semi) {
        comps.push(p.expr()?);
    }
    p.expect_end()?;
    if comps.len() != n {
        return Err(Error::Arity {
            expected: n,
            found: comps.len(),
        });
    }
    Ok(comps)
}

/// Parse a single scalar expression over `x1..xn`.
pub fn parse_expr(text: &str, n: usize) -> Result<Expr> {
    let mut p = Parser::new(text, n)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
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
    Comma,
    Semi,
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of input".into(),
        Some(Tok::Num(v)) => format!("number {v}"),
        Some(Tok::Ident(s)) => format!("`{s}`"),
        Some(t) => format!("{t:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((t, start));
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
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
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| Error::Syntax {
                pos: start,
                msg: format!("malformed number `{s}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(Error::Syntax {
                pos: start,
                msg: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
    n: usize,
}

impl Parser {
    fn new(text: &str, n: usize) -> Result<Self> {
        Ok(Self {
            toks: lex(text)?,
            at: 0,
            end: text.len(),
            n,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(Error::Syntax {
                pos: self.pos(),
                msg: format!("expected {what}, found {}", describe(self.peek())),
            })
        }
    }

    fn expect_end(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            t => Err(Error::Syntax {
                pos: self.pos(),
                msg: format!("unexpected {}", describe(t)),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.at += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.at += 1;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.eat(&Tok::Caret) {
            let exp = self.base()?;
            Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Minus) => {
                self.at += 1;
                Ok(Expr::Neg(Box::new(self.base()?)))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if let Some(idx) = variable_index(&name) {
                    if idx >= 1 && idx <= self.n {
                        return Ok(Expr::Var(idx - 1));
                    }
                    return Err(Error::UnknownIdentifier { name, pos });
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(Error::UnknownIdentifier { name, pos });
                };
                self.expect(&Tok::LParen, "`(` after function name")?;
                let mut args = vec![self.expr()?];
                while self.eat(&Tok::Comma) {
                    args.push(self.expr()?);
                }
                self.expect(&Tok::RParen, "`)`")?;
                if !func.variadic() && args.len() != 1 {
                    return Err(Error::Syntax {
                        pos,
                        msg: format!("{} takes one argument, got {}", func.name(), args.len()),
                    });
                }
                Ok(Expr::Call(func, args))
            }
            t => Err(Error::Syntax {
                pos,
                msg: format!("expected a number, variable, function or `(`, found {}", describe(t.as_ref())),
            }),
        }
    }
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval1(text: &str, x: &[f64]) -> f64 {
        parse_expr(text, x.len()).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval1("1 + 2 * 3", &[0.0]), 7.0);
        assert_eq!(eval1("8 / 4 / 2", &[0.0]), 1.0);
        assert_eq!(eval1("10 - 4 - 3", &[0.0]), 3.0);
        assert_eq!(eval1("2 ^ 3 * 2", &[0.0]), 16.0);
        assert_eq!(eval1("2 ^ -1", &[0.0]), 0.5);
        // unary minus binds tighter than ^
        assert_eq!(eval1("-x1^2", &[3.0]), 9.0);
        assert_eq!(eval1("-(x1^2)", &[3.0]), -9.0);
        assert_eq!(eval1("1.5e-1 + .5", &[0.0]), 0.65);
    }

    #[test]
    fn functions() {
        let x = [4.0, -2.0];
        assert_eq!(eval1("sqrt(x1)", &x), 2.0);
        assert_eq!(eval1("abs(x2)", &x), 2.0);
        assert_eq!(eval1("min(x1, x2, 0)", &x), -2.0);
        assert_eq!(eval1("max(x1, x2)", &x), 4.0);
        assert_eq!(eval1("log(exp(1))", &x), 1.0);
        assert!(eval1("log(x2)", &x).is_nan());
        assert!(eval1("max(log(x2), 1)", &x).is_nan());
    }

    #[test]
    fn field_examples() {
        let rot = parse_field("-x2; x1", 2).unwrap();
        assert_eq!(rot[0].eval(&[1.0, 0.0]), 0.0);
        assert_eq!(rot[1].eval(&[1.0, 0.0]), 1.0);
        let id = parse_field("x1; x2; x3", 3).unwrap();
        let p = [0.3, -1.2, 7.0];
        for (i, c) in id.iter().enumerate() {
            assert_eq!(c.eval(&p), p[i]);
        }
        let xlog = parse_field(
            "x1*log(sqrt(x1^2+x2^2)); x2*log(sqrt(x1^2+x2^2))",
            2,
        )
        .unwrap();
        let e = std::f64::consts::E;
        assert!((xlog[0].eval(&[e, 0.0]) - e).abs() < 1e-15);
        assert_eq!(xlog[1].eval(&[e, 0.0]), 0.0);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_field("x1 + ; x2", 2) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        match parse_field("x1; x3", 2) {
            Err(Error::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "x3");
                assert_eq!(pos, 4);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_field("tan(x1)", 1),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_field("x1; x2", 3),
            Err(Error::Arity { expected: 3, found: 2 })
        ));
        assert!(matches!(parse_field("x1^2^3", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field("(x1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field("sin(x1, x1)", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field("x1 # 2", 1), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_field("x0", 1), Err(Error::UnknownIdentifier { .. })));
    }

    fn arb_expr(n: usize) -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            (0..n).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 40, 3, |inner| {
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
                    .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
                (
                    prop_oneof![
                        Just(Func::Log),
                        Just(Func::Exp),
                        Just(Func::Sqrt),
                        Just(Func::Abs),
                        Just(Func::Sin),
                        Just(Func::Cos)
                    ],
                    inner.clone()
                )
                    .prop_map(|(f, a)| Expr::Call(f, vec![a])),
                (
                    prop_oneof![Just(Func::Min), Just(Func::Max)],
                    prop::collection::vec(inner, 1..4)
                )
                    .prop_map(|(f, args)| Expr::Call(f, args)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(
            comps in prop::collection::vec(arb_expr(3), 3),
            pts in prop::collection::vec(prop::array::uniform3(-5.0f64..5.0), 100),
        ) {
            let text = print_field(&comps);
            let back = parse_field(&text, 3).unwrap();
            prop_assert_eq!(&back, &comps);
            for p in &pts {
                for (a, b) in comps.iter().zip(&back) {
                    let (va, vb) = (a.eval(p), b.eval(p));
                    prop_assert!(va.to_bits() == vb.to_bits() || (va.is_nan() && vb.is_nan()));
                }
            }
        }
    }
}
