//! Arithmetic expressions over `x1..xn` used by declarative problem files.
//!
//! Operators `+ - * / ^` (with `^` right-associative and binding tighter than
//! unary minus), parentheses, numeric literals, and the functions
//! `sin cos exp log abs sqrt max`. `log` is the natural logarithm and `max`
//! takes two or more arguments.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// 0-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
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
    Abs,
    Sqrt,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (column {})", self.msg, self.pos + 1)
    }
}

impl std::error::Error for ExprError {}

impl Expr {
    /// Parses `src`, accepting variables `x1..x{n}`.
    pub fn parse(src: &str, n: usize) -> Result<Expr, ExprError> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, i: 0, n };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some((pos, t)) => Err(ExprError {
                pos,
                msg: format!("unexpected `{t}`"),
            }),
        }
    }

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
            Expr::Call(f, args) => {
                let v = |k: usize| args[k].eval(x);
                match f {
                    Func::Sin => v(0).sin(),
                    Func::Cos => v(0).cos(),
                    Func::Exp => v(0).exp(),
                    Func::Log => v(0).ln(),
                    Func::Abs => v(0).abs(),
                    Func::Sqrt => v(0).sqrt(),
                    Func::Max => args
                        .iter()
                        .map(|a| a.eval(x))
                        .fold(f64::NEG_INFINITY, f64::max),
                }
            }
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "{v}"),
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| ExprError {
                pos: start,
                msg: format!("bad number `{text}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ExprError {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    i: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, &Tok)> {
        self.tokens.get(self.i).map(|(p, t)| (*p, t))
    }

    fn end_pos(&self) -> usize {
        self.tokens.last().map(|(p, _)| p + 1).unwrap_or(0)
    }

    fn eat(&mut self, op: char) -> bool {
        if matches!(self.peek(), Some((_, Tok::Op(c))) if *c == op) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if self.eat(op) {
            Ok(())
        } else {
            let pos = self.peek().map(|(p, _)| p).unwrap_or_else(|| self.end_pos());
            Err(ExprError {
                pos,
                msg: format!("expected `{op}`"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let Some((pos, tok)) = self.peek() else {
            return Err(ExprError {
                pos: self.end_pos(),
                msg: "unexpected end of expression".into(),
            });
        };
        let tok = tok.clone();
        self.i += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    let ok = match func {
                        Func::Max => args.len() >= 2,
                        _ => args.len() == 1,
                    };
                    if !ok {
                        return Err(ExprError {
                            pos,
                            msg: format!("wrong number of arguments to `{name}`"),
                        });
                    }
                    return Ok(Expr::Call(func, args));
                }
                let idx = name
                    .strip_prefix('x')
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&k| k >= 1 && k <= self.n);
                match idx {
                    Some(k) => Ok(Expr::Var(k - 1)),
                    None => Err(ExprError {
                        pos,
                        msg: format!("unknown identifier `{name}`"),
                    }),
                }
            }
            other => Err(ExprError {
                pos,
                msg: format!("unexpected `{other}`"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: &[f64]) -> f64 {
        Expr::parse(src, x.len()).unwrap().eval(x)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", &[]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[]), 512.0);
        assert_eq!(ev("-x1^2", &[3.0]), -9.0);
        assert_eq!(ev("(x1 - x2) / 2", &[5.0, 1.0]), 2.0);
        assert_eq!(ev("2*-x1", &[1.5]), -3.0);
        assert_eq!(ev("1e-6*x1^3", &[10.0]), 1e-3);
    }

    #[test]
    fn functions() {
        assert_eq!(ev("max(x1, 0)", &[-2.0]), 0.0);
        assert_eq!(ev("max(1, 5, 3)", &[]), 5.0);
        assert_eq!(ev("abs(x1) + sqrt(4)", &[-1.0]), 3.0);
        assert!((ev("log(exp(2))", &[]) - 2.0).abs() < 1e-15);
        assert!((ev("sin(0) + cos(0)", &[]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(Expr::parse("x3", 2).is_err());
        assert!(Expr::parse("x0", 2).is_err());
        assert!(Expr::parse("sin(x1, x2)", 2).is_err());
        assert!(Expr::parse("max(x1)", 2).is_err());
        assert!(Expr::parse("1 +", 2).is_err());
        assert!(Expr::parse("(1", 2).is_err());
        assert!(Expr::parse("1 $ 2", 2).is_err());
        assert!(Expr::parse("y", 2).is_err());
    }
}
