//! Declarative problem files.
//!
//! One `key: value` entry per line; `#` starts a comment. Keys:
//!
//! ```text
//! name:   MYPROB
//! n:      2
//! x0:     0 0
//! lower:  -2 -2          # optional, "inf"/"-inf" allowed
//! upper:  2 2            # optional
//! f:      x1 + x2
//! g:      x1^2 + x2^2 - 1   # g(x) <= 0, repeatable
//! h:      x1 - x2           # h(x) = 0, repeatable
//! linear: 1 1 <= 3          # a x <= b, repeatable
//! ```
//!
//! `n` must precede every line that mentions variables.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::problem::Problem;

pub fn load(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path)?;
    let fallback = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into());
    parse(&text, &fallback)
}

pub fn parse(text: &str, default_name: &str) -> Result<Problem> {
    let mut name = default_name.to_string();
    let mut n: Option<usize> = None;
    let mut x0 = None;
    let mut lower = None;
    let mut upper = None;
    let mut f = None;
    let mut g = Vec::new();
    let mut h = Vec::new();
    let mut linear = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| err("expected `key: value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "name" {
            name = value.to_string();
            continue;
        }
        if key == "n" {
            let v = value
                .parse::<usize>()
                .map_err(|_| err(format!("bad dimension `{value}`")))?;
            if v == 0 {
                return Err(err("dimension must be positive".into()));
            }
            n = Some(v);
            continue;
        }
        let dim = n.ok_or_else(|| err("`n` must come first".into()))?;
        let expr = |src: &str| Expr::parse(src, dim).map_err(|e| err(e.to_string()));
        match key {
            "x0" => x0 = Some(numbers(value, dim).map_err(err)?),
            "lower" => lower = Some(numbers(value, dim).map_err(err)?),
            "upper" => upper = Some(numbers(value, dim).map_err(err)?),
            "f" => f = Some(expr(value)?),
            "g" => g.push(expr(value)?),
            "h" => h.push(expr(value)?),
            "linear" => {
                let (lhs, rhs) = value
                    .split_once("<=")
                    .ok_or_else(|| err("linear rows read `a1 .. an <= b`".into()))?;
                let a = numbers(lhs, dim).map_err(err)?;
                let b = numbers(rhs, 1).map_err(err)?[0];
                linear.push((a, b));
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }

    let n = n.ok_or_else(|| Error::InvalidProblem("missing `n`".into()))?;
    let f = f.ok_or_else(|| Error::InvalidProblem("missing `f`".into()))?;
    let x0 = x0.ok_or_else(|| Error::InvalidProblem("missing `x0`".into()))?;
    let mut b = Problem::builder(name, n)
        .bounds(
            lower.unwrap_or_else(|| vec![f64::NEG_INFINITY; n]),
            upper.unwrap_or_else(|| vec![f64::INFINITY; n]),
        )
        .x0(x0);
    let f = Arc::new(f);
    b = b.objective(move |x| f.eval(x));
    for e in g {
        b = b.ineq(move |x| e.eval(x));
    }
    for e in h {
        b = b.eq(move |x| e.eval(x));
    }
    for (a, rhs) in linear {
        b = b.linear(a, rhs);
    }
    b.build()
}

fn numbers(text: &str, expected: usize) -> std::result::Result<Vec<f64>, String> {
    let v = text
        .split_whitespace()
        .map(|t| match t {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => t.parse::<f64>().map_err(|_| format!("bad number `{t}`")),
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if v.len() != expected {
        return Err(format!("expected {expected} numbers, found {}", v.len()));
    }
    Ok(v)
}
