//! Arithmetic expressions in `n` for bottleneck thresholds, e.g. `n/16`,
//! `2*log2(n)^2` or `sqrt n`.
//!
//! Grammar: numbers, `n`, `+ - * / ^`, parentheses and the functions `ln`,
//! `log` (natural), `log2` and `sqrt`, whose argument may be parenthesised
//! or a single atom.

use std::fmt;
use std::str::FromStr;

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Ln,
    Log2,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    N,
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, n: usize) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::N => n as f64,
            Expr::Neg(e) => -e.eval(n),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(n), b.eval(n));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    _ => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let x = e.eval(n);
                match f {
                    Func::Ln => x.ln(),
                    Func::Log2 => x.log2(),
                    Func::Sqrt => x.sqrt(),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::N => f.write_str("n"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {op} {b})"),
            Expr::Call(func, e) => {
                let name = match func {
                    Func::Ln => "ln",
                    Func::Log2 => "log2",
                    Func::Sqrt => "sqrt",
                };
                write!(f, "{name}({e})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, AnalysisError> {
    let bytes: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.' || bytes[i] == 'e') {
                i += 1;
            }
            let text: String = bytes[start..i].iter().collect();
            let x = text.parse().map_err(|_| err(start, format!("bad number `{text}`")))?;
            out.push((start, Tok::Num(x)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(bytes[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(err(i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

fn err(pos: usize, msg: String) -> AnalysisError {
    AnalysisError::Domain(format!("expression, column {}: {msg}", pos + 1))
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, AnalysisError> {
        let mut e = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(c @ ('+' | '-'))) => *c,
                _ => return Ok(e),
            };
            self.i += 1;
            e = Expr::Bin(op, Box::new(e), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, AnalysisError> {
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(c @ ('*' | '/'))) => *c,
                _ => return Ok(e),
            };
            self.i += 1;
            e = Expr::Bin(op, Box::new(e), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, AnalysisError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, AnalysisError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(x)) => {
                self.i += 1;
                Ok(Expr::Num(x))
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                let func = match name.as_str() {
                    "n" => return Ok(Expr::N),
                    "ln" | "log" => Func::Ln,
                    "log2" => Func::Log2,
                    "sqrt" => Func::Sqrt,
                    _ => return Err(err(pos, format!("unknown name `{name}`"))),
                };
                Ok(Expr::Call(func, Box::new(self.atom()?)))
            }
            Some(Tok::Op('(')) => {
                self.i += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(err(self.pos(), "expected `)`".into()));
                }
                Ok(e)
            }
            _ => Err(err(pos, "expected a number, `n`, a function or `(`".into())),
        }
    }
}

impl FromStr for Expr {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            toks: lex(s)?,
            i: 0,
            end: s.chars().count(),
        };
        let e = p.expr()?;
        if p.i != p.toks.len() {
            return Err(err(p.pos(), "trailing input".into()));
        }
        Ok(e)
    }
}
