//! Arithmetic expression parser for user-supplied graph heights.
//!
//! Grammar: `+ - * / ^` with usual precedence (`^` right-associative),
//! unary minus, parentheses, the constants `pi` and `e`, chart variables
//! `x1..x4` (aliases `x`, `y`, `z`, `w`), and the functions sin, cos, tan,
//! exp, ln, log, sqrt, sinh, cosh, tanh, atan. Expressions evaluate over
//! jets, so the graph they define has exact derivatives.

use biharm_core::jet::{Analytic, Jet2};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Constant(f64),
    Variable(usize),
    Unary(UnaryFn, Box<Expr>),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UnaryFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Atan,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (at byte {})", self.message, self.position)
    }
}

impl Expr {
    /// Parses and checks that only the first `dim` variables appear.
    pub fn parse(text: &str, dim: usize) -> Result<Expr, ParseError> {
        let mut p = Parser {
            bytes: text.as_bytes(),
            pos: 0,
            dim,
        };
        p.skip_ws();
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, vars: &[Jet2]) -> Jet2 {
        match self {
            Expr::Constant(v) => Jet2::constant(*v),
            Expr::Variable(i) => vars[*i],
            Expr::Neg(e) => -e.eval(vars),
            Expr::Unary(f, e) => {
                let v = e.eval(vars);
                match f {
                    UnaryFn::Sin => v.sin(),
                    UnaryFn::Cos => v.cos(),
                    UnaryFn::Tan => v.tan(),
                    UnaryFn::Exp => v.exp(),
                    UnaryFn::Ln => v.ln(),
                    UnaryFn::Sqrt => v.sqrt(),
                    UnaryFn::Sinh => v.sinh(),
                    UnaryFn::Cosh => v.cosh(),
                    UnaryFn::Tanh => v.tanh(),
                    UnaryFn::Atan => v.atan(),
                }
            }
            Expr::Binary(BinOp::Pow, a, b) => {
                let base = a.eval(vars);
                // constant exponents keep jets exact (integer powers) or at
                // least avoid the log route
                if let Expr::Constant(e) = b.as_ref() {
                    if e.fract() == 0.0 && e.abs() < 64.0 {
                        return base.powi(*e as i32);
                    }
                    return base.powf(*e);
                }
                (b.eval(vars) * base.ln()).exp()
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(vars), b.eval(vars));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => unreachable!("handled above"),
                }
            }
        }
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Binary(BinOp::Add, Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Binary(BinOp::Sub, Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Binary(BinOp::Mul, Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Binary(BinOp::Div, Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.eat(b'^') {
            let exp = self.factor()?; // right associative
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.err("expected a number, variable, function or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' {
                self.pos += 1;
                // exponent sign
                if (c == b'e' || c == b'E')
                    && matches!(self.peek(), Some(b'+') | Some(b'-'))
                {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| ParseError {
            position: start,
            message: format!("invalid number literal '{text}'"),
        })?;
        self.skip_ws();
        Ok(Expr::Constant(value))
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().to_string();
        self.skip_ws();

        let var = match name.as_str() {
            "x" | "x1" => Some(0),
            "y" | "x2" => Some(1),
            "z" | "x3" => Some(2),
            "w" | "x4" => Some(3),
            _ => None,
        };
        if let Some(i) = var {
            if i >= self.dim {
                return Err(ParseError {
                    position: start,
                    message: format!("variable '{name}' exceeds the chart dimension {}", self.dim),
                });
            }
            return Ok(Expr::Variable(i));
        }
        match name.as_str() {
            "pi" => return Ok(Expr::Constant(std::f64::consts::PI)),
            "e" => return Ok(Expr::Constant(std::f64::consts::E)),
            _ => {}
        }
        let f = match name.as_str() {
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "tan" => UnaryFn::Tan,
            "exp" => UnaryFn::Exp,
            "ln" | "log" => UnaryFn::Ln,
            "sqrt" => UnaryFn::Sqrt,
            "sinh" => UnaryFn::Sinh,
            "cosh" => UnaryFn::Cosh,
            "tanh" => UnaryFn::Tanh,
            "atan" => UnaryFn::Atan,
            _ => {
                return Err(ParseError {
                    position: start,
                    message: format!("unknown identifier '{name}'"),
                })
            }
        };
        if !self.eat(b'(') {
            return Err(self.err("expected '(' after function name"));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.err("expected ')'"));
        }
        Ok(Expr::Unary(f, Box::new(arg)))
    }
}
