use std::collections::BTreeSet;

use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp};

/// Function names accepted in call position.
pub const FUNCTIONS: [&str; 4] = ["exp", "ln", "sqrt", "abs"];

const RESERVED: [&str; 3] = ["u", "pi", "e"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}; valid names: {}", valid.join(", "))]
    UnknownIdentifier { name: String, offset: usize, valid: Vec<String> },
    #[error("unknown function `{name}` at byte {offset}; valid functions: {}", FUNCTIONS.join(", "))]
    UnknownFunction { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let tok = lx.next()?;
            let done = tok.0 == Tok::End;
            out.push(tok);
            if done {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self, at: usize) -> Option<u8> {
        self.src.as_bytes().get(at).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while let Some(b) = self.peek_byte(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
        let start = self.pos;
        let Some(b) = self.peek_byte(start) else {
            return Ok((Tok::End, start));
        };
        match b {
            b'0'..=b'9' | b'.' => self.number(start),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = start;
                while let Some(c) = self.peek_byte(end) {
                    if c.is_ascii_alphanumeric() || c == b'_' {
                        end += 1;
                    } else {
                        break;
                    }
                }
                self.pos = end;
                Ok((Tok::Ident(self.src[start..end].to_owned()), start))
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Ok((Tok::Op(b as char), start))
            }
            b'(' => {
                self.pos += 1;
                Ok((Tok::LParen, start))
            }
            b')' => {
                self.pos += 1;
                Ok((Tok::RParen, start))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                Err(ParseError::Syntax { offset: start, message: format!("unexpected character `{ch}`") })
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let digits = |lx: &Lexer, mut at: usize| {
            while matches!(lx.peek_byte(at), Some(b'0'..=b'9')) {
                at += 1;
            }
            at
        };
        let mut end = digits(self, start);
        if self.peek_byte(end) == Some(b'.') {
            end = digits(self, end + 1);
        }
        // exponent only when digits follow, so `2e` stays a syntax error
        // rather than silently swallowing the constant e
        if matches!(self.peek_byte(end), Some(b'e' | b'E')) {
            let mut at = end + 1;
            if matches!(self.peek_byte(at), Some(b'+' | b'-')) {
                at += 1;
            }
            if matches!(self.peek_byte(at), Some(b'0'..=b'9')) {
                end = digits(self, at);
            }
        }
        let text = &self.src[start..end];
        self.pos = end;
        text.parse::<f64>()
            .map(|v| (Tok::Num(v), start))
            .map_err(|_| ParseError::Syntax { offset: start, message: format!("malformed number `{text}`") })
    }
}

struct Parser<'p> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    allowed: Option<&'p BTreeSet<String>>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { offset: self.offset(), message: message.into() })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::unary(UnaryOp::Neg, self.unary()?))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            // right operand is a full unary so that u^-p and u^2^3 work
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.syntax("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, offset),
            Tok::End => Err(ParseError::Syntax { offset, message: "unexpected end of input".into() }),
            Tok::RParen => Err(ParseError::Syntax { offset, message: "unexpected `)`".into() }),
            Tok::Op(c) => Err(ParseError::Syntax { offset, message: format!("unexpected operator `{c}`") }),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::LParen {
            let op = match name.as_str() {
                "exp" => UnaryOp::Exp,
                "ln" => UnaryOp::Ln,
                "sqrt" => UnaryOp::Sqrt,
                "abs" => UnaryOp::Abs,
                _ => return Err(ParseError::UnknownFunction { name, offset }),
            };
            self.bump();
            let arg = self.expr()?;
            if *self.peek() != Tok::RParen {
                return self.syntax(format!("expected `)` to close {}(", op.name()));
            }
            self.bump();
            return Ok(Expr::unary(op, arg));
        }
        match name.as_str() {
            "u" => Ok(Expr::Var),
            "pi" => Ok(Expr::Pi),
            "e" => Ok(Expr::E),
            f if FUNCTIONS.contains(&f) => Err(ParseError::Syntax {
                offset,
                message: format!("function `{f}` needs an argument in parentheses"),
            }),
            _ => match self.allowed {
                Some(allowed) if !allowed.contains(&name) => {
                    let valid =
                        RESERVED.iter().map(|s| s.to_string()).chain(allowed.iter().cloned()).collect();
                    Err(ParseError::UnknownIdentifier { name, offset, valid })
                }
                _ => Ok(Expr::Param(name)),
            },
        }
    }
}

fn run(text: &str, allowed: Option<&BTreeSet<String>>) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0, allowed };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax("unexpected trailing input");
    }
    Ok(e)
}

/// Parses an infix expression. Any identifier that is not `u`, `pi`, `e`
/// or a function name becomes a named parameter.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    run(text, None)
}

/// Like [`parse`], but only the names in `params` are accepted as
/// parameters.
pub fn parse_with_params(text: &str, params: &BTreeSet<String>) -> Result<Expr, ParseError> {
    run(text, Some(params))
}
