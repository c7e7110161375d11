//! Recursive-descent parser for operator expressions:
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor ("*" factor)*
//! factor := atom ("^" UINT)?
//! atom   := RATIONAL | "L(" ID ")" | "Ls(" ID ")" | "V(" ID ")"
//!         | "adj(" expr ")" | "(" expr ")"
//! ```
//!
//! `L(x)` and `Ls(x)` accept a vertex id as well, giving `L_x`.

use std::sync::Arc;

use gwp_core::scalar::parse_rational;
use gwp_core::{Element, Graph, PathWord, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown id `{id}` at position {pos}")]
    UnknownId { pos: usize, id: String },
    #[error("type error at position {pos}: {msg}")]
    Type { pos: usize, msg: String },
}

/// Scalars stay scalars until they meet an operator, so `3/2 * 2` is not
/// turned into a multiple of the identity early.
#[derive(Clone)]
enum Value {
    Scalar(Rational),
    Op(Element),
}

impl Value {
    fn into_element(self, g: &Arc<Graph>) -> Element {
        match self {
            Value::Scalar(q) => Element::identity(g.clone()).scale(&q),
            Value::Op(e) => e,
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    graph: &'a Arc<Graph>,
}

pub fn parse_element_expr(text: &str, graph: &Arc<Graph>) -> Result<Element, ExprError> {
    let mut p = Parser { text, pos: 0, graph };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(v.into_element(graph))
}

fn is_id_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek().filter(|c| c.is_whitespace()) {
            self.pos += c.len_utf8();
        }
    }

    fn syntax(&self, msg: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ExprError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{token}`")))
        }
    }

    fn expr(&mut self) -> Result<Value, ExprError> {
        let mut acc = self.term()?;
        loop {
            let negate = if self.eat("+") {
                false
            } else if self.eat("-") {
                true
            } else {
                return Ok(acc);
            };
            let rhs = self.term()?;
            acc = match (acc, rhs) {
                (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(if negate { a - b } else { a + b }),
                (a, b) => {
                    let (a, b) = (a.into_element(self.graph), b.into_element(self.graph));
                    Value::Op(if negate { &a - &b } else { &a + &b })
                }
            };
        }
    }

    fn term(&mut self) -> Result<Value, ExprError> {
        let mut acc = self.factor()?;
        while self.eat("*") {
            let rhs = self.factor()?;
            acc = match (acc, rhs) {
                (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a * b),
                (Value::Scalar(a), Value::Op(b)) => Value::Op(b.scale(&a)),
                (Value::Op(a), Value::Scalar(b)) => Value::Op(a.scale(&b)),
                (Value::Op(a), Value::Op(b)) => Value::Op(&a * &b),
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Value, ExprError> {
        let base = self.atom()?;
        if !self.eat("^") {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        let len = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        let after = self.rest()[len..].chars().next();
        if len == 0 || after.is_some_and(|c| c == '.' || c == '/' || is_id_char(c)) {
            return Err(ExprError::Type {
                pos: start,
                msg: "exponent must be a nonnegative integer".into(),
            });
        }
        let exp: u32 = self.rest()[..len].parse().map_err(|_| ExprError::Type {
            pos: start,
            msg: "exponent too large".into(),
        })?;
        self.pos += len;
        Ok(match base {
            Value::Scalar(q) => Value::Scalar(num_traits::pow(q, exp as usize)),
            Value::Op(e) => Value::Op(e.pow(exp)),
        })
    }

    fn atom(&mut self) -> Result<Value, ExprError> {
        self.skip_ws();
        let start = self.pos;
        let mut chars = self.rest().chars();
        let first = chars.next();
        let second = chars.next();
        if first.is_some_and(|c| c.is_ascii_digit())
            || (first == Some('-') && second.is_some_and(|c| c.is_ascii_digit()))
        {
            return self.rational();
        }
        for (keyword, kind) in [("adj(", 0), ("Ls(", 1), ("L(", 2), ("V(", 3)] {
            if self.rest().starts_with(keyword) {
                self.pos += keyword.len();
                if kind == 0 {
                    let inner = self.expr()?;
                    self.expect(")")?;
                    return Ok(match inner {
                        Value::Scalar(q) => Value::Scalar(q),
                        Value::Op(e) => Value::Op(e.adjoint()),
                    });
                }
                let (id_pos, id) = self.id()?;
                self.expect(")")?;
                return self.generator(kind, id_pos, &id).map(Value::Op);
            }
        }
        if self.eat("(") {
            let inner = self.expr()?;
            self.expect(")")?;
            return Ok(inner);
        }
        self.pos = start;
        Err(self.syntax(match first {
            None => "unexpected end of input",
            Some(_) => "expected a number, L(..), Ls(..), V(..), adj(..) or `(`",
        }))
    }

    fn rational(&mut self) -> Result<Value, ExprError> {
        let start = self.pos;
        let mut end = start;
        let bytes = self.text.as_bytes();
        if bytes[end] == b'-' {
            end += 1;
        }
        let digits = |mut i: usize| {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            i
        };
        end = digits(end);
        if end < bytes.len() && (bytes[end] == b'/' || bytes[end] == b'.') {
            let next = digits(end + 1);
            if next == end + 1 {
                self.pos = end + 1;
                return Err(self.syntax("expected digits"));
            }
            end = next;
        }
        let q = parse_rational(&self.text[start..end]).ok_or_else(|| ExprError::Syntax {
            pos: start,
            msg: "invalid number".into(),
        })?;
        self.pos = end;
        Ok(Value::Scalar(q))
    }

    fn id(&mut self) -> Result<(usize, String), ExprError> {
        self.skip_ws();
        let start = self.pos;
        let len = self.rest().chars().take_while(|&c| is_id_char(c)).count();
        if len == 0 {
            return Err(self.syntax("expected an id"));
        }
        self.pos += len;
        Ok((start, self.text[start..start + len].to_string()))
    }

    fn generator(&self, kind: u8, pos: usize, id: &str) -> Result<Element, ExprError> {
        let g = self.graph;
        let unknown = || ExprError::UnknownId {
            pos,
            id: id.to_string(),
        };
        if kind == 3 {
            return g.vertex(id).map(|v| Element::vertex(g.clone(), v)).map_err(|_| unknown());
        }
        let word = if let Ok(v) = g.vertex(id) {
            g.vertex_unit(g.vertex_id(v)).map_err(|_| unknown())?
        } else {
            g.path(&[id]).map_err(|_| unknown())?
        };
        let plain = Element::creation(g.clone(), word).expect("single generators are admissible");
        Ok(if kind == 1 { plain.adjoint() } else { plain })
    }
}

/// Builds `L_w` or `L_w*` for a flag-syntax word.
pub fn word_element(graph: &Arc<Graph>, w: &PathWord, starred: bool) -> Element {
    let plain = Element::creation(graph.clone(), w.clone()).expect("words come from this graph");
    if starred {
        plain.adjoint()
    } else {
        plain
    }
}
