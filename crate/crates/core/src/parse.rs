//! Parsing of terms, types, and typing contexts.
//!
//! Grammar (whitespace-insensitive between tokens):
//!
//! ```text
//! term ::= abs | app
//! abs  ::= '\' name (':' type)? '.' term
//! app  ::= atom+                       (left-associative)
//! atom ::= name | '(' term ')'
//! name ::= [A-Za-z][A-Za-z0-9_]* ('#' [0-9]+)?
//! type ::= 'o' | type '->' type | '(' type ')'   (arrow right-associative)
//! ```
//!
//! An abstraction is not an atom, so it needs parentheses in argument or
//! function position; its body extends as far right as possible.

use std::fmt;

use crate::syntax::{Binder, Name, Term};
use crate::types::{SimpleType, TypeContext};

/// A parse failure at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.pos, self.msg)
    }
}

/// Parses a term; the whole input must be consumed.
pub fn parse_term(input: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(input);
    let t = p.term()?;
    p.expect_end()?;
    Ok(t)
}

/// Parses a simple type; the whole input must be consumed.
pub fn parse_type(input: &str) -> Result<SimpleType, ParseError> {
    let mut p = Parser::new(input);
    let ty = p.ty()?;
    p.expect_end()?;
    Ok(ty)
}

/// Parses a typing context written as `x:o, f:o -> o`. Empty input gives the
/// empty context.
pub fn parse_type_context(input: &str) -> Result<TypeContext, ParseError> {
    let mut p = Parser::new(input);
    let mut ctx = TypeContext::new();
    p.skip_ws();
    if p.at_end() {
        return Ok(ctx);
    }
    loop {
        let name = p.name()?;
        p.skip_ws();
        p.expect(':')?;
        let ty = p.ty()?;
        ctx.bind(name, ty);
        p.skip_ws();
        if p.at_end() {
            return Ok(ctx);
        }
        p.expect(',')?;
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(input: &str) -> Parser {
        Parser {
            chars: input.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{}`", c))
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else if self.peek() == Some('\\') {
            self.err("unexpected `\\`; an abstraction used as an argument needs parentheses")
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {}
            _ => return self.err("expected a name"),
        }
        let mut base = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            base.push(self.bump().unwrap());
        }
        let mut index = 0u32;
        if self.peek() == Some('#') {
            self.bump();
            let start = self.pos;
            let mut digits = String::new();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                digits.push(self.bump().unwrap());
            }
            if digits.is_empty() {
                return Err(ParseError {
                    pos: start,
                    msg: "expected digits after `#`".into(),
                });
            }
            index = digits.parse().map_err(|_| ParseError {
                pos: start,
                msg: "name index out of range".into(),
            })?;
        }
        Ok(Name { base, index })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        if self.peek() == Some('\\') {
            self.abs()
        } else {
            self.app()
        }
    }

    fn abs(&mut self) -> Result<Term, ParseError> {
        self.expect('\\')?;
        let name = self.name()?;
        self.skip_ws();
        let ann = if self.peek() == Some(':') {
            self.bump();
            Some(self.ty()?)
        } else {
            None
        };
        self.expect('.')?;
        let body = self.term()?;
        Ok(Term::abs(Binder { name, ann }, body))
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut out = match self.atom()? {
            Some(t) => t,
            None => return self.err("expected a term"),
        };
        while let Some(next) = self.atom()? {
            out = Term::app(out, next);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Option<Term>, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump();
                let t = self.term()?;
                self.expect(')')?;
                Ok(Some(t))
            }
            Some(c) if c.is_ascii_alphabetic() => Ok(Some(Term::Var(self.name()?))),
            _ => Ok(None),
        }
    }

    fn ty(&mut self) -> Result<SimpleType, ParseError> {
        let lhs = self.ty_atom()?;
        self.skip_ws();
        if self.peek() == Some('-') {
            self.bump();
            if self.peek() != Some('>') {
                return self.err("expected `->`");
            }
            self.bump();
            let rhs = self.ty()?;
            Ok(SimpleType::arrow(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self) -> Result<SimpleType, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('o') => {
                self.bump();
                // `o` must stand alone: `ox` is not a type.
                if matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.pos -= 1;
                    self.err("expected a type (`o`, an arrow, or parentheses)")
                } else {
                    Ok(SimpleType::Base)
                }
            }
            Some('(') => {
                self.bump();
                let ty = self.ty()?;
                self.expect(')')?;
                Ok(ty)
            }
            _ => self.err("expected a type (`o`, an arrow, or parentheses)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn application_is_left_associative() {
        let t = parse_term("f x y").unwrap();
        assert_eq!(
            t,
            Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y"))
        );
    }

    #[test]
    fn abstraction_body_extends_right() {
        let t = parse_term(r"\x. x y z").unwrap();
        match t {
            Term::Abs(_, body) => assert_eq!(body.to_string(), "x y z"),
            _ => panic!("expected an abstraction"),
        }
    }

    #[test]
    fn indexed_names_round_trip() {
        let t = parse_term("x#12").unwrap();
        assert_eq!(t, Term::Var(Name::indexed("x", 12)));
        assert_eq!(t.to_string(), "x#12");
    }

    #[test]
    fn annotations_parse() {
        let t = parse_term(r"\f:(o -> o) -> o. \x:o. f (\y:o. x)").unwrap();
        assert_eq!(t.to_string(), r"\f:(o -> o) -> o. \x:o. f (\y:o. x)");
    }

    #[test]
    fn rejects_bare_abstraction_argument() {
        let e = parse_term(r"f \x. x").unwrap_err();
        assert!(e.msg.contains("parentheses"), "{e}");
    }

    #[test]
    fn rejects_dangling_input() {
        assert!(parse_term("x)").is_err());
        assert!(parse_term("(x").is_err());
        assert!(parse_term("").is_err());
        assert!(parse_term(r"\x").is_err());
        assert!(parse_term("x#").is_err());
    }

    #[test]
    fn error_positions_point_at_the_problem() {
        let e = parse_term("f (x").unwrap_err();
        assert_eq!(e.pos, 4);
    }

    #[test]
    fn type_context_parses() {
        let ctx = parse_type_context("x:o, f:o -> o").unwrap();
        assert_eq!(ctx.lookup(&Name::new("x")).unwrap().to_string(), "o");
        assert_eq!(ctx.lookup(&Name::new("f")).unwrap().to_string(), "o -> o");
        assert!(parse_type_context("").unwrap().is_empty());
        assert!(parse_type_context("x:").is_err());
        assert!(parse_type_context("x:o,").is_err());
    }

    #[test]
    fn rejects_identifier_styled_types() {
        assert!(parse_type("ox").is_err());
        assert!(parse_type("o ->").is_err());
        assert!(parse_type("x").is_err());
    }
}
