//! Simple types over a single base type, and Church-style type inference.

use std::collections::HashMap;
use std::fmt;

use crate::reduce::Trace;
use crate::syntax::{Name, Term};

/// A simple type: the base type `o` or an arrow between two types.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SimpleType {
    Base,
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn arrow(dom: SimpleType, cod: SimpleType) -> SimpleType {
        SimpleType::Arrow(Box::new(dom), Box::new(cod))
    }

    /// Number of arrows along the rightmost path (`o` has order 0).
    pub fn arity(&self) -> usize {
        match self {
            SimpleType::Base => 0,
            SimpleType::Arrow(_, cod) => 1 + cod.arity(),
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base => write!(f, "o"),
            SimpleType::Arrow(dom, cod) => {
                // Arrows associate to the right, so only the domain needs parens.
                match dom.as_ref() {
                    SimpleType::Arrow(..) => write!(f, "({}) -> {}", dom, cod),
                    SimpleType::Base => write!(f, "{} -> {}", dom, cod),
                }
            }
        }
    }
}

/// A typing context mapping (free) variable names to simple types.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeContext {
    bindings: HashMap<Name, SimpleType>,
}

impl TypeContext {
    pub fn new() -> TypeContext {
        TypeContext::default()
    }

    pub fn bind(&mut self, name: Name, ty: SimpleType) {
        self.bindings.insert(name, ty);
    }

    pub fn lookup(&self, name: &Name) -> Option<&SimpleType> {
        self.bindings.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &SimpleType)> {
        self.bindings.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl FromIterator<(Name, SimpleType)> for TypeContext {
    fn from_iter<I: IntoIterator<Item = (Name, SimpleType)>>(iter: I) -> TypeContext {
        TypeContext {
            bindings: iter.into_iter().collect(),
        }
    }
}

/// Type errors, with enough context to point at the offending subterm.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TypeError {
    #[error("unbound variable {0}")]
    Unbound(Name),
    #[error("binder {0} has no type annotation")]
    MissingAnnotation(Name),
    #[error("in `{at}`: applied function has base type, not an arrow")]
    NotAFunction { at: String },
    #[error("in `{at}`: argument has type {found}, expected {expected}")]
    ArgumentMismatch {
        at: String,
        expected: SimpleType,
        found: SimpleType,
    },
}

/// Infers the simple type of `t` in `ctx`.
///
/// Inference is Church-style: every binder must carry an annotation, so the
/// type is unique when it exists.
pub fn infer(t: &Term, ctx: &TypeContext) -> Result<SimpleType, TypeError> {
    match t {
        Term::Var(x) => ctx
            .lookup(x)
            .cloned()
            .ok_or_else(|| TypeError::Unbound(x.clone())),
        Term::Abs(b, body) => {
            let dom = b
                .ann
                .clone()
                .ok_or_else(|| TypeError::MissingAnnotation(b.name.clone()))?;
            let mut inner = ctx.clone();
            inner.bind(b.name.clone(), dom.clone());
            let cod = infer(body, &inner)?;
            Ok(SimpleType::arrow(dom, cod))
        }
        Term::App(fun, arg) => {
            let fun_ty = infer(fun, ctx)?;
            let arg_ty = infer(arg, ctx)?;
            match fun_ty {
                SimpleType::Base => Err(TypeError::NotAFunction { at: t.to_string() }),
                SimpleType::Arrow(dom, cod) => {
                    if *dom == arg_ty {
                        Ok(*cod)
                    } else {
                        Err(TypeError::ArgumentMismatch {
                            at: t.to_string(),
                            expected: *dom,
                            found: arg_ty,
                        })
                    }
                }
            }
        }
    }
}

/// Checks that every term along a trace has the same type as the start.
///
/// Returns the common type on success, or the index of the first step that
/// fails to preserve it.
pub fn check_subject_reduction(
    tr: &Trace,
    ctx: &TypeContext,
) -> Result<SimpleType, (usize, TypeError)> {
    let ty = infer(&tr.start, ctx).map_err(|e| (0, e))?;
    for (i, step) in tr.steps.iter().enumerate() {
        match infer(&step.result, ctx) {
            Ok(t) if t == ty => {}
            Ok(t) => {
                return Err((
                    i + 1,
                    TypeError::ArgumentMismatch {
                        at: step.result.to_string(),
                        expected: ty,
                        found: t,
                    },
                ))
            }
            Err(e) => return Err((i + 1, e)),
        }
    }
    Ok(ty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_term, parse_type, parse_type_context};

    #[test]
    fn display_round_trips_through_parse() {
        for s in [
            "o",
            "o -> o",
            "(o -> o) -> o",
            "o -> o -> o",
            "((o -> o) -> o) -> o",
        ] {
            let ty = parse_type(s).unwrap();
            assert_eq!(ty.to_string(), s);
            assert_eq!(parse_type(&ty.to_string()).unwrap(), ty);
        }
    }

    #[test]
    fn arrow_is_right_associative() {
        let ty = parse_type("o -> o -> o").unwrap();
        assert_eq!(
            ty,
            SimpleType::arrow(
                SimpleType::Base,
                SimpleType::arrow(SimpleType::Base, SimpleType::Base)
            )
        );
    }

    #[test]
    fn infers_identity() {
        let t = parse_term(r"\x:o. x").unwrap();
        let ty = infer(&t, &TypeContext::new()).unwrap();
        assert_eq!(ty.to_string(), "o -> o");
    }

    #[test]
    fn infers_application_under_context() {
        let ctx = parse_type_context("y:o, f:o -> o").unwrap();
        let t = parse_term(r"f ((\x:o. x) y)").unwrap();
        assert_eq!(infer(&t, &ctx).unwrap(), SimpleType::Base);
    }

    #[test]
    fn rejects_unannotated_binder() {
        let t = parse_term(r"\x. x").unwrap();
        assert!(matches!(
            infer(&t, &TypeContext::new()),
            Err(TypeError::MissingAnnotation(_))
        ));
    }

    #[test]
    fn rejects_argument_mismatch() {
        let ctx = parse_type_context("y:o").unwrap();
        let t = parse_term(r"(\f:o -> o. f y) y").unwrap();
        match infer(&t, &ctx) {
            Err(TypeError::ArgumentMismatch {
                expected, found, ..
            }) => {
                assert_eq!(expected.to_string(), "o -> o");
                assert_eq!(found.to_string(), "o");
            }
            other => panic!("expected mismatch, got {:?}", other),
        }
    }

    #[test]
    fn rejects_base_in_function_position() {
        let ctx = parse_type_context("y:o").unwrap();
        let t = parse_term("y y").unwrap();
        assert!(matches!(
            infer(&t, &ctx),
            Err(TypeError::NotAFunction { .. })
        ));
    }
}
