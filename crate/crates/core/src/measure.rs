//! A strictly decreasing measure for reduction of simply typed terms.
//!
//! Terms are interpreted in a hierarchy of numeric values: base-type
//! values are natural numbers and arrow-type values are strictly
//! increasing functions, represented symbolically so they can be applied
//! and compared. The interpretation is tuned so that *every* rule in this
//! crate — full β, β at a distance, head steps, and even the linear and
//! garbage refinements that fire one occurrence at a time — strictly
//! decreases the measure of a typed term:
//!
//! * a variable does not denote its value directly but its successor,
//! * applying an abstraction adds the collapsed argument plus one on top
//!   of the body's value.
//!
//! Collapsing turns any value into a single number by applying functions
//! to the bottom value of their domain, and the measure of a term is its
//! collapsed interpretation under the bottom-valued (default) valuation.
//! All arithmetic is checked; overflowing the 64-bit range reports
//! [`MeasureError::Overflow`] rather than wrapping.

use std::collections::HashMap;

use thiserror::Error;

use crate::syntax::{Name, Term};
use crate::types::{infer, SimpleType, TypeContext, TypeError};

/// A semantic value: a number at base type, a function at arrow type.
#[derive(Debug, Clone, PartialEq)]
pub enum SemValue {
    Nat(u64),
    Fun(FunVal),
}

/// A function value with its domain and codomain types.
#[derive(Debug, Clone, PartialEq)]
pub struct FunVal {
    pub dom: SimpleType,
    pub cod: SimpleType,
    pub kind: FunKind,
}

/// How a function value acts when applied.
#[derive(Debug, Clone, PartialEq)]
pub enum FunKind {
    /// The least increasing function: collapses its argument onto the
    /// bottom of the codomain.
    Bottom,
    /// Another function with a constant added to every result.
    Bumped { inner: Box<FunVal>, by: u64 },
    /// An interpreted abstraction, closed over a valuation.
    Closure {
        binder: Name,
        body: Box<Term>,
        env: Valuation,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("measure overflowed the 64-bit range")]
    Overflow,
    #[error("variable {name} has no value in the valuation")]
    Unbound { name: Name },
    #[error("binder {binder} lacks a type annotation")]
    MissingAnnotation { binder: Name },
    #[error("applied a base-type value")]
    NotAFunction,
    #[error("value does not inhabit type {ty}")]
    TypeMismatch { ty: SimpleType },
    #[error(transparent)]
    Infer(#[from] TypeError),
}

impl SemValue {
    /// The type this value inhabits.
    pub fn type_of(&self) -> SimpleType {
        match self {
            SemValue::Nat(_) => SimpleType::Base,
            SemValue::Fun(f) => SimpleType::arrow(f.dom.clone(), f.cod.clone()),
        }
    }

    /// Apply a function value to an argument.
    pub fn apply(&self, arg: &SemValue) -> Result<SemValue, MeasureError> {
        let SemValue::Fun(f) = self else {
            return Err(MeasureError::NotAFunction);
        };
        match &f.kind {
            FunKind::Bottom => {
                let lift = collapse(&f.dom, arg)?;
                bump(&bottom(&f.cod), lift)
            }
            FunKind::Bumped { inner, by } => {
                let base = SemValue::Fun((**inner).clone()).apply(arg)?;
                bump(&base, *by)
            }
            FunKind::Closure { binder, body, env } => {
                let mut inner_env = env.clone();
                inner_env.bind(binder.clone(), arg.clone());
                let raw = interpret(body, &inner_env)?;
                let lift = collapse(&f.dom, arg)?;
                bump(&raw, lift.checked_add(1).ok_or(MeasureError::Overflow)?)
            }
        }
    }
}

/// The least value of a type: zero at base type, the bottom function at
/// arrow types.
pub fn bottom(ty: &SimpleType) -> SemValue {
    match ty {
        SimpleType::Base => SemValue::Nat(0),
        SimpleType::Arrow(dom, cod) => SemValue::Fun(FunVal {
            dom: (**dom).clone(),
            cod: (**cod).clone(),
            kind: FunKind::Bottom,
        }),
    }
}

/// Add `k` to a value: numeric addition at base type, pointwise addition
/// at arrow types. Adjacent bumps merge, so repeated bumping stays flat.
pub fn bump(v: &SemValue, k: u64) -> Result<SemValue, MeasureError> {
    if k == 0 {
        return Ok(v.clone());
    }
    match v {
        SemValue::Nat(n) => n
            .checked_add(k)
            .map(SemValue::Nat)
            .ok_or(MeasureError::Overflow),
        SemValue::Fun(f) => {
            let kind = match &f.kind {
                FunKind::Bumped { inner, by } => FunKind::Bumped {
                    inner: inner.clone(),
                    by: by.checked_add(k).ok_or(MeasureError::Overflow)?,
                },
                _ => FunKind::Bumped {
                    inner: Box::new(f.clone()),
                    by: k,
                },
            };
            Ok(SemValue::Fun(FunVal {
                dom: f.dom.clone(),
                cod: f.cod.clone(),
                kind,
            }))
        }
    }
}

/// Collapse a value of type `ty` to a single number by applying functions
/// to the bottom of their domain until a base value remains.
pub fn collapse(ty: &SimpleType, v: &SemValue) -> Result<u64, MeasureError> {
    match (ty, v) {
        (SimpleType::Base, SemValue::Nat(n)) => Ok(*n),
        (SimpleType::Arrow(dom, cod), f @ SemValue::Fun(_)) => {
            let out = f.apply(&bottom(dom))?;
            collapse(cod, &out)
        }
        _ => Err(MeasureError::TypeMismatch { ty: ty.clone() }),
    }
}

/// A finite map from variables to semantic values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Valuation {
    map: HashMap<Name, SemValue>,
}

impl Valuation {
    pub fn new() -> Valuation {
        Valuation::default()
    }

    pub fn bind(&mut self, name: Name, value: SemValue) {
        self.map.insert(name, value);
    }

    pub fn lookup(&self, name: &Name) -> Option<&SemValue> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &SemValue)> {
        self.map.iter()
    }

    /// The typing context in which every bound value inhabits its type.
    fn context(&self) -> TypeContext {
        let mut ctx = TypeContext::new();
        for (name, value) in &self.map {
            ctx.bind(name.clone(), value.type_of());
        }
        ctx
    }
}

/// The valuation mapping every context variable to the bottom of its type.
pub fn default_valuation(ctx: &TypeContext) -> Valuation {
    let mut val = Valuation::new();
    for (name, ty) in ctx.iter() {
        val.bind(name.clone(), bottom(ty));
    }
    val
}

/// Interpret a typed term under a valuation covering its free variables.
///
/// A variable denotes the successor of its value; an abstraction denotes a
/// closure; an application applies function values. The term must be fully
/// annotated (Church style) for closures to know their types.
pub fn interpret(t: &Term, val: &Valuation) -> Result<SemValue, MeasureError> {
    match t {
        Term::Var(x) => {
            let v = val
                .lookup(x)
                .ok_or_else(|| MeasureError::Unbound { name: x.clone() })?;
            bump(v, 1)
        }
        Term::Abs(b, body) => {
            let dom = b
                .ann
                .clone()
                .ok_or_else(|| MeasureError::MissingAnnotation {
                    binder: b.name.clone(),
                })?;
            let mut ctx = val.context();
            ctx.bind(b.name.clone(), dom.clone());
            let cod = infer(body, &ctx)?;
            Ok(SemValue::Fun(FunVal {
                dom,
                cod,
                kind: FunKind::Closure {
                    binder: b.name.clone(),
                    body: body.clone(),
                    env: val.clone(),
                },
            }))
        }
        Term::App(fun, arg) => {
            let vf = interpret(fun, val)?;
            let va = interpret(arg, val)?;
            vf.apply(&va)
        }
    }
}

/// The measure of a typed term: its interpretation under the default
/// valuation, collapsed to a number. Strictly decreases under every
/// reduction rule in this crate.
pub fn measure(t: &Term, ctx: &TypeContext) -> Result<u64, MeasureError> {
    let ty = infer(t, ctx)?;
    let value = interpret(t, &default_valuation(ctx))?;
    collapse(&ty, &value)
}

/// A small set of values of `ty` used to compare functions extensionally.
pub fn probe_values(ty: &SimpleType) -> Vec<SemValue> {
    match ty {
        SimpleType::Base => [0u64, 1, 2, 5].iter().map(|&n| SemValue::Nat(n)).collect(),
        SimpleType::Arrow(_, _) => {
            let bot = bottom(ty);
            let mut probes = vec![bot.clone()];
            if let Ok(b1) = bump(&bot, 1) {
                probes.push(b1);
            }
            if let Ok(b3) = bump(&bot, 3) {
                probes.push(b3);
            }
            probes
        }
    }
}

/// Probe-based strict extensional order on values of type `ty`: numeric
/// order at base type, pointwise over the probe set at arrow types. Sound
/// for the increasing-function checks in the test suites, though probes
/// can only approximate the full pointwise order.
pub fn value_lt(ty: &SimpleType, a: &SemValue, b: &SemValue) -> Result<bool, MeasureError> {
    match ty {
        SimpleType::Base => match (a, b) {
            (SemValue::Nat(x), SemValue::Nat(y)) => Ok(x < y),
            _ => Err(MeasureError::TypeMismatch { ty: ty.clone() }),
        },
        SimpleType::Arrow(dom, cod) => {
            for probe in probe_values(dom) {
                if !value_lt(cod, &a.apply(&probe)?, &b.apply(&probe)?)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_term, parse_type_context};

    fn t(src: &str) -> Term {
        parse_term(src).expect("test term parses")
    }

    fn ctx(src: &str) -> TypeContext {
        parse_type_context(src).expect("test context parses")
    }

    #[test]
    fn the_identity_maps_a_number_to_twice_its_successor() {
        let id = t(r"\x:o. x");
        let f = interpret(&id, &Valuation::new()).unwrap();
        for v in 0..5u64 {
            let out = f.apply(&SemValue::Nat(v)).unwrap();
            assert_eq!(out, SemValue::Nat(2 * v + 2));
        }
    }

    #[test]
    fn golden_measures_of_the_identity_and_its_application() {
        assert_eq!(measure(&t(r"\x:o. x"), &TypeContext::new()).unwrap(), 2);
        assert_eq!(measure(&t(r"(\x:o. x) y"), &ctx("y:o")).unwrap(), 4);
        assert_eq!(measure(&t("y"), &ctx("y:o")).unwrap(), 1);
    }

    #[test]
    fn the_bottom_function_collapses_its_argument_onto_the_codomain() {
        let f = bottom(&SimpleType::arrow(SimpleType::Base, SimpleType::Base));
        assert_eq!(f.apply(&SemValue::Nat(3)).unwrap(), SemValue::Nat(3));
        assert_eq!(f.apply(&SemValue::Nat(0)).unwrap(), SemValue::Nat(0));
    }

    #[test]
    fn bumps_merge_and_add_pointwise() {
        let bot = bottom(&SimpleType::arrow(SimpleType::Base, SimpleType::Base));
        let b2 = bump(&bump(&bot, 1).unwrap(), 1).unwrap();
        let SemValue::Fun(f) = &b2 else {
            panic!("bump of a function is a function")
        };
        assert!(matches!(&f.kind, FunKind::Bumped { by: 2, .. }));
        assert_eq!(b2.apply(&SemValue::Nat(3)).unwrap(), SemValue::Nat(5));
        assert_eq!(bump(&SemValue::Nat(1), 3).unwrap(), SemValue::Nat(4));
    }

    #[test]
    fn overflow_is_reported_not_wrapped() {
        assert_eq!(
            bump(&SemValue::Nat(u64::MAX), 1),
            Err(MeasureError::Overflow)
        );
    }

    #[test]
    fn interpretation_requires_annotations_and_bound_variables() {
        assert!(matches!(
            measure(&t(r"\x. x"), &TypeContext::new()),
            Err(MeasureError::Infer(_))
        ));
        assert!(matches!(
            interpret(&t("y"), &Valuation::new()),
            Err(MeasureError::Unbound { .. })
        ));
    }

    #[test]
    fn every_reduction_rule_strictly_decreases_the_measure() {
        use crate::reduce::{apply_step, find_redexes, Rule};
        use crate::syntax::NameSupply;
        let cases = [
            (r"(\x:o. x) y", "y:o"),
            (r"(\x:o. z) y", "y:o, z:o"),
            (r"(\x:o. g x x) y", "y:o, g:o->o->o"),
            (r"(\y:o->o. \x:o. x) u s", "u:o->o, s:o"),
            (r"(\y:o. (\x:o. g x x) y) w", "w:o, g:o->o->o"),
        ];
        for (src, ctx_src) in cases {
            let term = t(src);
            let context = ctx(ctx_src);
            let before = measure(&term, &context).unwrap();
            for rule in Rule::ALL {
                let mut supply = NameSupply::for_term(&term);
                for redex in find_redexes(&term, rule) {
                    let next = apply_step(&term, &redex, &mut supply).unwrap();
                    let after = measure(&next, &context).unwrap();
                    assert!(
                        after < before,
                        "{rule} on {src}: {before} -> {after} via {next}"
                    );
                }
            }
        }
    }

    #[test]
    fn interpretations_are_strictly_increasing_functions() {
        let ty = SimpleType::arrow(SimpleType::Base, SimpleType::Base);
        let funs = [
            interpret(&t(r"\x:o. x"), &Valuation::new()).unwrap(),
            interpret(&t(r"\x:o. g x"), &{
                let mut v = Valuation::new();
                v.bind(Name::new("g"), bottom(&ty));
                v
            })
            .unwrap(),
            bottom(&ty),
        ];
        for f in &funs {
            assert_eq!(f.type_of(), ty);
            for (small, large) in [(0u64, 1u64), (1, 2), (2, 5)] {
                let a = f.apply(&SemValue::Nat(small)).unwrap();
                let b = f.apply(&SemValue::Nat(large)).unwrap();
                assert!(value_lt(&SimpleType::Base, &a, &b).unwrap());
            }
        }
    }

    #[test]
    fn higher_order_arguments_measure_through_their_probes() {
        // Applying a functional argument twice still collapses to a number.
        let term = t(r"\f:o->o. f (f z)");
        let context = ctx("z:o");
        let ty = SimpleType::arrow(
            SimpleType::arrow(SimpleType::Base, SimpleType::Base),
            SimpleType::Base,
        );
        let v = interpret(&term, &default_valuation(&context)).unwrap();
        assert_eq!(v.type_of(), ty);
        let collapsed = collapse(&ty, &v).unwrap();
        assert!(collapsed > 0);
        assert_eq!(measure(&term, &context).unwrap(), collapsed);
    }
}
