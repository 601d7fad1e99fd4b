//! Terms, names, and the substitution machinery.
//!
//! Everything downstream assumes the *distinct names* discipline: bound
//! names are pairwise distinct and disjoint from free names. Substitution
//! preserves the discipline by renaming every bound variable of each
//! inserted copy to a globally fresh name.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::types::SimpleType;

/// A variable name: a base identifier plus a numeric index.
///
/// Index 0 is reserved for user-written names and prints as the bare base;
/// fresh names drawn from a [`NameSupply`] carry a positive index and print
/// as `base#index`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    pub base: String,
    pub index: u32,
}

impl Name {
    pub fn new(base: impl Into<String>) -> Name {
        Name {
            base: base.into(),
            index: 0,
        }
    }

    pub fn indexed(base: impl Into<String>, index: u32) -> Name {
        Name {
            base: base.into(),
            index,
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}#{}", self.base, self.index)
        }
    }
}

/// A binder: a name together with an optional simple-type annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Binder {
    pub name: Name,
    pub ann: Option<SimpleType>,
}

impl Binder {
    pub fn new(name: Name) -> Binder {
        Binder { name, ann: None }
    }

    pub fn annotated(name: Name, ty: SimpleType) -> Binder {
        Binder {
            name,
            ann: Some(ty),
        }
    }
}

/// A lambda term.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Var(Name),
    Abs(Binder, Box<Term>),
    App(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(Name::new(name))
    }

    pub fn abs(binder: Binder, body: Term) -> Term {
        Term::Abs(binder, Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// Node count: variables weigh 1, abstractions and applications add 1.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Abs(_, body) => 1 + body.size(),
            Term::App(fun, arg) => 1 + fun.size() + arg.size(),
        }
    }

    /// Free variables, in no particular order.
    pub fn free_vars(&self) -> HashSet<Name> {
        let mut out = HashSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut HashSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Abs(b, body) => {
                bound.push(b.name.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::App(fun, arg) => {
                fun.collect_free(bound, out);
                arg.collect_free(bound, out);
            }
        }
    }

    /// Bound (binder) names, in traversal order. Duplicates are kept so the
    /// caller can detect clashes.
    pub fn binder_names(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut Vec<Name>) {
        match self {
            Term::Var(_) => {}
            Term::Abs(b, body) => {
                out.push(b.name.clone());
                body.collect_binders(out);
            }
            Term::App(fun, arg) => {
                fun.collect_binders(out);
                arg.collect_binders(out);
            }
        }
    }

    /// Largest name index occurring anywhere in the term.
    pub fn max_name_index(&self) -> u32 {
        match self {
            Term::Var(x) => x.index,
            Term::Abs(b, body) => b.name.index.max(body.max_name_index()),
            Term::App(fun, arg) => fun.max_name_index().max(arg.max_name_index()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{}", x),
            Term::Abs(b, body) => match &b.ann {
                Some(ty) => write!(f, r"\{}:{}. {}", b.name, ty, body),
                None => write!(f, r"\{}. {}", b.name, body),
            },
            Term::App(fun, arg) => {
                // Application is left-associative and an abstraction extends
                // maximally to the right, so abstractions in function
                // position and non-atoms in argument position need parens.
                match fun.as_ref() {
                    Term::Abs(..) => write!(f, "({})", fun)?,
                    _ => write!(f, "{}", fun)?,
                }
                match arg.as_ref() {
                    Term::Var(_) => write!(f, " {}", arg),
                    _ => write!(f, " ({})", arg),
                }
            }
        }
    }
}

/// A monotone source of fresh names.
///
/// Every name drawn has an index strictly greater than any index seen by the
/// supply, whether drawn earlier or absorbed from a term.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    counter: u32,
}

impl NameSupply {
    pub fn new() -> NameSupply {
        NameSupply { counter: 0 }
    }

    /// A supply whose next index exceeds every index in `t`.
    pub fn for_term(t: &Term) -> NameSupply {
        let mut s = NameSupply::new();
        s.absorb(t);
        s
    }

    /// Raises the counter past every index occurring in `t`.
    pub fn absorb(&mut self, t: &Term) {
        self.counter = self.counter.max(t.max_name_index());
    }

    pub fn fresh(&mut self, base: &str) -> Name {
        self.counter += 1;
        Name::indexed(base, self.counter)
    }
}

/// An environment entry: substitute `term` for the variable bound by `binder`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvPair {
    pub term: Term,
    pub binder: Binder,
}

/// A sequence of delayed substitutions, applied left to right.
///
/// Order is significant: a later entry rewrites variables introduced by an
/// earlier one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Environment {
    pub pairs: Vec<EnvPair>,
}

impl Environment {
    pub fn new(pairs: Vec<EnvPair>) -> Environment {
        Environment { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EnvPair> {
        self.pairs.iter()
    }

    /// Concatenation: `self` first, then `other`.
    pub fn append(&self, other: &Environment) -> Environment {
        let mut pairs = self.pairs.clone();
        pairs.extend(other.pairs.iter().cloned());
        Environment { pairs }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .pairs
            .iter()
            .map(|p| format!("{}/{}", p.term, p.binder.name))
            .collect();
        write!(f, "{}", items.join(", "))
    }
}

/// Does `t` satisfy the distinct-names discipline?
///
/// True when bound names are pairwise distinct and no bound name is also
/// free in `t`.
pub fn has_distinct_names(t: &Term) -> bool {
    let binders = t.binder_names();
    let mut seen = HashSet::new();
    for b in &binders {
        if !seen.insert(b.clone()) {
            return false;
        }
    }
    let free = t.free_vars();
    binders.iter().all(|b| !free.contains(b))
}

/// Renames binders until `t` satisfies the distinct-names discipline.
///
/// The result is alpha-congruent to `t`, and terms that already satisfy the
/// discipline come back unchanged. Fresh names keep the base of the name
/// they replace.
pub fn ensure_distinct_names(t: &Term, supply: &mut NameSupply) -> Term {
    supply.absorb(t);
    let mut used: HashSet<Name> = t.free_vars();
    let mut renaming: HashMap<Name, Vec<Name>> = HashMap::new();
    rename_binders(t, &mut used, &mut renaming, supply)
}

fn rename_binders(
    t: &Term,
    used: &mut HashSet<Name>,
    renaming: &mut HashMap<Name, Vec<Name>>,
    supply: &mut NameSupply,
) -> Term {
    match t {
        Term::Var(x) => {
            let name = renaming
                .get(x)
                .and_then(|stack| stack.last())
                .unwrap_or(x)
                .clone();
            Term::Var(name)
        }
        Term::Abs(b, body) => {
            let fresh = if used.contains(&b.name) {
                supply.fresh(&b.name.base)
            } else {
                b.name.clone()
            };
            used.insert(fresh.clone());
            renaming
                .entry(b.name.clone())
                .or_default()
                .push(fresh.clone());
            let body = rename_binders(body, used, renaming, supply);
            renaming.get_mut(&b.name).unwrap().pop();
            Term::abs(
                Binder {
                    name: fresh,
                    ann: b.ann.clone(),
                },
                body,
            )
        }
        Term::App(fun, arg) => Term::app(
            rename_binders(fun, used, renaming, supply),
            rename_binders(arg, used, renaming, supply),
        ),
    }
}

/// Alpha-congruence. Annotations on corresponding binders must be equal.
pub fn alpha_eq(t: &Term, s: &Term) -> bool {
    alpha_eq_rec(t, s, &mut Vec::new(), &mut Vec::new())
}

fn alpha_eq_rec(t: &Term, s: &Term, bt: &mut Vec<Name>, bs: &mut Vec<Name>) -> bool {
    match (t, s) {
        (Term::Var(x), Term::Var(y)) => {
            let lx = bt.iter().rposition(|n| n == x);
            let ly = bs.iter().rposition(|n| n == y);
            match (lx, ly) {
                (Some(a), Some(b)) => a == b,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Abs(a, t1), Term::Abs(b, s1)) => {
            if a.ann != b.ann {
                return false;
            }
            bt.push(a.name.clone());
            bs.push(b.name.clone());
            let r = alpha_eq_rec(t1, s1, bt, bs);
            bt.pop();
            bs.pop();
            r
        }
        (Term::App(f1, a1), Term::App(f2, a2)) => {
            alpha_eq_rec(f1, f2, bt, bs) && alpha_eq_rec(a1, a2, bt, bs)
        }
        _ => false,
    }
}

/// A copy of `s` with every bound variable renamed to a fresh name.
pub fn fresh_copy(s: &Term, supply: &mut NameSupply) -> Term {
    let mut renaming: HashMap<Name, Vec<Name>> = HashMap::new();
    copy_rec(s, &mut renaming, supply)
}

fn copy_rec(t: &Term, renaming: &mut HashMap<Name, Vec<Name>>, supply: &mut NameSupply) -> Term {
    match t {
        Term::Var(x) => {
            let name = renaming
                .get(x)
                .and_then(|stack| stack.last())
                .unwrap_or(x)
                .clone();
            Term::Var(name)
        }
        Term::Abs(b, body) => {
            let fresh = supply.fresh(&b.name.base);
            renaming
                .entry(b.name.clone())
                .or_default()
                .push(fresh.clone());
            let body = copy_rec(body, renaming, supply);
            renaming.get_mut(&b.name).unwrap().pop();
            Term::abs(
                Binder {
                    name: fresh,
                    ann: b.ann.clone(),
                },
                body,
            )
        }
        Term::App(fun, arg) => Term::app(
            copy_rec(fun, renaming, supply),
            copy_rec(arg, renaming, supply),
        ),
    }
}

/// Capture-free substitution of `s` for the free occurrences of `x` in `t`.
///
/// Each occurrence receives its own fresh copy of `s`, so a term with
/// distinct names stays that way. The supply must have absorbed both terms.
pub fn substitute(t: &Term, x: &Name, s: &Term, supply: &mut NameSupply) -> Term {
    match t {
        Term::Var(y) => {
            if y == x {
                fresh_copy(s, supply)
            } else {
                t.clone()
            }
        }
        Term::Abs(b, body) => {
            if b.name == *x {
                // Shadowed: nothing free below. Unreachable under distinct
                // names, but harmless to handle.
                t.clone()
            } else {
                Term::abs(b.clone(), substitute(body, x, s, supply))
            }
        }
        Term::App(fun, arg) => {
            Term::app(substitute(fun, x, s, supply), substitute(arg, x, s, supply))
        }
    }
}

/// Applies an environment as a sequence of substitutions, left to right:
/// `t{t1/x1}{t2/x2}...{tk/xk}`.
pub fn apply_env(t: &Term, env: &Environment, supply: &mut NameSupply) -> Term {
    let mut out = t.clone();
    for pair in &env.pairs {
        supply.absorb(&pair.term);
        out = substitute(&out, &pair.binder.name, &pair.term, supply);
    }
    out
}
