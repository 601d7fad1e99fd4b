//! Deterministic generation of random terms, typed terms, and E-contexts,
//! plus exhaustive enumeration of small terms.
//!
//! Every generator is a pure function of its configuration: the same
//! [`GenConfig`] always produces structurally identical output, so any
//! failure found by the property suites can be replayed from its seed alone.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spine::{EContext, SpineItem};
use crate::syntax::{ensure_distinct_names, Binder, Name, NameSupply, Term};
use crate::types::{SimpleType, TypeContext};

/// Configuration shared by all generators.
///
/// `free_var_pool` doubles as the typing context for typed generation: its
/// names may appear free in generated terms, and typed generators pick
/// variables whose declared type matches the goal.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// Seed for the deterministic RNG.
    pub seed: u64,
    /// Upper bound on the node count of a generated term.
    pub max_size: usize,
    /// Upper bound on the arrow nesting of types invented during typed
    /// generation.
    pub max_type_depth: usize,
    /// Free variables the generators may use, with their types.
    pub free_var_pool: TypeContext,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        let o = SimpleType::Base;
        let mut pool = TypeContext::new();
        pool.bind(Name::new("u"), o.clone());
        pool.bind(Name::new("w"), o.clone());
        pool.bind(Name::new("f"), SimpleType::arrow(o.clone(), o.clone()));
        pool.bind(
            Name::new("g"),
            SimpleType::arrow(o.clone(), SimpleType::arrow(o.clone(), o)),
        );
        GenConfig {
            seed: 1,
            max_size: 20,
            max_type_depth: 2,
            free_var_pool: pool,
        }
    }
}

impl GenConfig {
    /// The same configuration with a different seed.
    pub fn with_seed(&self, seed: u64) -> GenConfig {
        GenConfig {
            seed,
            ..self.clone()
        }
    }

    /// Pool names in a fixed order (the pool itself is unordered).
    fn pool_names(&self) -> Vec<Name> {
        let mut names: Vec<Name> = self.free_var_pool.iter().map(|(n, _)| n.clone()).collect();
        names.sort();
        names
    }

    /// Pool entries in a fixed order.
    fn pool_entries(&self) -> Vec<(Name, SimpleType)> {
        let mut entries: Vec<(Name, SimpleType)> = self
            .free_var_pool
            .iter()
            .map(|(n, t)| (n.clone(), t.clone()))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries
    }
}

/// Failure of a bounded-retry generator.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("no term of type {target} found in {attempts} attempts (size budget {max_size}, pool of {pool_len})")]
    Exhausted {
        target: String,
        attempts: usize,
        max_size: usize,
        pool_len: usize,
    },
}

const VAR: u8 = 0;
const ABS: u8 = 1;
const APP: u8 = 2;
const REDEX: u8 = 3;

fn pick_weighted(rng: &mut ChaCha8Rng, choices: &[(u32, u8)]) -> u8 {
    let total: u32 = choices.iter().map(|(w, _)| w).sum();
    let mut roll = rng.gen_range(0..total);
    for (w, tag) in choices {
        if roll < *w {
            return *tag;
        }
        roll -= w;
    }
    choices.last().expect("non-empty choice list").1
}

fn pick_var(rng: &mut ChaCha8Rng, pool: &[Name], scope: &[Name]) -> Name {
    let total = pool.len() + scope.len();
    let i = rng.gen_range(0..total);
    if i < scope.len() {
        scope[i].clone()
    } else {
        pool[i - scope.len()].clone()
    }
}

/// Generates a term of size at most `cfg.max_size` with pairwise-distinct
/// binder names, using free variables only from `cfg.free_var_pool`.
///
/// Binders are unannotated; use [`gen_typed_term`] for Church-style terms.
pub fn gen_term(cfg: &GenConfig) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut supply = NameSupply::new();
    let pool = cfg.pool_names();
    // A closed term needs at least two nodes.
    let floor = if pool.is_empty() { 2 } else { 1 };
    let budget = cfg.max_size.max(floor);
    go_untyped(&mut rng, &mut supply, &pool, &mut Vec::new(), budget)
}

fn go_untyped(
    rng: &mut ChaCha8Rng,
    supply: &mut NameSupply,
    pool: &[Name],
    scope: &mut Vec<Name>,
    budget: usize,
) -> Term {
    let can_var = !(pool.is_empty() && scope.is_empty());
    if budget <= 1 && can_var {
        return Term::Var(pick_var(rng, pool, scope));
    }
    if budget <= 2 && !can_var {
        // The smallest closed term.
        let name = supply.fresh("b");
        return Term::abs(Binder::new(name.clone()), Term::Var(name));
    }
    let mut choices: Vec<(u32, u8)> = vec![(3, ABS)];
    // Without a variable in scope each application branch needs room for a
    // closed subterm of its own.
    let app_floor = if can_var { 3 } else { 5 };
    if budget >= app_floor {
        choices.push((3, APP));
    }
    if can_var {
        choices.push((4, VAR));
    }
    match pick_weighted(rng, &choices) {
        VAR => Term::Var(pick_var(rng, pool, scope)),
        ABS => {
            let name = supply.fresh("b");
            scope.push(name.clone());
            let body = go_untyped(rng, supply, pool, scope, budget - 1);
            scope.pop();
            Term::abs(Binder::new(name), body)
        }
        _ => {
            let rest = budget - 1;
            let min = if can_var { 1 } else { 2 };
            let left = rng.gen_range(min..=rest - min);
            let fun = go_untyped(rng, supply, pool, scope, left);
            let arg = go_untyped(rng, supply, pool, scope, rest - left);
            Term::app(fun, arg)
        }
    }
}

/// Generates a random simple type with arrow nesting at most `depth`.
fn gen_type(rng: &mut ChaCha8Rng, depth: usize) -> SimpleType {
    if depth == 0 || rng.gen_range(0..5) < 3 {
        SimpleType::Base
    } else {
        SimpleType::arrow(gen_type(rng, depth - 1), gen_type(rng, depth - 1))
    }
}

/// Generates a Church-style term of type `target` under `cfg.free_var_pool`.
///
/// Generation is goal-directed with a redex-introducing production, retried
/// up to a fixed number of attempts; exhausting them is reported as an error
/// rather than looped on forever.
pub fn gen_typed_term(cfg: &GenConfig, target: &SimpleType) -> Result<Term, GenError> {
    const ATTEMPTS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let entries = cfg.pool_entries();
    let budget = cfg.max_size.max(1);
    for _ in 0..ATTEMPTS {
        let mut supply = NameSupply::new();
        let mut scope = entries.clone();
        if let Some(t) = go_typed(
            &mut rng,
            &mut supply,
            &mut scope,
            target,
            budget,
            cfg.max_type_depth,
        ) {
            return Ok(t);
        }
    }
    Err(GenError::Exhausted {
        target: target.to_string(),
        attempts: ATTEMPTS,
        max_size: cfg.max_size,
        pool_len: entries.len(),
    })
}

fn go_typed(
    rng: &mut ChaCha8Rng,
    supply: &mut NameSupply,
    scope: &mut Vec<(Name, SimpleType)>,
    goal: &SimpleType,
    budget: usize,
    type_depth: usize,
) -> Option<Term> {
    if budget == 0 {
        return None;
    }
    let matching: Vec<usize> = (0..scope.len()).filter(|&i| &scope[i].1 == goal).collect();
    let is_arrow = matches!(goal, SimpleType::Arrow(..));
    if budget == 1 {
        if matching.is_empty() {
            return None;
        }
        let pick = matching[rng.gen_range(0..matching.len())];
        return Some(Term::Var(scope[pick].0.clone()));
    }
    let mut choices: Vec<(u32, u8)> = Vec::new();
    if !matching.is_empty() {
        choices.push((4, VAR));
    }
    if is_arrow {
        choices.push((3, ABS));
    }
    if budget >= 3 {
        choices.push((2, APP));
    }
    if budget >= 4 {
        choices.push((3, REDEX));
    }
    if choices.is_empty() {
        return None;
    }
    match pick_weighted(rng, &choices) {
        VAR => {
            let pick = matching[rng.gen_range(0..matching.len())];
            Some(Term::Var(scope[pick].0.clone()))
        }
        ABS => {
            let (dom, cod) = match goal {
                SimpleType::Arrow(d, c) => (d.as_ref().clone(), c.as_ref().clone()),
                SimpleType::Base => unreachable!("abs production requires an arrow goal"),
            };
            let name = supply.fresh("b");
            scope.push((name.clone(), dom.clone()));
            let body = go_typed(rng, supply, scope, &cod, budget - 1, type_depth);
            scope.pop();
            Some(Term::abs(Binder::annotated(name, dom), body?))
        }
        APP => {
            let arg_ty = gen_type(rng, type_depth);
            let fun_ty = SimpleType::arrow(arg_ty.clone(), goal.clone());
            let rest = budget - 1;
            let left = rng.gen_range(1..=rest - 1);
            let fun = go_typed(rng, supply, scope, &fun_ty, left, type_depth)?;
            let arg = go_typed(rng, supply, scope, &arg_ty, rest - left, type_depth)?;
            Some(Term::app(fun, arg))
        }
        _ => {
            // (\x:alpha. body) arg, a freshly built redex.
            let arg_ty = gen_type(rng, type_depth);
            let rest = budget - 2;
            let body_budget = rng.gen_range(1..=rest - 1);
            let name = supply.fresh("b");
            scope.push((name.clone(), arg_ty.clone()));
            let body = go_typed(rng, supply, scope, goal, body_budget, type_depth);
            scope.pop();
            let arg = go_typed(rng, supply, scope, &arg_ty, rest - body_budget, type_depth)?;
            Some(Term::app(
                Term::abs(Binder::annotated(name, arg_ty), body?),
                arg,
            ))
        }
    }
}

/// Generates a non-empty E-context (a balanced spine word).
///
/// Argument terms may mention binders that sit root-ward of them in the
/// word, as well as the free-variable pool.
pub fn gen_e_context(cfg: &GenConfig) -> EContext {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut supply = NameSupply::new();
    let pool = cfg.pool_names();
    let max_pairs = (cfg.max_size / 4).max(1);
    let pairs = rng.gen_range(1..=max_pairs);
    let arg_budget = (cfg.max_size / 4).max(2);
    let mut scope = Vec::new();
    let mut word = Vec::new();
    gen_balanced(
        &mut rng,
        &mut supply,
        &pool,
        &mut scope,
        pairs,
        arg_budget,
        &mut word,
    );
    EContext::from_word(word).expect("generated word is balanced")
}

/// Emits a balanced word of exactly `pairs` matched pairs into `out`,
/// growing `scope` with each binder passed (binders stay visible for the
/// rest of the word).
fn gen_balanced(
    rng: &mut ChaCha8Rng,
    supply: &mut NameSupply,
    pool: &[Name],
    scope: &mut Vec<Name>,
    pairs: usize,
    arg_budget: usize,
    out: &mut Vec<SpineItem>,
) {
    if pairs == 0 {
        return;
    }
    let inner = rng.gen_range(0..pairs);
    let rest = pairs - 1 - inner;
    let size = rng.gen_range(1..=arg_budget);
    let arg = go_untyped(rng, supply, pool, scope, size);
    out.push(SpineItem::SArg(arg));
    gen_balanced(rng, supply, pool, scope, inner, arg_budget, out);
    let name = supply.fresh("e");
    out.push(SpineItem::SAbs(Binder::new(name.clone())));
    scope.push(name);
    gen_balanced(rng, supply, pool, scope, rest, arg_budget, out);
}

/// Enumerates every term of size at most `max_size` whose free variables
/// come from `pool`, in a deterministic order.
///
/// Intended for exhaustive checks at tiny sizes; the universe grows fast.
/// Each term is returned with pairwise-distinct binder names.
pub fn enumerate_terms(max_size: usize, pool: &[Name]) -> Vec<Term> {
    let mut memo: HashMap<(usize, usize), Vec<Term>> = HashMap::new();
    let mut out = Vec::new();
    for size in 1..=max_size {
        for t in enumerate_at(0, size, pool, &mut memo) {
            let mut supply = NameSupply::for_term(&t);
            out.push(ensure_distinct_names(&t, &mut supply));
        }
    }
    out
}

/// All terms of size exactly `size` with binders `b#1 .. b#depth` in scope.
fn enumerate_at(
    depth: usize,
    size: usize,
    pool: &[Name],
    memo: &mut HashMap<(usize, usize), Vec<Term>>,
) -> Vec<Term> {
    if let Some(hit) = memo.get(&(depth, size)) {
        return hit.clone();
    }
    let mut out = Vec::new();
    if size == 1 {
        for name in pool {
            out.push(Term::Var(name.clone()));
        }
        for d in 1..=depth {
            out.push(Term::Var(Name::indexed("b", d as u32)));
        }
    } else {
        let binder = Name::indexed("b", depth as u32 + 1);
        for body in enumerate_at(depth + 1, size - 1, pool, memo) {
            out.push(Term::abs(Binder::new(binder.clone()), body));
        }
        for left in 1..=size - 2 {
            let funs = enumerate_at(depth, left, pool, memo);
            let args = enumerate_at(depth, size - 1 - left, pool, memo);
            for fun in &funs {
                for arg in &args {
                    out.push(Term::app(fun.clone(), arg.clone()));
                }
            }
        }
    }
    memo.insert((depth, size), out.clone());
    out
}
