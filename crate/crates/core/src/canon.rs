//! Head canonical forms and the spine-permuting rewriting used to reach
//! them.
//!
//! The canonical form of a term puts, along the spine, first the unmatched
//! abstractions, then every matched argument directly applied to its
//! abstraction (the environment), and finally the unmatched arguments:
//!
//! ```text
//! \x_1. ... \x_n. (\y_1. (... (\y_p. z t_1 ... t_m) s_p ...)) s_1
//! ```
//!
//! Two routes compute it. [`head_canonical`] reads it off the decomposition
//! in linear time. [`normalize_e`] instead iterates [`rewrite_e_step`],
//! which permutes adjacent spine material one move at a time; the rewriting
//! terminates and its normal forms are exactly the canonical terms, so both
//! routes agree (and a test suite holds them to that).

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spine::{
    analyze_spine, decompose, eta, match_word, plug, word_spine_vars, EContext, SpineItem,
};
use crate::syntax::{Binder, Environment, Name, Term};

/// A term in head canonical shape, held as its four components.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    /// The unmatched spine abstractions, outermost first.
    pub head_abs: Vec<Binder>,
    /// The matched pairs, hole→root: entry 0 is applied innermost.
    pub canonical_env: Environment,
    /// The head variable.
    pub head_var: Name,
    /// The unmatched spine arguments, hole-nearest first.
    pub head_args: Vec<Term>,
}

impl CanonicalForm {
    /// Renders the canonical term this form denotes.
    pub fn to_term(&self) -> Term {
        let mut word: Vec<SpineItem> = self
            .head_abs
            .iter()
            .map(|b| SpineItem::SAbs(b.clone()))
            .collect();
        word.extend(env_word(&self.canonical_env));
        // Hole-nearest argument last on the spine.
        word.extend(
            self.head_args
                .iter()
                .rev()
                .map(|t| SpineItem::SArg(t.clone())),
        );
        plug(&word, Term::Var(self.head_var.clone()))
    }

    pub fn n_lambda(&self) -> usize {
        self.head_abs.len()
    }

    pub fn n_at(&self) -> usize {
        self.head_args.len()
    }

    pub fn n_p(&self) -> usize {
        self.canonical_env.len()
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// The spine word denoting an environment: each pair becomes an argument
/// applied directly to its abstraction, entry 0 innermost.
fn env_word(env: &Environment) -> Vec<SpineItem> {
    let mut word = Vec::with_capacity(2 * env.len());
    for pair in env.pairs.iter().rev() {
        word.push(SpineItem::SArg(pair.term.clone()));
        word.push(SpineItem::SAbs(pair.binder.clone()));
    }
    word
}

/// The canonical context carrying a given environment.
pub fn env_to_context(env: &Environment) -> EContext {
    EContext::from_word(env_word(env)).expect("alternating arg/abs words are balanced")
}

/// The canonical representative of an E-context's equivalence class: the
/// context rebuilt from its own environment.
pub fn canonical_e_context(e: &EContext) -> EContext {
    env_to_context(&eta(e))
}

/// Reads the head canonical form of `t` off its decomposition.
///
/// The environment concatenates the block environments starting from the
/// hole-nearest block, preserving the hole→root order of the matched pairs
/// across the whole spine. Unmatched items keep their relative order too.
pub fn head_canonical(t: &Term) -> CanonicalForm {
    let d = decompose(t);
    let mut pairs = Vec::new();
    for block in d.blocks.iter().rev() {
        pairs.extend(eta(block).pairs);
    }
    CanonicalForm {
        head_abs: d.head_abs,
        canonical_env: Environment::new(pairs),
        head_var: d.head_var,
        head_args: d.head_args,
    }
}

/// Is `t` its own canonical rendering?
pub fn is_head_canonical(t: &Term) -> bool {
    head_canonical(t).to_term() == *t
}

/// Which applicable rewrite instance a step should take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Leftmost,
    Rightmost,
    /// Seeded pseudo-random choice; deterministic for a given seed.
    Random(u64),
}

/// One applicable spine move. Positions refer to the word before the move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EMove {
    /// Hoist the abstraction at `from` over the balanced segment starting at
    /// `to`, landing at `to`.
    HoistAbs { to: usize, from: usize },
    /// Push the argument at `from` over the balanced block ending at `to`
    /// (inclusive), landing right after it.
    PushArg { from: usize, to: usize },
    /// Move the matched argument at `arg` next to its abstraction at `abs`.
    PairUp { arg: usize, abs: usize },
}

impl EMove {
    /// Total order used by the leftmost/rightmost selectors.
    fn sort_key(&self) -> (usize, usize, u8) {
        match *self {
            EMove::HoistAbs { to, from } => (to, from, 0),
            EMove::PushArg { from, to } => (from, to, 1),
            EMove::PairUp { arg, abs } => (arg, abs, 2),
        }
    }
}

/// All applicable rewrite instances on a spine word.
///
/// Every word position is a subterm boundary along the spine, so moves may
/// anchor anywhere; congruence covers the rest. Three order invariants make
/// the canonical word the unique normal form: hoists carry only unmatched
/// abstractions (over balanced segments, which contain no unmatched items),
/// pushes carry arguments over balanced blocks only, and pair-ups travel
/// over fully matched interiors — so the relative order of the unmatched
/// abstractions, of the matched pairs, and of the unmatched arguments never
/// changes.
fn e_moves(word: &[SpineItem]) -> Vec<EMove> {
    let (matching, _, _) = match_word(word);
    let matched_abs: HashSet<usize> = matching.iter().map(|&(_, j)| j).collect();
    let mut moves = Vec::new();

    // Moves anchored at an argument position.
    for p in 0..word.len() {
        let SpineItem::SArg(anchor_arg) = &word[p] else {
            continue;
        };
        let arg_fv = anchor_arg.free_vars();

        // Scan hole-ward from the anchor. `depth` counts open arguments of
        // word[p..=k] including the anchor's own bracket; `binders` collects
        // the segment's abstractions; `seg_fv` its free variables (anchor
        // included, for the hoist side condition).
        let mut depth = 1usize;
        let mut partner_passed = false;
        let mut binders: HashSet<Name> = HashSet::new();
        let mut seg_fv = arg_fv.clone();
        for k in p + 1..word.len() {
            match &word[k] {
                SpineItem::SArg(t) => {
                    depth += 1;
                    for v in t.free_vars() {
                        if !binders.contains(&v) {
                            seg_fv.insert(v);
                        }
                    }
                }
                SpineItem::SAbs(b) => {
                    if depth == 0 {
                        // The segment word[p..k) is balanced: an unmatched
                        // abstraction at k may hoist over it. A matched one
                        // must stay put — carrying it over complete pairs
                        // would permute the spine environment.
                        if !matched_abs.contains(&k) && !seg_fv.contains(&b.name) {
                            moves.push(EMove::HoistAbs { to: p, from: k });
                        }
                        // Anything longer sees this stray abstraction and
                        // can never balance again.
                        break;
                    }
                    depth -= 1;
                    binders.insert(b.name.clone());
                    if depth == 0 {
                        // This abstraction is the anchor's own match; blocks
                        // cannot extend past it.
                        partner_passed = true;
                    } else if depth == 1 && !partner_passed {
                        // word[p+1..=k] is a balanced block. Pushing the
                        // anchor past it is its own move unless the next
                        // item is the anchor's own abstraction, in which
                        // case the pair-up below already covers it.
                        let next_is_abs = matches!(word.get(k + 1), Some(SpineItem::SAbs(_)));
                        if !next_is_abs && arg_fv.is_disjoint(&binders) {
                            moves.push(EMove::PushArg { from: p, to: k });
                        }
                    }
                }
            }
        }
    }

    // Matched pairs with a nonempty interior: the argument may travel to
    // its abstraction.
    for (i, j) in matching {
        if j > i + 1 {
            let interior = &word[i + 1..j];
            let arg_fv = match &word[i] {
                SpineItem::SArg(t) => t.free_vars(),
                SpineItem::SAbs(_) => unreachable!(),
            };
            if arg_fv.is_disjoint(&word_spine_vars(interior)) {
                moves.push(EMove::PairUp { arg: i, abs: j });
            }
        }
    }

    moves.sort_by_key(EMove::sort_key);
    moves
}

/// Applies one move to a word.
fn apply_move(word: &[SpineItem], m: &EMove) -> Vec<SpineItem> {
    let mut out = word.to_vec();
    match *m {
        EMove::HoistAbs { to, from } => {
            let item = out.remove(from);
            out.insert(to, item);
        }
        EMove::PushArg { from, to } => {
            let item = out.remove(from);
            // After removal the block occupies from..to; land right after.
            out.insert(to, item);
        }
        EMove::PairUp { arg, abs } => {
            let item = out.remove(arg);
            out.insert(abs - 1, item);
        }
    }
    out
}

fn choose(len: usize, sel: Selector, rng: &mut Option<ChaCha8Rng>) -> usize {
    match sel {
        Selector::Leftmost => 0,
        Selector::Rightmost => len - 1,
        Selector::Random(seed) => {
            let rng = rng.get_or_insert_with(|| ChaCha8Rng::seed_from_u64(seed));
            rng.gen_range(0..len)
        }
    }
}

/// Applies one spine move to `t`, chosen by the selector; `None` when `t` is
/// already canonical.
pub fn rewrite_e_step(t: &Term, sel: Selector) -> Option<Term> {
    let sa = analyze_spine(t);
    let moves = e_moves(&sa.word);
    if moves.is_empty() {
        return None;
    }
    let mut rng = None;
    let idx = choose(moves.len(), sel, &mut rng);
    Some(plug(
        &apply_move(&sa.word, &moves[idx]),
        Term::Var(sa.head_var),
    ))
}

/// Rewrites `t` to its canonical normal form.
///
/// Every move strictly decreases the position sum of the spine abstractions,
/// so `L^2 + L + 1` steps always suffice for a word of length `L`; running
/// out is a bug, not an input property, and panics.
pub fn normalize_e(t: &Term, sel: Selector) -> Term {
    let sa = analyze_spine(t);
    let mut word = sa.word;
    let len = word.len();
    let mut fuel = len * len + len + 1;
    let mut rng = None;
    loop {
        let moves = e_moves(&word);
        if moves.is_empty() {
            break;
        }
        assert!(
            fuel > 0,
            "spine rewriting exceeded its termination bound; this is a bug"
        );
        fuel -= 1;
        let idx = choose(moves.len(), sel, &mut rng);
        word = apply_move(&word, &moves[idx]);
    }
    plug(&word, Term::Var(sa.head_var))
}

/// Out-of-range or zero spine argument indices.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArgError {
    #[error("argument index must be nonzero")]
    Zero,
    #[error(
        "argument index {index} out of range: {n_args} head argument(s), {n_pairs} primary redex(es)"
    )]
    OutOfRange {
        index: i64,
        n_args: usize,
        n_pairs: usize,
    },
}

/// Indexed access to the spine arguments of `t`.
///
/// Positive `i` returns the `i`-th head argument (1 = hole-nearest unmatched
/// argument); negative `i` returns the argument of the `|i|`-th primary
/// redex, counted from the hole outwards.
pub fn arg(t: &Term, i: i64) -> Result<Term, ArgError> {
    let c = head_canonical(t);
    let out_of_range = || ArgError::OutOfRange {
        index: i,
        n_args: c.head_args.len(),
        n_pairs: c.canonical_env.len(),
    };
    if i == 0 {
        Err(ArgError::Zero)
    } else if i > 0 {
        c.head_args
            .get(i as usize - 1)
            .cloned()
            .ok_or_else(out_of_range)
    } else {
        let k = i.unsigned_abs() as usize - 1;
        c.canonical_env
            .pairs
            .get(k)
            .map(|p| p.term.clone())
            .ok_or_else(out_of_range)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::spine::primary_redexes;
    use crate::syntax::alpha_eq;

    fn canon_str(src: &str) -> String {
        head_canonical(&parse_term(src).unwrap()).to_string()
    }

    #[test]
    fn canonical_context_of_stacked_redexes() {
        let t = parse_term(r"(\y. \x. h) s t").unwrap();
        let e = EContext::of_term(&t).unwrap();
        assert_eq!(canonical_e_context(&e).to_string(), r"(\y. (\x. _) t) s");
    }

    #[test]
    fn canonical_context_fixpoints() {
        let empty = EContext::empty();
        assert_eq!(canonical_e_context(&empty), empty);

        let single = EContext::of_term(&parse_term(r"(\x. h) t").unwrap()).unwrap();
        assert_eq!(canonical_e_context(&single), single);
    }

    #[test]
    fn head_canonical_of_stacked_redexes() {
        assert_eq!(canon_str(r"(\y. \x. v) s t"), r"(\y. (\x. v) t) s");
        let c = head_canonical(&parse_term(r"(\y. \x. v) s t").unwrap());
        assert_eq!(c.canonical_env.to_string(), "t/x, s/y");
        assert!(c.head_abs.is_empty());
        assert!(c.head_args.is_empty());
    }

    #[test]
    fn head_canonical_of_already_canonical_terms() {
        let c = head_canonical(&parse_term(r"\a. z w").unwrap());
        assert_eq!(c.head_abs.len(), 1);
        assert_eq!(c.head_abs[0].name, Name::new("a"));
        assert!(c.canonical_env.is_empty());
        assert_eq!(c.head_var, Name::new("z"));
        assert_eq!(
            c.head_args
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>(),
            vec!["w"]
        );
        assert!(is_head_canonical(&parse_term(r"\a. z w").unwrap()));

        let v = head_canonical(&parse_term("x").unwrap());
        assert!(v.head_abs.is_empty() && v.canonical_env.is_empty() && v.head_args.is_empty());
        assert_eq!(v.head_var, Name::new("x"));
    }

    #[test]
    fn single_step_reaches_the_canonical_form() {
        let t = parse_term(r"(\y. \x. v) s t").unwrap();
        let moves = e_moves(&analyze_spine(&t).word);
        assert_eq!(moves.len(), 1, "exactly one applicable instance: {moves:?}");
        let stepped = rewrite_e_step(&t, Selector::Leftmost).unwrap();
        assert_eq!(stepped.to_string(), r"(\y. (\x. v) t) s");
        assert!(
            rewrite_e_step(&stepped, Selector::Leftmost).is_none(),
            "canonical is normal"
        );
    }

    #[test]
    fn abstraction_hoists_over_a_redex() {
        let t = parse_term(r"(\x. \a. z) s").unwrap();
        let stepped = rewrite_e_step(&t, Selector::Leftmost).unwrap();
        assert_eq!(stepped.to_string(), r"\a. (\x. z) s");
    }

    #[test]
    fn normalize_hoists_then_stops() {
        let t = parse_term(r"(\x. \a. z w) s").unwrap();
        assert_eq!(
            normalize_e(&t, Selector::Leftmost).to_string(),
            r"\a. (\x. z w) s"
        );
    }

    #[test]
    fn unmatched_argument_sinks_past_a_redex() {
        // The unmatched u must end up on the hole side of both pairs.
        let t = parse_term(r"(\p. (\q. h) s u) r").unwrap();
        let nf = normalize_e(&t, Selector::Leftmost);
        assert_eq!(nf.to_string(), r"(\p. (\q. h u) s) r");
        assert_eq!(nf, head_canonical(&t).to_term());
    }

    #[test]
    fn selectors_agree_on_the_normal_form() {
        for src in [
            r"(\y. \x. v) s t",
            r"(\p. (\q. h) s u) r",
            r"\a. (\y. \x. v) s t u",
            r"(\x. \a. (\y. \b. z) s) r w",
            r"(\c. \d. (\e. h) f) g k",
        ] {
            let t = parse_term(src).unwrap();
            let direct = head_canonical(&t).to_term();
            for sel in [Selector::Leftmost, Selector::Rightmost, Selector::Random(7)] {
                let nf = normalize_e(&t, sel);
                assert_eq!(nf, direct, "selector {sel:?} on {src}");
            }
        }
    }

    #[test]
    fn rewriting_preserves_the_environment() {
        let t = parse_term(r"(\x. \a. (\y. \b. z) s) r w").unwrap();
        let before = primary_redexes(&t);
        let after = primary_redexes(&normalize_e(&t, Selector::Leftmost));
        assert_eq!(before.len(), after.len());
        for (p, q) in before.iter().zip(after.iter()) {
            assert_eq!(p.binder.name, q.binder.name);
            assert!(alpha_eq(&p.term, &q.term));
        }
    }

    #[test]
    fn arg_indexes_both_directions() {
        let t = parse_term(r"(\y. \x. z) s t").unwrap();
        assert_eq!(arg(&t, -1).unwrap().to_string(), "t");
        assert_eq!(arg(&t, -2).unwrap().to_string(), "s");
        assert!(matches!(arg(&t, -3), Err(ArgError::OutOfRange { .. })));

        let u = parse_term(r"\a. z w").unwrap();
        assert_eq!(arg(&u, 1).unwrap().to_string(), "w");
        assert!(matches!(arg(&u, 2), Err(ArgError::OutOfRange { .. })));

        let x = parse_term("x").unwrap();
        assert!(matches!(arg(&x, 1), Err(ArgError::OutOfRange { .. })));
        assert!(matches!(arg(&x, 0), Err(ArgError::Zero)));
    }
}
