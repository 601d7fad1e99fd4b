//! Spine analysis: the word of abstractions and arguments along the head
//! path, bracket matching between them, and balanced (E-)contexts.
//!
//! Walking from the root towards the head variable, an abstraction
//! contributes `SAbs` and an application contributes `SArg` (its argument).
//! Reading the resulting word root→hole with `SArg` as an opening bracket
//! and `SAbs` as a closing bracket, standard bracket matching pairs each
//! spine argument with the spine abstraction it will eventually substitute
//! into. A head context whose word is fully matched is an E-context: a stack
//! of redexes waiting to fire at a distance.

use std::collections::HashSet;
use std::fmt;

use crate::syntax::{Binder, EnvPair, Environment, Name, Term};

/// One item of a spine word, in root→hole order.
#[derive(Debug, Clone, PartialEq)]
pub enum SpineItem {
    /// A spine abstraction (its binder, annotation included).
    SAbs(Binder),
    /// A spine argument.
    SArg(Term),
}

impl SpineItem {
    pub fn is_abs(&self) -> bool {
        matches!(self, SpineItem::SAbs(_))
    }
}

/// Rebuilds `word[core]`: the term obtained by plugging `core` into the
/// hole at the end of the word.
pub fn plug(word: &[SpineItem], core: Term) -> Term {
    let mut out = core;
    for item in word.iter().rev() {
        out = match item {
            SpineItem::SAbs(b) => Term::abs(b.clone(), out),
            SpineItem::SArg(a) => Term::app(out, a.clone()),
        };
    }
    out
}

/// Bracket matching of a word read root→hole: `SArg` opens, `SAbs` closes.
///
/// Returns matched `(arg_position, abs_position)` pairs ordered hole→root by
/// binder position, plus the unmatched positions of each kind (ascending).
pub(crate) fn match_word(word: &[SpineItem]) -> (Vec<(usize, usize)>, Vec<usize>, Vec<usize>) {
    let mut stack: Vec<usize> = Vec::new();
    let mut matching = Vec::new();
    let mut unmatched_abs = Vec::new();
    for (i, item) in word.iter().enumerate() {
        match item {
            SpineItem::SArg(_) => stack.push(i),
            SpineItem::SAbs(_) => match stack.pop() {
                Some(arg) => matching.push((arg, i)),
                None => unmatched_abs.push(i),
            },
        }
    }
    // Hole→root order is descending binder position.
    matching.sort_by_key(|&(_, abs)| std::cmp::Reverse(abs));
    (matching, unmatched_abs, stack)
}

/// The spine of a term: its word, head variable, and bracket matching.
#[derive(Debug, Clone, PartialEq)]
pub struct SpineAnalysis {
    /// Spine items in root→hole order.
    pub word: Vec<SpineItem>,
    /// The variable at the end of the head path.
    pub head_var: Name,
    /// Matched `(arg_position, abs_position)` pairs, hole→root by binder.
    pub matching: Vec<(usize, usize)>,
    /// Positions of unmatched abstractions, ascending.
    pub unmatched_abs: Vec<usize>,
    /// Positions of unmatched arguments, ascending.
    pub unmatched_args: Vec<usize>,
}

impl SpineAnalysis {
    /// Number of unmatched spine abstractions.
    pub fn n_lambda(&self) -> usize {
        self.unmatched_abs.len()
    }

    /// Number of unmatched spine arguments.
    pub fn n_at(&self) -> usize {
        self.unmatched_args.len()
    }

    /// Number of matched pairs (primary redexes).
    pub fn n_p(&self) -> usize {
        self.matching.len()
    }

    /// Is the maximal head context balanced, i.e. an E-context?
    pub fn is_e_context(&self) -> bool {
        self.unmatched_abs.is_empty() && self.unmatched_args.is_empty()
    }
}

/// Computes the spine of `t`.
pub fn analyze_spine(t: &Term) -> SpineAnalysis {
    let mut word = Vec::new();
    let mut cur = t;
    let head_var = loop {
        match cur {
            Term::Var(x) => break x.clone(),
            Term::Abs(b, body) => {
                word.push(SpineItem::SAbs(b.clone()));
                cur = body;
            }
            Term::App(fun, arg) => {
                word.push(SpineItem::SArg(arg.as_ref().clone()));
                cur = fun;
            }
        }
    };
    let (matching, unmatched_abs, unmatched_args) = match_word(&word);
    SpineAnalysis {
        word,
        head_var,
        matching,
        unmatched_abs,
        unmatched_args,
    }
}

/// Convenience wrapper: is the maximal head context of `t` an E-context?
pub fn is_e_context(t: &Term) -> bool {
    analyze_spine(t).is_e_context()
}

/// Rejection reasons for words that do not form an E-context.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EContextError {
    #[error("word has {0} unmatched abstraction(s)")]
    UnmatchedAbs(usize),
    #[error("word has {0} unmatched argument(s)")]
    UnmatchedArgs(usize),
}

/// A balanced head context: every spine abstraction is matched by a spine
/// argument and vice versa.
#[derive(Debug, Clone, PartialEq)]
pub struct EContext {
    word: Vec<SpineItem>,
}

impl EContext {
    /// The empty context (just a hole).
    pub fn empty() -> EContext {
        EContext { word: Vec::new() }
    }

    /// Validates balance and wraps the word.
    pub fn from_word(word: Vec<SpineItem>) -> Result<EContext, EContextError> {
        let (_, unmatched_abs, unmatched_args) = match_word(&word);
        if !unmatched_abs.is_empty() {
            Err(EContextError::UnmatchedAbs(unmatched_abs.len()))
        } else if !unmatched_args.is_empty() {
            Err(EContextError::UnmatchedArgs(unmatched_args.len()))
        } else {
            Ok(EContext { word })
        }
    }

    /// The maximal head context of `t`, if it is balanced.
    pub fn of_term(t: &Term) -> Result<EContext, EContextError> {
        EContext::from_word(analyze_spine(t).word)
    }

    pub fn word(&self) -> &[SpineItem] {
        &self.word
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Number of matched pairs in the context.
    pub fn len_pairs(&self) -> usize {
        self.word.len() / 2
    }

    /// Plugs a term into the hole. Capture is intentional: the context's
    /// binders take scope over the plugged term.
    pub fn plug(&self, core: Term) -> Term {
        plug(&self.word, core)
    }

    /// Binders of the context's spine abstractions.
    pub fn spine_vars(&self) -> HashSet<Name> {
        word_spine_vars(&self.word)
    }

    /// Free variables of the context seen as a term with a hole.
    pub fn free_vars(&self) -> HashSet<Name> {
        word_free_vars(&self.word)
    }
}

impl fmt::Display for EContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Render with a visible hole; `_` cannot collide with a name since
        // names start with a letter.
        write!(f, "{}", self.plug(Term::var("_")))
    }
}

/// Binders of the spine abstractions in a word segment.
pub fn word_spine_vars(word: &[SpineItem]) -> HashSet<Name> {
    word.iter()
        .filter_map(|item| match item {
            SpineItem::SAbs(b) => Some(b.name.clone()),
            SpineItem::SArg(_) => None,
        })
        .collect()
}

/// Free variables of a word segment: a spine abstraction scopes over every
/// later (hole-ward) item.
pub fn word_free_vars(word: &[SpineItem]) -> HashSet<Name> {
    let mut bound: HashSet<Name> = HashSet::new();
    let mut free: HashSet<Name> = HashSet::new();
    for item in word {
        match item {
            SpineItem::SAbs(b) => {
                bound.insert(b.name.clone());
            }
            SpineItem::SArg(t) => {
                for v in t.free_vars() {
                    if !bound.contains(&v) {
                        free.insert(v);
                    }
                }
            }
        }
    }
    free
}

/// The environment of an E-context: the delayed substitution `t/x` of each
/// matched pair, ordered from the hole outwards.
///
/// A binder closer to the hole comes first, matching the order in which the
/// substitutions must be applied.
pub fn eta(e: &EContext) -> Environment {
    let (matching, _, _) = match_word(&e.word);
    let pairs = matching
        .into_iter()
        .map(|(arg, abs)| {
            let term = match &e.word[arg] {
                SpineItem::SArg(t) => t.clone(),
                SpineItem::SAbs(_) => unreachable!("matching pairs args with abs"),
            };
            let binder = match &e.word[abs] {
                SpineItem::SAbs(b) => b.clone(),
                SpineItem::SArg(_) => unreachable!("matching pairs args with abs"),
            };
            EnvPair { term, binder }
        })
        .collect();
    Environment::new(pairs)
}

/// The matched pairs of the maximal head context of `t`, as an environment
/// ordered hole→root by binder position.
pub fn primary_redexes(t: &Term) -> Environment {
    let sa = analyze_spine(t);
    let pairs = sa
        .matching
        .iter()
        .map(|&(arg, abs)| {
            let term = match &sa.word[arg] {
                SpineItem::SArg(t) => t.clone(),
                SpineItem::SAbs(_) => unreachable!(),
            };
            let binder = match &sa.word[abs] {
                SpineItem::SAbs(b) => b.clone(),
                SpineItem::SArg(_) => unreachable!(),
            };
            EnvPair { term, binder }
        })
        .collect();
    Environment::new(pairs)
}

/// The unique decomposition of a maximal head context into balanced blocks
/// separated by its unmatched items.
///
/// With `n` unmatched abstractions and `m` unmatched arguments there are
/// `n + m + 1` blocks: `blocks[0]` is root-most, `blocks[n + m]` touches the
/// hole. `head_args[0]` is the hole-nearest unmatched argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub blocks: Vec<EContext>,
    pub head_abs: Vec<Binder>,
    pub head_args: Vec<Term>,
    pub head_var: Name,
}

impl Decomposition {
    /// Reassembles the original term exactly.
    pub fn reassemble(&self) -> Term {
        let n = self.head_abs.len();
        let m = self.head_args.len();
        debug_assert_eq!(self.blocks.len(), n + m + 1);
        let mut word: Vec<SpineItem> = Vec::new();
        for i in 0..=n + m {
            word.extend(self.blocks[i].word().iter().cloned());
            if i < n {
                word.push(SpineItem::SAbs(self.head_abs[i].clone()));
            } else if i < n + m {
                // Unmatched arguments appear root→hole as t_m ... t_1.
                word.push(SpineItem::SArg(self.head_args[n + m - 1 - i].clone()));
            }
        }
        plug(&word, Term::Var(self.head_var.clone()))
    }
}

/// Splits the spine of `t` at its unmatched items.
pub fn decompose(t: &Term) -> Decomposition {
    let sa = analyze_spine(t);
    let mut cuts: Vec<usize> = sa
        .unmatched_abs
        .iter()
        .chain(sa.unmatched_args.iter())
        .copied()
        .collect();
    cuts.sort_unstable();

    let mut blocks = Vec::new();
    let mut start = 0;
    for &cut in &cuts {
        blocks.push(EContext {
            word: sa.word[start..cut].to_vec(),
        });
        start = cut + 1;
    }
    blocks.push(EContext {
        word: sa.word[start..].to_vec(),
    });

    let head_abs = sa
        .unmatched_abs
        .iter()
        .map(|&i| match &sa.word[i] {
            SpineItem::SAbs(b) => b.clone(),
            SpineItem::SArg(_) => unreachable!(),
        })
        .collect();
    // Root→hole the unmatched arguments read t_m ... t_1; flip so that
    // head_args[0] is the hole-nearest one.
    let head_args = sa
        .unmatched_args
        .iter()
        .rev()
        .map(|&i| match &sa.word[i] {
            SpineItem::SArg(a) => a.clone(),
            SpineItem::SAbs(_) => unreachable!(),
        })
        .collect();

    Decomposition {
        blocks,
        head_abs,
        head_args,
        head_var: sa.head_var,
    }
}
