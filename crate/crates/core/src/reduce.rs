//! Reduction rules and traced reduction sequences.
//!
//! Seven rules share one interface. Three contract a β-redex in a single
//! step: plain β (`Beta`), β at a distance (`BetaDistance`, which fires
//! through an intervening balanced context), and head reduction (`Head`,
//! the outermost such step on the root spine). Three refine β into smaller
//! moves: `Linear` replaces one occurrence of the bound variable with a
//! fresh copy of the argument while keeping the redex, `Garbage` erases a
//! redex whose binder is unused, and `Affine` is their union. `LinearHead`
//! restricts the linear rule to the head occurrence, so at most one redex
//! exists in any term.
//!
//! Every redex is addressed by a path from the root, which makes steps
//! replayable: [`apply_step`] revalidates the pattern before rewriting, and
//! [`Trace`]s record enough to be checked independently. All rewriting
//! threads a [`NameSupply`] and preserves the distinct-names discipline.

use std::fmt;

use thiserror::Error;

use crate::spine::{analyze_spine, SpineItem};
use crate::syntax::{fresh_copy, substitute, Name, NameSupply, Term};

/// One navigation step from a node to a child.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathStep {
    /// Into the function part of an application.
    Fun,
    /// Into the argument part of an application.
    Arg,
    /// Into the body of an abstraction.
    Body,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathStep::Fun => write!(f, "fun"),
            PathStep::Arg => write!(f, "arg"),
            PathStep::Body => write!(f, "body"),
        }
    }
}

/// A position in a term: the list of child steps from the root.
///
/// The root itself is the empty path and prints as `.`; other paths print
/// dot-joined, e.g. `fun.body.arg`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(pub Vec<PathStep>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// This path extended by one step.
    pub fn child(&self, step: PathStep) -> Path {
        let mut steps = self.0.clone();
        steps.push(step);
        Path(steps)
    }

    /// This path extended by a sequence of steps.
    pub fn join(&self, rest: &[PathStep]) -> Path {
        let mut steps = self.0.clone();
        steps.extend_from_slice(rest);
        Path(steps)
    }

    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.0.len() >= prefix.0.len() && self.0[..prefix.0.len()] == prefix.0[..]
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, ".");
        }
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

/// The subterm at `path`, if the path exists in `t`.
pub fn subterm_at<'a>(t: &'a Term, path: &[PathStep]) -> Option<&'a Term> {
    let mut cur = t;
    for step in path {
        cur = match (cur, step) {
            (Term::App(fun, _), PathStep::Fun) => fun,
            (Term::App(_, arg), PathStep::Arg) => arg,
            (Term::Abs(_, body), PathStep::Body) => body,
            _ => return None,
        };
    }
    Some(cur)
}

/// `t` with the subterm at `path` replaced by `new_node`.
fn with_node_replaced(t: &Term, path: &[PathStep], new_node: Term) -> Option<Term> {
    match path.split_first() {
        None => Some(new_node),
        Some((step, rest)) => match (t, step) {
            (Term::App(fun, arg), PathStep::Fun) => Some(Term::app(
                with_node_replaced(fun, rest, new_node)?,
                (**arg).clone(),
            )),
            (Term::App(fun, arg), PathStep::Arg) => Some(Term::app(
                (**fun).clone(),
                with_node_replaced(arg, rest, new_node)?,
            )),
            (Term::Abs(b, body), PathStep::Body) => Some(Term::abs(
                b.clone(),
                with_node_replaced(body, rest, new_node)?,
            )),
            _ => None,
        },
    }
}

/// The reduction rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// `(\x. t) s  ->  t{s/x}` at any position.
    Beta,
    /// `E[\x. t] s  ->  E[t{s/x}]` for a balanced context `E`.
    BetaDistance,
    /// The outermost β-step on the root spine: `\y*. (\x. t) s u*  ->  \y*. t{s/x} u*`.
    Head,
    /// `E[\x. C[x]] s  ->  E[\x. C[s']] s` where `s'` is a fresh copy of `s`;
    /// one redex per free occurrence of the binder.
    Linear,
    /// `E[\x. t] s  ->  E[t]` when `x` does not occur free in `t`.
    Garbage,
    /// The union of `Linear` and `Garbage`; found redexes carry the
    /// specific rule that fires.
    Affine,
    /// `Linear` restricted to the head occurrence, closed under head
    /// contexts; at most one redex exists.
    LinearHead,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::Beta,
        Rule::BetaDistance,
        Rule::Head,
        Rule::Linear,
        Rule::Garbage,
        Rule::Affine,
        Rule::LinearHead,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Rule::Beta => "beta",
            Rule::BetaDistance => "beta-d",
            Rule::Head => "head",
            Rule::Linear => "linear",
            Rule::Garbage => "garbage",
            Rule::Affine => "affine",
            Rule::LinearHead => "linear-head",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Rule, String> {
        match s {
            "beta" => Ok(Rule::Beta),
            "beta-d" => Ok(Rule::BetaDistance),
            "head" => Ok(Rule::Head),
            "linear" => Ok(Rule::Linear),
            "garbage" => Ok(Rule::Garbage),
            "affine" => Ok(Rule::Affine),
            "linear-head" => Ok(Rule::LinearHead),
            other => Err(format!("unknown rule `{other}`")),
        }
    }
}

/// Rule-specific data attached to a redex.
#[derive(Debug, Clone, PartialEq)]
pub enum RedexDetail {
    /// For contracting rules: the matched binder and its argument.
    Pair { binder: Name, argument: Term },
    /// For occurrence rules: the matched binder and the absolute path of
    /// the variable occurrence to be replaced.
    Occurrence { binder: Name, occurrence: Path },
}

impl RedexDetail {
    pub fn binder(&self) -> &Name {
        match self {
            RedexDetail::Pair { binder, .. } => binder,
            RedexDetail::Occurrence { binder, .. } => binder,
        }
    }
}

/// A redex: a rule instance at a definite position.
///
/// `position` addresses the application node whose argument is consumed
/// (for `Beta` and `Head` that node's function part is the abstraction
/// itself; for the distance rules the abstraction sits at the end of the
/// balanced context inside the function part).
#[derive(Debug, Clone, PartialEq)]
pub struct Redex {
    pub rule: Rule,
    pub position: Path,
    pub detail: RedexDetail,
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.rule, self.position)?;
        match &self.detail {
            RedexDetail::Pair { binder, argument } => write!(f, " [{argument}/{binder}]"),
            RedexDetail::Occurrence { binder, occurrence } => {
                write!(f, " [{binder} at {occurrence}]")
            }
        }
    }
}

/// One recorded reduction step: the redex fired and the resulting term.
#[derive(Debug, Clone)]
pub struct Step {
    pub redex: Redex,
    pub result: Term,
}

/// A reduction sequence from a starting term.
#[derive(Debug, Clone)]
pub struct Trace {
    pub start: Term,
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The last term of the sequence (the start if no step fired).
    pub fn final_term(&self) -> &Term {
        self.steps.last().map(|s| &s.result).unwrap_or(&self.start)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("stale redex at {position}: {reason}")]
    Stale { position: Path, reason: String },
}

fn stale(position: &Path, reason: impl Into<String>) -> StepError {
    StepError::Stale {
        position: position.clone(),
        reason: reason.into(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("step {index}: {source}")]
    BadStep {
        index: usize,
        #[source]
        source: StepError,
    },
    #[error("step {index}: recorded result differs from replaying the redex")]
    ResultMismatch { index: usize },
    #[error("step {index}: result violates the distinct-names discipline")]
    NamesViolated { index: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PostponeError {
    #[error("trace contains a {rule} step; only linear and garbage steps can be reordered")]
    UnsupportedRule { rule: Rule },
    #[error("commuted step {index} no longer applies in {state}: {source}")]
    Replay {
        index: usize,
        state: Term,
        #[source]
        source: StepError,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuelError {
    #[error("fuel exhausted after {steps} steps at {state}")]
    Exhausted { steps: usize, state: Term },
}

/// Locate the spine abstraction matched with the pending argument of an
/// application node whose function part is `w`.
///
/// Walks the spine of `w` with one bracket already open (the argument);
/// applications open further brackets, abstractions close them. Returns
/// the path from `w` to the matched abstraction node together with its
/// binder and body.
fn matched_binder(w: &Term) -> Option<(Vec<PathStep>, &crate::syntax::Binder, &Term)> {
    let mut open = 1usize;
    let mut pi = Vec::new();
    let mut cur = w;
    loop {
        match cur {
            Term::Abs(b, body) => {
                open -= 1;
                if open == 0 {
                    return Some((pi, b, body));
                }
                pi.push(PathStep::Body);
                cur = body;
            }
            Term::App(fun, _) => {
                open += 1;
                pi.push(PathStep::Fun);
                cur = fun;
            }
            Term::Var(_) => return None,
        }
    }
}

/// Paths (relative to `body`) of the free occurrences of `x`, left to right.
fn occurrence_paths(body: &Term, x: &Name) -> Vec<Vec<PathStep>> {
    fn walk(t: &Term, x: &Name, prefix: &mut Vec<PathStep>, out: &mut Vec<Vec<PathStep>>) {
        match t {
            Term::Var(y) => {
                if y == x {
                    out.push(prefix.clone());
                }
            }
            Term::Abs(b, body) => {
                if &b.name != x {
                    prefix.push(PathStep::Body);
                    walk(body, x, prefix, out);
                    prefix.pop();
                }
            }
            Term::App(fun, arg) => {
                prefix.push(PathStep::Fun);
                walk(fun, x, prefix, out);
                prefix.pop();
                prefix.push(PathStep::Arg);
                walk(arg, x, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(body, x, &mut Vec::new(), &mut out);
    out
}

/// Path steps corresponding to a prefix of a spine word: an argument item
/// descends into the function part, an abstraction item into the body.
fn word_steps(items: &[SpineItem]) -> Vec<PathStep> {
    items
        .iter()
        .map(|item| match item {
            SpineItem::SArg(_) => PathStep::Fun,
            SpineItem::SAbs(_) => PathStep::Body,
        })
        .collect()
}

/// The head redex, if any: the outermost application on the root spine
/// whose function part is an abstraction.
fn head_redex(t: &Term) -> Option<Redex> {
    let mut path = Path::root();
    let mut cur = t;
    loop {
        match cur {
            Term::App(fun, arg) => {
                if let Term::Abs(b, _) = &**fun {
                    return Some(Redex {
                        rule: Rule::Head,
                        position: path,
                        detail: RedexDetail::Pair {
                            binder: b.name.clone(),
                            argument: (**arg).clone(),
                        },
                    });
                }
                path = path.child(PathStep::Fun);
                cur = fun;
            }
            Term::Abs(_, body) => {
                path = path.child(PathStep::Body);
                cur = body;
            }
            Term::Var(_) => return None,
        }
    }
}

/// The linear head redex, if any.
///
/// The head variable of the term is located on the root spine; a redex
/// exists exactly when its binder is a spine abstraction matched with a
/// spine argument. The redex sits at that argument's application node and
/// replaces the head occurrence itself.
fn linear_head_redex(t: &Term) -> Option<Redex> {
    let spine = analyze_spine(t);
    // The binder for the head occurrence is the hole-nearest spine
    // abstraction carrying its name (the only one, under distinct names).
    let binder_pos = spine
        .word
        .iter()
        .rposition(|item| matches!(item, SpineItem::SAbs(b) if b.name == spine.head_var))?;
    let &(arg_pos, _) = spine.matching.iter().find(|&&(_, j)| j == binder_pos)?;
    Some(Redex {
        rule: Rule::LinearHead,
        position: Path(word_steps(&spine.word[..arg_pos])),
        detail: RedexDetail::Occurrence {
            binder: spine.head_var.clone(),
            occurrence: Path(word_steps(&spine.word)),
        },
    })
}

/// Collect, in one preorder pass, the node-anchored redexes of `rule`
/// (which must be `Beta`, `BetaDistance`, `Linear`, `Garbage`, or `Affine`).
fn collect_node_redexes(t: &Term, rule: Rule, path: &mut Path, out: &mut Vec<Redex>) {
    if let Term::App(fun, arg) = t {
        match rule {
            Rule::Beta => {
                if let Term::Abs(b, _) = &**fun {
                    out.push(Redex {
                        rule: Rule::Beta,
                        position: path.clone(),
                        detail: RedexDetail::Pair {
                            binder: b.name.clone(),
                            argument: (**arg).clone(),
                        },
                    });
                }
            }
            Rule::BetaDistance => {
                if let Some((_, b, _)) = matched_binder(fun) {
                    out.push(Redex {
                        rule: Rule::BetaDistance,
                        position: path.clone(),
                        detail: RedexDetail::Pair {
                            binder: b.name.clone(),
                            argument: (**arg).clone(),
                        },
                    });
                }
            }
            Rule::Linear | Rule::Garbage | Rule::Affine => {
                if let Some((pi, b, body)) = matched_binder(fun) {
                    let occurrences = occurrence_paths(body, &b.name);
                    let want_linear = rule != Rule::Garbage;
                    let want_garbage = rule != Rule::Linear;
                    if want_linear && !occurrences.is_empty() {
                        let mut to_body = vec![PathStep::Fun];
                        to_body.extend_from_slice(&pi);
                        to_body.push(PathStep::Body);
                        for occ in &occurrences {
                            let mut full = to_body.clone();
                            full.extend_from_slice(occ);
                            out.push(Redex {
                                rule: Rule::Linear,
                                position: path.clone(),
                                detail: RedexDetail::Occurrence {
                                    binder: b.name.clone(),
                                    occurrence: path.join(&full),
                                },
                            });
                        }
                    }
                    if want_garbage && occurrences.is_empty() {
                        out.push(Redex {
                            rule: Rule::Garbage,
                            position: path.clone(),
                            detail: RedexDetail::Pair {
                                binder: b.name.clone(),
                                argument: (**arg).clone(),
                            },
                        });
                    }
                }
            }
            Rule::Head | Rule::LinearHead => unreachable!("handled at the root"),
        }
    }
    match t {
        Term::Var(_) => {}
        Term::Abs(_, body) => {
            path.0.push(PathStep::Body);
            collect_node_redexes(body, rule, path, out);
            path.0.pop();
        }
        Term::App(fun, arg) => {
            path.0.push(PathStep::Fun);
            collect_node_redexes(fun, rule, path, out);
            path.0.pop();
            path.0.push(PathStep::Arg);
            collect_node_redexes(arg, rule, path, out);
            path.0.pop();
        }
    }
}

/// All redexes of `rule` in `t`, in deterministic left-to-right,
/// outside-in order (a node's own redexes come before those of its
/// function part, which come before those of its argument).
///
/// `Head` and `LinearHead` are anchored at the root and yield at most one
/// redex. `Affine` redexes carry `Linear` or `Garbage` as their rule,
/// whichever fires at each node.
pub fn find_redexes(t: &Term, rule: Rule) -> Vec<Redex> {
    match rule {
        Rule::Head => head_redex(t).into_iter().collect(),
        Rule::LinearHead => linear_head_redex(t).into_iter().collect(),
        _ => {
            let mut out = Vec::new();
            collect_node_redexes(t, rule, &mut Path::root(), &mut out);
            out
        }
    }
}

/// Apply `r` to `t`, threading `supply` for fresh names.
///
/// The redex pattern is revalidated at its recorded position first, so a
/// redex recorded against an earlier term fails cleanly instead of
/// rewriting garbage. The result preserves the distinct-names discipline
/// whenever `t` satisfies it.
pub fn apply_step(t: &Term, r: &Redex, supply: &mut NameSupply) -> Result<Term, StepError> {
    supply.absorb(t);
    let node =
        subterm_at(t, &r.position.0).ok_or_else(|| stale(&r.position, "no such position"))?;
    let Term::App(fun, arg) = node else {
        return Err(stale(&r.position, "position is not an application"));
    };
    match r.rule {
        Rule::Beta | Rule::Head | Rule::BetaDistance => {
            let RedexDetail::Pair { binder, .. } = &r.detail else {
                return Err(stale(&r.position, "rule carries an occurrence, not a pair"));
            };
            if matches!(r.rule, Rule::Beta | Rule::Head) && !matches!(&**fun, Term::Abs(_, _)) {
                return Err(stale(&r.position, "function part is not an abstraction"));
            }
            if r.rule == Rule::Head && head_redex(t).as_ref() != Some(r) {
                return Err(stale(&r.position, "not the outermost head redex"));
            }
            let (pi, b, body) = matched_binder(fun)
                .ok_or_else(|| stale(&r.position, "no spine abstraction matches the argument"))?;
            if &b.name != binder {
                return Err(stale(&r.position, "matched binder changed"));
            }
            let contracted = substitute(body, &b.name.clone(), arg, supply);
            let new_fun = with_node_replaced(fun, &pi, contracted)
                .expect("path into the function part is valid");
            with_node_replaced(t, &r.position.0, new_fun)
                .ok_or_else(|| stale(&r.position, "no such position"))
        }
        Rule::Garbage => {
            let RedexDetail::Pair { binder, .. } = &r.detail else {
                return Err(stale(&r.position, "rule carries an occurrence, not a pair"));
            };
            let (pi, b, body) = matched_binder(fun)
                .ok_or_else(|| stale(&r.position, "no spine abstraction matches the argument"))?;
            if &b.name != binder {
                return Err(stale(&r.position, "matched binder changed"));
            }
            if body.free_vars().contains(&b.name) {
                return Err(stale(&r.position, "binder occurs free in the body"));
            }
            let new_fun = with_node_replaced(fun, &pi, body.clone())
                .expect("path into the function part is valid");
            with_node_replaced(t, &r.position.0, new_fun)
                .ok_or_else(|| stale(&r.position, "no such position"))
        }
        Rule::Linear | Rule::LinearHead => {
            let RedexDetail::Occurrence { binder, occurrence } = &r.detail else {
                return Err(stale(&r.position, "rule carries a pair, not an occurrence"));
            };
            if r.rule == Rule::LinearHead && linear_head_redex(t).as_ref() != Some(r) {
                return Err(stale(&r.position, "not the linear head redex"));
            }
            let (pi, b, _) = matched_binder(fun)
                .ok_or_else(|| stale(&r.position, "no spine abstraction matches the argument"))?;
            if &b.name != binder {
                return Err(stale(&r.position, "matched binder changed"));
            }
            let mut to_body = r.position.child(PathStep::Fun);
            to_body.0.extend_from_slice(&pi);
            to_body.0.push(PathStep::Body);
            if !occurrence.starts_with(&to_body) {
                return Err(stale(&r.position, "occurrence lies outside the redex body"));
            }
            match subterm_at(t, &occurrence.0) {
                Some(Term::Var(y)) if y == binder => {}
                _ => return Err(stale(&r.position, "occurrence is not the bound variable")),
            }
            let copy = fresh_copy(arg, supply);
            with_node_replaced(t, &occurrence.0, copy)
                .ok_or_else(|| stale(&r.position, "no such position"))
        }
        Rule::Affine => Err(stale(
            &r.position,
            "affine is a rule family; its redexes carry linear or garbage",
        )),
    }
}

/// A step budget proportional to the square of the term's size; the
/// default fuel for drivers that need one.
pub fn default_fuel(t: &Term) -> usize {
    10 * t.size() * t.size()
}

/// Reduce `t` with `rule` until no redex remains or `fuel` steps have
/// fired, always firing the first redex reported by [`find_redexes`].
///
/// Returns the final term, the full trace, and whether the budget ran out
/// with redexes remaining.
pub fn normalize(
    t: &Term,
    rule: Rule,
    fuel: usize,
    supply: &mut NameSupply,
) -> (Term, Trace, bool) {
    let mut cur = t.clone();
    let mut steps = Vec::new();
    let mut exhausted = false;
    loop {
        let redexes = find_redexes(&cur, rule);
        let Some(redex) = redexes.into_iter().next() else {
            break;
        };
        if steps.len() >= fuel {
            exhausted = true;
            break;
        }
        let next =
            apply_step(&cur, &redex, supply).expect("a redex reported by find_redexes applies");
        steps.push(Step {
            redex,
            result: next.clone(),
        });
        cur = next;
    }
    (
        cur,
        Trace {
            start: t.clone(),
            steps,
        },
        exhausted,
    )
}

/// Replay a trace and check it: every step's redex must apply to the
/// previous term, the recorded result must be α-equal to the replayed one,
/// and every intermediate term must keep names distinct.
pub fn validate_trace(tr: &Trace) -> Result<(), TraceError> {
    let mut supply = NameSupply::for_term(&tr.start);
    let mut cur = tr.start.clone();
    for (index, step) in tr.steps.iter().enumerate() {
        supply.absorb(&cur);
        let replayed = apply_step(&cur, &step.redex, &mut supply)
            .map_err(|source| TraceError::BadStep { index, source })?;
        if !crate::syntax::alpha_eq(&replayed, &step.result) {
            return Err(TraceError::ResultMismatch { index });
        }
        if !crate::syntax::has_distinct_names(&step.result) {
            return Err(TraceError::NamesViolated { index });
        }
        cur = step.result.clone();
    }
    Ok(())
}

/// Expand one β (or β-at-a-distance) step into affine steps: one `Linear`
/// step per free occurrence of the binder, leftmost first, then a single
/// `Garbage` step erasing the spent redex.
///
/// The final term of the returned trace is α-equal to `apply_step(t, r)`.
pub fn simulate_beta_by_affine(
    t: &Term,
    r: &Redex,
    supply: &mut NameSupply,
) -> Result<Trace, StepError> {
    if !matches!(r.rule, Rule::Beta | Rule::BetaDistance) {
        return Err(stale(
            &r.position,
            "only beta and beta-d steps can be simulated",
        ));
    }
    let binder = r.detail.binder().clone();
    let mut cur = t.clone();
    let mut steps = Vec::new();
    loop {
        // Replacing an occurrence never creates new ones: the argument sits
        // outside the binder's scope, so each pass strictly shrinks the count.
        let next_occurrence = find_redexes(&cur, Rule::Linear)
            .into_iter()
            .find(|cand| cand.position == r.position && cand.detail.binder() == &binder);
        let Some(linear) = next_occurrence else {
            break;
        };
        let next = apply_step(&cur, &linear, supply)?;
        steps.push(Step {
            redex: linear,
            result: next.clone(),
        });
        cur = next;
    }
    let garbage = find_redexes(&cur, Rule::Garbage)
        .into_iter()
        .find(|cand| cand.position == r.position && cand.detail.binder() == &binder)
        .ok_or_else(|| stale(&r.position, "redex vanished before the garbage step"))?;
    let next = apply_step(&cur, &garbage, supply)?;
    steps.push(Step {
        redex: garbage,
        result: next,
    });
    Ok(Trace {
        start: t.clone(),
        steps,
    })
}

/// Map a path valid after a garbage step back to the coordinates before
/// it. `p_g` addresses the erased application node and `pi` is the spine
/// path from its function part to the erased abstraction.
fn readdress_before_garbage(q: &Path, p_g: &Path, pi: &[PathStep]) -> Path {
    if !q.starts_with(p_g) {
        return q.clone();
    }
    let rest = &q.0[p_g.0.len()..];
    let mut mapped = p_g.child(PathStep::Fun);
    if rest.len() >= pi.len() && rest[..pi.len()] == *pi {
        // The path runs through the erasure point into the former body.
        mapped.0.extend_from_slice(pi);
        mapped.0.push(PathStep::Body);
        mapped.0.extend_from_slice(&rest[pi.len()..]);
    } else {
        // The path leaves the spine before the erasure point.
        mapped.0.extend_from_slice(rest);
    }
    mapped
}

/// Reorder an affine trace so all `Linear` steps precede all `Garbage`
/// steps, preserving the start and reaching an α-equal final term.
///
/// Adjacent (garbage, linear) steps are commuted pairwise: the linear step
/// is re-addressed to the coordinates before the erasure, which always
/// succeeds because an erased redex can never contain a later step. The
/// reordered trace is replayed and returned; a step that fails to apply is
/// reported with the state it no longer matches.
pub fn postpone_garbage(tr: &Trace) -> Result<Trace, PostponeError> {
    for step in &tr.steps {
        if !matches!(step.redex.rule, Rule::Linear | Rule::Garbage) {
            return Err(PostponeError::UnsupportedRule {
                rule: step.redex.rule,
            });
        }
    }
    // Pair each garbage step with the spine path from its application node
    // to the erased abstraction, read off the original pre-states. Linear
    // steps only ever replace variable leaves, which lie off that path, so
    // the stored path stays valid through every commutation.
    let mut items: Vec<(Redex, Vec<PathStep>)> = Vec::with_capacity(tr.steps.len());
    for (i, step) in tr.steps.iter().enumerate() {
        let pi = if step.redex.rule == Rule::Garbage {
            let pre_state = if i == 0 {
                &tr.start
            } else {
                &tr.steps[i - 1].result
            };
            let node = subterm_at(pre_state, &step.redex.position.0)
                .expect("garbage step position exists in its own pre-state");
            let Term::App(fun, _) = node else {
                unreachable!("garbage step fired on an application");
            };
            let (pi, _, _) = matched_binder(fun).expect("garbage step had a matched binder");
            pi
        } else {
            Vec::new()
        };
        items.push((step.redex.clone(), pi));
    }
    // Bubble every linear step leftwards over the garbage steps before it.
    while let Some(i) = (0..items.len().saturating_sub(1))
        .find(|&i| items[i].0.rule == Rule::Garbage && items[i + 1].0.rule == Rule::Linear)
    {
        let (garbage, pi) = items[i].clone();
        let (linear, _) = items[i + 1].clone();
        let RedexDetail::Occurrence { binder, occurrence } = &linear.detail else {
            unreachable!("linear redexes carry occurrences");
        };
        items[i] = (
            Redex {
                rule: Rule::Linear,
                position: readdress_before_garbage(&linear.position, &garbage.position, &pi),
                detail: RedexDetail::Occurrence {
                    binder: binder.clone(),
                    occurrence: readdress_before_garbage(occurrence, &garbage.position, &pi),
                },
            },
            Vec::new(),
        );
        items[i + 1] = (garbage, pi);
    }
    let redexes: Vec<Redex> = items.into_iter().map(|(r, _)| r).collect();
    let mut supply = NameSupply::for_term(&tr.start);
    let mut cur = tr.start.clone();
    let mut steps = Vec::new();
    for (index, redex) in redexes.iter().enumerate() {
        supply.absorb(&cur);
        let next =
            apply_step(&cur, redex, &mut supply).map_err(|source| PostponeError::Replay {
                index,
                state: cur.clone(),
                source,
            })?;
        steps.push(Step {
            redex: redex.clone(),
            result: next.clone(),
        });
        cur = next;
    }
    Ok(Trace {
        start: tr.start.clone(),
        steps,
    })
}

/// Contract the primary redexes of `t` innermost (hole-nearest) first
/// until none remain.
///
/// Substitution can expose new primary redexes, so the loop is guarded by
/// a step budget; exhausting it reports the state reached.
pub fn reduce_primary_redexes(t: &Term, supply: &mut NameSupply) -> Result<Term, FuelError> {
    let mut cur = t.clone();
    let mut fired = 0usize;
    let fuel = default_fuel(t).max(64);
    loop {
        let spine = analyze_spine(&cur);
        let Some(&(arg_pos, abs_pos)) = spine.matching.first() else {
            return Ok(cur);
        };
        if fired >= fuel {
            return Err(FuelError::Exhausted {
                steps: fired,
                state: cur,
            });
        }
        let SpineItem::SAbs(b) = &spine.word[abs_pos] else {
            unreachable!("matching pairs an argument with an abstraction");
        };
        let SpineItem::SArg(arg) = &spine.word[arg_pos] else {
            unreachable!("matching pairs an argument with an abstraction");
        };
        let redex = Redex {
            rule: Rule::BetaDistance,
            position: Path(word_steps(&spine.word[..arg_pos])),
            detail: RedexDetail::Pair {
                binder: b.name.clone(),
                argument: arg.clone(),
            },
        };
        cur = apply_step(&cur, &redex, supply).expect("the hole-nearest primary redex applies");
        fired += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::syntax::{alpha_eq, has_distinct_names};

    fn t(src: &str) -> Term {
        parse_term(src).expect("test term parses")
    }

    fn supply_for(term: &Term) -> NameSupply {
        NameSupply::for_term(term)
    }

    #[test]
    fn paths_print_dot_joined_with_a_dot_for_the_root() {
        assert_eq!(Path::root().to_string(), ".");
        let p = Path(vec![PathStep::Fun, PathStep::Body, PathStep::Arg]);
        assert_eq!(p.to_string(), "fun.body.arg");
    }

    #[test]
    fn rule_names_round_trip_through_strings() {
        for rule in Rule::ALL {
            assert_eq!(rule.to_string().parse::<Rule>(), Ok(rule));
        }
        assert!("eta".parse::<Rule>().is_err());
    }

    #[test]
    fn a_term_applied_to_itself_has_two_linear_redexes() {
        let term = t(r"(\x. x x) y");
        let redexes = find_redexes(&term, Rule::Linear);
        assert_eq!(redexes.len(), 2);
        assert!(redexes.iter().all(|r| r.position.is_root()));
        assert!(redexes.iter().all(|r| r.detail.binder() == &Name::new("x")));
    }

    #[test]
    fn applying_the_leftmost_linear_redex_copies_the_argument_in() {
        let term = t(r"(\x. x x) y");
        let mut supply = supply_for(&term);
        let first = find_redexes(&term, Rule::Linear).remove(0);
        let result = apply_step(&term, &first, &mut supply).unwrap();
        assert!(alpha_eq(&result, &t(r"(\x. y x) y")));
    }

    #[test]
    fn beta_at_a_distance_fires_through_the_balanced_context() {
        let term = t(r"(\y. \x. x z) u s");
        let redexes = find_redexes(&term, Rule::BetaDistance);
        // Outermost first: (x, s) at the root, then (y, u) one step in.
        assert_eq!(redexes.len(), 2);
        assert_eq!(redexes[0].detail.binder(), &Name::new("x"));
        assert!(redexes[0].position.is_root());
        assert_eq!(redexes[1].detail.binder(), &Name::new("y"));
        let mut supply = supply_for(&term);
        let result = apply_step(&term, &redexes[0], &mut supply).unwrap();
        assert!(alpha_eq(&result, &t(r"(\y. s z) u")));
    }

    #[test]
    fn a_discarded_argument_is_a_garbage_redex_and_not_a_linear_one() {
        let term = t(r"(\x. z) y");
        assert!(find_redexes(&term, Rule::Linear).is_empty());
        let garbage = find_redexes(&term, Rule::Garbage);
        assert_eq!(garbage.len(), 1);
        let mut supply = supply_for(&term);
        let result = apply_step(&term, &garbage[0], &mut supply).unwrap();
        assert!(alpha_eq(&result, &t("z")));
    }

    #[test]
    fn the_head_redex_is_the_outermost_spine_step() {
        let term = t(r"\a. (\y. (\x. x) y w) v");
        let redexes = find_redexes(&term, Rule::Head);
        assert_eq!(redexes.len(), 1);
        assert_eq!(redexes[0].detail.binder(), &Name::new("y"));
        assert_eq!(redexes[0].position.to_string(), "body");
        let mut supply = supply_for(&term);
        let result = apply_step(&term, &redexes[0], &mut supply).unwrap();
        assert!(alpha_eq(&result, &t(r"\a. (\x. x) v w")));
    }

    #[test]
    fn a_head_normal_form_has_no_head_redex() {
        for src in [r"\x. x", "z w", r"\f. \x. f (f x)", "y"] {
            assert!(find_redexes(&t(src), Rule::Head).is_empty());
        }
    }

    #[test]
    fn the_linear_head_redex_targets_the_head_occurrence() {
        let term = t(r"(\y. \x. x) u s");
        let redexes = find_redexes(&term, Rule::LinearHead);
        assert_eq!(redexes.len(), 1);
        let RedexDetail::Occurrence { binder, occurrence } = &redexes[0].detail else {
            panic!("linear head redexes carry occurrences");
        };
        assert_eq!(binder, &Name::new("x"));
        assert_eq!(occurrence.to_string(), "fun.fun.body.body");
        assert!(redexes[0].position.is_root());
    }

    #[test]
    fn a_free_or_unmatched_head_variable_admits_no_linear_head_redex() {
        // Free head variable.
        assert!(find_redexes(&t("z w"), Rule::LinearHead).is_empty());
        // The head variable's binder is a spine abstraction, but unmatched.
        assert!(find_redexes(&t(r"\x. x y"), Rule::LinearHead).is_empty());
        // The binder is matched but the head occurrence is another variable.
        assert!(find_redexes(&t(r"(\x. z x) y"), Rule::LinearHead).is_empty());
    }

    #[test]
    fn normalize_contracts_an_applied_duplicator_in_one_beta_step() {
        let term = t(r"(\x. x x) y");
        let mut supply = supply_for(&term);
        let (nf, trace, exhausted) = normalize(&term, Rule::Beta, 100, &mut supply);
        assert!(!exhausted);
        assert_eq!(trace.len(), 1);
        assert!(alpha_eq(&nf, &t("y y")));
        validate_trace(&trace).unwrap();
    }

    #[test]
    fn normalize_reaches_the_same_form_by_three_affine_steps() {
        let term = t(r"(\x. x x) y");
        let mut supply = supply_for(&term);
        let (nf, trace, exhausted) = normalize(&term, Rule::Affine, 100, &mut supply);
        assert!(!exhausted);
        assert_eq!(trace.len(), 3);
        let rules: Vec<Rule> = trace.steps.iter().map(|s| s.redex.rule).collect();
        assert_eq!(rules, vec![Rule::Linear, Rule::Linear, Rule::Garbage]);
        assert!(alpha_eq(&nf, &t("y y")));
        validate_trace(&trace).unwrap();
    }

    #[test]
    fn linear_head_normalization_stops_after_filling_the_head() {
        let term = t(r"(\y. \x. x) u s");
        let mut supply = supply_for(&term);
        let (nf, trace, exhausted) = normalize(&term, Rule::LinearHead, 100, &mut supply);
        assert!(!exhausted);
        assert_eq!(trace.len(), 1);
        // The head occurrence holds a fresh copy of s; for a variable the
        // copy is the variable itself, and the redex is kept.
        assert!(alpha_eq(&nf, &t(r"(\y. \x. s) u s")));
        assert!(find_redexes(&nf, Rule::LinearHead).is_empty());
        validate_trace(&trace).unwrap();
    }

    #[test]
    fn normalize_reports_fuel_exhaustion_on_a_looping_term() {
        let term = t(r"(\x. x x) (\y. y y)");
        let mut supply = supply_for(&term);
        let (_, trace, exhausted) = normalize(&term, Rule::Beta, 5, &mut supply);
        assert!(exhausted);
        assert_eq!(trace.len(), 5);
        validate_trace(&trace).unwrap();
    }

    #[test]
    fn a_stale_redex_is_rejected_instead_of_rewriting() {
        let term = t(r"(\x. x x) y");
        let redex = find_redexes(&term, Rule::Beta).remove(0);
        let mut supply = supply_for(&term);
        let reduced = apply_step(&term, &redex, &mut supply).unwrap();
        let err = apply_step(&reduced, &redex, &mut supply).unwrap_err();
        assert!(matches!(err, StepError::Stale { .. }));
    }

    #[test]
    fn simulation_expands_a_duplicating_beta_step_into_three_affine_steps() {
        let term = t(r"(\x. x x) y");
        let redex = find_redexes(&term, Rule::Beta).remove(0);
        let mut supply = supply_for(&term);
        let direct = apply_step(&term, &redex, &mut supply).unwrap();
        let trace = simulate_beta_by_affine(&term, &redex, &mut supply).unwrap();
        assert_eq!(trace.len(), 3);
        let rules: Vec<Rule> = trace.steps.iter().map(|s| s.redex.rule).collect();
        assert_eq!(rules, vec![Rule::Linear, Rule::Linear, Rule::Garbage]);
        assert!(alpha_eq(trace.final_term(), &direct));
        validate_trace(&trace).unwrap();
    }

    #[test]
    fn simulation_of_an_erasing_step_is_a_single_garbage_step() {
        let term = t(r"(\x. z) y");
        let redex = find_redexes(&term, Rule::Beta).remove(0);
        let mut supply = supply_for(&term);
        let direct = apply_step(&term, &redex, &mut supply).unwrap();
        let trace = simulate_beta_by_affine(&term, &redex, &mut supply).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.steps[0].redex.rule, Rule::Garbage);
        assert!(alpha_eq(trace.final_term(), &direct));
    }

    #[test]
    fn simulation_handles_beta_at_a_distance() {
        let term = t(r"(\y. \x. x z x) u s");
        let redex = find_redexes(&term, Rule::BetaDistance).remove(0);
        assert_eq!(redex.detail.binder(), &Name::new("x"));
        let mut supply = supply_for(&term);
        let direct = apply_step(&term, &redex, &mut supply).unwrap();
        let trace = simulate_beta_by_affine(&term, &redex, &mut supply).unwrap();
        assert_eq!(trace.len(), 3);
        assert!(alpha_eq(trace.final_term(), &direct));
        validate_trace(&trace).unwrap();
    }

    #[test]
    fn garbage_steps_can_be_postponed_past_linear_ones() {
        // Reduce affinely, which interleaves garbage among linear steps.
        let term = t(r"(\y. (\x. x x) w) v");
        let mut supply = supply_for(&term);
        let (nf, trace, _) = normalize(&term, Rule::Affine, 100, &mut supply);
        let rules: Vec<Rule> = trace.steps.iter().map(|s| s.redex.rule).collect();
        assert!(rules.contains(&Rule::Garbage) && rules.contains(&Rule::Linear));
        let reordered = postpone_garbage(&trace).unwrap();
        let boundary = reordered
            .steps
            .iter()
            .position(|s| s.redex.rule == Rule::Garbage)
            .unwrap_or(reordered.len());
        assert!(reordered.steps[boundary..]
            .iter()
            .all(|s| s.redex.rule == Rule::Garbage));
        assert_eq!(reordered.len(), trace.len());
        assert!(alpha_eq(reordered.final_term(), &nf));
        assert!(alpha_eq(&reordered.start, &term));
        validate_trace(&reordered).unwrap();
    }

    #[test]
    fn postponement_readdresses_a_linear_step_through_the_erased_redex() {
        // The garbage step erases an enclosing redex; the later linear step
        // fires inside what was its body and must be re-addressed.
        let term = t(r"(\y. (\x. x x) w) v");
        let mut supply = supply_for(&term);
        let garbage = find_redexes(&term, Rule::Garbage)
            .into_iter()
            .find(|r| r.detail.binder() == &Name::new("y"))
            .unwrap();
        let after_garbage = apply_step(&term, &garbage, &mut supply).unwrap();
        let linear = find_redexes(&after_garbage, Rule::Linear).remove(0);
        let mut steps = Vec::new();
        steps.push(Step {
            redex: garbage,
            result: after_garbage.clone(),
        });
        let after_linear = apply_step(&after_garbage, &linear, &mut supply).unwrap();
        steps.push(Step {
            redex: linear,
            result: after_linear.clone(),
        });
        let trace = Trace {
            start: term.clone(),
            steps,
        };
        let reordered = postpone_garbage(&trace).unwrap();
        assert_eq!(reordered.steps[0].redex.rule, Rule::Linear);
        assert_eq!(reordered.steps[1].redex.rule, Rule::Garbage);
        assert_eq!(reordered.steps[0].redex.position.to_string(), "fun.body");
        assert!(alpha_eq(reordered.final_term(), &after_linear));
        validate_trace(&reordered).unwrap();
    }

    #[test]
    fn primary_redexes_reduce_innermost_first_to_the_expected_forms() {
        let mut supply = NameSupply::new();
        for (src, expect) in [
            (r"(\y. (\x. z x) t) s", "z t"),
            ("z", "z"),
            (r"(\x. x) t", "t"),
        ] {
            let term = t(src);
            supply.absorb(&term);
            let reduced = reduce_primary_redexes(&term, &mut supply).unwrap();
            assert!(alpha_eq(&reduced, &t(expect)), "{src} reduced to {reduced}");
        }
    }

    #[test]
    fn primary_redex_reduction_reports_exhaustion_on_a_looping_term() {
        let term = t(r"(\x. x x) (\y. y y)");
        let mut supply = supply_for(&term);
        assert!(matches!(
            reduce_primary_redexes(&term, &mut supply),
            Err(FuelError::Exhausted { .. })
        ));
    }

    #[test]
    fn a_linear_step_grows_the_term_by_the_argument_size_less_one() {
        let term = t(r"(\x. x (x w)) (\f. \u. f u)");
        let arg_size = t(r"\f. \u. f u").size();
        let mut supply = supply_for(&term);
        for redex in find_redexes(&term, Rule::Linear) {
            let result = apply_step(&term, &redex, &mut supply).unwrap();
            assert_eq!(result.size(), term.size() + arg_size - 1);
            assert!(has_distinct_names(&result));
        }
    }

    #[test]
    fn every_rule_preserves_the_distinct_names_discipline() {
        let sources = [
            r"(\x. x x) (\f. \u. f u)",
            r"(\y. \x. x y x) (\u. u) s",
            r"(\y. (\x. x x) w) v",
            r"\a. (\y. (\x. x) y w) v",
        ];
        for src in sources {
            for rule in Rule::ALL {
                let term = t(src);
                assert!(has_distinct_names(&term), "test input {src}");
                let mut supply = supply_for(&term);
                for redex in find_redexes(&term, rule) {
                    let result = apply_step(&term, &redex, &mut supply).unwrap();
                    assert!(has_distinct_names(&result), "{rule} on {src} gave {result}");
                }
            }
        }
    }

    #[test]
    fn beta_and_beta_at_a_distance_normal_forms_agree() {
        let sources = [
            r"(\y. \x. x z) u s",
            r"(\x. x x) y",
            r"(\f. f ((\u. u) w)) (\v. v)",
        ];
        for src in sources {
            let term = t(src);
            let mut supply = supply_for(&term);
            let (beta_nf, _, e1) = normalize(&term, Rule::Beta, 200, &mut supply);
            let (betad_nf, _, e2) = normalize(&term, Rule::BetaDistance, 200, &mut supply);
            assert!(!e1 && !e2);
            assert!(
                alpha_eq(&beta_nf, &betad_nf),
                "{src}: {beta_nf} versus {betad_nf}"
            );
        }
    }
}
