//! Named property suites over the generators.
//!
//! Each suite pairs a deterministic input generator with a deterministic
//! check, so a report is a pure function of its configuration: the same
//! `(suite, config, count)` always yields a byte-identical report. Case `i`
//! of a run uses seed `config.seed + i`, and every `FAIL` line prints that
//! sub-seed, so a single case can be replayed with `count = 1`.
//!
//! When a case fails, the reported input is shrunk greedily: the smallest
//! proper subterm that still fails the check (suites whose check cannot be
//! re-derived from a subterm skip shrinking and report the original input).

use std::collections::HashSet;
use std::fmt;

use crate::canon::{
    canonical_e_context, head_canonical, is_head_canonical, normalize_e, rewrite_e_step, Selector,
};
use crate::equiv::{equivalent, Decision, EquivRelation};
use crate::gen::{enumerate_terms, gen_e_context, gen_term, gen_typed_term, GenConfig};
use crate::measure::{
    bump, collapse, default_valuation, interpret, measure, probe_values, value_lt,
};
use crate::parse::parse_term;
use crate::reduce::{
    apply_step, default_fuel, find_redexes, normalize, postpone_garbage, simulate_beta_by_affine,
    validate_trace, Rule, Trace,
};
use crate::spine::{
    analyze_spine, decompose, eta, match_word, plug, primary_redexes, EContext, SpineItem,
};
use crate::syntax::{
    alpha_eq, apply_env, ensure_distinct_names, fresh_copy, has_distinct_names, substitute, Binder,
    Name, NameSupply, Term,
};
use crate::types::{check_subject_reduction, infer, SimpleType, TypeContext};

/// One counterexample found by a suite.
#[derive(Debug, Clone)]
pub struct Failure {
    /// Sub-seed that reproduces this case (run the suite with this seed and
    /// a count of 1).
    pub seed: u64,
    /// The (shrunk) input exhibiting the failure.
    pub input: Term,
    /// What went wrong.
    pub message: String,
}

/// Outcome of running one suite.
#[derive(Debug, Clone)]
pub struct Report {
    pub suite: String,
    pub cases: usize,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn passed(&self) -> usize {
        self.cases - self.failures.len()
    }

    pub fn passed_all(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fail in &self.failures {
            writeln!(f, "FAIL {} {} {}", self.suite, fail.seed, fail.input)?;
        }
        write!(
            f,
            "{}: {} passed, {} failed",
            self.suite,
            self.passed(),
            self.failures.len()
        )
    }
}

/// Request for a suite that is not registered.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no such suite: {name} (run with one of: {known})")]
pub struct UnknownSuite {
    pub name: String,
    pub known: String,
}

type GenFn = fn(&GenConfig) -> Term;
type CheckFn = fn(&Term, &GenConfig) -> Option<String>;

struct SuiteDef {
    name: &'static str,
    gen: GenFn,
    check: CheckFn,
    /// Whether the check can be re-derived from an arbitrary subterm.
    shrink: bool,
}

const SUITES: &[SuiteDef] = &[
    SuiteDef {
        name: "parse-print",
        gen: gen_input_term,
        check: check_parse_print,
        shrink: true,
    },
    SuiteDef {
        name: "parse-print-typed",
        gen: gen_input_typed,
        check: check_parse_print,
        shrink: true,
    },
    SuiteDef {
        name: "distinct-names",
        gen: gen_input_term,
        check: check_distinct_names,
        shrink: true,
    },
    SuiteDef {
        name: "gen-determinism",
        gen: gen_input_term,
        check: check_gen_determinism,
        shrink: false,
    },
    SuiteDef {
        name: "decompose-reassemble",
        gen: gen_input_term,
        check: check_decompose,
        shrink: true,
    },
    SuiteDef {
        name: "env-composition",
        gen: gen_input_context,
        check: check_env_composition,
        shrink: false,
    },
    SuiteDef {
        name: "eta-beta",
        gen: gen_input_plugged,
        check: check_eta_beta,
        shrink: true,
    },
    SuiteDef {
        name: "canonical-uniqueness",
        gen: gen_input_term,
        check: check_canonical_uniqueness,
        shrink: true,
    },
    SuiteDef {
        name: "canonical-fixpoint",
        gen: gen_input_term,
        check: check_canonical_fixpoint,
        shrink: true,
    },
    SuiteDef {
        name: "order-preservation",
        gen: gen_input_term,
        check: check_order_preservation,
        shrink: true,
    },
    SuiteDef {
        name: "context-canonicalization",
        gen: gen_input_context,
        check: check_context_canonicalization,
        shrink: false,
    },
    SuiteDef {
        name: "containment",
        gen: gen_input_term,
        check: check_containment,
        shrink: true,
    },
    SuiteDef {
        name: "beta-containment",
        gen: gen_input_typed,
        check: check_beta_containment,
        shrink: true,
    },
    SuiteDef {
        name: "betad-beta-agreement",
        gen: gen_input_typed,
        check: check_betad_beta,
        shrink: true,
    },
    SuiteDef {
        name: "head-shape",
        gen: gen_input_typed,
        check: check_head_shape,
        shrink: true,
    },
    SuiteDef {
        name: "linear-head-unique",
        gen: gen_input_term,
        check: check_linear_head_unique,
        shrink: true,
    },
    SuiteDef {
        name: "simulate-beta",
        gen: gen_input_typed,
        check: check_simulate_affine,
        shrink: true,
    },
    SuiteDef {
        name: "postpone-garbage",
        gen: gen_input_typed,
        check: check_postpone,
        shrink: true,
    },
    SuiteDef {
        name: "lhnf-hnf",
        gen: gen_input_typed,
        check: check_lhnf_hnf,
        shrink: true,
    },
    SuiteDef {
        name: "subject-reduction",
        gen: gen_input_typed,
        check: check_subject_red,
        shrink: true,
    },
    SuiteDef {
        name: "measure-decrease",
        gen: gen_input_typed,
        check: check_measure_decrease,
        shrink: true,
    },
    SuiteDef {
        name: "substitution-bound",
        gen: gen_input_substitution,
        check: check_substitution_bound,
        shrink: true,
    },
    SuiteDef {
        name: "bump-laws",
        gen: gen_input_typed,
        check: check_bump_laws,
        shrink: true,
    },
    SuiteDef {
        name: "increasing",
        gen: gen_input_typed,
        check: check_increasing,
        shrink: true,
    },
    SuiteDef {
        name: "measure-alpha",
        gen: gen_input_typed,
        check: check_measure_alpha,
        shrink: true,
    },
    SuiteDef {
        name: "trace-hygiene",
        gen: gen_input_typed,
        check: check_trace_hygiene,
        shrink: true,
    },
];

/// Names of all registered suites, in a fixed order.
pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.name).collect()
}

/// Runs `count` cases of the named suite, one sub-seed per case.
pub fn run_property_suite(
    name: &str,
    cfg: &GenConfig,
    count: usize,
) -> Result<Report, UnknownSuite> {
    let def = SUITES
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| UnknownSuite {
            name: name.to_string(),
            known: suite_names().join(", "),
        })?;
    let mut failures = Vec::new();
    for i in 0..count {
        let sub = cfg.with_seed(cfg.seed.wrapping_add(i as u64));
        let input = (def.gen)(&sub);
        if let Some(message) = (def.check)(&input, &sub) {
            let (input, message) = if def.shrink {
                shrink_input(input, message, &sub, def.check)
            } else {
                (input, message)
            };
            failures.push(Failure {
                seed: sub.seed,
                input,
                message,
            });
        }
    }
    Ok(Report {
        suite: name.to_string(),
        cases: count,
        failures,
    })
}

/// Checks agreement of plain and at-a-distance beta on *every* term of size
/// at most `max_size` over the two-name pool `{u, w}`.
///
/// Feasible only for tiny sizes; the universe grows exponentially.
pub fn run_exhaustive_agreement(max_size: usize) -> Report {
    let pool = [Name::new("u"), Name::new("w")];
    let terms = enumerate_terms(max_size, &pool);
    let cases = terms.len();
    let mut failures = Vec::new();
    for (i, t) in terms.into_iter().enumerate() {
        if let Some(message) = agreement_message(&t, 10_000) {
            failures.push(Failure {
                seed: i as u64,
                input: t,
                message,
            });
        }
    }
    Report {
        suite: "betad-beta-exhaustive".to_string(),
        cases,
        failures,
    }
}

// ---------------------------------------------------------------------------
// Shrinking
// ---------------------------------------------------------------------------

fn proper_subterms(t: &Term) -> Vec<Term> {
    fn walk(t: &Term, out: &mut Vec<Term>, root: bool) {
        if !root {
            out.push(t.clone());
        }
        match t {
            Term::Var(_) => {}
            Term::Abs(_, body) => walk(body, out, false),
            Term::App(fun, arg) => {
                walk(fun, out, false);
                walk(arg, out, false);
            }
        }
    }
    let mut out = Vec::new();
    walk(t, &mut out, true);
    out.sort_by_key(|s| s.size());
    out
}

/// Greedy shrink: repeatedly move to the smallest proper subterm that still
/// fails the check. A subterm that no longer satisfies the suite's
/// precondition simply passes the check, so preconditions are preserved.
fn shrink_input(input: Term, message: String, cfg: &GenConfig, check: CheckFn) -> (Term, String) {
    let mut cur = input;
    let mut msg = message;
    loop {
        let mut advanced = false;
        for cand in proper_subterms(&cur) {
            if let Some(m) = check(&cand, cfg) {
                cur = cand;
                msg = m;
                advanced = true;
                break;
            }
        }
        if !advanced {
            return (cur, msg);
        }
    }
}

// ---------------------------------------------------------------------------
// Input generators
// ---------------------------------------------------------------------------

fn gen_input_term(cfg: &GenConfig) -> Term {
    gen_term(cfg)
}

fn typed_target(seed: u64) -> SimpleType {
    let o = SimpleType::Base;
    match seed % 4 {
        0 => o,
        1 => SimpleType::arrow(o.clone(), o),
        2 => SimpleType::arrow(o.clone(), SimpleType::arrow(o.clone(), o)),
        _ => SimpleType::arrow(SimpleType::arrow(o.clone(), o.clone()), o),
    }
}

/// Closed fallback used when goal-directed generation gives up; keeps the
/// suites total over arbitrary configurations.
fn fallback_typed() -> Term {
    let b = Name::indexed("b", 1);
    Term::abs(Binder::annotated(b.clone(), SimpleType::Base), Term::Var(b))
}

fn gen_input_typed(cfg: &GenConfig) -> Term {
    gen_typed_term(cfg, &typed_target(cfg.seed)).unwrap_or_else(|_| fallback_typed())
}

/// A fresh core variable that generated binders cannot collide with.
fn core_var() -> Term {
    Term::Var(Name::indexed("core", 4242))
}

/// An E-context plugged with a core variable, for display and shrinking.
fn gen_input_context(cfg: &GenConfig) -> Term {
    gen_e_context(cfg).plug(core_var())
}

/// An E-context plugged with a small random body.
fn gen_input_plugged(cfg: &GenConfig) -> Term {
    let e = gen_e_context(cfg);
    let core_cfg = GenConfig {
        max_size: (cfg.max_size / 2).max(2),
        ..cfg.clone()
    }
    .with_seed(cfg.seed ^ 0x5eed);
    let raw = e.plug(gen_term(&core_cfg));
    // The context and the body draw fresh names from separate supplies, so
    // rename to restore the distinct-names discipline.
    let mut supply = NameSupply::for_term(&raw);
    ensure_distinct_names(&raw, &mut supply)
}

/// The distinguished free variable of the substitution-bound suite.
fn substitution_var() -> Name {
    Name::indexed("sub", 9000)
}

fn substitution_pool(cfg: &GenConfig) -> TypeContext {
    let mut pool = cfg.free_var_pool.clone();
    pool.bind(substitution_var(), typed_target(cfg.seed.wrapping_add(1)));
    pool
}

fn gen_input_substitution(cfg: &GenConfig) -> Term {
    let cfg2 = GenConfig {
        free_var_pool: substitution_pool(cfg),
        ..cfg.clone()
    };
    gen_typed_term(&cfg2, &typed_target(cfg.seed)).unwrap_or_else(|_| Term::Var(substitution_var()))
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn suite_fuel(t: &Term) -> usize {
    default_fuel(t).max(100_000)
}

/// The type of `t` under the pool context, or `None` (precondition miss).
fn typable(t: &Term, cfg: &GenConfig) -> Option<SimpleType> {
    infer(t, &cfg.free_var_pool).ok()
}

fn states(tr: &Trace) -> Vec<&Term> {
    std::iter::once(&tr.start)
        .chain(tr.steps.iter().map(|s| &s.result))
        .collect()
}

/// Beta / beta-at-a-distance agreement on one term.
fn agreement_message(t: &Term, fuel: usize) -> Option<String> {
    let mut supply = NameSupply::for_term(t);
    let (nf_b, tr_b, ex_b) = normalize(t, Rule::Beta, fuel, &mut supply);
    if ex_b {
        return Some(format!("fuel exhausted normalizing {} with beta", t));
    }
    let (nf_d, tr_d, ex_d) = normalize(t, Rule::BetaDistance, fuel, &mut supply);
    if ex_d {
        return Some(format!("fuel exhausted normalizing {} with beta-d", t));
    }
    if !alpha_eq(&nf_b, &nf_d) {
        return Some(format!("normal forms disagree: {} vs {}", nf_b, nf_d));
    }
    for tr in [&tr_b, &tr_d] {
        if let Err(e) = validate_trace(tr) {
            return Some(format!("invalid trace: {}", e));
        }
        for state in states(tr) {
            let eb = find_redexes(state, Rule::Beta).is_empty();
            let ed = find_redexes(state, Rule::BetaDistance).is_empty();
            if eb != ed {
                return Some(format!(
                    "redex emptiness disagrees on {}: beta empty {}, beta-d empty {}",
                    state, eb, ed
                ));
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

fn check_parse_print(t: &Term, _cfg: &GenConfig) -> Option<String> {
    let printed = t.to_string();
    match parse_term(&printed) {
        Ok(back) if back == *t => None,
        Ok(back) => Some(format!("parse(print) changed the term: {} vs {}", back, t)),
        Err(e) => Some(format!("printed form `{}` fails to parse: {}", printed, e)),
    }
}

fn check_distinct_names(t: &Term, _cfg: &GenConfig) -> Option<String> {
    if !has_distinct_names(t) {
        return Some(format!("generated term violates distinct names: {}", t));
    }
    // Self-application duplicates every binder; repairing it must preserve
    // the term up to alpha.
    let clash = Term::app(t.clone(), t.clone());
    let mut supply = NameSupply::for_term(&clash);
    let fixed = ensure_distinct_names(&clash, &mut supply);
    if !has_distinct_names(&fixed) {
        return Some(format!("repair left duplicate binders in {}", fixed));
    }
    if !alpha_eq(&clash, &fixed) {
        return Some(format!("repair changed the term: {} vs {}", clash, fixed));
    }
    None
}

fn check_gen_determinism(t: &Term, cfg: &GenConfig) -> Option<String> {
    let again = gen_term(cfg);
    if again != *t {
        return Some(format!("same config generated {} then {}", t, again));
    }
    let target = typed_target(cfg.seed);
    if gen_typed_term(cfg, &target) != gen_typed_term(cfg, &target) {
        return Some("typed generation is not deterministic".to_string());
    }
    None
}

fn check_decompose(t: &Term, _cfg: &GenConfig) -> Option<String> {
    let d = decompose(t);
    let back = d.reassemble();
    if back != *t {
        return Some(format!(
            "decompose/reassemble changed the term: {} vs {}",
            back, t
        ));
    }
    for block in &d.blocks {
        if EContext::from_word(block.word().to_vec()).is_err() {
            return Some(format!("decomposition block is not balanced in {}", t));
        }
    }
    None
}

fn check_env_composition(_t: &Term, cfg: &GenConfig) -> Option<String> {
    let e = gen_e_context(cfg);
    let word = e.word();
    // Split points: positions where the bracket depth returns to zero.
    let mut depth = 0usize;
    let mut cuts = vec![0];
    for (i, item) in word.iter().enumerate() {
        match item {
            SpineItem::SArg(_) => depth += 1,
            SpineItem::SAbs(_) => depth = depth.saturating_sub(1),
        }
        if depth == 0 {
            cuts.push(i + 1);
        }
    }
    let whole = eta(&e);
    for &cut in &cuts {
        let left = EContext::from_word(word[..cut].to_vec()).ok()?;
        let right = EContext::from_word(word[cut..].to_vec()).ok()?;
        let composed = eta(&right).append(&eta(&left));
        if composed != whole {
            return Some(format!(
                "environment of a split at {} composes to [{}], expected [{}]",
                cut, composed, whole
            ));
        }
    }
    None
}

/// Contracting the primary redexes of a term, innermost pair first, lands on
/// the delayed-substitution reading of its spine environment.
fn check_eta_beta(t: &Term, _cfg: &GenConfig) -> Option<String> {
    let sa = analyze_spine(t);
    if sa.matching.is_empty() {
        return None;
    }
    let env = primary_redexes(t);
    let mut supply = NameSupply::for_term(t);
    let mut cur = t.clone();
    for pair in &env.pairs {
        let redexes = find_redexes(&cur, Rule::BetaDistance);
        let Some(r) = redexes
            .iter()
            .find(|r| r.detail.binder() == &pair.binder.name)
        else {
            return Some(format!(
                "matched binder {} has no distance redex in {}",
                pair.binder.name, cur
            ));
        };
        match apply_step(&cur, r, &mut supply) {
            Ok(next) => cur = next,
            Err(e) => return Some(format!("contraction failed: {}", e)),
        }
    }
    let matched: HashSet<usize> = sa.matching.iter().flat_map(|&(i, j)| [i, j]).collect();
    let residue: Vec<SpineItem> = sa
        .word
        .iter()
        .enumerate()
        .filter(|(k, _)| !matched.contains(k))
        .map(|(_, item)| item.clone())
        .collect();
    let core = plug(&residue, Term::Var(sa.head_var.clone()));
    let want = apply_env(&core, &env, &mut supply);
    if alpha_eq(&cur, &want) {
        None
    } else {
        Some(format!(
            "contracting primary pairs gives {}, expected {}",
            cur, want
        ))
    }
}

fn check_canonical_uniqueness(t: &Term, cfg: &GenConfig) -> Option<String> {
    let left = normalize_e(t, Selector::Leftmost);
    let right = normalize_e(t, Selector::Rightmost);
    let random = normalize_e(t, Selector::Random(cfg.seed));
    if left != right {
        return Some(format!(
            "selector changes the canonical form: {} vs {}",
            left, right
        ));
    }
    if left != random {
        return Some(format!(
            "random selector changes the canonical form: {} vs {}",
            left, random
        ));
    }
    let direct = head_canonical(t).to_term();
    if left != direct {
        return Some(format!(
            "rewriting gives {}, direct canonicalization gives {}",
            left, direct
        ));
    }
    if !is_head_canonical(&left) {
        return Some(format!(
            "canonical form is not recognized as canonical: {}",
            left
        ));
    }
    None
}

fn check_canonical_fixpoint(t: &Term, _cfg: &GenConfig) -> Option<String> {
    let canon = normalize_e(t, Selector::Leftmost);
    if let Some(more) = rewrite_e_step(&canon, Selector::Leftmost) {
        return Some(format!(
            "canonical form still rewrites: {} to {}",
            canon, more
        ));
    }
    let again = normalize_e(&canon, Selector::Rightmost);
    if again != canon {
        return Some(format!(
            "canonicalization is not idempotent: {} vs {}",
            canon, again
        ));
    }
    None
}

fn check_order_preservation(t: &Term, _cfg: &GenConfig) -> Option<String> {
    let before = primary_redexes(t);
    let mut cur = t.clone();
    while let Some(next) = rewrite_e_step(&cur, Selector::Leftmost) {
        let after = primary_redexes(&next);
        if after != before {
            return Some(format!(
                "spine move changed the primary redexes of {}: [{}] vs [{}]",
                next, after, before
            ));
        }
        cur = next;
    }
    None
}

fn check_context_canonicalization(_t: &Term, cfg: &GenConfig) -> Option<String> {
    let e = gen_e_context(cfg);
    let ec = canonical_e_context(&e);
    let (matching, unmatched_abs, unmatched_args) = match_word(ec.word());
    if !unmatched_abs.is_empty() || !unmatched_args.is_empty() {
        return Some("canonical context is not balanced".to_string());
    }
    for &(i, j) in &matching {
        if j != i + 1 {
            return Some(format!(
                "canonical context has a non-adjacent pair at ({}, {})",
                i, j
            ));
        }
    }
    if eta(&ec) != eta(&e) {
        return Some(format!(
            "canonicalization changed the environment: [{}] vs [{}]",
            eta(&ec),
            eta(&e)
        ));
    }
    let plugged = normalize_e(&e.plug(core_var()), Selector::Leftmost);
    if plugged != ec.plug(core_var()) {
        return Some(format!(
            "context canonicalization disagrees with term canonicalization: {} vs {}",
            ec.plug(core_var()),
            plugged
        ));
    }
    None
}

/// A partially canonicalized copy of `t` (a prefix of the rewrite sequence).
fn partial_canonicalize(t: &Term, seed: u64) -> Term {
    let sel = if seed & 8 == 0 {
        Selector::Leftmost
    } else {
        Selector::Rightmost
    };
    let steps = (seed % 5) as usize;
    let mut cur = t.clone();
    for _ in 0..steps {
        match rewrite_e_step(&cur, sel) {
            Some(next) => cur = next,
            None => break,
        }
    }
    cur
}

fn check_containment(t: &Term, cfg: &GenConfig) -> Option<String> {
    let fuel = suite_fuel(t);
    let variants = [
        partial_canonicalize(t, cfg.seed),
        normalize_e(t, Selector::Leftmost),
    ];
    for v in &variants {
        for rel in [
            EquivRelation::SurfaceE,
            EquivRelation::DeepE,
            EquivRelation::Sigma,
        ] {
            let d = equivalent(t, v, rel, fuel);
            if d != Decision::True {
                return Some(format!(
                    "{} should relate {} and {}, got {:?}",
                    rel, t, v, d
                ));
            }
        }
    }
    // On an arbitrary pair the implications must still hold.
    let other = gen_term(&cfg.with_seed(cfg.seed ^ 0x0dd));
    let chain = [
        EquivRelation::SurfaceE,
        EquivRelation::DeepE,
        EquivRelation::Sigma,
    ];
    for w in chain.windows(2) {
        let strong = equivalent(t, &other, w[0], fuel);
        let weak = equivalent(t, &other, w[1], fuel);
        if strong == Decision::True && weak != Decision::True {
            return Some(format!(
                "{} holds between {} and {} but {} does not",
                w[0], t, other, w[1]
            ));
        }
    }
    None
}

fn check_beta_containment(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    let fuel = suite_fuel(t);
    let v = normalize_e(t, Selector::Leftmost);
    for rel in [
        EquivRelation::SurfaceE,
        EquivRelation::DeepE,
        EquivRelation::Sigma,
        EquivRelation::Beta,
    ] {
        let d = equivalent(t, &v, rel, fuel);
        if d != Decision::True {
            return Some(format!(
                "{} should relate {} and its canonical form, got {:?}",
                rel, t, d
            ));
        }
    }
    None
}

fn check_betad_beta(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    agreement_message(t, suite_fuel(t))
}

fn check_head_shape(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    let mut supply = NameSupply::for_term(t);
    let (nf, tr, exhausted) = normalize(t, Rule::Head, suite_fuel(t), &mut supply);
    if exhausted {
        return Some(format!("fuel exhausted head-normalizing {}", t));
    }
    if let Err(e) = validate_trace(&tr) {
        return Some(format!("invalid head trace: {}", e));
    }
    if !find_redexes(&nf, Rule::Head).is_empty() {
        return Some(format!("head normal form still has a head redex: {}", nf));
    }
    let sa = analyze_spine(&nf);
    if !sa.matching.is_empty() {
        return Some(format!("head normal form has a matched pair: {}", nf));
    }
    let mut seen_arg = false;
    for item in &sa.word {
        match item {
            SpineItem::SArg(_) => seen_arg = true,
            SpineItem::SAbs(_) if seen_arg => {
                return Some(format!(
                    "head normal form has an abstraction under an argument: {}",
                    nf
                ));
            }
            SpineItem::SAbs(_) => {}
        }
    }
    None
}

fn check_linear_head_unique(t: &Term, _cfg: &GenConfig) -> Option<String> {
    let redexes = find_redexes(t, Rule::LinearHead);
    if redexes.len() > 1 {
        return Some(format!("{} linear head redexes in {}", redexes.len(), t));
    }
    None
}

fn check_simulate_affine(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    for r in find_redexes(t, Rule::BetaDistance) {
        let mut supply = NameSupply::for_term(t);
        let tr = match simulate_beta_by_affine(t, &r, &mut supply) {
            Ok(tr) => tr,
            Err(e) => return Some(format!("simulation of {} failed: {}", r, e)),
        };
        if let Err(e) = validate_trace(&tr) {
            return Some(format!("invalid simulation trace: {}", e));
        }
        if tr.is_empty() {
            return Some(format!("empty simulation trace for {} in {}", r, t));
        }
        for (i, step) in tr.steps.iter().enumerate() {
            let expected = if i + 1 == tr.len() {
                Rule::Garbage
            } else {
                Rule::Linear
            };
            if step.redex.rule != expected {
                return Some(format!(
                    "simulation step {} uses {}, expected {}",
                    i, step.redex.rule, expected
                ));
            }
        }
        let direct = match apply_step(t, &r, &mut supply) {
            Ok(d) => d,
            Err(e) => return Some(format!("direct contraction of {} failed: {}", r, e)),
        };
        if !alpha_eq(tr.final_term(), &direct) {
            return Some(format!(
                "simulation ends at {}, direct contraction gives {}",
                tr.final_term(),
                direct
            ));
        }
    }
    None
}

fn check_postpone(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    let mut supply = NameSupply::for_term(t);
    let (_, tr, exhausted) = normalize(t, Rule::Affine, suite_fuel(t), &mut supply);
    if exhausted {
        return Some(format!("fuel exhausted on affine normalization of {}", t));
    }
    if tr.is_empty() {
        return None;
    }
    let post = match postpone_garbage(&tr) {
        Ok(post) => post,
        Err(e) => return Some(format!("postponement failed: {}", e)),
    };
    if let Err(e) = validate_trace(&post) {
        return Some(format!("postponed trace is invalid: {}", e));
    }
    if post.len() != tr.len() {
        return Some(format!(
            "postponement changed the step count: {} vs {}",
            post.len(),
            tr.len()
        ));
    }
    let mut seen_garbage = false;
    for step in &post.steps {
        match step.redex.rule {
            Rule::Garbage => seen_garbage = true,
            Rule::Linear if seen_garbage => {
                return Some("a linear step follows a garbage step after postponement".to_string());
            }
            _ => {}
        }
    }
    if post.start != tr.start {
        return Some("postponement changed the start term".to_string());
    }
    if !alpha_eq(post.final_term(), tr.final_term()) {
        return Some(format!(
            "postponement changed the endpoint: {} vs {}",
            post.final_term(),
            tr.final_term()
        ));
    }
    None
}

fn check_lhnf_hnf(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    let fuel = suite_fuel(t);
    let mut supply = NameSupply::for_term(t);
    let (lhnf, tr, exhausted) = normalize(t, Rule::LinearHead, fuel, &mut supply);
    if exhausted {
        return Some(format!(
            "fuel exhausted on linear head normalization of {}",
            t
        ));
    }
    if let Err(e) = validate_trace(&tr) {
        return Some(format!("invalid linear head trace: {}", e));
    }
    let unpacked = match reduce_primary_redexes_checked(&lhnf, &mut supply) {
        Ok(u) => u,
        Err(msg) => return Some(msg),
    };
    let (via_lhnf, _, ex1) = normalize(&unpacked, Rule::Head, fuel, &mut supply);
    let (direct, _, ex2) = normalize(t, Rule::Head, fuel, &mut supply);
    if ex1 || ex2 {
        return Some(format!("fuel exhausted head-normalizing {}", t));
    }
    if !alpha_eq(&via_lhnf, &direct) {
        return Some(format!(
            "head normal forms disagree: {} via linear head, {} direct",
            via_lhnf, direct
        ));
    }
    None
}

fn reduce_primary_redexes_checked(t: &Term, supply: &mut NameSupply) -> Result<Term, String> {
    crate::reduce::reduce_primary_redexes(t, supply)
        .map_err(|e| format!("primary-redex evaluation of {} failed: {}", t, e))
}

fn check_subject_red(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    let fuel = suite_fuel(t);
    for rule in Rule::ALL {
        let mut supply = NameSupply::for_term(t);
        let (_, tr, exhausted) = normalize(t, rule, fuel, &mut supply);
        if exhausted {
            return Some(format!("fuel exhausted normalizing {} with {}", t, rule));
        }
        if let Err((i, e)) = check_subject_reduction(&tr, &cfg.free_var_pool) {
            return Some(format!(
                "type not preserved at step {} of the {} trace: {}",
                i, rule, e
            ));
        }
    }
    None
}

fn check_measure_decrease(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    let ctx = &cfg.free_var_pool;
    let base = match measure(t, ctx) {
        Ok(m) => m,
        Err(e) => return Some(format!("measure of {} failed: {}", t, e)),
    };
    let fuel = suite_fuel(t);
    for rule in Rule::ALL {
        let mut supply = NameSupply::for_term(t);
        for r in find_redexes(t, rule) {
            let next = match apply_step(t, &r, &mut supply) {
                Ok(next) => next,
                Err(e) => return Some(format!("contraction of {} failed: {}", r, e)),
            };
            match measure(&next, ctx) {
                Ok(m) if m < base => {}
                Ok(m) => {
                    return Some(format!(
                        "{} step does not decrease the measure: {} to {} ({} to {})",
                        rule, t, next, base, m
                    ));
                }
                Err(e) => return Some(format!("measure of {} failed: {}", next, e)),
            }
        }
        let (_, tr, exhausted) = normalize(t, rule, fuel, &mut supply);
        if exhausted {
            return Some(format!("fuel exhausted normalizing {} with {}", t, rule));
        }
        let mut prev = base;
        for step in &tr.steps {
            match measure(&step.result, ctx) {
                Ok(m) if m < prev => prev = m,
                Ok(m) => {
                    return Some(format!(
                        "measure fails to decrease along the {} trace: {} then {}",
                        rule, prev, m
                    ));
                }
                Err(e) => return Some(format!("measure of {} failed: {}", step.result, e)),
            }
        }
    }
    None
}

fn check_substitution_bound(t: &Term, cfg: &GenConfig) -> Option<String> {
    let x = substitution_var();
    if cfg.free_var_pool.lookup(&x).is_some() {
        return None;
    }
    let pool2 = substitution_pool(cfg);
    let ty = infer(t, &pool2).ok()?;
    let x_ty = typed_target(cfg.seed.wrapping_add(1));
    let s = gen_typed_term(&cfg.with_seed(cfg.seed ^ 0xabcd), &x_ty).ok()?;
    let result = (|| -> Result<Option<String>, crate::measure::MeasureError> {
        let val = default_valuation(&cfg.free_var_pool);
        let s_val = interpret(&s, &val)?;
        let mut val_with_x = val.clone();
        val_with_x.bind(x.clone(), s_val);
        let bound = collapse(&ty, &interpret(t, &val_with_x)?)?;
        let mut supply = NameSupply::for_term(t);
        supply.absorb(&s);
        let substituted = substitute(t, &x, &s, &mut supply);
        let actual = collapse(&ty, &interpret(&substituted, &val)?)?;
        if actual > bound {
            return Ok(Some(format!(
                "substitution exceeds its bound: {} from {}, env gives {}",
                actual, substituted, bound
            )));
        }
        if t.free_vars().contains(&x) && actual >= bound {
            return Ok(Some(format!(
                "substitution for an occurring variable is not strictly below its bound: {} vs {}",
                actual, bound
            )));
        }
        Ok(None)
    })();
    match result {
        Ok(msg) => msg,
        Err(e) => Some(format!("interpretation failed: {}", e)),
    }
}

fn check_bump_laws(t: &Term, cfg: &GenConfig) -> Option<String> {
    let ty = typable(t, cfg)?;
    let val = default_valuation(&cfg.free_var_pool);
    let mut values = probe_values(&ty);
    match interpret(t, &val) {
        Ok(v) => values.push(v),
        Err(e) => return Some(format!("interpretation of {} failed: {}", t, e)),
    }
    let result = (|| -> Result<Option<String>, crate::measure::MeasureError> {
        for v in &values {
            if &bump(v, 0)? != v {
                return Ok(Some("bump by zero changed a value".to_string()));
            }
            for a in 1..=2u64 {
                for b in 1..=2u64 {
                    let two = bump(&bump(v, a)?, b)?;
                    let one = bump(v, a + b)?;
                    if two != one {
                        return Ok(Some(format!(
                            "bump does not merge: bump(bump(v,{}),{}) differs from bump(v,{})",
                            a,
                            b,
                            a + b
                        )));
                    }
                }
            }
            for k in 1..=3u64 {
                if collapse(&ty, &bump(v, k)?)? != collapse(&ty, v)? + k {
                    return Ok(Some(format!("collapse of a {}-bump is not additive", k)));
                }
            }
        }
        Ok(None)
    })();
    match result {
        Ok(msg) => msg,
        Err(e) => Some(format!("bump arithmetic failed: {}", e)),
    }
}

fn check_increasing(t: &Term, cfg: &GenConfig) -> Option<String> {
    let ty = typable(t, cfg)?;
    let SimpleType::Arrow(dom, cod) = &ty else {
        return None;
    };
    let val = default_valuation(&cfg.free_var_pool);
    let f = match interpret(t, &val) {
        Ok(f) => f,
        Err(e) => return Some(format!("interpretation of {} failed: {}", t, e)),
    };
    let result = (|| -> Result<Option<String>, crate::measure::MeasureError> {
        for p in probe_values(dom) {
            let q = bump(&p, 1)?;
            let fp = f.apply(&p)?;
            let fq = f.apply(&q)?;
            if !value_lt(cod, &fp, &fq)? {
                return Ok(Some(format!(
                    "interpretation of {} is not strictly increasing on a probe",
                    t
                )));
            }
        }
        Ok(None)
    })();
    match result {
        Ok(msg) => msg,
        Err(e) => Some(format!("probe evaluation failed: {}", e)),
    }
}

fn check_measure_alpha(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    let ctx = &cfg.free_var_pool;
    let mut supply = NameSupply::for_term(t);
    let renamed = fresh_copy(t, &mut supply);
    if !alpha_eq(t, &renamed) {
        return Some(format!(
            "fresh copy is not alpha-equivalent: {} vs {}",
            t, renamed
        ));
    }
    match (measure(t, ctx), measure(&renamed, ctx)) {
        (Ok(a), Ok(b)) if a == b => None,
        (Ok(a), Ok(b)) => Some(format!("measure changed under renaming: {} vs {}", a, b)),
        (Err(e), _) | (_, Err(e)) => Some(format!("measure failed: {}", e)),
    }
}

fn check_trace_hygiene(t: &Term, cfg: &GenConfig) -> Option<String> {
    typable(t, cfg)?;
    let fuel = suite_fuel(t);
    for rule in Rule::ALL {
        let mut supply = NameSupply::for_term(t);
        let (_, tr, exhausted) = normalize(t, rule, fuel, &mut supply);
        if exhausted {
            return Some(format!("fuel exhausted normalizing {} with {}", t, rule));
        }
        if let Err(e) = validate_trace(&tr) {
            return Some(format!("{} trace fails validation: {}", rule, e));
        }
        for state in states(&tr) {
            if !has_distinct_names(state) {
                return Some(format!(
                    "{} trace reaches {} with duplicate names",
                    rule, state
                ));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> GenConfig {
        GenConfig {
            max_size: 14,
            ..GenConfig::default()
        }
    }

    #[test]
    fn unknown_suite_is_an_error() {
        let err = run_property_suite("no-such-suite", &GenConfig::default(), 1).unwrap_err();
        assert_eq!(err.name, "no-such-suite");
        assert!(err.known.contains("measure-decrease"));
    }

    #[test]
    fn every_registered_suite_passes_a_smoke_run() {
        let cfg = small_cfg();
        for name in suite_names() {
            let report = run_property_suite(name, &cfg, 8).unwrap();
            assert!(report.passed_all(), "suite {} failed:\n{}", name, report);
            assert_eq!(report.cases, 8);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = small_cfg();
        let a = run_property_suite("canonical-uniqueness", &cfg, 12).unwrap();
        let b = run_property_suite("canonical-uniqueness", &cfg, 12).unwrap();
        assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn failure_lines_carry_the_sub_seed() {
        let report = Report {
            suite: "demo".to_string(),
            cases: 2,
            failures: vec![Failure {
                seed: 41,
                input: Term::var("u"),
                message: "boom".to_string(),
            }],
        };
        let text = report.to_string();
        assert!(text.contains("FAIL demo 41 u"));
        assert!(text.ends_with("demo: 1 passed, 1 failed"));
    }

    #[test]
    fn shrinking_lands_on_a_failing_subterm() {
        // A deliberately failing check: any application is "bad".
        fn bad(t: &Term, _cfg: &GenConfig) -> Option<String> {
            matches!(t, Term::App(..)).then(|| "application".to_string())
        }
        let big = parse_term(r"\a. \b. (a b) (b a)").unwrap();
        let (shrunk, msg) = shrink_input(big, "application".to_string(), &small_cfg(), bad);
        assert_eq!(msg, "application");
        assert!(matches!(shrunk, Term::App(..)));
        assert_eq!(
            shrunk.size(),
            3,
            "expected a minimal application, got {}",
            shrunk
        );
    }

    #[test]
    fn exhaustive_agreement_holds_at_tiny_sizes() {
        let report = run_exhaustive_agreement(5);
        assert!(report.cases > 50);
        assert!(report.passed_all(), "{}", report);
    }
}
