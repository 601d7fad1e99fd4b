//! Deciding term equivalences, from plain α-equality up to β-conversion.
//!
//! The interesting relations sit between those extremes and identify terms
//! that differ only in how their primary redexes are arranged:
//!
//! * **Surface** equivalence compares head-canonical forms α-structurally,
//!   leaving argument subterms untouched.
//! * **Deep** equivalence canonicalizes recursively: every argument on
//!   every spine is itself put in head-canonical form before comparison.
//! * **Sigma** equivalence additionally permutes independent environment
//!   entries into a canonical order, so redexes that could have been fired
//!   in either order compare equal.
//!
//! Deep comparison works on a rendered canonical string in which bound
//! variables are replaced by scope-stack indices, making it insensitive to
//! binder names. β-conversion is decided by fuel-bounded normalization and
//! answers [`Decision::Unknown`] when the budget runs out.

use std::collections::HashSet;
use std::fmt;

use crate::canon::head_canonical;
use crate::reduce::{normalize, Rule};
use crate::syntax::{
    alpha_eq, ensure_distinct_names, EnvPair, Environment, Name, NameSupply, Term,
};
use crate::types::SimpleType;

/// The three-valued answer of an equivalence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    True,
    False,
    /// The relation could not be decided within the given budget.
    Unknown,
}

impl Decision {
    fn from_bool(b: bool) -> Decision {
        if b {
            Decision::True
        } else {
            Decision::False
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Decision::True => "true",
            Decision::False => "false",
            Decision::Unknown => "unknown",
        };
        write!(f, "{name}")
    }
}

/// The supported equivalence relations, coarsest last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivRelation {
    /// Renaming of bound variables only.
    Alpha,
    /// α-equality of head-canonical forms; arguments compare as-is.
    SurfaceE,
    /// Equality of recursively canonicalized forms.
    DeepE,
    /// Deep equality up to reordering of independent environment entries.
    Sigma,
    /// β-conversion, decided by fuel-bounded normalization.
    Beta,
}

impl fmt::Display for EquivRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EquivRelation::Alpha => "alpha",
            EquivRelation::SurfaceE => "surface-e",
            EquivRelation::DeepE => "deep-e",
            EquivRelation::Sigma => "sigma",
            EquivRelation::Beta => "beta",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for EquivRelation {
    type Err = String;

    fn from_str(s: &str) -> Result<EquivRelation, String> {
        match s {
            "alpha" => Ok(EquivRelation::Alpha),
            "surface-e" => Ok(EquivRelation::SurfaceE),
            "deep-e" => Ok(EquivRelation::DeepE),
            "sigma" => Ok(EquivRelation::Sigma),
            "beta" => Ok(EquivRelation::Beta),
            other => Err(format!("unknown relation `{other}`")),
        }
    }
}

fn render_ann(ann: &Option<SimpleType>) -> String {
    ann.as_ref().map(|a| a.to_string()).unwrap_or_default()
}

/// Render `t` as a canonical string: the head-canonical form with every
/// argument rendered recursively, bound variables shown as `%k` indices
/// into the scope stack, and annotations spelled out. With `sort`, every
/// environment is first permuted into its canonical order.
fn deep_render(t: &Term, stack: &mut Vec<Name>, sort: bool) -> String {
    let cf = head_canonical(t);
    let depth = stack.len();
    let mut out = String::new();
    for b in &cf.head_abs {
        out.push('\\');
        out.push_str(&render_ann(&b.ann));
        out.push('.');
        stack.push(b.name.clone());
    }
    let pairs = if sort {
        sorted_pairs(&cf.canonical_env)
    } else {
        cf.canonical_env.pairs.clone()
    };
    out.push('[');
    // Environment entries are stored hole-first; scopes nest root-first,
    // so render from the far end inward, pushing each binder as passed.
    for (count, j) in (0..pairs.len()).rev().enumerate() {
        if count > 0 {
            out.push(',');
        }
        out.push_str(&deep_render(&pairs[j].term, stack, sort));
        out.push('/');
        out.push_str(&render_ann(&pairs[j].binder.ann));
        stack.push(pairs[j].binder.name.clone());
    }
    out.push_str("](");
    match stack.iter().rposition(|n| n == &cf.head_var) {
        Some(k) => out.push_str(&format!("%{k}")),
        None => out.push_str(&cf.head_var.to_string()),
    }
    for a in &cf.head_args {
        out.push(' ');
        out.push_str(&deep_render(a, stack, sort));
    }
    out.push(')');
    stack.truncate(depth);
    out
}

/// A binder-name-insensitive key for one environment entry: its term
/// rendered canonically with an empty outer scope, so names bound inside
/// the term become indices while everything else stays literal.
fn fingerprint(term: &Term) -> String {
    deep_render(term, &mut Vec::new(), true)
}

/// Permute an environment into its canonical order.
///
/// Entry `j` depends on entry `k` when `k`'s binder occurs free in `j`'s
/// term; such a `k` must stay on the root side of `j`. Among the entries
/// whose dependencies are already placed, the least (fingerprint, binder
/// name) pair goes next, which picks a single representative from every
/// class of reorderings the dependence order allows.
fn sorted_pairs(env: &Environment) -> Vec<EnvPair> {
    let n = env.pairs.len();
    if n <= 1 {
        return env.pairs.clone();
    }
    let free: Vec<HashSet<Name>> = env.pairs.iter().map(|e| e.term.free_vars()).collect();
    let deps: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&k| k != j && free[j].contains(&env.pairs[k].binder.name))
                .collect()
        })
        .collect();
    let keys: Vec<(String, Name)> = env
        .pairs
        .iter()
        .map(|e| (fingerprint(&e.term), e.binder.name.clone()))
        .collect();
    let mut placed = vec![false; n];
    let mut root_to_hole = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&j| !placed[j] && deps[j].iter().all(|&k| placed[k]))
            .min_by(|&a, &b| keys[a].cmp(&keys[b]));
        let Some(j) = next else {
            // A dependency cycle cannot arise from well-scoped terms;
            // fall back to the original order rather than guess.
            return env.pairs.clone();
        };
        placed[j] = true;
        root_to_hole.push(j);
    }
    root_to_hole
        .into_iter()
        .rev()
        .map(|j| env.pairs[j].clone())
        .collect()
}

fn rendered_eq(t: &Term, s: &Term, sort: bool) -> bool {
    deep_render(t, &mut Vec::new(), sort) == deep_render(s, &mut Vec::new(), sort)
}

/// Decide whether `t` and `s` are related by `rel`.
///
/// `fuel` bounds the β-normalization budget for [`EquivRelation::Beta`]
/// (per side); the structural relations ignore it and always decide.
/// Inputs are renamed apart internally, so the distinct-names discipline
/// is not required of the caller.
pub fn equivalent(t: &Term, s: &Term, rel: EquivRelation, fuel: usize) -> Decision {
    let mut supply = NameSupply::for_term(t);
    supply.absorb(s);
    let t = ensure_distinct_names(t, &mut supply);
    let s = ensure_distinct_names(s, &mut supply);
    match rel {
        EquivRelation::Alpha => Decision::from_bool(alpha_eq(&t, &s)),
        EquivRelation::SurfaceE => Decision::from_bool(alpha_eq(
            &head_canonical(&t).to_term(),
            &head_canonical(&s).to_term(),
        )),
        EquivRelation::DeepE => Decision::from_bool(rendered_eq(&t, &s, false)),
        EquivRelation::Sigma => {
            // The sorted comparison can miss reorderings whose fingerprints
            // disagree only through free-variable names, so a plain deep
            // match also counts.
            if rendered_eq(&t, &s, false) {
                Decision::True
            } else {
                Decision::from_bool(rendered_eq(&t, &s, true))
            }
        }
        EquivRelation::Beta => {
            let (nf_t, _, exhausted_t) = normalize(&t, Rule::Beta, fuel, &mut supply);
            let (nf_s, _, exhausted_s) = normalize(&s, Rule::Beta, fuel, &mut supply);
            if exhausted_t || exhausted_s {
                return Decision::Unknown;
            }
            Decision::from_bool(alpha_eq(&nf_t, &nf_s))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn t(src: &str) -> Term {
        parse_term(src).expect("test term parses")
    }

    fn decide(a: &str, b: &str, rel: EquivRelation) -> Decision {
        equivalent(&t(a), &t(b), rel, 200)
    }

    #[test]
    fn alpha_identifies_renamed_binders_but_not_annotations() {
        assert_eq!(
            decide(r"\x. x", r"\y. y", EquivRelation::Alpha),
            Decision::True
        );
        assert_eq!(
            decide(r"\x:o. x", r"\x. x", EquivRelation::Alpha),
            Decision::False
        );
        assert_eq!(
            decide(r"\x. x", r"\x. y", EquivRelation::Alpha),
            Decision::False
        );
    }

    #[test]
    fn surface_equivalence_identifies_a_term_with_its_canonical_form() {
        assert_eq!(
            decide(
                r"(\y. \x. v) s t",
                r"(\y. (\x. v) t) s",
                EquivRelation::SurfaceE
            ),
            Decision::True
        );
        // The mirrored nesting binds the arguments the other way around.
        assert_eq!(
            decide(
                r"(\y. (\x. v) t) s",
                r"(\x. (\y. v) s) t",
                EquivRelation::SurfaceE
            ),
            Decision::False
        );
    }

    #[test]
    fn surface_equivalence_leaves_argument_subterms_alone() {
        let a = r"z ((\y. \x. v) s u)";
        let b = r"z ((\y. (\x. v) u) s)";
        assert_eq!(decide(a, b, EquivRelation::SurfaceE), Decision::False);
        assert_eq!(decide(a, b, EquivRelation::DeepE), Decision::True);
    }

    #[test]
    fn deep_equivalence_respects_environment_order() {
        assert_eq!(
            decide(
                r"(\y. (\x. v) t) s",
                r"(\x. (\y. v) s) t",
                EquivRelation::DeepE
            ),
            Decision::False
        );
        assert_eq!(
            decide(
                r"(\y. (\x. v) t) s",
                r"(\b. (\a. v) t) s",
                EquivRelation::DeepE
            ),
            Decision::True
        );
    }

    #[test]
    fn sigma_permutes_independent_entries_only() {
        assert_eq!(
            decide(
                r"(\y. (\x. v) t) s",
                r"(\x. (\y. v) s) t",
                EquivRelation::Sigma
            ),
            Decision::True
        );
        assert_eq!(
            decide(
                r"(\y. (\x. v) t) s",
                r"(\y. (\x. w) t) s",
                EquivRelation::Sigma
            ),
            Decision::False
        );
    }

    #[test]
    fn sigma_keeps_dependent_entries_in_scope_order() {
        // The inner argument mentions y, so its entry cannot cross y's.
        let a = r"(\y. (\x. v) (f y)) s";
        assert_eq!(decide(a, a, EquivRelation::Sigma), Decision::True);
        assert_eq!(
            decide(a, r"(\y. (\x. v) s) (f y)", EquivRelation::Sigma),
            Decision::False
        );
    }

    #[test]
    fn the_structural_relations_are_ordered_by_strength() {
        let pairs = [
            (r"(\y. \x. v) s t", r"(\y. (\x. v) t) s"),
            (r"z ((\y. \x. v) s u)", r"z ((\y. (\x. v) u) s)"),
            (r"(\y. (\x. v) t) s", r"(\x. (\y. v) s) t"),
        ];
        for (a, b) in pairs {
            let strength = [
                decide(a, b, EquivRelation::Alpha),
                decide(a, b, EquivRelation::SurfaceE),
                decide(a, b, EquivRelation::DeepE),
                decide(a, b, EquivRelation::Sigma),
            ];
            // Once a finer relation answers true, every coarser one must too.
            let mut seen_true = false;
            for d in strength {
                if seen_true {
                    assert_eq!(d, Decision::True, "{a} versus {b}");
                }
                seen_true = seen_true || d == Decision::True;
            }
            assert_eq!(decide(a, b, EquivRelation::Beta), Decision::True);
        }
    }

    #[test]
    fn beta_conversion_is_decided_by_normalization() {
        assert_eq!(
            decide(r"(\x. x) y", "y", EquivRelation::Beta),
            Decision::True
        );
        assert_eq!(decide("y", "z", EquivRelation::Beta), Decision::False);
        // Leftmost-outermost reduction erases the looping argument.
        assert_eq!(
            decide(r"(\f. x) ((\x. x x) (\y. y y))", "x", EquivRelation::Beta),
            Decision::True
        );
    }

    #[test]
    fn beta_conversion_reports_unknown_when_fuel_runs_out() {
        let omega = r"(\x. x x) (\y. y y)";
        assert_eq!(
            equivalent(&t(omega), &t(omega), EquivRelation::Beta, 5),
            Decision::Unknown
        );
    }

    #[test]
    fn sigma_orders_three_independent_entries_canonically() {
        // All six orders of three independent redexes collapse together.
        let base = r"(\a. (\b. (\c. v) w3) w2) w1";
        let swapped = [
            r"(\b. (\a. (\c. v) w3) w1) w2",
            r"(\c. (\b. (\a. v) w1) w2) w3",
            r"(\a. (\c. (\b. v) w2) w3) w1",
        ];
        for other in swapped {
            assert_eq!(
                decide(base, other, EquivRelation::Sigma),
                Decision::True,
                "{other}"
            );
            assert_eq!(
                decide(base, other, EquivRelation::DeepE),
                Decision::False,
                "{other}"
            );
        }
    }
}
