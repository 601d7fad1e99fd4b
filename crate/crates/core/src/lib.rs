//! A laboratory for lambda-calculus reduction up to permutation of redexes.
//!
//! The crate revolves around the *spine* of a term (the path from the root
//! to the head variable) and the balanced contexts that live on it. On top
//! of that it builds reduction at a distance, linear and head strategies,
//! canonical forms for the induced equivalences, simple types, and a
//! semantic measure that strictly decreases under every reduction rule on
//! typed terms.

pub mod canon;
pub mod equiv;
pub mod gen;
pub mod measure;
pub mod parse;
pub mod reduce;
pub mod spine;
pub mod suite;
pub mod syntax;
pub mod types;

pub use canon::{
    arg, canonical_e_context, head_canonical, is_head_canonical, normalize_e, rewrite_e_step,
    ArgError, CanonicalForm, Selector,
};
pub use equiv::{equivalent, Decision, EquivRelation};
pub use gen::{enumerate_terms, gen_e_context, gen_term, gen_typed_term, GenConfig, GenError};
pub use measure::{
    bottom, bump, collapse, default_valuation, interpret, measure, probe_values, value_lt, FunKind,
    FunVal, MeasureError, SemValue, Valuation,
};
pub use parse::{parse_term, parse_type, parse_type_context, ParseError};
pub use reduce::{
    apply_step, default_fuel, find_redexes, normalize, postpone_garbage, reduce_primary_redexes,
    simulate_beta_by_affine, subterm_at, validate_trace, FuelError, Path, PathStep, PostponeError,
    Redex, RedexDetail, Rule, Step, StepError, Trace, TraceError,
};
pub use spine::{
    analyze_spine, decompose, eta, primary_redexes, Decomposition, EContext, SpineAnalysis,
    SpineItem,
};
pub use suite::{
    run_exhaustive_agreement, run_property_suite, suite_names, Failure, Report, UnknownSuite,
};
pub use syntax::{
    alpha_eq, apply_env, ensure_distinct_names, fresh_copy, has_distinct_names, substitute, Binder,
    EnvPair, Environment, Name, NameSupply, Term,
};
pub use types::{check_subject_reduction, infer, SimpleType, TypeContext, TypeError};
