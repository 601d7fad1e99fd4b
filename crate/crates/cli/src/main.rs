//! `lamd`: a command-line laboratory for spine reductions.
//!
//! Exit codes: 0 for success (or a positive decision), 1 for a negative
//! decision (an equivalence that does not hold, a type error, a failing
//! suite), 2 for usage or parse errors, 3 for fuel exhaustion or an unknown
//! decision.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lamd_core::{
    analyze_spine, default_fuel, ensure_distinct_names, equivalent, eta, head_canonical, infer,
    measure, normalize, parse_term, parse_type_context, run_exhaustive_agreement,
    run_property_suite, suite_names, Decision, EContext, EquivRelation, GenConfig, NameSupply,
    Rule, SpineItem, Term, TypeContext,
};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;

/// Prints one line to stdout. A closed pipe (`lamd ... | head`) is a normal
/// way for a consumer to stop reading, so write errors exit cleanly instead
/// of panicking.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use ::std::io::Write;
        if writeln!(::std::io::stdout(), $($arg)*).is_err() {
            ::std::process::exit(i32::from(EXIT_OK));
        }
    }};
}

/// An error that already knows its exit code. The message goes to stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl fmt::Display) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn negative(message: impl fmt::Display) -> Failure {
        Failure {
            code: EXIT_NEGATIVE,
            message: message.to_string(),
        }
    }

    fn undecided(message: impl fmt::Display) -> Failure {
        Failure {
            code: EXIT_UNDECIDED,
            message: message.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lamd",
    version,
    about = "A laboratory for spine reductions in the lambda-calculus",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print it back in canonical syntax.
    Parse(TermInput),
    /// Print the spine word of a term, its counts, and its environment.
    Spine(TermInput),
    /// Print the head canonical form of a term.
    Canon(TermInput),
    /// Decide an equivalence between two terms.
    Equiv(EquivArgs),
    /// Reduce a term under a chosen rule.
    Reduce(ReduceArgs),
    /// Infer the simple type of a term.
    Typecheck(TypedArgs),
    /// Evaluate the termination measure of a term.
    Measure(MeasureArgs),
    /// Run property suites over generated terms.
    Check(CheckArgs),
}

#[derive(Args)]
struct TermInput {
    /// The term, in ASCII syntax (e.g. `(\y. \x. v) s t`).
    term: Option<String>,
    /// Read the term from a file instead.
    #[arg(long, value_name = "PATH", conflicts_with = "term")]
    file: Option<PathBuf>,
}

impl TermInput {
    fn text(&self) -> Result<String, Failure> {
        match (&self.term, &self.file) {
            (Some(t), None) => Ok(t.clone()),
            (None, Some(path)) => fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {}", path.display(), e))),
            (None, None) => Err(Failure::usage("no term given (pass it or use --file)")),
            (Some(_), Some(_)) => unreachable!("clap rejects term together with --file"),
        }
    }

    fn parse(&self) -> Result<Term, Failure> {
        let text = self.text()?;
        parse_term(&text).map_err(|e| Failure::usage(format!("parse error: {}", e)))
    }
}

#[derive(Args)]
struct EquivArgs {
    /// Relation to decide.
    #[arg(long, value_name = "REL")]
    rel: EquivRelation,
    /// Fuel for relations that normalize (defaults to a size-based bound).
    #[arg(long)]
    fuel: Option<usize>,
    /// The two terms to compare.
    #[arg(num_args = 0..=2)]
    terms: Vec<String>,
    /// Read the two terms from a file, one per line.
    #[arg(long, value_name = "PATH", conflicts_with = "terms")]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    /// Reduction rule.
    #[arg(long, value_name = "RULE", default_value = "beta")]
    rule: Rule,
    /// Maximum number of steps (defaults to a size-based bound).
    #[arg(long)]
    fuel: Option<usize>,
    /// Print every step as `step <i> <rule> @ <path>: <term>`.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    input: TermInput,
}

#[derive(Args)]
struct TypedArgs {
    /// Types for free variables, e.g. `y:o, f:o -> o`.
    #[arg(long, value_name = "CTX")]
    ctx: Option<String>,
    #[command(flatten)]
    input: TermInput,
}

#[derive(Args)]
struct MeasureArgs {
    /// Types for free variables, e.g. `y:o, f:o -> o`.
    #[arg(long, value_name = "CTX")]
    ctx: Option<String>,
    /// Print the measure of every term along a reduction.
    #[arg(long)]
    trace: bool,
    /// Rule used with --trace.
    #[arg(long, value_name = "RULE", default_value = "beta")]
    rule: Rule,
    /// Fuel used with --trace (defaults to a size-based bound).
    #[arg(long)]
    fuel: Option<usize>,
    #[command(flatten)]
    input: TermInput,
}

#[derive(Args)]
struct CheckArgs {
    /// Suite name, or `all`. Use --list to see the registered names.
    #[arg(long, value_name = "NAME")]
    suite: Option<String>,
    /// Base seed; case `i` runs with seed + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Cases per suite.
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Size budget for generated terms.
    #[arg(long, default_value_t = 20)]
    max_size: usize,
    /// Also check beta agreement exhaustively on all terms up to this size.
    #[arg(long, value_name = "SIZE")]
    exhaustive: Option<usize>,
    /// List the registered suites and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Parse(input) => cmd_parse(input),
        Command::Spine(input) => cmd_spine(input),
        Command::Canon(input) => cmd_canon(input),
        Command::Equiv(args) => cmd_equiv(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Typecheck(args) => cmd_typecheck(args),
        Command::Measure(args) => cmd_measure(args),
        Command::Check(args) => cmd_check(args),
    }
}

fn parse_ctx(text: &Option<String>) -> Result<TypeContext, Failure> {
    match text {
        None => Ok(TypeContext::new()),
        Some(s) => {
            parse_type_context(s).map_err(|e| Failure::usage(format!("cannot parse --ctx: {}", e)))
        }
    }
}

fn cmd_parse(input: TermInput) -> Result<u8, Failure> {
    let t = input.parse()?;
    outln!("{}", t);
    Ok(EXIT_OK)
}

fn cmd_spine(input: TermInput) -> Result<u8, Failure> {
    let raw = input.parse()?;
    let mut supply = NameSupply::for_term(&raw);
    let t = ensure_distinct_names(&raw, &mut supply);
    let sa = analyze_spine(&t);
    for item in &sa.word {
        match item {
            SpineItem::SAbs(b) => outln!("abs {}", b.name),
            SpineItem::SArg(a) => outln!("arg {}", a),
        }
    }
    outln!("head {}", sa.head_var);
    for &(arg, abs) in &sa.matching {
        outln!("pair {} {}", arg, abs);
    }
    let form = head_canonical(&t);
    outln!("counts {} {} {}", form.n_lambda(), form.n_at(), form.n_p());
    if sa.unmatched_abs.is_empty() && sa.unmatched_args.is_empty() {
        let e = EContext::from_word(sa.word.clone())
            .expect("a word with no unmatched items is balanced");
        outln!("env {}", eta(&e));
    }
    Ok(EXIT_OK)
}

fn cmd_canon(input: TermInput) -> Result<u8, Failure> {
    let raw = input.parse()?;
    let mut supply = NameSupply::for_term(&raw);
    let t = ensure_distinct_names(&raw, &mut supply);
    outln!("{}", head_canonical(&t).to_term());
    Ok(EXIT_OK)
}

fn cmd_equiv(args: EquivArgs) -> Result<u8, Failure> {
    let texts: Vec<String> = match &args.file {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {}", path.display(), e)))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect(),
        None => args.terms.clone(),
    };
    if texts.len() != 2 {
        return Err(Failure::usage(format!(
            "expected two terms, got {}",
            texts.len()
        )));
    }
    let t = parse_term(&texts[0])
        .map_err(|e| Failure::usage(format!("parse error in the first term: {}", e)))?;
    let s = parse_term(&texts[1])
        .map_err(|e| Failure::usage(format!("parse error in the second term: {}", e)))?;
    let fuel = args
        .fuel
        .unwrap_or_else(|| default_fuel(&t).max(default_fuel(&s)).max(10_000));
    match equivalent(&t, &s, args.rel, fuel) {
        Decision::True => {
            outln!("true");
            Ok(EXIT_OK)
        }
        Decision::False => {
            outln!("false");
            Ok(EXIT_NEGATIVE)
        }
        Decision::Unknown => {
            outln!("unknown");
            Ok(EXIT_UNDECIDED)
        }
    }
}

fn cmd_reduce(args: ReduceArgs) -> Result<u8, Failure> {
    let raw = args.input.parse()?;
    let mut supply = NameSupply::for_term(&raw);
    let t = ensure_distinct_names(&raw, &mut supply);
    let fuel = args.fuel.unwrap_or_else(|| default_fuel(&t));
    let (result, trace, exhausted) = normalize(&t, args.rule, fuel, &mut supply);
    if args.trace {
        for (i, step) in trace.steps.iter().enumerate() {
            outln!(
                "step {} {} @ {}: {}",
                i + 1,
                step.redex.rule,
                step.redex.position,
                step.result
            );
        }
    }
    outln!("{}", result);
    if exhausted {
        return Err(Failure::undecided(format!(
            "fuel exhausted after {} steps (raise --fuel)",
            trace.len()
        )));
    }
    Ok(EXIT_OK)
}

fn cmd_typecheck(args: TypedArgs) -> Result<u8, Failure> {
    let ctx = parse_ctx(&args.ctx)?;
    let t = args.input.parse()?;
    match infer(&t, &ctx) {
        Ok(ty) => {
            outln!("{}", ty);
            Ok(EXIT_OK)
        }
        Err(e) => Err(Failure::negative(format!("type error: {}", e))),
    }
}

fn cmd_measure(args: MeasureArgs) -> Result<u8, Failure> {
    let ctx = parse_ctx(&args.ctx)?;
    let raw = args.input.parse()?;
    let mut supply = NameSupply::for_term(&raw);
    let t = ensure_distinct_names(&raw, &mut supply);
    if !args.trace {
        let m = measure(&t, &ctx).map_err(|e| Failure::negative(format!("measure: {}", e)))?;
        outln!("{}", m);
        return Ok(EXIT_OK);
    }
    let fuel = args.fuel.unwrap_or_else(|| default_fuel(&t));
    let (_, trace, exhausted) = normalize(&t, args.rule, fuel, &mut supply);
    let mut states: Vec<&Term> = vec![&trace.start];
    states.extend(trace.steps.iter().map(|s| &s.result));
    for state in states {
        let m = measure(state, &ctx).map_err(|e| Failure::negative(format!("measure: {}", e)))?;
        outln!("{}\t{}", m, state);
    }
    if exhausted {
        return Err(Failure::undecided(format!(
            "fuel exhausted after {} steps (raise --fuel)",
            trace.len()
        )));
    }
    Ok(EXIT_OK)
}

fn cmd_check(args: CheckArgs) -> Result<u8, Failure> {
    if args.list {
        for name in suite_names() {
            outln!("{}", name);
        }
        return Ok(EXIT_OK);
    }
    let mut reports = Vec::new();
    if let Some(chosen) = &args.suite {
        let cfg = GenConfig {
            seed: args.seed,
            max_size: args.max_size,
            ..GenConfig::default()
        };
        let names: Vec<&str> = if chosen == "all" {
            suite_names()
        } else {
            vec![chosen.as_str()]
        };
        for name in names {
            let report = run_property_suite(name, &cfg, args.count)
                .map_err(|e| Failure::usage(e.to_string()))?;
            reports.push(report);
        }
    }
    if let Some(size) = args.exhaustive {
        reports.push(run_exhaustive_agreement(size));
    }
    if reports.is_empty() {
        return Err(Failure::usage(
            "nothing to check (pass --suite and/or --exhaustive)",
        ));
    }
    let mut all_passed = true;
    for report in &reports {
        outln!("{}", report);
        all_passed &= report.passed_all();
    }
    if all_passed {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_NEGATIVE)
    }
}
