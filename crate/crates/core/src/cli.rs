//! The `cexclass` command line.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 the predicates cannot
//! classify the counterexamples, 3 internal invariant breach.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::classify::{classify, ClassifyConfig, ClassifyError, Insufficiency};
use crate::corpus::{self, CorpusError};
use crate::factgen::FactConfig;
use crate::kernel::{trace_satisfies_property, Property, Signature, Trace};
use crate::modelparse::{parse_constraints, parse_library, parse_model, LookupError, Model, ParseError};
use crate::tracecon::{satisfies, TraceConstraint};
use crate::verifier::{Bound, ConstraintSet, Verifier, VerifyOutcome};

/// Version tag of the structured report layout.
pub const SCHEMA: &str = "cexclass-report/1";

#[derive(Debug, Parser)]
#[command(name = "cexclass", version, about = "Classify the bounded counterexamples of a transition system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition every counterexample into non-redundant trace constraints.
    Classify(ClassifyArgs),
    /// Check the property, reporting the first counterexample.
    Check(CheckArgs),
    /// Count the counterexamples within the bound.
    Count(CommonArgs),
    /// List the traces within the bound.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Model file (.ccm).
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    pub model: Option<PathBuf>,
    /// Bundled model: running-example, counter, nsp-symmetric or nsp-public-key.
    #[arg(long)]
    pub corpus: Option<String>,
    /// Predicate library to merge into the model: a .ccp file, or the
    /// bundled `generic` or `security`. Repeatable.
    #[arg(long = "lib")]
    pub libs: Vec<String>,
    /// Invariant to check; defaults to the first one declared.
    #[arg(long)]
    pub property: Option<String>,
    /// Maximum number of transitions.
    #[arg(long)]
    pub bound: usize,
    /// Only consider traces of exactly `bound` transitions.
    #[arg(long)]
    pub exact_length: bool,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated predicates, built-ins and predicate sets.
    #[arg(long, value_delimiter = ',', default_value = "generic")]
    pub pred: Vec<String>,
    /// Largest predicate arity instantiated.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_arity: u64,
    /// Position distance limit for variable-pair equalities, or `all`.
    #[arg(long, default_value = "12", value_parser = parse_window)]
    pub eq_window: Window,
    /// User predicate whose counterexamples are classified first.
    #[arg(long)]
    pub seed: Option<String>,
    /// Report classes found while seeding even when redundant.
    #[arg(long, requires = "seed")]
    pub keep_seeded: bool,
    /// Skip the canonical witness search.
    #[arg(long)]
    pub no_witnesses: bool,
    /// Skip counting counterexamples for the summary.
    #[arg(long)]
    pub no_count: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// File of trace constraints; traces satisfying any of them are ignored.
    #[arg(long)]
    pub block: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub block: Option<PathBuf>,
    /// Only list counterexamples.
    #[arg(long)]
    pub violating: bool,
    /// Stop after this many traces.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window(pub Option<usize>);

fn parse_window(s: &str) -> Result<Window, String> {
    if s == "all" {
        return Ok(Window(None));
    }
    s.parse::<usize>()
        .map(|n| Window(Some(n)))
        .map_err(|_| format!("expected a number or `all`, got `{s}`"))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lookup(#[from] LookupError),
    #[error(transparent)]
    Classify(ClassifyError),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Classify(ClassifyError::InsufficientPredicates { .. })
            | CliError::Classify(ClassifyError::NoAcceptingTrace) => 2,
            CliError::Classify(ClassifyError::UnknownSeed(_)) => 1,
            CliError::Classify(_) | CliError::Internal(_) => 3,
            _ => 1,
        }
    }
}

// Structured report ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub var: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    pub length: usize,
    pub states: Vec<Vec<Assignment>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    pub index: usize,
    pub constraint: String,
    pub representative: TraceReport,
    pub canonical_witness: Option<TraceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub model: String,
    pub libraries: Vec<String>,
    pub property: String,
    pub bound: usize,
    pub exact_length: bool,
    pub predicates: Vec<String>,
    pub max_arity: Option<usize>,
    pub eq_window: Option<String>,
    pub seed: Option<String>,
    pub keep_seeded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub classes: usize,
    pub redundant_dropped: usize,
    pub counterexamples: Option<u64>,
    pub iterations: usize,
    pub capped: bool,
    pub verifier_ms: f64,
    pub other_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    pub trace: Option<TraceReport>,
}

/// Output of `classify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub config: ConfigEcho,
    pub classes: Vec<ClassReport>,
    pub redundant: Vec<String>,
    pub summary: Option<Summary>,
    pub error: Option<ErrorReport>,
}

/// Output of `check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema: &'static str,
    pub config: ConfigEcho,
    pub status: &'static str,
    pub counterexample: Option<TraceReport>,
}

/// Output of `count`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub schema: &'static str,
    pub config: ConfigEcho,
    pub counterexamples: u64,
}

/// Output of `enumerate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumerateReport {
    pub schema: &'static str,
    pub config: ConfigEcho,
    pub traces: Vec<EnumeratedTrace>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumeratedTrace {
    pub violating: bool,
    pub trace: TraceReport,
}

pub fn trace_report(sig: &Signature, t: &Trace) -> TraceReport {
    TraceReport {
        length: t.len(),
        states: t
            .states()
            .iter()
            .map(|s| {
                (0..sig.vars.len())
                    .map(|v| Assignment {
                        var: sig.vars[v].name.clone(),
                        value: sig.render(v, s.get(v)),
                    })
                    .collect()
            })
            .collect(),
    }
}

fn ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

// Text rendering --------------------------------------------------------------

fn text_trace(out: &mut String, indent: &str, t: &TraceReport) {
    for (i, s) in t.states.iter().enumerate() {
        let parts: Vec<String> = s.iter().map(|a| format!("{}={}", a.var, a.value)).collect();
        let _ = writeln!(out, "{indent}{i}: {}", parts.join(", "));
    }
}

fn text_config(out: &mut String, c: &ConfigEcho) {
    let _ = writeln!(out, "model: {}", c.model);
    if !c.libraries.is_empty() {
        let _ = writeln!(out, "libraries: {}", c.libraries.join(", "));
    }
    let _ = writeln!(out, "property: {}", c.property);
    let _ = writeln!(
        out,
        "bound: {}{}",
        c.bound,
        if c.exact_length { " (exact length)" } else { "" }
    );
    if !c.predicates.is_empty() {
        let _ = writeln!(out, "predicates: {}", c.predicates.join(", "));
    }
    if let Some(k) = c.max_arity {
        let _ = writeln!(out, "max arity: {k}");
    }
    if let Some(w) = &c.eq_window {
        let _ = writeln!(out, "equality window: {w}");
    }
    if let Some(s) = &c.seed {
        let kept = if c.keep_seeded { " (seeded classes kept)" } else { "" };
        let _ = writeln!(out, "seed: {s}{kept}");
    }
}

pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    text_config(&mut out, &r.config);
    for c in &r.classes {
        let _ = writeln!(out, "\nclass {}: {}", c.index, c.constraint);
        let _ = writeln!(out, "  representative (length {}):", c.representative.length);
        text_trace(&mut out, "    ", &c.representative);
        match &c.canonical_witness {
            Some(w) => {
                let _ = writeln!(out, "  canonical witness (length {}):", w.length);
                text_trace(&mut out, "    ", w);
            }
            None => out.push_str("  canonical witness: none\n"),
        }
    }
    for w in &r.redundant {
        let _ = writeln!(out, "\nredundant: {w}");
    }
    if let Some(s) = &r.summary {
        let count = s.counterexamples.map_or("not counted".to_string(), |n| n.to_string());
        let _ = writeln!(
            out,
            "\nsummary: {} classes, {} redundant dropped, {count} counterexamples, {} iterations{}",
            s.classes,
            s.redundant_dropped,
            s.iterations,
            if s.capped { ", fact generation capped" } else { "" }
        );
        let _ = writeln!(out, "time: verifier {} ms, other {} ms", s.verifier_ms, s.other_ms);
    }
    if let Some(e) = &r.error {
        let _ = writeln!(out, "\nerror ({}): {}", e.kind, e.message);
        if let Some(t) = &e.trace {
            let _ = writeln!(out, "  offending trace (length {}):", t.length);
            text_trace(&mut out, "    ", t);
        }
    }
    out
}

fn render_check_text(r: &CheckReport) -> String {
    let mut out = String::new();
    text_config(&mut out, &r.config);
    let _ = writeln!(out, "\nstatus: {}", r.status);
    if let Some(t) = &r.counterexample {
        let _ = writeln!(out, "counterexample (length {}):", t.length);
        text_trace(&mut out, "  ", t);
    }
    out
}

fn render_enumerate_text(r: &EnumerateReport) -> String {
    let mut out = String::new();
    text_config(&mut out, &r.config);
    for (i, t) in r.traces.iter().enumerate() {
        let tag = if t.violating { " violating" } else { "" };
        let _ = writeln!(out, "\ntrace {}{tag} (length {}):", i + 1, t.trace.length);
        text_trace(&mut out, "  ", &t.trace);
    }
    let _ = writeln!(
        out,
        "\n{} traces{}",
        r.traces.len(),
        if r.truncated { " (truncated)" } else { "" }
    );
    out
}

// Commands ----------------------------------------------------------------------

struct Loaded {
    model: Model,
    name: String,
    libraries: Vec<String>,
    property: Property,
    bound: Bound,
}

fn read(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(c: &CommonArgs) -> Result<Loaded, CliError> {
    let (mut model, name, mut libraries) = match (&c.model, &c.corpus) {
        (Some(path), _) => {
            let src = read(path)?;
            let m = parse_model(&src).map_err(|source| CliError::Parse {
                path: path.display().to_string(),
                source,
            })?;
            (m, path.display().to_string(), Vec::new())
        }
        (None, Some(name)) => {
            let e = corpus::load_corpus(name)?;
            let libs = e.libraries.iter().map(|s| s.to_string()).collect();
            (e.model, e.name.to_string(), libs)
        }
        (None, None) => return Err(CliError::Usage("one of --model or --corpus is required".into())),
    };
    for lib in &c.libs {
        let (src, label) = match corpus::library(lib) {
            Ok(src) => (src.to_string(), lib.clone()),
            Err(_) => (read(std::path::Path::new(lib))?, lib.clone()),
        };
        model = parse_library(&src, &model).map_err(|source| CliError::Parse {
            path: label.clone(),
            source,
        })?;
        libraries.push(label);
    }
    let property = match &c.property {
        Some(p) => model.property(p)?,
        None => model.default_property(),
    };
    let bound = if c.exact_length {
        Bound::exact(c.bound)
    } else {
        Bound::upto(c.bound)
    };
    Ok(Loaded {
        model,
        name,
        libraries,
        property,
        bound,
    })
}

fn echo(command: &str, l: &Loaded) -> ConfigEcho {
    ConfigEcho {
        command: command.to_string(),
        model: l.name.clone(),
        libraries: l.libraries.clone(),
        property: l.property.name.clone(),
        bound: l.bound.max_len,
        exact_length: l.bound.exact,
        predicates: Vec::new(),
        max_arity: None,
        eq_window: None,
        seed: None,
        keep_seeded: false,
    }
}

fn blocked(path: &Option<PathBuf>, model: &Model) -> Result<Vec<TraceConstraint>, CliError> {
    let Some(path) = path else {
        return Ok(Vec::new());
    };
    let src = read(path)?;
    parse_constraints(&src, model).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn eval_internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(format!("evaluation failed: {e}"))
}

/// Runs `classify`. Classification failures are part of the report; the
/// error is returned alongside so the caller can pick the exit code.
pub fn cmd_classify(a: &ClassifyArgs) -> Result<(Report, Option<CliError>), CliError> {
    let start = Instant::now();
    let l = load(&a.common)?;
    let preds = l.model.predicate_set(&a.pred)?;
    let mut config = echo("classify", &l);
    config.predicates = a.pred.clone();
    config.max_arity = Some(a.max_arity as usize);
    config.eq_window = Some(a.eq_window.0.map_or("all".to_string(), |n| n.to_string()));
    config.seed = a.seed.clone();
    config.keep_seeded = a.keep_seeded;

    let mut cfg = ClassifyConfig::new(l.bound);
    cfg.facts = FactConfig {
        max_arity: a.max_arity as usize,
        eq_window: a.eq_window.0,
    };
    cfg.seed = a.seed.clone();
    cfg.keep_seeded = a.keep_seeded;
    cfg.witnesses = !a.no_witnesses;

    let sig = &l.model.system.sig;
    let verifier = Verifier::new(&l.model.system);
    let mut report = Report {
        schema: SCHEMA,
        config,
        classes: Vec::new(),
        redundant: Vec::new(),
        summary: None,
        error: None,
    };
    match classify(&verifier, &l.property, &preds, &cfg) {
        Ok(c) => {
            for (i, class) in c.classes.iter().enumerate() {
                let ok = satisfies(sig, &class.representative, &class.constraint).map_err(eval_internal)?
                    && !trace_satisfies_property(&class.representative, &l.property).map_err(eval_internal)?;
                if !ok {
                    return Err(CliError::Internal(format!(
                        "representative of class {} does not re-validate",
                        i + 1
                    )));
                }
                report.classes.push(ClassReport {
                    index: i + 1,
                    constraint: class.constraint.render(sig),
                    representative: trace_report(sig, &class.representative),
                    canonical_witness: class.canonical_witness.as_ref().map(|t| trace_report(sig, t)),
                });
            }
            report.redundant = c.redundant.iter().map(|r| r.constraint.render(sig)).collect();
            let counterexamples = if a.no_count {
                None
            } else {
                Some(verifier.count_counterexamples(&l.property, l.bound).map_err(eval_internal)?)
            };
            let verifier_time = verifier.time_spent();
            report.summary = Some(Summary {
                classes: c.classes.len(),
                redundant_dropped: c.redundant.len(),
                counterexamples,
                iterations: c.iterations,
                capped: c.capped,
                verifier_ms: ms(verifier_time),
                other_ms: ms(start.elapsed().saturating_sub(verifier_time)),
            });
            Ok((report, None))
        }
        Err(e) => {
            let (kind, trace) = match &e {
                ClassifyError::InsufficientPredicates { cause, trace, .. } => (
                    match cause {
                        Insufficiency::NoFacts => "insufficient-predicates/no-facts",
                        Insufficiency::NotSufficient => "insufficient-predicates/not-sufficient",
                    },
                    Some(trace_report(sig, trace)),
                ),
                ClassifyError::NoAcceptingTrace => ("no-accepting-trace", None),
                ClassifyError::UnknownSeed(_) => return Err(CliError::Classify(e)),
                ClassifyError::Eval(_) => ("evaluation", None),
                ClassifyError::Internal(_) => ("internal", None),
            };
            report.error = Some(ErrorReport {
                kind: kind.to_string(),
                message: e.to_string(),
                trace,
            });
            Ok((report, Some(CliError::Classify(e))))
        }
    }
}

pub fn cmd_check(a: &CheckArgs) -> Result<CheckReport, CliError> {
    let l = load(&a.common)?;
    let assume = ConstraintSet::blocking(blocked(&a.block, &l.model)?);
    let verifier = Verifier::new(&l.model.system);
    let outcome = verifier.verify(&assume, &l.property, l.bound).map_err(eval_internal)?;
    let sig = &l.model.system.sig;
    Ok(CheckReport {
        schema: SCHEMA,
        config: echo("check", &l),
        status: if outcome.is_ok() { "ok" } else { "violated" },
        counterexample: match outcome {
            VerifyOutcome::Ok => None,
            VerifyOutcome::Violated(t) => Some(trace_report(sig, &t)),
        },
    })
}

pub fn cmd_count(a: &CommonArgs) -> Result<CountReport, CliError> {
    let l = load(a)?;
    let verifier = Verifier::new(&l.model.system);
    let n = verifier.count_counterexamples(&l.property, l.bound).map_err(eval_internal)?;
    Ok(CountReport {
        schema: SCHEMA,
        config: echo("count", &l),
        counterexamples: n,
    })
}

pub fn cmd_enumerate(a: &EnumerateArgs) -> Result<EnumerateReport, CliError> {
    let l = load(&a.common)?;
    let assume = ConstraintSet::blocking(blocked(&a.block, &l.model)?);
    let verifier = Verifier::new(&l.model.system);
    let sig = &l.model.system.sig;
    let mut traces = Vec::new();
    let mut truncated = false;
    for t in verifier.enumerate_traces(&assume, l.bound).map_err(eval_internal)? {
        let violating = !trace_satisfies_property(&t, &l.property).map_err(eval_internal)?;
        if a.violating && !violating {
            continue;
        }
        if a.limit.is_some_and(|n| traces.len() >= n) {
            truncated = true;
            break;
        }
        traces.push(EnumeratedTrace {
            violating,
            trace: trace_report(sig, &t),
        });
    }
    Ok(EnumerateReport {
        schema: SCHEMA,
        config: echo("enumerate", &l),
        traces,
        truncated,
    })
}

fn emit<T: Serialize>(
    format: Format,
    out_path: &Option<PathBuf>,
    value: &T,
    text: impl FnOnce() -> String,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let body = match format {
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Text => text(),
    };
    match out_path {
        Some(p) => std::fs::write(p, body).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Classify(a) => {
            let (report, failure) = cmd_classify(a)?;
            emit(a.common.format, &a.common.out, &report, || render_text(&report), stdout)?;
            match failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Check(a) => {
            let r = cmd_check(a)?;
            emit(a.common.format, &a.common.out, &r, || render_check_text(&r), stdout)
        }
        Command::Count(a) => {
            let r = cmd_count(a)?;
            emit(a.format, &a.out, &r, || format!("{}\n", r.counterexamples), stdout)
        }
        Command::Enumerate(a) => {
            let r = cmd_enumerate(a)?;
            emit(a.common.format, &a.common.out, &r, || render_enumerate_text(&r), stdout)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
