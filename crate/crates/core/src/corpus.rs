//! Bundled models and predicate libraries, with the classifications they
//! are frozen to produce.
//!
//! The two Needham-Schroeder models are desk-scale reconstructions written
//! from a prose description of the protocols and their attacks, not ports
//! of any reference model; their class counts depend on modelling choices
//! documented at the top of each file.

use thiserror::Error;

use crate::modelparse::{parse_library, parse_model, Model, ParseError};

pub const COUNTER: &str = include_str!("../corpus/counter.ccm");
pub const RUNNING_EXAMPLE: &str = include_str!("../corpus/running-example.ccm");
pub const NSP_SYMMETRIC: &str = include_str!("../corpus/nsp-symmetric.ccm");
pub const NSP_PUBLIC_KEY: &str = include_str!("../corpus/nsp-public-key.ccm");
pub const GENERIC_LIB: &str = include_str!("../corpus/generic.ccp");
pub const SECURITY_LIB: &str = include_str!("../corpus/security.ccp");

/// Names accepted by [`load_corpus`].
pub const NAMES: [&str; 4] = ["running-example", "counter", "nsp-symmetric", "nsp-public-key"];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown corpus entry `{0}` (expected one of: {list})", list = NAMES.join(", "))]
    UnknownName(String),
    #[error("unknown predicate library `{0}` (expected generic or security)")]
    UnknownLibrary(String),
    #[error("bundled source `{file}` does not parse: {source}")]
    Parse {
        file: &'static str,
        #[source]
        source: ParseError,
    },
}

/// What a frozen run is expected to return.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Final classes, rendered, in discovery order.
    Classes(&'static [&'static str]),
    /// The predicates cannot characterize some counterexample.
    Insufficient,
}

/// One frozen classification run over a corpus model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpectedRun {
    pub preds: &'static [&'static str],
    pub bound: usize,
    pub seed: Option<&'static str>,
    pub keep_seeded: bool,
    pub outcome: Outcome,
}

impl ExpectedRun {
    pub fn class_count(&self) -> Option<usize> {
        match self.outcome {
            Outcome::Classes(cs) => Some(cs.len()),
            Outcome::Insufficient => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub source: &'static str,
    /// Names of the libraries merged into `model`.
    pub libraries: &'static [&'static str],
    /// The model with its libraries applied.
    pub model: Model,
    pub property: &'static str,
    /// Predicate sets declared by the model and its libraries.
    pub predsets: Vec<String>,
    pub expected: &'static [ExpectedRun],
}

const fn run(
    preds: &'static [&'static str],
    bound: usize,
    outcome: Outcome,
) -> ExpectedRun {
    ExpectedRun {
        preds,
        bound,
        seed: None,
        keep_seeded: false,
        outcome,
    }
}

const fn seeded(
    preds: &'static [&'static str],
    bound: usize,
    seed: &'static str,
    outcome: Outcome,
) -> ExpectedRun {
    ExpectedRun {
        preds,
        bound,
        seed: Some(seed),
        keep_seeded: true,
        outcome,
    }
}

const COUNTER_RUNS: &[ExpectedRun] = &[
    run(
        &["lessThanOne", "greaterThanOne"],
        2,
        Outcome::Classes(&["exists i1 : lessThanOne[a@i1]", "exists i1 : greaterThanOne[a@i1]"]),
    ),
    run(&["lessThanOne"], 2, Outcome::Insufficient),
    ExpectedRun {
        preds: &["neq", "lessThanOne", "greaterThanOne"],
        bound: 2,
        seed: Some("lessThanOne"),
        keep_seeded: false,
        outcome: Outcome::Classes(&["exists i1 : a@i1 != 1"]),
    },
];

const RUNNING_RUNS: &[ExpectedRun] = &[run(
    &["generic"],
    6,
    Outcome::Classes(&[
        "exists i1 : msg.type@i1 = Plaintext /\\ msg.secret@i1 = true",
        "exists i1,i2 : msg.type@i1 = Encrypted /\\ msg.secret@i2 = true /\\ i1 < i2",
    ]),
)];

const SYMMETRIC_RUNS: &[ExpectedRun] = &[
    run(
        &["generic"],
        10,
        Outcome::Classes(&[
            "exists i1 : msg.receiver@i1 = Server /\\ msg.sender@i1 = Eve",
            "exists i1 : msg.receiver@i1 = Eve",
        ]),
    ),
    seeded(
        &["v1"],
        10,
        "replay",
        Outcome::Classes(&[
            "exists i1,i2 : replay[i1, i2] /\\ msg.receiver@i2 = Server",
            "exists i1 : msg.receiver@i1 = Server /\\ msg.sender@i1 = Eve",
            "exists i1 : msg.receiver@i1 = Eve",
        ]),
    ),
];

const PK_GENERIC: Outcome = Outcome::Classes(&[
    "exists i1 : msg.nonce@i1 = NB /\\ msg.receiver@i1 = Bob /\\ msg.sender@i1 = Eve",
    "exists i1 : msg.nonce@i1 = NA /\\ msg.receiver@i1 = Alice /\\ msg.sender@i1 = Eve",
]);

const PUBLIC_KEY_RUNS: &[ExpectedRun] = &[
    run(&["generic"], 10, PK_GENERIC),
    seeded(
        &["v2"],
        10,
        "manInTheMiddle",
        Outcome::Classes(&[
            "exists i1,i2 : manInTheMiddle[i1, i2] /\\ msg.nonce@i2 = NB /\\ msg.sender@i1 = Alice",
            "exists i1,i2 : manInTheMiddle[i1, i2] /\\ msg.nonce@i2 = NA /\\ msg.sender@i1 = Bob",
        ]),
    ),
    seeded(&["v1"], 10, "replay", PK_GENERIC),
];

/// Source text of a bundled predicate library.
pub fn library(name: &str) -> Result<&'static str, CorpusError> {
    match name.trim_end_matches(".ccp") {
        "generic" => Ok(GENERIC_LIB),
        "security" => Ok(SECURITY_LIB),
        other => Err(CorpusError::UnknownLibrary(other.to_string())),
    }
}

/// Parses a bundled model and applies its libraries.
pub fn load_corpus(name: &str) -> Result<CorpusEntry, CorpusError> {
    let (name, source, libraries, expected): (&'static str, _, &'static [&'static str], _) =
        match name.trim_end_matches(".ccm") {
            "counter" => ("counter", COUNTER, &["generic"], COUNTER_RUNS),
            "running-example" => ("running-example", RUNNING_EXAMPLE, &[], RUNNING_RUNS),
            "nsp-symmetric" => ("nsp-symmetric", NSP_SYMMETRIC, &["security"], SYMMETRIC_RUNS),
            "nsp-public-key" => ("nsp-public-key", NSP_PUBLIC_KEY, &["security"], PUBLIC_KEY_RUNS),
            other => return Err(CorpusError::UnknownName(other.to_string())),
        };
    let mut model = parse_model(source).map_err(|source| CorpusError::Parse { file: name, source })?;
    for lib in libraries {
        let src = library(lib)?;
        model = parse_library(src, &model).map_err(|source| CorpusError::Parse { file: lib, source })?;
    }
    let predsets = model.predsets.iter().map(|(n, _)| n.clone()).collect();
    Ok(CorpusEntry {
        name,
        source,
        libraries,
        model,
        property: "Phi",
        predsets,
        expected,
    })
}
