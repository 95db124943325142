use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

/// Failures of the transition engines.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    /// More than one rule's premises hold in the same state.
    #[error("determinism violation at step {step}: rules {rules:?} all apply")]
    Determinism { step: usize, rules: Vec<String> },
    /// No rule applies although the derivation is not complete.
    #[error("no rule applies at step {step} and the tree is not complete")]
    Stuck { step: usize },
}

/// Failures while rebuilding restricted states from a trace.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("event {chrono}: cannot identify the rule{}", describe(.matched))]
    AmbiguousOrUndecidable { chrono: u32, matched: Vec<String> },
    #[error("event {chrono}: number {r} names no live node")]
    MalformedTrace { chrono: u32, r: u32 },
}

fn describe(matched: &[String]) -> String {
    if matched.is_empty() {
        String::new()
    } else {
        format!(
            " ({} conditions hold: {})",
            matched.len(),
            matched.join(", ")
        )
    }
}

/// How a bounded run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Halted,
    FuelExhausted,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Halted => "halted",
            Outcome::FuelExhausted => "fuel exhausted",
        })
    }
}
