//! Byrd-box tracing: a small-step semantics whose transitions emit trace
//! events, reconstruction of engine states from such traces, and three
//! backtracking models that differ in how much they report.

pub mod adequacy;
pub mod error;
pub mod extract;
pub mod multimodel;
pub mod node;
pub mod parse;
pub mod random;
pub mod reconstruct;
pub mod so;
pub mod term;

pub use adequacy::{check_adequacy, check_port_sequence, AdequacyReport};
pub use error::{EngineError, Outcome, ParseError, ReconstructError};
pub use extract::{format_event, format_trace, parse_trace, run_actual_trace, Port, TraceEvent};
pub use multimodel::{compare_models, run_model, ModelComparison, ModelId, ModelRun};
pub use node::NodeId;
pub use parse::{parse_program, parse_term};
pub use reconstruct::{reconstruct_trace, RestrictedState};
pub use so::{run_virtual, Derivation, Machine, RuleId};
pub use term::{format_term, unify, Clause, Program, Substitution, Term, Var};
