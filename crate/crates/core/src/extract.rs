//! Actual-trace events: one per transition, `chrono r l port predication`.

use std::fmt;
use std::str::FromStr;

use crate::error::{EngineError, Outcome, ParseError};
use crate::parse::parse_term;
use crate::so::{run_virtual, Derivation, Machine, RuleId};
use crate::term::{Program, Term, TermPrinter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    Call,
    Exit,
    Fail,
    Redo,
}

impl Port {
    pub const ALL: [Port; 4] = [Port::Call, Port::Exit, Port::Fail, Port::Redo];
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Port {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Call" => Ok(Port::Call),
            "Exit" => Ok(Port::Exit),
            "Fail" => Ok(Port::Fail),
            "Redo" => Ok(Port::Redo),
            _ => Err(format!("unknown port `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub chrono: u32,
    /// Number of the node concerned.
    pub r: u32,
    /// Depth of that node, root = 1.
    pub l: u32,
    pub port: Port,
    pub pred: Term,
}

/// The event for `rule` fired from `before`.
///
/// Fail events show the predication as it was called. The state's `pred`
/// field may hold a stale Exit value there (after a Redo below the node),
/// which is not what a tracer prints when the goal finally fails.
pub fn extract_event(rule: RuleId, before: &Machine, chrono: u32) -> TraceEvent {
    let s = &before.state;
    let u = &s.current;
    let (v, port, pred) = match rule {
        RuleId::Call1 | RuleId::Call2 => (u.clone(), Port::Call, s.pred[u].clone()),
        RuleId::Exit1 | RuleId::Exit2 => (u.clone(), Port::Exit, before.updated_pred(u)),
        RuleId::Fail2 => (
            u.clone(),
            Port::Fail,
            before.shadow.nodes[u].call_pred.clone(),
        ),
        RuleId::Redo1 | RuleId::Redo2 => {
            let v = s.gcp(u).expect("Redo fires only below a choice point");
            let p = s.pred[&v].clone();
            (v, Port::Redo, p)
        }
    };
    TraceEvent {
        chrono,
        r: s.num[&v],
        l: s.lpath(&v),
        port,
        pred,
    }
}

/// Events of a derivation, chrono counted from 1.
pub fn derivation_events(d: &Derivation) -> Vec<TraceEvent> {
    d.steps
        .iter()
        .enumerate()
        .map(|(t, (rule, _))| extract_event(*rule, d.before(t), t as u32 + 1))
        .collect()
}

/// The actual trace of a bounded run.
pub fn run_actual_trace(
    program: &Program,
    max_steps: usize,
) -> Result<(Vec<TraceEvent>, Outcome), EngineError> {
    let d = run_virtual(program, max_steps)?;
    Ok((derivation_events(&d), d.outcome))
}

/// Single-space canonical line for one event, variables named within the event.
pub fn format_event(e: &TraceEvent) -> String {
    format_event_with(e, &mut TermPrinter::new())
}

pub fn format_event_with(e: &TraceEvent, printer: &mut TermPrinter) -> String {
    format!(
        "{} {} {} {} {}",
        e.chrono,
        e.r,
        e.l,
        e.port,
        printer.print(&e.pred)
    )
}

/// Lines of a whole trace, variables named consistently across events.
pub fn format_trace(events: &[TraceEvent]) -> Vec<String> {
    let mut printer = TermPrinter::new();
    events
        .iter()
        .map(|e| format_event_with(e, &mut printer))
        .collect()
}

/// Parses `t r l Port pred`; the predication may contain spaces.
pub fn parse_event(line: &str) -> Result<TraceEvent, ParseError> {
    let err = |msg: String| ParseError::new(1, 1, msg);
    let mut rest = line.trim();
    let mut field = || -> Option<&str> {
        let s = rest;
        let end = s.find(char::is_whitespace).unwrap_or(s.len());
        rest = s[end..].trim_start();
        (end > 0).then(|| &s[..end])
    };
    let mut num = |what: &str| -> Result<u32, ParseError> {
        let f = field().ok_or_else(|| err(format!("missing {what}")))?;
        f.parse().map_err(|_| err(format!("bad {what} `{f}`")))
    };
    let chrono = num("chrono")?;
    let r = num("node number")?;
    let l = num("depth")?;
    let port = field().ok_or_else(|| err("missing port".into()))?;
    let port: Port = port.parse().map_err(err)?;
    if rest.is_empty() {
        return Err(err("missing predication".into()));
    }
    let pred = parse_term(rest)?;
    Ok(TraceEvent {
        chrono,
        r,
        l,
        port,
        pred,
    })
}

/// Parses a trace file; blank lines and `#` comments are skipped. Errors
/// carry the 1-based line number.
pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let e = parse_event(t).map_err(|e| ParseError::new(i + 1, e.col, e.message))?;
        out.push(e);
    }
    Ok(out)
}
