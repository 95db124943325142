//! Side-by-side check of the engine against reconstruction from its own
//! trace, plus the port-adjacency constraints.

use std::fmt;

use crate::error::{EngineError, Outcome, ReconstructError};
use crate::extract::{derivation_events, Port, TraceEvent};
use crate::reconstruct::{matching_conds, reconstruct_step, RestrictedState};
use crate::so::{run_virtual, Derivation, RuleId};
use crate::term::{Program, TermPrinter};

/// Adjacencies that never occur in a trace.
pub const FORBIDDEN_PORT_PAIRS: [(Port, Port); 3] = [
    (Port::Fail, Port::Call),
    (Port::Call, Port::Redo),
    (Port::Redo, Port::Redo),
];

/// Adjacencies produced by chaining the seven rules, frozen from an
/// enumeration over generated programs (see the `port_table` test).
pub const ALLOWED_PORT_PAIRS: [(Port, Port); 10] = [
    (Port::Call, Port::Call),
    (Port::Call, Port::Exit),
    (Port::Call, Port::Fail),
    (Port::Exit, Port::Call),
    (Port::Exit, Port::Exit),
    (Port::Exit, Port::Redo),
    (Port::Fail, Port::Fail),
    (Port::Fail, Port::Redo),
    (Port::Redo, Port::Call),
    (Port::Redo, Port::Exit),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    /// Number of transitions taken when the states differ.
    pub step: usize,
    pub field: &'static str,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondViolation {
    pub chrono: u32,
    pub matched: Vec<RuleId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortViolation {
    /// Chrono of the first event of the pair.
    pub chrono: u32,
    pub pair: (Port, Port),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortCheck {
    pub violations: Vec<PortViolation>,
    /// Pairs outside the allowed table that are not outright forbidden.
    pub warnings: Vec<PortViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdequacyReport {
    pub steps_checked: usize,
    pub outcome: Outcome,
    pub first_divergence: Option<Divergence>,
    /// Events whose identified rule differs from the rule actually fired.
    pub rule_mismatches: Vec<(u32, RuleId, RuleId)>,
    pub cond_violations: Vec<CondViolation>,
    pub port_violations: Vec<PortViolation>,
    pub port_warnings: Vec<PortViolation>,
}

impl AdequacyReport {
    pub fn passed(&self) -> bool {
        self.first_divergence.is_none()
            && self.rule_mismatches.is_empty()
            && self.cond_violations.is_empty()
            && self.port_violations.is_empty()
    }

    /// `PASS|FAIL <name> <steps> <detail>`.
    pub fn line(&self, name: &str) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        format!("{verdict} {name} {} {self}", self.steps_checked)
    }
}

impl fmt::Display for AdequacyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "{}", self.outcome)?;
            if !self.port_warnings.is_empty() {
                write!(f, ", {} unlisted port pairs", self.port_warnings.len())?;
            }
            return Ok(());
        }
        let mut parts = Vec::new();
        if let Some(d) = &self.first_divergence {
            parts.push(format!(
                "diverges after step {} on {}: expected {} got {}",
                d.step, d.field, d.expected, d.got
            ));
        }
        for (c, fired, seen) in &self.rule_mismatches {
            parts.push(format!("event {c}: fired {fired} but trace says {seen}"));
        }
        for v in &self.cond_violations {
            parts.push(format!(
                "event {}: {} conditions hold {:?}",
                v.chrono,
                v.matched.len(),
                v.matched
            ));
        }
        for v in &self.port_violations {
            parts.push(format!(
                "event {}: forbidden {}->{}",
                v.chrono, v.pair.0, v.pair.1
            ));
        }
        f.write_str(&parts.join("; "))
    }
}

/// Signature of a reconstruction step, so that variants can be checked.
pub type StepFn<'a> = &'a dyn Fn(
    RuleId,
    &TraceEvent,
    Option<&TraceEvent>,
    &RestrictedState,
) -> Result<RestrictedState, ReconstructError>;

/// Runs the program and checks its trace against its own states.
pub fn check_adequacy(program: &Program, max_steps: usize) -> Result<AdequacyReport, EngineError> {
    let d = run_virtual(program, max_steps)?;
    let events = derivation_events(&d);
    Ok(check_derivation(&d, &events, &reconstruct_step))
}

/// Reconstructs from `events` with `step` and compares every state with the
/// projection of the derivation's state after the same number of steps.
pub fn check_derivation(d: &Derivation, events: &[TraceEvent], step: StepFn) -> AdequacyReport {
    let ports = check_port_sequence(&events.iter().map(|e| e.port).collect::<Vec<_>>());
    let mut report = AdequacyReport {
        steps_checked: 0,
        outcome: d.outcome,
        first_divergence: None,
        rule_mismatches: Vec::new(),
        cond_violations: Vec::new(),
        port_violations: ports.violations,
        port_warnings: ports.warnings,
    };
    let mut q = RestrictedState::project(&d.initial.state);
    let mut printer = TermPrinter::new();
    for (t, e) in events.iter().enumerate() {
        let next = events.get(t + 1);
        if next.is_none() && d.outcome == Outcome::FuelExhausted {
            break;
        }
        let fired = d.steps[t].0;
        let matched = matching_conds(e, next);
        if matched.len() != 1 {
            report.cond_violations.push(CondViolation {
                chrono: e.chrono,
                matched: matched.clone(),
            });
        }
        if let [seen] = matched.as_slice() {
            if *seen != fired {
                report.rule_mismatches.push((e.chrono, fired, *seen));
            }
        }
        let rule = matched.first().copied().unwrap_or(fired);
        let expected = RestrictedState::project(&d.steps[t].1.state);
        report.steps_checked = t + 1;
        match step(rule, e, next, &q) {
            Ok(got) => {
                if let Some(div) = first_difference(t + 1, &expected, &got, &mut printer) {
                    report.first_divergence = Some(div);
                    break;
                }
                q = got;
            }
            Err(err) => {
                report.first_divergence = Some(Divergence {
                    step: t + 1,
                    field: "rule",
                    expected: fired.to_string(),
                    got: err.to_string(),
                });
                break;
            }
        }
    }
    report
}

fn first_difference(
    step: usize,
    expected: &RestrictedState,
    got: &RestrictedState,
    printer: &mut TermPrinter,
) -> Option<Divergence> {
    let nodes = |s: &RestrictedState| {
        s.tree
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    };
    let mk = |field, e: String, g: String| {
        Some(Divergence {
            step,
            field,
            expected: e,
            got: g,
        })
    };
    if expected.tree != got.tree {
        return mk("T", nodes(expected), nodes(got));
    }
    if expected.current != got.current {
        return mk("u", expected.current.to_string(), got.current.to_string());
    }
    if expected.num != got.num {
        return mk(
            "num",
            format!("{:?}", expected.num),
            format!("{:?}", got.num),
        );
    }
    if expected.pred != got.pred {
        return mk("pred", expected.render(printer), got.render(printer));
    }
    None
}

/// Adjacent pairs for which the number of matching conditions is not one.
pub fn check_cond_exclusivity(events: &[TraceEvent]) -> Vec<CondViolation> {
    events
        .windows(2)
        .filter_map(|w| {
            let matched = matching_conds(&w[0], Some(&w[1]));
            (matched.len() != 1).then(|| CondViolation {
                chrono: w[0].chrono,
                matched,
            })
        })
        .collect()
}

pub fn check_port_sequence(ports: &[Port]) -> PortCheck {
    let mut check = PortCheck {
        violations: Vec::new(),
        warnings: Vec::new(),
    };
    for (k, w) in ports.windows(2).enumerate() {
        let pair = (w[0], w[1]);
        let v = PortViolation {
            chrono: k as u32 + 1,
            pair,
        };
        if FORBIDDEN_PORT_PAIRS.contains(&pair) {
            check.violations.push(v);
        } else if !ALLOWED_PORT_PAIRS.contains(&pair) {
            check.warnings.push(v);
        }
    }
    check
}
