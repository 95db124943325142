//! Rebuilding the restricted states {T, u, num, pred} from an actual trace,
//! one event of lookahead at a time. The depth attribute `l` is never read.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::error::ReconstructError;
use crate::extract::{Port, TraceEvent};
use crate::node::NodeId;
use crate::so::{RuleId, VirtualState};
use crate::term::{Term, TermPrinter};

/// Number of the root node in every run.
const ROOT_NUMBER: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedState {
    pub tree: BTreeSet<NodeId>,
    pub current: NodeId,
    pub num: BTreeMap<NodeId, u32>,
    pub pred: BTreeMap<NodeId, Term>,
}

impl RestrictedState {
    /// The state before any event: a lone root carrying the goal.
    pub fn initial(goal: Term) -> Self {
        let root = NodeId::root();
        RestrictedState {
            tree: BTreeSet::from([root.clone()]),
            current: root.clone(),
            num: BTreeMap::from([(root.clone(), ROOT_NUMBER)]),
            pred: BTreeMap::from([(root, goal)]),
        }
    }

    pub fn project(s: &VirtualState) -> Self {
        RestrictedState {
            tree: s.tree.clone(),
            current: s.current.clone(),
            num: s.num.clone(),
            pred: s.pred.clone(),
        }
    }

    /// The live node numbered `r`.
    pub fn node(&self, r: u32) -> Option<NodeId> {
        self.num
            .iter()
            .find(|(_, &n)| n == r)
            .map(|(v, _)| v.clone())
    }

    fn add(&mut self, v: NodeId, r: u32, p: Term) {
        self.tree.insert(v.clone());
        self.num.insert(v.clone(), r);
        self.pred.insert(v.clone(), p);
        self.current = v;
    }

    fn prune_after(&mut self, v: &NodeId) {
        let gone: Vec<NodeId> = self.tree.range(v.clone()..).skip(1).cloned().collect();
        for y in gone {
            self.tree.remove(&y);
            self.num.remove(&y);
            self.pred.remove(&y);
        }
    }

    /// One line: nodes in tree order as `node=num:pred`, the current node
    /// prefixed with `>`.
    pub fn render(&self, printer: &mut TermPrinter) -> String {
        let mut s = String::new();
        for (k, v) in self.tree.iter().enumerate() {
            if k > 0 {
                s.push(' ');
            }
            let mark = if *v == self.current { ">" } else { "" };
            let _ = write!(
                s,
                "{mark}{v}={}:{}",
                self.num[v],
                printer.print(&self.pred[v])
            );
        }
        s
    }
}

/// Every rule whose observable condition holds on the pair `(e, next)`.
/// Without a successor only Fail, and Exit at the root, are decided.
pub fn matching_conds(e: &TraceEvent, next: Option<&TraceEvent>) -> Vec<RuleId> {
    let r = e.r;
    let rn = next.map(|n| n.r);
    let mut out = Vec::new();
    let mut add = |c: bool, rule| {
        if c {
            out.push(rule)
        }
    };
    match e.port {
        Port::Call => {
            add(rn == Some(r), RuleId::Call1);
            add(rn.is_some_and(|x| x > r), RuleId::Call2);
        }
        Port::Exit => {
            add(rn.is_some_and(|x| x < r) || r == ROOT_NUMBER, RuleId::Exit1);
            add(rn.is_some_and(|x| x > r) && r != ROOT_NUMBER, RuleId::Exit2);
        }
        Port::Fail => add(true, RuleId::Fail2),
        Port::Redo => {
            add(rn == Some(r), RuleId::Redo1);
            add(rn.is_some_and(|x| x > r), RuleId::Redo2);
        }
    }
    out
}

pub fn identify_rule(
    e: &TraceEvent,
    next: Option<&TraceEvent>,
) -> Result<RuleId, ReconstructError> {
    match matching_conds(e, next).as_slice() {
        [rule] => Ok(*rule),
        many => Err(ReconstructError::AmbiguousOrUndecidable {
            chrono: e.chrono,
            matched: many.iter().map(ToString::to_string).collect(),
        }),
    }
}

/// Applies `rule` for event `e` with successor `next` to `q`.
pub fn reconstruct_step(
    rule: RuleId,
    e: &TraceEvent,
    next: Option<&TraceEvent>,
    q: &RestrictedState,
) -> Result<RestrictedState, ReconstructError> {
    let malformed = |r| ReconstructError::MalformedTrace {
        chrono: e.chrono,
        r,
    };
    let node = q.node(e.r).ok_or(malformed(e.r))?;
    let succ = || {
        next.map(|n| (n.r, n.pred.clone()))
            .ok_or(ReconstructError::AmbiguousOrUndecidable {
                chrono: e.chrono,
                matched: vec![rule.to_string()],
            })
    };
    let mut q = q.clone();
    match rule {
        RuleId::Call1 => {}
        RuleId::Call2 => {
            let (r2, p2) = succ()?;
            q.add(node.child(1), r2, p2);
        }
        RuleId::Exit1 => {
            q.pred.insert(node.clone(), e.pred.clone());
            q.current = node.parent();
        }
        RuleId::Exit2 => {
            let (r2, p2) = succ()?;
            q.pred.insert(node.clone(), e.pred.clone());
            let brother = node.next_sibling().ok_or(malformed(e.r))?;
            q.add(brother, r2, p2);
        }
        RuleId::Fail2 => q.current = node.parent(),
        RuleId::Redo1 => {
            q.prune_after(&node);
            q.current = node;
        }
        RuleId::Redo2 => {
            let (r2, p2) = succ()?;
            q.prune_after(&node);
            q.add(node.child(1), r2, p2);
        }
    }
    Ok(q)
}

/// Result of rebuilding a whole trace of `k` events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconstruction {
    /// `Q_0 .. Q_{k-1}`: the state after each event that has a successor,
    /// preceded by the initial state.
    pub states: Vec<RestrictedState>,
    /// The state after the last event, when its rule needs no lookahead.
    pub final_state: Option<RestrictedState>,
}

pub fn reconstruct_trace(
    q0: RestrictedState,
    events: &[TraceEvent],
) -> Result<Reconstruction, ReconstructError> {
    let mut states = vec![q0];
    for (k, e) in events.iter().enumerate() {
        let Some(next) = events.get(k + 1) else { break };
        let rule = identify_rule(e, Some(next))?;
        let q = reconstruct_step(rule, e, Some(next), states.last().unwrap())?;
        states.push(q);
    }
    let final_state = match events.last() {
        Some(e) => match identify_rule(e, None) {
            Ok(rule) => Some(reconstruct_step(rule, e, None, states.last().unwrap())?),
            Err(_) => None,
        },
        None => None,
    };
    Ok(Reconstruction {
        states,
        final_state,
    })
}
