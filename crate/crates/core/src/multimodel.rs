//! The generic thirteen-parameter semantics hosting three backtracking
//! models: m1 jumps straight to the youngest choice point, m2 walks down the
//! path to it announcing every box it re-enters, m3 undoes the tree step by
//! step from the right, re-entering and failing every box on the way.
//!
//! Children of a resolved node are created all at once; a node gets its
//! number when it is called. Boxes are filled at call time with the clauses
//! whose head matches the called predication.

use std::cell::OnceCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{EngineError, Outcome};
use crate::extract::{Port, TraceEvent};
use crate::node::NodeId;
use crate::term::{rename_clause, Clause, Program, Substitution, Term};

const PROBE_STAMP: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    M1,
    M2,
    M3,
}

impl ModelId {
    pub const ALL: [ModelId; 3] = [ModelId::M1, ModelId::M2, ModelId::M3];
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelId::M1 => "m1",
            ModelId::M2 => "m2",
            ModelId::M3 => "m3",
        })
    }
}

impl FromStr for ModelId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "m1" => Ok(ModelId::M1),
            "m2" => Ok(ModelId::M2),
            "m3" => Ok(ModelId::M3),
            _ => Err(format!("unknown model `{s}` (expected m1, m2 or m3)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtRuleId {
    CallOne,
    Choice,
    FactSucceeds,
    ClauseSucceeds,
    Exit1,
    Exit2,
    LeafFail1,
    LeafFail2M12,
    LeafFail2M3,
    TreeFailM12,
    TreeFailM2,
    RedoM1,
    RedoM2a,
    RedoM2b,
    RedoM3a,
    RedoM3b,
    RedoM3c,
    RedoM3d,
}

impl ExtRuleId {
    pub const ALL: [ExtRuleId; 18] = [
        ExtRuleId::CallOne,
        ExtRuleId::Choice,
        ExtRuleId::FactSucceeds,
        ExtRuleId::ClauseSucceeds,
        ExtRuleId::Exit1,
        ExtRuleId::Exit2,
        ExtRuleId::LeafFail1,
        ExtRuleId::LeafFail2M12,
        ExtRuleId::LeafFail2M3,
        ExtRuleId::TreeFailM12,
        ExtRuleId::TreeFailM2,
        ExtRuleId::RedoM1,
        ExtRuleId::RedoM2a,
        ExtRuleId::RedoM2b,
        ExtRuleId::RedoM3a,
        ExtRuleId::RedoM3b,
        ExtRuleId::RedoM3c,
        ExtRuleId::RedoM3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExtRuleId::CallOne => "callone",
            ExtRuleId::Choice => "choice",
            ExtRuleId::FactSucceeds => "factsucceeds",
            ExtRuleId::ClauseSucceeds => "claussucceeds",
            ExtRuleId::Exit1 => "exit1",
            ExtRuleId::Exit2 => "exit2",
            ExtRuleId::LeafFail1 => "leaffail1",
            ExtRuleId::LeafFail2M12 => "leaffail2_m12",
            ExtRuleId::LeafFail2M3 => "leaffail2_m3",
            ExtRuleId::TreeFailM12 => "treefail_m12",
            ExtRuleId::TreeFailM2 => "treefail_m2",
            ExtRuleId::RedoM1 => "redo_m1",
            ExtRuleId::RedoM2a => "redo_m2a",
            ExtRuleId::RedoM2b => "redo_m2b",
            ExtRuleId::RedoM3a => "redo_m3a",
            ExtRuleId::RedoM3b => "redo_m3b",
            ExtRuleId::RedoM3c => "redo_m3c",
            ExtRuleId::RedoM3d => "redo_m3d",
        }
    }
}

impl fmt::Display for ExtRuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedState {
    pub tree: BTreeSet<NodeId>,
    pub current: NodeId,
    pub counter: u32,
    /// Numbers of nodes called since their (re)creation.
    pub num: BTreeMap<NodeId, u32>,
    /// Body atom of each node, without bindings applied.
    pub pred: BTreeMap<NodeId, Term>,
    pub chosen: BTreeMap<NodeId, Option<Clause>>,
    /// Remaining candidates, indices into the program.
    pub claus: BTreeMap<NodeId, Vec<usize>>,
    /// Bindings in force when each node was called.
    pub sigma: BTreeMap<NodeId, Substitution>,
    pub first: BTreeMap<NodeId, bool>,
    pub ct: bool,
    pub flr: bool,
    pub scs: bool,
    /// A reverse walk is in progress (m3 only).
    pub bk3: bool,
    /// Bindings along the current branch.
    pub answer: Substitution,
    /// Nodes whose box was left through Exit and not re-entered since.
    pub exited: BTreeSet<NodeId>,
    /// Instance shown when a box is re-entered: the value at its last Exit.
    pub shown: BTreeMap<NodeId, Term>,
    pub next_stamp: u32,
}

impl ExtendedState {
    pub fn initial(program: &Program) -> Self {
        let root = NodeId::root();
        let goal = rename_clause(
            &Clause {
                id: String::new(),
                head: program.goal.clone(),
                body: vec![],
            },
            1,
        )
        .head;
        ExtendedState {
            tree: BTreeSet::from([root.clone()]),
            current: root.clone(),
            counter: 1,
            num: BTreeMap::from([(root.clone(), 1)]),
            pred: BTreeMap::from([(root.clone(), goal.clone())]),
            chosen: BTreeMap::from([(root.clone(), None)]),
            claus: BTreeMap::from([(root.clone(), program.definition(&goal))]),
            sigma: BTreeMap::from([(root.clone(), Substitution::empty())]),
            first: BTreeMap::from([(root, true)]),
            ct: false,
            flr: false,
            scs: false,
            bk3: false,
            answer: Substitution::empty(),
            exited: BTreeSet::new(),
            shown: BTreeMap::new(),
            next_stamp: 2,
        }
    }

    fn is_leaf(&self, v: &NodeId) -> bool {
        self.tree
            .range(v.clone()..)
            .nth(1)
            .is_none_or(|w| !w.is_in_subtree_of(v))
    }

    fn children(&self, v: &NodeId) -> Vec<NodeId> {
        self.tree
            .range(v.clone()..)
            .skip(1)
            .take_while(|w| w.is_in_subtree_of(v))
            .filter(|w| w.parent() == *v)
            .cloned()
            .collect()
    }

    pub fn gcp(&self, v: &NodeId) -> Option<NodeId> {
        self.tree
            .range(v.clone()..)
            .take_while(|w| w.is_in_subtree_of(v))
            .filter(|w| !self.claus[*w].is_empty())
            .last()
            .cloned()
    }

    /// The child of `v` on the path to `v`'s youngest choice point.
    fn child_towards_gcp(&self, v: &NodeId) -> Option<NodeId> {
        let g = self.gcp(v)?;
        let path = g.path();
        (path.len() > v.path().len()).then(|| v.child(path[v.path().len()]))
    }

    /// Rightmost child of `v` that has exited.
    fn rcld(&self, v: &NodeId) -> Option<NodeId> {
        self.children(v)
            .into_iter()
            .rev()
            .find(|c| self.exited.contains(c))
    }

    fn hnn(&self, v: &NodeId) -> bool {
        v.next_sibling().is_some_and(|w| self.tree.contains(&w))
    }

    /// Position of `v` in the tree's lexicographic order, from 1.
    pub fn rank(&self, v: &NodeId) -> u32 {
        self.tree.range(..v.clone()).count() as u32 + 1
    }

    fn called_pred(&self, v: &NodeId) -> Term {
        self.sigma[v].apply(&self.pred[v])
    }

    /// Removes the subtree of `v` and everything to its right, except the
    /// pending body atoms of `v`'s ancestors, which go back to unvisited.
    fn undo_after(&mut self, v: &NodeId) {
        let later: Vec<NodeId> = self.tree.range(v.clone()..).skip(1).cloned().collect();
        for y in later {
            let keep = !y.is_in_subtree_of(v) && y.parent() < *v && v.is_in_subtree_of(&y.parent());
            self.num.remove(&y);
            self.exited.remove(&y);
            self.shown.remove(&y);
            if keep {
                self.first.insert(y.clone(), true);
                self.chosen.insert(y.clone(), None);
                self.claus.insert(y.clone(), Vec::new());
                self.sigma.insert(y, Substitution::empty());
            } else {
                self.tree.remove(&y);
                self.pred.remove(&y);
                self.first.remove(&y);
                self.chosen.remove(&y);
                self.claus.remove(&y);
                self.sigma.remove(&y);
            }
        }
    }
}

/// Premises shared by the guards, computed at most once per step.
struct Facts {
    fst: bool,
    lf: bool,
    done: bool,
    cl_empty: bool,
    gcp: OnceCell<Option<NodeId>>,
    rcld: OnceCell<Option<NodeId>>,
    mu_ok: OnceCell<bool>,
}

/// An engine state: the extended state plus the program and model.
#[derive(Clone, Debug)]
pub struct ModelMachine {
    pub program: Arc<Program>,
    pub model: ModelId,
    pub state: ExtendedState,
    pub steps: usize,
}

/// What an emitted event reports, before a chrono is attached.
type Emission = Option<(NodeId, Port, Term)>;

impl ModelMachine {
    pub fn new(program: Arc<Program>, model: ModelId) -> Self {
        let state = ExtendedState::initial(&program);
        ModelMachine {
            program,
            model,
            state,
            steps: 0,
        }
    }

    fn mu_ok(&self, u: &NodeId) -> bool {
        let s = &self.state;
        s.chosen[u]
            .as_ref()
            .is_some_and(|c| s.sigma[u].unifiable_under(&s.pred[u], &c.head))
    }

    fn guard(&self, rule: ExtRuleId, f: &Facts) -> bool {
        use ExtRuleId::*;
        let s = &self.state;
        let u = &s.current;
        let m = self.model;
        let Facts {
            fst,
            lf,
            done,
            cl_empty,
            ..
        } = *f;
        let cc = &s.chosen[u];
        let resolving = !fst && lf && !s.ct && !s.flr && !s.scs && !s.bk3 && cc.is_some();
        let mu_ok = || *f.mu_ok.get_or_init(|| self.mu_ok(u));
        let is_fact = || cc.as_ref().is_some_and(Clause::is_fact);
        let gcp = || f.gcp.get_or_init(|| s.gcp(u)).as_ref();
        let has_rcld = || f.rcld.get_or_init(|| s.rcld(u)).is_some();
        match rule {
            CallOne => fst && lf && !s.ct && !s.flr,
            Choice => !fst && lf && !s.ct && !s.flr && !s.bk3 && cc.is_none() && !cl_empty,
            FactSucceeds => resolving && is_fact() && mu_ok(),
            ClauseSucceeds => resolving && !is_fact() && mu_ok(),
            Exit1 => !fst && s.scs && !s.flr && !s.ct && !s.hnn(u),
            Exit2 => !fst && s.scs && !s.flr && !s.ct && s.hnn(u),
            LeafFail1 => !fst && lf && !s.ct && !s.flr && !s.bk3 && cc.is_none() && cl_empty,
            LeafFail2M12 => m != ModelId::M3 && resolving && !mu_ok(),
            LeafFail2M3 => m == ModelId::M3 && resolving && !mu_ok(),
            TreeFailM12 => m != ModelId::M3 && !fst && !lf && s.flr && !s.ct && gcp().is_none(),
            TreeFailM2 => {
                m == ModelId::M2
                    && !fst
                    && !lf
                    && s.flr
                    && !s.ct
                    && !done
                    && gcp().is_some_and(|g| g != u)
            }
            RedoM1 => m == ModelId::M1 && !fst && (s.flr || s.ct) && gcp().is_some(),
            RedoM2a => {
                m == ModelId::M2 && !fst && (s.flr || s.ct) && done && gcp().is_some_and(|g| g != u)
            }
            RedoM2b => m == ModelId::M2 && !fst && (s.flr || s.ct) && gcp() == Some(u),
            RedoM3a => {
                m == ModelId::M3
                    && !fst
                    && !cl_empty
                    && ((done && lf && (s.bk3 || s.ct)) || (!done && s.bk3 && !s.ct && !has_rcld()))
            }
            RedoM3b => m == ModelId::M3 && s.bk3 && !s.ct && !fst && !done && has_rcld(),
            RedoM3c => {
                m == ModelId::M3
                    && !fst
                    && done
                    && !(lf && !cl_empty)
                    && (s.bk3 || (s.ct && gcp().is_some()))
            }
            RedoM3d => {
                m == ModelId::M3 && s.bk3 && !s.ct && !fst && !done && !has_rcld() && cl_empty
            }
        }
    }

    pub fn applicable_rules(&self) -> Vec<ExtRuleId> {
        let s = &self.state;
        let u = &s.current;
        let facts = Facts {
            fst: s.first[u],
            lf: s.is_leaf(u),
            done: s.exited.contains(u),
            cl_empty: s.claus[u].is_empty(),
            gcp: OnceCell::new(),
            rcld: OnceCell::new(),
            mu_ok: OnceCell::new(),
        };
        ExtRuleId::ALL
            .into_iter()
            .filter(|&r| self.guard(r, &facts))
            .collect()
    }

    pub fn applicable_rule(&self) -> Result<Option<ExtRuleId>, EngineError> {
        let rules = self.applicable_rules();
        match rules.len() {
            0 if self.state.ct => Ok(None),
            0 => Err(EngineError::Stuck { step: self.steps }),
            1 => Ok(Some(rules[0])),
            _ => Err(EngineError::Determinism {
                step: self.steps,
                rules: rules.iter().map(ToString::to_string).collect(),
            }),
        }
    }

    /// Fires the applicable rule. Returns the rule, the event it emits (if
    /// any, with chrono 0) and the next machine; `None` when finished.
    pub fn step(
        &self,
    ) -> Result<Option<(ExtRuleId, Option<TraceEvent>, ModelMachine)>, EngineError> {
        let mut next = self.clone();
        Ok(next.advance()?.map(|(rule, event)| (rule, event, next)))
    }

    /// In-place form of [`ModelMachine::step`].
    pub fn advance(&mut self) -> Result<Option<(ExtRuleId, Option<TraceEvent>)>, EngineError> {
        let Some(rule) = self.applicable_rule()? else {
            return Ok(None);
        };
        self.steps += 1;
        // Firing never touches nodes to the left of the one reported, nor
        // its number, so both attributes can be read afterwards.
        let event = self.fire(rule).map(|(v, port, pred)| TraceEvent {
            chrono: 0,
            r: match self.model {
                ModelId::M2 => self.state.rank(&v),
                _ => self.state.num.get(&v).copied().unwrap_or(0),
            },
            l: v.lpath(),
            port,
            pred,
        });
        Ok(Some((rule, event)))
    }

    fn fire(&mut self, rule: ExtRuleId) -> Emission {
        use ExtRuleId::*;
        let u = self.state.current.clone();
        let s = &mut self.state;
        match rule {
            CallOne => {
                s.sigma.insert(u.clone(), s.answer.clone());
                let called = s.called_pred(&u);
                let matching = self
                    .program
                    .definition(&called)
                    .into_iter()
                    .filter(|&i| {
                        let head = rename_clause(&self.program.clauses[i], PROBE_STAMP).head;
                        s.answer.unifiable_under(&called, &head)
                    })
                    .collect();
                s.claus.insert(u.clone(), matching);
                s.chosen.insert(u.clone(), None);
                if !s.num.contains_key(&u) {
                    s.counter += 1;
                    s.num.insert(u.clone(), s.counter);
                }
                s.first.insert(u.clone(), false);
                s.scs = false;
                s.flr = false;
                s.shown.insert(u.clone(), called.clone());
                Some((u, Port::Call, called))
            }
            Choice => {
                let c = s.claus.get_mut(&u).unwrap().remove(0);
                let inst = rename_clause(&self.program.clauses[c], s.next_stamp);
                s.next_stamp += 1;
                s.chosen.insert(u, Some(inst));
                None
            }
            FactSucceeds | ClauseSucceeds => {
                let c = s.chosen[&u].clone().unwrap();
                s.answer = s.sigma[&u].unify_under(&s.pred[&u], &c.head);
                if rule == FactSucceeds {
                    s.scs = true;
                } else {
                    for (i, atom) in c.body.iter().enumerate() {
                        let v = u.child(i as u32 + 1);
                        s.tree.insert(v.clone());
                        s.pred.insert(v.clone(), atom.clone());
                        s.chosen.insert(v.clone(), None);
                        s.claus.insert(v.clone(), Vec::new());
                        s.sigma.insert(v.clone(), Substitution::empty());
                        s.first.insert(v, true);
                    }
                    s.current = u.child(1);
                }
                None
            }
            Exit1 | Exit2 => {
                let shown = s.answer.apply(&s.pred[&u]);
                s.shown.insert(u.clone(), shown.clone());
                s.exited.insert(u.clone());
                if rule == Exit1 {
                    s.ct = u.is_root();
                    s.current = u.parent();
                } else {
                    s.current = u.next_sibling().unwrap();
                }
                Some((u, Port::Exit, shown))
            }
            LeafFail1 | LeafFail2M12 | LeafFail2M3 | TreeFailM12 | RedoM3d => {
                let called = s.called_pred(&u);
                s.chosen.insert(u.clone(), None);
                s.flr = true;
                s.scs = false;
                s.ct = u.is_root();
                s.current = u.parent();
                if self.model == ModelId::M3 {
                    s.bk3 = true;
                }
                Some((u, Port::Fail, called))
            }
            TreeFailM2 => {
                s.current = s.child_towards_gcp(&u).unwrap();
                None
            }
            RedoM1 | RedoM2b | RedoM3a => {
                let v = if rule == RedoM1 {
                    s.gcp(&u).unwrap()
                } else {
                    u.clone()
                };
                let announce = rule != RedoM3a || s.exited.contains(&v);
                let shown = s
                    .shown
                    .get(&v)
                    .cloned()
                    .unwrap_or_else(|| s.called_pred(&v));
                s.undo_after(&v);
                s.exited.remove(&v);
                s.chosen.insert(v.clone(), None);
                s.answer = s.sigma[&v].clone();
                s.current = v.clone();
                s.ct = false;
                s.flr = false;
                s.scs = false;
                s.bk3 = false;
                announce.then_some((v, Port::Redo, shown))
            }
            RedoM2a => {
                let shown = s.shown[&u].clone();
                s.exited.remove(&u);
                s.current = s.child_towards_gcp(&u).unwrap();
                s.scs = false;
                Some((u, Port::Redo, shown))
            }
            RedoM3b => {
                s.current = s.rcld(&u).unwrap();
                None
            }
            RedoM3c => {
                let shown = s.shown[&u].clone();
                s.exited.remove(&u);
                s.bk3 = true;
                s.ct = false;
                s.scs = false;
                Some((u, Port::Redo, shown))
            }
        }
    }
}

/// Trace of one model run.
#[derive(Clone, Debug)]
pub struct ModelRun {
    pub events: Vec<TraceEvent>,
    pub rules: Vec<ExtRuleId>,
    pub outcome: Outcome,
    pub last: ModelMachine,
}

/// Runs `model` for at most `max_steps` transitions, silent ones included.
pub fn run_model(
    program: &Program,
    model: ModelId,
    max_steps: usize,
) -> Result<ModelRun, EngineError> {
    let mut m = ModelMachine::new(Arc::new(program.clone()), model);
    let mut events = Vec::new();
    let mut rules = Vec::new();
    loop {
        if rules.len() >= max_steps {
            let outcome = if m.applicable_rule()?.is_some() {
                Outcome::FuelExhausted
            } else {
                Outcome::Halted
            };
            return Ok(ModelRun {
                events,
                rules,
                outcome,
                last: m,
            });
        }
        match m.advance()? {
            None => {
                return Ok(ModelRun {
                    events,
                    rules,
                    outcome: Outcome::Halted,
                    last: m,
                })
            }
            Some((rule, event)) => {
                rules.push(rule);
                if let Some(mut e) = event {
                    e.chrono = events.len() as u32 + 1;
                    events.push(e);
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelComparison {
    pub counts: [usize; 3],
    pub outcomes: [Outcome; 3],
    pub m1_in_m2: bool,
    pub m2_in_m3: bool,
}

impl fmt::Display for ModelComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b| if b { "yes" } else { "no" };
        write!(
            f,
            "m1:{} m2:{} m3:{} subseq:{},{}",
            self.counts[0],
            self.counts[1],
            self.counts[2],
            yn(self.m1_in_m2),
            yn(self.m2_in_m3)
        )
    }
}

pub fn is_subsequence<T: PartialEq>(small: &[T], big: &[T]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

pub fn compare_models(program: &Program, max_steps: usize) -> Result<ModelComparison, EngineError> {
    let runs = ModelId::ALL.map(|m| run_model(program, m, max_steps));
    let [a, b, c] = runs;
    let (a, b, c) = (a?, b?, c?);
    let ports = |r: &ModelRun| r.events.iter().map(|e| e.port).collect::<Vec<_>>();
    Ok(ModelComparison {
        counts: [a.events.len(), b.events.len(), c.events.len()],
        outcomes: [a.outcome, b.outcome, c.outcome],
        m1_in_m2: is_subsequence(&ports(&a), &ports(&b)),
        m2_in_m3: is_subsequence(&ports(&b), &ports(&c)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    #[test]
    fn initial_state() {
        let p = parse_program("p(a). :- p(a).").unwrap();
        let s = ExtendedState::initial(&p);
        assert_eq!(s.claus[&NodeId::root()], vec![0]);
        assert_eq!(s.chosen[&NodeId::root()], None);
        assert_eq!(s.num[&NodeId::root()], 1);
        let p = parse_program("p(a). :- q.").unwrap();
        assert!(ExtendedState::initial(&p).claus[&NodeId::root()].is_empty());
    }

    #[test]
    fn choice_pops_the_box() {
        let p = parse_program("p(a). p(b). :- p(X).").unwrap();
        let m = ModelMachine::new(Arc::new(p), ModelId::M1);
        let (r, _, m) = m.step().unwrap().unwrap();
        assert_eq!(r, ExtRuleId::CallOne);
        assert_eq!(m.state.claus[&NodeId::root()].len(), 2);
        let (r, e, m) = m.step().unwrap().unwrap();
        assert_eq!((r, e), (ExtRuleId::Choice, None));
        assert_eq!(m.state.claus[&NodeId::root()].len(), 1);
        let (r, _, m) = m.step().unwrap().unwrap();
        assert_eq!(r, ExtRuleId::FactSucceeds);
        assert!(m.state.scs && !m.state.flr);
    }

    #[test]
    fn subsequence() {
        assert!(is_subsequence(&[1, 3], &[1, 2, 3]));
        assert!(!is_subsequence(&[3, 1], &[1, 2, 3]));
        assert!(is_subsequence::<u8>(&[], &[]));
    }
}
