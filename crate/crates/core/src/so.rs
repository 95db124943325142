//! The observational semantics: a nine-field virtual state and seven
//! transition rules (Call1, Call2, Exit1, Exit2, Fail2, Redo1, Redo2).
//!
//! The resolution bookkeeping the rules treat as external (head unification
//! outcome, chosen clause, accumulated bindings) lives in [`ResolutionShadow`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{EngineError, Outcome};
use crate::node::NodeId;
use crate::term::{rename_clause, Clause, Program, Substitution, Term};

/// Stamp used only to test head unifiability; never stored.
const PROBE_STAMP: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    Call1,
    Call2,
    Exit1,
    Exit2,
    Fail2,
    Redo1,
    Redo2,
}

impl RuleId {
    pub const ALL: [RuleId; 7] = [
        RuleId::Call1,
        RuleId::Call2,
        RuleId::Exit1,
        RuleId::Exit2,
        RuleId::Fail2,
        RuleId::Redo1,
        RuleId::Redo2,
    ];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The nine observed parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualState {
    /// Nodes of the partial proof tree.
    pub tree: BTreeSet<NodeId>,
    /// The current node.
    pub current: NodeId,
    /// Highest creation number handed out so far.
    pub counter: u32,
    /// Creation number of every node.
    pub num: BTreeMap<NodeId, u32>,
    /// Predication attached to every node.
    pub pred: BTreeMap<NodeId, Term>,
    /// Remaining candidate clauses (indices into the program) of every node.
    pub claus: BTreeMap<NodeId, Vec<usize>>,
    /// Whether the node has not been visited yet.
    pub first: BTreeMap<NodeId, bool>,
    /// The tree is complete (the root has been left).
    pub ct: bool,
    /// The last move was a failure.
    pub flr: bool,
}

impl VirtualState {
    pub fn is_leaf(&self, v: &NodeId) -> bool {
        self.tree
            .range(v.clone()..)
            .nth(1)
            .is_none_or(|w| !w.is_in_subtree_of(v))
    }

    pub fn is_first(&self, v: &NodeId) -> bool {
        self.first.get(v).copied().unwrap_or(false)
    }

    /// Greatest node of the subtree at `v` whose box is not empty.
    pub fn gcp(&self, v: &NodeId) -> Option<NodeId> {
        self.tree
            .range(v.clone()..)
            .take_while(|w| w.is_in_subtree_of(v))
            .filter(|w| self.claus.get(*w).is_some_and(|c| !c.is_empty()))
            .last()
            .cloned()
    }

    pub fn hcp(&self, v: &NodeId) -> bool {
        self.gcp(v).is_some()
    }

    pub fn lpath(&self, v: &NodeId) -> u32 {
        v.lpath()
    }

    /// Drops every node greater than `v`.
    fn prune_after(&mut self, v: &NodeId) {
        let gone: Vec<NodeId> = self.tree.range(v.clone()..).skip(1).cloned().collect();
        for y in gone {
            self.tree.remove(&y);
            self.num.remove(&y);
            self.pred.remove(&y);
            self.claus.remove(&y);
            self.first.remove(&y);
        }
    }

    fn add_node(&mut self, v: NodeId, pred: Term, claus: Vec<usize>) {
        self.counter += 1;
        self.tree.insert(v.clone());
        self.num.insert(v.clone(), self.counter);
        self.pred.insert(v.clone(), pred);
        self.claus.insert(v.clone(), claus);
        self.first.insert(v, true);
    }

    /// Checks the structural invariants; returns a description of the first
    /// one that fails.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.tree.contains(&NodeId::root()) || !self.tree.contains(&self.current) {
            return Err("root or current node missing from the tree".into());
        }
        for v in &self.tree {
            if !self.tree.contains(&v.parent()) {
                return Err(format!("tree not prefix-closed at {v}"));
            }
            if self.is_first(v) && !self.is_leaf(v) {
                return Err(format!("unvisited node {v} has children"));
            }
        }
        let keys = |m: Vec<&NodeId>| m.into_iter().cloned().collect::<BTreeSet<_>>();
        if keys(self.num.keys().collect()) != self.tree
            || keys(self.pred.keys().collect()) != self.tree
            || keys(self.claus.keys().collect()) != self.tree
            || keys(self.first.keys().collect()) != self.tree
        {
            return Err("field domains differ from the tree".into());
        }
        let nums: BTreeSet<u32> = self.num.values().copied().collect();
        if nums.len() != self.num.len() {
            return Err("creation numbers are not distinct".into());
        }
        // Pruning keeps the counter, so it can exceed every live number.
        if nums.iter().max().is_none_or(|&m| m > self.counter) {
            return Err("a creation number exceeds the counter".into());
        }
        Ok(())
    }
}

/// Per-node resolution record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    /// The predication as called (bindings at creation time applied).
    pub call_pred: Term,
    /// The global substitution when the node was created.
    pub call_subst: Substitution,
    /// Renamed instance of the clause chosen at the latest visit.
    pub chosen: Option<Clause>,
    /// The global substitution when the node was last left by Exit.
    pub exit_subst: Option<Substitution>,
    /// No candidate clause matched at the latest visit.
    pub failed: bool,
}

/// Bookkeeping behind the external functions: success and failure of head
/// unification, box initialisation and the updated predication on Exit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionShadow {
    pub nodes: BTreeMap<NodeId, NodeRecord>,
    /// Bindings accumulated along the current branch.
    pub subst: Substitution,
    pub next_stamp: u32,
}

/// A virtual state together with its shadow and the program it runs.
#[derive(Clone, Debug)]
pub struct Machine {
    pub program: Arc<Program>,
    pub state: VirtualState,
    pub shadow: ResolutionShadow,
    /// Transitions taken so far.
    pub steps: usize,
}

/// Outcome of trying a node's box at a visit.
struct Visit {
    /// Candidates whose head unifies with the called predication.
    matching: Vec<usize>,
}

impl Machine {
    /// The initial state: the root carries the goal and the goal's
    /// definition as its box.
    pub fn new(program: Arc<Program>) -> Machine {
        let root = NodeId::root();
        // Goal variables are renamed so that every run-time variable has a
        // non-zero stamp.
        let goal = rename_clause(
            &Clause {
                id: String::new(),
                head: program.goal.clone(),
                body: vec![],
            },
            1,
        )
        .head;
        let mut state = VirtualState {
            tree: BTreeSet::new(),
            current: root.clone(),
            counter: 0,
            num: BTreeMap::new(),
            pred: BTreeMap::new(),
            claus: BTreeMap::new(),
            first: BTreeMap::new(),
            ct: false,
            flr: false,
        };
        state.add_node(root.clone(), goal.clone(), program.definition(&goal));
        let mut nodes = BTreeMap::new();
        nodes.insert(
            root,
            NodeRecord {
                call_pred: goal,
                call_subst: Substitution::empty(),
                chosen: None,
                exit_subst: None,
                failed: false,
            },
        );
        let shadow = ResolutionShadow {
            nodes,
            subst: Substitution::empty(),
            next_stamp: 2,
        };
        Machine {
            program,
            state,
            shadow,
            steps: 0,
        }
    }

    pub fn from_program(program: &Program) -> Machine {
        Machine::new(Arc::new(program.clone()))
    }

    fn record(&self, v: &NodeId) -> &NodeRecord {
        &self.shadow.nodes[v]
    }

    fn clause(&self, idx: usize) -> &Clause {
        &self.program.clauses[idx]
    }

    fn visit(&self, v: &NodeId) -> Visit {
        let rec = self.record(v);
        let matching = self.state.claus[v]
            .iter()
            .copied()
            .filter(|&i| {
                let head = rename_clause(self.clause(i), PROBE_STAMP).head;
                rec.call_subst.unifiable_under(&rec.call_pred, &head)
            })
            .collect();
        Visit { matching }
    }

    /// External success signal at `u`.
    pub fn scs(&self, u: &NodeId) -> bool {
        !self.record(u).failed
    }

    /// True when `v` is not the last body atom of the clause chosen at its parent.
    pub fn mhnb(&self, v: &NodeId) -> bool {
        let Some(i) = v.index() else { return false };
        let parent = self.record(&v.parent());
        parent
            .chosen
            .as_ref()
            .is_some_and(|c| (i as usize) < c.body.len())
    }

    /// The predication of `u` with the current bindings applied.
    pub fn updated_pred(&self, u: &NodeId) -> Term {
        self.shadow.subst.apply(&self.record(u).call_pred)
    }

    /// Predication and box for a node about to hold body atom `atom`.
    pub fn box_init(&self, atom: &Term) -> (Vec<usize>, Term) {
        let p = self.shadow.subst.apply(atom);
        (self.program.definition(&p), p)
    }

    /// Every rule whose premises hold.
    pub fn applicable_rules(&self) -> Vec<RuleId> {
        let s = &self.state;
        let u = &s.current;
        let fst = s.is_first(u);
        let mut out = Vec::new();
        if fst && s.is_leaf(u) && !s.ct {
            let visit = self.visit(u);
            match visit.matching.first() {
                None => out.push(RuleId::Call1),
                Some(&c) if self.clause(c).is_fact() => out.push(RuleId::Call1),
                Some(_) => out.push(RuleId::Call2),
            }
        }
        if !fst && !s.ct && !s.flr && self.scs(u) {
            out.push(if self.mhnb(u) {
                RuleId::Exit2
            } else {
                RuleId::Exit1
            });
        }
        if !fst && !s.ct && !s.hcp(u) && (!self.scs(u) || s.flr) {
            out.push(RuleId::Fail2);
        }
        if !fst && (s.flr || s.ct) {
            if let Some(v) = s.gcp(u) {
                let c = s.claus[&v][0];
                out.push(if self.clause(c).is_fact() {
                    RuleId::Redo1
                } else {
                    RuleId::Redo2
                });
            }
        }
        out
    }

    /// The unique applicable rule, or `None` when the derivation is over.
    pub fn applicable_rule(&self) -> Result<Option<RuleId>, EngineError> {
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

    /// Fires the applicable rule; `None` when no rule applies.
    pub fn step(&self) -> Result<Option<(RuleId, Machine)>, EngineError> {
        let Some(rule) = self.applicable_rule()? else {
            return Ok(None);
        };
        let mut m = self.clone();
        m.steps += 1;
        let u = self.state.current.clone();
        match rule {
            RuleId::Call1 | RuleId::Call2 => {
                let mut matching = self.visit(&u).matching;
                let chosen = if matching.is_empty() {
                    None
                } else {
                    Some(matching.remove(0))
                };
                m.state.claus.insert(u.clone(), matching);
                m.state.first.insert(u.clone(), false);
                m.state.flr = false;
                match chosen {
                    None => m.shadow.nodes.get_mut(&u).unwrap().failed = true,
                    Some(c) => m.enter_clause(&u, c),
                }
            }
            RuleId::Exit1 | RuleId::Exit2 => {
                let pud = self.updated_pred(&u);
                m.state.pred.insert(u.clone(), pud);
                m.shadow.nodes.get_mut(&u).unwrap().exit_subst = Some(self.shadow.subst.clone());
                if rule == RuleId::Exit1 {
                    m.state.ct = u.is_root();
                    m.state.current = u.parent();
                } else {
                    let i = u.index().unwrap() as usize;
                    let parent_clause = self.record(&u.parent()).chosen.clone().unwrap();
                    m.create_node(u.next_sibling().unwrap(), &parent_clause.body[i]);
                }
            }
            RuleId::Fail2 => {
                // Failing into a root that still holds a choice point also
                // completes the tree; the Redo that follows clears the flag.
                let v = u.parent();
                m.state.ct = u.is_root() || (v.is_root() && self.state.hcp(&v));
                m.state.flr = true;
                m.state.current = u.parent();
            }
            RuleId::Redo1 | RuleId::Redo2 => {
                let v = self.state.gcp(&u).unwrap();
                m.state.prune_after(&v);
                m.shadow.nodes.retain(|y, _| *y <= v);
                m.shadow.subst = self.record(&v).call_subst.clone();
                let mut box_ = m.state.claus[&v].clone();
                let c = box_.remove(0);
                m.state.claus.insert(v.clone(), box_);
                m.state.ct = false;
                m.state.flr = false;
                m.state.current = v.clone();
                m.enter_clause(&v, c);
            }
        }
        Ok(Some((rule, m)))
    }

    /// Resolves `u` with clause `c` (known to match) and, for a rule,
    /// creates the node of its first body atom.
    fn enter_clause(&mut self, u: &NodeId, c: usize) {
        let stamp = self.shadow.next_stamp;
        self.shadow.next_stamp += 1;
        let inst = rename_clause(self.clause(c), stamp);
        let rec = self.shadow.nodes.get_mut(u).unwrap();
        let subst = rec.call_subst.unify_under(&rec.call_pred, &inst.head);
        assert!(!subst.is_bottom(), "box clause must match");
        rec.chosen = Some(inst.clone());
        rec.failed = false;
        self.shadow.subst = subst;
        if let Some(first) = inst.body.first() {
            self.create_node(u.child(1), first);
        }
    }

    fn create_node(&mut self, v: NodeId, atom: &Term) {
        let (claus, pred) = self.box_init(atom);
        self.state.add_node(v.clone(), pred.clone(), claus);
        self.state.current = v.clone();
        self.shadow.nodes.insert(
            v,
            NodeRecord {
                call_pred: pred,
                call_subst: self.shadow.subst.clone(),
                chosen: None,
                exit_subst: None,
                failed: false,
            },
        );
    }
}

/// A bounded run from the initial state.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub initial: Machine,
    pub steps: Vec<(RuleId, Machine)>,
    pub outcome: Outcome,
}

impl Derivation {
    /// The machine before step `t` (0-based).
    pub fn before(&self, t: usize) -> &Machine {
        if t == 0 {
            &self.initial
        } else {
            &self.steps[t - 1].1
        }
    }

    pub fn rules(&self) -> Vec<RuleId> {
        self.steps.iter().map(|(r, _)| *r).collect()
    }

    pub fn last(&self) -> &Machine {
        self.steps.last().map_or(&self.initial, |(_, m)| m)
    }
}

/// Steps from the initial state until no rule applies or `max_steps`
/// transitions have been taken.
pub fn run_virtual(program: &Program, max_steps: usize) -> Result<Derivation, EngineError> {
    let initial = Machine::from_program(program);
    let mut steps: Vec<(RuleId, Machine)> = Vec::new();
    loop {
        let cur = steps.last().map_or(&initial, |(_, m)| m);
        if steps.len() >= max_steps {
            let outcome = if cur.applicable_rule()?.is_some() {
                Outcome::FuelExhausted
            } else {
                Outcome::Halted
            };
            return Ok(Derivation {
                initial,
                steps,
                outcome,
            });
        }
        match cur.step()? {
            None => {
                return Ok(Derivation {
                    initial,
                    steps,
                    outcome: Outcome::Halted,
                })
            }
            Some(next) => steps.push(next),
        }
    }
}
