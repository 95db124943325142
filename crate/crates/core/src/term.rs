//! Terms, clauses, programs, substitutions and unification.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// A logic variable. `stamp` separates renamed copies of the same source
/// variable; source text always has stamp 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub stamp: u32,
    pub name: Arc<str>,
}

impl Var {
    pub fn new(name: impl Into<Arc<str>>, stamp: u32) -> Self {
        Var {
            stamp,
            name: name.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    /// Arity 0 is a constant. Both parts are shared, so cloning is cheap.
    Compound {
        functor: Arc<str>,
        args: Arc<[Term]>,
    },
}

impl Term {
    pub fn var(name: impl Into<Arc<str>>) -> Term {
        Term::Var(Var::new(name, 0))
    }

    pub fn atom(name: impl Into<Arc<str>>) -> Term {
        Term::Compound {
            functor: name.into(),
            args: Arc::new([]),
        }
    }

    pub fn compound(functor: impl Into<Arc<str>>, args: Vec<Term>) -> Term {
        Term::Compound {
            functor: functor.into(),
            args: args.into(),
        }
    }

    /// Functor name and arity, or `None` for a variable.
    pub fn indicator(&self) -> Option<(&str, usize)> {
        match self {
            Term::Var(_) => None,
            Term::Compound { functor, args } => Some((functor.as_ref(), args.len())),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in first-occurrence order, without repeats.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>, seen: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
            Term::Compound { args, .. } => {
                for a in args.iter() {
                    a.collect_vars(out, seen);
                }
            }
        }
    }

    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Compound { functor, args } => Term::Compound {
                functor: functor.clone(),
                args: args.iter().map(|a| a.map_vars(f)).collect(),
            },
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Compound { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

/// Debug-oriented rendering: renamed variables show their stamp (`X#7`).
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) if v.stamp == 0 => write!(f, "{}", v.name),
            Term::Var(v) => write!(f, "{}#{}", v.name, v.stamp),
            Term::Compound { functor, args } => {
                write!(f, "{functor}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Names variables for trace output. Source-level variables (stamp 0) keep
/// their written name; every renamed variable gets `_k`, with `k` counted in
/// order of first appearance across everything printed through this value.
#[derive(Clone, Debug, Default)]
pub struct TermPrinter {
    names: HashMap<Var, usize>,
}

impl TermPrinter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn print(&mut self, t: &Term) -> String {
        let mut s = String::new();
        self.write(t, &mut s);
        s
    }

    fn write(&mut self, t: &Term, out: &mut String) {
        match t {
            Term::Var(v) if v.stamp == 0 => out.push_str(&v.name),
            Term::Var(v) => {
                let next = self.names.len();
                let k = *self.names.entry(v.clone()).or_insert(next);
                out.push('_');
                out.push_str(&k.to_string());
            }
            Term::Compound { functor, args } => {
                out.push_str(functor);
                if !args.is_empty() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        self.write(a, out);
                    }
                    out.push(')');
                }
            }
        }
    }
}

/// Canonical text of a single term, no spaces, renamed variables as `_k`.
pub fn format_term(t: &Term) -> String {
    TermPrinter::new().print(t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub id: String,
    pub head: Term,
    pub body: Vec<Term>,
}

impl Clause {
    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        write!(f, ".")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub goal: Term,
}

impl Program {
    /// Indices of the clauses defining the predicate of `atom`, in source order.
    pub fn definition(&self, atom: &Term) -> Vec<usize> {
        let Some(ind) = atom.indicator() else {
            return Vec::new();
        };
        self.clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.head.indicator() == Some(ind))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn clause_index(&self, id: &str) -> Option<usize> {
        self.clauses.iter().position(|c| c.id == id)
    }
}

/// Source text with explicit labels; parses back to an equal program.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{}: {c}", c.id)?;
        }
        write!(f, ":- {}.", self.goal)
    }
}

/// Copy of `c` with every variable restamped.
pub fn rename_clause(c: &Clause, stamp: u32) -> Clause {
    let mut f = |v: &Var| Term::Var(Var::new(v.name.clone(), stamp));
    Clause {
        id: c.id.clone(),
        head: c.head.map_vars(&mut f),
        body: c.body.iter().map(|b| b.map_vars(&mut f)).collect(),
    }
}

/// A finite set of bindings, or the failure value ⊥. The map is shared so
/// that engine states, which keep one substitution per node, clone cheaply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Substitution {
    Bindings(Arc<BTreeMap<Var, Term>>),
    Bottom,
}

impl Default for Substitution {
    fn default() -> Self {
        Substitution::empty()
    }
}

impl Substitution {
    pub fn empty() -> Self {
        Substitution::Bindings(Arc::default())
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Substitution::Bottom)
    }

    pub fn bindings(&self) -> Option<&BTreeMap<Var, Term>> {
        match self {
            Substitution::Bindings(b) => Some(b),
            Substitution::Bottom => None,
        }
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings().and_then(|b| b.get(v))
    }

    /// Simultaneous replacement.
    ///
    /// # Panics
    /// When `self` is ⊥.
    pub fn apply(&self, t: &Term) -> Term {
        let b = self
            .bindings()
            .expect("cannot apply the failure substitution");
        t.map_vars(&mut |v| b.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
    }

    /// The substitution that applies `self` first and then `next`.
    pub fn then(&self, next: &Substitution) -> Substitution {
        let (Some(a), Some(b)) = (self.bindings(), next.bindings()) else {
            return Substitution::Bottom;
        };
        if b.is_empty() {
            return self.clone();
        }
        let mut out = BTreeMap::new();
        for (v, t) in a {
            let t = next.apply(t);
            if t != Term::Var(v.clone()) {
                out.insert(v.clone(), t);
            }
        }
        for (v, t) in b {
            if !a.contains_key(v) {
                out.insert(v.clone(), t.clone());
            }
        }
        Substitution::Bindings(Arc::new(out))
    }

    /// Whether `a` and `b` unify under `self`, without building the result.
    pub fn unifiable_under(&self, a: &Term, b: &Term) -> bool {
        !self.is_bottom() && !unify(&self.apply(a), &self.apply(b)).is_bottom()
    }

    /// Extends `self` with a most general unifier of `a` and `b` under `self`.
    pub fn unify_under(&self, a: &Term, b: &Term) -> Substitution {
        if self.is_bottom() {
            return Substitution::Bottom;
        }
        let mu = unify(&self.apply(a), &self.apply(b));
        self.then(&mu)
    }
}

/// Most general unifier without occur check; ⊥ when the terms clash.
/// A variable-variable pair binds the younger (larger stamp) variable.
pub fn unify(a: &Term, b: &Term) -> Substitution {
    let mut bound: HashMap<Var, Term> = HashMap::new();
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = stack.pop() {
        let x = walk(&bound, x);
        let y = walk(&bound, y);
        match (x, y) {
            (Term::Var(v), Term::Var(w)) => {
                if v != w {
                    if v > w {
                        bound.insert(v, Term::Var(w));
                    } else {
                        bound.insert(w, Term::Var(v));
                    }
                }
            }
            (Term::Var(v), t) | (t, Term::Var(v)) => {
                bound.insert(v, t);
            }
            (
                Term::Compound {
                    functor: f,
                    args: xs,
                },
                Term::Compound {
                    functor: g,
                    args: ys,
                },
            ) => {
                if f != g || xs.len() != ys.len() {
                    return Substitution::Bottom;
                }
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()).rev());
            }
        }
    }
    let mut out = BTreeMap::new();
    for v in bound.keys() {
        let mut active = BTreeSet::new();
        let t = resolve(&bound, &Term::Var(v.clone()), &mut active);
        out.insert(v.clone(), t);
    }
    Substitution::Bindings(Arc::new(out))
}

fn walk(bound: &HashMap<Var, Term>, mut t: Term) -> Term {
    while let Term::Var(v) = &t {
        match bound.get(v) {
            Some(next) => t = next.clone(),
            None => break,
        }
    }
    t
}

/// Fully dereferences `t`. A variable met again while it is being expanded
/// (a cyclic binding, possible without occur check) is left in place.
fn resolve(bound: &HashMap<Var, Term>, t: &Term, active: &mut BTreeSet<Var>) -> Term {
    match t {
        Term::Var(v) => match bound.get(v) {
            Some(next) if !active.contains(v) => {
                active.insert(v.clone());
                let r = resolve(bound, next, active);
                active.remove(v);
                r
            }
            _ => t.clone(),
        },
        Term::Compound { functor, args } => Term::Compound {
            functor: functor.clone(),
            args: args.iter().map(|a| resolve(bound, a, active)).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn unify_examples() {
        let s = unify(&t("p(X)"), &t("p(a)"));
        assert_eq!(s.get(&Var::new("X", 0)), Some(&t("a")));
        assert_eq!(s.bindings().unwrap().len(), 1);
        assert!(unify(&t("eq(a,b)"), &t("eq(X,X)")).is_bottom());
        assert_eq!(unify(&t("goal"), &t("goal")), Substitution::empty());
    }

    #[test]
    fn apply_examples() {
        let s = unify(&t("X"), &t("a"));
        assert_eq!(format_term(&s.apply(&t("eq(X,b)"))), "eq(a,b)");
        assert_eq!(Substitution::empty().apply(&t("f(Y,g(Z))")), t("f(Y,g(Z))"));
        let s = unify(&t("X"), &t("b"));
        assert_eq!(format_term(&s.apply(&t("p(X)"))), "p(b)");
    }

    #[test]
    fn rename_examples() {
        let p =
            crate::parse::parse_program("eq(X,X). p(a). goal :- p(X), eq(X,b). :- goal.").unwrap();
        assert_eq!(rename_clause(&p.clauses[0], 7).to_string(), "eq(X#7,X#7).");
        assert_eq!(rename_clause(&p.clauses[1], 3), p.clauses[1]);
        let r = rename_clause(&p.clauses[2], 3);
        assert_eq!(r.to_string(), "goal :- p(X#3), eq(X#3,b).");
        let before: BTreeSet<Var> = p.clauses[2].body.iter().flat_map(Term::vars).collect();
        let after: BTreeSet<Var> = r.body.iter().flat_map(Term::vars).collect();
        assert_eq!(before.len(), after.len());
        assert!(before.is_disjoint(&after));
    }

    #[test]
    fn format_examples() {
        assert_eq!(format_term(&t("eq(a,b)")), "eq(a,b)");
        assert_eq!(format_term(&t("goal")), "goal");
        let v = Term::compound("q", vec![Term::Var(Var::new("_", 4))]);
        assert_eq!(format_term(&v), "q(_0)");
        let mut pr = TermPrinter::new();
        let a = Term::Var(Var::new("A", 2));
        let b = Term::Var(Var::new("B", 2));
        assert_eq!(
            pr.print(&Term::compound("f", vec![b.clone(), a.clone()])),
            "f(_0,_1)"
        );
        assert_eq!(pr.print(&a), "_1");
    }

    #[test]
    fn younger_variable_is_bound() {
        let old = Term::Var(Var::new("_G", 1));
        let young = Term::Var(Var::new("X", 2));
        let s = unify(
            &Term::compound("q", vec![old.clone()]),
            &Term::compound("q", vec![young.clone()]),
        );
        assert_eq!(s.apply(&young), old);
        let s = unify(&young, &old);
        assert_eq!(s.apply(&young), old);
    }

    #[test]
    fn cyclic_binding_terminates() {
        let s = unify(&t("X"), &t("f(X)"));
        assert_eq!(s.apply(&t("X")), t("f(X)"));
    }

    #[test]
    fn bottom_absorbs() {
        let s = unify(&t("p(X)"), &t("p(a)"));
        assert!(s.then(&Substitution::Bottom).is_bottom());
        assert!(Substitution::Bottom.then(&s).is_bottom());
        assert!(Substitution::Bottom
            .unify_under(&t("a"), &t("a"))
            .is_bottom());
    }

    #[test]
    fn unify_under_extends() {
        let s = unify(&t("X"), &t("Y"));
        let s2 = s.unify_under(&t("p(Y)"), &t("p(a)"));
        assert_eq!(s2.apply(&t("f(X,Y)")), t("f(a,a)"));
        assert!(s2.unify_under(&t("X"), &t("b")).is_bottom());
        assert!(!s2.unifiable_under(&t("X"), &t("b")));
        assert!(s2.unifiable_under(&t("X"), &t("a")));
    }
}
