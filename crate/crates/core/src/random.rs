//! Seeded generator of small programs for corpus checks.
//!
//! Heads are linear and arguments are constants, ground `f/1` terms or
//! variables, so unification never builds a cyclic term.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::{Clause, Program, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub max_predicates: usize,
    pub max_clauses: usize,
    pub max_body: usize,
    pub max_arity: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_predicates: 6,
            max_clauses: 3,
            max_body: 3,
            max_arity: 2,
        }
    }
}

const CONSTANTS: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

fn constant(rng: &mut ChaCha8Rng) -> Term {
    let c = Term::atom(*CONSTANTS.choose(rng).unwrap());
    if rng.gen_bool(0.15) {
        Term::compound("f", vec![c])
    } else {
        c
    }
}

fn atom(name: &str, args: Vec<Term>) -> Term {
    if args.is_empty() {
        Term::atom(name)
    } else {
        Term::compound(name, args)
    }
}

pub fn random_program(seed: u64, cfg: &GenConfig) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_preds = rng.gen_range(1..=cfg.max_predicates);
    let preds: Vec<(String, usize)> = (0..n_preds)
        .map(|i| (format!("p{i}"), rng.gen_range(0..=cfg.max_arity)))
        .collect();
    // One predicate may stay undefined so that calls to it fail.
    let undefined = (n_preds > 1 && rng.gen_bool(0.3)).then(|| n_preds - 1);
    let mut clauses = Vec::new();
    for (k, (name, arity)) in preds.iter().enumerate() {
        if Some(k) == undefined {
            continue;
        }
        for _ in 0..rng.gen_range(1..=cfg.max_clauses) {
            let mut fresh = VARS.iter();
            let head_args: Vec<Term> = (0..*arity)
                .map(|_| match fresh.next() {
                    Some(v) if rng.gen_bool(0.5) => Term::var(*v),
                    _ => constant(&mut rng),
                })
                .collect();
            let head = atom(name, head_args);
            let mut in_scope = head
                .vars()
                .into_iter()
                .map(|v| v.name.to_string())
                .collect::<Vec<_>>();
            let n_body = if rng.gen_bool(0.4) {
                0
            } else {
                rng.gen_range(1..=cfg.max_body)
            };
            let body = (0..n_body)
                .map(|_| {
                    let (bn, ba) = preds.choose(&mut rng).unwrap();
                    let args = (0..*ba)
                        .map(|_| match rng.gen_range(0..3) {
                            0 => constant(&mut rng),
                            1 if !in_scope.is_empty() => {
                                Term::var(in_scope.choose(&mut rng).unwrap().clone())
                            }
                            _ => {
                                let v = VARS.choose(&mut rng).unwrap().to_string();
                                if !in_scope.contains(&v) {
                                    in_scope.push(v.clone());
                                }
                                Term::var(v)
                            }
                        })
                        .collect();
                    atom(bn, args)
                })
                .collect();
            clauses.push(Clause {
                id: format!("c{}", clauses.len() + 1),
                head,
                body,
            });
        }
    }
    let (gn, ga) = preds.choose(&mut rng).unwrap();
    let goal_args = (0..*ga)
        .map(|i| {
            if rng.gen_bool(0.5) {
                Term::var(VARS[i])
            } else {
                constant(&mut rng)
            }
        })
        .collect();
    Program {
        clauses,
        goal: atom(gn, goal_args),
    }
}

/// A term over `f/1`, `g/2`, the constants `a`, `b` and the variables
/// `X`, `Y`, `Z`, `W`; small pools make shared variables and clashes common.
pub fn random_term<R: Rng>(rng: &mut R, depth: u32) -> Term {
    let leaf = depth == 0 || rng.gen_bool(0.4);
    if leaf {
        return match rng.gen_range(0..6) {
            0 => Term::atom("a"),
            1 => Term::atom("b"),
            k => Term::var(VARS[k - 2]),
        };
    }
    if rng.gen_bool(0.5) {
        Term::compound("f", vec![random_term(rng, depth - 1)])
    } else {
        Term::compound(
            "g",
            vec![random_term(rng, depth - 1), random_term(rng, depth - 1)],
        )
    }
}

/// `count` programs from consecutive seeds starting at `base_seed`.
pub fn random_corpus(base_seed: u64, count: usize, cfg: &GenConfig) -> Vec<Program> {
    (0..count as u64)
        .map(|i| random_program(base_seed + i, cfg))
        .collect()
}
