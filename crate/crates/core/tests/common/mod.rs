#![allow(dead_code)]

pub mod replay;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use boxtrace_core::random::{random_corpus, GenConfig};
use boxtrace_core::{
    check_adequacy, parse_program, run_actual_trace, run_model, AdequacyReport, EngineError,
    ModelId, ModelRun, Outcome, Program, Term, TraceEvent, Var,
};

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn program(name: &str) -> Program {
    parse_program(&fixture(name)).unwrap()
}

/// Renames variable tokens (`_<digits>` or a capitalised name) to
/// `_0, _1, ...` by first occurrence, with `names` shared across calls.
fn rename_vars(text: &str, names: &mut HashMap<String, usize>) -> String {
    let mut out = String::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let prev_ident = i > 0 && (chars[i - 1].is_alphanumeric() || chars[i - 1] == '_');
        let starts_var = chars[i].is_ascii_uppercase()
            || (chars[i] == '_' && chars.get(i + 1).is_some_and(char::is_ascii_alphanumeric));
        if starts_var && !prev_ident {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let tok: String = chars[i..j].iter().collect();
            let n = names.len();
            let k = *names.entry(tok).or_insert(n);
            out.push_str(&format!("_{k}"));
            i = j;
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}

/// Applies the variable map to the predication field of every trace line.
pub fn normalized(lines: &[String]) -> Vec<String> {
    let mut names = HashMap::new();
    lines
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.splitn(5, ' ').collect();
            format!(
                "{} {} {} {} {}",
                f[0],
                f[1],
                f[2],
                f[3],
                rename_vars(f[4], &mut names)
            )
        })
        .collect()
}

/// Golden lines with chronos renumbered from 1, the GNU decorations
/// (`Call:` and the trailing `?`) dropped, and variables normalized.
pub fn golden_lines(text: &str) -> Vec<String> {
    let lines: Vec<String> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(k, l)| {
            let mut f: Vec<&str> = l.split_whitespace().collect();
            if f.last() == Some(&"?") {
                f.pop();
            }
            let port = f[3].trim_end_matches(':');
            format!("{} {} {} {} {}", k + 1, f[1], f[2], port, f[4..].join(" "))
        })
        .collect();
    normalized(&lines)
}

pub const CORPUS_SEED: u64 = 1000;
pub const CORPUS_SIZE: usize = 200;
pub const FUEL: usize = 500;

/// Everything the corpus checks need from one generated program.
pub struct CorpusEntry {
    pub program: Program,
    pub adequacy: Result<AdequacyReport, EngineError>,
    pub so_trace: Result<(Vec<TraceEvent>, Outcome), EngineError>,
    pub runs: [Result<ModelRun, EngineError>; 3],
}

/// The generated corpus, run once per test binary.
pub fn corpus() -> &'static [CorpusEntry] {
    static CORPUS: OnceLock<Vec<CorpusEntry>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        random_corpus(CORPUS_SEED, CORPUS_SIZE, &GenConfig::default())
            .into_iter()
            .map(|program| CorpusEntry {
                adequacy: check_adequacy(&program, FUEL),
                so_trace: run_actual_trace(&program, FUEL),
                runs: ModelId::ALL.map(|m| run_model(&program, m, FUEL)),
                program,
            })
            .collect()
    })
}

/// Variable normalization over free text (no capitalised non-variables).
pub fn normalize_text(text: &str) -> String {
    rename_vars(text, &mut HashMap::new())
}

/// Textbook unification with occur check, kept apart from the engine's
/// unifier. Returns the fully applied bindings, or `None` when the terms
/// have no finite unifier.
pub fn oracle_unify(a: &Term, b: &Term) -> Option<HashMap<Var, Term>> {
    fn deref(s: &HashMap<Var, Term>, t: &Term) -> Term {
        match t {
            Term::Var(v) => match s.get(v) {
                Some(u) => deref(s, u),
                None => t.clone(),
            },
            Term::Compound { functor, args } => {
                Term::compound(functor.clone(), args.iter().map(|x| deref(s, x)).collect())
            }
        }
    }
    fn occurs(v: &Var, t: &Term) -> bool {
        match t {
            Term::Var(w) => v == w,
            Term::Compound { args, .. } => args.iter().any(|x| occurs(v, x)),
        }
    }
    let mut s: HashMap<Var, Term> = HashMap::new();
    let mut todo = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = todo.pop() {
        let (x, y) = (deref(&s, &x), deref(&s, &y));
        match (&x, &y) {
            (Term::Var(v), Term::Var(w)) if v == w => {}
            (Term::Var(v), t) | (t, Term::Var(v)) => {
                if occurs(v, t) {
                    return None;
                }
                s.insert(v.clone(), t.clone());
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
                    return None;
                }
                todo.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
        }
    }
    let keys: Vec<Var> = s.keys().cloned().collect();
    Some(
        keys.into_iter()
            .map(|v| (v.clone(), deref(&s, &Term::Var(v))))
            .collect(),
    )
}
