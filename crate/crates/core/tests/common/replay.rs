//! The first example's virtual derivation, state by state.

use boxtrace_core::so::{run_virtual, Machine, RuleId};
use boxtrace_core::term::TermPrinter;

use super::program;

/// All nine parameters of a state on one line.
pub fn render(m: &Machine) -> String {
    let s = &m.state;
    let mut pr = TermPrinter::new();
    let join = |items: Vec<String>| items.join(",");
    let nodes = join(s.tree.iter().map(ToString::to_string).collect());
    let num = join(s.num.iter().map(|(v, n)| format!("{v}:{n}")).collect());
    let pred = join(
        s.pred
            .iter()
            .map(|(v, p)| format!("{v}:{}", pr.print(p)))
            .collect(),
    );
    let claus = join(
        s.claus
            .iter()
            .map(|(v, cs)| {
                let ids: Vec<&str> = cs
                    .iter()
                    .map(|&i| m.program.clauses[i].id.as_str())
                    .collect();
                format!("{v}:[{}]", ids.join(","))
            })
            .collect(),
    );
    let first = join(s.first.iter().map(|(v, b)| format!("{v}:{b}")).collect());
    format!(
        "T={{{nodes}}} u={} n={} num={{{num}}} pred={{{pred}}} claus={{{claus}}} first={{{first}}} ct={} flr={}",
        s.current, s.counter, s.ct, s.flr
    )
}

pub const STATES: [&str; 11] = [
    "T={ε} u=ε n=1 num={ε:1} pred={ε:goal} claus={ε:[c1]} first={ε:true} ct=false flr=false",
    "T={ε,1} u=1 n=2 num={ε:1,1:2} pred={ε:goal,1:p(X)} claus={ε:[],1:[c2,c3]} first={ε:false,1:true} ct=false flr=false",
    "T={ε,1} u=1 n=2 num={ε:1,1:2} pred={ε:goal,1:p(X)} claus={ε:[],1:[c3]} first={ε:false,1:false} ct=false flr=false",
    "T={ε,1,2} u=2 n=3 num={ε:1,1:2,2:3} pred={ε:goal,1:p(a),2:eq(a,b)} claus={ε:[],1:[c3],2:[c4]} first={ε:false,1:false,2:true} ct=false flr=false",
    "T={ε,1,2} u=2 n=3 num={ε:1,1:2,2:3} pred={ε:goal,1:p(a),2:eq(a,b)} claus={ε:[],1:[c3],2:[]} first={ε:false,1:false,2:false} ct=false flr=false",
    "T={ε,1,2} u=ε n=3 num={ε:1,1:2,2:3} pred={ε:goal,1:p(a),2:eq(a,b)} claus={ε:[],1:[c3],2:[]} first={ε:false,1:false,2:false} ct=true flr=true",
    "T={ε,1} u=1 n=3 num={ε:1,1:2} pred={ε:goal,1:p(a)} claus={ε:[],1:[]} first={ε:false,1:false} ct=false flr=false",
    "T={ε,1,2} u=2 n=4 num={ε:1,1:2,2:4} pred={ε:goal,1:p(b),2:eq(b,b)} claus={ε:[],1:[],2:[c4]} first={ε:false,1:false,2:true} ct=false flr=false",
    "T={ε,1,2} u=2 n=4 num={ε:1,1:2,2:4} pred={ε:goal,1:p(b),2:eq(b,b)} claus={ε:[],1:[],2:[]} first={ε:false,1:false,2:false} ct=false flr=false",
    "T={ε,1,2} u=ε n=4 num={ε:1,1:2,2:4} pred={ε:goal,1:p(b),2:eq(b,b)} claus={ε:[],1:[],2:[]} first={ε:false,1:false,2:false} ct=false flr=false",
    "T={ε,1,2} u=ε n=4 num={ε:1,1:2,2:4} pred={ε:goal,1:p(b),2:eq(b,b)} claus={ε:[],1:[],2:[]} first={ε:false,1:false,2:false} ct=true flr=false",
];

pub const RULES: [RuleId; 10] = [
    RuleId::Call2,
    RuleId::Call1,
    RuleId::Exit2,
    RuleId::Call1,
    RuleId::Fail2,
    RuleId::Redo1,
    RuleId::Exit2,
    RuleId::Call1,
    RuleId::Exit1,
    RuleId::Exit1,
];

/// `S_k` with `k` from 1, as reached by the derivation.
pub fn replay() -> Vec<String> {
    let d = run_virtual(&program("ex1.pl"), 100).unwrap();
    std::iter::once(&d.initial)
        .chain(d.steps.iter().map(|(_, m)| m))
        .map(render)
        .collect()
}
