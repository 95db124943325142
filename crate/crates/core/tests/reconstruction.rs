mod common;

use boxtrace_core::adequacy::{check_cond_exclusivity, check_derivation};
use boxtrace_core::extract::derivation_events;
use boxtrace_core::random::{random_corpus, GenConfig};
use boxtrace_core::reconstruct::{reconstruct_step, Reconstruction};
use boxtrace_core::{
    check_adequacy, parse_trace, reconstruct_trace, run_model, run_virtual, ModelId, Outcome,
    RestrictedState, RuleId,
};
use common::{fixture, program, CORPUS_SEED};

#[test]
fn example_one_states_equal_projections() {
    let p = program("ex1.pl");
    let d = run_virtual(&p, 100).unwrap();
    let events = derivation_events(&d);
    let Reconstruction {
        states,
        final_state,
    } = reconstruct_trace(RestrictedState::project(&d.initial.state), &events).unwrap();
    assert_eq!(states.len(), events.len());
    assert_eq!(states[0], RestrictedState::project(&d.initial.state));
    for (t, (q, (_, m))) in states.iter().skip(1).zip(&d.steps).enumerate() {
        assert_eq!(*q, RestrictedState::project(&m.state), "Q{}", t + 2);
    }
    assert_eq!(
        final_state.unwrap(),
        RestrictedState::project(&d.last().state)
    );
}

#[test]
fn example_one_adequacy_report() {
    let report = check_adequacy(&program("ex1.pl"), 100).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(report.steps_checked, 10);
    assert!(report.port_warnings.is_empty());
    assert_eq!(report.line("ex1"), "PASS ex1 10 halted");
}

#[test]
fn example_two_adequacy_report() {
    let report = check_adequacy(&program("ex2.pl"), 100).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(report.steps_checked, 28);
}

#[test]
fn golden_trace_conditions_are_exclusive() {
    for name in ["ex1.trace", "ex2_m1.trace"] {
        let events = parse_trace(&fixture(name)).unwrap();
        assert!(check_cond_exclusivity(&events).is_empty(), "{name}");
    }
}

/// The reference listing, read from disk, rebuilds the same states as the
/// engine's trace.
#[test]
fn golden_file_reconstructs() {
    let p = program("ex1.pl");
    let d = run_virtual(&p, 100).unwrap();
    let from_file = parse_trace(&fixture("ex1.trace")).unwrap();
    let q0 = RestrictedState::project(&d.initial.state);
    let a = reconstruct_trace(q0.clone(), &from_file).unwrap();
    let b = reconstruct_trace(q0, &derivation_events(&d)).unwrap();
    // Terms differ only in variable identity (`X` versus a renamed copy), so
    // compare shapes and numbers.
    assert_eq!(a.states.len(), b.states.len());
    for (x, y) in a.states.iter().zip(&b.states) {
        assert_eq!((&x.tree, &x.current, &x.num), (&y.tree, &y.current, &y.num));
    }
}

#[test]
fn depth_is_never_read() {
    let d = run_virtual(&program("ex2.pl"), 1000).unwrap();
    let events = derivation_events(&d);
    let zeroed: Vec<_> = events
        .iter()
        .cloned()
        .map(|mut e| {
            e.l = 0;
            e
        })
        .collect();
    let q0 = RestrictedState::project(&d.initial.state);
    assert_eq!(
        reconstruct_trace(q0.clone(), &events).unwrap(),
        reconstruct_trace(q0, &zeroed).unwrap()
    );
}

#[test]
fn depth_is_never_read_on_corpus() {
    for p in random_corpus(CORPUS_SEED, 50, &GenConfig::default()) {
        let d = run_virtual(&p, 200).unwrap();
        let events = derivation_events(&d);
        let zeroed: Vec<_> = events
            .iter()
            .cloned()
            .map(|mut e| {
                e.l = 0;
                e
            })
            .collect();
        let q0 = RestrictedState::project(&d.initial.state);
        assert_eq!(
            reconstruct_trace(q0.clone(), &events).ok(),
            reconstruct_trace(q0, &zeroed).ok(),
            "{p}"
        );
    }
}

/// A reconstruction that forgets to prune at Redo1 is caught when the Redo
/// on p(a) (sixth transition) fails to drop node 2.
#[test]
fn unpruned_redo_is_detected() {
    let d = run_virtual(&program("ex1.pl"), 100).unwrap();
    let events = derivation_events(&d);
    let broken = |rule: RuleId, e: &_, next: Option<&_>, q: &RestrictedState| {
        if rule == RuleId::Redo1 {
            let mut q = q.clone();
            q.current = q.node(events[5].r).unwrap();
            Ok(q)
        } else {
            reconstruct_step(rule, e, next, q)
        }
    };
    let report = check_derivation(&d, &events, &broken);
    let div = report.first_divergence.expect("mutation must be caught");
    assert_eq!((div.step, div.field), (6, "T"));
    assert_eq!(div.expected, "ε,1");
    assert_eq!(div.got, "ε,1,2");
}

#[test]
fn shifted_numbers_are_detected() {
    let d = run_virtual(&program("ex1.pl"), 100).unwrap();
    let mut events = derivation_events(&d);
    events[3].r += 10;
    let report = check_derivation(&d, &events, &reconstruct_step);
    assert!(!report.passed());
}

#[test]
fn final_state_is_undecidable_after_a_bare_call() {
    let p = program("ex1.pl");
    let d = run_virtual(&p, 100).unwrap();
    let events = derivation_events(&d);
    let q0 = RestrictedState::project(&d.initial.state);
    let r = reconstruct_trace(q0, &events[..4]).unwrap();
    assert_eq!(r.states.len(), 4);
    assert!(r.final_state.is_none());
}

#[test]
fn m1_trace_reconstructs_like_so_core() {
    let p = program("ex2.pl");
    let run = run_model(&p, ModelId::M1, 1000).unwrap();
    assert_eq!(run.outcome, Outcome::Halted);
    let d = run_virtual(&p, 1000).unwrap();
    let report = check_derivation(&d, &run.events, &reconstruct_step);
    assert!(report.passed(), "{report}");
}
