mod common;

use boxtrace_core::{format_trace, run_actual_trace, run_model, ModelId, Outcome};
use common::{fixture, golden_lines, normalized, program};

fn assert_lines(got: &[String], want: &[String]) {
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        assert_eq!(g, w, "first difference at event {}", k + 1);
    }
    assert_eq!(got.len(), want.len());
}

#[test]
fn example_one_actual_trace() {
    let (events, outcome) = run_actual_trace(&program("ex1.pl"), 100).unwrap();
    assert_eq!(outcome, Outcome::Halted);
    assert_lines(
        &normalized(&format_trace(&events)),
        &golden_lines(&fixture("ex1.trace")),
    );
}

#[test]
fn example_one_same_in_every_model() {
    let want = golden_lines(&fixture("ex1.trace"));
    for m in [ModelId::M1, ModelId::M3] {
        let run = run_model(&program("ex1.pl"), m, 1000).unwrap();
        assert_lines(&normalized(&format_trace(&run.events)), &want);
    }
    // m2 numbers boxes by their rank in the tree; eq(b,b) sits third.
    let run = run_model(&program("ex1.pl"), ModelId::M2, 1000).unwrap();
    let got = format_trace(&run.events);
    assert_eq!(got[7], "8 3 2 Call eq(b,b)");
    assert_eq!(got[8], "9 3 2 Exit eq(b,b)");
}

#[test]
fn example_two_m1() {
    let run = run_model(&program("ex2.pl"), ModelId::M1, 1000).unwrap();
    assert_eq!(run.outcome, Outcome::Halted);
    assert_lines(
        &normalized(&format_trace(&run.events)),
        &golden_lines(&fixture("ex2_m1.trace")),
    );
}

#[test]
fn example_two_m2() {
    let run = run_model(&program("ex2.pl"), ModelId::M2, 1000).unwrap();
    assert_eq!(run.outcome, Outcome::Halted);
    assert_lines(
        &normalized(&format_trace(&run.events)),
        &golden_lines(&fixture("ex2_m2.trace")),
    );
}

#[test]
fn example_two_m3() {
    let run = run_model(&program("ex2.pl"), ModelId::M3, 1000).unwrap();
    assert_eq!(run.outcome, Outcome::Halted);
    assert_lines(
        &normalized(&format_trace(&run.events)),
        &golden_lines(&fixture("ex2_m3.trace")),
    );
}

#[test]
fn example_two_so_core_matches_m1() {
    let (events, _) = run_actual_trace(&program("ex2.pl"), 1000).unwrap();
    assert_lines(
        &normalized(&format_trace(&events)),
        &golden_lines(&fixture("ex2_m1.trace")),
    );
}
