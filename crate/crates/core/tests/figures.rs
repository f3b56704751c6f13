mod common;

use stqa::executor::{trace_text, Executor};
use stqa::program::{parse_program, serialize_program};

#[test]
fn every_figure_is_reproduced() {
    let figs = common::figures();
    assert_eq!(figs.len(), 11);
    let mut failures = Vec::new();
    for (name, fig) in &figs {
        for p in common::check_figure(fig) {
            failures.push(format!("{name}: {p}"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn swapped_equals_inputs_are_visible_in_the_trace() {
    let fig = common::figures()
        .into_iter()
        .find(|(n, _)| n == "fig10")
        .unwrap()
        .1;
    let (vocab, scene) = (fig.vocab(), fig.scene());
    let run = |i: usize| {
        let p = parse_program(&fig.cases[i].program, &vocab).unwrap();
        trace_text(&Executor::new(&vocab).execute_fresh(&p, &scene))
    };
    let (right, swapped) = (run(0), run(1));
    assert!(right.contains("actions_after\tstanding up"));
    assert!(swapped.contains("actions_after\tholding a box"));
    assert!(swapped.contains("actions_before\tsitting in a chair"));
    assert!(swapped.ends_with("answer: no\n"));
}

#[test]
fn misstructured_program_fails_at_the_equals_node() {
    let fig = common::figures()
        .into_iter()
        .find(|(n, _)| n == "fig14")
        .unwrap()
        .1;
    let vocab = fig.vocab();
    let p = parse_program(&fig.cases[1].program, &vocab).unwrap();
    let out = Executor::new(&vocab).execute_fresh(&p, &fig.scene());
    let text = trace_text(&out);
    let last = text.lines().rev().nth(1).unwrap();
    assert!(last.contains("object_equals\terror:"), "{last}");
    assert_eq!(out.root_error().map(|e| e.label()), Some("type_mismatch"));
}

#[test]
fn figure_programs_round_trip() {
    for (name, fig) in common::figures() {
        let vocab = fig.vocab();
        for case in &fig.cases {
            let p = parse_program(&case.program, &vocab).unwrap();
            let text = serialize_program(&p);
            assert_eq!(parse_program(&text, &vocab).unwrap(), p, "{name}");
            assert_eq!(text, case.program, "{name}");
        }
    }
}
