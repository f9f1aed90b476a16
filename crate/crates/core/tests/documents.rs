use advicebench_core::analysis::{prefix_equiv, LetterSource};
use advicebench_core::doc::{
    builtin_machine, parse_document, parse_machine, DocError, Machine, BUILTIN_MACHINES,
};
use advicebench_core::sst::run_simple_sst;
use advicebench_core::transducers::{run_1wft, run_2wft, run_2wft_b, DEFAULT_BUDGET};
use advicebench_core::words::pi_word;
use advicebench_core::InfiniteWord;

fn output(m: &Machine, input: &InfiniteWord<char>) -> Box<dyn LetterSource> {
    match m {
        Machine::OneWay(t) => Box::new(run_1wft(t, input, DEFAULT_BUDGET)),
        Machine::TwoWay(t) => Box::new(run_2wft(t, input, DEFAULT_BUDGET)),
        Machine::Lookbehind(t) => Box::new(run_2wft_b(t, input, DEFAULT_BUDGET)),
        Machine::SimpleSst(s) => Box::new(run_simple_sst(s, input, DEFAULT_BUDGET)),
        other => panic!("{} has no output", other.kind()),
    }
}

fn sample_input(m: &Machine) -> InfiniteWord<char> {
    let letters = match m {
        Machine::OneWay(t) => t.input_alphabet().clone(),
        Machine::TwoWay(t) => t.input_alphabet().clone(),
        Machine::SimpleSst(s) => s.sst().input_alphabet().clone(),
        _ => unreachable!(),
    };
    if letters.contains(&'0') {
        pi_word(1)
    } else if letters.contains(&'#') {
        InfiniteWord::from_lasso_str("b#", "ab#baa#").unwrap()
    } else {
        InfiniteWord::from_lasso_str("b", "ab").unwrap()
    }
}

#[test]
fn builtin_machines_survive_a_round_trip() {
    for (name, _) in BUILTIN_MACHINES {
        let m = builtin_machine(name).unwrap();
        let back = parse_machine(&m.to_json().unwrap()).unwrap();
        // the second rendering is identical to the first
        assert_eq!(back.to_json().unwrap(), m.to_json().unwrap(), "{name}");
        let input = sample_input(&m);
        let verdict = prefix_equiv(&mut *output(&m, &input), &mut *output(&back, &input), 300);
        // the bouncer's output is finite, so both runs stop at the same place
        assert!(
            verdict.is_equal() || *name == "endmarker_bouncer",
            "{name}: {verdict:?}"
        );
    }
}

#[test]
fn copying_update_is_an_invariant_violation() {
    let text = r#"{"machines": {"bad": {
        "type": "sst", "simple": false, "registers": ["x", "y"], "states": 1,
        "transitions": [{"from": 0, "in": "a", "to": 0, "update": {"x": "x", "y": "x"}}],
        "output_function": [{"P": [0], "value": "y"}]
    }}}"#;
    match parse_document(text) {
        Err(DocError::InvariantViolation {
            name,
            module,
            report,
        }) => {
            assert_eq!(name, "bad");
            assert_eq!(module, "sst");
            assert!(report.contains("not copyless"), "{report}");
            assert!(report.contains("register 0"), "{report}");
        }
        other => panic!("expected a copyless violation, got {other:?}"),
    }
}

#[test]
fn missing_machine_is_unresolved() {
    let text = r#"{"machines": {
        "t": {"type": "2wftb", "states": 1, "initial": 0, "input_alphabet": ["a"], "output_alphabet": ["a"],
              "oracle": "nowhere", "transitions": []}
    }}"#;
    assert_eq!(
        parse_document(text).unwrap_err(),
        DocError::UnresolvedReference("nowhere".into())
    );
    let alias = r#"{"machines": {"m": "missing"}}"#;
    assert_eq!(
        parse_document(alias).unwrap_err(),
        DocError::UnresolvedReference("missing".into())
    );
}

#[test]
fn named_states_and_product_alphabets() {
    let text = r#"{
      "words": {"w": {"kind": "lasso", "v": "ab"}},
      "machines": {
        "swap": {"type": "mealy", "states": ["s"], "initial": "s", "input_alphabet": ["a", "b"],
                 "output_alphabet": ["a", "b"],
                 "transitions": [{"from": "s", "in": "a", "out": "b", "to": "s"},
                                 {"from": "s", "in": "b", "out": "a", "to": "s"}]},
        "pairs": {"type": "dfa", "states": 1, "initial": 0, "accepting": [0],
                  "alphabet": {"product": [["a", "b"], ["0", "_"]]},
                  "transitions": [{"from": 0, "letter": "a_", "to": 0}]}
      },
      "formulas": {"f": "G F a"}
    }"#;
    let d = parse_document(text).unwrap();
    let Machine::Mealy(m) = &d.machines["swap"] else {
        panic!()
    };
    assert_eq!(m.step(0, 'a'), Some(('b', 0)));
    let Machine::Dfa(p) = &d.machines["pairs"] else {
        panic!()
    };
    assert_eq!(p.alphabet().len(), 4);
    assert!(p.accepts(&[vec!['a', advicebench_core::words::PAD]]));
    assert_eq!(
        d.formulas["f"],
        advicebench_core::LtlFormula::parse("G F a").unwrap()
    );
}

#[test]
fn bad_documents_are_rejected() {
    let state = r#"{"machines": {"m": {"type": "mealy", "states": 1, "initial": 3, "input_alphabet": ["a"],
                    "output_alphabet": ["a"], "transitions": []}}}"#;
    assert!(matches!(
        parse_document(state),
        Err(DocError::InvariantViolation { .. })
    ));
    let letter = r#"{"words": {"w": {"kind": "constant", "letter": "ab"}}}"#;
    assert!(matches!(
        parse_document(letter),
        Err(DocError::InvariantViolation { .. })
    ));
    let kind = r#"{"machines": {"m": {"type": "nfa"}}}"#;
    assert!(matches!(parse_document(kind), Err(DocError::Parse { .. })));
    let formula = r#"{"formulas": {"f": "a U"}}"#;
    assert!(matches!(
        parse_document(formula),
        Err(DocError::InvariantViolation { module: "ltl", .. })
    ));
}
