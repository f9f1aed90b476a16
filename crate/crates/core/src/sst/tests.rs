use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::transducers::run_2wft;
use crate::transducers::samples::endmarker_bouncer;
use crate::words::{block_mirror, pi_word};

fn regs(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn lasso(u: &str, v: &str) -> InfiniteWord<char> {
    InfiniteWord::from_lasso_str(u, v).unwrap()
}

#[test]
fn copyless_examples() {
    let r = regs(&["x", "y", "z"]);
    assert!(validate_copyless(&sub(&r, &[("x", "z"), ("y", "y x"), ("z", "")])).is_ok());
    let bad = validate_copyless(&sub(&r, &[("x", "x"), ("y", "x")])).unwrap_err();
    assert_eq!(bad.register, 0);
    assert_eq!(
        (bad.first, bad.second),
        (Site { lhs: 0, index: 0 }, Site { lhs: 1, index: 0 })
    );
    assert!(validate_copyless(&Substitution::identity(3)).is_ok());
}

#[test]
fn sst_rejects_copying_updates() {
    let r = regs(&["x", "y"]);
    let t = vec![(0, 'a', sub(&r, &[("x", "x"), ("y", "x")]), 0)];
    assert!(matches!(
        Sst::new(1, 0, ['a'], ['a'], r, t, []),
        Err(SstError::NotCopyless(_))
    ));
}

#[test]
fn mirror_sst_reverses_blocks() {
    let m = mirror_sst(&['a', 'b']);
    let mut out = run_simple_sst(&m, &lasso("", "ab#"), DEFAULT_BUDGET);
    assert_eq!(out.prefix_string(9).unwrap(), "ba#ba#ba#");
    let input = lasso("", "ab#baa#");
    let expected = block_mirror(&input);
    let mut out = run_simple_sst(&m, &input, DEFAULT_BUDGET);
    for i in 0..1000 {
        assert_eq!(out.get(i).unwrap(), expected.letter_at(i));
    }
}

#[test]
fn identity_and_interleaver() {
    let mut id = run_simple_sst(&identity_sst(&['0', '1']), &lasso("", "01"), DEFAULT_BUDGET);
    assert_eq!(id.prefix_string(6).unwrap(), "010101");
    let mut inter = run_simple_sst(&interleaver_sst(), &lasso("ba#", "abab#"), DEFAULT_BUDGET);
    assert_eq!(inter.prefix_string(9).unwrap(), "ab#aabb#a");
}

#[test]
fn silent_simple_sst_exceeds_budget() {
    let r = regs(&["out"]);
    let sst = Sst::new(
        1,
        0,
        ['a'],
        ['a'],
        r.clone(),
        [(0, 'a', sub(&r, &[]), 0)],
        [],
    )
    .unwrap();
    let s = SimpleSst::new(sst, 0).unwrap();
    assert!(matches!(
        run_simple_sst(&s, &lasso("", "a"), 100).get(0),
        Err(SstError::BudgetExceeded { .. })
    ));
}

#[test]
fn simple_sst_rejects_reads_of_out() {
    let r = regs(&["x", "out"]);
    let sst = Sst::new(
        1,
        0,
        ['a'],
        ['a'],
        r.clone(),
        [(0, 'a', sub(&r, &[("x", "out"), ("out", "x")]), 0)],
        [],
    )
    .unwrap();
    assert!(matches!(
        SimpleSst::new(sst, 1),
        Err(SstError::MalformedSimpleSst(_))
    ));
}

/// Collects the letters before `#` in `x`, then appends later letters to
/// `y`; the output is `x y`.
fn two_phase() -> Sst {
    let r = regs(&["x", "y"]);
    let t = vec![
        (0, 'a', sub(&r, &[("x", "x a")]), 0),
        (0, 'b', sub(&r, &[("x", "x b")]), 0),
        (0, '#', sub(&r, &[]), 1),
        (1, 'a', sub(&r, &[("y", "y a")]), 1),
        (1, 'b', sub(&r, &[("y", "y b"), ("x", "x")]), 1),
    ];
    Sst::new(
        2,
        0,
        ['a', 'b', '#'],
        ['a', 'b'],
        r,
        t,
        [(BTreeSet::from([1]), vec![0, 1])],
    )
    .unwrap()
}

#[test]
fn general_sst_output() {
    let s = two_phase();
    let mut out = run_sst(&s, &lasso("ab#", "ba"), DEFAULT_BUDGET).unwrap();
    assert_eq!(out.prefix_string(8).unwrap(), "abbababa");
    assert!(
        matches!(run_sst(&s, &lasso("", "ab"), 100), Err(SstError::NoOutputFunction(p)) if p == vec![0])
    );
    assert!(matches!(
        run_sst(&s, &pi_word(1), 100),
        Err(SstError::AdviceNotLasso)
    ));
}

#[test]
fn output_constraint_is_checked() {
    let r = regs(&["x", "y"]);
    let t = vec![(0, 'a', sub(&r, &[("x", "x a"), ("y", "y a")]), 0)];
    let f = [(BTreeSet::from([0]), vec![0, 1])];
    assert!(matches!(
        Sst::new(1, 0, ['a'], ['a'], r, t, f),
        Err(SstError::OutputConstraint(_))
    ));
}

#[test]
fn finite_limit_is_padded() {
    let s = two_phase();
    // nothing is appended on ## ... after the prefix
    let r = regs(&["x", "y"]);
    let mut t: Vec<_> = s
        .transitions()
        .map(|(p, a, u, q)| (p, a, u.clone(), q))
        .collect();
    t.push((1, '#', sub(&r, &[]), 1));
    let s = Sst::new(
        2,
        0,
        ['a', 'b', '#'],
        ['a', 'b'],
        r,
        t,
        [(BTreeSet::from([1]), vec![0, 1])],
    )
    .unwrap();
    let mut out = run_sst(&s, &lasso("ab#a", "#"), DEFAULT_BUDGET).unwrap();
    assert_eq!(out.prefix(6).unwrap(), vec!['a', 'b', 'a', PAD, PAD, PAD]);
}

#[test]
fn simplification_preserves_output() {
    let w = LassoWord::from_strs("ab#", "ba").unwrap();
    let simple = simplify_to_simple_sst(&two_phase(), &w).unwrap();
    // one line state per letter of the prefix
    assert_eq!(simple.sst().states() - two_phase().states(), 3);
    let input = InfiniteWord::from(w);
    let mut a = run_sst(&two_phase(), &input, DEFAULT_BUDGET).unwrap();
    let mut b = run_simple_sst(&simple, &input, DEFAULT_BUDGET);
    for i in 0..500 {
        assert_eq!(a.get(i).unwrap(), b.get(i).unwrap());
    }

    let m = mirror_sst(&['a', 'b']);
    let general = Sst {
        output_function: [(BTreeSet::from([0]), vec![1])].into(),
        ..m.sst().clone()
    };
    let w = LassoWord::from_strs("", "ab#baa#").unwrap();
    let simple = simplify_to_simple_sst(&general, &w).unwrap();
    let input = InfiniteWord::from(w);
    let mut a = run_simple_sst(&m, &input, DEFAULT_BUDGET);
    let mut b = run_simple_sst(&simple, &input, DEFAULT_BUDGET);
    assert_eq!(a.prefix(500).unwrap(), b.prefix(500).unwrap());
}

#[test]
fn simplification_of_a_finite_limit() {
    let r = regs(&["x"]);
    let t = vec![
        (0, 'a', sub(&r, &[("x", "x a")]), 0),
        (0, 'b', sub(&r, &[]), 1),
        (1, 'b', sub(&r, &[]), 1),
    ];
    let s = Sst::new(
        2,
        0,
        ['a', 'b'],
        ['a'],
        r,
        t,
        [(BTreeSet::from([1]), vec![0])],
    )
    .unwrap();
    let w = LassoWord::from_strs("aa", "b").unwrap();
    let simple = simplify_to_simple_sst(&s, &w).unwrap();
    let mut out = run_simple_sst(&simple, &InfiniteWord::from(w), DEFAULT_BUDGET);
    assert_eq!(out.prefix(4).unwrap(), vec!['a', 'a', PAD, PAD]);
}

fn corpus() -> Vec<(SimpleSst, Vec<InfiniteWord<char>>)> {
    vec![
        (
            mirror_sst(&['a', 'b']),
            vec![lasso("", "ab#baa#"), lasso("b#", "aab#")],
        ),
        (
            identity_sst(&['0', '1']),
            vec![lasso("", "01"), lasso("1101", "001")],
        ),
        (
            interleaver_sst(),
            vec![lasso("", "ab#"), lasso("ba#", "abab#")],
        ),
    ]
}

#[test]
fn compiled_machines_match_the_interpreter() {
    for (s, inputs) in corpus() {
        let t = compile_sst_to_2wftb(&s).unwrap();
        assert_eq!(t.states(), 2 * s.sst().registers().len() + 2);
        for input in inputs {
            let mut a = run_simple_sst(&s, &input, DEFAULT_BUDGET);
            let mut b = run_2wft_b(&t, &input, DEFAULT_BUDGET);
            for i in 0..500 {
                assert_eq!(a.get(i).unwrap(), b.get(i).unwrap(), "letter {i}");
            }
        }
    }
}

#[test]
fn compiled_machine_walks_back_to_recover_a_register() {
    let r = regs(&["x", "y", "out"]);
    let t = vec![
        (0, 'u', sub(&r, &[("y", "a")]), 0),
        (0, 'v', sub(&r, &[("x", "b y x"), ("y", "")]), 0),
        (0, 'w', sub(&r, &[("x", "b"), ("out", "out x a")]), 0),
    ];
    let s = SimpleSst::new(
        Sst::new(1, 0, ['u', 'v', 'w'], ['a', 'b'], r, t, []).unwrap(),
        2,
    )
    .unwrap();
    let input = lasso("uvw", "u");
    let t = compile_sst_to_2wftb(&s).unwrap();
    let mut out = run_2wft_b(&t, &input, DEFAULT_BUDGET).with_trace(20);
    assert_eq!(out.prefix_string(3).unwrap(), "baa");
    assert_eq!(
        run_simple_sst(&s, &input, DEFAULT_BUDGET)
            .prefix_string(3)
            .unwrap(),
        "baa"
    );
    let positions: Vec<usize> = out.trace().iter().map(|e| e.position).collect();
    assert_eq!(positions, vec![0, 1, 2, 3, 2, 1, 2, 1, 0, 1, 2, 3]);
}

#[test]
fn lookbehind_elimination_on_compiled_machines() {
    for (s, inputs) in corpus() {
        let t = compile_sst_to_2wftb(&s).unwrap();
        for input in inputs {
            let w = input.to_lasso().unwrap();
            let plain = eliminate_lookbehind_lasso(&t, &w, 10_000).unwrap();
            let mut a = run_2wft_b(&t, &input, DEFAULT_BUDGET);
            let mut b = run_2wft(&plain, &input, DEFAULT_BUDGET);
            for i in 0..500 {
                assert_eq!(a.get(i).unwrap(), b.get(i).unwrap(), "letter {i}");
            }
        }
    }
}

#[test]
fn lookbehind_elimination_of_an_ignored_oracle() {
    let gamma = crate::words::Alphabet::from_letters("ab").unwrap();
    let mirror = crate::transducers::mirror_blocks_2wft(&gamma);
    let oracle = mirror_sst(&['a', 'b']).sst().automaton();
    let t = LookbehindTransducer::ignoring(&mirror, oracle).unwrap();
    let w = LassoWord::from_strs("a#", "ab#").unwrap();
    let plain = eliminate_lookbehind_lasso(&t, &w, 10_000).unwrap();
    let input = InfiniteWord::from(w);
    let mut a = run_2wft(&mirror, &input, DEFAULT_BUDGET);
    let mut b = run_2wft(&plain, &input, DEFAULT_BUDGET);
    assert_eq!(a.prefix(500).unwrap(), b.prefix(500).unwrap());
}

#[test]
fn pinned_lookbehind_machine_is_rejected() {
    // the lookbehind is transient on the first letter only
    let oracle = Dfa::new(
        2,
        0,
        [],
        ['a', 'b'],
        [(0, 'a', 1), (0, 'b', 1), (1, 'a', 1), (1, 'b', 1)],
    )
    .unwrap();
    let t = LookbehindTransducer::ignoring(&endmarker_bouncer(&['a', 'b']), oracle).unwrap();
    let w = LassoWord::from_strs("b", "a").unwrap();
    match eliminate_lookbehind_lasso(&t, &w, 1000) {
        Err(SstError::Transducer(TransducerError::BudgetExceeded {
            report: Some(r), ..
        })) => {
            assert_eq!(r.period, vec!['b'])
        }
        other => panic!("expected a loop report, got {other:?}"),
    }
}

#[test]
fn lookbehind_lasso_is_minimal() {
    let oracle = mirror_sst(&['a', 'b']).sst().automaton();
    let (ell, p, table) =
        lookbehind_lasso(&oracle, &LassoWord::from_strs("ab", "#").unwrap()).unwrap();
    assert_eq!((ell, p, table), (0, 1, vec![0]));
}

/// A random copyless substitution over `n` registers.
fn random_copyless(rng: &mut impl Rng, n: usize, letters: &[char]) -> Substitution {
    let mut rhs = vec![Vec::new(); n];
    let mut regs: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.7)).collect();
    regs.shuffle(rng);
    for r in regs {
        let target = rng.gen_range(0..n);
        let at = rng.gen_range(0..=rhs[target].len());
        rhs[target].insert(at, Token::Reg(r));
    }
    for w in rhs.iter_mut() {
        for _ in 0..rng.gen_range(0..3) {
            let at = rng.gen_range(0..=w.len());
            w.insert(at, Token::Letter(*letters.choose(rng).unwrap()));
        }
    }
    Substitution::new(rhs).unwrap()
}

/// A random simple SST: `out` is register `n - 1`.
fn random_simple(rng: &mut impl Rng) -> SimpleSst {
    let n = rng.gen_range(1..=3) + 1;
    let out = n - 1;
    let states = rng.gen_range(1..=3);
    let mut t = Vec::new();
    for q in 0..states {
        for a in ['a', 'b'] {
            let mut s = random_copyless(rng, n, &['x', 'y']);
            // move every use of out to the head of its own update
            for x in 0..n {
                let w: Vec<Token> = s
                    .get(x)
                    .iter()
                    .copied()
                    .filter(|t| *t != Token::Reg(out))
                    .collect();
                s.set(x, w);
            }
            let mut w = vec![Token::Reg(out)];
            w.extend_from_slice(s.get(out));
            s.set(out, w);
            t.push((q, a, s, rng.gen_range(0..states)));
        }
    }
    let names = (0..n)
        .map(|i| {
            if i == out {
                "out".to_string()
            } else {
                format!("r{i}")
            }
        })
        .collect();
    SimpleSst::new(
        Sst::new(states, 0, ['a', 'b'], ['x', 'y'], names, t, []).unwrap(),
        out,
    )
    .unwrap()
}

#[test]
fn compiled_random_simple_ssts_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut letters = 0;
    for _ in 0..60 {
        let s = random_simple(&mut rng);
        let t = compile_sst_to_2wftb(&s).unwrap();
        let input = lasso(
            ["", "a", "ba"][rng.gen_range(0..3)],
            ["ab", "abb", "b"][rng.gen_range(0..3)],
        );
        let mut a = run_simple_sst(&s, &input, 200);
        let mut b = run_2wft_b(&t, &input, DEFAULT_BUDGET);
        for i in 0..150 {
            let Ok(x) = a.get(i) else { break };
            assert_eq!(Ok(x), b.get(i), "letter {i}");
            letters += 1;
        }
    }
    assert!(letters > 1000);
}

/// Value of register `x` after `k` updates, by direct expansion.
fn expand(chain: &[Substitution], start: &[Vec<char>], x: usize, k: usize) -> Vec<char> {
    if k == 0 {
        return start[x].clone();
    }
    chain[k - 1]
        .get(x)
        .iter()
        .flat_map(|t| match *t {
            Token::Letter(c) => vec![c],
            Token::Reg(r) => expand(chain, start, r, k - 1),
        })
        .collect()
}

proptest! {
    #[test]
    fn composition_is_associative(seed in any::<u64>(), len in 1usize..=6, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain: Vec<Substitution> = (0..len).map(|_| random_copyless(&mut rng, n, &['a', 'b'])).collect();
        let start: Vec<Vec<char>> = (0..n).map(|i| vec!['c'; i]).collect();
        let mut stepwise = start.clone();
        for l in &chain {
            stepwise = l.ground(&stepwise);
        }
        let left = chain[1..].iter().fold(chain[0].clone(), |acc, l| acc.compose(l));
        let right = chain[..len - 1].iter().rev().fold(chain[len - 1].clone(), |acc, l| l.compose(&acc));
        let expected: Vec<Vec<char>> = (0..n).map(|x| expand(&chain, &start, x, len)).collect();
        prop_assert_eq!(&stepwise, &expected);
        prop_assert_eq!(left.ground(&start), expected.clone());
        prop_assert_eq!(right.ground(&start), expected);
    }

    #[test]
    fn composition_stays_copyless(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_copyless(&mut rng, n, &['a']);
        let b = random_copyless(&mut rng, n, &['a']);
        prop_assert!(validate_copyless(&a.compose(&b)).is_ok());
    }

    #[test]
    fn streamed_output_is_append_only(seed in any::<u64>(), b in 1usize..40, extra in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_simple(&mut rng);
        let input = lasso("a", "abb");
        let mut short = run_simple_sst(&s, &input, b);
        let mut long = run_simple_sst(&s, &input, b + extra);
        let x = (0..30).map_while(|i| short.get(i).ok()).collect::<Vec<_>>();
        let y = (0..30).map_while(|i| long.get(i).ok()).collect::<Vec<_>>();
        prop_assert!(y.starts_with(&x));
    }
}
