//! Named check suites, one per acceptance criterion of the workbench.
//!
//! Each suite runs a fixed, seeded battery and reports one item per
//! comparison. The CLI's `check` command and the acceptance tests both run
//! these.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{mealy_subword_bound, prefix_equiv, Equivalence, LetterSource};
use crate::ltl::{
    check_finite_prefix_theorem, eliminate_g_subformulas, eval_lasso, finite_prefix_eval, nnf,
    random_formula,
};
use crate::mealy::{
    delay_mealy, extract_mealy_from_pref_dfa, mealy_graph_dfa, run_mealy, MealyMachine,
};
use crate::sst::{
    compile_sst_to_2wftb, eliminate_lookbehind_lasso, identity_sst, interleaver_sst, mirror_sst,
    run_simple_sst, SimpleSst,
};
use crate::transducers::samples::{
    back_visit, bounce, copier, endmarker_bouncer, endmarker_touch, stutter,
};
use crate::transducers::{
    analyze_on_constant, compose_1wft, is_direction_normalized, mirror_blocks_2wft, mu_transducers,
    normalize_directions_on_pi, one_way_simulation_on_pi, pi_k_expander_1wft, remove_endmarker,
    run_1wft, run_2wft, run_2wft_b, TransducerError, TwoWayTransducer, DEFAULT_BUDGET,
};
use crate::words::{
    block_mirror, duplicate, pi_word, shift, Alphabet, InfiniteWord, LassoWord, PAD,
};
use crate::LtlFormula;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub id: usize,
    pub name: &'static str,
    pub title: &'static str,
    pub items: Vec<CheckItem>,
    pub millis: u128,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.items.is_empty() && self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.passed)
    }
}

type SuiteFn = fn() -> Vec<CheckItem>;

/// `(name, title, body)` for every suite, in order.
pub const SUITES: &[(&str, &str, SuiteFn)] = &[
    (
        "mirror",
        "2wft, simple sst and block mirror agree",
        mirror_triple,
    ),
    (
        "compile",
        "compiled 2wftb matches the sst interpreter",
        compiled_sst,
    ),
    (
        "lookbehind",
        "lookbehind elimination preserves output",
        lookbehind,
    ),
    (
        "extraction",
        "mealy extraction from prefix automata",
        extraction,
    ),
    (
        "pi",
        "expanders, normalization and one-way simulation on pi",
        pi_constructions,
    ),
    (
        "constant",
        "analyzer for constant inputs",
        constant_analyzer,
    ),
    (
        "finite-prefix",
        "finite prefix theorem for LTL",
        finite_prefix,
    ),
    (
        "complexity",
        "subword complexity bound for mealy images",
        complexity_bound,
    ),
    (
        "morphisms",
        "duplication round trip and delay chain",
        morphisms,
    ),
    ("endmarker", "endmarker removal", endmarker),
];

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|s| s.0)
}

/// Runs a suite by name or by its 1-based number.
pub fn run_suite(name: &str) -> Option<SuiteReport> {
    let index = SUITES.iter().position(|s| s.0 == name).or_else(|| {
        name.parse::<usize>()
            .ok()
            .filter(|&i| (1..=SUITES.len()).contains(&i))
            .map(|i| i - 1)
    })?;
    Some(run_index(index))
}

pub fn run_all() -> Vec<SuiteReport> {
    (0..SUITES.len()).map(run_index).collect()
}

fn run_index(i: usize) -> SuiteReport {
    let (name, title, body) = SUITES[i];
    let start = Instant::now();
    let items = body();
    SuiteReport {
        id: i + 1,
        name,
        title,
        items,
        millis: start.elapsed().as_millis(),
    }
}

fn item(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckItem {
    CheckItem {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn compare(
    name: impl Into<String>,
    a: &mut dyn LetterSource,
    b: &mut dyn LetterSource,
    n: usize,
) -> CheckItem {
    let verdict = prefix_equiv(a, b, n);
    let detail = match &verdict {
        Equivalence::Equal { n } => format!("equal on {n} letters"),
        Equivalence::Diverges { index, a, b } => format!("diverges at {index}: {a:?} vs {b:?}"),
        Equivalence::Inconclusive { index, status } => format!("stopped at {index}: {status}"),
    };
    item(name, verdict.is_equal(), detail)
}

fn failed(name: impl Into<String>, e: impl std::fmt::Display) -> CheckItem {
    item(name, false, e.to_string())
}

fn lasso(u: &str, v: &str) -> InfiniteWord<char> {
    InfiniteWord::from_lasso_str(u, v).expect("nonempty period")
}

fn random_lasso<R: Rng>(
    rng: &mut R,
    letters: &[char],
    max_prefix: usize,
    max_period: usize,
) -> LassoWord<char> {
    let mut pick = |n: usize| {
        (0..n)
            .map(|_| letters[rng.gen_range(0..letters.len())])
            .collect::<Vec<_>>()
    };
    let u = pick(max_prefix);
    let v = pick(max_period.max(1));
    LassoWord::new(u, v).expect("nonempty period")
}

fn random_total_mealy<R: Rng>(rng: &mut R) -> MealyMachine {
    let inputs = &['a', 'b', 'c'][..rng.gen_range(1..=3)];
    let outputs = &['x', 'y', 'z'][..rng.gen_range(1..=3)];
    let states = rng.gen_range(1..=5);
    MealyMachine::random(rng, states, inputs, outputs)
}

fn mirror_triple() -> Vec<CheckItem> {
    let start = Instant::now();
    let input = lasso("", "ab#baa#");
    let gamma = Alphabet::from_letters("ab").expect("alphabet");
    let t = mirror_blocks_2wft(&gamma);
    let s = mirror_sst(&['a', 'b']);
    let mut items = vec![
        compare(
            "2wft vs block_mirror",
            &mut run_2wft(&t, &input, DEFAULT_BUDGET),
            &mut block_mirror(&input),
            1000,
        ),
        compare(
            "simple sst vs block_mirror",
            &mut run_simple_sst(&s, &input, DEFAULT_BUDGET),
            &mut block_mirror(&input),
            1000,
        ),
        compare(
            "2wft vs simple sst",
            &mut run_2wft(&t, &input, DEFAULT_BUDGET),
            &mut run_simple_sst(&s, &input, DEFAULT_BUDGET),
            1000,
        ),
    ];
    let elapsed = start.elapsed();
    items.push(item(
        "runtime under 1 s",
        elapsed.as_secs_f64() < 1.0,
        format!("{elapsed:?}"),
    ));
    items
}

fn sst_corpus() -> Vec<(&'static str, SimpleSst, Vec<InfiniteWord<char>>)> {
    vec![
        (
            "mirror",
            mirror_sst(&['a', 'b']),
            vec![lasso("", "ab#baa#"), lasso("b#", "aab#")],
        ),
        (
            "identity",
            identity_sst(&['0', '1']),
            vec![lasso("", "01"), lasso("1101", "001")],
        ),
        (
            "interleaver",
            interleaver_sst(),
            vec![lasso("", "ab#"), lasso("ba#", "abab#")],
        ),
    ]
}

fn compiled_sst() -> Vec<CheckItem> {
    let mut items = Vec::new();
    for (name, s, inputs) in sst_corpus() {
        let t = match compile_sst_to_2wftb(&s) {
            Ok(t) => t,
            Err(e) => {
                items.push(failed(format!("{name}: compile"), e));
                continue;
            }
        };
        for input in inputs {
            items.push(compare(
                format!("{name} on {}", input.describe()),
                &mut run_simple_sst(&s, &input, DEFAULT_BUDGET),
                &mut run_2wft_b(&t, &input, DEFAULT_BUDGET),
                1000,
            ));
        }
    }
    items
}

fn lookbehind() -> Vec<CheckItem> {
    let mut items = Vec::new();
    for (name, s, inputs) in sst_corpus() {
        let t = match compile_sst_to_2wftb(&s) {
            Ok(t) => t,
            Err(e) => {
                items.push(failed(format!("{name}: compile"), e));
                continue;
            }
        };
        for input in inputs {
            let label = format!("{name} on {}", input.describe());
            let w = input.to_lasso().expect("lasso input");
            match eliminate_lookbehind_lasso(&t, &w, 10_000) {
                Ok(plain) => items.push(compare(
                    label,
                    &mut run_2wft_b(&t, &input, DEFAULT_BUDGET),
                    &mut run_2wft(&plain, &input, DEFAULT_BUDGET),
                    1000,
                )),
                Err(e) => items.push(failed(label, e)),
            }
        }
    }
    items
}

fn extraction() -> Vec<CheckItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    (0..20)
        .map(|i| {
            let m = random_total_mealy(&mut rng);
            let inputs: Vec<char> = m.input_alphabet().iter().copied().collect();
            let beta = InfiniteWord::from(random_lasso(&mut rng, &inputs, 3, 4));
            let label = format!("machine {i} ({} states) on {}", m.states(), beta.describe());
            match extract_mealy_from_pref_dfa(&mealy_graph_dfa(&m), &beta, 500) {
                Ok(e) => compare(
                    label,
                    &mut run_mealy(&e, &beta),
                    &mut run_mealy(&m, &beta),
                    500,
                ),
                Err(e) => failed(label, e),
            }
        })
        .collect()
}

fn pi_constructions() -> Vec<CheckItem> {
    let pi = pi_word(1);
    let mut items = Vec::new();
    for k in [2, 3] {
        items.push(compare(
            format!("expander {k} on pi"),
            &mut run_1wft(&pi_k_expander_1wft(k, true), &pi, DEFAULT_BUDGET),
            &mut pi_word(k),
            500,
        ));
    }
    let machines: [(&str, TwoWayTransducer); 2] = [("bounce", bounce()), ("stutter", stutter())];
    for (name, t) in machines {
        match normalize_directions_on_pi(&t, 300) {
            Ok(n) => {
                items.push(item(
                    format!("{name}: normalized partition"),
                    is_direction_normalized(&n),
                    format!("{} states, was {}", n.states(), t.states()),
                ));
                items.push(compare(
                    format!("{name}: normalized output"),
                    &mut run_2wft(&t, &pi, DEFAULT_BUDGET),
                    &mut run_2wft(&n, &pi, DEFAULT_BUDGET),
                    300,
                ));
            }
            Err(e) => items.push(failed(format!("{name}: normalize"), e)),
        }
    }
    let machines: [(&str, TwoWayTransducer); 2] =
        [("copier", copier()), ("back_visit", back_visit())];
    for (name, t) in machines {
        match one_way_simulation_on_pi(&t, 3, 300) {
            Ok(sim) => items.push(compare(
                format!(
                    "{name}: one-way simulation, c = {}, K = {}",
                    sim.window, sim.copies
                ),
                &mut run_2wft(&t, &pi, DEFAULT_BUDGET),
                &mut run_1wft(&sim.machine, &pi, DEFAULT_BUDGET),
                300,
            )),
            Err(e) => items.push(failed(format!("{name}: one-way simulation"), e)),
        }
    }
    items
}

fn constant_analyzer() -> Vec<CheckItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let pad = InfiniteWord::constant(PAD);
    (0..50)
        .map(|i| {
            let states = rng.gen_range(1..=4);
            let t = TwoWayTransducer::random(&mut rng, states, &[PAD], &['a', 'b'], 2);
            let label = format!("machine {i} ({states} states)");
            let mut sim = run_2wft(&t, &pad, 20_000);
            match analyze_on_constant(&t, PAD, 100_000) {
                Ok(l) => {
                    let mut word = InfiniteWord::from(l.clone());
                    let mut c = compare(label, &mut sim, &mut word, 2000);
                    c.detail = format!("{} with lasso {l}", c.detail);
                    c
                }
                Err(TransducerError::NonProductive { prefix }) => {
                    let seen = sim.available(prefix.len() + 1);
                    let ok = seen == prefix;
                    item(
                        label,
                        ok,
                        format!("non-productive after {} letters", prefix.len()),
                    )
                }
                Err(e) => failed(label, e),
            }
        })
        .collect()
}

const BATTERY: &[&str] = &[
    "a",
    "!a",
    "X a",
    "X X b",
    "a U b",
    "F a",
    "G a",
    "G F a",
    "F G b",
    "a U X b",
    "G (a | X b)",
    "F (a & X a)",
    "!(a U b)",
    "G (!a | F b)",
    "(a U b) | G a",
    "F (b & X (a U b))",
    "G F (a & X b)",
    "!G F a",
    "a & X (b U a)",
    "X F G a",
    "(G a) U b",
    "G (b | X G a)",
];

fn finite_prefix() -> Vec<CheckItem> {
    let words: Vec<LassoWord<char>> = [
        ("", "ab"),
        ("a", "b"),
        ("", "aab"),
        ("ba", "abb"),
        ("bb", "a"),
    ]
    .iter()
    .map(|(u, v)| LassoWord::from_strs(u, v).expect("lasso"))
    .collect();
    let mut items = Vec::new();
    for text in BATTERY {
        let f = LtlFormula::parse(text).expect("battery formula");
        let mut bad = Vec::new();
        for w in &words {
            match check_finite_prefix_theorem(&f, w, 50, None) {
                Ok(r) if r.all_equivalent() => {}
                Ok(r) => bad.push(format!(
                    "{w}: differs at m = {:?}",
                    r.verdicts
                        .iter()
                        .find(|v| v.holds != v.prefix_holds)
                        .map(|v| v.m)
                )),
                Err(e) => bad.push(format!("{w}: {e}")),
            }
        }
        let detail = if bad.is_empty() {
            format!("depth {}, 5 words", f.depth())
        } else {
            bad.join("; ")
        };
        items.push(item(
            format!("finite prefix: {text}"),
            bad.is_empty() && f.depth() <= 4,
            detail,
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut nnf_bad = Vec::new();
    for case in 0..200 {
        let f = random_formula(&mut rng, 4, &['a', 'b']);
        let w = random_lasso(&mut rng, &['a', 'b'], 3, 3);
        let g = nnf(&f);
        let agree = (0..w.size() + 2).all(|i| eval_lasso(&f, &w, i) == eval_lasso(&g, &w, i));
        if !g.is_nnf() || !agree {
            nnf_bad.push(format!("case {case}: {f} on {w}"));
        }
    }
    items.push(item(
        "nnf preserves semantics (200 cases)",
        nnf_bad.is_empty(),
        summarize(&nnf_bad),
    ));

    let mut mono_bad = Vec::new();
    for case in 0..200 {
        let f = random_formula(&mut rng, 4, &['a', 'b']);
        let w = random_lasso(&mut rng, &['a', 'b'], 3, 3);
        let g = match eliminate_g_subformulas(&nnf(&f), &w) {
            Ok(r) => r.formula,
            Err(e) => {
                mono_bad.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let letters = w.take(24);
        let truth: Result<Vec<bool>, _> = (0..=letters.len())
            .map(|n| finite_prefix_eval(&g, &letters[..n], 0))
            .collect();
        match truth {
            Ok(t) if t.windows(2).all(|p| !p[0] || p[1]) => {}
            Ok(_) => mono_bad.push(format!("case {case}: {g} on {w}")),
            Err(e) => mono_bad.push(format!("case {case}: {e}")),
        }
    }
    items.push(item(
        "finite semantics is monotone (200 cases)",
        mono_bad.is_empty(),
        summarize(&mono_bad),
    ));
    items
}

fn summarize(bad: &[String]) -> String {
    match bad.first() {
        None => "all cases pass".to_string(),
        Some(first) => format!("{} failures, first {first}", bad.len()),
    }
}

fn complexity_bound() -> Vec<CheckItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    (0..10)
        .map(|i| {
            let m = random_total_mealy(&mut rng);
            let inputs: Vec<char> = m.input_alphabet().iter().copied().collect();
            let beta = random_lasso(&mut rng, &inputs, 4, 6);
            let label = format!("machine {i} ({} states) on {beta}", m.states());
            match mealy_subword_bound(&m, &beta, 8) {
                Ok(r) => {
                    let exact = r.rows.iter().all(|row| row.alpha_exact && row.beta_exact);
                    let worst = r
                        .rows
                        .iter()
                        .map(|row| format!("{}≤{}", row.p_alpha, row.bound))
                        .collect::<Vec<_>>();
                    item(label, r.holds() && exact, worst.join(" "))
                }
                Err(e) => failed(label, e),
            }
        })
        .collect()
}

fn morphisms() -> Vec<CheckItem> {
    let mut items = Vec::new();
    let mu_words: [(InfiniteWord<char>, &str); 2] = [(pi_word(1), "01"), (lasso("a", "abb"), "ab")];
    for (w, letters) in &mu_words {
        let gamma = Alphabet::from_letters(letters).expect("alphabet");
        for n in [2, 3] {
            let (forward, backward) = mu_transducers(n, &gamma);
            let label = format!("backward({n}) after forward({n}) on {}", w.describe());
            match compose_1wft(&backward, &forward) {
                Ok(round) => items.push(compare(
                    label,
                    &mut run_1wft(&round, w, DEFAULT_BUDGET),
                    &mut w.clone(),
                    1000,
                )),
                Err(e) => items.push(failed(label, e)),
            }
        }
    }
    let corpus: [(InfiniteWord<char>, &str); 5] = [
        (pi_word(1), "01"),
        (lasso("", "ab"), "ab"),
        (lasso("ba", "abb"), "ab"),
        (block_mirror(&lasso("", "ab#baa#")), "ab#"),
        (duplicate(&pi_word(1), 2), "01"),
    ];
    for (w, letters) in &corpus {
        let gamma = Alphabet::from_letters(letters).expect("alphabet");
        let first = w.letter_at(0);
        let d = delay_mealy(first, &gamma);
        items.push(compare(
            format!("delay({first}) on shift({}, 1)", w.describe()),
            &mut run_mealy(&d, &shift(w, 1)),
            &mut w.clone(),
            1000,
        ));
    }
    items
}

fn endmarker() -> Vec<CheckItem> {
    let mut items = Vec::new();
    let gamma = Alphabet::from_letters("ab").expect("alphabet");
    let cases = [
        ("mirror", mirror_blocks_2wft(&gamma), lasso("", "ab#baa#")),
        (
            "endmarker_touch",
            endmarker_touch(&['a', 'b']),
            lasso("b", "ab"),
        ),
    ];
    for (name, t, input) in cases {
        match remove_endmarker(&t, &input, 10_000) {
            Ok(bare) => {
                let mut c = compare(
                    format!("{name} without endmarker"),
                    &mut run_2wft(&t, &input, DEFAULT_BUDGET),
                    &mut run_2wft(&bare, &input, DEFAULT_BUDGET),
                    500,
                );
                c.passed &= !bare.has_endmarker();
                items.push(c);
            }
            Err(e) => items.push(failed(format!("{name} without endmarker"), e)),
        }
    }
    let bouncer = endmarker_bouncer(&['a']);
    let verdict = match remove_endmarker(&bouncer, &InfiniteWord::constant('a'), 1000) {
        Err(TransducerError::BudgetExceeded {
            report: Some(r), ..
        }) => item(
            "bouncer rejected",
            true,
            format!("loop from step {} with period {:?}", r.first_step, r.period),
        ),
        Err(e) => item(
            "bouncer rejected",
            false,
            format!("rejected without a loop report: {e}"),
        ),
        Ok(_) => item("bouncer rejected", false, "accepted"),
    };
    items.push(verdict);
    items
}
