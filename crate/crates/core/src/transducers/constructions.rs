use std::collections::{BTreeSet, HashMap};

use super::{Action, Move, OneWayTransducer, TapeSymbol, TransducerError, TwoWayTransducer};
use crate::words::{Alphabet, LassoWord, SEPARATOR};

/// `outer ∘ inner`: on each input letter `inner` emits a string that
/// `outer` consumes within the same macro-step.
pub fn compose_1wft(
    outer: &OneWayTransducer,
    inner: &OneWayTransducer,
) -> Result<OneWayTransducer, TransducerError> {
    if let Some(&c) = inner
        .output_alphabet()
        .iter()
        .find(|c| !outer.input_alphabet().contains(c))
    {
        return Err(TransducerError::AlphabetMismatch(c));
    }
    let start = (inner.initial(), outer.initial());
    let mut index = HashMap::from([(start, 0)]);
    let mut order = vec![start];
    let mut t = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let (p, q) = order[i];
        'letters: for &a in inner.input_alphabet() {
            let Some((w, p2)) = inner.step(p, a) else {
                continue;
            };
            let mut q2 = q;
            let mut out = Vec::new();
            for &b in w {
                let Some((v, next)) = outer.step(q2, b) else {
                    continue 'letters;
                };
                out.extend_from_slice(v);
                q2 = next;
            }
            let fresh = index.len();
            let j = *index.entry((p2, q2)).or_insert_with(|| {
                order.push((p2, q2));
                fresh
            });
            t.push((i, a, out, j));
        }
        i += 1;
    }
    OneWayTransducer::new(
        order.len(),
        0,
        inner.input_alphabet().clone(),
        outer.output_alphabet().clone(),
        t,
    )
}

/// A machine that ignores its input and writes `u · v^ω`.
pub fn writer_2wft(word: &LassoWord<char>, input: &Alphabet) -> TwoWayTransducer {
    let letters: Vec<char> = word.prefix().iter().chain(word.period()).copied().collect();
    let n = letters.len();
    let u = word.prefix().len();
    let mut t = vec![(
        0,
        TapeSymbol::EndMarker,
        Action {
            output: vec![],
            direction: Move::Right,
            to: 1,
        },
    )];
    for (i, &c) in letters.iter().enumerate() {
        let to = if i + 1 < n { i + 2 } else { u + 1 };
        for &a in input.symbols() {
            t.push((
                i + 1,
                TapeSymbol::Letter(a),
                Action {
                    output: vec![c],
                    direction: Move::Right,
                    to,
                },
            ));
        }
    }
    let outputs: BTreeSet<char> = letters.iter().copied().collect();
    TwoWayTransducer::new(n + 1, 0, input.symbols().to_vec(), outputs, true, t)
        .expect("well-formed")
}

const SCAN: usize = 0;
const EMIT: usize = 1;
const SKIP: usize = 2;

/// Three-state machine reversing each `#`-terminated block of its input:
/// scan right to `#`, walk back emitting, then skip over the block.
///
/// # Panics
///
/// Panics if `gamma` contains `#`.
pub fn mirror_blocks_2wft(gamma: &Alphabet) -> TwoWayTransducer {
    assert!(
        !gamma.contains(SEPARATOR),
        "the separator cannot be a block letter"
    );
    let sep = TapeSymbol::Letter(SEPARATOR);
    let mut t = vec![
        (
            SCAN,
            TapeSymbol::EndMarker,
            Action::new("", Move::Right, SCAN),
        ),
        (SCAN, sep, Action::new("", Move::Left, EMIT)),
        (EMIT, sep, Action::new("#", Move::Right, SKIP)),
        (
            EMIT,
            TapeSymbol::EndMarker,
            Action::new("#", Move::Right, SKIP),
        ),
        (SKIP, sep, Action::new("", Move::Right, SCAN)),
    ];
    for &a in gamma.symbols() {
        let l = TapeSymbol::Letter(a);
        t.push((SCAN, l, Action::new("", Move::Right, SCAN)));
        t.push((
            EMIT,
            l,
            Action {
                output: vec![a],
                direction: Move::Left,
                to: EMIT,
            },
        ));
        t.push((SKIP, l, Action::new("", Move::Right, SKIP)));
    }
    let inputs = gamma.symbols().iter().copied().chain([SEPARATOR]);
    let outputs = inputs.clone();
    TwoWayTransducer::new(3, SCAN, inputs, outputs, true, t).expect("well-formed")
}

/// `(forward, backward)` for the duplication morphism `a ↦ a^n`: `forward`
/// applies it, `backward` inverts it on its image and is undefined when a
/// block of `n` letters is not constant.
pub fn mu_transducers(n: usize, gamma: &Alphabet) -> (OneWayTransducer, OneWayTransducer) {
    assert!(n >= 1, "duplication factor must be positive");
    let letters = gamma.symbols();
    let fwd: Vec<_> = letters.iter().map(|&a| (0, a, vec![a; n], 0)).collect();
    let forward =
        OneWayTransducer::new(1, 0, letters.to_vec(), letters.to_vec(), fwd).expect("well-formed");

    // state 0 starts a block; 1 + i(n-1) + (c-1) has seen c copies of letter i
    let counting = |i: usize, c: usize| 1 + i * (n - 1) + (c - 1);
    let mut bwd = Vec::new();
    for (i, &a) in letters.iter().enumerate() {
        if n == 1 {
            bwd.push((0, a, vec![a], 0));
            continue;
        }
        bwd.push((0, a, vec![], counting(i, 1)));
        for c in 1..n {
            if c + 1 == n {
                bwd.push((counting(i, c), a, vec![a], 0));
            } else {
                bwd.push((counting(i, c), a, vec![], counting(i, c + 1)));
            }
        }
    }
    let states = 1 + letters.len() * (n - 1);
    let backward = OneWayTransducer::new(states, 0, letters.to_vec(), letters.to_vec(), bwd)
        .expect("well-formed");
    (forward, backward)
}

/// Reads `π` and writes `π^k`. The block `0^{kn+j} 1` of `π` is written as
/// `0^n 1` by emitting one `0` per `k` zeros read. In strict mode the
/// machine is undefined when a block length is not `j` modulo `k`.
pub fn pi_k_expander_1wft(k: usize, strict: bool) -> OneWayTransducer {
    assert!(k >= 1, "pi_k_expander needs k >= 1");
    let state = |j: usize, phase: usize| j * k + phase;
    let mut t = Vec::new();
    for j in 0..k {
        for phase in 0..k {
            let q = state(j, phase);
            if phase + 1 == k {
                t.push((q, '0', vec!['0'], state(j, 0)));
            } else {
                t.push((q, '0', vec![], state(j, phase + 1)));
            }
            if !strict || phase == j {
                t.push((q, '1', vec!['1'], state((j + 1) % k, 0)));
            }
        }
    }
    OneWayTransducer::new(k * k, 0, ['0', '1'], ['0', '1'], t).expect("well-formed")
}
