//! Deterministic letter-to-letter transducers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use thiserror::Error;

use crate::advice::Dfa;
use crate::words::{Alphabet, InfiniteWord, LassoWord, WordError, WordKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MealyError {
    #[error("letter {0:?} is not in the machine alphabet")]
    AlphabetMismatch(char),
    #[error("no transition at input position {position}")]
    UndefinedTransition { position: usize },
    #[error("extraction failed at position {0}")]
    ExtractionFailed(usize),
    #[error("state {0} out of range")]
    InvalidState(usize),
    #[error("two transitions from state {0} on {1:?}")]
    NotDeterministic(usize, char),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A Mealy machine with states `0..states`; `δ` and `θ` share one partial
/// map `(state, input) ↦ (output, next)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MealyMachine {
    states: usize,
    initial: usize,
    input_alphabet: BTreeSet<char>,
    output_alphabet: BTreeSet<char>,
    transitions: BTreeMap<(usize, char), (char, usize)>,
}

impl MealyMachine {
    /// Transitions are `(from, input, output, to)`.
    pub fn new(
        states: usize,
        initial: usize,
        input_alphabet: impl IntoIterator<Item = char>,
        output_alphabet: impl IntoIterator<Item = char>,
        transitions: impl IntoIterator<Item = (usize, char, char, usize)>,
    ) -> Result<Self, MealyError> {
        let input_alphabet: BTreeSet<char> = input_alphabet.into_iter().collect();
        let output_alphabet: BTreeSet<char> = output_alphabet.into_iter().collect();
        if initial >= states {
            return Err(MealyError::InvalidState(initial));
        }
        let mut map = BTreeMap::new();
        for (p, a, b, q) in transitions {
            if p >= states || q >= states {
                return Err(MealyError::InvalidState(p.max(q)));
            }
            if !input_alphabet.contains(&a) {
                return Err(MealyError::AlphabetMismatch(a));
            }
            if !output_alphabet.contains(&b) {
                return Err(MealyError::AlphabetMismatch(b));
            }
            if map.insert((p, a), (b, q)).is_some() {
                return Err(MealyError::NotDeterministic(p, a));
            }
        }
        Ok(Self {
            states,
            initial,
            input_alphabet,
            output_alphabet,
            transitions: map,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn input_alphabet(&self) -> &BTreeSet<char> {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &BTreeSet<char> {
        &self.output_alphabet
    }

    /// `(from, input, output, to)` in a stable order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, char, char, usize)> + '_ {
        self.transitions
            .iter()
            .map(|(&(p, a), &(b, q))| (p, a, b, q))
    }

    pub fn step(&self, q: usize, a: char) -> Option<(char, usize)> {
        self.transitions.get(&(q, a)).copied()
    }

    pub fn is_total(&self) -> bool {
        self.transitions.len() == self.states * self.input_alphabet.len()
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        let t = alphabet.symbols().iter().map(|&a| (0, a, a, 0));
        Self::new(
            1,
            0,
            alphabet.symbols().to_vec(),
            alphabet.symbols().to_vec(),
            t.collect::<Vec<_>>(),
        )
        .expect("well-formed")
    }

    /// One-state machine applying `map` letterwise.
    pub fn relabel(map: &[(char, char)]) -> Self {
        let t: Vec<_> = map.iter().map(|&(a, b)| (0, a, b, 0)).collect();
        Self::new(1, 0, map.iter().map(|p| p.0), map.iter().map(|p| p.1), t).expect("well-formed")
    }

    /// A random total machine.
    pub fn random<R: Rng>(rng: &mut R, states: usize, input: &[char], output: &[char]) -> Self {
        let t: Vec<_> = (0..states)
            .flat_map(|p| input.iter().map(move |&a| (p, a)))
            .map(|(p, a)| {
                (
                    p,
                    a,
                    output[rng.gen_range(0..output.len())],
                    rng.gen_range(0..states),
                )
            })
            .collect();
        Self::new(states, 0, input.iter().copied(), output.iter().copied(), t).expect("well-formed")
    }
}

/// The output of `m` on `input`, computed on demand. When the input is a
/// lasso on which `m` is defined everywhere the result carries its lasso.
pub fn run_mealy(m: &MealyMachine, input: &InfiniteWord<char>) -> InfiniteWord<char> {
    if let Some(lasso) = input.to_lasso() {
        if let Ok(out) = run_mealy_lasso(m, &lasso) {
            let word = out.clone();
            return InfiniteWord::from_fallible_fn(
                WordKind::Generator,
                "mealy",
                Some(out),
                move |n| Ok(*word.letter(n)),
            );
        }
    }
    let machine = m.clone();
    let input = input.clone();
    let mut state = Some(machine.initial);
    let mut position = 0;
    InfiniteWord::from_stream(
        "mealy",
        std::iter::from_fn(move || {
            let q = state?;
            let a = match input.get(position) {
                Ok(a) => a,
                Err(e) => {
                    state = None;
                    return Some(Err(e));
                }
            };
            match machine.step(q, a) {
                Some((b, next)) => {
                    state = Some(next);
                    position += 1;
                    Some(Ok(b))
                }
                None => {
                    state = None;
                    Some(Err(WordError::UndefinedTransition { position }))
                }
            }
        }),
    )
}

/// The output of `m` on a lasso input, as a lasso.
pub fn run_mealy_lasso(
    m: &MealyMachine,
    input: &LassoWord<char>,
) -> Result<LassoWord<char>, MealyError> {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out = Vec::new();
    let mut q = m.initial;
    for step in 0.. {
        let pos = input.fold_position(step);
        if let Some(&first) = seen.get(&(q, pos)) {
            let period = out.split_off(first);
            return Ok(LassoWord::new(out, period)?);
        }
        seen.insert((q, pos), step);
        let (b, next) = m
            .step(q, *input.letter(pos))
            .ok_or(MealyError::UndefinedTransition { position: step })?;
        out.push(b);
        q = next;
    }
    unreachable!()
}

/// A machine over `gamma` that outputs `first` and then its input delayed
/// by one letter, so that it maps `α[1:]` back to `α` when `first = α[0]`.
pub fn delay_mealy(first: char, gamma: &Alphabet) -> MealyMachine {
    let letters = gamma.symbols();
    let state_of = |b: char| {
        1 + letters
            .iter()
            .position(|&c| c == b)
            .expect("letter of gamma")
    };
    let mut t = Vec::new();
    for &b in letters {
        t.push((0, b, first, state_of(b)));
        for &c in letters {
            t.push((state_of(c), b, c, state_of(b)));
        }
    }
    let outputs = letters.iter().copied().chain([first]);
    MealyMachine::new(letters.len() + 1, 0, letters.to_vec(), outputs, t).expect("well-formed")
}

/// `outer ∘ inner`: the machine feeding `inner`'s output into `outer`.
pub fn compose_mealy(
    outer: &MealyMachine,
    inner: &MealyMachine,
) -> Result<MealyMachine, MealyError> {
    if let Some(&c) = inner
        .output_alphabet
        .iter()
        .find(|c| !outer.input_alphabet.contains(c))
    {
        return Err(MealyError::AlphabetMismatch(c));
    }
    let mut index = HashMap::from([((inner.initial, outer.initial), 0)]);
    let mut order = vec![(inner.initial, outer.initial)];
    let mut t = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let (p, q) = order[i];
        for &a in &inner.input_alphabet {
            let Some((b, p2)) = inner.step(p, a) else {
                continue;
            };
            let Some((c, q2)) = outer.step(q, b) else {
                continue;
            };
            let next = index.len();
            let j = *index.entry((p2, q2)).or_insert_with(|| {
                order.push((p2, q2));
                next
            });
            t.push((i, a, c, j));
        }
        i += 1;
    }
    MealyMachine::new(
        order.len(),
        0,
        inner.input_alphabet.clone(),
        outer.output_alphabet.clone(),
        t,
    )
}

/// The automaton over `Γ × Δ` reading `(θ(q, b), b)` along the runs of
/// `m`, all states accepting. With advice `β` it recognizes the prefixes
/// of `m(β)`.
pub fn mealy_graph_dfa(m: &MealyMachine) -> Dfa<Vec<char>> {
    let alphabet: Vec<Vec<char>> = m
        .output_alphabet
        .iter()
        .flat_map(|&a| m.input_alphabet.iter().map(move |&b| vec![a, b]))
        .collect();
    let t: Vec<_> = m
        .transitions()
        .map(|(p, b, a, q)| (p, vec![a, b], q))
        .collect();
    Dfa::new(m.states, m.initial, 0..m.states, alphabet, t).expect("well-formed")
}

/// Reads a Mealy machine off an automaton over `Γ × Δ` that, with advice
/// `β` over `Δ`, recognizes the prefix set of some word `α`.
///
/// Keeps the accepting states reachable through accepting states that
/// still have an accepting continuation, deletes every pair of competing
/// transitions `q → (a, b)`, `q → (a′, b)` with `a ≠ a′`, and reads the rest
/// as `δ(q, b) = q′`, `θ(q, b) = a`. The result is checked over `probe`
/// letters against `α` as read off the automaton.
pub fn extract_mealy_from_pref_dfa(
    a: &Dfa<Vec<char>>,
    advice: &InfiniteWord<char>,
    probe: usize,
) -> Result<MealyMachine, MealyError> {
    let mut keep: BTreeSet<usize> = BTreeSet::new();
    if a.is_accepting(a.initial()) {
        keep.insert(a.initial());
        let mut stack = vec![a.initial()];
        while let Some(p) = stack.pop() {
            for (from, _, to) in a.transitions() {
                if from == p && a.is_accepting(to) && keep.insert(to) {
                    stack.push(to);
                }
            }
        }
    }
    loop {
        let dead: Vec<usize> = keep
            .iter()
            .copied()
            .filter(|&p| !a.transitions().any(|(f, _, t)| f == p && keep.contains(&t)))
            .collect();
        if dead.is_empty() {
            break;
        }
        for p in dead {
            keep.remove(&p);
        }
    }

    let mut by_letter: BTreeMap<(usize, char), Vec<(char, usize)>> = BTreeMap::new();
    for (p, l, q) in a.transitions() {
        if keep.contains(&p) && keep.contains(&q) {
            by_letter.entry((p, l[1])).or_default().push((l[0], q));
        }
    }
    let inputs: BTreeSet<char> = a.alphabet().iter().map(|l| l[1]).collect();
    let outputs: BTreeSet<char> = a.alphabet().iter().map(|l| l[0]).collect();
    let transitions: Vec<_> = by_letter
        .into_iter()
        .filter(|(_, v)| v.iter().all(|(c, _)| *c == v[0].0))
        .map(|((p, b), v)| (p, b, v[0].0, v[0].1))
        .collect();
    let machine = MealyMachine::new(
        a.states(),
        a.initial(),
        inputs,
        outputs.iter().copied(),
        transitions,
    )?;

    let mut q = machine.initial;
    let mut s = a.initial();
    for i in 0..probe {
        let b = advice.get(i)?;
        let (out, next) = machine.step(q, b).ok_or(MealyError::ExtractionFailed(i))?;
        let mut candidates = outputs.iter().filter_map(|&c| {
            a.step(s, &vec![c, b])
                .filter(|&t| a.is_accepting(t))
                .map(|t| (c, t))
        });
        let (Some((expected, s2)), None) = (candidates.next(), candidates.next()) else {
            return Err(MealyError::ExtractionFailed(i));
        };
        if expected != out {
            return Err(MealyError::ExtractionFailed(i));
        }
        q = next;
        s = s2;
    }
    Ok(machine)
}
