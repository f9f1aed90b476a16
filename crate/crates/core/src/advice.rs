//! Finite and Büchi automata over (product) alphabets, and membership in
//! languages that are regular with advice.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::words::{convolve, pad_and_pair, InfiniteWord, LassoWord, Letter, Word, WordError, PAD};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdviceError {
    #[error("letter {0} is not in the automaton alphabet")]
    AlphabetMismatch(String),
    #[error("membership needs an ultimately periodic advice")]
    AdviceNotLasso,
    #[error("automaton alphabet is not a product alphabet")]
    NotProductAlphabet,
    #[error("automaton is not deterministic")]
    NotDeterministic,
    #[error("state {0} out of range")]
    InvalidState(usize),
    #[error("automaton has no initial state")]
    NoInitialState,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Deterministic finite automaton with states `0..states`. Missing
/// transitions reject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa<L: Letter = Vec<char>> {
    states: usize,
    initial: usize,
    accepting: BTreeSet<usize>,
    alphabet: BTreeSet<L>,
    transitions: BTreeMap<(usize, L), usize>,
}

impl<L: Letter> Dfa<L> {
    pub fn new(
        states: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        alphabet: impl IntoIterator<Item = L>,
        transitions: impl IntoIterator<Item = (usize, L, usize)>,
    ) -> Result<Self, AdviceError> {
        let alphabet: BTreeSet<L> = alphabet.into_iter().collect();
        let accepting: BTreeSet<usize> = accepting.into_iter().collect();
        if initial >= states {
            return Err(AdviceError::InvalidState(initial));
        }
        if let Some(&q) = accepting.iter().find(|&&q| q >= states) {
            return Err(AdviceError::InvalidState(q));
        }
        let mut map = BTreeMap::new();
        for (p, l, q) in transitions {
            if p >= states || q >= states {
                return Err(AdviceError::InvalidState(p.max(q)));
            }
            if !alphabet.contains(&l) {
                return Err(AdviceError::AlphabetMismatch(format!("{l:?}")));
            }
            if map.insert((p, l), q).is_some_and(|old| old != q) {
                return Err(AdviceError::NotDeterministic);
            }
        }
        Ok(Self {
            states,
            initial,
            accepting,
            alphabet,
            transitions: map,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting.contains(&q)
    }

    pub fn alphabet(&self) -> &BTreeSet<L> {
        &self.alphabet
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, &L, usize)> + '_ {
        self.transitions.iter().map(|((p, l), q)| (*p, l, *q))
    }

    pub fn step(&self, q: usize, l: &L) -> Option<usize> {
        self.transitions.get(&(q, l.clone())).copied()
    }

    pub fn run(&self, word: &[L]) -> Option<usize> {
        word.iter().try_fold(self.initial, |q, l| self.step(q, l))
    }

    pub fn accepts(&self, word: &[L]) -> bool {
        self.run(word).is_some_and(|q| self.is_accepting(q))
    }

    pub fn is_complete(&self) -> bool {
        self.transitions.len() == self.states * self.alphabet.len()
    }

    /// The same automaton with missing transitions sent to a fresh
    /// rejecting sink. Complete automata are returned unchanged.
    pub fn complete(&self) -> Self {
        if self.is_complete() {
            return self.clone();
        }
        let sink = self.states;
        let mut transitions = self.transitions.clone();
        for q in 0..=sink {
            for l in &self.alphabet {
                transitions.entry((q, l.clone())).or_insert(sink);
            }
        }
        Self {
            states: sink + 1,
            transitions,
            ..self.clone()
        }
    }
}

/// Nondeterministic Büchi automaton with states `0..states`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton<L: Letter = Vec<char>> {
    states: usize,
    initial: BTreeSet<usize>,
    accepting: BTreeSet<usize>,
    alphabet: BTreeSet<L>,
    transitions: BTreeMap<(usize, L), BTreeSet<usize>>,
}

impl<L: Letter> BuchiAutomaton<L> {
    pub fn new(
        states: usize,
        initial: impl IntoIterator<Item = usize>,
        accepting: impl IntoIterator<Item = usize>,
        alphabet: impl IntoIterator<Item = L>,
        transitions: impl IntoIterator<Item = (usize, L, usize)>,
    ) -> Result<Self, AdviceError> {
        let initial: BTreeSet<usize> = initial.into_iter().collect();
        let accepting: BTreeSet<usize> = accepting.into_iter().collect();
        let alphabet: BTreeSet<L> = alphabet.into_iter().collect();
        if initial.is_empty() {
            return Err(AdviceError::NoInitialState);
        }
        if let Some(&q) = initial.iter().chain(&accepting).find(|&&q| q >= states) {
            return Err(AdviceError::InvalidState(q));
        }
        let mut map: BTreeMap<(usize, L), BTreeSet<usize>> = BTreeMap::new();
        for (p, l, q) in transitions {
            if p >= states || q >= states {
                return Err(AdviceError::InvalidState(p.max(q)));
            }
            if !alphabet.contains(&l) {
                return Err(AdviceError::AlphabetMismatch(format!("{l:?}")));
            }
            map.entry((p, l)).or_default().insert(q);
        }
        Ok(Self {
            states,
            initial,
            accepting,
            alphabet,
            transitions: map,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> &BTreeSet<usize> {
        &self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn alphabet(&self) -> &BTreeSet<L> {
        &self.alphabet
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, &L, usize)> + '_ {
        self.transitions
            .iter()
            .flat_map(|((p, l), qs)| qs.iter().map(move |q| (*p, l, *q)))
    }

    pub fn successors(&self, q: usize, l: &L) -> impl Iterator<Item = usize> + '_ {
        self.transitions
            .get(&(q, l.clone()))
            .into_iter()
            .flatten()
            .copied()
    }
}

impl<L: Letter> From<&Dfa<L>> for BuchiAutomaton<L> {
    fn from(d: &Dfa<L>) -> Self {
        Self {
            states: d.states,
            initial: BTreeSet::from([d.initial]),
            accepting: d.accepting.clone(),
            alphabet: d.alphabet.clone(),
            transitions: d
                .transitions
                .iter()
                .map(|(k, q)| (k.clone(), BTreeSet::from([*q])))
                .collect(),
        }
    }
}

/// Whether some run of `b` on `w` visits an accepting state infinitely often.
///
/// Searches the product of states and lasso positions, where the last
/// position loops back to the start of the period, for a reachable
/// accepting node lying on a cycle.
pub fn buchi_lasso_accepts<L: Letter>(
    b: &BuchiAutomaton<L>,
    w: &LassoWord<L>,
) -> Result<bool, AdviceError> {
    if let Some(l) = w
        .prefix()
        .iter()
        .chain(w.period())
        .find(|l| !b.alphabet.contains(l))
    {
        return Err(AdviceError::AlphabetMismatch(format!("{l:?}")));
    }
    let n = w.size();
    let u = w.prefix().len();
    let succ_pos = |i: usize| if i + 1 < n { i + 1 } else { u };
    let next = |(q, i): (usize, usize)| {
        let j = succ_pos(i);
        b.successors(q, w.letter(i)).map(move |p| (p, j))
    };
    let mut seen: BTreeSet<(usize, usize)> = b.initial.iter().map(|&q| (q, 0)).collect();
    let mut queue: VecDeque<_> = seen.iter().copied().collect();
    while let Some(node) = queue.pop_front() {
        for m in next(node) {
            if seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    for &start in seen
        .iter()
        .filter(|(q, i)| *i >= u && b.accepting.contains(q))
    {
        let mut visited = BTreeSet::new();
        let mut queue: VecDeque<_> = next(start).collect();
        while let Some(node) = queue.pop_front() {
            if node == start {
                return Ok(true);
            }
            if visited.insert(node) {
                queue.extend(next(node));
            }
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdviceMode {
    Terminating,
    NonTerminating,
    Omega,
}

#[derive(Debug, Clone)]
pub enum Recognizer {
    Dfa(Dfa<Vec<char>>),
    Buchi(BuchiAutomaton<Vec<char>>),
}

/// A language `{w | w ⊗ α ∈ L′}` given by a recognizer for `L′` over
/// `Σ × Γ` and an advice `α` over `Γ`.
#[derive(Debug, Clone)]
pub struct AdviceLanguage {
    mode: AdviceMode,
    recognizer: Recognizer,
    advice: InfiniteWord<char>,
}

fn check_product<'a>(alphabet: impl IntoIterator<Item = &'a Vec<char>>) -> Result<(), AdviceError> {
    if alphabet.into_iter().all(|l| l.len() == 2) {
        Ok(())
    } else {
        Err(AdviceError::NotProductAlphabet)
    }
}

impl AdviceLanguage {
    /// Membership of `w` asks whether `w ⊗ α[:|w|]` is accepted.
    pub fn terminating(
        dfa: Dfa<Vec<char>>,
        advice: InfiniteWord<char>,
    ) -> Result<Self, AdviceError> {
        check_product(dfa.alphabet())?;
        Ok(Self {
            mode: AdviceMode::Terminating,
            recognizer: Recognizer::Dfa(dfa),
            advice,
        })
    }

    /// Membership of a finite `w` asks whether `(w □^ω) ⊗ α` is accepted.
    pub fn non_terminating(
        b: BuchiAutomaton<Vec<char>>,
        advice: InfiniteWord<char>,
    ) -> Result<Self, AdviceError> {
        check_product(b.alphabet())?;
        Ok(Self {
            mode: AdviceMode::NonTerminating,
            recognizer: Recognizer::Buchi(b),
            advice,
        })
    }

    /// Membership of an infinite `w` asks whether `w ⊗ α` is accepted.
    pub fn omega(
        b: BuchiAutomaton<Vec<char>>,
        advice: InfiniteWord<char>,
    ) -> Result<Self, AdviceError> {
        check_product(b.alphabet())?;
        Ok(Self {
            mode: AdviceMode::Omega,
            recognizer: Recognizer::Buchi(b),
            advice,
        })
    }

    pub fn mode(&self) -> AdviceMode {
        self.mode
    }

    pub fn recognizer(&self) -> &Recognizer {
        &self.recognizer
    }

    pub fn advice(&self) -> &InfiniteWord<char> {
        &self.advice
    }

    fn input_letters(&self) -> BTreeSet<char> {
        let alphabet = match &self.recognizer {
            Recognizer::Dfa(d) => d.alphabet(),
            Recognizer::Buchi(b) => b.alphabet(),
        };
        alphabet
            .iter()
            .map(|l| l[0])
            .filter(|&c| c != PAD)
            .collect()
    }

    fn check_input(&self, w: &[char]) -> Result<(), AdviceError> {
        let sigma = self.input_letters();
        match w.iter().find(|c| !sigma.contains(c)) {
            Some(c) => Err(AdviceError::AlphabetMismatch(c.to_string())),
            None => Ok(()),
        }
    }

    fn advice_lasso(&self) -> Result<LassoWord<char>, AdviceError> {
        self.advice.to_lasso().ok_or(AdviceError::AdviceNotLasso)
    }
}

/// `w ∈ L` for a terminating language.
///
/// # Panics
///
/// Panics when `lang` is not in terminating mode.
pub fn member_terminating(lang: &AdviceLanguage, w: &[char]) -> Result<bool, AdviceError> {
    let Recognizer::Dfa(dfa) = &lang.recognizer else {
        panic!("member_terminating needs a terminating language");
    };
    lang.check_input(w)?;
    let mut q = dfa.initial();
    for (i, &c) in w.iter().enumerate() {
        let Some(next) = dfa.step(q, &vec![c, lang.advice.get(i)?]) else {
            return Ok(false);
        };
        q = next;
    }
    Ok(dfa.is_accepting(q))
}

/// `w ∈ L` for a non-terminating language; needs a lasso advice.
///
/// # Panics
///
/// Panics when `lang` is not in non-terminating mode.
pub fn member_nonterminating(lang: &AdviceLanguage, w: &[char]) -> Result<bool, AdviceError> {
    assert_eq!(
        lang.mode,
        AdviceMode::NonTerminating,
        "member_nonterminating needs a non-terminating language"
    );
    let Recognizer::Buchi(b) = &lang.recognizer else {
        unreachable!()
    };
    lang.check_input(w)?;
    let advice = lang.advice_lasso()?;
    buchi_lasso_accepts(b, &pad_and_pair(w, &advice))
}

/// `w ∈ L` for an ω-language; both `w` and the advice must be lassos.
///
/// # Panics
///
/// Panics when `lang` is not in ω mode.
pub fn member_omega(lang: &AdviceLanguage, w: &LassoWord<char>) -> Result<bool, AdviceError> {
    assert_eq!(
        lang.mode,
        AdviceMode::Omega,
        "member_omega needs an omega language"
    );
    let Recognizer::Buchi(b) = &lang.recognizer else {
        unreachable!()
    };
    lang.advice_lasso()?;
    lang.check_input(
        &w.prefix()
            .iter()
            .chain(w.period())
            .copied()
            .collect::<Vec<_>>(),
    )?;
    let Word::Infinite(pair) = convolve(&[
        Word::Infinite(w.clone().into()),
        Word::Infinite(lang.advice.clone()),
    ]) else {
        unreachable!("convolution of infinite words is infinite")
    };
    buchi_lasso_accepts(b, &pair.to_lasso().ok_or(AdviceError::AdviceNotLasso)?)
}

/// The two-state automaton over `Σ × Σ` accepting exactly the words whose
/// tracks agree. With advice `α` it recognizes the prefixes of `α`.
pub fn pref_advice_automaton(sigma: &crate::words::Alphabet) -> Dfa<Vec<char>> {
    let letters: Vec<Vec<char>> = sigma
        .symbols()
        .iter()
        .flat_map(|&a| sigma.symbols().iter().map(move |&b| vec![a, b]))
        .collect();
    let transitions = letters
        .iter()
        .map(|l| (0, l.clone(), if l[0] == l[1] { 0 } else { 1 }));
    let sink = letters.iter().map(|l| (1, l.clone(), 1));
    Dfa::new(
        2,
        0,
        [0],
        letters.clone(),
        transitions.chain(sink).collect::<Vec<_>>(),
    )
    .expect("well-formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
    NotA,
}

/// Product (`And`, `Or`) or complement of the first operand (`NotA`).
pub fn dfa_boolean<L: Letter>(a: &Dfa<L>, b: &Dfa<L>, op: BoolOp) -> Result<Dfa<L>, AdviceError> {
    if op == BoolOp::NotA {
        let c = a.complete();
        let accepting = (0..c.states).filter(|q| !c.is_accepting(*q)).collect();
        return Ok(Dfa { accepting, ..c });
    }
    if a.alphabet != b.alphabet {
        let odd = a
            .alphabet
            .symmetric_difference(&b.alphabet)
            .next()
            .expect("alphabets differ");
        return Err(AdviceError::AlphabetMismatch(format!("{odd:?}")));
    }
    let (a, b) = (a.complete(), b.complete());
    let mut index = BTreeMap::from([((a.initial, b.initial), 0)]);
    let mut order = vec![(a.initial, b.initial)];
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let (p, q) = order[i];
        for l in &a.alphabet {
            let target = (
                a.step(p, l).expect("complete"),
                b.step(q, l).expect("complete"),
            );
            let next = index.len();
            let t = *index.entry(target).or_insert_with(|| {
                order.push(target);
                next
            });
            transitions.push((i, l.clone(), t));
        }
        i += 1;
    }
    let accepting = order.iter().enumerate().filter_map(|(i, &(p, q))| {
        let keep = match op {
            BoolOp::And => a.is_accepting(p) && b.is_accepting(q),
            _ => a.is_accepting(p) || b.is_accepting(q),
        };
        keep.then_some(i)
    });
    Dfa::new(
        order.len(),
        0,
        accepting.collect::<Vec<_>>(),
        a.alphabet.clone(),
        transitions,
    )
}

/// Keeps one track of the product alphabet.
pub fn project_track(
    b: &BuchiAutomaton<Vec<char>>,
    keep: usize,
) -> Result<BuchiAutomaton<char>, AdviceError> {
    let width = b.alphabet.iter().next().map_or(0, Vec::len);
    if width < 2 || keep >= width || b.alphabet.iter().any(|l| l.len() != width) {
        return Err(AdviceError::NotProductAlphabet);
    }
    let transitions: Vec<_> = b.transitions().map(|(p, l, q)| (p, l[keep], q)).collect();
    BuchiAutomaton::new(
        b.states,
        b.initial.iter().copied(),
        b.accepting.iter().copied(),
        b.alphabet.iter().map(|l| l[keep]),
        transitions,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{pi_word, Alphabet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn inf_a() -> BuchiAutomaton<char> {
        // state 1 is entered on every a
        let t = [(0, 'a', 1), (0, 'b', 0), (1, 'a', 1), (1, 'b', 0)];
        BuchiAutomaton::new(2, [0], [1], ['a', 'b'], t).unwrap()
    }

    /// Reach the set after the preperiod, then close the one-period
    /// relation (with an "accepting seen" flag) and look for a state that
    /// returns to itself through an accepting visit.
    fn block_oracle<L: Letter>(b: &BuchiAutomaton<L>, w: &LassoWord<L>) -> bool {
        let n = b.states();
        let mut after_u: BTreeSet<usize> = b.initial().clone();
        for l in w.prefix() {
            after_u = after_u
                .iter()
                .flat_map(|&q| b.successors(q, l).collect::<Vec<_>>())
                .collect();
        }
        // rel[p][q] = 0 unreachable, 1 reachable, 2 reachable with an accepting visit
        let mut rel = vec![vec![0u8; n]; n];
        for p in 0..n {
            let mut cur: Vec<(usize, bool)> = vec![(p, false)];
            for l in w.period() {
                let mut next = BTreeSet::new();
                for &(q, acc) in &cur {
                    for r in b.successors(q, l) {
                        next.insert((r, acc || b.accepting().contains(&r)));
                    }
                }
                cur = next.into_iter().collect();
            }
            for (q, acc) in cur {
                rel[p][q] = rel[p][q].max(if acc { 2 } else { 1 });
            }
        }
        // transitive closure keeping the best flag
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if rel[i][k] > 0 && rel[k][j] > 0 {
                        let v = rel[i][k].max(rel[k][j]);
                        rel[i][j] = rel[i][j].max(v);
                    }
                }
            }
        }
        after_u
            .iter()
            .any(|&s| (0..n).any(|p| (s == p || rel[s][p] > 0) && rel[p][p] == 2))
    }

    #[test]
    fn infinitely_many_a() {
        let b = inf_a();
        assert!(buchi_lasso_accepts(&b, &LassoWord::from_strs("", "ab").unwrap()).unwrap());
        assert!(!buchi_lasso_accepts(&b, &LassoWord::from_strs("a", "b").unwrap()).unwrap());
        let empty =
            BuchiAutomaton::new(2, [0], [], ['a', 'b'], [(0, 'a', 1), (1, 'b', 0)]).unwrap();
        assert!(!buchi_lasso_accepts(&empty, &LassoWord::from_strs("", "ab").unwrap()).unwrap());
        let all = BuchiAutomaton::new(1, [0], [0], ['a', 'b'], [(0, 'a', 0), (0, 'b', 0)]).unwrap();
        assert!(buchi_lasso_accepts(&all, &LassoWord::from_strs("ab", "bba").unwrap()).unwrap());
        assert!(matches!(
            buchi_lasso_accepts(&b, &LassoWord::from_strs("", "c").unwrap()),
            Err(AdviceError::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn lasso_acceptance_matches_block_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let n = rng.gen_range(1..=6);
            let mut t = Vec::new();
            for p in 0..n {
                for l in ['a', 'b'] {
                    for q in 0..n {
                        if rng.gen_bool(0.3) {
                            t.push((p, l, q));
                        }
                    }
                }
            }
            let acc: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
            let b = BuchiAutomaton::new(n, [0], acc, ['a', 'b'], t).unwrap();
            let word = |rng: &mut ChaCha8Rng, len: usize| -> Vec<char> {
                (0..len)
                    .map(|_| if rng.gen_bool(0.5) { 'a' } else { 'b' })
                    .collect()
            };
            let ul = rng.gen_range(0..4);
            let vl = rng.gen_range(1..4);
            let w = LassoWord::new(word(&mut rng, ul), word(&mut rng, vl)).unwrap();
            assert_eq!(
                buchi_lasso_accepts(&b, &w).unwrap(),
                block_oracle(&b, &w),
                "{b:?} {w}"
            );
        }
    }

    #[test]
    fn prefix_membership() {
        let sigma = Alphabet::from_letters("ab").unwrap();
        let lang = AdviceLanguage::terminating(
            pref_advice_automaton(&sigma),
            InfiniteWord::from_lasso_str("", "ab").unwrap(),
        )
        .unwrap();
        assert!(member_terminating(&lang, &chars("ab")).unwrap());
        assert!(!member_terminating(&lang, &chars("ba")).unwrap());
        assert!(member_terminating(&lang, &[]).unwrap());
        assert!(matches!(
            member_terminating(&lang, &chars("c")),
            Err(AdviceError::AlphabetMismatch(_))
        ));

        let bits = Alphabet::from_letters("01").unwrap();
        let pi = AdviceLanguage::terminating(pref_advice_automaton(&bits), pi_word(1)).unwrap();
        assert!(member_terminating(&pi, &chars("1010")).unwrap());
        assert!(!member_terminating(&pi, &chars("1011")).unwrap());
        let alt = AdviceLanguage::terminating(
            pref_advice_automaton(&bits),
            InfiniteWord::from_lasso_str("", "01").unwrap(),
        )
        .unwrap();
        for (w, ok) in [
            ("0", true),
            ("01", true),
            ("010", true),
            ("1", false),
            ("00", false),
        ] {
            assert_eq!(member_terminating(&alt, &chars(w)).unwrap(), ok, "{w}");
        }
    }

    fn prefix_buchi() -> BuchiAutomaton<Vec<char>> {
        // equal tracks, then padding forever
        let sigma = ['a', 'b'];
        let mut letters = Vec::new();
        let mut t = Vec::new();
        for x in sigma.iter().copied().chain([PAD]) {
            for y in sigma {
                letters.push(vec![x, y]);
                if x == y {
                    t.push((0, vec![x, y], 0));
                }
                if x == PAD {
                    t.push((0, vec![x, y], 1));
                    t.push((1, vec![x, y], 1));
                }
            }
        }
        BuchiAutomaton::new(2, [0], [1], letters, t).unwrap()
    }

    #[test]
    fn nonterminating_prefix_language() {
        let advice = InfiniteWord::from_lasso_str("", "ab").unwrap();
        let lang = AdviceLanguage::non_terminating(prefix_buchi(), advice.clone()).unwrap();
        let direct = |w: &str| advice.prefix_string(w.len()).unwrap() == w;
        for w in ["", "a", "ab", "aba", "abb", "b", "abab", "ba"] {
            assert_eq!(
                member_nonterminating(&lang, &chars(w)).unwrap(),
                direct(w),
                "{w}"
            );
        }
        let pi = AdviceLanguage::non_terminating(prefix_buchi(), pi_word(1)).unwrap();
        assert_eq!(
            member_nonterminating(&pi, &[]),
            Err(AdviceError::AdviceNotLasso)
        );
    }

    #[test]
    fn rerolled_advice_gives_same_answers() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let v: Vec<char> = (0..rng.gen_range(1..4))
                .map(|_| if rng.gen_bool(0.5) { 'a' } else { 'b' })
                .collect();
            let canonical = LassoWord::new(vec![], v.clone()).unwrap().canonical();
            let mut prefix = v.clone();
            prefix.truncate(rng.gen_range(0..=v.len()));
            let mut period = v[prefix.len()..].to_vec();
            period.extend_from_slice(&v[..prefix.len()]);
            period = period.repeat(2);
            let rolled = LassoWord::new(prefix, period).unwrap();
            let w: Vec<char> = canonical.take(rng.gen_range(0..6));
            let a = AdviceLanguage::non_terminating(prefix_buchi(), canonical.into()).unwrap();
            let b = AdviceLanguage::non_terminating(prefix_buchi(), rolled.into()).unwrap();
            assert_eq!(
                member_nonterminating(&a, &w).unwrap(),
                member_nonterminating(&b, &w).unwrap()
            );
            assert!(member_nonterminating(&a, &w).unwrap());
        }
    }

    #[test]
    fn empty_input_reduces_to_advice_track() {
        // B accepts words whose advice track has infinitely many a
        let mut t = Vec::new();
        let mut letters = Vec::new();
        for x in ['a', 'b', PAD] {
            for y in ['a', 'b'] {
                letters.push(vec![x, y]);
                t.push((0, vec![x, y], if y == 'a' { 1 } else { 0 }));
                t.push((1, vec![x, y], if y == 'a' { 1 } else { 0 }));
            }
        }
        let b = BuchiAutomaton::new(2, [0], [1], letters, t).unwrap();
        let advice = LassoWord::from_strs("b", "ab").unwrap();
        let lang = AdviceLanguage::non_terminating(b.clone(), advice.clone().into()).unwrap();
        let on_track = project_track(&b, 1).unwrap();
        assert_eq!(
            member_nonterminating(&lang, &[]).unwrap(),
            buchi_lasso_accepts(&on_track, &advice).unwrap()
        );
    }

    #[test]
    fn boolean_algebra() {
        let sigma = Alphabet::from_letters("ab").unwrap();
        let pref = pref_advice_automaton(&sigma);
        // second automaton: even length
        let letters: Vec<Vec<char>> = pref.alphabet().iter().cloned().collect();
        let even = Dfa::new(
            2,
            0,
            [0],
            letters.clone(),
            letters
                .iter()
                .flat_map(|l| [(0, l.clone(), 1), (1, l.clone(), 0)])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let and = dfa_boolean(&pref, &even, BoolOp::And).unwrap();
        let or = dfa_boolean(&pref, &even, BoolOp::Or).unwrap();
        let not_pref = dfa_boolean(&pref, &pref, BoolOp::NotA).unwrap();
        let not_even = dfa_boolean(&even, &even, BoolOp::NotA).unwrap();
        let contradiction = dfa_boolean(&pref, &not_pref, BoolOp::And).unwrap();
        let idem = dfa_boolean(&pref, &pref, BoolOp::Or).unwrap();
        let demorgan = dfa_boolean(
            &dfa_boolean(&not_pref, &not_even, BoolOp::Or).unwrap(),
            &not_pref,
            BoolOp::NotA,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let w: Vec<Vec<char>> = (0..rng.gen_range(0..8))
                .map(|_| letters[rng.gen_range(0..letters.len())].clone())
                .collect();
            let (p, e) = (pref.accepts(&w), even.accepts(&w));
            assert_eq!(and.accepts(&w), p && e);
            assert_eq!(or.accepts(&w), p || e);
            assert!(!contradiction.accepts(&w));
            assert_eq!(idem.accepts(&w), p);
            assert_eq!(demorgan.accepts(&w), and.accepts(&w));
        }
        let other = Dfa::new(1, 0, [0], [vec!['a', 'c']], []).unwrap();
        assert!(matches!(
            dfa_boolean(&pref, &other, BoolOp::And),
            Err(AdviceError::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn projections() {
        let pair = |a: char, b: char| vec![a, b];
        let b = BuchiAutomaton::new(
            1,
            [0],
            [0],
            [pair('a', '0'), pair('b', '0')],
            [(0, pair('a', '0'), 0)],
        )
        .unwrap();
        let p = project_track(&b, 0).unwrap();
        assert!(buchi_lasso_accepts(&p, &LassoWord::from_strs("", "a").unwrap()).unwrap());
        assert!(!buchi_lasso_accepts(&p, &LassoWord::from_strs("", "ab").unwrap()).unwrap());
        let empty = BuchiAutomaton::new(
            1,
            [0],
            [],
            [pair('a', '0'), pair('b', '0')],
            [(0, pair('a', '0'), 0)],
        )
        .unwrap();
        let pe = project_track(&empty, 0).unwrap();
        for (u, v) in [("", "a"), ("b", "a"), ("", "ab")] {
            assert!(!buchi_lasso_accepts(&pe, &LassoWord::from_strs(u, v).unwrap()).unwrap());
        }
        let id = BuchiAutomaton::new(
            1,
            [0],
            [0],
            [pair('a', 'a'), pair('b', 'b')],
            [(0, pair('a', 'a'), 0), (0, pair('b', 'b'), 0)],
        )
        .unwrap();
        let pid = project_track(&id, 1).unwrap();
        for (u, v) in [("", "a"), ("b", "a"), ("", "ab")] {
            assert!(buchi_lasso_accepts(&pid, &LassoWord::from_strs(u, v).unwrap()).unwrap());
        }
        let single = BuchiAutomaton::new(1, [0], [0], [vec!['a']], []).unwrap();
        assert!(matches!(
            project_track(&single, 0),
            Err(AdviceError::NotProductAlphabet)
        ));
    }

    #[test]
    fn omega_membership() {
        // w ⊗ α accepted iff tracks agree forever
        let letters: Vec<Vec<char>> = ["aa", "ab", "ba", "bb"].iter().map(|s| chars(s)).collect();
        let b = BuchiAutomaton::new(
            1,
            [0],
            [0],
            letters,
            [(0, chars("aa"), 0), (0, chars("bb"), 0)],
        )
        .unwrap();
        let lang =
            AdviceLanguage::omega(b, InfiniteWord::from_lasso_str("a", "ba").unwrap()).unwrap();
        assert!(member_omega(&lang, &LassoWord::from_strs("", "ab").unwrap()).unwrap());
        assert!(!member_omega(&lang, &LassoWord::from_strs("", "a").unwrap()).unwrap());
    }
}
