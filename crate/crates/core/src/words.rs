//! Finite and infinite words.
//!
//! An [`InfiniteWord`] is an immutable, cheaply clonable handle on a lazily
//! evaluated ω-word. Derived words (shifts, duplications, block mirrors,
//! convolutions, machine outputs) keep a reference to their operands and
//! evaluate letters on demand; sequential sources memoize the prefix they
//! have produced so far behind a mutex, so a word can be shared between
//! threads.

use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Anything usable as a letter of a word.
pub trait Letter: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static {}
impl<T: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static> Letter for T {}

/// The padding letter used by convolution. No alphabet may contain it.
pub const PAD: char = '\u{25A1}';
/// Printable stand-in for [`PAD`] in documents and on the command line.
pub const PAD_ASCII: char = '_';
/// Block separator used by block mirrors and the mirror machines.
pub const SEPARATOR: char = '#';
/// Default lookahead bound for [`block_mirror`].
pub const DEFAULT_BLOCK_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("letter {0:?} occurs twice in the alphabet")]
    DuplicateLetter(char),
    #[error("letter {0:?} is reserved")]
    ReservedLetter(char),
    #[error("lasso period is empty")]
    EmptyPeriod,
    #[error("block starting at {start} has no separator within {budget} letters")]
    BlockBudgetExceeded { start: usize, budget: usize },
    #[error("undefined transition at position {position}")]
    UndefinedTransition { position: usize },
    #[error("letter {index} unavailable: {message}")]
    Source { index: usize, message: String },
    #[error("cannot parse word literal {0:?}")]
    BadLiteral(String),
}

/// An ordered set of single-character letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<char>", into = "Vec<char>")]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(letters: I) -> Result<Self, WordError> {
        let mut symbols: Vec<char> = Vec::new();
        for c in letters {
            if c == PAD || c == PAD_ASCII {
                return Err(WordError::ReservedLetter(c));
            }
            if symbols.contains(&c) {
                return Err(WordError::DuplicateLetter(c));
            }
            symbols.push(c);
        }
        if symbols.is_empty() {
            return Err(WordError::EmptyAlphabet);
        }
        symbols.sort_unstable();
        Ok(Self { symbols })
    }

    /// Alphabet of the distinct letters of `s`.
    pub fn from_letters(s: &str) -> Result<Self, WordError> {
        let mut seen: Vec<char> = s.chars().collect();
        seen.sort_unstable();
        seen.dedup();
        Self::new(seen)
    }

    pub fn contains(&self, c: char) -> bool {
        self.symbols.binary_search(&c).is_ok()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        let mut symbols = self.symbols.clone();
        symbols.extend(other.symbols.iter().copied());
        symbols.sort_unstable();
        symbols.dedup();
        Alphabet { symbols }
    }

    pub fn without(&self, c: char) -> Result<Alphabet, WordError> {
        Alphabet::new(self.symbols.iter().copied().filter(|&x| x != c))
    }
}

impl TryFrom<Vec<char>> for Alphabet {
    type Error = WordError;
    fn try_from(v: Vec<char>) -> Result<Self, Self::Error> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for Vec<char> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

/// An ultimately periodic word `prefix · period^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoWord<L: Letter = char> {
    prefix: Vec<L>,
    period: Vec<L>,
}

impl<L: Letter> LassoWord<L> {
    pub fn new(prefix: Vec<L>, period: Vec<L>) -> Result<Self, WordError> {
        if period.is_empty() {
            return Err(WordError::EmptyPeriod);
        }
        Ok(Self { prefix, period })
    }

    pub fn periodic(period: Vec<L>) -> Result<Self, WordError> {
        Self::new(Vec::new(), period)
    }

    pub fn prefix(&self) -> &[L] {
        &self.prefix
    }

    pub fn period(&self) -> &[L] {
        &self.period
    }

    /// Number of distinct positions of the lasso graph, `|u| + |v|`.
    pub fn size(&self) -> usize {
        self.prefix.len() + self.period.len()
    }

    /// Representative of position `n` in `0..size()`.
    pub fn fold_position(&self, n: usize) -> usize {
        let u = self.prefix.len();
        if n < u {
            n
        } else {
            u + (n - u) % self.period.len()
        }
    }

    pub fn letter(&self, n: usize) -> &L {
        let i = self.fold_position(n);
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.period[i - self.prefix.len()]
        }
    }

    pub fn take(&self, n: usize) -> Vec<L> {
        (0..n).map(|i| self.letter(i).clone()).collect()
    }

    /// Builds the lasso of a word known to be periodic with period
    /// `period_len` from position `start` on.
    pub fn from_fn(
        start: usize,
        period_len: usize,
        f: impl Fn(usize) -> L,
    ) -> Result<Self, WordError> {
        let prefix = (0..start).map(&f).collect();
        let period = (start..start + period_len).map(&f).collect();
        Self::new(prefix, period)
    }

    /// Normal form: primitive period, shortest preperiod.
    pub fn canonical(&self) -> Self {
        let mut period = primitive_root(&self.period).to_vec();
        let mut prefix = self.prefix.clone();
        while let (Some(a), Some(b)) = (prefix.last(), period.last()) {
            if a != b {
                break;
            }
            prefix.pop();
            period.rotate_right(1);
        }
        Self { prefix, period }
    }

    pub fn is_canonical(&self) -> bool {
        self == &self.canonical()
    }

    pub fn shifted(&self, n: usize) -> Self {
        let start = n.max(self.prefix.len());
        LassoWord::from_fn(start - n, self.period.len(), |i| self.letter(i + n).clone())
            .expect("period is nonempty")
    }

    pub fn map<M: Letter>(&self, f: impl Fn(&L) -> M) -> LassoWord<M> {
        LassoWord {
            prefix: self.prefix.iter().map(&f).collect(),
            period: self.period.iter().map(&f).collect(),
        }
    }
}

impl<L: Letter + fmt::Display> fmt::Display for LassoWord<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.prefix {
            write!(f, "{l}")?;
        }
        write!(f, "(")?;
        for l in &self.period {
            write!(f, "{l}")?;
        }
        write!(f, ")^ω")
    }
}

fn primitive_root<L: Eq>(v: &[L]) -> &[L] {
    let n = v.len();
    for d in 1..=n {
        if n % d == 0 && (d..n).all(|i| v[i] == v[i - d]) {
            return &v[..d];
        }
    }
    v
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Which construction produced an [`InfiniteWord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordKind {
    Lasso,
    Generator,
    Shift,
    Convolution,
    Morphic,
    BlockMirror,
    Constant,
}

type LetterFn<L> = dyn Fn(usize) -> Result<L, WordError> + Send + Sync;
type LetterStream<L> = dyn Iterator<Item = Result<L, WordError>> + Send;

struct StreamCache<L> {
    source: Box<LetterStream<L>>,
    produced: Vec<L>,
    failure: Option<WordError>,
}

impl<L: Letter> StreamCache<L> {
    fn get(&mut self, n: usize) -> Result<L, WordError> {
        while self.produced.len() <= n {
            if let Some(e) = &self.failure {
                return Err(e.clone());
            }
            match self.source.next() {
                Some(Ok(l)) => self.produced.push(l),
                Some(Err(e)) => self.failure = Some(e),
                None => {
                    self.failure = Some(WordError::Source {
                        index: self.produced.len(),
                        message: "stream ended".into(),
                    })
                }
            }
        }
        Ok(self.produced[n].clone())
    }
}

struct MirrorCache<L> {
    scanned: usize,
    produced: Vec<L>,
    failure: Option<WordError>,
}

enum Node<L: Letter> {
    Lasso(LassoWord<L>),
    Constant(L),
    Function {
        kind: WordKind,
        name: String,
        f: Box<LetterFn<L>>,
        lasso: Option<LassoWord<L>>,
    },
    Stream {
        name: String,
        cache: Mutex<StreamCache<L>>,
    },
    Shift {
        base: InfiniteWord<L>,
        offset: usize,
    },
    Duplicate {
        base: InfiniteWord<L>,
        factor: usize,
    },
    BlockMirror {
        base: InfiniteWord<L>,
        separator: L,
        budget: usize,
        cache: Mutex<MirrorCache<L>>,
    },
}

/// A lazily evaluated infinite word.
#[derive(Clone)]
pub struct InfiniteWord<L: Letter = char> {
    node: Arc<Node<L>>,
}

impl<L: Letter> fmt::Debug for InfiniteWord<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InfiniteWord({})", self.describe())
    }
}

impl<L: Letter> From<LassoWord<L>> for InfiniteWord<L> {
    fn from(l: LassoWord<L>) -> Self {
        Self::wrap(Node::Lasso(l))
    }
}

impl<L: Letter> InfiniteWord<L> {
    fn wrap(node: Node<L>) -> Self {
        Self {
            node: Arc::new(node),
        }
    }

    pub fn lasso(prefix: Vec<L>, period: Vec<L>) -> Result<Self, WordError> {
        Ok(LassoWord::new(prefix, period)?.into())
    }

    pub fn constant(letter: L) -> Self {
        Self::wrap(Node::Constant(letter))
    }

    /// A word given by a pure letter function.
    pub fn from_fn(
        name: impl Into<String>,
        f: impl Fn(usize) -> L + Send + Sync + 'static,
    ) -> Self {
        Self::wrap(Node::Function {
            kind: WordKind::Generator,
            name: name.into(),
            f: Box::new(move |n| Ok(f(n))),
            lasso: None,
        })
    }

    pub(crate) fn from_fallible_fn(
        kind: WordKind,
        name: impl Into<String>,
        lasso: Option<LassoWord<L>>,
        f: impl Fn(usize) -> Result<L, WordError> + Send + Sync + 'static,
    ) -> Self {
        Self::wrap(Node::Function {
            kind,
            name: name.into(),
            f: Box::new(f),
            lasso,
        })
    }

    /// A word produced sequentially by `source`; produced letters are
    /// memoized, and the first error is sticky.
    pub fn from_stream(
        name: impl Into<String>,
        source: impl Iterator<Item = Result<L, WordError>> + Send + 'static,
    ) -> Self {
        Self::wrap(Node::Stream {
            name: name.into(),
            cache: Mutex::new(StreamCache {
                source: Box::new(source),
                produced: Vec::new(),
                failure: None,
            }),
        })
    }

    pub fn kind(&self) -> WordKind {
        match &*self.node {
            Node::Lasso(_) => WordKind::Lasso,
            Node::Constant(_) => WordKind::Constant,
            Node::Function { kind, .. } => *kind,
            Node::Stream { .. } => WordKind::Generator,
            Node::Shift { .. } => WordKind::Shift,
            Node::Duplicate { .. } => WordKind::Morphic,
            Node::BlockMirror { .. } => WordKind::BlockMirror,
        }
    }

    pub fn describe(&self) -> String {
        match &*self.node {
            Node::Lasso(l) => format!("lasso(|u|={}, |v|={})", l.prefix.len(), l.period.len()),
            Node::Constant(c) => format!("constant({c:?})"),
            Node::Function { name, .. } | Node::Stream { name, .. } => name.clone(),
            Node::Shift { base, offset } => format!("shift({}, {offset})", base.describe()),
            Node::Duplicate { base, factor } => format!("mu_{factor}({})", base.describe()),
            Node::BlockMirror { base, .. } => format!("mirror({})", base.describe()),
        }
    }

    /// The `n`-th letter, or the evaluation error of a derived word.
    pub fn get(&self, n: usize) -> Result<L, WordError> {
        match &*self.node {
            Node::Lasso(l) => Ok(l.letter(n).clone()),
            Node::Constant(c) => Ok(c.clone()),
            Node::Function { f, .. } => f(n),
            Node::Stream { cache, .. } => cache.lock().expect("stream cache poisoned").get(n),
            Node::Shift { base, offset } => base.get(n + offset),
            Node::Duplicate { base, factor } => base.get(n / factor),
            Node::BlockMirror {
                base,
                separator,
                budget,
                cache,
            } => {
                let mut cache = cache.lock().expect("mirror cache poisoned");
                while cache.produced.len() <= n {
                    if let Some(e) = &cache.failure {
                        return Err(e.clone());
                    }
                    let start = cache.scanned;
                    let mut block = Vec::new();
                    loop {
                        if block.len() > *budget {
                            cache.failure = Some(WordError::BlockBudgetExceeded {
                                start,
                                budget: *budget,
                            });
                            break;
                        }
                        let l = base.get(start + block.len())?;
                        if &l == separator {
                            cache.scanned = start + block.len() + 1;
                            block.reverse();
                            cache.produced.extend(block);
                            cache.produced.push(l);
                            break;
                        }
                        block.push(l);
                    }
                }
                Ok(cache.produced[n].clone())
            }
        }
    }

    /// The `n`-th letter.
    ///
    /// # Panics
    ///
    /// Panics if the word is derived from a computation that fails at `n`
    /// (a block mirror without separator, a machine output that stalls).
    /// Use [`InfiniteWord::get`] for those.
    pub fn letter_at(&self, n: usize) -> L {
        match self.get(n) {
            Ok(l) => l,
            Err(e) => panic!("letter {n} of {} unavailable: {e}", self.describe()),
        }
    }

    /// The first `n` letters.
    pub fn prefix(&self, n: usize) -> Result<Vec<L>, WordError> {
        (0..n).map(|i| self.get(i)).collect()
    }

    /// The lasso form of the word when it is ultimately periodic by
    /// construction (lassos, constants and words derived from them).
    pub fn to_lasso(&self) -> Option<LassoWord<L>> {
        match &*self.node {
            Node::Lasso(l) => Some(l.clone()),
            Node::Constant(c) => Some(LassoWord {
                prefix: vec![],
                period: vec![c.clone()],
            }),
            Node::Function { lasso, .. } => lasso.clone(),
            Node::Stream { .. } => None,
            Node::Shift { base, offset } => base.to_lasso().map(|l| l.shifted(*offset)),
            Node::Duplicate { base, factor } => base.to_lasso().map(|l| LassoWord {
                prefix: l
                    .prefix
                    .iter()
                    .flat_map(|c| std::iter::repeat(c.clone()).take(*factor))
                    .collect(),
                period: l
                    .period
                    .iter()
                    .flat_map(|c| std::iter::repeat(c.clone()).take(*factor))
                    .collect(),
            }),
            Node::BlockMirror {
                base, separator, ..
            } => {
                let l = base.to_lasso()?;
                let u = l.prefix.len();
                let first_sep = (u..u + l.period.len()).find(|&i| l.letter(i) == separator)?;
                let this = self.clone();
                let start = first_sep + 1;
                let prefix = this.prefix(start).ok()?;
                let period = (start..start + l.period.len())
                    .map(|i| this.get(i))
                    .collect::<Result<Vec<_>, _>>()
                    .ok()?;
                LassoWord::new(prefix, period).ok()
            }
        }
    }
}

impl InfiniteWord<char> {
    pub fn from_lasso_str(prefix: &str, period: &str) -> Result<Self, WordError> {
        Self::lasso(prefix.chars().collect(), period.chars().collect())
    }

    pub fn prefix_string(&self, n: usize) -> Result<String, WordError> {
        Ok(self.prefix(n)?.into_iter().collect())
    }
}

impl LassoWord<char> {
    pub fn from_strs(prefix: &str, period: &str) -> Result<Self, WordError> {
        Self::new(prefix.chars().collect(), period.chars().collect())
    }

    pub fn alphabet(&self) -> Result<Alphabet, WordError> {
        Alphabet::from_letters(&self.prefix.iter().chain(&self.period).collect::<String>())
    }

    /// Parses `(v)^ω`, `u(v)^ω` or `u·(v)^ω`; `^w` is accepted for `^ω`.
    pub fn parse_literal(s: &str) -> Result<Self, WordError> {
        let bad = || WordError::BadLiteral(s.to_string());
        let t = s.trim();
        let body = t
            .strip_suffix(")^ω")
            .or_else(|| t.strip_suffix(")^w"))
            .or_else(|| t.strip_suffix(")^omega"))
            .ok_or_else(bad)?;
        let open = body.rfind('(').ok_or_else(bad)?;
        let prefix = body[..open].trim_end_matches(['·', '.']);
        let period = &body[open + 1..];
        if period.contains(['(', ')']) || prefix.contains(['(', ')']) {
            return Err(bad());
        }
        Self::from_strs(prefix, period)
    }
}

/// A finite or infinite word.
#[derive(Debug, Clone)]
pub enum Word<L: Letter = char> {
    Finite(Vec<L>),
    Infinite(InfiniteWord<L>),
}

impl<L: Letter> Word<L> {
    /// Length, `None` when infinite.
    pub fn len(&self) -> Option<usize> {
        match self {
            Word::Finite(v) => Some(v.len()),
            Word::Infinite(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Letter `n`, or `None` past the end of a finite word.
    pub fn get(&self, n: usize) -> Result<Option<L>, WordError> {
        match self {
            Word::Finite(v) => Ok(v.get(n).cloned()),
            Word::Infinite(w) => w.get(n).map(Some),
        }
    }
}

/// `w[n:]`.
pub fn shift<L: Letter>(w: &InfiniteWord<L>, n: usize) -> InfiniteWord<L> {
    if n == 0 {
        return w.clone();
    }
    match &*w.node {
        Node::Shift { base, offset } => InfiniteWord::wrap(Node::Shift {
            base: base.clone(),
            offset: offset + n,
        }),
        _ => InfiniteWord::wrap(Node::Shift {
            base: w.clone(),
            offset: n,
        }),
    }
}

/// The duplication morphism `a ↦ a^n` applied to `w`.
pub fn duplicate<L: Letter>(w: &InfiniteWord<L>, n: usize) -> InfiniteWord<L> {
    assert!(n >= 1, "duplication factor must be positive");
    if n == 1 {
        return w.clone();
    }
    InfiniteWord::wrap(Node::Duplicate {
        base: w.clone(),
        factor: n,
    })
}

/// Reverses every maximal `#`-free block of `w`, keeping the separators.
pub fn block_mirror(w: &InfiniteWord<char>) -> InfiniteWord<char> {
    block_mirror_with(w, SEPARATOR, DEFAULT_BLOCK_BUDGET)
}

pub fn block_mirror_with<L: Letter>(
    w: &InfiniteWord<L>,
    separator: L,
    budget: usize,
) -> InfiniteWord<L> {
    InfiniteWord::wrap(Node::BlockMirror {
        base: w.clone(),
        separator,
        budget,
        cache: Mutex::new(MirrorCache {
            scanned: 0,
            produced: Vec::new(),
            failure: None,
        }),
    })
}

/// Letter `n` of `∏_{m ≥ 0} (0^m 1)^k`.
pub fn pi_letter(k: usize, n: usize) -> char {
    // super-block m occupies k(m+1) letters; find the one containing n
    let mut m = (((2 * n / k.max(1)) as f64).sqrt() as usize).saturating_sub(1);
    while k * (m + 1) * (m + 2) / 2 <= n {
        m += 1;
    }
    while m > 0 && k * m * (m + 1) / 2 > n {
        m -= 1;
    }
    let r = n - k * m * (m + 1) / 2;
    if r % (m + 1) == m {
        '1'
    } else {
        '0'
    }
}

/// `π` for `k = 1`, `π^k = ∏ (0^n 1)^k` otherwise.
pub fn pi_word(k: usize) -> InfiniteWord<char> {
    assert!(k >= 1, "pi_word needs k >= 1");
    let name = if k == 1 {
        "pi".to_string()
    } else {
        format!("pi^{k}")
    };
    InfiniteWord::from_fn(name, move |n| pi_letter(k, n))
}

/// Tape position (in the word, 0-based) of the `j`-th letter `1` of `π`.
pub fn pi_one_position(j: usize) -> usize {
    (j + 1) * (j + 2) / 2 - 1
}

pub fn canonical_lasso<L: Letter>(
    prefix: Vec<L>,
    period: Vec<L>,
) -> Result<LassoWord<L>, WordError> {
    Ok(LassoWord::new(prefix, period)?.canonical())
}

/// Convolution `w_1 ⊗ … ⊗ w_n`, padding ended operands with [`PAD`].
pub fn convolve(ws: &[Word<char>]) -> Word<Vec<char>> {
    assert!(ws.len() >= 2, "convolution needs at least two operands");
    let letter = |ws: &[Word<char>], n: usize| -> Result<Vec<char>, WordError> {
        ws.iter()
            .map(|w| w.get(n).map(|l| l.unwrap_or(PAD)))
            .collect()
    };
    if let Some(len) = ws.iter().map(|w| w.len()).collect::<Option<Vec<_>>>() {
        let max = len.into_iter().max().unwrap_or(0);
        return Word::Finite(
            (0..max)
                .map(|n| letter(ws, n).expect("finite words are total"))
                .collect(),
        );
    }
    let lasso = convolve_lassos(ws);
    let ws = ws.to_vec();
    Word::Infinite(InfiniteWord::from_fallible_fn(
        WordKind::Convolution,
        "convolution",
        lasso,
        move |n| letter(&ws, n),
    ))
}

fn convolve_lassos(ws: &[Word<char>]) -> Option<LassoWord<Vec<char>>> {
    let mut start = 0;
    let mut period = 1;
    let mut parts = Vec::new();
    for w in ws {
        match w {
            Word::Finite(v) => {
                start = start.max(v.len());
                parts.push(Word::Finite(v.clone()));
            }
            Word::Infinite(iw) => {
                let l = iw.to_lasso()?;
                start = start.max(l.prefix.len());
                period = lcm(period, l.period.len());
                parts.push(Word::Infinite(l.into()));
            }
        }
    }
    LassoWord::from_fn(start, period, |n| {
        parts
            .iter()
            .map(|w| w.get(n).expect("lasso").unwrap_or(PAD))
            .collect()
    })
    .ok()
}

/// Convolution of a finite word and an infinite word, `(w □^ω) ⊗ α`.
pub fn pad_and_pair(w: &[char], advice: &LassoWord<char>) -> LassoWord<Vec<char>> {
    let start = w.len().max(advice.prefix.len());
    LassoWord::from_fn(start, advice.period.len(), |n| {
        vec![w.get(n).copied().unwrap_or(PAD), *advice.letter(n)]
    })
    .expect("period is nonempty")
}

/// Renders a letter for display, showing [`PAD`] as `_`.
pub fn display_letter(c: char) -> char {
    if c == PAD {
        PAD_ASCII
    } else {
        c
    }
}

pub fn render(letters: &[char]) -> String {
    letters.iter().map(|&c| display_letter(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(w: &InfiniteWord<char>, n: usize) -> String {
        w.prefix_string(n).unwrap()
    }

    #[test]
    fn letters_of_basic_words() {
        let w = InfiniteWord::from_lasso_str("", "01").unwrap();
        assert_eq!(w.letter_at(3), '1');
        assert_eq!(s(&pi_word(1), 10), "1010010001");
        let ab = InfiniteWord::from_lasso_str("", "ab").unwrap();
        assert_eq!(shift(&ab, 1).letter_at(0), 'b');
    }

    #[test]
    fn pi_words_expand_by_hand() {
        assert_eq!(s(&pi_word(2), 12), "110101001001");
        // hand expansion of (1)^3 (01)^3 (001)^3
        assert_eq!(s(&pi_word(3), 18), "111010101001001001");
        for k in 1..=4 {
            let p = s(&pi_word(k), 2000);
            // "11" only inside the leading run of k ones
            let last = p.match_indices("11").map(|(i, _)| i).last();
            assert!(last.map_or(true, |i| i + 2 <= k), "k={k}");
        }
    }

    #[test]
    fn pi_direct_formula_matches_enumeration() {
        for k in 1..=3 {
            let mut expected = String::new();
            let mut m = 0;
            while expected.len() < 3000 {
                for _ in 0..k {
                    expected.push_str(&"0".repeat(m));
                    expected.push('1');
                }
                m += 1;
            }
            assert_eq!(s(&pi_word(k), 3000), expected[..3000]);
        }
        for j in 0..50 {
            assert_eq!(pi_letter(1, pi_one_position(j)), '1');
        }
    }

    #[test]
    fn shifts() {
        let ab = InfiniteWord::from_lasso_str("", "ab").unwrap();
        assert_eq!(s(&shift(&ab, 1), 6), "bababa");
        assert_eq!(s(&shift(&pi_word(1), 1), 9), "010010001");
        assert_eq!(s(&shift(&ab, 0), 6), s(&ab, 6));
        let pi = pi_word(1);
        let twice = shift(&shift(&pi, 3), 4);
        assert_eq!(s(&twice, 1000), s(&shift(&pi, 7), 1000));
    }

    #[test]
    fn duplication() {
        let w = InfiniteWord::from_lasso_str("", "01").unwrap();
        assert_eq!(s(&duplicate(&w, 3), 12), "000111000111");
        assert_eq!(
            duplicate(&w, 3).to_lasso().unwrap().canonical(),
            LassoWord::from_strs("", "000111").unwrap()
        );
        let ab = InfiniteWord::from_lasso_str("", "ab").unwrap();
        assert_eq!(s(&duplicate(&ab, 2), 8), "aabbaabb");
        assert_eq!(s(&duplicate(&ab, 1), 8), s(&ab, 8));
        let pi = pi_word(1);
        let d = duplicate(&pi, 4);
        for i in 0..4000 {
            assert_eq!(d.letter_at(i), pi.letter_at(i / 4));
        }
    }

    #[test]
    fn block_mirrors() {
        let w = InfiniteWord::from_lasso_str("", "ab#baa#").unwrap();
        assert_eq!(s(&block_mirror(&w), 14), "ba#aab#ba#aab#");
        let hashes = InfiniteWord::constant('#');
        assert_eq!(s(&block_mirror(&hashes), 5), "#####");
        let abc = InfiniteWord::from_lasso_str("", "abc#").unwrap();
        assert_eq!(s(&block_mirror(&abc), 8), "cba#cba#");
        let m = block_mirror(&w).to_lasso().unwrap();
        assert_eq!(m.take(50), block_mirror(&w).prefix(50).unwrap());
    }

    #[test]
    fn block_mirror_budget() {
        let w = InfiniteWord::from_lasso_str("#", "a").unwrap();
        let m = block_mirror_with(&w, '#', 100);
        assert_eq!(m.get(0), Ok('#'));
        assert_eq!(
            m.get(1),
            Err(WordError::BlockBudgetExceeded {
                start: 1,
                budget: 100
            })
        );
    }

    #[test]
    fn convolution() {
        let a = Word::Finite("ab".chars().collect());
        let b = Word::Finite("abc".chars().collect());
        match convolve(&[a.clone(), b]) {
            Word::Finite(v) => assert_eq!(v, vec![vec!['a', 'a'], vec!['b', 'b'], vec![PAD, 'c']]),
            _ => panic!("expected finite"),
        }
        let inf = Word::Infinite(InfiniteWord::from_lasso_str("", "01").unwrap());
        match convolve(&[a, inf]) {
            Word::Infinite(w) => {
                assert_eq!(
                    w.prefix(4).unwrap(),
                    vec![
                        vec!['a', '0'],
                        vec!['b', '1'],
                        vec![PAD, '0'],
                        vec![PAD, '1']
                    ]
                );
                assert_eq!(w.kind(), WordKind::Convolution);
                assert!(w.to_lasso().is_some());
            }
            _ => panic!("expected infinite"),
        }
        match convolve(&[Word::Finite(vec![]), Word::Finite(vec![])]) {
            Word::Finite(v) => assert!(v.is_empty()),
            _ => panic!(),
        }
    }

    #[test]
    fn canonical_lassos() {
        let c = canonical_lasso(vec!['a'], "baba".chars().collect()).unwrap();
        assert_eq!(c, LassoWord::from_strs("", "ab").unwrap());
        let c = canonical_lasso("ab".chars().collect(), vec!['b']).unwrap();
        assert_eq!(c, LassoWord::from_strs("a", "b").unwrap());
        let c = canonical_lasso(vec![], vec!['a']).unwrap();
        assert_eq!(c, LassoWord::from_strs("", "a").unwrap());
        assert_eq!(
            canonical_lasso::<char>(vec!['a'], vec![]),
            Err(WordError::EmptyPeriod)
        );
    }

    #[test]
    fn literals() {
        assert_eq!(
            LassoWord::parse_literal("(ab#)^ω").unwrap(),
            LassoWord::from_strs("", "ab#").unwrap()
        );
        assert_eq!(
            LassoWord::parse_literal("ab·(c)^ω").unwrap(),
            LassoWord::from_strs("ab", "c").unwrap()
        );
        assert_eq!(
            LassoWord::parse_literal("x(yz)^w").unwrap(),
            LassoWord::from_strs("x", "yz").unwrap()
        );
        assert!(LassoWord::parse_literal("abc").is_err());
        assert!(LassoWord::parse_literal("()^ω").is_err());
    }

    #[test]
    fn alphabets() {
        assert!(Alphabet::new(['a', 'a']).is_err());
        assert!(Alphabet::new([]).is_err());
        assert_eq!(
            Alphabet::new(['a', PAD]),
            Err(WordError::ReservedLetter(PAD))
        );
        let a = Alphabet::new(['b', 'a']).unwrap();
        assert_eq!(a.symbols(), &['a', 'b']);
    }

    #[test]
    fn shared_across_threads() {
        let w = block_mirror(&InfiniteWord::from_lasso_str("", "abc#de#").unwrap());
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let w = w.clone();
                std::thread::spawn(move || w.prefix_string(500).unwrap())
            })
            .collect();
        let outs: Vec<String> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(outs.windows(2).all(|p| p[0] == p[1]));
    }
}
