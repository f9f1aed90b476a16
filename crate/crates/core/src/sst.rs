//! Deterministic streaming string transducers over infinite words:
//! copyless register updates, interpreters, simplification on a fixed
//! lasso input and compilation to two-way transducers with lookbehind.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::advice::Dfa;
use crate::transducers::{
    run_2wft, run_2wft_b, Action, LookbehindTransducer, Move, RunOutcome, Simulator, TapeSymbol,
    TransducerError, TwoWayTransducer, DEFAULT_BUDGET,
};
use crate::words::{InfiniteWord, LassoWord, WordError, PAD, SEPARATOR};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SstError {
    #[error("state {0} does not exist")]
    InvalidState(usize),
    #[error("register {0} does not exist")]
    InvalidRegister(usize),
    #[error("duplicate register name {0:?}")]
    DuplicateRegister(String),
    #[error("letter {0:?} is not in the alphabet")]
    AlphabetMismatch(char),
    #[error("two updates for state {0} on {1:?}")]
    NotDeterministic(usize, char),
    #[error("substitution is not copyless: {0}")]
    NotCopyless(CopylessViolation),
    #[error("output function violates its constraint: {0}")]
    OutputConstraint(String),
    #[error("no transition at input position {position}")]
    UndefinedTransition { position: usize },
    #[error("no output for the recurrent states {0:?}")]
    NoOutputFunction(Vec<usize>),
    #[error("this operation needs an ultimately periodic input")]
    AdviceNotLasso,
    #[error("no output letter after {steps} steps")]
    BudgetExceeded { steps: usize },
    #[error("not a simple SST: {0}")]
    MalformedSimpleSst(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error(transparent)]
    Transducer(#[from] TransducerError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A letter or a register in the right-hand side of an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Token {
    Letter(char),
    Reg(usize),
}

/// Where a register occurs: in the update of `lhs`, at index `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Site {
    pub lhs: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CopylessViolation {
    pub register: usize,
    pub first: Site,
    pub second: Site,
}

impl fmt::Display for CopylessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "register {} occurs in the updates of {} (index {}) and {} (index {})",
            self.register, self.first.lhs, self.first.index, self.second.lhs, self.second.index
        )
    }
}

/// A map from each register to a string of letters and registers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Substitution {
    rhs: Vec<Vec<Token>>,
}

impl Substitution {
    pub fn new(rhs: Vec<Vec<Token>>) -> Result<Self, SstError> {
        let n = rhs.len();
        if let Some(&Token::Reg(r)) = rhs
            .iter()
            .flatten()
            .find(|t| matches!(t, Token::Reg(r) if *r >= n))
        {
            return Err(SstError::InvalidRegister(r));
        }
        Ok(Self { rhs })
    }

    pub fn identity(registers: usize) -> Self {
        Self {
            rhs: (0..registers).map(|r| vec![Token::Reg(r)]).collect(),
        }
    }

    /// Every register mapped to the same ground string.
    pub fn constant(values: &[Vec<char>]) -> Self {
        Self {
            rhs: values
                .iter()
                .map(|v| v.iter().map(|&c| Token::Letter(c)).collect())
                .collect(),
        }
    }

    /// Parses space-separated updates: tokens naming a register are
    /// registers, single characters are letters.
    pub fn parse(names: &[String], updates: &BTreeMap<String, String>) -> Result<Self, SstError> {
        let mut rhs = vec![Vec::new(); names.len()];
        let index = |name: &str| names.iter().position(|n| n == name);
        for (i, name) in names.iter().enumerate() {
            match updates.get(name) {
                None => rhs[i] = vec![Token::Reg(i)],
                Some(text) => {
                    for tok in text.split_whitespace() {
                        if let Some(r) = index(tok) {
                            rhs[i].push(Token::Reg(r));
                        } else {
                            let mut chars = tok.chars();
                            match (chars.next(), chars.next()) {
                                (Some(c), None) => rhs[i].push(Token::Letter(c)),
                                _ => return Err(SstError::Parse(tok.to_string())),
                            }
                        }
                    }
                }
            }
        }
        if let Some(k) = updates.keys().find(|k| index(k).is_none()) {
            return Err(SstError::Parse(k.clone()));
        }
        Ok(Self { rhs })
    }

    pub fn registers(&self) -> usize {
        self.rhs.len()
    }

    pub fn get(&self, x: usize) -> &[Token] {
        &self.rhs[x]
    }

    pub fn set(&mut self, x: usize, rhs: Vec<Token>) {
        self.rhs[x] = rhs;
    }

    /// `self ∘ other`: registers in `other(x)` replaced by their `self` image.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let rhs = other
            .rhs
            .iter()
            .map(|w| {
                w.iter()
                    .flat_map(|t| match *t {
                        Token::Letter(c) => vec![Token::Letter(c)],
                        Token::Reg(r) => self.rhs[r].clone(),
                    })
                    .collect()
            })
            .collect();
        Substitution { rhs }
    }

    /// `values ∘ self` for ground register values.
    pub fn ground(&self, values: &[Vec<char>]) -> Vec<Vec<char>> {
        self.rhs.iter().map(|w| ground(w, values)).collect()
    }

    /// The registers with [`Token`] strings rendered using `names`.
    pub fn render(&self, names: &[String]) -> BTreeMap<String, String> {
        names
            .iter()
            .zip(&self.rhs)
            .map(|(n, w)| (n.clone(), render_tokens(w, names)))
            .collect()
    }
}

fn ground(w: &[Token], values: &[Vec<char>]) -> Vec<char> {
    let mut out = Vec::new();
    for t in w {
        match *t {
            Token::Letter(c) => out.push(c),
            Token::Reg(r) => out.extend_from_slice(&values[r]),
        }
    }
    out
}

pub fn render_tokens(w: &[Token], names: &[String]) -> String {
    w.iter()
        .map(|t| match *t {
            Token::Letter(c) => c.to_string(),
            Token::Reg(r) => names[r].clone(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// First register occurring twice across all right-hand sides.
pub fn validate_copyless(s: &Substitution) -> Result<(), CopylessViolation> {
    let mut seen: HashMap<usize, Site> = HashMap::new();
    for (lhs, w) in s.rhs.iter().enumerate() {
        for (index, t) in w.iter().enumerate() {
            if let Token::Reg(r) = *t {
                let site = Site { lhs, index };
                if let Some(&first) = seen.get(&r) {
                    return Err(CopylessViolation {
                        register: r,
                        first,
                        second: site,
                    });
                }
                seen.insert(r, site);
            }
        }
    }
    Ok(())
}

/// Deterministic SST with a partial output function on sets of states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sst {
    states: usize,
    initial: usize,
    input_alphabet: BTreeSet<char>,
    output_alphabet: BTreeSet<char>,
    registers: Vec<String>,
    transitions: BTreeMap<(usize, char), (usize, Substitution)>,
    output_function: BTreeMap<BTreeSet<usize>, Vec<usize>>,
}

impl Sst {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        states: usize,
        initial: usize,
        input_alphabet: impl IntoIterator<Item = char>,
        output_alphabet: impl IntoIterator<Item = char>,
        registers: Vec<String>,
        transitions: impl IntoIterator<Item = (usize, char, Substitution, usize)>,
        output_function: impl IntoIterator<Item = (BTreeSet<usize>, Vec<usize>)>,
    ) -> Result<Self, SstError> {
        let input_alphabet: BTreeSet<char> = input_alphabet.into_iter().collect();
        let output_alphabet: BTreeSet<char> = output_alphabet.into_iter().collect();
        if initial >= states {
            return Err(SstError::InvalidState(initial));
        }
        let mut names = BTreeSet::new();
        if let Some(dup) = registers.iter().find(|r| !names.insert(r.as_str())) {
            return Err(SstError::DuplicateRegister(dup.clone()));
        }
        let mut map = BTreeMap::new();
        for (p, a, sub, q) in transitions {
            if p >= states || q >= states {
                return Err(SstError::InvalidState(p.max(q)));
            }
            if !input_alphabet.contains(&a) {
                return Err(SstError::AlphabetMismatch(a));
            }
            if sub.registers() != registers.len() {
                return Err(SstError::InvalidRegister(sub.registers()));
            }
            validate_copyless(&sub).map_err(SstError::NotCopyless)?;
            if let Some(c) = sub.rhs.iter().flatten().find_map(|t| match t {
                Token::Letter(c) if !output_alphabet.contains(c) => Some(*c),
                _ => None,
            }) {
                return Err(SstError::AlphabetMismatch(c));
            }
            if map.insert((p, a), (q, sub)).is_some() {
                return Err(SstError::NotDeterministic(p, a));
            }
        }
        let sst = Self {
            states,
            initial,
            input_alphabet,
            output_alphabet,
            registers,
            transitions: map,
            output_function: output_function.into_iter().collect(),
        };
        for (set, regs) in &sst.output_function {
            sst.check_output_constraint(set, regs)?;
        }
        Ok(sst)
    }

    fn check_output_constraint(
        &self,
        set: &BTreeSet<usize>,
        regs: &[usize],
    ) -> Result<(), SstError> {
        let err = |m: String| Err(SstError::OutputConstraint(m));
        if let Some(&r) = regs.iter().find(|&&r| r >= self.registers.len()) {
            return Err(SstError::InvalidRegister(r));
        }
        if regs.iter().collect::<BTreeSet<_>>().len() != regs.len() {
            return err(format!("output {regs:?} repeats a register"));
        }
        let Some((&last, fixed)) = regs.split_last() else {
            return Ok(());
        };
        for (&(p, a), (q, sub)) in &self.transitions {
            if !set.contains(&p) || !set.contains(q) {
                continue;
            }
            if let Some(&x) = fixed.iter().find(|&&x| sub.get(x) != [Token::Reg(x)]) {
                return err(format!(
                    "register {} is updated on ({p}, {a:?})",
                    self.registers[x]
                ));
            }
            if sub.get(last).first() != Some(&Token::Reg(last)) {
                return err(format!(
                    "register {} is not appended to on ({p}, {a:?})",
                    self.registers[last]
                ));
            }
        }
        Ok(())
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

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r == name)
    }

    /// `(from, letter, update, to)`.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, char, &Substitution, usize)> + '_ {
        self.transitions
            .iter()
            .map(|(&(p, a), (q, s))| (p, a, s, *q))
    }

    pub fn step(&self, q: usize, a: char) -> Option<(usize, &Substitution)> {
        self.transitions.get(&(q, a)).map(|(to, s)| (*to, s))
    }

    pub fn output_function(&self) -> &BTreeMap<BTreeSet<usize>, Vec<usize>> {
        &self.output_function
    }

    /// The underlying automaton, completed with a sink.
    pub fn automaton(&self) -> Dfa<char> {
        let sink = self.states;
        let mut t: Vec<(usize, char, usize)> =
            self.transitions().map(|(p, a, _, q)| (p, a, q)).collect();
        for q in 0..=self.states {
            for &a in &self.input_alphabet {
                if q == sink || self.step(q, a).is_none() {
                    t.push((q, a, sink));
                }
            }
        }
        Dfa::new(
            self.states + 1,
            self.initial,
            [],
            self.input_alphabet.iter().copied(),
            t,
        )
        .expect("complete")
    }
}

/// An SST whose output is the limit of a distinguished register `out`
/// that is only ever appended to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleSst {
    sst: Sst,
    out: usize,
}

impl SimpleSst {
    pub fn new(sst: Sst, out: usize) -> Result<Self, SstError> {
        if out >= sst.registers.len() {
            return Err(SstError::InvalidRegister(out));
        }
        for (p, a, sub, _) in sst.transitions() {
            if sub.get(out).first() != Some(&Token::Reg(out)) {
                return Err(SstError::MalformedSimpleSst(format!(
                    "update of out on ({p}, {a:?}) does not start with out"
                )));
            }
            let mentions = sub
                .rhs
                .iter()
                .enumerate()
                .any(|(x, w)| x != out && w.contains(&Token::Reg(out)));
            if mentions {
                return Err(SstError::MalformedSimpleSst(format!(
                    "a register other than out uses out on ({p}, {a:?})"
                )));
            }
        }
        Ok(Self { sst, out })
    }

    /// Builds from named registers; `out` names the output register.
    pub fn from_named(sst: Sst, out: &str) -> Result<Self, SstError> {
        let r = sst
            .register(out)
            .ok_or_else(|| SstError::MalformedSimpleSst(format!("no register {out:?}")))?;
        Self::new(sst, r)
    }

    pub fn sst(&self) -> &Sst {
        &self.sst
    }

    pub fn out(&self) -> usize {
        self.out
    }

    /// What the update appends to `out`.
    fn increment<'a>(&self, sub: &'a Substitution) -> &'a [Token] {
        &sub.get(self.out)[1..]
    }
}

/// Letters of an SST run, produced on demand.
#[derive(Debug, Clone)]
pub struct SstOutcome {
    sst: Sst,
    input: InfiniteWord<char>,
    budget: usize,
    state: usize,
    position: usize,
    values: Vec<Vec<char>>,
    /// Register whose appended suffixes are streamed.
    appended: usize,
    output: Vec<char>,
    /// Output length after which only `□` follows.
    finite: Option<usize>,
    failed: Option<SstError>,
}

impl SstOutcome {
    fn advance(&mut self) -> Result<(), SstError> {
        let a = self.input.get(self.position)?;
        let (to, sub) = self
            .sst
            .step(self.state, a)
            .ok_or(SstError::UndefinedTransition {
                position: self.position,
            })?;
        let increment = &sub.get(self.appended)[1..];
        self.output.extend(ground(increment, &self.values));
        self.values = sub.ground(&self.values);
        self.state = to;
        self.position += 1;
        Ok(())
    }

    pub fn get(&mut self, n: usize) -> Result<char, SstError> {
        let mut spent = 0;
        loop {
            if n < self.output.len() {
                return Ok(self.output[n]);
            }
            if self.finite.is_some() {
                return Ok(PAD);
            }
            if let Some(e) = &self.failed {
                return Err(e.clone());
            }
            if spent >= self.budget {
                return Err(SstError::BudgetExceeded {
                    steps: self.position,
                });
            }
            if let Err(e) = self.advance() {
                self.failed = Some(e.clone());
                return Err(e);
            }
            spent += 1;
        }
    }

    pub fn prefix(&mut self, n: usize) -> Result<Vec<char>, SstError> {
        (0..n).map(|i| self.get(i)).collect()
    }

    pub fn prefix_string(&mut self, n: usize) -> Result<String, SstError> {
        Ok(self.prefix(n)?.into_iter().collect())
    }

    /// Letters produced so far.
    pub fn produced(&self) -> &[char] {
        &self.output
    }

    /// Register values after the letters read so far.
    pub fn registers(&self) -> &[Vec<char>] {
        &self.values
    }

    pub fn into_word(mut self) -> InfiniteWord<char> {
        let mut index = 0;
        InfiniteWord::from_stream(
            "sst output",
            std::iter::from_fn(move || {
                let r = self.get(index).map_err(|e| WordError::Source {
                    index,
                    message: e.to_string(),
                });
                index += 1;
                Some(r)
            }),
        )
    }
}

/// Streams the increments of `out`.
pub fn run_simple_sst(s: &SimpleSst, input: &InfiniteWord<char>, budget: usize) -> SstOutcome {
    SstOutcome {
        sst: s.sst.clone(),
        input: input.clone(),
        budget,
        state: s.sst.initial,
        position: 0,
        values: vec![Vec::new(); s.sst.registers.len()],
        appended: s.out,
        output: Vec::new(),
        finite: None,
        failed: None,
    }
}

/// The state sequence of `s` on a lasso: `(k, states)` where every state
/// after position `k` lies in `states`, and `period` such that the pair
/// (state, input position) at `k + period` folds onto the one at `k`.
struct Recurrence {
    entry: usize,
    period: usize,
    states: BTreeSet<usize>,
}

fn recurrence(s: &Sst, w: &LassoWord<char>) -> Result<Recurrence, SstError> {
    let (u, v) = (w.prefix().len(), w.period().len());
    let mut q = s.initial;
    let mut sequence = Vec::new();
    let mut boundary: HashMap<usize, usize> = HashMap::new();
    for k in 0.. {
        if k >= u && (k - u) % v == 0 {
            if let Some(&start) = boundary.get(&q) {
                let states = sequence[start..].iter().copied().collect();
                return Ok(Recurrence {
                    entry: start,
                    period: k - start,
                    states,
                });
            }
            boundary.insert(q, k);
        }
        sequence.push(q);
        q = s
            .step(q, *w.letter(k))
            .ok_or(SstError::UndefinedTransition { position: k })?
            .0;
    }
    unreachable!()
}

/// Runs a general SST on a lasso input. The recurrent state set `P`
/// selects the output `F(P) = x_1 ⋯ x_n`; its value is streamed as
/// `σ_K(x_1 ⋯ x_n)` followed by what later steps append to `x_n`. A
/// finite limit is padded with `□`.
pub fn run_sst(s: &Sst, input: &InfiniteWord<char>, budget: usize) -> Result<SstOutcome, SstError> {
    let w = input.to_lasso().ok_or(SstError::AdviceNotLasso)?;
    let rec = recurrence(s, &w)?;
    let regs = s
        .output_function
        .get(&rec.states)
        .ok_or_else(|| SstError::NoOutputFunction(rec.states.iter().copied().collect()))?
        .clone();
    let mut outcome = SstOutcome {
        sst: s.clone(),
        input: input.clone(),
        budget,
        state: s.initial,
        position: 0,
        values: vec![Vec::new(); s.registers.len()],
        appended: regs.last().copied().unwrap_or(0),
        output: Vec::new(),
        finite: None,
        failed: None,
    };
    for _ in 0..rec.entry {
        let a = *w.letter(outcome.position);
        let (to, sub) = s.step(outcome.state, a).expect("checked by recurrence");
        outcome.values = sub.ground(&outcome.values);
        outcome.state = to;
        outcome.position += 1;
    }
    outcome.output = regs
        .iter()
        .flat_map(|&r| outcome.values[r].clone())
        .collect();
    if regs.is_empty() {
        outcome.finite = Some(0);
        return Ok(outcome);
    }
    // which registers are nonempty evolves in a finite system; the limit is
    // finite iff nothing is appended along its cycle
    let mut probe = outcome.clone();
    let mut seen: HashMap<((usize, usize), Vec<bool>), usize> = HashMap::new();
    let mut grew = Vec::new();
    loop {
        let phase = ((probe.position - rec.entry) % rec.period, probe.state);
        let nonempty: Vec<bool> = probe.values.iter().map(|v| !v.is_empty()).collect();
        let before = probe.output.len();
        if let Some(&start) = seen.get(&(phase, nonempty.clone())) {
            if !grew[start..].iter().any(|&g| g) {
                // everything appended before the cycle is part of the limit
                probe.finite = Some(probe.output.len());
                probe.values.iter_mut().for_each(Vec::clear);
                return Ok(probe);
            }
            return Ok(outcome);
        }
        seen.insert((phase, nonempty), grew.len());
        probe.advance()?;
        grew.push(probe.output.len() > before);
    }
}

/// A simple SST with the same output as `s` on `input`, built from the
/// frozen register values at the step from which the run stays in its
/// recurrent states.
pub fn simplify_to_simple_sst(s: &Sst, input: &LassoWord<char>) -> Result<SimpleSst, SstError> {
    let word = InfiniteWord::from(input.clone());
    let mut run = run_sst(s, &word, DEFAULT_BUDGET)?;
    let rec = recurrence(s, input)?;
    let regs = s.output_function[&rec.states].clone();
    let n = s.registers.len();
    let out = n;
    let mut names = s.registers.clone();
    let mut out_name = "out".to_string();
    while names.contains(&out_name) {
        out_name.push('\'');
    }
    names.push(out_name);
    let mut outputs = s.output_alphabet.clone();

    // replay the prologue to get σ_K
    let mut values = vec![Vec::new(); n];
    let mut q = s.initial;
    let finite = run_finite(&mut run);
    let line = match finite {
        Some(_) => run.position,
        None => rec.entry,
    };
    for k in 0..line {
        let (to, sub) = s.step(q, *input.letter(k)).expect("defined");
        values = sub.ground(&values);
        q = to;
    }
    let opening: Vec<char> = match &finite {
        Some(w) => w.clone(),
        None => regs.iter().flat_map(|&r| values[r].clone()).collect(),
    };

    let line_state = |k: usize| s.states + k;
    let states = s.states + line;
    let initial = if line == 0 { q } else { line_state(0) };
    let mut transitions = Vec::new();
    for k in 0..line {
        let to = if k + 1 == line { q } else { line_state(k + 1) };
        let sub = if k + 1 == line {
            let mut ground: Vec<Vec<char>> = values.clone();
            ground.push(Vec::new());
            let mut sub = Substitution::constant(&ground);
            sub.set(
                out,
                std::iter::once(Token::Reg(out))
                    .chain(opening.iter().map(|&c| Token::Letter(c)))
                    .collect(),
            );
            sub
        } else {
            Substitution::identity(n + 1)
        };
        transitions.push((line_state(k), *input.letter(k), sub, to));
    }
    if line == 0 && !opening.is_empty() {
        return Err(SstError::MalformedSimpleSst(
            "output before the first letter".into(),
        ));
    }
    for (p, a, sub, to) in s.transitions() {
        if !(rec.states.contains(&p) && rec.states.contains(&to)) {
            continue;
        }
        let mut rhs: Vec<Vec<Token>> = sub.rhs.clone();
        let appended = match (&finite, regs.last()) {
            (None, Some(&last)) => {
                std::mem::replace(&mut rhs[last], vec![Token::Reg(last)]).split_off(1)
            }
            _ => vec![Token::Letter(PAD)],
        };
        rhs.push(std::iter::once(Token::Reg(out)).chain(appended).collect());
        transitions.push((p, a, Substitution { rhs }, to));
    }
    if finite.is_some() {
        outputs.insert(PAD);
    }
    let sst = Sst::new(
        states,
        initial,
        s.input_alphabet.clone(),
        outputs,
        names,
        transitions,
        [],
    )?;
    SimpleSst::new(sst, out)
}

/// The whole output when it is finite, with `run` left at the step where
/// it is complete.
fn run_finite(run: &mut SstOutcome) -> Option<Vec<char>> {
    run.finite.map(|n| run.output[..n].to_vec())
}

/// States of the machine compiled from a simple SST.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Start,
    /// Arrived from the left: emit what `out` gets appended here.
    Main,
    /// Arrived from the right to produce the value of a register here.
    Enter(usize),
    /// Arrived from the left after producing a register one cell back.
    Return(usize),
}

/// A two-way transducer with lookbehind producing the output of `s`.
///
/// The lookbehind is the automaton of `s`, so on the cell holding `β[k]`
/// the machine knows the update applied there. Values of registers are
/// produced recursively by walking left; walking back right, the unique
/// occurrence of the finished register in the updates recovers which
/// register to continue with. Letters are emitted without moving, so a
/// state only keeps the current register and what to do on arrival.
pub fn compile_sst_to_2wftb(s: &SimpleSst) -> Result<LookbehindTransducer, SstError> {
    let sst = &s.sst;
    let n = sst.registers.len();
    let modes: Vec<Mode> = [Mode::Start, Mode::Main]
        .into_iter()
        .chain((0..n).map(Mode::Enter))
        .chain((0..n).map(Mode::Return))
        .collect();
    let index = |m: Mode| modes.iter().position(|&x| x == m).expect("listed");
    let oracle = sst.automaton();

    // emit letters of `process` until a register or the end
    let run = |reg: usize, process: &[Token]| -> (Vec<char>, Mode, Move) {
        let mut out = Vec::new();
        for t in process {
            match *t {
                Token::Letter(c) => out.push(c),
                Token::Reg(x) => return (out, Mode::Enter(x), Move::Left),
            }
        }
        if reg == s.out {
            (out, Mode::Main, Move::Right)
        } else {
            (out, Mode::Return(reg), Move::Right)
        }
    };

    let mut transitions = vec![(
        index(Mode::Start),
        TapeSymbol::EndMarker,
        oracle.initial(),
        Action::new("", Move::Right, index(Mode::Main)),
    )];
    for x in 0..n {
        if x == s.out {
            continue;
        }
        for lb in 0..oracle.states() {
            transitions.push((
                index(Mode::Enter(x)),
                TapeSymbol::EndMarker,
                lb,
                Action::new("", Move::Right, index(Mode::Return(x))),
            ));
        }
    }
    for (p, a, sub, _) in sst.transitions() {
        let sym = TapeSymbol::Letter(a);
        let mut push = |mode: Mode, (output, next, direction): (Vec<char>, Mode, Move)| {
            transitions.push((
                index(mode),
                sym,
                p,
                Action {
                    output,
                    direction,
                    to: index(next),
                },
            ));
        };
        push(Mode::Main, run(s.out, s.increment(sub)));
        for x in 0..n {
            if x != s.out {
                push(Mode::Enter(x), run(x, sub.get(x)));
            }
            let site = (0..n).find_map(|y| {
                sub.get(y)
                    .iter()
                    .position(|&t| t == Token::Reg(x))
                    .map(|i| (y, i))
            });
            if let Some((y, i)) = site {
                if y == s.out && i == 0 {
                    continue;
                }
                push(Mode::Return(x), run(y, &sub.get(y)[i + 1..]));
            }
        }
    }
    // the initial lookbehind state sees ⊢ only in Start and Enter
    Ok(LookbehindTransducer::new(
        modes.len(),
        index(Mode::Start),
        sst.input_alphabet.iter().copied(),
        sst.output_alphabet.iter().copied(),
        true,
        oracle,
        transitions,
    )?)
}

const VALIDATION_LETTERS: usize = 500;

/// A two-way transducer without lookbehind producing the same output as
/// `t` on the lasso `input`.
///
/// The lookbehind states along the input are eventually periodic, say
/// from index `ℓ` with period `p`. Once the head of `t` stays right of
/// the cells whose lookbehind is transient, the state of `t` is paired
/// with the position modulo `p`; the run before is hardcoded.
pub fn eliminate_lookbehind_lasso(
    t: &LookbehindTransducer,
    input: &LassoWord<char>,
    budget: usize,
) -> Result<TwoWayTransducer, SstError> {
    let oracle = t.oracle();
    let (ell, p, table) = lookbehind_lasso(oracle, input)?;
    let first = usize::from(t.has_endmarker());
    let threshold = ell + first;
    let word = InfiniteWord::from(input.clone());

    let mut sim = Simulator::lookbehind(t, &word);
    let mut output = Vec::new();
    let mut last: Option<(usize, Vec<char>, usize, usize)> = None;
    let mut halted = None;
    for _ in 0..budget {
        let record = match sim.step() {
            Ok(r) => r,
            Err(e) => {
                halted = Some(e);
                break;
            }
        };
        output.extend_from_slice(&record.output);
        if record.position < threshold {
            last = Some((record.step, output.clone(), sim.state(), sim.position()));
        }
    }
    if let Some((n0, ..)) = &last {
        if *n0 > budget / 2 {
            let mut outcome = run_2wft_b(t, &word, budget);
            let _ = outcome.get(budget.min(DEFAULT_BUDGET));
            return Err(TransducerError::BudgetExceeded {
                budget,
                report: outcome.loop_report().cloned(),
            }
            .into());
        }
    }

    let phase_of = |pos: usize| (pos - threshold) % p;
    let (hardcoded, resume, resume_pos) = match &last {
        Some((_, out, q, pos)) => (out.clone(), *q, *pos),
        None => (Vec::new(), t.initial(), 0),
    };
    let walk = if last.is_some() { resume_pos } else { 0 };
    let control = |q: usize, phase: usize| walk + q * p + phase;
    let letters: Vec<char> = t.input_alphabet().iter().copied().collect();
    let mut transitions = Vec::new();
    if resume_pos < threshold {
        let status = halted.expect("a running head ends right of the threshold");
        return Err(TransducerError::Run(status).into());
    }
    let resume_state = control(resume, phase_of(resume_pos));
    for i in 0..walk {
        let to = if i + 1 == walk { resume_state } else { i + 1 };
        let output = if i == 0 {
            hardcoded.clone()
        } else {
            Vec::new()
        };
        let action = Action {
            output,
            direction: Move::Right,
            to,
        };
        if i == 0 && t.has_endmarker() {
            transitions.push((i, TapeSymbol::EndMarker, action));
        } else {
            for &a in &letters {
                transitions.push((i, TapeSymbol::Letter(a), action.clone()));
            }
        }
    }
    for q in 0..t.states() {
        for phase in 0..p {
            let lb = table[phase];
            for &a in &letters {
                let Some(action) = t.action(q, TapeSymbol::Letter(a), lb) else {
                    continue;
                };
                let next = match action.direction {
                    Move::Right => (phase + 1) % p,
                    Move::Left => (phase + p - 1) % p,
                };
                transitions.push((
                    control(q, phase),
                    TapeSymbol::Letter(a),
                    Action {
                        output: action.output.clone(),
                        direction: action.direction,
                        to: control(action.to, next),
                    },
                ));
            }
        }
    }
    let initial = if walk > 0 { 0 } else { control(t.initial(), 0) };
    let result = TwoWayTransducer::new(
        walk + t.states() * p,
        initial,
        letters.iter().copied(),
        t.output_alphabet().iter().copied(),
        t.has_endmarker(),
        transitions,
    )?;

    let mut original = run_2wft_b(t, &word, DEFAULT_BUDGET);
    let mut converted = run_2wft(&result, &word, DEFAULT_BUDGET);
    compare(&mut original, &mut converted, VALIDATION_LETTERS)?;
    Ok(result)
}

fn compare(a: &mut RunOutcome, b: &mut RunOutcome, n: usize) -> Result<(), SstError> {
    for i in 0..n {
        match (a.get(i), b.get(i)) {
            (Ok(x), Ok(y)) if x == y => {}
            (Err(_), Err(_)) => break,
            _ => return Err(TransducerError::ValidationFailed(i).into()),
        }
    }
    Ok(())
}

/// `(ℓ, p, table)` with `s_{n+p} = s_n` for `n ≥ ℓ`, both minimal, where
/// `s_n` is the oracle state after `n` letters; `table[i] = s_{ℓ+i}`.
pub fn lookbehind_lasso(
    oracle: &Dfa<char>,
    w: &LassoWord<char>,
) -> Result<(usize, usize, Vec<usize>), SstError> {
    let (u, v) = (w.prefix().len(), w.period().len());
    let mut boundary: HashMap<usize, usize> = HashMap::new();
    let mut seq = vec![oracle.initial()];
    let (start, period) = loop {
        let k = seq.len() - 1;
        if k >= u && (k - u) % v == 0 {
            if let Some(&i) = boundary.get(&seq[k]) {
                break (i, k - i);
            }
            boundary.insert(seq[k], k);
        }
        let a = *w.letter(k);
        let s = oracle
            .step(seq[k], &a)
            .ok_or(SstError::AlphabetMismatch(a))?;
        seq.push(s);
    };
    for _ in 0..period {
        let k = seq.len() - 1;
        seq.push(oracle.step(seq[k], w.letter(k)).expect("total"));
    }
    let p = (1..=period)
        .filter(|d| period % d == 0)
        .find(|&d| (start..start + period).all(|n| seq[n] == seq[n + d]))
        .expect("period itself works");
    let mut ell = start;
    while ell > 0 && seq[ell - 1] == seq[ell - 1 + p] {
        ell -= 1;
    }
    Ok((ell, p, seq[ell..ell + p].to_vec()))
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn sub(registers: &[String], updates: &[(&str, &str)]) -> Substitution {
    let map = updates
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    Substitution::parse(registers, &map).expect("well-formed update")
}

/// One state reversing each `#`-terminated block: a letter is prepended to
/// `x`, and `#` appends `x` and the separator to `out`.
pub fn mirror_sst(gamma: &[char]) -> SimpleSst {
    let regs = names(&["x", "out"]);
    let mut t = vec![(
        0,
        SEPARATOR,
        sub(&regs, &[("x", ""), ("out", "out x #")]),
        0,
    )];
    for &a in gamma {
        t.push((0, a, sub(&regs, &[("x", &format!("{a} x"))]), 0));
    }
    let letters = gamma.iter().copied().chain([SEPARATOR]);
    let sst = Sst::new(1, 0, letters.clone(), letters, regs, t, []).expect("well-formed");
    SimpleSst::new(sst, 1).expect("simple")
}

/// Copies its input.
pub fn identity_sst(letters: &[char]) -> SimpleSst {
    let regs = names(&["out"]);
    let t: Vec<_> = letters
        .iter()
        .map(|&a| (0, a, sub(&regs, &[("out", &format!("out {a}"))]), 0))
        .collect();
    let sst = Sst::new(
        1,
        0,
        letters.iter().copied(),
        letters.iter().copied(),
        regs,
        t,
        [],
    )
    .expect("well-formed");
    SimpleSst::new(sst, 0).expect("simple")
}

/// On each `#`-terminated block over `{a, b}`, writes its `a`s, then its
/// `b`s, then `#`.
pub fn interleaver_sst() -> SimpleSst {
    let regs = names(&["x", "y", "out"]);
    let t = vec![
        (0, 'a', sub(&regs, &[("x", "x a")]), 0),
        (0, 'b', sub(&regs, &[("y", "y b")]), 0),
        (
            0,
            '#',
            sub(&regs, &[("x", ""), ("y", ""), ("out", "out x y #")]),
            0,
        ),
    ];
    let sst = Sst::new(1, 0, ['a', 'b', '#'], ['a', 'b', '#'], regs, t, []).expect("well-formed");
    SimpleSst::new(sst, 2).expect("simple")
}

#[cfg(test)]
mod tests;
