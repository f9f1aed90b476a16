//! One-way and two-way finite transducers, with and without lookbehind.
//!
//! Every machine runs through the same demand-driven [`Simulator`]; a
//! [`RunOutcome`] wraps it with an output buffer, a per-letter step budget,
//! visit counts, an optional trace and configuration-repeat detection.

mod constructions;
mod loops;
mod pi;
pub mod samples;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::advice::Dfa;
use crate::words::{InfiniteWord, WordError};

pub use constructions::{
    compose_1wft, mirror_blocks_2wft, mu_transducers, pi_k_expander_1wft, writer_2wft,
};
pub use loops::{analyze_on_constant, remove_endmarker, visit_bound_check, LoopReport};
pub use pi::{
    direction_partition, is_direction_normalized, normalize_directions_on_pi,
    one_way_simulation_on_pi, OneWaySimulation,
};

pub const DEFAULT_BUDGET: usize = 100_000;
pub const DEFAULT_VISIT_WINDOW: usize = 4096;
const CONFIG_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TapeSymbol {
    EndMarker,
    Letter(char),
}

impl fmt::Display for TapeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TapeSymbol::EndMarker => write!(f, "⊢"),
            TapeSymbol::Letter(c) => write!(f, "{}", crate::words::display_letter(*c)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Move {
    Left,
    Right,
}

impl Move {
    pub fn reverse(self) -> Self {
        match self {
            Move::Left => Move::Right,
            Move::Right => Move::Left,
        }
    }
}

/// Output and head move of one transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub output: Vec<char>,
    pub direction: Move,
    pub to: usize,
}

impl Action {
    pub fn new(output: &str, direction: Move, to: usize) -> Self {
        Self {
            output: output.chars().collect(),
            direction,
            to,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransducerError {
    #[error("state {0} out of range")]
    InvalidState(usize),
    #[error("letter {0:?} is not in the machine alphabet")]
    AlphabetMismatch(char),
    #[error("two transitions for the same configuration")]
    NotDeterministic,
    #[error("the endmarker is reserved")]
    EndMarkerInAlphabet,
    #[error("lookbehind automaton is not total on the input alphabet")]
    OracleNotTotal,
    #[error("run failed: {0}")]
    Run(RunStatus),
    #[error("no loop found within {budget} steps")]
    BudgetExceeded {
        budget: usize,
        report: Option<LoopReport>,
    },
    #[error("the output is finite: {}", crate::words::render(prefix))]
    NonProductive { prefix: Vec<char> },
    #[error("outputs differ at letter {0}")]
    ValidationFailed(usize),
    #[error("block classification is unstable: {0}")]
    UnstableClassification(String),
    #[error("no window bound up to {cap} (needed {needed})")]
    NoWindowBound { needed: usize, cap: usize },
    #[error("state {0} reverses direction on 0")]
    NotDirectionNormalized(usize),
    #[error("segments of the run are inconsistent: {0}")]
    InconsistentSegments(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Deterministic one-way transducer emitting a string per input letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneWayTransducer {
    states: usize,
    initial: usize,
    input_alphabet: BTreeSet<char>,
    output_alphabet: BTreeSet<char>,
    transitions: BTreeMap<(usize, char), (Vec<char>, usize)>,
}

impl OneWayTransducer {
    /// Transitions are `(from, input, output, to)`.
    pub fn new(
        states: usize,
        initial: usize,
        input_alphabet: impl IntoIterator<Item = char>,
        output_alphabet: impl IntoIterator<Item = char>,
        transitions: impl IntoIterator<Item = (usize, char, Vec<char>, usize)>,
    ) -> Result<Self, TransducerError> {
        let input_alphabet: BTreeSet<char> = input_alphabet.into_iter().collect();
        let output_alphabet: BTreeSet<char> = output_alphabet.into_iter().collect();
        if initial >= states {
            return Err(TransducerError::InvalidState(initial));
        }
        let mut map = BTreeMap::new();
        for (p, a, w, q) in transitions {
            if p >= states || q >= states {
                return Err(TransducerError::InvalidState(p.max(q)));
            }
            if !input_alphabet.contains(&a) {
                return Err(TransducerError::AlphabetMismatch(a));
            }
            if let Some(&c) = w.iter().find(|c| !output_alphabet.contains(c)) {
                return Err(TransducerError::AlphabetMismatch(c));
            }
            if map.insert((p, a), (w, q)).is_some() {
                return Err(TransducerError::NotDeterministic);
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

    pub fn transitions(&self) -> impl Iterator<Item = (usize, char, &[char], usize)> + '_ {
        self.transitions
            .iter()
            .map(|(&(p, a), (w, q))| (p, a, w.as_slice(), *q))
    }

    pub fn step(&self, q: usize, a: char) -> Option<(&[char], usize)> {
        self.transitions
            .get(&(q, a))
            .map(|(w, q)| (w.as_slice(), *q))
    }

    /// The same machine as a two-way transducer that always moves right on
    /// a tape without endmarker.
    pub fn to_two_way(&self) -> TwoWayTransducer {
        TwoWayTransducer {
            states: self.states,
            initial: self.initial,
            input_alphabet: self.input_alphabet.clone(),
            output_alphabet: self.output_alphabet.clone(),
            endmarker: false,
            transitions: self
                .transitions
                .iter()
                .map(|(&(p, a), (w, q))| {
                    (
                        (p, TapeSymbol::Letter(a)),
                        Action {
                            output: w.clone(),
                            direction: Move::Right,
                            to: *q,
                        },
                    )
                })
                .collect(),
        }
    }
}

impl From<&crate::mealy::MealyMachine> for OneWayTransducer {
    fn from(m: &crate::mealy::MealyMachine) -> Self {
        let t: Vec<_> = m
            .transitions()
            .map(|(p, a, b, q)| (p, a, vec![b], q))
            .collect();
        Self::new(
            m.states(),
            m.initial(),
            m.input_alphabet().clone(),
            m.output_alphabet().clone(),
            t,
        )
        .expect("a Mealy machine is a one-way transducer")
    }
}

/// Deterministic two-way transducer. On a tape with endmarker the head
/// starts on `⊢` at position 0 and letter `β[i]` sits at position `i + 1`;
/// without endmarker `β[i]` sits at position `i` and the head starts there
/// at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoWayTransducer {
    states: usize,
    initial: usize,
    input_alphabet: BTreeSet<char>,
    output_alphabet: BTreeSet<char>,
    endmarker: bool,
    transitions: BTreeMap<(usize, TapeSymbol), Action>,
}

fn check_action(
    states: usize,
    output_alphabet: &BTreeSet<char>,
    from: usize,
    action: &Action,
) -> Result<(), TransducerError> {
    if from >= states || action.to >= states {
        return Err(TransducerError::InvalidState(from.max(action.to)));
    }
    if let Some(&c) = action.output.iter().find(|c| !output_alphabet.contains(c)) {
        return Err(TransducerError::AlphabetMismatch(c));
    }
    Ok(())
}

fn check_symbol(
    input_alphabet: &BTreeSet<char>,
    endmarker: bool,
    sym: TapeSymbol,
) -> Result<(), TransducerError> {
    match sym {
        TapeSymbol::EndMarker if !endmarker => Err(TransducerError::EndMarkerInAlphabet),
        TapeSymbol::Letter(a) if !input_alphabet.contains(&a) => {
            Err(TransducerError::AlphabetMismatch(a))
        }
        _ => Ok(()),
    }
}

impl TwoWayTransducer {
    pub fn new(
        states: usize,
        initial: usize,
        input_alphabet: impl IntoIterator<Item = char>,
        output_alphabet: impl IntoIterator<Item = char>,
        endmarker: bool,
        transitions: impl IntoIterator<Item = (usize, TapeSymbol, Action)>,
    ) -> Result<Self, TransducerError> {
        let input_alphabet: BTreeSet<char> = input_alphabet.into_iter().collect();
        let output_alphabet: BTreeSet<char> = output_alphabet.into_iter().collect();
        if initial >= states {
            return Err(TransducerError::InvalidState(initial));
        }
        let mut map = BTreeMap::new();
        for (p, sym, action) in transitions {
            check_action(states, &output_alphabet, p, &action)?;
            check_symbol(&input_alphabet, endmarker, sym)?;
            if map.insert((p, sym), action).is_some() {
                return Err(TransducerError::NotDeterministic);
            }
        }
        Ok(Self {
            states,
            initial,
            input_alphabet,
            output_alphabet,
            endmarker,
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

    pub fn has_endmarker(&self) -> bool {
        self.endmarker
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, TapeSymbol, &Action)> + '_ {
        self.transitions.iter().map(|(&(p, s), a)| (p, s, a))
    }

    pub fn action(&self, q: usize, sym: TapeSymbol) -> Option<&Action> {
        self.transitions.get(&(q, sym))
    }

    /// A random machine over `input` (with endmarker) defined on every
    /// configuration; on `⊢` it always moves right.
    pub fn random<R: Rng>(
        rng: &mut R,
        states: usize,
        input: &[char],
        output: &[char],
        max_out: usize,
    ) -> Self {
        let mut t = Vec::new();
        for p in 0..states {
            for sym in std::iter::once(TapeSymbol::EndMarker)
                .chain(input.iter().map(|&a| TapeSymbol::Letter(a)))
            {
                let len = rng.gen_range(0..=max_out);
                let w: String = (0..len)
                    .map(|_| output[rng.gen_range(0..output.len())])
                    .collect();
                let direction = if sym == TapeSymbol::EndMarker || rng.gen_bool(0.6) {
                    Move::Right
                } else {
                    Move::Left
                };
                t.push((p, sym, Action::new(&w, direction, rng.gen_range(0..states))));
            }
        }
        Self::new(
            states,
            0,
            input.iter().copied(),
            output.iter().copied(),
            true,
            t,
        )
        .expect("well-formed")
    }
}

/// A two-way transducer whose transitions also depend on the state of a
/// lookbehind automaton after the input letters left of the head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookbehindTransducer {
    states: usize,
    initial: usize,
    input_alphabet: BTreeSet<char>,
    output_alphabet: BTreeSet<char>,
    endmarker: bool,
    oracle: Dfa<char>,
    transitions: BTreeMap<(usize, TapeSymbol, usize), Action>,
}

impl LookbehindTransducer {
    /// Transitions are `(from, symbol, lookbehind state, action)`.
    pub fn new(
        states: usize,
        initial: usize,
        input_alphabet: impl IntoIterator<Item = char>,
        output_alphabet: impl IntoIterator<Item = char>,
        endmarker: bool,
        oracle: Dfa<char>,
        transitions: impl IntoIterator<Item = (usize, TapeSymbol, usize, Action)>,
    ) -> Result<Self, TransducerError> {
        let input_alphabet: BTreeSet<char> = input_alphabet.into_iter().collect();
        let output_alphabet: BTreeSet<char> = output_alphabet.into_iter().collect();
        if initial >= states {
            return Err(TransducerError::InvalidState(initial));
        }
        if !(0..oracle.states()).all(|s| input_alphabet.iter().all(|a| oracle.step(s, a).is_some()))
        {
            return Err(TransducerError::OracleNotTotal);
        }
        let mut map = BTreeMap::new();
        for (p, sym, s, action) in transitions {
            check_action(states, &output_alphabet, p, &action)?;
            check_symbol(&input_alphabet, endmarker, sym)?;
            if s >= oracle.states() {
                return Err(TransducerError::InvalidState(s));
            }
            if map.insert((p, sym, s), action).is_some() {
                return Err(TransducerError::NotDeterministic);
            }
        }
        Ok(Self {
            states,
            initial,
            input_alphabet,
            output_alphabet,
            endmarker,
            oracle,
            transitions: map,
        })
    }

    /// `t` with a lookbehind it ignores.
    pub fn ignoring(t: &TwoWayTransducer, oracle: Dfa<char>) -> Result<Self, TransducerError> {
        let lb = oracle.states();
        let transitions: Vec<_> = t
            .transitions()
            .flat_map(|(p, sym, a)| (0..lb).map(move |s| (p, sym, s, a.clone())))
            .collect();
        Self::new(
            t.states,
            t.initial,
            t.input_alphabet.clone(),
            t.output_alphabet.clone(),
            t.endmarker,
            oracle,
            transitions,
        )
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

    pub fn has_endmarker(&self) -> bool {
        self.endmarker
    }

    pub fn oracle(&self) -> &Dfa<char> {
        &self.oracle
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, TapeSymbol, usize, &Action)> + '_ {
        self.transitions
            .iter()
            .map(|(&(p, sym, s), a)| (p, sym, s, a))
    }

    pub fn action(&self, q: usize, sym: TapeSymbol, s: usize) -> Option<&Action> {
        self.transitions.get(&(q, sym, s))
    }
}

#[derive(Debug, Clone)]
enum Machine {
    TwoWay(Arc<TwoWayTransducer>),
    Lookbehind(Arc<LookbehindTransducer>),
}

/// One executed step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub step: usize,
    pub state: usize,
    pub position: usize,
    pub symbol: TapeSymbol,
    pub lookbehind: Option<usize>,
    pub output: Vec<char>,
    pub direction: Move,
    pub next_state: usize,
}

/// The status of a run after the last request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    Producing,
    UndefinedTransition {
        position: usize,
        step: usize,
        detail: String,
    },
    MovedLeftOfEndmarker {
        step: usize,
    },
    BudgetExceeded {
        step: usize,
    },
    /// The run entered a configuration cycle; every later letter is
    /// `prefix · period^ω`. An empty period means the output is finite.
    LoopDetected {
        prefix: Vec<char>,
        period: Vec<char>,
    },
    InputError(String),
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Producing => write!(f, "producing"),
            RunStatus::UndefinedTransition {
                position,
                step,
                detail,
            } => {
                write!(
                    f,
                    "undefined transition at position {position}, step {step} ({detail})"
                )
            }
            RunStatus::MovedLeftOfEndmarker { step } => {
                write!(f, "moved left of the tape at step {step}")
            }
            RunStatus::BudgetExceeded { step } => write!(f, "step budget exceeded at step {step}"),
            RunStatus::LoopDetected { prefix, period } => {
                write!(
                    f,
                    "loop detected: {}({})^ω",
                    crate::words::render(prefix),
                    crate::words::render(period)
                )
            }
            RunStatus::InputError(e) => write!(f, "input error: {e}"),
        }
    }
}

/// Step-by-step execution of a machine on a fixed input.
#[derive(Debug, Clone)]
pub struct Simulator {
    machine: Machine,
    input: InfiniteWord<char>,
    state: usize,
    position: usize,
    step: usize,
    /// `lookbehind[i]` is the oracle state after reading `β[:i]`.
    lookbehind: Vec<usize>,
}

impl Simulator {
    pub fn two_way(t: &TwoWayTransducer, input: &InfiniteWord<char>) -> Self {
        Self::new(Machine::TwoWay(Arc::new(t.clone())), t.initial, input)
    }

    pub fn lookbehind(t: &LookbehindTransducer, input: &InfiniteWord<char>) -> Self {
        let s0 = t.oracle.initial();
        let mut sim = Self::new(Machine::Lookbehind(Arc::new(t.clone())), t.initial, input);
        sim.lookbehind.push(s0);
        sim
    }

    fn new(machine: Machine, initial: usize, input: &InfiniteWord<char>) -> Self {
        Self {
            machine,
            input: input.clone(),
            state: initial,
            position: 0,
            step: 0,
            lookbehind: Vec::new(),
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn steps(&self) -> usize {
        self.step
    }

    pub fn state_count(&self) -> usize {
        match &self.machine {
            Machine::TwoWay(t) => t.states,
            Machine::Lookbehind(t) => t.states,
        }
    }

    fn endmarker(&self) -> bool {
        match &self.machine {
            Machine::TwoWay(t) => t.endmarker,
            Machine::Lookbehind(t) => t.endmarker,
        }
    }

    /// Input index under tape position `pos`, `None` on the endmarker.
    fn input_index(&self, pos: usize) -> Option<usize> {
        if self.endmarker() {
            pos.checked_sub(1)
        } else {
            Some(pos)
        }
    }

    pub fn symbol_at(&self, pos: usize) -> Result<TapeSymbol, WordError> {
        match self.input_index(pos) {
            None => Ok(TapeSymbol::EndMarker),
            Some(i) => self.input.get(i).map(TapeSymbol::Letter),
        }
    }

    fn lookbehind_at(&mut self, pos: usize, oracle: &Dfa<char>) -> Result<usize, WordError> {
        let n = self.input_index(pos).unwrap_or(0);
        while self.lookbehind.len() <= n {
            let i = self.lookbehind.len() - 1;
            let a = self.input.get(i)?;
            let s = oracle
                .step(self.lookbehind[i], &a)
                .ok_or_else(|| WordError::Source {
                    index: i,
                    message: format!("letter {a:?} outside the lookbehind alphabet"),
                })?;
            self.lookbehind.push(s);
        }
        Ok(self.lookbehind[n])
    }

    /// Executes one step.
    pub fn step(&mut self) -> Result<StepRecord, RunStatus> {
        let symbol = self
            .symbol_at(self.position)
            .map_err(|e| RunStatus::InputError(e.to_string()))?;
        let machine = self.machine.clone();
        let (action, lookbehind) = match &machine {
            Machine::TwoWay(t) => (t.action(self.state, symbol), None),
            Machine::Lookbehind(t) => {
                let s = self
                    .lookbehind_at(self.position, &t.oracle)
                    .map_err(|e| RunStatus::InputError(e.to_string()))?;
                (t.action(self.state, symbol, s), Some(s))
            }
        };
        let Some(action) = action else {
            let detail = match lookbehind {
                Some(s) => format!("state {}, symbol {symbol}, lookbehind {s}", self.state),
                None => format!("state {}, symbol {symbol}", self.state),
            };
            return Err(RunStatus::UndefinedTransition {
                position: self.position,
                step: self.step,
                detail,
            });
        };
        let record = StepRecord {
            step: self.step,
            state: self.state,
            position: self.position,
            symbol,
            lookbehind,
            output: action.output.clone(),
            direction: action.direction,
            next_state: action.to,
        };
        match action.direction {
            Move::Right => self.position += 1,
            Move::Left => {
                if self.position == 0 {
                    return Err(RunStatus::MovedLeftOfEndmarker { step: self.step });
                }
                self.position -= 1;
            }
        }
        self.state = action.to;
        self.step += 1;
        Ok(record)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub state: usize,
    pub position: usize,
    pub emitted: usize,
}

/// A demand-driven run: output letters are computed when requested, with
/// at most `budget` steps spent per requested letter.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    sim: Simulator,
    budget: usize,
    output: Vec<char>,
    status: RunStatus,
    halted: bool,
    trace: Vec<TraceEntry>,
    trace_limit: usize,
    visits: Vec<usize>,
    configs: HashMap<(usize, usize), (usize, usize)>,
    lasso: Option<(Vec<char>, Vec<char>)>,
    loop_report: Option<LoopReport>,
}

impl RunOutcome {
    fn new(sim: Simulator, budget: usize) -> Self {
        Self {
            sim,
            budget,
            output: Vec::new(),
            status: RunStatus::Producing,
            halted: false,
            trace: Vec::new(),
            trace_limit: 0,
            visits: vec![0; DEFAULT_VISIT_WINDOW],
            configs: HashMap::new(),
            lasso: None,
            loop_report: None,
        }
    }

    /// Records the first `limit` steps.
    pub fn with_trace(mut self, limit: usize) -> Self {
        self.trace_limit = limit;
        self
    }

    /// Counts visits for tape positions below `window`.
    pub fn with_visit_window(mut self, window: usize) -> Self {
        self.visits.resize(window, 0);
        self
    }

    pub fn status(&self) -> &RunStatus {
        &self.status
    }

    pub fn steps(&self) -> usize {
        self.sim.steps()
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn visits(&self) -> &[usize] {
        &self.visits
    }

    pub fn state_count(&self) -> usize {
        self.sim.state_count()
    }

    /// The configuration cycle found so far, if any.
    pub fn loop_report(&self) -> Option<&LoopReport> {
        self.loop_report.as_ref()
    }

    /// Letters produced so far.
    pub fn produced(&self) -> &[char] {
        &self.output
    }

    fn advance(&mut self) -> Result<(), RunStatus> {
        let before = self.sim.steps();
        let key = (self.sim.state(), self.sim.position());
        if self.configs.len() < CONFIG_LIMIT {
            if let Some(&(step, emitted)) = self.configs.get(&key) {
                let prefix = self.output[..emitted].to_vec();
                let period = self.output[emitted..].to_vec();
                self.loop_report = Some(LoopReport {
                    first_step: step,
                    repeat_step: before,
                    state: key.0,
                    position: key.1,
                    prefix: prefix.clone(),
                    period: period.clone(),
                });
                self.status = RunStatus::LoopDetected {
                    prefix: prefix.clone(),
                    period: period.clone(),
                };
                self.lasso = Some((prefix, period));
                return Ok(());
            }
            self.configs.insert(key, (before, self.output.len()));
        }
        let record = self.sim.step()?;
        if let Some(v) = self.visits.get_mut(record.position) {
            *v += 1;
        }
        self.output.extend_from_slice(&record.output);
        if self.trace.len() < self.trace_limit {
            self.trace.push(TraceEntry {
                state: record.state,
                position: record.position,
                emitted: self.output.len(),
            });
        }
        Ok(())
    }

    /// Output letter `n`.
    pub fn get(&mut self, n: usize) -> Result<char, RunStatus> {
        let mut spent = 0;
        loop {
            if n < self.output.len() {
                return Ok(self.output[n]);
            }
            if let Some((prefix, period)) = &self.lasso {
                if period.is_empty() {
                    return Err(self.status.clone());
                }
                return Ok(period[(n - prefix.len()) % period.len()]);
            }
            if self.halted {
                return Err(self.status.clone());
            }
            if spent >= self.budget {
                self.status = RunStatus::BudgetExceeded {
                    step: self.sim.steps(),
                };
                return Err(self.status.clone());
            }
            if let Err(e) = self.advance() {
                self.status = e.clone();
                self.halted = true;
                return Err(e);
            }
            spent += 1;
        }
    }

    /// The first `n` output letters.
    pub fn prefix(&mut self, n: usize) -> Result<Vec<char>, RunStatus> {
        (0..n).map(|i| self.get(i)).collect()
    }

    pub fn prefix_string(&mut self, n: usize) -> Result<String, RunStatus> {
        Ok(self.prefix(n)?.into_iter().collect())
    }

    /// The letters available among the first `n`, stopping at the first
    /// failure.
    pub fn available(&mut self, n: usize) -> Vec<char> {
        (0..n).map_while(|i| self.get(i).ok()).collect()
    }

    /// The output as a lazily evaluated word.
    pub fn into_word(mut self) -> InfiniteWord<char> {
        let mut index = 0;
        InfiniteWord::from_stream(
            "transducer output",
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

pub fn run_2wft(t: &TwoWayTransducer, input: &InfiniteWord<char>, budget: usize) -> RunOutcome {
    RunOutcome::new(Simulator::two_way(t, input), budget)
}

pub fn run_2wft_b(
    t: &LookbehindTransducer,
    input: &InfiniteWord<char>,
    budget: usize,
) -> RunOutcome {
    RunOutcome::new(Simulator::lookbehind(t, input), budget)
}

/// Runs a one-way transducer; the budget bounds the input letters
/// consumed per requested output letter.
pub fn run_1wft(t: &OneWayTransducer, input: &InfiniteWord<char>, budget: usize) -> RunOutcome {
    run_2wft(&t.to_two_way(), input, budget)
}

/// The lookbehind automaton states `ζ(s_0, β[:n])` for `n ≤ len`.
pub fn lookbehind_states(
    oracle: &Dfa<char>,
    input: &InfiniteWord<char>,
    len: usize,
) -> Result<Vec<usize>, WordError> {
    let mut out = vec![oracle.initial()];
    for i in 0..len {
        let a = input.get(i)?;
        let s = oracle.step(out[i], &a).ok_or_else(|| WordError::Source {
            index: i,
            message: format!("letter {a:?} outside the lookbehind alphabet"),
        })?;
        out.push(s);
    }
    Ok(out)
}
