//! Constructions specific to the input `π = ∏ 0^n 1`: making a two-way
//! machine keep its direction inside blocks of zeros, and then replacing
//! it by a one-way machine reading `π`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::constructions::{compose_1wft, pi_k_expander_1wft};
use super::{
    run_1wft, run_2wft, Action, Move, OneWayTransducer, RunOutcome, Simulator, TapeSymbol,
    TransducerError, TwoWayTransducer, DEFAULT_BUDGET,
};
use crate::words::{lcm, pi_letter, pi_one_position, pi_word};

const ZERO: TapeSymbol = TapeSymbol::Letter('0');
const ONE: TapeSymbol = TapeSymbol::Letter('1');
const SIMULATION_CAP: usize = 1_000_000;
const EXCURSION_CAP: usize = 1_000_000;

/// Tape position of the `j`-th `1` of `π` on `⊢ π`.
fn one_position(j: usize) -> usize {
    pi_one_position(j) + 1
}

/// `(Q^▷, Q^◁)`: states moving right and left on `0`. States without a
/// `0`-transition count as moving right.
pub fn direction_partition(
    t: &TwoWayTransducer,
) -> Result<(BTreeSet<usize>, BTreeSet<usize>), TransducerError> {
    let dir = |q: usize| t.action(q, ZERO).map(|a| a.direction);
    let mut right = BTreeSet::new();
    let mut left = BTreeSet::new();
    for q in 0..t.states() {
        if let Some(a) = t.action(q, ZERO) {
            if dir(a.to).is_some_and(|d| d != a.direction) {
                return Err(TransducerError::NotDirectionNormalized(q));
            }
        }
        if dir(q) == Some(Move::Left) {
            left.insert(q);
        } else {
            right.insert(q);
        }
    }
    Ok((right, left))
}

/// Whether `δ(q, 0)` never leads to a state moving the other way on `0`.
pub fn is_direction_normalized(t: &TwoWayTransducer) -> bool {
    direction_partition(t).is_ok()
}

/// First arrivals of a drifting excursion: `entries[i]` holds the state on
/// first arriving at cell `i + 1` and the output until first arriving at
/// cell `i + 2`. Entries repeat with period `period` from `start` on.
#[derive(Debug, Clone, PartialEq, Eq)]
struct PassTable {
    entries: Vec<(usize, Vec<char>)>,
    start: usize,
    period: usize,
}

impl PassTable {
    fn next(&self, idx: usize) -> usize {
        if idx + 1 < self.entries.len() {
            idx + 1
        } else {
            idx + 1 - self.period
        }
    }

    fn reduce(&self, idx: usize) -> usize {
        if idx < self.entries.len() {
            idx
        } else {
            self.start + (idx - self.start) % self.period
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Excursion {
    /// Back on the entry `1` in `state` after emitting `output`, never
    /// further than `extent` cells away.
    Return {
        state: usize,
        output: Vec<char>,
        extent: usize,
    },
    Pass(PassTable),
    InPlace,
    Undefined,
}

/// Follows `t` entering an infinite block of zeros in state `s`, moving
/// `dir`, with the entry `1` as a wall at cell 0.
fn classify(t: &TwoWayTransducer, s: usize, dir: Move) -> Result<Excursion, TransducerError> {
    let mut state = s;
    let mut dist = 1usize;
    let mut max = 1usize;
    let mut out: Vec<char> = Vec::new();
    let mut arrivals: Vec<(usize, usize)> = vec![(s, 0)];
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut by_state: Vec<Vec<usize>> = vec![Vec::new(); t.states()];
    let mut target: Option<(usize, usize, usize)> = None;
    for _ in 0..EXCURSION_CAP {
        match target {
            Some((cell, start, period)) if max >= cell => {
                let entries = (0..cell - 1)
                    .map(|i| {
                        (
                            arrivals[i].0,
                            out[arrivals[i].1..arrivals[i + 1].1].to_vec(),
                        )
                    })
                    .collect::<Vec<_>>();
                debug_assert!((start..start + period).all(|i| entries[i] == entries[i - period]));
                return Ok(Excursion::Pass(PassTable {
                    entries,
                    start,
                    period,
                }));
            }
            Some(_) => {}
            None => {
                if !seen.insert((state, dist)) {
                    return Ok(Excursion::InPlace);
                }
                while stack.last().is_some_and(|&(d, _)| d > dist) {
                    let (_, q) = stack.pop().expect("nonempty");
                    by_state[q].pop();
                }
                if let Some(&i) = by_state[state].last() {
                    if stack[i].0 < dist {
                        let d = dist - stack[i].0;
                        target = Some((max + 2 * d + 1, max + d, d));
                    }
                }
                by_state[state].push(stack.len());
                stack.push((dist, state));
            }
        }
        let Some(a) = t.action(state, ZERO) else {
            return Ok(Excursion::Undefined);
        };
        out.extend_from_slice(&a.output);
        state = a.to;
        if a.direction == dir {
            dist += 1;
        } else {
            dist -= 1;
        }
        if dist == 0 {
            return Ok(Excursion::Return {
                state,
                output: out,
                extent: max,
            });
        }
        if dist > max {
            max = dist;
            arrivals.push((state, out.len()));
        }
    }
    Err(TransducerError::UnstableClassification(format!(
        "excursion from state {s} does not settle"
    )))
}

/// Exit of a block of `n` zeros between two walls: `(far side, state, output)`.
fn run_block(
    t: &TwoWayTransducer,
    s: usize,
    dir: Move,
    n: usize,
) -> Option<(bool, usize, Vec<char>)> {
    let (mut state, mut dist, mut out) = (s, 1usize, Vec::new());
    for _ in 0..t.states() * (n + 2) + 1 {
        if dist == 0 || dist == n + 1 {
            return Some((dist == n + 1, state, out));
        }
        let a = t.action(state, ZERO)?;
        out.extend_from_slice(&a.output);
        state = a.to;
        dist = if a.direction == dir {
            dist + 1
        } else {
            dist - 1
        };
    }
    None
}

fn predict(e: &Excursion, n: usize) -> Option<(bool, usize, Vec<char>)> {
    match e {
        Excursion::Return {
            state,
            output,
            extent,
        } if *extent <= n => Some((false, *state, output.clone())),
        Excursion::Pass(table) => {
            let out = (0..n)
                .flat_map(|i| table.entries[table.reduce(i)].1.clone())
                .collect();
            Some((true, table.entries[table.reduce(n)].0, out))
        }
        _ => None,
    }
}

struct Normalizer<'a> {
    t: &'a TwoWayTransducer,
    classes: HashMap<(usize, Move), Excursion>,
    folds: HashMap<usize, Option<(Vec<char>, Move, usize, Move)>>,
}

impl Normalizer<'_> {
    fn class(&mut self, s: usize, dir: Move) -> Result<Excursion, TransducerError> {
        if let Some(e) = self.classes.get(&(s, dir)) {
            return Ok(e.clone());
        }
        let e = classify(self.t, s, dir)?;
        self.classes.insert((s, dir), e.clone());
        Ok(e)
    }

    /// The behavior of `t` from a `1` in state `q` with large blocks on both
    /// sides, up to entering a block for good: `(output, direction, entry
    /// state, direction of the drift)`.
    fn fold(
        &mut self,
        q: usize,
    ) -> Result<Option<(Vec<char>, Move, usize, Move)>, TransducerError> {
        if let Some(f) = self.folds.get(&q) {
            return Ok(f.clone());
        }
        let mut out = Vec::new();
        let mut s = q;
        let mut visited = HashSet::new();
        let result = loop {
            if !visited.insert(s) {
                return Err(TransducerError::UnstableClassification(format!(
                    "state {q} never leaves a 1"
                )));
            }
            let Some(a) = self.t.action(s, ONE) else {
                break None;
            };
            let a = a.clone();
            out.extend_from_slice(&a.output);
            match self.class(a.to, a.direction)? {
                Excursion::Return { state, output, .. } => {
                    out.extend(output);
                    s = state;
                }
                Excursion::Pass(_) => break Some((out, a.direction, a.to, a.direction)),
                Excursion::InPlace => {
                    return Err(TransducerError::UnstableClassification(format!(
                        "state {} loops inside a block",
                        a.to
                    )))
                }
                Excursion::Undefined => break None,
            }
        };
        self.folds.insert(q, result.clone());
        Ok(result)
    }
}

/// Handoff point of the run of `t` on `π`: the first step on the `1` at
/// `p_m` after the last visit left of it, with the state and the output
/// emitted before that step.
fn handoff(
    t: &TwoWayTransducer,
    p_m: usize,
    probe: usize,
) -> Result<(usize, usize, Vec<char>), TransducerError> {
    let pi = pi_word(1);
    let mut sim = Simulator::two_way(t, &pi);
    let mut output = Vec::new();
    let mut emitted_before = Vec::new();
    let mut states = Vec::new();
    let mut last_low = None;
    let mut low_configs = HashSet::new();
    loop {
        let step = sim.steps();
        if step >= SIMULATION_CAP {
            return Err(TransducerError::UnstableClassification(format!(
                "the run keeps returning left of position {p_m}"
            )));
        }
        let enough = last_low.map_or(0, |l: usize| 4 * (l + 1)) + 64;
        if step >= enough && output.len() >= probe {
            break;
        }
        emitted_before.push(output.len());
        states.push(sim.state());
        if sim.position() < p_m {
            if !low_configs.insert((sim.state(), sim.position())) {
                return Err(TransducerError::UnstableClassification(format!(
                    "the run stays left of position {p_m} forever"
                )));
            }
            last_low = Some(step);
        }
        let record = sim.step().map_err(TransducerError::Run)?;
        output.extend(record.output);
    }
    let h = last_low.expect("step 0 is on the endmarker") + 1;
    Ok((h, states[h], output[..emitted_before[h]].to_vec()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SimKey {
    state: usize,
    dir: Move,
    idx: usize,
}

fn compare_on_pi(
    mut a: RunOutcome,
    mut b: RunOutcome,
    probe: usize,
) -> Result<(), TransducerError> {
    for i in 0..probe {
        match (a.get(i), b.get(i)) {
            (Ok(x), Ok(y)) if x == y => {}
            _ => return Err(TransducerError::ValidationFailed(i)),
        }
    }
    Ok(())
}

/// A machine computing the same output as `t` on `π` whose states moving
/// right on `0` keep moving right, and likewise for left.
///
/// Entering a block of zeros, `t` either comes back to the same `1` (the
/// excursion is folded into the `1`-transition) or drifts across (the
/// drift is replayed cell by cell, with as many phase states as the table
/// of first arrivals needs). The run up to the point where every block the
/// head sees has at least `N + N² + 1` zeros is hardcoded.
pub fn normalize_directions_on_pi(
    t: &TwoWayTransducer,
    probe: usize,
) -> Result<TwoWayTransducer, TransducerError> {
    let n = t.states();
    let mut m = n + n * n + 1;
    loop {
        let p_m = one_position(m - 1);
        let (h, q_h, hardcoded) = handoff(t, p_m, probe)?;
        let mut norm = Normalizer {
            t,
            classes: HashMap::new(),
            folds: HashMap::new(),
        };

        let mut index: HashMap<SimKey, usize> = HashMap::new();
        let mut order: Vec<SimKey> = Vec::new();
        let mut transitions: Vec<(usize, TapeSymbol, Action)> = Vec::new();
        let hub = p_m;
        let intern = |key: SimKey, index: &mut HashMap<SimKey, usize>, order: &mut Vec<SimKey>| {
            *index.entry(key).or_insert_with(|| {
                order.push(key);
                hub + order.len()
            })
        };

        // walk to p_m, emitting the hardcoded output on ⊢
        for i in 0..p_m {
            let to = i + 1;
            if i == 0 {
                transitions.push((
                    0,
                    TapeSymbol::EndMarker,
                    Action {
                        output: hardcoded.clone(),
                        direction: Move::Right,
                        to,
                    },
                ));
            } else {
                for sym in [ZERO, ONE] {
                    transitions.push((
                        i,
                        sym,
                        Action {
                            output: vec![],
                            direction: Move::Right,
                            to,
                        },
                    ));
                }
            }
        }
        debug_assert!(h > 0);
        if let Some((out, direction, s, dir)) = norm.fold(q_h)? {
            let to = intern(
                SimKey {
                    state: s,
                    dir,
                    idx: 0,
                },
                &mut index,
                &mut order,
            );
            transitions.push((
                hub,
                ONE,
                Action {
                    output: out,
                    direction,
                    to,
                },
            ));
        }
        let mut i = 0;
        while i < order.len() {
            let key = order[i];
            let from = hub + 1 + i;
            let Excursion::Pass(table) = norm.class(key.state, key.dir)? else {
                unreachable!("only drifting excursions get phase states")
            };
            let (arrival, chunk) = table.entries[key.idx].clone();
            let to = intern(
                SimKey {
                    idx: table.next(key.idx),
                    ..key
                },
                &mut index,
                &mut order,
            );
            transitions.push((
                from,
                ZERO,
                Action {
                    output: chunk,
                    direction: key.dir,
                    to,
                },
            ));
            if let Some((out, direction, s, dir)) = norm.fold(arrival)? {
                let to = intern(
                    SimKey {
                        state: s,
                        dir,
                        idx: 0,
                    },
                    &mut index,
                    &mut order,
                );
                transitions.push((
                    from,
                    ONE,
                    Action {
                        output: out,
                        direction,
                        to,
                    },
                ));
            }
            i += 1;
        }

        // blocks must be long enough for every folded excursion
        let extent = norm
            .classes
            .values()
            .filter_map(|e| match e {
                Excursion::Return { extent, .. } => Some(*extent),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        if extent > m {
            m = extent;
            continue;
        }
        let period = norm
            .classes
            .values()
            .filter_map(|e| match e {
                Excursion::Pass(table) => Some(table.period),
                _ => None,
            })
            .fold(1, lcm);
        for (&(s, dir), e) in &norm.classes {
            for size in [m, m + period] {
                if run_block(t, s, dir, size) != predict(e, size) {
                    return Err(TransducerError::UnstableClassification(format!(
                        "state {s} entering {dir:?} behaves differently on a block of {size} zeros"
                    )));
                }
            }
        }

        let result = TwoWayTransducer::new(
            hub + 1 + order.len(),
            0,
            ['0', '1'],
            t.output_alphabet().clone(),
            true,
            transitions,
        )?;
        let pi = pi_word(1);
        compare_on_pi(
            run_2wft(t, &pi, DEFAULT_BUDGET),
            run_2wft(&result, &pi, DEFAULT_BUDGET),
            probe,
        )?;
        return Ok(result);
    }
}

/// The result of [`one_way_simulation_on_pi`].
#[derive(Debug, Clone)]
pub struct OneWaySimulation {
    /// Number `c` of blocks a segment of the run spans.
    pub window: usize,
    /// Number `K` of copies of each block in `π^K`.
    pub copies: usize,
    /// Index of the first super-block simulated rather than hardcoded.
    pub start: usize,
    /// One-way machine reading `π^K`.
    pub inner: OneWayTransducer,
    /// `inner` composed with the expander from `π` to `π^K`.
    pub machine: OneWayTransducer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum UState {
    Prologue(usize),
    /// Traversing for copy `copy` in state `state` a block `extra` zeros
    /// longer than the copy, arriving at relative `1` number `rel`.
    Active {
        key: (usize, usize),
        copy: usize,
        state: usize,
        extra: usize,
        rel: usize,
    },
    /// Waiting for the last copy with the next segment's key.
    Skip {
        key: (usize, usize),
        copy: usize,
    },
}

struct Segment {
    key: (usize, usize),
    visits: Vec<(usize, usize)>,
}

fn zero_cycle_lcm(t: &TwoWayTransducer) -> usize {
    let next = |q: usize| t.action(q, ZERO).map(|a| a.to);
    let mut m = 1;
    for q in 0..t.states() {
        // q lies on a cycle iff it returns to itself within |Q| steps
        let mut s = q;
        for len in 1..=t.states() {
            match next(s) {
                Some(r) if r == q => {
                    m = lcm(m, len);
                    break;
                }
                Some(r) => s = r,
                None => break,
            }
        }
    }
    m
}

/// A one-way machine reading `π` with the same output as the
/// direction-normalized `t`.
///
/// The run of `t` is cut into segments `R_n` from the last visit of the
/// `n`-th `1` to the last visit of the next one. Each segment is a bounded
/// sequence of block traversals within `c` blocks; it is unrolled onto the
/// `K = c·|Q|` copies of `0^n 1` in `π^K`, the extra zeros of longer blocks
/// being applied in finite control. The number of traversals of a segment
/// is learned from the simulated run as a function of its entry state and
/// of `n` modulo the cycle lengths of `δ(·, 0)`.
pub fn one_way_simulation_on_pi(
    t: &TwoWayTransducer,
    c_max: usize,
    probe: usize,
) -> Result<OneWaySimulation, TransducerError> {
    direction_partition(t)?;
    let n_states = t.states();
    let m = zero_cycle_lcm(t);
    let pi = pi_word(1);

    // simulate well past the probe
    let mut sim = Simulator::two_way(t, &pi);
    let mut positions = Vec::new();
    let mut states = Vec::new();
    let mut emitted_before = Vec::new();
    let mut output = Vec::new();
    let mut goal: Option<usize> = None;
    loop {
        if sim.steps() >= SIMULATION_CAP {
            return Err(TransducerError::InconsistentSegments(
                "the run does not advance".into(),
            ));
        }
        if goal.is_none() && output.len() >= probe {
            let j = ones_below(sim.position() + 1);
            goal = Some(one_position(j + 3 * c_max + 3 + 2 * m * n_states));
        }
        if goal.is_some_and(|g| sim.position() >= g) {
            break;
        }
        positions.push(sim.position());
        states.push(sim.state());
        emitted_before.push(output.len());
        let record = sim.step().map_err(TransducerError::Run)?;
        output.extend(record.output);
    }
    let total = positions.len();
    let low = positions[total / 2..].iter().copied().min().unwrap_or(0);

    let mut last_visit: BTreeMap<usize, usize> = BTreeMap::new();
    for (step, &p) in positions.iter().enumerate() {
        if let Some(j) = one_index(p) {
            last_visit.insert(j, step);
        }
    }
    let trusted = |j: usize| one_position(j + c_max + 1) < low;
    let mut segments: BTreeMap<usize, Segment> = BTreeMap::new();
    for (&n, &from) in &last_visit {
        if n == 0 || !trusted(n + 1) {
            continue;
        }
        let Some(&to) = last_visit.get(&(n + 1)) else {
            continue;
        };
        let mut visits = Vec::new();
        for step in from..=to {
            if let Some(j) = one_index(positions[step]) {
                if j < n {
                    return Err(TransducerError::InconsistentSegments(format!(
                        "segment {n} goes left of its start"
                    )));
                }
                visits.push((states[step], j - n));
            }
        }
        segments.insert(
            n,
            Segment {
                key: (states[from], n % m),
                visits,
            },
        );
    }
    let tail: Vec<usize> = segments
        .keys()
        .copied()
        .filter(|&n| n >= n_states)
        .collect();
    if tail.len() < 2 {
        return Err(TransducerError::InconsistentSegments(
            "the simulated run is too short".into(),
        ));
    }
    let window = tail
        .iter()
        .map(|n| segments[n].visits.iter().map(|v| v.1).max().unwrap_or(0))
        .max()
        .unwrap_or(0);
    if window > c_max {
        return Err(TransducerError::NoWindowBound {
            needed: window,
            cap: c_max,
        });
    }
    let window = window.max(1);
    let copies = window * n_states;
    if let Some(n) = tail.iter().find(|n| segments[n].visits.len() - 1 > copies) {
        return Err(TransducerError::InconsistentSegments(format!(
            "segment {n} has too many traversals"
        )));
    }

    // first n from which equal keys give equal segments
    let start = tail
        .iter()
        .copied()
        .find(|&from| {
            let mut by_key: HashMap<(usize, usize), &Vec<(usize, usize)>> = HashMap::new();
            tail.iter().filter(|&&n| n >= from).all(|n| {
                let s = &segments[n];
                *by_key.entry(s.key).or_insert(&s.visits) == &s.visits
            })
        })
        .ok_or_else(|| {
            TransducerError::InconsistentSegments("no stable suffix of segments".into())
        })?;
    let traversals: HashMap<(usize, usize), usize> = tail
        .iter()
        .filter(|&&n| n >= start)
        .map(|n| (segments[n].key, segments[n].visits.len() - 1))
        .collect();
    let hardcoded = output[..emitted_before[last_visit[&start]]].to_vec();
    let first_key = (states[last_visit[&start]], start % m);

    let inner = build_unrolled(
        t,
        copies,
        window,
        m,
        start,
        first_key,
        &traversals,
        hardcoded,
    )?;
    let machine = compose_1wft(&inner, &pi_k_expander_1wft(copies, true))?;
    compare_on_pi(
        run_2wft(t, &pi, DEFAULT_BUDGET),
        run_1wft(&machine, &pi, DEFAULT_BUDGET),
        probe,
    )?;
    Ok(OneWaySimulation {
        window,
        copies,
        start,
        inner,
        machine,
    })
}

/// Index `j` of the `1` at tape position `p`, if there is one.
fn one_index(p: usize) -> Option<usize> {
    let j = ones_below(p + 1);
    (j > 0 && one_position(j - 1) == p).then(|| j - 1)
}

/// Number of `1`s at tape positions below `p`.
fn ones_below(p: usize) -> usize {
    let mut j = ((2.0 * p as f64).sqrt() as usize).saturating_sub(2);
    while j > 0 && one_position(j - 1) >= p {
        j -= 1;
    }
    while one_position(j) < p {
        j += 1;
    }
    j
}

#[allow(clippy::too_many_arguments)]
fn build_unrolled(
    t: &TwoWayTransducer,
    copies: usize,
    window: usize,
    m: usize,
    start: usize,
    first_key: (usize, usize),
    traversals: &HashMap<(usize, usize), usize>,
    hardcoded: Vec<char>,
) -> Result<OneWayTransducer, TransducerError> {
    let prologue = copies * start * (start + 1) / 2;
    let zeros = |mut s: usize, count: usize, out: &mut Vec<char>| -> Option<usize> {
        for _ in 0..count {
            let a = t.action(s, ZERO)?;
            out.extend_from_slice(&a.output);
            s = a.to;
        }
        Some(s)
    };
    // the first 1-transition of a segment, which always moves right
    let begin = |key: (usize, usize), out: &mut Vec<char>| -> Option<UState> {
        let a = t
            .action(key.0, ONE)
            .filter(|a| a.direction == Move::Right)?;
        out.extend_from_slice(&a.output);
        Some(UState::Active {
            key,
            copy: 1,
            state: a.to,
            extra: 1,
            rel: 1,
        })
    };
    let step = |u: UState, letter: char| -> Option<(Vec<char>, UState)> {
        let mut out = Vec::new();
        let next = match u {
            UState::Prologue(i) => {
                if i == 0 {
                    out.extend_from_slice(&hardcoded);
                }
                if i + 1 < prologue {
                    UState::Prologue(i + 1)
                } else {
                    begin(first_key, &mut out)?
                }
            }
            UState::Active {
                key,
                copy,
                state,
                extra,
                rel,
            } if letter == '0' => {
                let s = zeros(state, 1, &mut out)?;
                UState::Active {
                    key,
                    copy,
                    state: s,
                    extra,
                    rel,
                }
            }
            UState::Active {
                key,
                copy,
                state,
                extra,
                rel,
            } => {
                let s = zeros(state, extra, &mut out)?;
                if copy == *traversals.get(&key)? {
                    let next_key = (s, (key.1 + 1) % m);
                    if copy == copies {
                        begin(next_key, &mut out)?
                    } else {
                        UState::Skip {
                            key: next_key,
                            copy,
                        }
                    }
                } else {
                    let a = t.action(s, ONE)?;
                    out.extend_from_slice(&a.output);
                    let (extra, rel) = match a.direction {
                        Move::Right => (rel + 1, rel + 1),
                        Move::Left => (rel, rel.checked_sub(1)?),
                    };
                    if extra == 0 || extra > window || copy + 1 > copies {
                        return None;
                    }
                    UState::Active {
                        key,
                        copy: copy + 1,
                        state: a.to,
                        extra,
                        rel,
                    }
                }
            }
            UState::Skip { key, copy } if letter == '0' => UState::Skip { key, copy },
            UState::Skip { key, copy } => {
                if copy + 1 == copies {
                    begin(key, &mut out)?
                } else {
                    UState::Skip {
                        key,
                        copy: copy + 1,
                    }
                }
            }
        };
        Some((out, next))
    };

    let mut index: HashMap<UState, usize> = HashMap::from([(UState::Prologue(0), 0)]);
    let mut order = vec![UState::Prologue(0)];
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        let letters: Vec<char> = match u {
            UState::Prologue(j) => vec![pi_letter(copies, j)],
            _ => vec!['0', '1'],
        };
        for letter in letters {
            let Some((out, next)) = step(u, letter) else {
                continue;
            };
            let fresh = index.len();
            let j = *index.entry(next).or_insert_with(|| {
                order.push(next);
                fresh
            });
            transitions.push((i, letter, out, j));
        }
        i += 1;
    }
    OneWayTransducer::new(
        order.len(),
        0,
        ['0', '1'],
        t.output_alphabet().clone(),
        transitions,
    )
}
