use std::collections::HashMap;

use serde::Serialize;

use super::{
    run_2wft, Action, RunOutcome, Simulator, TapeSymbol, TransducerError, TwoWayTransducer,
    DEFAULT_BUDGET,
};
use crate::words::{canonical_lasso, InfiniteWord, LassoWord};

/// A configuration seen twice: the run is periodic from `first_step` on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopReport {
    pub first_step: usize,
    pub repeat_step: usize,
    pub state: usize,
    pub position: usize,
    pub prefix: Vec<char>,
    pub period: Vec<char>,
}

/// Largest visit count among the first `window` tape positions.
pub fn visit_bound_check(outcome: &RunOutcome, window: usize) -> usize {
    outcome
        .visits()
        .iter()
        .take(window)
        .copied()
        .max()
        .unwrap_or(0)
}

/// The output of `t` on `⊢ c^ω`, as a lasso.
///
/// The run is periodic as soon as a configuration repeats, or as soon as
/// two steps `j < j′` in the same state sit at positions `1 ≤ n_j < n_j′`
/// that the run never goes left of afterwards: on a uniform tape the run
/// from `j′` is then the run from `j` translated.
pub fn analyze_on_constant(
    t: &TwoWayTransducer,
    c: char,
    budget: usize,
) -> Result<LassoWord<char>, TransducerError> {
    let input = InfiniteWord::constant(c);
    let mut sim = Simulator::two_way(t, &input);
    let mut output = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    // stack of (position, state, emitted) whose positions are the running
    // suffix minima; by_state[q] indexes the entries in state q
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    let mut by_state: Vec<Vec<usize>> = vec![Vec::new(); t.states()];
    for _ in 0..=budget {
        let (q, pos) = (sim.state(), sim.position());
        let emitted = output.len();
        let found = if let Some(&e) = seen.get(&(q, pos)) {
            Some(e)
        } else {
            while stack.last().is_some_and(|&(p, _, _)| p > pos) {
                let (_, s, _) = stack.pop().expect("nonempty");
                by_state[s].pop();
            }
            let hit = by_state[q]
                .last()
                .map(|&i| stack[i])
                .filter(|&(p, _, _)| p >= 1 && p < pos)
                .map(|(_, _, e)| e);
            by_state[q].push(stack.len());
            stack.push((pos, q, emitted));
            seen.insert((q, pos), emitted);
            hit
        };
        if let Some(start) = found {
            let period = output[start..].to_vec();
            if period.is_empty() {
                return Err(TransducerError::NonProductive {
                    prefix: output[..start].to_vec(),
                });
            }
            return Ok(canonical_lasso(output[..start].to_vec(), period)?);
        }
        let record = sim.step().map_err(TransducerError::Run)?;
        output.extend(record.output);
    }
    Err(TransducerError::BudgetExceeded {
        budget,
        report: None,
    })
}

const VALIDATION_LETTERS: usize = 500;

/// A machine without endmarker producing the same output as `t` on
/// `⊢ input`.
///
/// The run of `t` is simulated for `budget` steps; after its last visit to
/// `⊢`, at step `n_0`, the head is at the first letter. The output up to
/// and including step `n_0` is hardcoded into a fresh initial state that
/// otherwise behaves like the state reached after `n_0`.
pub fn remove_endmarker(
    t: &TwoWayTransducer,
    input: &InfiniteWord<char>,
    budget: usize,
) -> Result<TwoWayTransducer, TransducerError> {
    let mut sim = Simulator::two_way(t, input);
    let mut output = Vec::new();
    let mut last = (0, Vec::new(), t.initial());
    for _ in 0..budget {
        // a run that stops is compared as is during validation
        let Ok(record) = sim.step() else { break };
        output.extend_from_slice(&record.output);
        if record.position == 0 {
            last = (record.step, output.clone(), record.next_state);
        }
    }
    let (n0, hardcoded, resume) = last;
    if n0 > budget / 2 {
        let mut outcome = run_2wft(t, input, budget);
        let _ = outcome.get(budget.min(DEFAULT_BUDGET));
        return Err(TransducerError::BudgetExceeded {
            budget,
            report: outcome.loop_report().cloned(),
        });
    }

    let fresh = t.states();
    let mut transitions: Vec<(usize, TapeSymbol, Action)> = t
        .transitions()
        .filter(|(_, sym, _)| *sym != TapeSymbol::EndMarker)
        .map(|(p, sym, a)| (p, sym, a.clone()))
        .collect();
    for (p, sym, a) in t.transitions() {
        if p == resume && sym != TapeSymbol::EndMarker {
            let mut output = hardcoded.clone();
            output.extend_from_slice(&a.output);
            transitions.push((
                fresh,
                sym,
                Action {
                    output,
                    ..a.clone()
                },
            ));
        }
    }
    let result = TwoWayTransducer::new(
        fresh + 1,
        fresh,
        t.input_alphabet().clone(),
        t.output_alphabet().clone(),
        false,
        transitions,
    )?;

    let mut original = run_2wft(t, input, DEFAULT_BUDGET);
    let mut converted = run_2wft(&result, input, DEFAULT_BUDGET);
    for i in 0..VALIDATION_LETTERS {
        match (original.get(i), converted.get(i)) {
            (Ok(a), Ok(b)) if a == b => {}
            (Err(_), Err(_)) => break,
            _ => return Err(TransducerError::ValidationFailed(i)),
        }
    }
    Ok(result)
}
