//! Measurements on words and cross-checks between output streams.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::ltl::{
    default_prefix_cap, eliminate_g_subformulas, eval_lasso, nnf, shortest_witness, LtlError,
    LtlFormula,
};
use crate::mealy::{run_mealy_lasso, MealyError, MealyMachine};
use crate::sst::SstOutcome;
use crate::transducers::RunOutcome;
use crate::words::{InfiniteWord, LassoWord};

/// Factor counts `p(k)` for `k = 1..=k_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityProfile {
    pub word: String,
    /// `counts[k - 1] = p(k)`.
    pub counts: Vec<usize>,
    /// Whether `counts[k - 1]` is exact rather than a lower bound.
    pub exact: Vec<bool>,
    /// Prefix length used for non-lasso words, `0` otherwise.
    pub window: usize,
    /// For lower bounds: whether the count is unchanged on twice the window.
    pub stable: Vec<bool>,
}

impl ComplexityProfile {
    pub fn count(&self, k: usize) -> usize {
        self.counts[k - 1]
    }

    pub fn is_exact(&self, k: usize) -> bool {
        self.exact[k - 1]
    }
}

fn distinct_factors(letters: &[char], starts: usize, k: usize) -> usize {
    (0..starts)
        .filter(|&i| i + k <= letters.len())
        .map(|i| &letters[i..i + k])
        .collect::<HashSet<_>>()
        .len()
}

/// Factors of a lasso word all start within `u·v`, so they are counted
/// exactly. Other words give lower bounds from their first `window` letters;
/// a letter the source cannot produce ends the window early.
pub fn subword_complexity(
    w: &InfiniteWord<char>,
    k_max: usize,
    window: usize,
) -> ComplexityProfile {
    assert!(k_max >= 1, "k_max must be positive");
    if let Some(l) = w.to_lasso() {
        let starts = l.size();
        let letters = l.take(starts + k_max);
        let counts: Vec<usize> = (1..=k_max)
            .map(|k| distinct_factors(&letters, starts, k))
            .collect();
        return ComplexityProfile {
            word: w.describe(),
            counts,
            exact: vec![true; k_max],
            window: 0,
            stable: vec![true; k_max],
        };
    }
    let letters: Vec<char> = (0..2 * window).map_while(|i| w.get(i).ok()).collect();
    let short = &letters[..window.min(letters.len())];
    let counts: Vec<usize> = (1..=k_max)
        .map(|k| distinct_factors(short, short.len(), k))
        .collect();
    let stable = (1..=k_max)
        .map(|k| distinct_factors(&letters, letters.len(), k) == counts[k - 1])
        .collect();
    ComplexityProfile {
        word: w.describe(),
        counts,
        exact: vec![false; k_max],
        window: short.len(),
        stable,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundStatus {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub k: usize,
    pub p_alpha: usize,
    pub alpha_exact: bool,
    pub p_beta: usize,
    pub beta_exact: bool,
    pub bound: usize,
    pub status: BoundStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubwordBoundReport {
    pub constant: usize,
    pub rows: Vec<BoundRow>,
}

impl SubwordBoundReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.status == BoundStatus::Holds)
    }

    pub fn violated(&self) -> bool {
        self.rows.iter().any(|r| r.status == BoundStatus::Violated)
    }
}

/// Checks `p_α(k) ≤ K · p_β(k)`. A lower bound on `p_α` can only show a
/// violation and a lower bound on `p_β` can only confirm one.
pub fn check_subword_bound(
    alpha: &InfiniteWord<char>,
    beta: &InfiniteWord<char>,
    constant: usize,
    k_max: usize,
    window: usize,
) -> SubwordBoundReport {
    let pa = subword_complexity(alpha, k_max, window);
    let pb = subword_complexity(beta, k_max, window);
    let rows = (1..=k_max)
        .map(|k| {
            let (a, b) = (pa.count(k), pb.count(k));
            let bound = constant * b;
            let status = if a <= bound {
                if pa.is_exact(k) {
                    BoundStatus::Holds
                } else {
                    BoundStatus::Inconclusive
                }
            } else if pb.is_exact(k) {
                BoundStatus::Violated
            } else {
                BoundStatus::Inconclusive
            };
            BoundRow {
                k,
                p_alpha: a,
                alpha_exact: pa.is_exact(k),
                p_beta: b,
                beta_exact: pb.is_exact(k),
                bound,
                status,
            }
        })
        .collect();
    SubwordBoundReport { constant, rows }
}

/// The bound for the image of `beta` under `m`, with `K = |Q|²`.
pub fn mealy_subword_bound(
    m: &MealyMachine,
    beta: &LassoWord<char>,
    k_max: usize,
) -> Result<SubwordBoundReport, MealyError> {
    let alpha = run_mealy_lasso(m, beta)?;
    let k = m.states() * m.states();
    Ok(check_subword_bound(
        &InfiniteWord::from(alpha),
        &InfiniteWord::from(beta.clone()),
        k,
        k_max,
        0,
    ))
}

/// Anything producing output letters on demand.
pub trait LetterSource {
    fn letter(&mut self, n: usize) -> Result<char, String>;
}

impl LetterSource for InfiniteWord<char> {
    fn letter(&mut self, n: usize) -> Result<char, String> {
        self.get(n).map_err(|e| e.to_string())
    }
}

impl LetterSource for RunOutcome {
    fn letter(&mut self, n: usize) -> Result<char, String> {
        self.get(n).map_err(|e| e.to_string())
    }
}

impl LetterSource for SstOutcome {
    fn letter(&mut self, n: usize) -> Result<char, String> {
        self.get(n).map_err(|e| e.to_string())
    }
}

impl<T: LetterSource + ?Sized> LetterSource for Box<T> {
    fn letter(&mut self, n: usize) -> Result<char, String> {
        (**self).letter(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Equivalence {
    Equal { n: usize },
    Diverges { index: usize, a: char, b: char },
    Inconclusive { index: usize, status: String },
}

impl Equivalence {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equivalence::Equal { .. })
    }
}

/// Compares the first `n` letters of two sources.
pub fn prefix_equiv(a: &mut dyn LetterSource, b: &mut dyn LetterSource, n: usize) -> Equivalence {
    for index in 0..n {
        match (a.letter(index), b.letter(index)) {
            (Ok(x), Ok(y)) if x == y => {}
            (Ok(x), Ok(y)) => return Equivalence::Diverges { index, a: x, b: y },
            (Err(status), _) | (_, Err(status)) => {
                return Equivalence::Inconclusive { index, status }
            }
        }
    }
    Equivalence::Equal { n }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaddingError {
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error("suffix {n} satisfies the formula but no prefix of length at most {cap} does")]
    CapTooSmall { n: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaddingEntry {
    pub n: usize,
    pub holds: bool,
    /// Length of the shortest prefix of `α[n:]` satisfying the `G`-free
    /// formula, for suffixes satisfying the formula.
    pub f: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaddingTable {
    pub formula: String,
    pub g_free: String,
    pub stabilization: usize,
    pub entries: Vec<PaddingEntry>,
}

/// The padding function `f(n)` for `{n | α[n:] ⊨ φ}`: the length of the
/// shortest prefix of `α[n:]` satisfying the `G`-free form of `φ`.
pub fn padding_check(
    f: &LtlFormula,
    advice: &LassoWord<char>,
    range: std::ops::Range<usize>,
    cap: Option<usize>,
) -> Result<PaddingTable, PaddingError> {
    let normal = nnf(f);
    let report = eliminate_g_subformulas(&normal, advice)?;
    let cap = cap.unwrap_or_else(|| default_prefix_cap(&normal, advice));
    let mut entries = Vec::new();
    for n in range {
        let holds = eval_lasso(f, advice, n);
        let witness = if holds {
            shortest_witness(&report.formula, advice, n, cap)?
        } else {
            None
        };
        if holds && witness.is_none() && n >= report.stabilization {
            return Err(PaddingError::CapTooSmall { n, cap });
        }
        entries.push(PaddingEntry {
            n,
            holds,
            f: witness,
        });
    }
    Ok(PaddingTable {
        formula: f.to_string(),
        g_free: report.formula.to_string(),
        stabilization: report.stabilization,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::finite_prefix_eval;
    use crate::words::pi_word;

    fn lasso(u: &str, v: &str) -> InfiniteWord<char> {
        InfiniteWord::from_lasso_str(u, v).unwrap()
    }

    fn brute_force(w: &LassoWord<char>, k: usize) -> usize {
        // factors of a long prefix, far beyond the period
        let letters = w.take(4 * w.size() + 4 * k + 8);
        distinct_factors(&letters, letters.len(), k)
    }

    #[test]
    fn complexity_examples() {
        let p = subword_complexity(&lasso("", "01"), 3, 0);
        assert_eq!(p.counts, vec![2, 2, 2]);
        assert!(p.exact.iter().all(|&e| e));
        assert_eq!(subword_complexity(&lasso("", "a"), 5, 0).counts, vec![1; 5]);
        let pi = subword_complexity(&pi_word(1), 2, 400);
        assert_eq!(pi.count(2), 3);
        assert!(!pi.is_exact(2) && pi.stable[1]);
    }

    #[test]
    fn lasso_complexity_matches_brute_force_and_settles() {
        for (u, v) in [
            ("", "01"),
            ("aab", "ab"),
            ("abc", "cba"),
            ("0", "0010"),
            ("ab", "b"),
        ] {
            let w = LassoWord::from_strs(u, v).unwrap();
            let k_max = u.len() + v.len() + 3;
            let p = subword_complexity(&InfiniteWord::from(w.clone()), k_max, 0);
            for k in 1..=k_max {
                assert_eq!(p.count(k), brute_force(&w, k), "{u}({v}) k={k}");
            }
            for k in u.len() + v.len()..k_max {
                assert_eq!(p.count(k), p.count(k + 1));
            }
        }
    }

    #[test]
    fn bound_checks() {
        let beta = lasso("b", "aab");
        assert!(check_subword_bound(&beta, &beta, 1, 6, 0).holds());
        let alpha = lasso("", "aabb");
        let report = check_subword_bound(&alpha, &lasso("", "a"), 2, 3, 0);
        assert_eq!(report.rows[1].p_alpha, 4);
        assert!(report.violated());
        // a lower bound on α cannot confirm the bound
        let inconclusive = check_subword_bound(&pi_word(1), &lasso("", "01"), 4, 3, 200);
        assert!(!inconclusive.holds() && !inconclusive.violated());
    }

    #[test]
    fn equivalence_verdicts() {
        let mut a = lasso("", "ab");
        let mut b = lasso("", "ab");
        assert_eq!(
            prefix_equiv(&mut a, &mut b, 100),
            Equivalence::Equal { n: 100 }
        );
        let mut c = lasso("ababababab", "ba");
        assert_eq!(
            prefix_equiv(&mut a, &mut c, 100),
            Equivalence::Diverges {
                index: 10,
                a: 'a',
                b: 'b'
            }
        );
        let (copy, _) = crate::transducers::mu_transducers(
            1,
            &crate::words::Alphabet::from_letters("a").unwrap(),
        );
        let mut stalls = crate::transducers::run_1wft(&copy, &lasso("aaaaaaa", "b"), 100);
        let mut a = lasso("", "a");
        assert!(matches!(
            prefix_equiv(&mut a, &mut stalls, 20),
            Equivalence::Inconclusive { index: 7, .. }
        ));
    }

    #[test]
    fn padding_examples() {
        let w = LassoWord::from_strs("aaab", "a").unwrap();
        let t = padding_check(&LtlFormula::parse("F b").unwrap(), &w, 0..8, None).unwrap();
        let f: Vec<Option<usize>> = t.entries.iter().map(|e| e.f).collect();
        assert_eq!(
            f,
            vec![Some(4), Some(3), Some(2), Some(1), None, None, None, None]
        );

        let top = padding_check(&LtlFormula::Top, &w, 0..5, None).unwrap();
        assert!(top.entries.iter().all(|e| e.f == Some(0)));

        let ab = LassoWord::from_strs("", "ab").unwrap();
        let t = padding_check(&LtlFormula::atom('a'), &ab, 0..6, None).unwrap();
        for e in &t.entries {
            assert_eq!(e.f, if e.n % 2 == 0 { Some(1) } else { None });
        }
    }

    #[test]
    fn padding_lengths_are_exact_thresholds() {
        let w = LassoWord::from_strs("ba", "abb").unwrap();
        for text in ["F b", "a U b", "X (b | a)", "F (a & X b)"] {
            let f = LtlFormula::parse(text).unwrap();
            let t = padding_check(&f, &w, 0..10, None).unwrap();
            let g = LtlFormula::parse(&t.g_free).unwrap();
            for e in t.entries.iter().filter(|e| e.holds) {
                let m = e.f.unwrap();
                let segment = w.take(e.n + m + 6)[e.n..].to_vec();
                for len in 0..segment.len() {
                    assert_eq!(
                        finite_prefix_eval(&g, &segment[..len], 0).unwrap(),
                        len >= m,
                        "{text} n={} len={len}",
                        e.n
                    );
                }
            }
        }
    }
}
