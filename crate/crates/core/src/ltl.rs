//! LTL over ultimately periodic words.
//!
//! Formulas are evaluated exactly on the lasso graph of a [`LassoWord`].
//! On a fixed word every `G`-subformula is either true on almost every
//! suffix or on none, so it can be replaced by `⊤` or `⊥`; the resulting
//! `G`-free formula in negation normal form is then decided by finite
//! prefixes ([`finite_prefix_eval`]).

use std::fmt;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::words::LassoWord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlError {
    #[error("formula is not in negation normal form: {0}")]
    NotInNnf(String),
    #[error("formula contains a G operator: {0}")]
    NotGFree(String),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LtlFormula {
    Top,
    Atom(char),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Globally(Box<LtlFormula>),
}

use LtlFormula::*;

impl LtlFormula {
    pub fn atom(a: char) -> Self {
        Atom(a)
    }

    pub fn bot() -> Self {
        Not(Box::new(Top))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        Not(Box::new(f))
    }

    pub fn and(a: Self, b: Self) -> Self {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: Self) -> Self {
        Next(Box::new(f))
    }

    pub fn until(a: Self, b: Self) -> Self {
        Until(Box::new(a), Box::new(b))
    }

    pub fn globally(f: Self) -> Self {
        Globally(Box::new(f))
    }

    pub fn finally(f: Self) -> Self {
        Until(Box::new(Top), Box::new(f))
    }

    pub fn size(&self) -> usize {
        match self {
            Top | Atom(_) => 1,
            Not(f) | Next(f) | Globally(f) => 1 + f.size(),
            And(a, b) | Or(a, b) | Until(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Top | Atom(_) => 0,
            Not(f) | Next(f) | Globally(f) => 1 + f.depth(),
            And(a, b) | Or(a, b) | Until(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Nesting depth of temporal operators that need lookahead.
    pub fn temporal_depth(&self) -> usize {
        match self {
            Top | Atom(_) => 0,
            Not(f) => f.temporal_depth(),
            Next(f) | Globally(f) => 1 + f.temporal_depth(),
            And(a, b) | Or(a, b) => a.temporal_depth().max(b.temporal_depth()),
            Until(a, b) => 1 + a.temporal_depth().max(b.temporal_depth()),
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Top | Atom(_) => true,
            Not(f) => matches!(**f, Top | Atom(_)),
            Next(f) | Globally(f) => f.is_nnf(),
            And(a, b) | Or(a, b) | Until(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }

    pub fn is_g_free(&self) -> bool {
        match self {
            Top | Atom(_) => true,
            Globally(_) => false,
            Not(f) | Next(f) => f.is_g_free(),
            And(a, b) | Or(a, b) | Until(a, b) => a.is_g_free() && b.is_g_free(),
        }
    }

    pub fn atoms(&self) -> Vec<char> {
        fn walk(f: &LtlFormula, out: &mut Vec<char>) {
            match f {
                Top => {}
                Atom(a) => out.push(*a),
                Not(f) | Next(f) | Globally(f) => walk(f, out),
                And(a, b) | Or(a, b) | Until(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn parse(text: &str) -> Result<Self, LtlError> {
        let mut p = Parser {
            chars: text.char_indices().collect(),
            pos: 0,
        };
        let f = p.or()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("trailing input"));
        }
        Ok(f)
    }
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Top => write!(f, "T"),
            Atom(a) => write!(f, "{a}"),
            Not(g) if **g == Top => write!(f, "_|_"),
            Not(g) => write!(f, "!{g}"),
            Next(g) => write!(f, "X{g}"),
            Globally(g) => write!(f, "G{g}"),
            Until(a, b) if **a == Top => write!(f, "F{b}"),
            Until(a, b) => write!(f, "({} U {})", a, b),
            And(a, b) => write!(f, "({} & {})", a, b),
            Or(a, b) => write!(f, "({} | {})", a, b),
        }
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

const OPERATOR_CHARS: &str = "!&|XUGFT()_";

impl Parser {
    fn error(&self, message: &str) -> LtlError {
        let offset = self
            .chars
            .get(self.pos)
            .map_or_else(|| self.chars.last().map_or(0, |c| c.0 + 1), |c| c.0);
        LtlError::Parse {
            offset,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.1.is_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<LtlFormula, LtlError> {
        let mut f = self.and()?;
        while self.eat('|') {
            f = LtlFormula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<LtlFormula, LtlError> {
        let mut f = self.until()?;
        while self.eat('&') {
            f = LtlFormula::and(f, self.until()?);
        }
        Ok(f)
    }

    fn until(&mut self) -> Result<LtlFormula, LtlError> {
        let f = self.unary()?;
        if self.eat('U') {
            return Ok(LtlFormula::until(f, self.until()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<LtlFormula, LtlError> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(LtlFormula::not(self.unary()?))
            }
            Some('X') => {
                self.pos += 1;
                Ok(LtlFormula::next(self.unary()?))
            }
            Some('G') => {
                self.pos += 1;
                Ok(LtlFormula::globally(self.unary()?))
            }
            Some('F') => {
                self.pos += 1;
                Ok(LtlFormula::finally(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<LtlFormula, LtlError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let f = self.or()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(f)
            }
            Some('T') => {
                self.pos += 1;
                Ok(Top)
            }
            Some('_') => {
                let rest: String = self.chars[self.pos..].iter().take(3).map(|c| c.1).collect();
                if rest == "_|_" {
                    self.pos += 3;
                    Ok(LtlFormula::bot())
                } else {
                    Err(self.error("expected _|_"))
                }
            }
            Some(c) if !OPERATOR_CHARS.contains(c) => {
                self.pos += 1;
                Ok(Atom(c))
            }
            Some(_) => Err(self.error("unexpected operator")),
            None => Err(self.error("unexpected end of formula")),
        }
    }
}

/// Negation normal form: `¬` only in front of atoms and `⊤`; connectives
/// `∧ ∨ X U G`.
pub fn nnf(f: &LtlFormula) -> LtlFormula {
    match f {
        Top | Atom(_) => f.clone(),
        And(a, b) => LtlFormula::and(nnf(a), nnf(b)),
        Or(a, b) => LtlFormula::or(nnf(a), nnf(b)),
        Next(a) => LtlFormula::next(nnf(a)),
        Until(a, b) => LtlFormula::until(nnf(a), nnf(b)),
        Globally(a) => LtlFormula::globally(nnf(a)),
        Not(g) => negated_nnf(g),
    }
}

fn negated_nnf(f: &LtlFormula) -> LtlFormula {
    match f {
        Top | Atom(_) => LtlFormula::not(f.clone()),
        Not(g) => nnf(g),
        And(a, b) => LtlFormula::or(negated_nnf(a), negated_nnf(b)),
        Or(a, b) => LtlFormula::and(negated_nnf(a), negated_nnf(b)),
        Next(a) => LtlFormula::next(negated_nnf(a)),
        // ¬(φ U ψ) ≡ G¬ψ ∨ (¬ψ U (¬ψ ∧ ¬φ))
        Until(a, b) => {
            let not_b = negated_nnf(b);
            LtlFormula::or(
                LtlFormula::globally(not_b.clone()),
                LtlFormula::until(not_b.clone(), LtlFormula::and(not_b, negated_nnf(a))),
            )
        }
        // ¬Gφ ≡ ⊤ U ¬φ
        Globally(a) => LtlFormula::finally(negated_nnf(a)),
    }
}

/// Truth value of `f` at every position `0..w.size()` of the lasso graph.
pub fn label_lasso(f: &LtlFormula, w: &LassoWord<char>) -> Vec<bool> {
    let n = w.size();
    let u = w.prefix().len();
    let succ = |i: usize| if i + 1 < n { i + 1 } else { u };
    match f {
        Top => vec![true; n],
        Atom(a) => (0..n).map(|i| w.letter(i) == a).collect(),
        Not(g) => label_lasso(g, w).into_iter().map(|b| !b).collect(),
        And(a, b) => label_lasso(a, w)
            .into_iter()
            .zip(label_lasso(b, w))
            .map(|(x, y)| x && y)
            .collect(),
        Or(a, b) => label_lasso(a, w)
            .into_iter()
            .zip(label_lasso(b, w))
            .map(|(x, y)| x || y)
            .collect(),
        Next(g) => {
            let inner = label_lasso(g, w);
            (0..n).map(|i| inner[succ(i)]).collect()
        }
        Until(a, b) => {
            let (la, lb) = (label_lasso(a, w), label_lasso(b, w));
            let mut val = vec![false; n];
            loop {
                let mut changed = false;
                for i in (0..n).rev() {
                    let v = lb[i] || (la[i] && val[succ(i)]);
                    if v != val[i] {
                        val[i] = v;
                        changed = true;
                    }
                }
                if !changed {
                    break val;
                }
            }
        }
        Globally(g) => {
            let inner = label_lasso(g, w);
            let mut val = vec![true; n];
            loop {
                let mut changed = false;
                for i in (0..n).rev() {
                    let v = inner[i] && val[succ(i)];
                    if v != val[i] {
                        val[i] = v;
                        changed = true;
                    }
                }
                if !changed {
                    break val;
                }
            }
        }
    }
}

/// Exact satisfaction of `f` by `w[position:]`.
pub fn eval_lasso(f: &LtlFormula, w: &LassoWord<char>, position: usize) -> bool {
    label_lasso(f, w)[w.fold_position(position)]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GVerdict {
    pub subformula: String,
    pub consistent: bool,
    /// Least position from which the subformula holds, when consistent.
    pub holds_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GEliminationReport {
    pub formula: LtlFormula,
    pub stabilization: usize,
    pub verdicts: Vec<GVerdict>,
}

/// Replaces every maximal `G`-subformula of `f` (in NNF) by `⊤` when it holds
/// on some suffix of `w` and by `⊥` otherwise.
pub fn eliminate_g_subformulas(
    f: &LtlFormula,
    w: &LassoWord<char>,
) -> Result<GEliminationReport, LtlError> {
    if !f.is_nnf() {
        return Err(LtlError::NotInNnf(f.to_string()));
    }
    let mut verdicts = Vec::new();
    let formula = replace_g(f, w, &mut verdicts);
    let stabilization = verdicts
        .iter()
        .filter_map(|v| v.holds_from)
        .max()
        .unwrap_or(0);
    Ok(GEliminationReport {
        formula,
        stabilization,
        verdicts,
    })
}

fn replace_g(f: &LtlFormula, w: &LassoWord<char>, verdicts: &mut Vec<GVerdict>) -> LtlFormula {
    match f {
        Top | Atom(_) | Not(_) => f.clone(),
        Globally(_) => {
            // holding positions are upward closed, so the first one is the least
            let holds_from = label_lasso(f, w).iter().position(|&b| b);
            verdicts.push(GVerdict {
                subformula: f.to_string(),
                consistent: holds_from.is_some(),
                holds_from,
            });
            if holds_from.is_some() {
                Top
            } else {
                LtlFormula::bot()
            }
        }
        Next(a) => LtlFormula::next(replace_g(a, w, verdicts)),
        And(a, b) => LtlFormula::and(replace_g(a, w, verdicts), replace_g(b, w, verdicts)),
        Or(a, b) => LtlFormula::or(replace_g(a, w, verdicts), replace_g(b, w, verdicts)),
        Until(a, b) => LtlFormula::until(replace_g(a, w, verdicts), replace_g(b, w, verdicts)),
    }
}

fn finite_label(f: &LtlFormula, w: &[char]) -> Vec<bool> {
    // index w.len() stands for "past the end"
    let n = w.len();
    match f {
        Top => vec![true; n + 1],
        Atom(a) => (0..=n).map(|i| i < n && w[i] == *a).collect(),
        Not(g) => match **g {
            Top => vec![false; n + 1],
            Atom(a) => (0..=n).map(|i| i < n && w[i] != a).collect(),
            _ => unreachable!("checked NNF"),
        },
        And(a, b) => finite_label(a, w)
            .into_iter()
            .zip(finite_label(b, w))
            .map(|(x, y)| x && y)
            .collect(),
        Or(a, b) => finite_label(a, w)
            .into_iter()
            .zip(finite_label(b, w))
            .map(|(x, y)| x || y)
            .collect(),
        Next(g) => {
            let inner = finite_label(g, w);
            (0..=n).map(|i| i + 1 < n && inner[i + 1]).collect()
        }
        Until(a, b) => {
            let (la, lb) = (finite_label(a, w), finite_label(b, w));
            let mut val = vec![false; n + 1];
            for i in (0..n).rev() {
                val[i] = lb[i] || (la[i] && val[i + 1]);
            }
            val
        }
        Globally(_) => unreachable!("checked G-free"),
    }
}

/// Strong finite-word semantics of a `G`-free NNF formula: atoms and their
/// negations need the position to exist, `X` needs a successor, `U` needs a
/// witness inside the word. Truth is monotone under extension of `w`.
pub fn finite_prefix_eval(f: &LtlFormula, w: &[char], position: usize) -> Result<bool, LtlError> {
    if !f.is_g_free() {
        return Err(LtlError::NotGFree(f.to_string()));
    }
    if !f.is_nnf() {
        return Err(LtlError::NotInNnf(f.to_string()));
    }
    Ok(finite_label(f, w)[position.min(w.len())])
}

/// Default witness-length cap for a formula on a lasso.
pub fn default_prefix_cap(f: &LtlFormula, w: &LassoWord<char>) -> usize {
    (f.temporal_depth() + 2) * w.size() + f.size()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuffixVerdict {
    pub m: usize,
    pub holds: bool,
    pub prefix_holds: bool,
    /// Length of the shortest prefix of `w[m:]` satisfying the `G`-free form.
    pub witness: Option<usize>,
    pub cap_too_small: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinitePrefixReport {
    pub formula: String,
    pub g_free: String,
    pub stabilization: usize,
    pub verdicts: Vec<SuffixVerdict>,
}

impl FinitePrefixReport {
    pub fn all_equivalent(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds == v.prefix_holds)
    }

    pub fn cap_too_small(&self) -> bool {
        self.verdicts.iter().any(|v| v.cap_too_small)
    }
}

/// Shortest `n ≤ cap` with `finite_prefix_eval(f, w[m:m+n], 0)`.
pub fn shortest_witness(
    f: &LtlFormula,
    w: &LassoWord<char>,
    m: usize,
    cap: usize,
) -> Result<Option<usize>, LtlError> {
    let segment: Vec<char> = (m..m + cap).map(|i| *w.letter(i)).collect();
    if !finite_prefix_eval(f, &segment, 0)? {
        return Ok(None);
    }
    for n in 0..=cap {
        if finite_prefix_eval(f, &segment[..n], 0)? {
            return Ok(Some(n));
        }
    }
    unreachable!("monotone in prefix length")
}

/// For every `m ∈ [N, N + m_range]` compares `w[m:] ⊨ f` with the existence
/// of a finite prefix of `w[m:]` satisfying the `G`-free form of `f`.
pub fn check_finite_prefix_theorem(
    f: &LtlFormula,
    w: &LassoWord<char>,
    m_range: usize,
    n_cap: Option<usize>,
) -> Result<FinitePrefixReport, LtlError> {
    let normal = nnf(f);
    let report = eliminate_g_subformulas(&normal, w)?;
    let cap = n_cap.unwrap_or_else(|| default_prefix_cap(&normal, w));
    let labels = label_lasso(f, w);
    let n0 = report.stabilization;
    let mut verdicts = Vec::with_capacity(m_range + 1);
    for m in n0..=n0 + m_range {
        let holds = labels[w.fold_position(m)];
        let witness = shortest_witness(&report.formula, w, m, cap)?;
        verdicts.push(SuffixVerdict {
            m,
            holds,
            prefix_holds: witness.is_some(),
            witness,
            cap_too_small: holds && witness.is_none(),
        });
    }
    Ok(FinitePrefixReport {
        formula: f.to_string(),
        g_free: report.formula.to_string(),
        stabilization: n0,
        verdicts,
    })
}

/// Random formula of depth at most `depth` over `atoms`.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize, atoms: &[char]) -> LtlFormula {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.15) {
            Top
        } else {
            Atom(atoms[rng.gen_range(0..atoms.len())])
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..7) {
        0 => LtlFormula::not(random_formula(rng, d, atoms)),
        1 => LtlFormula::and(random_formula(rng, d, atoms), random_formula(rng, d, atoms)),
        2 => LtlFormula::or(random_formula(rng, d, atoms), random_formula(rng, d, atoms)),
        3 => LtlFormula::next(random_formula(rng, d, atoms)),
        4 => LtlFormula::until(random_formula(rng, d, atoms), random_formula(rng, d, atoms)),
        5 => LtlFormula::globally(random_formula(rng, d, atoms)),
        _ => LtlFormula::finally(random_formula(rng, d, atoms)),
    }
}
