//! JSON documents for words, machines and formulas.
//!
//! A document has three namespaces, `words`, `machines` and `formulas`.
//! Words and machines may refer to each other by name; a name that is not
//! defined in the document falls back to the builtins and, for words, to
//! the literal syntax `u·(v)^ω`. Letters are single characters, `^` stands
//! for the endmarker and `_` for the padding letter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::marker::PhantomData;
use std::path::Path;

use serde::de::{self, DeserializeOwned, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::advice::{BuchiAutomaton, Dfa};
use crate::ltl::LtlFormula;
use crate::mealy::MealyMachine;
use crate::sst::{
    identity_sst, interleaver_sst, mirror_sst, render_tokens, SimpleSst, Sst, Substitution,
};
use crate::transducers::{
    mirror_blocks_2wft, pi_k_expander_1wft, samples, Action, LookbehindTransducer, Move,
    OneWayTransducer, TapeSymbol, TwoWayTransducer,
};
use crate::words::{self, Alphabet, InfiniteWord, LassoWord, PAD, PAD_ASCII, SEPARATOR};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unresolved reference {0:?}")]
    UnresolvedReference(String),
    #[error("{name}: {module} invariant violated: {report}")]
    InvariantViolation {
        name: String,
        module: &'static str,
        report: String,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot write {0} as a document")]
    Unrepresentable(String),
}

type Result<T> = std::result::Result<T, DocError>;

fn violation(name: &str, module: &'static str, report: impl fmt::Display) -> DocError {
    DocError::InvariantViolation {
        name: name.to_string(),
        module,
        report: report.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Index(usize),
    Name(String),
}

/// A state count, or the list of state names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSet {
    Count(usize),
    Names(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(StateRef),
    Many(Vec<StateRef>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WordDoc {
    Lasso {
        #[serde(default)]
        u: String,
        v: String,
    },
    Pi {
        #[serde(default = "one")]
        k: usize,
    },
    Shift {
        base: WordRef,
        n: usize,
    },
    Mu {
        base: WordRef,
        n: usize,
    },
    Mirror {
        base: WordRef,
    },
    Constant {
        letter: String,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WordRef {
    Name(String),
    Doc(Box<WordDoc>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphabetDoc {
    Letters(Vec<String>),
    Product { product: Vec<Vec<String>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: StateRef,
    pub letter: String,
    pub to: StateRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonDoc {
    pub states: StateSet,
    pub initial: OneOrMany,
    #[serde(default)]
    pub accepting: Vec<StateRef>,
    pub alphabet: AlphabetDoc,
    pub transitions: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MealyEdgeDoc {
    pub from: StateRef,
    #[serde(rename = "in")]
    pub input: String,
    pub out: String,
    pub to: StateRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MealyDoc {
    pub states: StateSet,
    pub initial: StateRef,
    pub input_alphabet: Vec<String>,
    pub output_alphabet: Vec<String>,
    pub transitions: Vec<MealyEdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDoc {
    pub from: StateRef,
    pub read: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookbehind: Option<StateRef>,
    #[serde(default)]
    pub out: String,
    #[serde(default, rename = "move", skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    pub to: StateRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OracleRef {
    Name(String),
    Doc(AutomatonDoc),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransducerDoc {
    pub states: StateSet,
    pub initial: StateRef,
    pub input_alphabet: Vec<String>,
    pub output_alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endmarker: Option<bool>,
    pub transitions: Vec<TransitionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SstEdgeDoc {
    pub from: StateRef,
    #[serde(rename = "in")]
    pub input: String,
    pub to: StateRef,
    #[serde(default)]
    pub update: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDoc {
    #[serde(rename = "P")]
    pub states: Vec<StateRef>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SstDoc {
    #[serde(default)]
    pub simple: bool,
    pub registers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub states: StateSet,
    #[serde(default = "zero")]
    pub initial: StateRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_alphabet: Option<Vec<String>>,
    pub transitions: Vec<SstEdgeDoc>,
    #[serde(default)]
    pub output_function: Vec<OutputDoc>,
}

fn zero() -> StateRef {
    StateRef::Index(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum MachineDoc {
    #[serde(rename = "dfa")]
    Dfa(AutomatonDoc),
    #[serde(rename = "buchi")]
    Buchi(AutomatonDoc),
    #[serde(rename = "mealy")]
    Mealy(MealyDoc),
    #[serde(rename = "1wft")]
    OneWay(TransducerDoc),
    #[serde(rename = "2wft")]
    TwoWay(TransducerDoc),
    #[serde(rename = "2wftb")]
    Lookbehind(TransducerDoc),
    #[serde(rename = "sst")]
    Sst(SstDoc),
}

#[derive(Debug, Clone)]
pub enum Machine {
    Dfa(Dfa<Vec<char>>),
    Buchi(BuchiAutomaton<Vec<char>>),
    Mealy(MealyMachine),
    OneWay(OneWayTransducer),
    TwoWay(TwoWayTransducer),
    Lookbehind(LookbehindTransducer),
    Sst(Sst),
    SimpleSst(SimpleSst),
}

impl Machine {
    pub fn kind(&self) -> &'static str {
        match self {
            Machine::Dfa(_) => "dfa",
            Machine::Buchi(_) => "buchi",
            Machine::Mealy(_) => "mealy",
            Machine::OneWay(_) => "1wft",
            Machine::TwoWay(_) => "2wft",
            Machine::Lookbehind(_) => "2wftb",
            Machine::Sst(_) => "sst",
            Machine::SimpleSst(_) => "simple sst",
        }
    }

    pub fn states(&self) -> usize {
        match self {
            Machine::Dfa(m) => m.states(),
            Machine::Buchi(m) => m.states(),
            Machine::Mealy(m) => m.states(),
            Machine::OneWay(m) => m.states(),
            Machine::TwoWay(m) => m.states(),
            Machine::Lookbehind(m) => m.states(),
            Machine::Sst(m) => m.states(),
            Machine::SimpleSst(m) => m.sst().states(),
        }
    }

    pub fn to_doc(&self) -> Result<MachineDoc> {
        Ok(match self {
            Machine::Dfa(m) => MachineDoc::Dfa(dfa_doc(m)),
            Machine::Buchi(m) => MachineDoc::Buchi(buchi_doc(m)),
            Machine::Mealy(m) => MachineDoc::Mealy(mealy_doc(m)),
            Machine::OneWay(m) => MachineDoc::OneWay(one_way_doc(m)),
            Machine::TwoWay(m) => MachineDoc::TwoWay(two_way_doc(m)),
            Machine::Lookbehind(m) => MachineDoc::Lookbehind(lookbehind_doc(m)),
            Machine::Sst(m) => MachineDoc::Sst(sst_doc(m, None)?),
            Machine::SimpleSst(m) => MachineDoc::Sst(sst_doc(m.sst(), Some(m.out()))?),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = self.to_doc()?;
        Ok(serde_json::to_string_pretty(&doc).expect("documents serialize"))
    }
}

impl From<TwoWayTransducer> for Machine {
    fn from(t: TwoWayTransducer) -> Self {
        Machine::TwoWay(t)
    }
}

impl From<LookbehindTransducer> for Machine {
    fn from(t: LookbehindTransducer) -> Self {
        Machine::Lookbehind(t)
    }
}

impl From<SimpleSst> for Machine {
    fn from(s: SimpleSst) -> Self {
        Machine::SimpleSst(s)
    }
}

/// A loaded document with every reference resolved.
#[derive(Debug, Clone, Default)]
pub struct SpecDocument {
    pub words: BTreeMap<String, InfiniteWord<char>>,
    pub machines: BTreeMap<String, Machine>,
    pub formulas: BTreeMap<String, LtlFormula>,
    pub word_docs: BTreeMap<String, WordDoc>,
}

impl SpecDocument {
    /// A word by document name, builtin name or literal.
    pub fn word(&self, name: &str) -> Result<InfiniteWord<char>> {
        if let Some(w) = self.words.get(name) {
            return Ok(w.clone());
        }
        builtin_word(name)
            .or_else(|| literal_word(name))
            .ok_or_else(|| DocError::UnresolvedReference(name.to_string()))
    }

    pub fn machine(&self, name: &str) -> Result<Machine> {
        if let Some(m) = self.machines.get(name) {
            return Ok(m.clone());
        }
        builtin_machine(name).ok_or_else(|| DocError::UnresolvedReference(name.to_string()))
    }
}

/// Keys must be unique; `serde_json` would keep the last one silently.
struct UniqueMap<V>(Vec<(String, V)>);

impl<'de, V: Deserialize<'de>> Deserialize<'de> for UniqueMap<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V2<V>(PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for V2<V> {
            type Value = UniqueMap<V>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map with unique names")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut seen = BTreeSet::new();
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, V>()? {
                    if !seen.insert(k.clone()) {
                        return Err(de::Error::custom(format!("duplicate name {k:?}")));
                    }
                    out.push((k, v));
                }
                Ok(UniqueMap(out))
            }
        }
        d.deserialize_map(V2(PhantomData))
    }
}

impl<V> Default for UniqueMap<V> {
    fn default() -> Self {
        UniqueMap(Vec::new())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default)]
    words: UniqueMap<Value>,
    #[serde(default)]
    machines: UniqueMap<Value>,
    #[serde(default)]
    formulas: UniqueMap<String>,
}

fn syntax_error(e: serde_json::Error) -> DocError {
    DocError::Parse {
        line: e.line(),
        message: e.to_string(),
    }
}

/// Line of the first occurrence of `"key"`, for errors found after parsing.
fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.find(&needle)
        .map_or(0, |i| text[..i].matches('\n').count() + 1)
}

fn typed<T: DeserializeOwned>(text: &str, name: &str, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| DocError::Parse {
        line: line_of(text, name),
        message: format!("{name}: {e}"),
    })
}

pub fn load_document(path: impl AsRef<Path>) -> Result<SpecDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DocError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_document(&text)
}

pub fn parse_document(text: &str) -> Result<SpecDocument> {
    let raw: RawDocument = serde_json::from_str(text).map_err(syntax_error)?;
    let mut word_docs = BTreeMap::new();
    for (name, v) in raw.words.0 {
        let doc = match v {
            Value::String(s) => WordDoc::Shift {
                base: WordRef::Name(s),
                n: 0,
            },
            v => typed::<WordDoc>(text, &name, v)?,
        };
        word_docs.insert(name, doc);
    }
    let mut machine_docs = BTreeMap::new();
    for (name, v) in raw.machines.0 {
        let entry = match v {
            Value::String(s) => Entry::Alias(s),
            v => Entry::Doc(typed::<MachineDoc>(text, &name, v)?),
        };
        machine_docs.insert(name, entry);
    }

    let mut resolver = WordResolver {
        docs: &word_docs,
        done: BTreeMap::new(),
        active: Vec::new(),
    };
    for name in word_docs.keys() {
        resolver.by_name(name)?;
    }
    let words = resolver.done;

    let mut machines = MachineResolver {
        docs: &machine_docs,
        done: BTreeMap::new(),
        active: Vec::new(),
    };
    for name in machine_docs.keys() {
        machines.by_name(name)?;
    }
    let machines = machines.done;

    let mut formulas = BTreeMap::new();
    for (name, text) in raw.formulas.0 {
        let f = LtlFormula::parse(&text).map_err(|e| violation(&name, "ltl", e))?;
        formulas.insert(name, f);
    }
    Ok(SpecDocument {
        words,
        machines,
        formulas,
        word_docs,
    })
}

/// A standalone machine document, as written by [`Machine::to_json`].
pub fn parse_machine(text: &str) -> Result<Machine> {
    let doc: MachineDoc = serde_json::from_str(text).map_err(syntax_error)?;
    build_machine("-", &doc, &mut |name| {
        Err(DocError::UnresolvedReference(name.to_string()))
    })
}

struct WordResolver<'a> {
    docs: &'a BTreeMap<String, WordDoc>,
    done: BTreeMap<String, InfiniteWord<char>>,
    active: Vec<String>,
}

impl WordResolver<'_> {
    fn by_name(&mut self, name: &str) -> Result<InfiniteWord<char>> {
        if let Some(w) = self.done.get(name) {
            return Ok(w.clone());
        }
        let Some(doc) = self.docs.get(name) else {
            return builtin_word(name)
                .or_else(|| literal_word(name))
                .ok_or_else(|| DocError::UnresolvedReference(name.to_string()));
        };
        if self.active.iter().any(|a| a == name) {
            return Err(violation(name, "doc", "the word refers to itself"));
        }
        self.active.push(name.to_string());
        let w = self.build(name, doc)?;
        self.active.pop();
        self.done.insert(name.to_string(), w.clone());
        Ok(w)
    }

    fn reference(&mut self, ctx: &str, r: &WordRef) -> Result<InfiniteWord<char>> {
        match r {
            WordRef::Name(n) => self.by_name(n),
            WordRef::Doc(d) => self.build(ctx, d),
        }
    }

    fn build(&mut self, name: &str, doc: &WordDoc) -> Result<InfiniteWord<char>> {
        Ok(match doc {
            WordDoc::Lasso { u, v } => {
                let u = letters(name, u)?;
                let v = letters(name, v)?;
                InfiniteWord::lasso(u, v).map_err(|e| violation(name, "words", e))?
            }
            WordDoc::Pi { k } => {
                if *k == 0 {
                    return Err(violation(name, "words", "pi needs k >= 1"));
                }
                words::pi_word(*k)
            }
            WordDoc::Shift { base, n } => words::shift(&self.reference(name, base)?, *n),
            WordDoc::Mu { base, n } => {
                if *n == 0 {
                    return Err(violation(
                        name,
                        "words",
                        "duplication factor must be positive",
                    ));
                }
                words::duplicate(&self.reference(name, base)?, *n)
            }
            WordDoc::Mirror { base } => words::block_mirror(&self.reference(name, base)?),
            WordDoc::Constant { letter: l } => InfiniteWord::constant(letter(name, l)?),
        })
    }
}

enum Entry {
    Alias(String),
    Doc(MachineDoc),
}

struct MachineResolver<'a> {
    docs: &'a BTreeMap<String, Entry>,
    done: BTreeMap<String, Machine>,
    active: Vec<String>,
}

impl MachineResolver<'_> {
    fn by_name(&mut self, name: &str) -> Result<Machine> {
        if let Some(m) = self.done.get(name) {
            return Ok(m.clone());
        }
        let Some(entry) = self.docs.get(name) else {
            return builtin_machine(name)
                .ok_or_else(|| DocError::UnresolvedReference(name.to_string()));
        };
        if self.active.iter().any(|a| a == name) {
            return Err(violation(name, "doc", "the machine refers to itself"));
        }
        self.active.push(name.to_string());
        let m = match entry {
            Entry::Alias(target) => self.by_name(target)?,
            Entry::Doc(doc) => build_machine(name, doc, &mut |n| self.by_name(n))?,
        };
        self.active.pop();
        self.done.insert(name.to_string(), m.clone());
        Ok(m)
    }
}

/// Words available without a document.
pub fn builtin_word(name: &str) -> Option<InfiniteWord<char>> {
    match name {
        "pi" => Some(words::pi_word(1)),
        "blank" | "pad" => Some(InfiniteWord::constant(PAD)),
        _ => {
            let k = name
                .strip_prefix("pi^")
                .or_else(|| name.strip_prefix("pi"))?;
            let k: usize = k.parse().ok().filter(|&k| k >= 1)?;
            Some(words::pi_word(k))
        }
    }
}

/// Machines available without a document, with their descriptions.
pub const BUILTIN_MACHINES: &[(&str, &str)] = &[
    (
        "mirror2wft",
        "2wft reversing #-terminated blocks over {a, b}",
    ),
    (
        "mirror_sst",
        "simple sst reversing #-terminated blocks over {a, b}",
    ),
    ("identity_sst", "simple sst copying words over {a, b, #}"),
    (
        "interleaver_sst",
        "simple sst writing the a's then the b's of each block",
    ),
    ("copier", "2wft copying words over {0, 1}"),
    ("bounce", "2wft over {0, 1} with left excursions"),
    ("stutter", "2wft over {0, 1} stepping back once per zero"),
    (
        "back_visit",
        "2wft over {0, 1} revisiting the previous block",
    ),
    (
        "endmarker_touch",
        "2wft over {a, b} returning to the endmarker once",
    ),
    (
        "endmarker_bouncer",
        "2wft over {a, b} visiting the endmarker forever",
    ),
    ("expander2", "1wft mapping pi to pi^2"),
    ("expander3", "1wft mapping pi to pi^3"),
];

pub fn builtin_machine(name: &str) -> Option<Machine> {
    let ab = Alphabet::new(['a', 'b']).expect("alphabet");
    Some(match name {
        "mirror2wft" => mirror_blocks_2wft(&ab).into(),
        "mirror_sst" => mirror_sst(&['a', 'b']).into(),
        "identity_sst" => identity_sst(&['a', 'b', SEPARATOR]).into(),
        "interleaver_sst" => interleaver_sst().into(),
        "copier" => samples::copier().into(),
        "bounce" => samples::bounce().into(),
        "stutter" => samples::stutter().into(),
        "back_visit" => samples::back_visit().into(),
        "endmarker_touch" => samples::endmarker_touch(&['a', 'b']).into(),
        "endmarker_bouncer" => samples::endmarker_bouncer(&['a', 'b']).into(),
        _ => {
            let k: usize = name
                .strip_prefix("expander")?
                .parse()
                .ok()
                .filter(|&k| k >= 1)?;
            Machine::OneWay(pi_k_expander_1wft(k, false))
        }
    })
}

/// `u·(v)^ω` with `_` read as the padding letter.
pub fn literal_word(s: &str) -> Option<InfiniteWord<char>> {
    let w = LassoWord::parse_literal(s)
        .ok()?
        .map(|&c| from_doc_letter(c));
    InfiniteWord::lasso(w.prefix().to_vec(), w.period().to_vec()).ok()
}

fn from_doc_letter(c: char) -> char {
    if c == PAD_ASCII {
        PAD
    } else {
        c
    }
}

fn show(c: char) -> String {
    words::display_letter(c).to_string()
}

fn show_all(cs: impl IntoIterator<Item = char>) -> String {
    cs.into_iter().map(words::display_letter).collect()
}

fn letter(name: &str, s: &str) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(from_doc_letter(c)),
        _ => Err(violation(
            name,
            "doc",
            format!("{s:?} is not a single letter"),
        )),
    }
}

fn letters(_name: &str, s: &str) -> Result<Vec<char>> {
    Ok(s.chars().map(from_doc_letter).collect())
}

fn letter_list(name: &str, list: &[String]) -> Result<Vec<char>> {
    list.iter().map(|s| letter(name, s)).collect()
}

struct States {
    count: usize,
    names: Option<Vec<String>>,
}

impl States {
    fn new(name: &str, set: &StateSet) -> Result<Self> {
        match set {
            StateSet::Count(n) => Ok(Self {
                count: *n,
                names: None,
            }),
            StateSet::Names(ns) => {
                let mut seen = BTreeSet::new();
                if let Some(d) = ns.iter().find(|n| !seen.insert(n.as_str())) {
                    return Err(violation(
                        name,
                        "doc",
                        format!("state {d:?} is declared twice"),
                    ));
                }
                Ok(Self {
                    count: ns.len(),
                    names: Some(ns.clone()),
                })
            }
        }
    }

    fn get(&self, name: &str, r: &StateRef) -> Result<usize> {
        let found = match r {
            StateRef::Index(i) => Some(*i).filter(|&i| i < self.count),
            StateRef::Name(n) => self
                .names
                .as_ref()
                .and_then(|ns| ns.iter().position(|m| m == n))
                .or_else(|| n.parse().ok().filter(|&i| i < self.count)),
        };
        found.ok_or_else(|| violation(name, "doc", format!("unknown state {r:?}")))
    }
}

type Lookup<'a> = dyn FnMut(&str) -> Result<Machine> + 'a;

fn build_machine(name: &str, doc: &MachineDoc, lookup: &mut Lookup<'_>) -> Result<Machine> {
    Ok(match doc {
        MachineDoc::Dfa(d) => Machine::Dfa(build_dfa(name, d)?),
        MachineDoc::Buchi(d) => Machine::Buchi(build_buchi(name, d)?),
        MachineDoc::Mealy(d) => Machine::Mealy(build_mealy(name, d)?),
        MachineDoc::OneWay(d) => Machine::OneWay(build_one_way(name, d)?),
        MachineDoc::TwoWay(d) => Machine::TwoWay(build_two_way(name, d)?),
        MachineDoc::Lookbehind(d) => Machine::Lookbehind(build_lookbehind(name, d, lookup)?),
        MachineDoc::Sst(d) => build_sst(name, d)?,
    })
}

fn tracks(name: &str, alphabet: &AlphabetDoc) -> Result<(Vec<Vec<char>>, usize)> {
    match alphabet {
        AlphabetDoc::Letters(ls) => Ok((
            letter_list(name, ls)?
                .into_iter()
                .map(|c| vec![c])
                .collect(),
            1,
        )),
        AlphabetDoc::Product { product } => {
            let mut all: Vec<Vec<char>> = vec![Vec::new()];
            for track in product {
                let track = letter_list(name, track)?;
                all = all
                    .iter()
                    .flat_map(|p| track.iter().map(move |&c| [p.clone(), vec![c]].concat()))
                    .collect();
            }
            Ok((all, product.len()))
        }
    }
}

fn track_letter(name: &str, s: &str, width: usize) -> Result<Vec<char>> {
    let l = letters(name, s)?;
    if l.len() != width {
        return Err(violation(
            name,
            "doc",
            format!("letter {s:?} needs {width} tracks"),
        ));
    }
    Ok(l)
}

type Edges = Vec<(usize, Vec<char>, usize)>;

fn automaton_parts(name: &str, d: &AutomatonDoc) -> Result<(States, Vec<Vec<char>>, Edges)> {
    let states = States::new(name, &d.states)?;
    let (alphabet, width) = tracks(name, &d.alphabet)?;
    let edges = d
        .transitions
        .iter()
        .map(|e| {
            Ok((
                states.get(name, &e.from)?,
                track_letter(name, &e.letter, width)?,
                states.get(name, &e.to)?,
            ))
        })
        .collect::<Result<_>>()?;
    Ok((states, alphabet, edges))
}

fn initial_set(name: &str, states: &States, i: &OneOrMany) -> Result<Vec<usize>> {
    match i {
        OneOrMany::One(r) => Ok(vec![states.get(name, r)?]),
        OneOrMany::Many(rs) => rs.iter().map(|r| states.get(name, r)).collect(),
    }
}

fn build_dfa(name: &str, d: &AutomatonDoc) -> Result<Dfa<Vec<char>>> {
    let (states, alphabet, edges) = automaton_parts(name, d)?;
    let initial = match initial_set(name, &states, &d.initial)?.as_slice() {
        &[q] => q,
        _ => {
            return Err(violation(
                name,
                "advice",
                "a dfa has exactly one initial state",
            ))
        }
    };
    let accepting: Vec<usize> = d
        .accepting
        .iter()
        .map(|r| states.get(name, r))
        .collect::<Result<_>>()?;
    Dfa::new(states.count, initial, accepting, alphabet, edges)
        .map_err(|e| violation(name, "advice", e))
}

fn build_buchi(name: &str, d: &AutomatonDoc) -> Result<BuchiAutomaton<Vec<char>>> {
    let (states, alphabet, edges) = automaton_parts(name, d)?;
    let initial = initial_set(name, &states, &d.initial)?;
    let accepting: Vec<usize> = d
        .accepting
        .iter()
        .map(|r| states.get(name, r))
        .collect::<Result<_>>()?;
    BuchiAutomaton::new(states.count, initial, accepting, alphabet, edges)
        .map_err(|e| violation(name, "advice", e))
}

fn single_track(name: &str, dfa: &Dfa<Vec<char>>) -> Result<Dfa<char>> {
    let one = |l: &Vec<char>| match l.as_slice() {
        &[c] => Ok(c),
        _ => Err(violation(
            name,
            "transducers",
            "the oracle must read single letters",
        )),
    };
    let alphabet: Vec<char> = dfa.alphabet().iter().map(one).collect::<Result<_>>()?;
    let edges: Vec<(usize, char, usize)> = dfa
        .transitions()
        .map(|(p, l, q)| Ok((p, one(l)?, q)))
        .collect::<Result<_>>()?;
    Dfa::new(
        dfa.states(),
        dfa.initial(),
        dfa.accepting().iter().copied(),
        alphabet,
        edges,
    )
    .map_err(|e| violation(name, "advice", e))
}

fn build_mealy(name: &str, d: &MealyDoc) -> Result<MealyMachine> {
    let states = States::new(name, &d.states)?;
    let edges: Vec<_> = d
        .transitions
        .iter()
        .map(|e| {
            Ok((
                states.get(name, &e.from)?,
                letter(name, &e.input)?,
                letter(name, &e.out)?,
                states.get(name, &e.to)?,
            ))
        })
        .collect::<Result<_>>()?;
    MealyMachine::new(
        states.count,
        states.get(name, &d.initial)?,
        letter_list(name, &d.input_alphabet)?,
        letter_list(name, &d.output_alphabet)?,
        edges,
    )
    .map_err(|e| violation(name, "mealy", e))
}

fn tape_symbol(name: &str, s: &str) -> Result<TapeSymbol> {
    if s == "^" || s == "⊢" {
        Ok(TapeSymbol::EndMarker)
    } else {
        Ok(TapeSymbol::Letter(letter(name, s)?))
    }
}

fn direction(name: &str, m: Option<&str>) -> Result<Move> {
    match m {
        Some("L") => Ok(Move::Left),
        Some("R") => Ok(Move::Right),
        other => Err(violation(
            name,
            "doc",
            format!("move must be \"L\" or \"R\", found {other:?}"),
        )),
    }
}

fn action(name: &str, states: &States, t: &TransitionDoc) -> Result<Action> {
    Ok(Action {
        output: letters(name, &t.out)?,
        direction: direction(name, t.direction.as_deref())?,
        to: states.get(name, &t.to)?,
    })
}

fn build_one_way(name: &str, d: &TransducerDoc) -> Result<OneWayTransducer> {
    let states = States::new(name, &d.states)?;
    let edges: Vec<_> = d
        .transitions
        .iter()
        .map(|t| {
            Ok((
                states.get(name, &t.from)?,
                letter(name, &t.read)?,
                letters(name, &t.out)?,
                states.get(name, &t.to)?,
            ))
        })
        .collect::<Result<_>>()?;
    OneWayTransducer::new(
        states.count,
        states.get(name, &d.initial)?,
        letter_list(name, &d.input_alphabet)?,
        letter_list(name, &d.output_alphabet)?,
        edges,
    )
    .map_err(|e| violation(name, "transducers", e))
}

fn build_two_way(name: &str, d: &TransducerDoc) -> Result<TwoWayTransducer> {
    let states = States::new(name, &d.states)?;
    let edges: Vec<_> = d
        .transitions
        .iter()
        .map(|t| {
            Ok((
                states.get(name, &t.from)?,
                tape_symbol(name, &t.read)?,
                action(name, &states, t)?,
            ))
        })
        .collect::<Result<_>>()?;
    TwoWayTransducer::new(
        states.count,
        states.get(name, &d.initial)?,
        letter_list(name, &d.input_alphabet)?,
        letter_list(name, &d.output_alphabet)?,
        d.endmarker.unwrap_or(true),
        edges,
    )
    .map_err(|e| violation(name, "transducers", e))
}

fn build_lookbehind(
    name: &str,
    d: &TransducerDoc,
    lookup: &mut Lookup<'_>,
) -> Result<LookbehindTransducer> {
    let oracle = match &d.oracle {
        None => return Err(violation(name, "transducers", "a 2wftb needs an oracle")),
        Some(OracleRef::Doc(a)) => single_track(name, &build_dfa(name, a)?)?,
        Some(OracleRef::Name(n)) => match lookup(n)? {
            Machine::Dfa(dfa) => single_track(name, &dfa)?,
            other => {
                return Err(violation(
                    name,
                    "transducers",
                    format!("oracle {n:?} is a {}", other.kind()),
                ))
            }
        },
    };
    let states = States::new(name, &d.states)?;
    let lb = States {
        count: oracle.states(),
        names: None,
    };
    let edges: Vec<_> =
        d.transitions
            .iter()
            .map(|t| {
                let s = t.lookbehind.as_ref().ok_or_else(|| {
                    violation(name, "doc", "a 2wftb transition needs a lookbehind")
                })?;
                Ok((
                    states.get(name, &t.from)?,
                    tape_symbol(name, &t.read)?,
                    lb.get(name, s)?,
                    action(name, &states, t)?,
                ))
            })
            .collect::<Result<_>>()?;
    LookbehindTransducer::new(
        states.count,
        states.get(name, &d.initial)?,
        letter_list(name, &d.input_alphabet)?,
        letter_list(name, &d.output_alphabet)?,
        d.endmarker.unwrap_or(true),
        oracle,
        edges,
    )
    .map_err(|e| violation(name, "transducers", e))
}

const PAD_TOKEN: &str = "_";

fn build_sst(name: &str, d: &SstDoc) -> Result<Machine> {
    let states = States::new(name, &d.states)?;
    let pad_is_register = d.registers.iter().any(|r| r == PAD_TOKEN);
    let mut inputs = BTreeSet::new();
    let mut outputs = BTreeSet::new();
    let mut edges = Vec::new();
    for e in &d.transitions {
        let a = letter(name, &e.input)?;
        inputs.insert(a);
        let update: BTreeMap<String, String> = e
            .update
            .iter()
            .map(|(k, v)| {
                let v: Vec<&str> = v
                    .split_whitespace()
                    .map(|t| {
                        if t == PAD_TOKEN && !pad_is_register {
                            "\u{25A1}"
                        } else {
                            t
                        }
                    })
                    .collect();
                for t in &v {
                    if !d.registers.iter().any(|r| r == t) {
                        outputs.extend(t.chars());
                    }
                }
                (k.clone(), v.join(" "))
            })
            .collect();
        let sub =
            Substitution::parse(&d.registers, &update).map_err(|e| violation(name, "sst", e))?;
        edges.push((states.get(name, &e.from)?, a, sub, states.get(name, &e.to)?));
    }
    if let Some(list) = &d.input_alphabet {
        inputs = letter_list(name, list)?.into_iter().collect();
    }
    if let Some(list) = &d.output_alphabet {
        outputs = letter_list(name, list)?.into_iter().collect();
    }
    let register = |r: &str| {
        d.registers
            .iter()
            .position(|x| x == r)
            .ok_or_else(|| violation(name, "sst", format!("no register {r:?}")))
    };
    let mut output_function = Vec::new();
    for o in &d.output_function {
        let set: BTreeSet<usize> = o
            .states
            .iter()
            .map(|r| states.get(name, r))
            .collect::<Result<_>>()?;
        let regs: Vec<usize> = o
            .value
            .split_whitespace()
            .map(register)
            .collect::<Result<_>>()?;
        output_function.push((set, regs));
    }
    let sst = Sst::new(
        states.count,
        states.get(name, &d.initial)?,
        inputs,
        outputs,
        d.registers.clone(),
        edges,
        output_function,
    )
    .map_err(|e| violation(name, "sst", e))?;
    if !d.simple {
        return Ok(Machine::Sst(sst));
    }
    let out = d.out.as_deref().unwrap_or("out");
    let simple = SimpleSst::from_named(sst, out).map_err(|e| violation(name, "sst", e))?;
    Ok(Machine::SimpleSst(simple))
}

fn count(n: usize) -> StateSet {
    StateSet::Count(n)
}

fn ix(q: usize) -> StateRef {
    StateRef::Index(q)
}

fn letter_strings(cs: impl IntoIterator<Item = char>) -> Vec<String> {
    cs.into_iter().map(show).collect()
}

fn automaton_doc<'a>(
    states: usize,
    initial: OneOrMany,
    accepting: &BTreeSet<usize>,
    alphabet: &BTreeSet<Vec<char>>,
    transitions: impl Iterator<Item = (usize, &'a Vec<char>, usize)>,
) -> AutomatonDoc {
    let width = alphabet.iter().map(Vec::len).max().unwrap_or(1);
    let alphabet = if width == 1 {
        AlphabetDoc::Letters(
            alphabet
                .iter()
                .flat_map(|l| l.iter().copied())
                .map(show)
                .collect(),
        )
    } else {
        let product = (0..width)
            .map(|i| {
                let track: BTreeSet<char> =
                    alphabet.iter().filter_map(|l| l.get(i).copied()).collect();
                letter_strings(track)
            })
            .collect();
        AlphabetDoc::Product { product }
    };
    AutomatonDoc {
        states: count(states),
        initial,
        accepting: accepting.iter().map(|&q| ix(q)).collect(),
        alphabet,
        transitions: transitions
            .map(|(p, l, q)| EdgeDoc {
                from: ix(p),
                letter: show_all(l.iter().copied()),
                to: ix(q),
            })
            .collect(),
    }
}

pub fn dfa_doc(d: &Dfa<Vec<char>>) -> AutomatonDoc {
    automaton_doc(
        d.states(),
        OneOrMany::One(ix(d.initial())),
        d.accepting(),
        d.alphabet(),
        d.transitions(),
    )
}

fn char_dfa_doc(d: &Dfa<char>) -> AutomatonDoc {
    let alphabet: BTreeSet<Vec<char>> = d.alphabet().iter().map(|&c| vec![c]).collect();
    let edges: Vec<(usize, Vec<char>, usize)> =
        d.transitions().map(|(p, &c, q)| (p, vec![c], q)).collect();
    automaton_doc(
        d.states(),
        OneOrMany::One(ix(d.initial())),
        d.accepting(),
        &alphabet,
        edges.iter().map(|(p, l, q)| (*p, l, *q)),
    )
}

pub fn buchi_doc(b: &BuchiAutomaton<Vec<char>>) -> AutomatonDoc {
    let initial = OneOrMany::Many(b.initial().iter().map(|&q| ix(q)).collect());
    automaton_doc(
        b.states(),
        initial,
        b.accepting(),
        b.alphabet(),
        b.transitions(),
    )
}

pub fn mealy_doc(m: &MealyMachine) -> MealyDoc {
    MealyDoc {
        states: count(m.states()),
        initial: ix(m.initial()),
        input_alphabet: letter_strings(m.input_alphabet().iter().copied()),
        output_alphabet: letter_strings(m.output_alphabet().iter().copied()),
        transitions: m
            .transitions()
            .map(|(p, a, b, q)| MealyEdgeDoc {
                from: ix(p),
                input: show(a),
                out: show(b),
                to: ix(q),
            })
            .collect(),
    }
}

pub fn one_way_doc(t: &OneWayTransducer) -> TransducerDoc {
    TransducerDoc {
        states: count(t.states()),
        initial: ix(t.initial()),
        input_alphabet: letter_strings(t.input_alphabet().iter().copied()),
        output_alphabet: letter_strings(t.output_alphabet().iter().copied()),
        endmarker: None,
        transitions: t
            .transitions()
            .map(|(p, a, w, q)| TransitionDoc {
                from: ix(p),
                read: show(a),
                lookbehind: None,
                out: show_all(w.iter().copied()),
                direction: None,
                to: ix(q),
            })
            .collect(),
        oracle: None,
    }
}

fn symbol_doc(sym: TapeSymbol) -> String {
    match sym {
        TapeSymbol::EndMarker => "^".to_string(),
        TapeSymbol::Letter(c) => show(c),
    }
}

fn transition_doc(p: usize, sym: TapeSymbol, s: Option<usize>, a: &Action) -> TransitionDoc {
    TransitionDoc {
        from: ix(p),
        read: symbol_doc(sym),
        lookbehind: s.map(ix),
        out: show_all(a.output.iter().copied()),
        direction: Some(match a.direction {
            Move::Left => "L".to_string(),
            Move::Right => "R".to_string(),
        }),
        to: ix(a.to),
    }
}

pub fn two_way_doc(t: &TwoWayTransducer) -> TransducerDoc {
    TransducerDoc {
        states: count(t.states()),
        initial: ix(t.initial()),
        input_alphabet: letter_strings(t.input_alphabet().iter().copied()),
        output_alphabet: letter_strings(t.output_alphabet().iter().copied()),
        endmarker: Some(t.has_endmarker()),
        transitions: t
            .transitions()
            .map(|(p, sym, a)| transition_doc(p, sym, None, a))
            .collect(),
        oracle: None,
    }
}

pub fn lookbehind_doc(t: &LookbehindTransducer) -> TransducerDoc {
    TransducerDoc {
        states: count(t.states()),
        initial: ix(t.initial()),
        input_alphabet: letter_strings(t.input_alphabet().iter().copied()),
        output_alphabet: letter_strings(t.output_alphabet().iter().copied()),
        endmarker: Some(t.has_endmarker()),
        transitions: t
            .transitions()
            .map(|(p, sym, s, a)| transition_doc(p, sym, Some(s), a))
            .collect(),
        oracle: Some(OracleRef::Doc(char_dfa_doc(t.oracle()))),
    }
}

pub fn sst_doc(s: &Sst, out: Option<usize>) -> Result<SstDoc> {
    let names = s.registers();
    let clash = |c: char| {
        names
            .iter()
            .any(|r| *r == c.to_string() || (c == PAD && r == PAD_TOKEN))
    };
    if let Some(c) = s.output_alphabet().iter().copied().find(|&c| clash(c)) {
        return Err(DocError::Unrepresentable(format!(
            "letter {c:?} is also a register name"
        )));
    }
    let transitions = s
        .transitions()
        .map(|(p, a, sub, q)| {
            let update = names
                .iter()
                .enumerate()
                .filter(|&(i, _)| sub.get(i) != [crate::sst::Token::Reg(i)])
                .map(|(i, n)| {
                    (
                        n.clone(),
                        render_tokens(sub.get(i), names).replace('\u{25A1}', PAD_TOKEN),
                    )
                })
                .collect();
            SstEdgeDoc {
                from: ix(p),
                input: show(a),
                to: ix(q),
                update,
            }
        })
        .collect();
    Ok(SstDoc {
        simple: out.is_some(),
        registers: names.to_vec(),
        out: out.map(|r| names[r].clone()),
        states: count(s.states()),
        initial: ix(s.initial()),
        input_alphabet: Some(letter_strings(s.input_alphabet().iter().copied())),
        output_alphabet: Some(letter_strings(s.output_alphabet().iter().copied())),
        transitions,
        output_function: s
            .output_function()
            .iter()
            .map(|(set, regs)| OutputDoc {
                states: set.iter().map(|&q| ix(q)).collect(),
                value: regs
                    .iter()
                    .map(|&r| names[r].as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
            })
            .collect(),
    })
}

/// The lasso document of `w`.
pub fn lasso_doc(w: &LassoWord<char>) -> WordDoc {
    WordDoc::Lasso {
        u: show_all(w.prefix().iter().copied()),
        v: show_all(w.period().iter().copied()),
    }
}
