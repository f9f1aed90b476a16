use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use advicebench_core::analysis::{
    padding_check, prefix_equiv, subword_complexity, Equivalence, LetterSource,
};
use advicebench_core::doc::{self, lasso_doc, DocError, Machine, SpecDocument, BUILTIN_MACHINES};
use advicebench_core::mealy::run_mealy;
use advicebench_core::sst::{
    compile_sst_to_2wftb, eliminate_lookbehind_lasso, run_simple_sst, run_sst,
    simplify_to_simple_sst,
};
use advicebench_core::suites::{run_all, run_suite, suite_names, SuiteReport};
use advicebench_core::transducers::{
    normalize_directions_on_pi, one_way_simulation_on_pi, remove_endmarker, run_1wft, run_2wft,
    run_2wft_b,
};
use advicebench_core::words::render;
use advicebench_core::{InfiniteWord, LassoWord, LtlFormula};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

/// `println!` that ignores a closed stdout, as when piped into `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "advicebench",
    version,
    about = "Automata and transducers over infinite words with advice"
)]
struct Cli {
    /// Print JSON reports instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Step budget for producing each output letter.
    #[arg(
        long,
        global = true,
        env = "ADVICEBENCH_BUDGET",
        default_value_t = 100_000
    )]
    budget: usize,
    /// Document with named words, machines and formulas.
    #[arg(long, global = true)]
    doc: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the first N output letters of a machine on a word.
    Run {
        machine: String,
        word: String,
        #[arg(short, default_value_t = 20)]
        n: usize,
    },
    /// Apply a construction and print the resulting machine document.
    Convert {
        #[arg(value_enum)]
        construction: Construction,
        machine: String,
        /// Input word, for constructions that depend on it.
        #[arg(long)]
        word: Option<String>,
        /// Letters checked against the original machine.
        #[arg(long, default_value_t = 300)]
        probe: usize,
        /// Largest window tried by the one-way simulation.
        #[arg(long, default_value_t = 3)]
        c_max: usize,
    },
    /// Compare two output streams letter by letter. A source is a word, or
    /// `MACHINE@WORD` for the output of a machine.
    Compare {
        left: String,
        right: String,
        #[arg(short, default_value_t = 100)]
        n: usize,
    },
    /// Print measurements on words.
    Analyze {
        #[command(subcommand)]
        what: Analysis,
    },
    /// Run an acceptance suite, or `all`.
    Check { suite: String },
    /// List or print words.
    Words {
        #[command(subcommand)]
        what: WordsCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Sst2wftb,
    Simplify,
    Unlookbehind,
    NormalizePi,
    OnewayPi,
    RemoveEndmarker,
}

#[derive(Subcommand)]
enum Analysis {
    /// Subword complexity p(k) for k = 1..=K.
    Complexity {
        word: String,
        #[arg(short, default_value_t = 8)]
        k: usize,
        /// Prefix length for words that are not lassos.
        #[arg(long, default_value_t = 10_000)]
        window: usize,
    },
    /// Padding lengths f(n) for the suffixes of a lasso satisfying a formula.
    Padding {
        formula: String,
        word: String,
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(long, default_value_t = 20)]
        to: usize,
    },
}

#[derive(Subcommand)]
enum WordsCommand {
    /// Names of the document words, builtin words and builtin machines.
    List,
    /// The first N letters of a word.
    Show {
        word: String,
        #[arg(short, default_value_t = 40)]
        n: usize,
    },
}

enum Failure {
    /// Exit code 1: a divergence, a failed check or a run that stopped.
    Negative,
    /// Exit code 2: usage or document errors.
    Usage(String),
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure::Usage(message.to_string())
}

struct Context {
    doc: SpecDocument,
    json: bool,
    budget: usize,
    stdin_used: bool,
}

impl Context {
    fn word(&self, name: &str) -> Result<InfiniteWord<char>, Failure> {
        Ok(self.doc.word(name)?)
    }

    fn lasso(&self, name: &str) -> Result<LassoWord<char>, Failure> {
        self.word(name)?
            .to_lasso()
            .ok_or_else(|| usage(format!("{name} is not ultimately periodic")))
    }

    /// `-` reads a machine document from stdin; a path to an existing file
    /// is read as a machine document.
    fn machine(&mut self, name: &str) -> Result<Machine, Failure> {
        if name == "-" {
            if self.stdin_used {
                return Err(usage("stdin can only be read once"));
            }
            self.stdin_used = true;
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text).map_err(usage)?;
            return Ok(doc::parse_machine(&text)?);
        }
        match self.doc.machine(name) {
            Ok(m) => Ok(m),
            Err(e) if Path::new(name).is_file() => {
                let text = std::fs::read_to_string(name).map_err(|_| Failure::from(e))?;
                Ok(doc::parse_machine(&text)?)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn output(
        &self,
        m: &Machine,
        input: &InfiniteWord<char>,
    ) -> Result<Box<dyn LetterSource>, Failure> {
        let b = self.budget;
        Ok(match m {
            Machine::Mealy(m) => Box::new(run_mealy(m, input)),
            Machine::OneWay(t) => Box::new(run_1wft(t, input, b)),
            Machine::TwoWay(t) => Box::new(run_2wft(t, input, b)),
            Machine::Lookbehind(t) => Box::new(run_2wft_b(t, input, b)),
            Machine::SimpleSst(s) => Box::new(run_simple_sst(s, input, b)),
            Machine::Sst(s) => Box::new(run_sst(s, input, b).map_err(usage)?),
            other => return Err(usage(format!("a {} has no output", other.kind()))),
        })
    }

    /// A word, or `MACHINE@WORD`.
    fn source(&mut self, text: &str) -> Result<Box<dyn LetterSource>, Failure> {
        if let Some((m, w)) = text.split_once('@') {
            let machine = self.machine(m)?;
            let input = self.word(w)?;
            return self.output(&machine, &input);
        }
        Ok(Box::new(self.word(text)?))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let doc = match &cli.doc {
        None => Ok(SpecDocument::default()),
        Some(path) => doc::load_document(path),
    };
    let result = doc.map_err(Failure::from).and_then(|doc| {
        let mut ctx = Context {
            doc,
            json: cli.json,
            budget: cli.budget,
            stdin_used: false,
        };
        dispatch(&mut ctx, cli.command)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("advicebench: {m}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(ctx: &mut Context, command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { machine, word, n } => run(ctx, &machine, &word, n),
        Command::Convert {
            construction,
            machine,
            word,
            probe,
            c_max,
        } => convert(ctx, construction, &machine, word.as_deref(), probe, c_max),
        Command::Compare { left, right, n } => compare(ctx, &left, &right, n),
        Command::Analyze {
            what: Analysis::Complexity { word, k, window },
        } => complexity(ctx, &word, k, window),
        Command::Analyze {
            what:
                Analysis::Padding {
                    formula,
                    word,
                    from,
                    to,
                },
        } => padding(ctx, &formula, &word, from, to),
        Command::Check { suite } => check(ctx, &suite),
        Command::Words {
            what: WordsCommand::List,
        } => list(ctx),
        Command::Words {
            what: WordsCommand::Show { word, n },
        } => show(ctx, &word, n),
    }
}

fn run(ctx: &mut Context, machine: &str, word: &str, n: usize) -> Result<(), Failure> {
    let m = ctx.machine(machine)?;
    let input = ctx.word(word)?;
    let mut out = ctx.output(&m, &input)?;
    let mut letters = Vec::with_capacity(n);
    let mut stopped = None;
    for i in 0..n {
        match out.letter(i) {
            Ok(c) => letters.push(c),
            Err(status) => {
                stopped = Some((i, status));
                break;
            }
        }
    }
    let text = render(&letters);
    if ctx.json {
        let status = stopped
            .as_ref()
            .map(|(i, s)| json!({"index": i, "status": s}));
        out!(
            "{}",
            json!({"machine": machine, "word": word, "n": n, "output": text, "stopped": status})
        );
    } else {
        out!("{text}");
        if let Some((i, s)) = &stopped {
            eprintln!("advicebench: output stopped after {i} letters: {s}");
        }
    }
    if stopped.is_some() {
        Err(Failure::Negative)
    } else {
        Ok(())
    }
}

fn convert(
    ctx: &mut Context,
    construction: Construction,
    machine: &str,
    word: Option<&str>,
    probe: usize,
    c_max: usize,
) -> Result<(), Failure> {
    let m = ctx.machine(machine)?;
    let need_word = || word.ok_or_else(|| usage("this construction needs --word"));
    let wrong = |m: &Machine, want: &str| usage(format!("expected a {want}, found a {}", m.kind()));
    let result: Machine = match (construction, &m) {
        (Construction::Sst2wftb, Machine::SimpleSst(s)) => {
            compile_sst_to_2wftb(s).map_err(usage)?.into()
        }
        (Construction::Sst2wftb, other) => return Err(wrong(other, "simple sst")),
        (Construction::Simplify, Machine::Sst(s)) => {
            simplify_to_simple_sst(s, &ctx.lasso(need_word()?)?)
                .map_err(usage)?
                .into()
        }
        (Construction::Simplify, Machine::SimpleSst(s)) => {
            simplify_to_simple_sst(s.sst(), &ctx.lasso(need_word()?)?)
                .map_err(usage)?
                .into()
        }
        (Construction::Simplify, other) => return Err(wrong(other, "sst")),
        (Construction::Unlookbehind, Machine::Lookbehind(t)) => {
            let w = ctx.lasso(need_word()?)?;
            eliminate_lookbehind_lasso(t, &w, 10 * ctx.budget)
                .map_err(usage)?
                .into()
        }
        (Construction::Unlookbehind, other) => return Err(wrong(other, "2wftb")),
        (Construction::NormalizePi, Machine::TwoWay(t)) => {
            normalize_directions_on_pi(t, probe).map_err(usage)?.into()
        }
        (Construction::OnewayPi, Machine::TwoWay(t)) => Machine::OneWay(
            one_way_simulation_on_pi(t, c_max, probe)
                .map_err(usage)?
                .machine,
        ),
        (Construction::RemoveEndmarker, Machine::TwoWay(t)) => {
            let w = ctx.word(need_word()?)?;
            remove_endmarker(t, &w, ctx.budget).map_err(usage)?.into()
        }
        (_, other) => return Err(wrong(other, "2wft")),
    };
    out!("{}", result.to_json()?);
    Ok(())
}

fn compare(ctx: &mut Context, left: &str, right: &str, n: usize) -> Result<(), Failure> {
    let mut a = ctx.source(left)?;
    let mut b = ctx.source(right)?;
    let verdict = prefix_equiv(&mut *a, &mut *b, n);
    if ctx.json {
        out!("{}", serde_json::to_string(&verdict).expect("serializable"));
    } else {
        match &verdict {
            Equivalence::Equal { n } => out!("Equal on {n} letters"),
            Equivalence::Diverges { index, a, b } => out!("Diverges at {index}: {a} vs {b}"),
            Equivalence::Inconclusive { index, status } => {
                out!("Inconclusive at {index}: {status}")
            }
        }
    }
    if verdict.is_equal() {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn complexity(ctx: &Context, word: &str, k: usize, window: usize) -> Result<(), Failure> {
    if k == 0 {
        return Err(usage("k must be positive"));
    }
    let w = ctx.word(word)?;
    let profile = subword_complexity(&w, k, window);
    if ctx.json {
        out!("{}", serde_json::to_string(&profile).expect("serializable"));
        return Ok(());
    }
    out!("{:>3}  {:>8}  count", "k", "p(k)");
    for i in 1..=k {
        let kind = if profile.is_exact(i) {
            "exact"
        } else if profile.stable[i - 1] {
            "lower, stable"
        } else {
            "lower"
        };
        out!("{i:>3}  {:>8}  {kind}", profile.count(i));
    }
    Ok(())
}

fn padding(
    ctx: &Context,
    formula: &str,
    word: &str,
    from: usize,
    to: usize,
) -> Result<(), Failure> {
    let f = match ctx.doc.formulas.get(formula) {
        Some(f) => f.clone(),
        None => LtlFormula::parse(formula).map_err(usage)?,
    };
    let w = ctx.lasso(word)?;
    let table = padding_check(&f, &w, from..to, None).map_err(usage)?;
    if ctx.json {
        out!("{}", serde_json::to_string(&table).expect("serializable"));
        return Ok(());
    }
    out!(
        "formula {}  g-free {}  stable from {}",
        table.formula,
        table.g_free,
        table.stabilization
    );
    out!("{:>5}  {:>5}  f(n)", "n", "holds");
    for e in &table.entries {
        let f = e.f.map_or("-".to_string(), |f| f.to_string());
        out!("{:>5}  {:>5}  {f}", e.n, e.holds);
    }
    Ok(())
}

fn check(ctx: &Context, suite: &str) -> Result<(), Failure> {
    let reports: Vec<SuiteReport> = if suite == "all" {
        run_all()
    } else {
        let names: Vec<&str> = suite_names().collect();
        vec![run_suite(suite).ok_or_else(|| {
            usage(format!(
                "unknown suite {suite:?}; known: {}",
                names.join(", ")
            ))
        })?]
    };
    if ctx.json {
        out!("{}", serde_json::to_string(&reports).expect("serializable"));
    } else {
        for r in &reports {
            out!("{} {} ({})", r.id, r.name, r.title);
            for i in &r.items {
                out!(
                    "  [{}] {}: {}",
                    if i.passed { "pass" } else { "FAIL" },
                    i.name,
                    i.detail
                );
            }
            out!("{} {}", if r.passed() { "PASS" } else { "FAIL" }, r.name);
        }
    }
    if reports.iter().all(SuiteReport::passed) {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn list(ctx: &Context) -> Result<(), Failure> {
    let builtin_words = [
        ("pi", "the word 1 01 001 0001 ..."),
        ("piK", "pi with each block repeated K times"),
        ("blank", "the padding letter forever"),
    ];
    if ctx.json {
        let words: serde_json::Map<String, serde_json::Value> = ctx
            .doc
            .words
            .iter()
            .map(|(name, w)| (name.clone(), json!(w.describe())))
            .collect();
        let machines: serde_json::Map<String, serde_json::Value> = ctx
            .doc
            .machines
            .iter()
            .map(|(name, m)| (name.clone(), json!(m.kind())))
            .collect();
        let builtins: Vec<&str> = BUILTIN_MACHINES.iter().map(|b| b.0).collect();
        out!(
            "{}",
            json!({"words": words, "machines": machines, "builtin_machines": builtins})
        );
        return Ok(());
    }
    for (name, w) in &ctx.doc.words {
        let shown = match w.to_lasso() {
            Some(l) => serde_json::to_string(&lasso_doc(&l)).expect("serializable"),
            None => w.describe(),
        };
        out!("word     {name:<16} {shown}");
    }
    for (name, m) in &ctx.doc.machines {
        out!(
            "machine  {name:<16} {} with {} states",
            m.kind(),
            m.states()
        );
    }
    for (name, about) in builtin_words {
        out!("builtin  {name:<16} {about}");
    }
    for (name, about) in BUILTIN_MACHINES {
        out!("builtin  {name:<16} {about}");
    }
    Ok(())
}

fn show(ctx: &Context, word: &str, n: usize) -> Result<(), Failure> {
    let w = ctx.word(word)?;
    let letters = w.prefix(n).map_err(usage)?;
    if ctx.json {
        out!(
            "{}",
            json!({"word": word, "n": n, "letters": render(&letters)})
        );
    } else {
        out!("{}", render(&letters));
    }
    Ok(())
}
