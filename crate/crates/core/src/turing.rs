//! Deterministic space-bounded Turing machines and a direct simulator.
//!
//! Tape cells are numbered from 1. A run starts in the start state with the
//! head on cell 1, which holds the left marker; the input occupies cells
//! `2..=n+1` and the rest of the `S(n)` cells are blank. The machine accepts
//! when it reaches the accepting state with the head on cell 1 and every cell
//! blank.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    L,
    R,
    S,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::L => "L",
            Move::R => "R",
            Move::S => "S",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rule {
    pub state: usize,
    pub read: usize,
    pub next: usize,
    pub write: usize,
    pub dir: Move,
}

/// A deterministic machine `(Q, Σ, q₀, q₁, a₀, a₁, δ)` with a polynomial
/// space bound. States and symbols are indices into `states` / `alphabet`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TMSpec {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub start: usize,
    pub accept: usize,
    pub blank: usize,
    pub left_marker: usize,
    pub rules: Vec<Rule>,
    /// Coefficients `c₀, c₁, …` of `S(n) = Σ cᵢ nⁱ`.
    pub space_poly: Vec<u64>,
}

impl TMSpec {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn rule(&self, state: usize, read: usize) -> Option<&Rule> {
        self.rules.iter().find(|r| r.state == state && r.read == read)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == name)
    }

    /// Reads an input word. Whitespace-separated symbol names are accepted;
    /// a word without whitespace is read one character per symbol.
    pub fn parse_input(&self, word: &str) -> Result<Vec<usize>, TuringError> {
        let names: Vec<String> = if word.chars().any(char::is_whitespace) {
            word.split_whitespace().map(str::to_owned).collect()
        } else {
            word.chars().map(String::from).collect()
        };
        names
            .iter()
            .map(|n| {
                let i = self.symbol_index(n).ok_or_else(|| TuringError::UnknownSymbol(n.clone()))?;
                if i == self.left_marker {
                    return Err(TuringError::MarkerInInput);
                }
                Ok(i)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TmViolation {
    NoStates,
    NoSymbols,
    StateOutOfRange(usize),
    SymbolOutOfRange(usize),
    BlankIsMarker,
    DuplicateRule { state: usize, read: usize },
    MissingRule { state: usize, read: usize },
    FinalNotSelfPerpetuating { read: usize },
    LeftEscape { state: usize },
    NoSpaceBound,
}

impl fmt::Display for TmViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TmViolation::NoStates => f.write_str("no states"),
            TmViolation::NoSymbols => f.write_str("empty alphabet"),
            TmViolation::StateOutOfRange(q) => write!(f, "state index {q} out of range"),
            TmViolation::SymbolOutOfRange(a) => write!(f, "symbol index {a} out of range"),
            TmViolation::BlankIsMarker => f.write_str("blank and left marker coincide"),
            TmViolation::DuplicateRule { state, read } => {
                write!(f, "more than one rule for state {state} reading {read}")
            }
            TmViolation::MissingRule { state, read } => {
                write!(f, "no rule for non-final state {state} reading {read}")
            }
            TmViolation::FinalNotSelfPerpetuating { read } => {
                write!(f, "final state reading {read} must rewrite it, stay, and keep the state")
            }
            TmViolation::LeftEscape { state } => {
                write!(f, "state {state} moves left off the left marker")
            }
            TmViolation::NoSpaceBound => f.write_str("space polynomial has no coefficients"),
        }
    }
}

/// Checks determinism, totality on non-final states, self-perpetuation of the
/// final state and that the head can never move left off the marker.
pub fn validate_tm(t: &TMSpec) -> Result<(), Vec<TmViolation>> {
    let mut report = Vec::new();
    let (nq, na) = (t.n_states(), t.n_symbols());
    if nq == 0 {
        report.push(TmViolation::NoStates);
    }
    if na == 0 {
        report.push(TmViolation::NoSymbols);
    }
    for q in [t.start, t.accept] {
        if q >= nq {
            report.push(TmViolation::StateOutOfRange(q));
        }
    }
    for a in [t.blank, t.left_marker] {
        if a >= na {
            report.push(TmViolation::SymbolOutOfRange(a));
        }
    }
    if t.blank == t.left_marker {
        report.push(TmViolation::BlankIsMarker);
    }
    if t.space_poly.is_empty() {
        report.push(TmViolation::NoSpaceBound);
    }
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for r in &t.rules {
        for q in [r.state, r.next] {
            if q >= nq {
                report.push(TmViolation::StateOutOfRange(q));
            }
        }
        for a in [r.read, r.write] {
            if a >= na {
                report.push(TmViolation::SymbolOutOfRange(a));
            }
        }
        *seen.entry((r.state, r.read)).or_default() += 1;
        if r.read == t.left_marker && r.dir == Move::L {
            report.push(TmViolation::LeftEscape { state: r.state });
        }
    }
    let mut dups: Vec<_> = seen.iter().filter(|(_, &c)| c > 1).map(|(&k, _)| k).collect();
    dups.sort_unstable();
    for (state, read) in dups {
        report.push(TmViolation::DuplicateRule { state, read });
    }
    if !report.is_empty() {
        return Err(report);
    }
    for q in 0..nq {
        for a in 0..na {
            let rule = t.rule(q, a);
            if q == t.accept {
                let ok = rule.is_some_and(|r| r.next == q && r.write == a && r.dir == Move::S);
                if !ok {
                    report.push(TmViolation::FinalNotSelfPerpetuating { read: a });
                }
            } else if rule.is_none() {
                report.push(TmViolation::MissingRule { state: q, read: a });
            }
        }
    }
    if report.is_empty() {
        Ok(())
    } else {
        Err(report)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TuringError {
    #[error("invalid machine: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<TmViolation>),
    #[error("space bound S({n}) = {bound} leaves no room for the marker and input (needs {})", n + 1)]
    SpaceTooSmall { n: usize, bound: u64 },
    #[error("space bound overflows")]
    SpaceOverflow,
    #[error("unknown symbol '{0}' in input")]
    UnknownSymbol(String),
    #[error("the left marker may not occur in the input")]
    MarkerInInput,
    #[error("head left the tape (cell {cell} of {space}) after step {step}")]
    HeadOutOfBounds { cell: i64, space: usize, step: usize },
    #[error("no rule for state {state} reading {read}")]
    MissingRule { state: usize, read: usize },
}

/// `S(n) = Σ cᵢ nⁱ`, which must leave room for the marker and the input.
pub fn space_bound(t: &TMSpec, n: usize) -> Result<usize, TuringError> {
    let mut total: u64 = 0;
    let mut power: u64 = 1;
    for (i, &c) in t.space_poly.iter().enumerate() {
        if i > 0 {
            power = power.checked_mul(n as u64).ok_or(TuringError::SpaceOverflow)?;
        }
        let term = c.checked_mul(power).ok_or(TuringError::SpaceOverflow)?;
        total = total.checked_add(term).ok_or(TuringError::SpaceOverflow)?;
    }
    if total < n as u64 + 1 {
        return Err(TuringError::SpaceTooSmall { n, bound: total });
    }
    usize::try_from(total).map_err(|_| TuringError::SpaceOverflow)
}

/// Instantaneous description. `head` is 1-based; `tape[0]` is cell 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: usize,
    pub head: usize,
    pub tape: Vec<usize>,
}

impl Configuration {
    pub fn initial(t: &TMSpec, input: &[usize], space: usize) -> Self {
        let mut tape = vec![t.blank; space];
        tape[0] = t.left_marker;
        tape[1..=input.len()].copy_from_slice(input);
        Configuration { state: t.start, head: 1, tape }
    }

    /// Whether this is the accepting configuration: final state, head on
    /// cell 1, blank tape.
    pub fn is_accepting(&self, t: &TMSpec) -> bool {
        self.state == t.accept && self.head == 1 && self.tape.iter().all(|&a| a == t.blank)
    }

    /// Content of cell `j` (1-based) as seen by the encoding.
    pub fn cell(&self, j: usize) -> CellContent {
        let a = self.tape[j - 1];
        if j == self.head {
            CellContent::Head(self.state, a)
        } else {
            CellContent::Plain(a)
        }
    }

    pub fn step(&self, t: &TMSpec, step: usize) -> Result<Configuration, TuringError> {
        let read = self.tape[self.head - 1];
        let rule = t.rule(self.state, read).ok_or(TuringError::MissingRule { state: self.state, read })?;
        let mut tape = self.tape.clone();
        tape[self.head - 1] = rule.write;
        let head = match rule.dir {
            Move::L => self.head as i64 - 1,
            Move::R => self.head as i64 + 1,
            Move::S => self.head as i64,
        };
        if head < 1 || head as usize > tape.len() {
            return Err(TuringError::HeadOutOfBounds { cell: head, space: tape.len(), step });
        }
        Ok(Configuration { state: rule.next, head: head as usize, tape })
    }

    pub fn display(&self, t: &TMSpec) -> String {
        let mut out = String::new();
        for j in 1..=self.tape.len() {
            if j > 1 {
                out.push(' ');
            }
            if j == self.head {
                write!(out, "[{}]", t.states[self.state]).unwrap();
            }
            out.push_str(&t.alphabet[self.tape[j - 1]]);
        }
        out
    }
}

/// What a single cell holds: a plain symbol, or a symbol under the head
/// together with the control state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellContent {
    Plain(usize),
    Head(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
        })
    }
}

/// The whole (infinite) run as a lasso of configurations: the successor of
/// the last entry is `trace[cycle_start]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub answer: Answer,
    pub trace: Vec<Configuration>,
    pub cycle_start: usize,
}

impl RunResult {
    pub fn prefix(&self) -> &[Configuration] {
        &self.trace[..self.cycle_start]
    }

    pub fn cycle(&self) -> &[Configuration] {
        &self.trace[self.cycle_start..]
    }
}

/// Runs `t` on `input` until a configuration repeats.
pub fn simulate(t: &TMSpec, input: &[usize]) -> Result<RunResult, TuringError> {
    validate_tm(t).map_err(TuringError::Invalid)?;
    if let Some(&a) = input.iter().find(|&&a| a >= t.n_symbols()) {
        return Err(TuringError::UnknownSymbol(a.to_string()));
    }
    if input.contains(&t.left_marker) {
        return Err(TuringError::MarkerInInput);
    }
    let space = space_bound(t, input.len())?;
    let mut seen: HashMap<Configuration, usize> = HashMap::new();
    let mut trace = Vec::new();
    let mut current = Configuration::initial(t, input, space);
    loop {
        if let Some(&cycle_start) = seen.get(&current) {
            let answer =
                if trace.iter().any(|c: &Configuration| c.is_accepting(t)) { Answer::Yes } else { Answer::No };
            return Ok(RunResult { answer, trace, cycle_start });
        }
        seen.insert(current.clone(), trace.len());
        let next = current.step(t, trace.len())?;
        trace.push(current);
        current = next;
    }
}

// ---------------------------------------------------------------------------
// Machine file format

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct TmFileError {
    pub line: usize,
    pub message: String,
}

/// Reads the line-oriented machine format:
///
/// ```text
/// states q0 q1
/// alphabet _ >
/// start q0
/// accept q1
/// blank _
/// leftmarker >
/// space 2
/// rule q0 > q1 _ S
/// ```
pub fn parse_tm(text: &str) -> Result<TMSpec, TmFileError> {
    let mut states: Option<Vec<String>> = None;
    let mut alphabet: Option<Vec<String>> = None;
    let mut singles: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    let mut space: Option<Vec<u64>> = None;
    let mut raw_rules: Vec<(usize, Vec<String>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| TmFileError { line, message };
        let mut words = content.split_whitespace();
        let keyword = words.next().unwrap();
        let args: Vec<String> = words.map(str::to_owned).collect();
        match keyword {
            "states" | "alphabet" => {
                if args.is_empty() {
                    return Err(err(format!("'{keyword}' needs at least one name")));
                }
                let mut sorted = args.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != args.len() {
                    return Err(err(format!("duplicate name in '{keyword}'")));
                }
                let slot = if keyword == "states" { &mut states } else { &mut alphabet };
                if slot.replace(args).is_some() {
                    return Err(err(format!("duplicate '{keyword}' line")));
                }
            }
            "start" | "accept" | "blank" | "leftmarker" => {
                let [name] = args.as_slice() else {
                    return Err(err(format!("'{keyword}' needs exactly one name")));
                };
                if singles.insert(keyword, (line, name.clone())).is_some() {
                    return Err(err(format!("duplicate '{keyword}' line")));
                }
            }
            "space" => {
                if args.is_empty() {
                    return Err(err("'space' needs coefficients".into()));
                }
                let coeffs = args
                    .iter()
                    .map(|a| a.parse::<u64>().map_err(|_| err(format!("invalid coefficient '{a}'"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if space.replace(coeffs).is_some() {
                    return Err(err("duplicate 'space' line".into()));
                }
            }
            "rule" => {
                if args.len() != 5 {
                    return Err(err("'rule' needs <q> <a> <q'> <a'> <L|R|S>".into()));
                }
                raw_rules.push((line, args));
            }
            other => return Err(err(format!("unknown directive '{other}'"))),
        }
    }

    let missing = |what: &str| TmFileError { line: 0, message: format!("missing '{what}' line") };
    let states = states.ok_or_else(|| missing("states"))?;
    let alphabet = alphabet.ok_or_else(|| missing("alphabet"))?;
    let space_poly = space.ok_or_else(|| missing("space"))?;
    let state = |(line, name): &(usize, String)| {
        states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| TmFileError { line: *line, message: format!("unknown state '{name}'") })
    };
    let symbol = |(line, name): &(usize, String)| {
        alphabet
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| TmFileError { line: *line, message: format!("unknown symbol '{name}'") })
    };
    let single = |key: &str| singles.get(key).ok_or_else(|| missing(key));
    let start = state(single("start")?)?;
    let accept = state(single("accept")?)?;
    let blank = symbol(single("blank")?)?;
    let left_marker = symbol(single("leftmarker")?)?;

    let mut rules = Vec::new();
    for (line, args) in raw_rules {
        let dir = match args[4].as_str() {
            "L" => Move::L,
            "R" => Move::R,
            "S" => Move::S,
            other => return Err(TmFileError { line, message: format!("invalid move '{other}'") }),
        };
        rules.push(Rule {
            state: state(&(line, args[0].clone()))?,
            read: symbol(&(line, args[1].clone()))?,
            next: state(&(line, args[2].clone()))?,
            write: symbol(&(line, args[3].clone()))?,
            dir,
        });
    }
    Ok(TMSpec { states, alphabet, start, accept, blank, left_marker, rules, space_poly })
}

pub fn write_tm(t: &TMSpec) -> String {
    let mut out = String::new();
    writeln!(out, "states {}", t.states.join(" ")).unwrap();
    writeln!(out, "alphabet {}", t.alphabet.join(" ")).unwrap();
    writeln!(out, "start {}", t.states[t.start]).unwrap();
    writeln!(out, "accept {}", t.states[t.accept]).unwrap();
    writeln!(out, "blank {}", t.alphabet[t.blank]).unwrap();
    writeln!(out, "leftmarker {}", t.alphabet[t.left_marker]).unwrap();
    let coeffs: Vec<String> = t.space_poly.iter().map(u64::to_string).collect();
    writeln!(out, "space {}", coeffs.join(" ")).unwrap();
    for r in &t.rules {
        writeln!(
            out,
            "rule {} {} {} {} {}",
            t.states[r.state], t.alphabet[r.read], t.states[r.next], t.alphabet[r.write], r.dir
        )
        .unwrap();
    }
    out
}
