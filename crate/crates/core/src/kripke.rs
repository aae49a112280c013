//! Finite Kripke models and ultimately periodic (lasso) paths.
//!
//! States are dense integers `0..state_count`. A model may be constructed in
//! an invalid shape (for instance straight from a file); [`validate_model`]
//! and [`validate_path`] report what is wrong instead of failing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

pub type State = usize;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KripkeModel {
    state_count: usize,
    edges: BTreeSet<(State, State)>,
    successors: Vec<Vec<State>>,
    valuation: BTreeMap<u32, BTreeSet<State>>,
    labels: BTreeMap<State, String>,
}

impl KripkeModel {
    pub fn new(state_count: usize) -> Self {
        KripkeModel { state_count, successors: vec![Vec::new(); state_count], ..Default::default() }
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    /// Adds the edge `from → to`. Edges touching unknown states are kept so
    /// that validation can report them.
    pub fn add_edge(&mut self, from: State, to: State) {
        if self.edges.insert((from, to)) && from < self.state_count {
            self.successors[from].push(to);
        }
    }

    /// Makes variable `var` true at `state`.
    pub fn set_true(&mut self, var: u32, state: State) {
        self.valuation.entry(var).or_default().insert(state);
    }

    /// Declares `var` without making it true anywhere.
    pub fn declare_var(&mut self, var: u32) {
        self.valuation.entry(var).or_default();
    }

    pub fn set_label(&mut self, state: State, label: impl Into<String>) {
        self.labels.insert(state, label.into());
    }

    pub fn label(&self, state: State) -> Option<&str> {
        self.labels.get(&state).map(String::as_str)
    }

    pub fn labels(&self) -> &BTreeMap<State, String> {
        &self.labels
    }

    pub fn has_edge(&self, from: State, to: State) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn edges(&self) -> impl Iterator<Item = (State, State)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn successors(&self, state: State) -> &[State] {
        &self.successors[state]
    }

    pub fn valuation(&self) -> &BTreeMap<u32, BTreeSet<State>> {
        &self.valuation
    }

    /// Whether variable `var` is true at `state`. Undeclared variables are
    /// false everywhere.
    pub fn holds(&self, var: u32, state: State) -> bool {
        self.valuation.get(&var).is_some_and(|s| s.contains(&state))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelViolation {
    NoStates,
    NonSerial { state: State },
    DanglingEdge { from: State, to: State },
    DanglingValuation { var: u32, state: State },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelViolation::NoStates => f.write_str("model has no states"),
            ModelViolation::NonSerial { state } => write!(f, "state {state} has no successor"),
            ModelViolation::DanglingEdge { from, to } => {
                write!(f, "edge {from} -> {to} references a missing state")
            }
            ModelViolation::DanglingValuation { var, state } => {
                write!(f, "p{var} is set at missing state {state}")
            }
        }
    }
}

/// Checks non-emptiness, seriality, and that edges and the valuation only
/// mention existing states.
pub fn validate_model(m: &KripkeModel) -> Result<(), Vec<ModelViolation>> {
    let mut report = Vec::new();
    if m.state_count == 0 {
        report.push(ModelViolation::NoStates);
    }
    for (from, to) in m.edges() {
        if from >= m.state_count || to >= m.state_count {
            report.push(ModelViolation::DanglingEdge { from, to });
        }
    }
    for s in 0..m.state_count {
        if !m.successors[s].iter().any(|&t| t < m.state_count) {
            report.push(ModelViolation::NonSerial { state: s });
        }
    }
    for (&var, states) in &m.valuation {
        for &s in states.range(m.state_count..) {
            report.push(ModelViolation::DanglingValuation { var, state: s });
        }
    }
    if report.is_empty() {
        Ok(())
    } else {
        Err(report)
    }
}

/// An ultimately periodic path `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoPath {
    prefix: Vec<State>,
    cycle: Vec<State>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("a lasso path needs a nonempty loop")]
pub struct EmptyLoop;

impl LassoPath {
    pub fn new(prefix: Vec<State>, cycle: Vec<State>) -> Result<Self, EmptyLoop> {
        if cycle.is_empty() {
            return Err(EmptyLoop);
        }
        Ok(LassoPath { prefix, cycle })
    }

    pub fn prefix(&self) -> &[State] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[State] {
        &self.cycle
    }

    /// Number of stored positions, `|prefix| + |loop|`.
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `π[i]`.
    pub fn at(&self, i: usize) -> State {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Successor of a stored position, wrapping from the last position back
    /// to the loop start.
    pub fn next_position(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.prefix.len()
        }
    }

    /// Canonical stored position of an arbitrary index into the unrolling.
    pub fn canonical(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            i
        } else {
            self.prefix.len() + (i - self.prefix.len()) % self.cycle.len()
        }
    }

    /// The stored states, prefix first.
    pub fn positions(&self) -> impl Iterator<Item = State> + '_ {
        self.prefix.iter().chain(self.cycle.iter()).copied()
    }

    /// The suffix `π[1, ∞]` as a lasso.
    pub fn advance(&self) -> LassoPath {
        if self.prefix.is_empty() {
            let mut cycle = self.cycle.clone();
            cycle.rotate_left(1);
            LassoPath { prefix: Vec::new(), cycle }
        } else {
            LassoPath { prefix: self.prefix[1..].to_vec(), cycle: self.cycle.clone() }
        }
    }

    /// The same infinite path with the loop written out twice.
    pub fn doubled(&self) -> LassoPath {
        let mut cycle = self.cycle.clone();
        cycle.extend_from_slice(&self.cycle);
        LassoPath { prefix: self.prefix.clone(), cycle }
    }
}

/// `π[i]` for a lasso.
pub fn path_at(path: &LassoPath, i: usize) -> State {
    path.at(i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Prefix,
    /// The step from the last prefix state into the loop.
    Seam,
    Loop,
    /// The step from the last loop state back to the loop start.
    Wrap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathViolation {
    UnknownState { position: usize, state: State },
    MissingEdge { position: usize, from: State, to: State, step: Step },
}

impl fmt::Display for PathViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathViolation::UnknownState { position, state } => {
                write!(f, "position {position}: state {state} does not exist")
            }
            PathViolation::MissingEdge { position, from, to, step } => {
                write!(f, "position {position} ({step:?}): {from} -> {to} is not an edge")
            }
        }
    }
}

/// Checks that every state on the lasso exists and that every consecutive
/// pair, including the seam and the wrap, is an edge of `m`.
pub fn validate_path(m: &KripkeModel, path: &LassoPath) -> Result<(), Vec<PathViolation>> {
    let mut report = Vec::new();
    for (position, state) in path.positions().enumerate() {
        if state >= m.state_count() {
            report.push(PathViolation::UnknownState { position, state });
        }
    }
    let plen = path.prefix.len();
    for position in 0..path.len() {
        let next = path.next_position(position);
        let (from, to) = (path.at(position), path.at(next));
        let step = if position + 1 < plen {
            Step::Prefix
        } else if position + 1 == plen {
            Step::Seam
        } else if position + 1 < path.len() {
            Step::Loop
        } else {
            Step::Wrap
        };
        if !m.has_edge(from, to) {
            report.push(PathViolation::MissingEdge { position, from, to, step });
        }
    }
    if report.is_empty() {
        Ok(())
    } else {
        Err(report)
    }
}

// ---------------------------------------------------------------------------
// Model file format

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ModelFileError {
    pub line: usize,
    pub message: String,
}

/// A model file: the model and the optional lasso declared by a `path` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub model: KripkeModel,
    pub path: Option<LassoPath>,
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, ModelFileError> {
    tok.parse().map_err(|_| ModelFileError { line, message: format!("invalid {what} '{tok}'") })
}

/// Reads the line-oriented model format.
///
/// ```text
/// states 2
/// edge 0 1
/// edge 1 0
/// label p1 0
/// path : 0 1
/// ```
pub fn parse_model(text: &str) -> Result<ModelFile, ModelFileError> {
    let mut model: Option<KripkeModel> = None;
    let mut path = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let keyword = words.next().unwrap();
        let err = |message: String| ModelFileError { line, message };
        if keyword == "states" {
            if model.is_some() {
                return Err(err("duplicate 'states' line".into()));
            }
            let n = words.next().ok_or_else(|| err("'states' needs a count".into()))?;
            let n = parse_usize(n, line, "state count")?;
            if words.next().is_some() {
                return Err(err("trailing tokens after state count".into()));
            }
            model = Some(KripkeModel::new(n));
            continue;
        }
        let m = model.as_mut().ok_or_else(|| err("first directive must be 'states <n>'".into()))?;
        match keyword {
            "edge" => {
                let args: Vec<&str> = words.collect();
                if args.len() != 2 {
                    return Err(err("'edge' needs exactly two states".into()));
                }
                m.add_edge(parse_usize(args[0], line, "state")?, parse_usize(args[1], line, "state")?);
            }
            "label" => {
                let var = words.next().ok_or_else(|| err("'label' needs a variable".into()))?;
                let index = var
                    .strip_prefix('p')
                    .map(|d| if d.is_empty() { Ok(1) } else { d.parse::<u32>() })
                    .and_then(Result::ok)
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| err(format!("invalid variable '{var}'")))?;
                m.declare_var(index);
                for w in words {
                    m.set_true(index, parse_usize(w, line, "state")?);
                }
            }
            "path" => {
                if path.is_some() {
                    return Err(err("duplicate 'path' line".into()));
                }
                let rest: Vec<&str> = words.collect();
                let colon = rest
                    .iter()
                    .position(|w| *w == ":")
                    .ok_or_else(|| err("'path' needs ':' between prefix and loop".into()))?;
                let prefix = rest[..colon]
                    .iter()
                    .map(|w| parse_usize(w, line, "state"))
                    .collect::<Result<Vec<_>, _>>()?;
                let cycle = rest[colon + 1..]
                    .iter()
                    .map(|w| parse_usize(w, line, "state"))
                    .collect::<Result<Vec<_>, _>>()?;
                path = Some(LassoPath::new(prefix, cycle).map_err(|e| err(e.to_string()))?);
            }
            "name" => {
                let state = words.next().ok_or_else(|| err("'name' needs a state".into()))?;
                let state = parse_usize(state, line, "state")?;
                let label: Vec<&str> = words.collect();
                if label.is_empty() {
                    return Err(err("'name' needs a label".into()));
                }
                m.set_label(state, label.join(" "));
            }
            other => return Err(err(format!("unknown directive '{other}'"))),
        }
    }
    let model = model.ok_or(ModelFileError { line: 0, message: "missing 'states' line".into() })?;
    Ok(ModelFile { model, path })
}

/// Writes the model format. Output is deterministic: names, edges and labels
/// are emitted in ascending order.
pub fn write_model(m: &KripkeModel, path: Option<&LassoPath>) -> String {
    let mut out = String::new();
    writeln!(out, "states {}", m.state_count()).unwrap();
    for (s, label) in m.labels() {
        writeln!(out, "name {s} {label}").unwrap();
    }
    for (a, b) in m.edges() {
        writeln!(out, "edge {a} {b}").unwrap();
    }
    for (var, states) in m.valuation() {
        write!(out, "label p{var}").unwrap();
        for s in states {
            write!(out, " {s}").unwrap();
        }
        out.push('\n');
    }
    if let Some(path) = path {
        out.push_str("path");
        for s in path.prefix() {
            write!(out, " {s}").unwrap();
        }
        out.push_str(" :");
        for s in path.cycle() {
            write!(out, " {s}").unwrap();
        }
        out.push('\n');
    }
    out
}
