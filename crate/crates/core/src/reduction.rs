//! Compiles a space-bounded machine run into a one-variable model-checking
//! instance: a Kripke model whose cycles spell configurations, the lasso
//! following the actual run, and the formula
//! `(start ∧ □δ) → ◇positive`.
//!
//! Geometry of one cycle of the model, with `k = |Σ|·(|Q|+1)` cell contents:
//!
//! ```text
//! b0 b1 b2 | s0 [chain 1 | … | chain k] s1 | … (S cell blocks) … | back to b0
//! ```
//!
//! `p` holds on all of `b0 b1 b2` (the marker block), never on `s0`/`s1`, and
//! in chain `m` exactly at its `m`-th state. A walk through one cycle visits
//! `L = 3 + S(k+2)` states; position `off(j) + i` of the cycle is the `i`-th
//! state of whichever chain the walk took in cell block `j`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::formula::{count_vars, next_power, Formula};
use crate::kripke::{KripkeModel, LassoPath, State};
use crate::turing::{simulate, space_bound, validate_tm, CellContent, Configuration, Move, RunResult, TMSpec, TuringError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error(transparent)]
    Machine(#[from] TuringError),
    #[error("unknown cell content {0:?}")]
    UnknownContent(CellContent),
    #[error("cell {cell} or content index {index} out of range")]
    OutOfRange { cell: usize, index: usize },
}

/// Size constants of the encoding for one machine and space bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n1: usize,
    pub n2: usize,
    /// Number of possible cell contents, `n2 · (n1 + 1)`.
    pub k: usize,
    /// Space bound `S(n)`: number of cell blocks.
    pub space: usize,
}

impl Layout {
    pub fn new(n1: usize, n2: usize, space: usize) -> Self {
        Layout { n1, n2, k: n2 * (n1 + 1), space }
    }

    pub fn for_machine(t: &TMSpec, space: usize) -> Self {
        Self::new(t.n_states(), t.n_symbols(), space)
    }

    /// States per cell block along one walk: `s0`, one chain, `s1`.
    pub fn cell_block(&self) -> usize {
        self.k + 2
    }

    /// Cycle position of `s0` in cell block `j` (1-based).
    pub fn off(&self, j: usize) -> usize {
        3 + (j - 1) * self.cell_block()
    }

    /// Length of one configuration cycle.
    pub fn cycle_len(&self) -> usize {
        3 + self.space * self.cell_block()
    }

    /// Number of model states, `3 + S(2 + k²)`.
    pub fn state_count(&self) -> usize {
        3 + self.space * (2 + self.k * self.k)
    }

    fn block_base(&self, j: usize) -> State {
        3 + (j - 1) * (2 + self.k * self.k)
    }

    pub fn s0(&self, j: usize) -> State {
        self.block_base(j)
    }

    /// The `i`-th state of chain `m` in block `j` (all 1-based).
    pub fn chain_state(&self, j: usize, m: usize, i: usize) -> State {
        self.block_base(j) + 1 + (m - 1) * self.k + (i - 1)
    }

    pub fn s1(&self, j: usize) -> State {
        self.block_base(j) + 1 + self.k * self.k
    }

    /// Cell content with the given 1-based index.
    pub fn content(&self, index: usize) -> Option<CellContent> {
        if index == 0 || index > self.k {
            return None;
        }
        let i = index - 1;
        if i < self.n2 {
            Some(CellContent::Plain(i))
        } else {
            let rest = i - self.n2;
            Some(CellContent::Head(rest / self.n2, rest % self.n2))
        }
    }

    /// Index in `1..=k`: plain `a_t ↦ t+1`, pair `(q_s, a_t) ↦ n2 + s·n2 + t + 1`.
    pub fn index(&self, content: CellContent) -> Option<usize> {
        match content {
            CellContent::Plain(t) if t < self.n2 => Some(t + 1),
            CellContent::Head(s, t) if s < self.n1 && t < self.n2 => Some(self.n2 + s * self.n2 + t + 1),
            _ => None,
        }
    }
}

/// Index of a cell content in `1..=k` for machine `t`.
pub fn symbol_index(t: &TMSpec, content: CellContent) -> Result<usize, ReductionError> {
    Layout::new(t.n_states(), t.n_symbols(), 1).index(content).ok_or(ReductionError::UnknownContent(content))
}

/// Builds the model for machine `t` on inputs of length `n`.
pub fn build_model(t: &TMSpec, n: usize) -> Result<(KripkeModel, Layout), ReductionError> {
    validate_tm(t).map_err(TuringError::Invalid)?;
    let layout = Layout::for_machine(t, space_bound(t, n)?);
    Ok((model_for_layout(&layout), layout))
}

/// The model for an explicit layout.
pub fn model_for_layout(layout: &Layout) -> KripkeModel {
    let k = layout.k;
    let mut m = KripkeModel::new(layout.state_count());
    m.declare_var(1);
    for b in 0..3 {
        m.set_label(b, format!("B.{b}"));
        m.set_true(1, b);
    }
    m.add_edge(0, 1);
    m.add_edge(1, 2);
    m.add_edge(2, layout.s0(1));
    for j in 1..=layout.space {
        let (s0, s1) = (layout.s0(j), layout.s1(j));
        m.set_label(s0, format!("C[{j}].s0"));
        m.set_label(s1, format!("C[{j}].s1"));
        for chain in 1..=k {
            m.add_edge(s0, layout.chain_state(j, chain, 1));
            for i in 1..=k {
                let u = layout.chain_state(j, chain, i);
                m.set_label(u, format!("C[{j}].N[{chain}].{i}"));
                if i == chain {
                    m.set_true(1, u);
                }
                let next = if i < k { layout.chain_state(j, chain, i + 1) } else { s1 };
                m.add_edge(u, next);
            }
        }
        let next = if j < layout.space { layout.s0(j + 1) } else { 0 };
        m.add_edge(s1, next);
    }
    m
}

/// Shares `X^n p` towers and cell predicates across one construction, so the
/// formula stays a compact DAG.
pub struct FormulaBuilder {
    layout: Layout,
    towers: Vec<Formula>,
    syms: HashMap<(usize, usize), Formula>,
    shifted: HashMap<(usize, usize), Formula>,
    begin: Formula,
}

impl FormulaBuilder {
    pub fn new(layout: Layout) -> Self {
        let p = Formula::p();
        let towers = vec![p.clone()];
        let mut b = FormulaBuilder { layout, towers, syms: HashMap::new(), shifted: HashMap::new(), begin: p };
        b.begin = Formula::conjunction([b.tower(0), b.tower(1), b.tower(2)]);
        b
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// `X^n p`.
    pub fn tower(&mut self, n: usize) -> Formula {
        while self.towers.len() <= n {
            let top = Formula::next(self.towers.last().unwrap().clone());
            self.towers.push(top);
        }
        self.towers[n].clone()
    }

    /// `p ∧ X p ∧ X X p`: holds exactly at the first state of the marker
    /// block.
    pub fn begin(&self) -> Formula {
        self.begin.clone()
    }

    /// "Cell `j` holds content `i`", anchored at a cycle start:
    /// `X^{off(j)+i} p ∧ ⋀_{i'≠i} ¬X^{off(j)+i'} p`.
    pub fn sym(&mut self, j: usize, i: usize) -> Result<Formula, ReductionError> {
        let l = self.layout;
        if j == 0 || j > l.space || i == 0 || i > l.k {
            return Err(ReductionError::OutOfRange { cell: j, index: i });
        }
        if let Some(f) = self.syms.get(&(j, i)) {
            return Ok(f.clone());
        }
        let off = l.off(j);
        let parts: Vec<Formula> = (1..=l.k)
            .map(|other| {
                let t = self.tower(off + other);
                if other == i {
                    t
                } else {
                    Formula::not(t)
                }
            })
            .collect();
        let f = Formula::conjunction(parts);
        self.syms.insert((j, i), f.clone());
        Ok(f)
    }

    /// `X^L sym(j, i)`: the same predicate one configuration later.
    fn next_sym(&mut self, j: usize, i: usize) -> Result<Formula, ReductionError> {
        if let Some(f) = self.shifted.get(&(j, i)) {
            return Ok(f.clone());
        }
        let f = next_power(self.layout.cycle_len(), self.sym(j, i)?);
        self.shifted.insert((j, i), f.clone());
        Ok(f)
    }

    fn content_sym(&mut self, j: usize, c: CellContent) -> Result<Formula, ReductionError> {
        let i = self.layout.index(c).ok_or(ReductionError::UnknownContent(c))?;
        self.sym(j, i)
    }
}

/// `sym_formula(layout, j, i)` without a shared builder.
pub fn sym_formula(layout: &Layout, j: usize, i: usize) -> Result<Formula, ReductionError> {
    FormulaBuilder::new(*layout).sym(j, i)
}

/// Initial configuration: marker at a cycle start and every cell holding its
/// initial content.
pub fn build_psi_start(
    t: &TMSpec,
    input: &[usize],
    b: &mut FormulaBuilder,
) -> Result<Formula, ReductionError> {
    let space = b.layout().space;
    if let Some(&a) = input.iter().find(|&&a| a >= t.n_symbols() || a == t.left_marker) {
        return Err(if a == t.left_marker {
            TuringError::MarkerInInput.into()
        } else {
            TuringError::UnknownSymbol(a.to_string()).into()
        });
    }
    if space < input.len() + 1 {
        return Err(TuringError::SpaceTooSmall { n: input.len(), bound: space as u64 }.into());
    }
    let init = Configuration::initial(t, input, space);
    let mut parts = vec![b.begin()];
    for j in 1..=space {
        parts.push(b.content_sym(j, init.cell(j))?);
    }
    Ok(Formula::conjunction(parts))
}

/// Accepting configuration: final state on cell 1, every cell blank.
pub fn build_psi_positive(t: &TMSpec, b: &mut FormulaBuilder) -> Result<Formula, ReductionError> {
    let mut parts = vec![b.begin(), b.content_sym(1, CellContent::Head(t.accept, t.blank))?];
    for j in 2..=b.layout().space {
        parts.push(b.content_sym(j, CellContent::Plain(t.blank))?);
    }
    Ok(Formula::conjunction(parts))
}

/// Contents of cells `j-1, j, j+1`, with the neighbours absent at the tape
/// ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub cell: usize,
    pub left: Option<CellContent>,
    pub center: CellContent,
    pub right: Option<CellContent>,
}

/// Every window around cell `j` with at most one head among its cells.
pub fn windows(layout: &Layout, j: usize) -> Vec<Window> {
    let all: Vec<CellContent> = (1..=layout.k).filter_map(|i| layout.content(i)).collect();
    let lefts: Vec<Option<CellContent>> =
        if j > 1 { all.iter().copied().map(Some).collect() } else { vec![None] };
    let rights: Vec<Option<CellContent>> =
        if j < layout.space { all.iter().copied().map(Some).collect() } else { vec![None] };
    let is_head = |c: &Option<CellContent>| matches!(c, Some(CellContent::Head(..)));
    let mut out = Vec::new();
    for &left in &lefts {
        for &center in &all {
            for &right in &rights {
                let heads = [left, Some(center), right].iter().filter(|c| is_head(c)).count();
                if heads <= 1 {
                    out.push(Window { cell: j, left, center, right });
                }
            }
        }
    }
    out
}

/// Content of the window's centre cell after one step of `t`.
pub fn window_successor(t: &TMSpec, w: &Window) -> CellContent {
    let rule = |q: usize, a: usize| t.rule(q, a).copied();
    match w.center {
        CellContent::Head(q, a) => match rule(q, a) {
            Some(r) if r.dir == Move::S => CellContent::Head(r.next, r.write),
            Some(r) => CellContent::Plain(r.write),
            None => w.center,
        },
        CellContent::Plain(a) => {
            if let Some(CellContent::Head(q, b)) = w.left {
                if let Some(r) = rule(q, b).filter(|r| r.dir == Move::R) {
                    return CellContent::Head(r.next, a);
                }
            }
            if let Some(CellContent::Head(q, b)) = w.right {
                if let Some(r) = rule(q, b).filter(|r| r.dir == Move::L) {
                    return CellContent::Head(r.next, a);
                }
            }
            w.center
        }
    }
}

/// The transition constraint: at a cycle start, the next cycle starts after
/// exactly `L` positions and every cell of it is determined by the window of
/// the current cycle.
pub fn build_psi_delta(t: &TMSpec, b: &mut FormulaBuilder) -> Result<Formula, ReductionError> {
    let layout = *b.layout();
    let mut parts = vec![next_power(layout.cycle_len(), b.begin())];
    for j in 1..=layout.space {
        for w in windows(&layout, j) {
            let mut guard = Vec::with_capacity(3);
            if let Some(l) = w.left {
                guard.push(b.content_sym(j - 1, l)?);
            }
            guard.push(b.content_sym(j, w.center)?);
            if let Some(r) = w.right {
                guard.push(b.content_sym(j + 1, r)?);
            }
            let succ = window_successor(t, &w);
            let i = layout.index(succ).ok_or(ReductionError::UnknownContent(succ))?;
            parts.push(Formula::implies(Formula::conjunction(guard), b.next_sym(j, i)?));
        }
    }
    Ok(Formula::implies(b.begin(), Formula::conjunction(parts)))
}

/// `(start ∧ □δ) → ◇positive`.
pub fn assemble_psi(start: &Formula, delta: &Formula, positive: &Formula) -> Formula {
    Formula::implies(
        Formula::and(start.clone(), Formula::always(delta.clone())),
        Formula::eventually(positive.clone()),
    )
}

/// One cycle's walk through the model spelling `config`.
pub fn config_walk(layout: &Layout, config: &Configuration) -> Result<Vec<State>, ReductionError> {
    let mut walk = Vec::with_capacity(layout.cycle_len());
    walk.extend([0, 1, 2]);
    for j in 1..=layout.space {
        let c = config.cell(j);
        let m = layout.index(c).ok_or(ReductionError::UnknownContent(c))?;
        walk.push(layout.s0(j));
        walk.extend((1..=layout.k).map(|i| layout.chain_state(j, m, i)));
        walk.push(layout.s1(j));
    }
    Ok(walk)
}

/// The lasso through the model that follows `run` configuration by
/// configuration.
pub fn run_lasso(layout: &Layout, run: &RunResult) -> Result<LassoPath, ReductionError> {
    let mut prefix = Vec::with_capacity(run.prefix().len() * layout.cycle_len());
    for c in run.prefix() {
        prefix.extend(config_walk(layout, c)?);
    }
    let mut cycle = Vec::with_capacity(run.cycle().len() * layout.cycle_len());
    for c in run.cycle() {
        cycle.extend(config_walk(layout, c)?);
    }
    Ok(LassoPath::new(prefix, cycle).expect("a run has at least one cycle configuration"))
}

/// Everything produced for one machine and input.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub model: KripkeModel,
    pub run: LassoPath,
    pub psi: Formula,
    pub psi_start: Formula,
    pub psi_delta: Formula,
    pub psi_positive: Formula,
    pub layout: Layout,
    pub simulation: RunResult,
}

/// Builds model, run lasso and formula for `t` on `input`.
pub fn build_psi(t: &TMSpec, input: &[usize]) -> Result<ReductionOutput, ReductionError> {
    let simulation = simulate(t, input)?;
    let (model, layout) = build_model(t, input.len())?;
    let mut b = FormulaBuilder::new(layout);
    let psi_start = build_psi_start(t, input, &mut b)?;
    let psi_positive = build_psi_positive(t, &mut b)?;
    let psi_delta = build_psi_delta(t, &mut b)?;
    let psi = assemble_psi(&psi_start, &psi_delta, &psi_positive);
    assert_eq!(count_vars(&psi), 1, "the encoding uses the single variable p");
    let run = run_lasso(&layout, &simulation)?;
    Ok(ReductionOutput { model, run, psi, psi_start, psi_delta, psi_positive, layout, simulation })
}

/// Line-oriented layout sidecar.
pub fn write_layout(layout: &Layout) -> String {
    let mut out = String::new();
    writeln!(out, "n1 {}", layout.n1).unwrap();
    writeln!(out, "n2 {}", layout.n2).unwrap();
    writeln!(out, "k {}", layout.k).unwrap();
    writeln!(out, "S {}", layout.space).unwrap();
    writeln!(out, "L {}", layout.cycle_len()).unwrap();
    for j in 1..=layout.space {
        writeln!(out, "off {j} {}", layout.off(j)).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("layout line {line}: {message}")]
pub struct LayoutFileError {
    pub line: usize,
    pub message: String,
}

/// Reads a layout sidecar and checks its derived entries for consistency.
pub fn parse_layout(text: &str) -> Result<Layout, LayoutFileError> {
    let mut fields: HashMap<&str, usize> = HashMap::new();
    let mut offs: Vec<(usize, usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| LayoutFileError { line, message };
        let words: Vec<&str> = content.split_whitespace().collect();
        let num = |w: &str| w.parse::<usize>().map_err(|_| err(format!("invalid number '{w}'")));
        match words.as_slice() {
            [key @ ("n1" | "n2" | "k" | "S" | "L"), v] => {
                fields.insert(key, num(v)?);
            }
            ["off", j, v] => offs.push((line, num(j)?, num(v)?)),
            _ => return Err(err(format!("unrecognised line '{content}'"))),
        }
    }
    let get = |k: &str| {
        fields.get(k).copied().ok_or(LayoutFileError { line: 0, message: format!("missing '{k}'") })
    };
    let layout = Layout::new(get("n1")?, get("n2")?, get("S")?);
    let mismatch = |line, what: &str| LayoutFileError { line, message: format!("inconsistent {what}") };
    if get("k")? != layout.k {
        return Err(mismatch(0, "k"));
    }
    if get("L")? != layout.cycle_len() {
        return Err(mismatch(0, "L"));
    }
    for (line, j, v) in offs {
        if j == 0 || j > layout.space || layout.off(j) != v {
            return Err(mismatch(line, "off"));
        }
    }
    Ok(layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Kind;
    use crate::turing::parse_tm;

    fn machine(name: &str) -> TMSpec {
        let text = match name {
            "yes" => include_str!("../../../machines/yes.tm"),
            "loop" => include_str!("../../../machines/loop.tm"),
            "parity" => include_str!("../../../machines/parity.tm"),
            _ => unreachable!(),
        };
        parse_tm(text).unwrap()
    }

    #[test]
    fn content_indices() {
        let l = Layout::new(2, 2, 1);
        assert_eq!(l.k, 6);
        assert_eq!(l.index(CellContent::Plain(0)), Some(1));
        assert_eq!(l.index(CellContent::Head(0, 1)), Some(4));
        assert_eq!(l.index(CellContent::Head(1, 1)), Some(6));
        assert_eq!(l.index(CellContent::Head(2, 0)), None);
        for i in 1..=l.k {
            assert_eq!(l.index(l.content(i).unwrap()), Some(i));
        }
        assert_eq!(l.content(0), None);
        assert_eq!(l.content(7), None);
        let t = machine("yes");
        assert_eq!(symbol_index(&t, CellContent::Head(0, 1)), Ok(4));
        assert!(symbol_index(&t, CellContent::Plain(5)).is_err());
    }

    #[test]
    fn layout_geometry() {
        let l = Layout::new(2, 2, 1);
        assert_eq!(l.state_count(), 41);
        assert_eq!(l.cycle_len(), 11);
        let l = Layout::new(2, 2, 3);
        assert_eq!(l.off(1), 3);
        assert_eq!(l.off(2) - l.off(1), 8);
        assert_eq!(l.off(3) + l.k + 2, l.cycle_len());
        assert_eq!(l.s1(3) + 1, l.state_count());
    }

    #[test]
    fn sym_formula_offsets() {
        let l = Layout::new(2, 2, 2);
        let f = sym_formula(&l, 1, 5).unwrap();
        let mut b = FormulaBuilder::new(l);
        let cl = crate::formula::closure(&f);
        assert!(cl.contains(&b.tower(8)));
        for other in [4, 5, 6, 7, 9] {
            assert!(cl.contains(&Formula::not(b.tower(other))));
        }
        assert!(!cl.contains(&Formula::not(b.tower(8))));
        assert!(!cl.contains(&b.tower(10)));
        // j = 2, i = 1 anchors at 3 + (k + 2) + 1.
        let g = b.sym(2, 1).unwrap();
        assert!(crate::formula::closure(&g).contains(&b.tower(3 + 8 + 1)));
        assert!(b.sym(3, 1).is_err());
        assert!(b.sym(1, 7).is_err());
        assert!(b.sym(0, 1).is_err());
    }

    #[test]
    fn immediate_accepter_windows() {
        let t = machine("yes");
        let l = Layout::for_machine(&t, 2);
        let idx = |c| l.index(c).unwrap();
        let q0 = t.state_index("q0").unwrap();
        let q1 = t.state_index("q1").unwrap();
        let (blank, marker) = (t.blank, t.left_marker);

        let w = Window { cell: 1, left: None, center: CellContent::Head(q0, marker), right: Some(CellContent::Plain(blank)) };
        assert_eq!(window_successor(&t, &w), CellContent::Head(q1, blank));
        assert_eq!(idx(window_successor(&t, &w)), 5);

        let w = Window { cell: 2, left: Some(CellContent::Head(q0, marker)), center: CellContent::Plain(blank), right: None };
        assert_eq!(window_successor(&t, &w), CellContent::Plain(blank));

        // Cell 1 has a right neighbour only: k² windows minus the pairs with
        // two heads. Cell 2 (= S) is symmetric.
        let heads = l.n1 * l.n2;
        let expected = l.k * l.k - heads * heads;
        assert_eq!(windows(&l, 1).len(), expected);
        assert_eq!(windows(&l, 2).len(), expected);
    }

    #[test]
    fn window_successor_moves_head() {
        let t = machine("parity");
        let q = |n| t.state_index(n).unwrap();
        let a = |n| t.symbol_index(n).unwrap();
        // `even` reading 1 writes _ and moves right to `odd`.
        let head = CellContent::Head(q("even"), a("1"));
        let w = Window { cell: 2, left: Some(CellContent::Plain(a(">"))), center: head, right: Some(CellContent::Plain(a("1"))) };
        assert_eq!(window_successor(&t, &w), CellContent::Plain(a("_")));
        let w = Window { cell: 3, left: Some(head), center: CellContent::Plain(a("1")), right: None };
        assert_eq!(window_successor(&t, &w), CellContent::Head(q("odd"), a("1")));
        // `ret` moves left onto its left neighbour.
        let back = CellContent::Head(q("ret"), a("_"));
        let w = Window { cell: 2, left: None, center: CellContent::Plain(a("_")), right: Some(back) };
        assert_eq!(window_successor(&t, &w), CellContent::Head(q("ret"), a("_")));
        // A head moving away leaves the neighbour untouched.
        let w = Window { cell: 2, left: Some(back), center: CellContent::Plain(a("1")), right: None };
        assert_eq!(window_successor(&t, &w), CellContent::Plain(a("1")));
    }

    #[test]
    fn model_shape() {
        let t = machine("yes");
        let (m, l) = build_model(&t, 0).unwrap();
        assert_eq!(l.space, 2);
        assert_eq!(m.state_count(), l.state_count());
        assert_eq!(crate::kripke::validate_model(&m), Ok(()));
        assert!(m.holds(1, 0) && m.holds(1, 1) && m.holds(1, 2));
        assert!(!m.holds(1, l.s0(1)) && !m.holds(1, l.s1(2)));
        assert!(m.holds(1, l.chain_state(2, 4, 4)));
        assert!(!m.holds(1, l.chain_state(2, 4, 3)));
        assert_eq!(m.label(l.chain_state(2, 5, 3)), Some("C[2].N[5].3"));
        assert_eq!(m.label(l.s0(1)), Some("C[1].s0"));
        assert!(m.has_edge(l.s1(2), 0));
        assert!(m.has_edge(l.s1(1), l.s0(2)));
    }

    #[test]
    fn start_formula_for_immediate_accepter() {
        let t = machine("yes");
        let l = Layout::for_machine(&t, 2);
        let mut b = FormulaBuilder::new(l);
        let start = build_psi_start(&t, &[], &mut b).unwrap();
        let expected = Formula::conjunction([
            b.begin(),
            b.sym(1, l.index(CellContent::Head(t.start, t.left_marker)).unwrap()).unwrap(),
            b.sym(2, l.index(CellContent::Plain(t.blank)).unwrap()).unwrap(),
        ]);
        assert_eq!(start, expected);
        assert_eq!(count_vars(&start), 1);
        assert!(build_psi_start(&t, &[1], &mut b).is_err());
        assert!(build_psi_start(&t, &[0, 0], &mut b).is_err());
    }

    #[test]
    fn positive_formula_shape() {
        let t = machine("yes");
        let l = Layout::for_machine(&t, 2);
        let mut b = FormulaBuilder::new(l);
        let pos = build_psi_positive(&t, &mut b).unwrap();
        let idx = l.index(CellContent::Head(t.accept, t.blank)).unwrap();
        let expected = Formula::conjunction([b.begin(), b.sym(1, idx).unwrap(), b.sym(2, 1).unwrap()]);
        assert_eq!(pos, expected);
    }

    #[test]
    fn psi_top_level_shape() {
        let t = machine("yes");
        let out = build_psi(&t, &[]).unwrap();
        let Kind::Implies(lhs, rhs) = out.psi.kind() else { panic!("not an implication") };
        assert_eq!(lhs, &Formula::and(out.psi_start.clone(), Formula::always(out.psi_delta.clone())));
        assert_eq!(rhs, &Formula::eventually(out.psi_positive.clone()));
        assert_eq!(count_vars(&out.psi), 1);
    }

    #[test]
    fn run_lasso_lengths() {
        let t = machine("yes");
        let out = build_psi(&t, &[]).unwrap();
        let l = out.layout.cycle_len();
        assert_eq!(out.run.prefix().len(), l * out.simulation.prefix().len());
        assert_eq!(out.run.cycle().len(), l * out.simulation.cycle().len());
        assert_eq!(out.run.cycle().len(), l);
        assert_eq!(out.run.at(0), 0);
        for i in 0..3 {
            assert!(out.model.holds(1, out.run.at(i)));
        }
        assert_eq!(crate::kripke::validate_path(&out.model, &out.run), Ok(()));
    }

    #[test]
    fn layout_sidecar_round_trip() {
        let l = Layout::new(6, 3, 4);
        let text = write_layout(&l);
        assert!(text.starts_with("n1 6\nn2 3\nk 21\nS 4\nL 95\noff 1 3\n"));
        assert_eq!(parse_layout(&text), Ok(l));
        assert!(parse_layout(&text.replace("L 95", "L 96")).is_err());
        assert!(parse_layout(&text.replace("off 2 26", "off 2 27")).is_err());
        assert!(parse_layout("n1 1\n").is_err());
    }
}
