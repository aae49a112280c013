//! The satisfaction relation on lasso paths.
//!
//! [`eval_lasso`] computes, bottom-up over the closure, one bit row per
//! subformula over the stored positions `0..|prefix|+|loop|`. Positions past
//! the window are never materialised; `Next` at the last position reads the
//! loop start.

use crate::formula::{closure, Closure, Formula, Op};
use crate::kripke::{validate_model, validate_path, KripkeModel, LassoPath, ModelViolation, PathViolation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("invalid model: {}", join(.0))]
    InvalidModel(Vec<ModelViolation>),
    #[error("invalid path: {}", join(.0))]
    InvalidPath(Vec<PathViolation>),
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn check(m: &KripkeModel, path: &LassoPath) -> Result<(), EvalError> {
    validate_model(m).map_err(EvalError::InvalidModel)?;
    validate_path(m, path).map_err(EvalError::InvalidPath)
}

/// A fixed-length bit vector over lasso positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    fn zeros(len: usize) -> Self {
        BitRow { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, v: bool) {
        let bit = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

/// Truth values of every closure member at every stored lasso position.
#[derive(Debug, Clone)]
pub struct TruthTable {
    closure: Closure,
    rows: Vec<BitRow>,
}

impl TruthTable {
    pub fn closure(&self) -> &Closure {
        &self.closure
    }

    pub fn row(&self, member: usize) -> &BitRow {
        &self.rows[member]
    }

    /// Value of `f` at stored position `i`, if `f` is in the closure.
    pub fn value(&self, f: &Formula, i: usize) -> Option<bool> {
        self.closure.index_of(f).map(|m| self.rows[m].get(i))
    }
}

fn next_row(a: &BitRow, loop_start: usize) -> BitRow {
    let n = a.len;
    let mut out = BitRow::zeros(n);
    // out[i] = a[i + 1] for i < n - 1
    for w in 0..out.words.len() {
        let hi = a.words.get(w + 1).copied().unwrap_or(0);
        out.words[w] = (a.words[w] >> 1) | (hi << 63);
    }
    out.set(n - 1, a.get(loop_start));
    out.clear_tail();
    out
}

/// `u[i] = b[i] ∨ (a[i] ∧ u[succ(i)])`, least solution.
///
/// The loop is swept backwards twice: the first sweep seeds the wrap with
/// false, the second seeds it with the first sweep's value at the loop start.
/// The prefix is then a single backward sweep.
fn until_row(a: &BitRow, b: &BitRow, loop_start: usize) -> BitRow {
    let n = a.len;
    let mut out = BitRow::zeros(n);
    let mut seed = false;
    for _ in 0..2 {
        let mut next = seed;
        for i in (loop_start..n).rev() {
            let v = b.get(i) || (a.get(i) && next);
            out.set(i, v);
            next = v;
        }
        seed = out.get(loop_start);
    }
    let mut next = out.get(loop_start);
    for i in (0..loop_start).rev() {
        let v = b.get(i) || (a.get(i) && next);
        out.set(i, v);
        next = v;
    }
    out
}

fn compute_rows(
    m: &KripkeModel,
    path: &LassoPath,
    cl: &Closure,
    keep_all: bool,
) -> Vec<Option<BitRow>> {
    let n = path.len();
    let loop_start = path.prefix().len();
    let states: Vec<usize> = path.positions().collect();

    // Last member that reads each row; rows are dropped after that point
    // unless the whole table was requested.
    let mut last_use = vec![0usize; cl.len()];
    for (i, op) in cl.ops().iter().enumerate() {
        match *op {
            Op::Implies(a, b) | Op::Until(a, b) => {
                last_use[a] = i;
                last_use[b] = i;
            }
            Op::Next(a) => last_use[a] = i,
            Op::Var(_) | Op::Falsum => {}
        }
    }
    last_use[cl.root()] = usize::MAX;

    let mut rows: Vec<Option<BitRow>> = vec![None; cl.len()];
    for (i, op) in cl.ops().iter().enumerate() {
        let row = match *op {
            Op::Var(v) => {
                let mut r = BitRow::zeros(n);
                for (pos, &s) in states.iter().enumerate() {
                    r.set(pos, m.holds(v, s));
                }
                r
            }
            Op::Falsum => BitRow::zeros(n),
            Op::Implies(a, b) => {
                let (ra, rb) = (rows[a].as_ref().unwrap(), rows[b].as_ref().unwrap());
                let mut r = BitRow::zeros(n);
                for w in 0..r.words.len() {
                    r.words[w] = !ra.words[w] | rb.words[w];
                }
                r.clear_tail();
                r
            }
            Op::Next(a) => next_row(rows[a].as_ref().unwrap(), loop_start),
            Op::Until(a, b) => {
                until_row(rows[a].as_ref().unwrap(), rows[b].as_ref().unwrap(), loop_start)
            }
        };
        rows[i] = Some(row);
        if !keep_all {
            match *op {
                Op::Implies(a, b) | Op::Until(a, b) => {
                    for c in [a, b] {
                        if last_use[c] == i {
                            rows[c] = None;
                        }
                    }
                }
                Op::Next(a) if last_use[a] == i => rows[a] = None,
                _ => {}
            }
        }
    }
    rows
}

/// Full truth table of `f` on `path`.
pub fn truth_table(m: &KripkeModel, path: &LassoPath, f: &Formula) -> Result<TruthTable, EvalError> {
    check(m, path)?;
    let cl = closure(f);
    let rows = compute_rows(m, path, &cl, true).into_iter().map(Option::unwrap).collect();
    Ok(TruthTable { closure: cl, rows })
}

/// Whether `m, path ⊨ f`.
pub fn eval_lasso(m: &KripkeModel, path: &LassoPath, f: &Formula) -> Result<bool, EvalError> {
    check(m, path)?;
    Ok(eval_closure(m, path, &closure(f)))
}

/// Evaluates a precomputed closure without revalidating the inputs.
pub(crate) fn eval_closure(m: &KripkeModel, path: &LassoPath, cl: &Closure) -> bool {
    let rows = compute_rows(m, path, cl, false);
    rows[cl.root()].as_ref().unwrap().get(0)
}

/// Independent evaluator: plain recursion on (position, member) with `Until`
/// unfolded by an explicit forward scan.
///
/// Every subformula's truth value is periodic with the loop length beyond the
/// prefix, so a scan over `|prefix| + 2·|loop|` positions sees every distinct
/// suffix at least once after any start position.
pub fn oracle_eval(m: &KripkeModel, path: &LassoPath, f: &Formula) -> Result<bool, EvalError> {
    check(m, path)?;
    let cl = closure(f);
    let oracle = Oracle { m, path, cl: &cl, bound: path.prefix().len() + 2 * path.cycle().len() };
    Ok(oracle.holds(cl.root(), 0))
}

struct Oracle<'a> {
    m: &'a KripkeModel,
    path: &'a LassoPath,
    cl: &'a Closure,
    bound: usize,
}

impl Oracle<'_> {
    fn holds(&self, member: usize, pos: usize) -> bool {
        let pos = self.path.canonical(pos);
        match self.cl.op(member) {
            Op::Var(v) => self.m.holds(v, self.path.at(pos)),
            Op::Falsum => false,
            Op::Implies(a, b) => !self.holds(a, pos) || self.holds(b, pos),
            Op::Next(a) => self.holds(a, pos + 1),
            Op::Until(a, b) => {
                for k in 0..=self.bound {
                    if self.holds(b, pos + k) {
                        return true;
                    }
                    if !self.holds(a, pos + k) {
                        return false;
                    }
                }
                false
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("formula contains variable p{0}")]
pub struct NotClosed(pub u32);

/// Reduces a variable-free formula to `⊤` (true) or `⊥` (false) in a single
/// bottom-up pass.
///
/// On any path, `X a` has the constant value of `a` and `a U b` that of `b`.
pub fn reduce_closed(f: &Formula) -> Result<bool, NotClosed> {
    let cl = closure(f);
    let mut val: Vec<bool> = Vec::with_capacity(cl.len());
    for op in cl.ops() {
        let v = match *op {
            Op::Var(i) => return Err(NotClosed(i)),
            Op::Falsum => false,
            Op::Implies(a, b) => !val[a] || val[b],
            Op::Next(a) => val[a],
            Op::Until(_, b) => val[b],
        };
        val.push(v);
    }
    Ok(val[cl.root()])
}
