//! Satisfiability and validity by on-the-fly atom-graph search.
//!
//! An atom assigns a truth value to every closure member such that the
//! Boolean structure is respected and every `a U b` agrees with its one-step
//! unfolding. Successors are generated lazily from the obligations an atom
//! places on the next position (bodies of its `Next` members and its pending
//! `Until`s), in lexicographic order over the free members with false before
//! true. A DFS frame resumes enumeration from the last successor it produced.
//!
//! The search is Tarjan's SCC algorithm run on the fly. A completed SCC that
//! is not self-fulfilling is refined by discarding atoms whose `Until`s can
//! never be fulfilled inside it; completed SCCs are never revisited.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::eval::eval_closure;
use crate::formula::{closure, Closure, Formula, Op};
use crate::kripke::{KripkeModel, LassoPath};

/// Default cap on the number of distinct atoms a single search may create.
pub const DEFAULT_ATOM_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SatError {
    #[error("inconclusive: atom budget of {budget} exhausted")]
    Inconclusive { budget: usize },
    #[error("internal error: synthesized witness does not satisfy the formula")]
    WitnessMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub model: KripkeModel,
    pub path: LassoPath,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub satisfiable: bool,
    /// Present exactly when `satisfiable` is true.
    pub witness: Option<Witness>,
    /// Distinct atoms created by the search.
    pub atoms: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SatOptions {
    pub atom_budget: usize,
}

impl Default for SatOptions {
    fn default() -> Self {
        SatOptions { atom_budget: DEFAULT_ATOM_BUDGET }
    }
}

/// Decides satisfiability with the default atom budget.
pub fn sat(f: &Formula) -> Result<Verdict, SatError> {
    sat_with(f, SatOptions::default())
}

pub fn sat_with(f: &Formula, options: SatOptions) -> Result<Verdict, SatError> {
    let cl = closure(f);
    let mut search = Search::new(&cl, options.atom_budget);
    match search.run()? {
        None => Ok(Verdict { satisfiable: false, witness: None, atoms: search.atoms.len() }),
        Some((prefix, cycle)) => {
            let witness = search.witness(&prefix, &cycle);
            if !eval_closure(&witness.model, &witness.path, &cl) {
                return Err(SatError::WitnessMismatch);
            }
            Ok(Verdict { satisfiable: true, witness: Some(witness), atoms: search.atoms.len() })
        }
    }
}

/// `f` is valid iff `¬f` is unsatisfiable.
pub fn valid(f: &Formula) -> Result<bool, SatError> {
    valid_with(f, SatOptions::default())
}

pub fn valid_with(f: &Formula, options: SatOptions) -> Result<bool, SatError> {
    Ok(!sat_with(&Formula::not(f.clone()), options)?.satisfiable)
}

type AtomId = u32;

/// Prefix atoms and loop atoms of an accepting lasso.
type AtomLasso = (Vec<AtomId>, Vec<AtomId>);

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, v: bool) {
        let bit = 1u64 << (i % 64);
        if v {
            self.0[i / 64] |= bit;
        } else {
            self.0[i / 64] &= !bit;
        }
    }
}

/// Values the next atom must take on some members.
struct Requirement {
    mask: Bits,
    value: Bits,
}

struct Frame {
    atom: AtomId,
    req: Option<Requirement>,
    last: Option<AtomId>,
}

struct Search<'a> {
    cl: &'a Closure,
    budget: usize,
    /// `next_of[g]` is the member `X g`, if present.
    next_of: Vec<Option<usize>>,
    untils: Vec<(usize, usize, usize)>,
    vars: Vec<(usize, u32)>,
    atoms: Vec<Bits>,
    index: HashMap<Vec<u64>, AtomId>,
    // Tarjan state
    order: Vec<u32>,
    low: Vec<u32>,
    on_stack: Vec<bool>,
}

const UNVISITED: u32 = u32::MAX;

impl<'a> Search<'a> {
    fn new(cl: &'a Closure, budget: usize) -> Self {
        let mut next_of = vec![None; cl.len()];
        let mut untils = Vec::new();
        let mut vars = Vec::new();
        for (i, op) in cl.ops().iter().enumerate() {
            match *op {
                Op::Next(g) => next_of[g] = Some(i),
                Op::Until(a, b) => untils.push((i, a, b)),
                Op::Var(v) => vars.push((i, v)),
                _ => {}
            }
        }
        Search {
            cl,
            budget,
            next_of,
            untils,
            vars,
            atoms: Vec::new(),
            index: HashMap::new(),
            order: Vec::new(),
            low: Vec::new(),
            on_stack: Vec::new(),
        }
    }

    fn initial_requirement(&self) -> Option<Requirement> {
        let n = self.cl.len();
        let mut mask = Bits::zeros(n);
        let mut value = Bits::zeros(n);
        mask.set(self.cl.root(), true);
        value.set(self.cl.root(), true);
        self.propagate(Requirement { mask, value })
    }

    /// Obligations `atom` places on its successor; `None` if they conflict.
    fn requirement(&self, atom: &Bits) -> Option<Requirement> {
        let n = self.cl.len();
        let mut mask = Bits::zeros(n);
        let mut value = Bits::zeros(n);
        for (g, x) in self.next_of.iter().enumerate() {
            if let Some(x) = *x {
                mask.set(g, true);
                value.set(g, atom.get(x));
            }
        }
        for &(u, a, b) in &self.untils {
            if atom.get(a) && !atom.get(b) {
                if mask.get(u) && value.get(u) != atom.get(u) {
                    return None;
                }
                mask.set(u, true);
                value.set(u, atom.get(u));
            }
        }
        self.propagate(Requirement { mask, value })
    }

    /// Closes `req` under the local consistency rules. `None` on conflict.
    fn propagate(&self, mut req: Requirement) -> Option<Requirement> {
        let ops = self.cl.ops();
        let known = |r: &Requirement, i: usize| r.mask.get(i).then(|| r.value.get(i));
        let mut changed = true;
        while changed {
            changed = false;
            for i in (0..ops.len()).rev() {
                let mut force: Vec<(usize, bool)> = Vec::new();
                match ops[i] {
                    Op::Falsum => force.push((i, false)),
                    Op::Implies(a, b) => match (known(&req, i), known(&req, a), known(&req, b)) {
                        (Some(false), _, _) => force.extend([(a, true), (b, false)]),
                        (Some(true), Some(true), _) => force.push((b, true)),
                        (Some(true), _, Some(false)) => force.push((a, false)),
                        (None, Some(false), _) | (None, _, Some(true)) => force.push((i, true)),
                        (None, Some(true), Some(false)) => force.push((i, false)),
                        _ => {}
                    },
                    Op::Until(a, b) => match (known(&req, i), known(&req, a), known(&req, b)) {
                        (Some(false), _, _) => force.push((b, false)),
                        (Some(true), Some(false), _) => force.push((b, true)),
                        (None, _, Some(true)) => force.push((i, true)),
                        (None, Some(false), Some(false)) => force.push((i, false)),
                        _ => {}
                    },
                    _ => {}
                }
                for (j, v) in force {
                    match known(&req, j) {
                        Some(w) if w != v => return None,
                        Some(_) => {}
                        None => {
                            req.mask.set(j, true);
                            req.value.set(j, v);
                            changed = true;
                        }
                    }
                }
            }
        }
        Some(req)
    }

    fn satisfies(&self, atom: &Bits, req: &Requirement) -> bool {
        req.mask.0.iter().zip(&req.value.0).zip(&atom.0).all(|((m, v), a)| (a ^ v) & m == 0)
    }

    /// The lexicographically first consistent atom meeting `req` that comes
    /// strictly after `prev` (or the first one overall).
    fn next_atom(&self, req: &Requirement, prev: Option<&Bits>) -> Option<Bits> {
        let n = self.cl.len();
        let ops = self.cl.ops();
        let mut val;
        let mut free: Vec<usize> = Vec::new();
        let mut pos;

        let is_free = |val: &Bits, i: usize| -> bool {
            if req.mask.get(i) {
                return false;
            }
            match ops[i] {
                Op::Var(_) | Op::Next(_) => true,
                Op::Until(a, b) => val.get(a) && !val.get(b),
                _ => false,
            }
        };

        // Flip the deepest free choice that is still false; everything after
        // it is recomputed.
        let backtrack = |val: &mut Bits, free: &mut Vec<usize>| -> Option<usize> {
            while let Some(i) = free.pop() {
                if !val.get(i) {
                    val.set(i, true);
                    free.push(i);
                    return Some(i + 1);
                }
            }
            None
        };

        match prev {
            None => {
                val = Bits::zeros(n);
                pos = 0;
            }
            Some(p) => {
                val = p.clone();
                free.extend((0..n).filter(|&i| is_free(&val, i)));
                pos = backtrack(&mut val, &mut free)?;
            }
        }

        while pos < n {
            let forced = match ops[pos] {
                Op::Falsum => Some(false),
                Op::Implies(a, b) => Some(!val.get(a) || val.get(b)),
                Op::Until(_, b) if val.get(b) => Some(true),
                Op::Until(a, _) if !val.get(a) => Some(false),
                _ => None,
            };
            let ok = match forced {
                Some(v) => {
                    val.set(pos, v);
                    !req.mask.get(pos) || req.value.get(pos) == v
                }
                None if req.mask.get(pos) => {
                    val.set(pos, req.value.get(pos));
                    true
                }
                None => {
                    val.set(pos, false);
                    free.push(pos);
                    true
                }
            };
            pos = if ok { pos + 1 } else { backtrack(&mut val, &mut free)? };
        }
        Some(val)
    }

    fn intern(&mut self, bits: Bits) -> Result<AtomId, SatError> {
        if let Some(&id) = self.index.get(&bits.0) {
            return Ok(id);
        }
        if self.atoms.len() >= self.budget {
            return Err(SatError::Inconclusive { budget: self.budget });
        }
        let id = self.atoms.len() as AtomId;
        self.index.insert(bits.0.clone(), id);
        self.atoms.push(bits);
        self.order.push(UNVISITED);
        self.low.push(UNVISITED);
        self.on_stack.push(false);
        Ok(id)
    }

    fn lookup(&self, bits: &Bits) -> Option<AtomId> {
        self.index.get(&bits.0).copied()
    }

    /// Returns the witness lasso as (prefix atoms, loop atoms).
    fn run(&mut self) -> Result<Option<AtomLasso>, SatError> {
        let Some(init) = self.initial_requirement() else {
            return Ok(None);
        };
        let mut last_initial: Option<Bits> = None;
        let mut counter = 0u32;
        loop {
            let Some(start) = self.next_atom(&init, last_initial.as_ref()) else {
                return Ok(None);
            };
            last_initial = Some(start.clone());
            let id = self.intern(start)?;
            if self.order[id as usize] != UNVISITED {
                continue;
            }
            if let Some(found) = self.tarjan(id, &mut counter)? {
                return Ok(Some(found));
            }
        }
    }

    fn tarjan(
        &mut self,
        start: AtomId,
        counter: &mut u32,
    ) -> Result<Option<AtomLasso>, SatError> {
        let req = self.requirement(&self.atoms[start as usize]);
        let mut frames = vec![Frame { atom: start, req, last: None }];
        let mut scc_stack: Vec<AtomId> = vec![start];
        self.visit(start, counter);
        self.on_stack[start as usize] = true;

        while let Some(top) = frames.last_mut() {
            let v = top.atom;
            let succ = match &top.req {
                None => None,
                Some(req) => {
                    let prev = top.last.map(|l| &self.atoms[l as usize]);
                    self.next_atom(req, prev)
                }
            };
            match succ {
                Some(bits) => {
                    let w = self.intern(bits)?;
                    frames.last_mut().unwrap().last = Some(w);
                    let wi = w as usize;
                    if self.order[wi] == UNVISITED {
                        self.visit(w, counter);
                        self.on_stack[wi] = true;
                        scc_stack.push(w);
                        let req = self.requirement(&self.atoms[wi]);
                        frames.push(Frame { atom: w, req, last: None });
                    } else if self.on_stack[wi] {
                        let vi = v as usize;
                        self.low[vi] = self.low[vi].min(self.order[wi]);
                    }
                }
                None => {
                    frames.pop();
                    let vi = v as usize;
                    if let Some(parent) = frames.last() {
                        let pi = parent.atom as usize;
                        self.low[pi] = self.low[pi].min(self.low[vi]);
                    }
                    if self.low[vi] == self.order[vi] {
                        let mut members = Vec::new();
                        loop {
                            let w = scc_stack.pop().unwrap();
                            self.on_stack[w as usize] = false;
                            members.push(w);
                            if w == v {
                                break;
                            }
                        }
                        members.reverse();
                        if let Some(cycle) = self.fair_cycle(&members) {
                            let mut prefix: Vec<AtomId> = frames.iter().map(|f| f.atom).collect();
                            let allowed: HashSet<AtomId> = members.iter().copied().collect();
                            let mut bridge = self.shortest_path(v, cycle[0], &allowed, false).unwrap();
                            bridge.pop();
                            prefix.extend(bridge);
                            return Ok(Some((prefix, cycle)));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    fn visit(&mut self, v: AtomId, counter: &mut u32) {
        self.order[v as usize] = *counter;
        self.low[v as usize] = *counter;
        *counter += 1;
    }

    /// Known successors of `v` restricted to `allowed`.
    fn successors_in(&self, v: AtomId, allowed: &HashSet<AtomId>) -> Vec<AtomId> {
        let mut out = Vec::new();
        let Some(req) = self.requirement(&self.atoms[v as usize]) else {
            return out;
        };
        let mut prev: Option<Bits> = None;
        while let Some(bits) = self.next_atom(&req, prev.as_ref()) {
            if let Some(id) = self.lookup(&bits) {
                if allowed.contains(&id) {
                    out.push(id);
                }
            }
            prev = Some(bits);
        }
        out
    }

    /// BFS path `from .. to` inside `allowed`, both ends included. With
    /// `nonempty` and `from == to`, the path has at least one step.
    fn shortest_path(
        &self,
        from: AtomId,
        to: AtomId,
        allowed: &HashSet<AtomId>,
        nonempty: bool,
    ) -> Option<Vec<AtomId>> {
        if from == to && !nonempty {
            return Some(vec![from]);
        }
        let mut parent: HashMap<AtomId, AtomId> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for w in self.successors_in(v, allowed) {
                if w == to {
                    let mut path = vec![to, v];
                    let mut cur = v;
                    while cur != from {
                        cur = parent[&cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                if w != from && !parent.contains_key(&w) {
                    parent.insert(w, v);
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// A fulfilling loop inside the strongly connected set `members`, as a
    /// list of atoms whose last element steps back to the first.
    fn fair_cycle(&self, members: &[AtomId]) -> Option<Vec<AtomId>> {
        let set: HashSet<AtomId> = members.iter().copied().collect();
        let bad: Vec<usize> = self
            .untils
            .iter()
            .filter(|&&(u, _, b)| {
                let asserted = members.iter().any(|&m| self.atoms[m as usize].get(u));
                let fulfilled = members.iter().any(|&m| self.atoms[m as usize].get(b));
                asserted && !fulfilled
            })
            .map(|&(u, _, _)| u)
            .collect();

        if bad.is_empty() {
            let entry = members[0];
            if members.len() == 1 {
                let atom = &self.atoms[entry as usize];
                let self_loop = self.requirement(atom).is_some_and(|r| self.satisfies(atom, &r));
                if !self_loop {
                    return None;
                }
            }
            return Some(self.build_loop(entry, &set));
        }

        let remaining: Vec<AtomId> = members
            .iter()
            .copied()
            .filter(|&m| bad.iter().all(|&u| !self.atoms[m as usize].get(u)))
            .collect();
        if remaining.is_empty() {
            return None;
        }
        for scc in self.components(&remaining) {
            if let Some(cycle) = self.fair_cycle(&scc) {
                return Some(cycle);
            }
        }
        None
    }

    fn build_loop(&self, entry: AtomId, set: &HashSet<AtomId>) -> Vec<AtomId> {
        let mut targets = Vec::new();
        for &(u, _, b) in &self.untils {
            let asserted = set.iter().any(|&m| self.atoms[m as usize].get(u));
            if asserted {
                let mut candidates: Vec<AtomId> =
                    set.iter().copied().filter(|&m| self.atoms[m as usize].get(b)).collect();
                candidates.sort_unstable();
                targets.push(candidates[0]);
            }
        }
        let mut cycle = vec![entry];
        let mut cur = entry;
        for t in targets {
            if t == cur {
                continue;
            }
            let path = self.shortest_path(cur, t, set, false).unwrap();
            cycle.extend_from_slice(&path[1..]);
            cur = t;
        }
        let back = self.shortest_path(cur, entry, set, true).unwrap();
        cycle.extend_from_slice(&back[1..back.len() - 1]);
        cycle
    }

    /// Strongly connected components of the subgraph induced by `members`.
    fn components(&self, members: &[AtomId]) -> Vec<Vec<AtomId>> {
        let allowed: HashSet<AtomId> = members.iter().copied().collect();
        let adj: HashMap<AtomId, Vec<AtomId>> =
            members.iter().map(|&m| (m, self.successors_in(m, &allowed))).collect();
        let mut order: HashMap<AtomId, u32> = HashMap::new();
        let mut low: HashMap<AtomId, u32> = HashMap::new();
        let mut on_stack: HashSet<AtomId> = HashSet::new();
        let mut stack = Vec::new();
        let mut out = Vec::new();
        let mut counter = 0;
        for &root in members {
            if order.contains_key(&root) {
                continue;
            }
            let mut frames: Vec<(AtomId, usize)> = vec![(root, 0)];
            order.insert(root, counter);
            low.insert(root, counter);
            counter += 1;
            stack.push(root);
            on_stack.insert(root);
            while let Some(&mut (v, ref mut next)) = frames.last_mut() {
                if let Some(&w) = adj[&v].get(*next) {
                    *next += 1;
                    if let std::collections::hash_map::Entry::Vacant(slot) = order.entry(w) {
                        slot.insert(counter);
                        low.insert(w, counter);
                        counter += 1;
                        stack.push(w);
                        on_stack.insert(w);
                        frames.push((w, 0));
                    } else if on_stack.contains(&w) {
                        let lw = order[&w];
                        let lv = low.get_mut(&v).unwrap();
                        *lv = (*lv).min(lw);
                    }
                    continue;
                }
                frames.pop();
                if let Some(&(p, _)) = frames.last() {
                    let lv = low[&v];
                    let lp = low.get_mut(&p).unwrap();
                    *lp = (*lp).min(lv);
                }
                if low[&v] == order[&v] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack.remove(&w);
                        scc.push(w);
                        if w == v {
                            break;
                        }
                    }
                    scc.reverse();
                    out.push(scc);
                }
            }
        }
        out
    }

    fn witness(&self, prefix: &[AtomId], cycle: &[AtomId]) -> Witness {
        let mut state_of: HashMap<AtomId, usize> = HashMap::new();
        for &a in prefix.iter().chain(cycle) {
            let next = state_of.len();
            state_of.entry(a).or_insert(next);
        }
        let mut model = KripkeModel::new(state_of.len());
        for &(_, v) in &self.vars {
            model.declare_var(v);
        }
        for (&atom, &s) in &state_of {
            for &(i, v) in &self.vars {
                if self.atoms[atom as usize].get(i) {
                    model.set_true(v, s);
                }
            }
        }
        let seq: Vec<usize> = prefix.iter().chain(cycle).map(|a| state_of[a]).collect();
        for w in seq.windows(2) {
            model.add_edge(w[0], w[1]);
        }
        model.add_edge(*seq.last().unwrap(), state_of[&cycle[0]]);
        let path = LassoPath::new(
            prefix.iter().map(|a| state_of[a]).collect(),
            cycle.iter().map(|a| state_of[a]).collect(),
        )
        .expect("loop is nonempty");
        Witness { model, path }
    }
}
