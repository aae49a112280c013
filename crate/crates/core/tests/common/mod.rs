//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use ltl_core::{Formula, KripkeModel, LassoPath, TMSpec};
use rand::rngs::StdRng;
use rand::Rng;

pub fn machine(name: &str) -> TMSpec {
    let text = match name {
        "yes" => include_str!("../../../../machines/yes.tm"),
        "loop" => include_str!("../../../../machines/loop.tm"),
        "parity" => include_str!("../../../../machines/parity.tm"),
        _ => panic!("unknown machine {name}"),
    };
    ltl_core::parse_tm(text).unwrap()
}

/// Random formula with exactly `nodes` AST nodes over `vars` variables.
pub fn random_formula(rng: &mut StdRng, nodes: usize, vars: u32) -> Formula {
    assert!(nodes >= 1);
    if nodes == 1 {
        return if vars == 0 || rng.gen_bool(0.2) {
            Formula::falsum()
        } else {
            Formula::var(rng.gen_range(1..=vars))
        };
    }
    if nodes == 2 || rng.gen_bool(0.25) {
        return Formula::next(random_formula(rng, nodes - 1, vars));
    }
    let left = rng.gen_range(1..nodes - 1);
    let (a, b) = (random_formula(rng, left, vars), random_formula(rng, nodes - 1 - left, vars));
    if rng.gen_bool(0.5) {
        Formula::implies(a, b)
    } else {
        Formula::until(a, b)
    }
}

/// Random serial model with `states` states and a lasso of at most
/// `max_positions` positions through it.
pub fn random_instance(
    rng: &mut StdRng,
    max_states: usize,
    max_positions: usize,
    vars: u32,
) -> (KripkeModel, LassoPath) {
    let n = rng.gen_range(1..=max_states);
    let mut m = KripkeModel::new(n);
    for v in 1..=vars {
        m.declare_var(v);
        for s in 0..n {
            if rng.gen_bool(0.5) {
                m.set_true(v, s);
            }
        }
    }
    // Walk a random sequence, add its edges, then close it into a loop.
    let len = rng.gen_range(1..=max_positions);
    let loop_len = rng.gen_range(1..=len);
    let seq: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
    for w in seq.windows(2) {
        m.add_edge(w[0], w[1]);
    }
    let prefix_len = len - loop_len;
    m.add_edge(seq[len - 1], seq[prefix_len]);
    for s in 0..n {
        if m.successors(s).is_empty() || rng.gen_bool(0.3) {
            m.add_edge(s, rng.gen_range(0..n));
        }
    }
    let path = LassoPath::new(seq[..prefix_len].to_vec(), seq[prefix_len..].to_vec()).unwrap();
    (m, path)
}

/// Every formula with exactly `nodes` nodes over {⊥, →, X, U} and the
/// variables `1..=vars`.
pub fn formulas_of_size(nodes: usize, vars: u32) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new()];
    for size in 1..=nodes {
        let mut here = Vec::new();
        if size == 1 {
            here.push(Formula::falsum());
            for v in 1..=vars {
                here.push(Formula::var(v));
            }
        } else {
            for f in &by_size[size - 1] {
                here.push(Formula::next(f.clone()));
            }
            for left in 1..size - 1 {
                let right = size - 1 - left;
                for a in &by_size[left] {
                    for b in &by_size[right] {
                        here.push(Formula::implies(a.clone(), b.clone()));
                        here.push(Formula::until(a.clone(), b.clone()));
                    }
                }
            }
        }
        by_size.push(here);
    }
    by_size.swap_remove(nodes)
}

pub fn formulas_up_to(nodes: usize, vars: u32) -> Vec<Formula> {
    (1..=nodes).flat_map(|n| formulas_of_size(n, vars)).collect()
}

/// A lasso over the words of one variable: model with one state per
/// position, `p` set according to `bits`, edges along the lasso.
pub fn word_lasso(bits: &[bool], loop_start: usize) -> (KripkeModel, LassoPath) {
    let n = bits.len();
    let mut m = KripkeModel::new(n);
    m.declare_var(1);
    for (s, &b) in bits.iter().enumerate() {
        if b {
            m.set_true(1, s);
        }
        m.add_edge(s, if s + 1 < n { s + 1 } else { loop_start });
    }
    let path = LassoPath::new((0..loop_start).collect(), (loop_start..n).collect()).unwrap();
    (m, path)
}

/// All one-variable lassos with `prefix + loop ≤ max_len`.
pub fn all_word_lassos(max_len: usize) -> Vec<(KripkeModel, LassoPath)> {
    let mut out = Vec::new();
    for n in 1..=max_len {
        for mask in 0u32..(1 << n) {
            let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            for loop_start in 0..n {
                out.push(word_lasso(&bits, loop_start));
            }
        }
    }
    out
}

/// Third evaluator: iterate the `Until` unfolding from all-false until
/// nothing changes, over the stored window with wrap-around.
pub fn stabilization_eval(m: &KripkeModel, path: &LassoPath, f: &Formula) -> bool {
    use ltl_core::formula::{closure, Op};
    let cl = closure(f);
    let n = path.len();
    let succ = |i: usize| path.next_position(i);
    let mut rows: Vec<Vec<bool>> = Vec::with_capacity(cl.len());
    for op in cl.ops() {
        let row = match *op {
            Op::Var(v) => (0..n).map(|i| m.holds(v, path.at(i))).collect(),
            Op::Falsum => vec![false; n],
            Op::Implies(a, b) => (0..n).map(|i| !rows[a][i] || rows[b][i]).collect(),
            Op::Next(a) => (0..n).map(|i| rows[a][succ(i)]).collect(),
            Op::Until(a, b) => {
                let mut u = vec![false; n];
                loop {
                    let next: Vec<bool> =
                        (0..n).map(|i| rows[b][i] || (rows[a][i] && u[succ(i)])).collect();
                    if next == u {
                        break u;
                    }
                    u = next;
                }
            }
        };
        rows.push(row);
    }
    rows[cl.root()][0]
}
