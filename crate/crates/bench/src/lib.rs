//! Fixed workloads for the benchmarks.

use ltl_core::{parse, parse_tm, Formula, KripkeModel, LassoPath, TMSpec};

pub fn machine(name: &str) -> TMSpec {
    let text = match name {
        "yes" => include_str!("../../../machines/yes.tm"),
        "loop" => include_str!("../../../machines/loop.tm"),
        "parity" => include_str!("../../../machines/parity.tm"),
        _ => panic!("unknown machine {name}"),
    };
    parse_tm(text).expect("bundled machine parses")
}

/// A ring of `n` states where `p` holds on every third state, with the path
/// going once around after a one-state prefix.
pub fn ring(n: usize) -> (KripkeModel, LassoPath) {
    let mut m = KripkeModel::new(n);
    m.declare_var(1);
    for s in 0..n {
        m.add_edge(s, (s + 1) % n);
        if s % 3 == 0 {
            m.set_true(1, s);
        }
    }
    let path = LassoPath::new(vec![0], (1..n).chain([0]).collect()).expect("nonempty loop");
    (m, path)
}

/// Nested response properties of growing depth.
pub fn response(depth: usize) -> Formula {
    let mut f = parse("p").expect("valid");
    for _ in 0..depth {
        f = Formula::always(Formula::implies(Formula::p(), Formula::eventually(Formula::next(f))));
    }
    f
}

pub const SAT_FORMULAS: [&str; 4] = [
    "G F p & G F !p",
    "G (p -> X !p) & G (!p -> X p) & F G p",
    "(p U X p) & G (p -> X X p) & F !p",
    "G (p -> X X X p) & F p & G F !p",
];
