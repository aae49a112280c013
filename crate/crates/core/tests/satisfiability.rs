mod common;

use common::{all_word_lassos, formulas_up_to, random_formula};
use ltl_core::{eval_lasso, parse, reduce_closed, sat, sat_with, valid, Formula, SatError, SatOptions};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Satisfiable by some one-variable lasso with at most `max_len` positions.
fn bounded_sat(f: &Formula, lassos: &[(ltl_core::KripkeModel, ltl_core::LassoPath)]) -> bool {
    lassos.iter().any(|(m, pi)| eval_lasso(m, pi, f).unwrap())
}

#[test]
fn bounded_oracle_examples() {
    let lassos = all_word_lassos(4);
    for (text, expected) in [
        ("p & X !p", true),
        ("p & !p", false),
        ("G F p & G F !p", true),
        ("G !p & F p", false),
        ("X X X p & G (p -> X !p)", true),
        ("p U false", false),
    ] {
        assert_eq!(bounded_sat(&parse(text).unwrap(), &lassos), expected, "{text}");
    }
}

#[test]
fn p_and_next_not_p_has_a_checked_witness() {
    let f = parse("p & X !p").unwrap();
    let v = sat(&f).unwrap();
    assert!(v.satisfiable);
    let w = v.witness.unwrap();
    assert!(eval_lasso(&w.model, &w.path, &f).unwrap());
    assert!(w.model.holds(1, w.path.at(0)));
    assert!(!w.model.holds(1, w.path.at(1)));
}

#[test]
fn sound_and_bounded_complete_on_small_formulas() {
    let lassos = all_word_lassos(5);
    for f in formulas_up_to(6, 1) {
        let v = sat(&f).unwrap();
        let small = bounded_sat(&f, &lassos);
        if small {
            assert!(v.satisfiable, "missed a model of {f}");
        }
        match &v.witness {
            Some(w) => assert!(eval_lasso(&w.model, &w.path, &f).unwrap(), "bad witness for {f}"),
            None => assert!(!small, "{f}"),
        }
    }
}

#[test]
fn contradictions_and_tautologies() {
    let mut rng = StdRng::seed_from_u64(21);
    for _ in 0..200 {
        let size = rng.gen_range(1..=9);
        let f = random_formula(&mut rng, size, 2);
        let both = Formula::and(f.clone(), Formula::not(f.clone()));
        assert!(!sat(&both).unwrap().satisfiable, "{f}");
        assert!(valid(&Formula::or(f.clone(), Formula::not(f.clone()))).unwrap(), "{f}");
    }
}

#[test]
fn closed_formulas_agree_with_reduction() {
    for f in formulas_up_to(7, 0) {
        assert_eq!(sat(&f).unwrap().satisfiable, reduce_closed(&f).unwrap(), "{f}");
    }
    assert!(valid(&parse("true U true").unwrap()).unwrap());
    assert!(!sat(&parse("true U false").unwrap()).unwrap().satisfiable);
}

#[test]
fn witness_states_are_distinct_atoms() {
    let f = parse("G F p & G F !p & F G (p -> X !p)").unwrap();
    let v = sat(&f).unwrap();
    let w = v.witness.unwrap();
    assert!(w.model.state_count() <= w.path.len());
    assert!(w.model.state_count() <= v.atoms);
}

#[test]
fn tiny_budget_is_reported() {
    let f = parse("G (p -> X X p) & G F !p & F p").unwrap();
    assert_eq!(sat_with(&f, SatOptions { atom_budget: 1 }), Err(SatError::Inconclusive { budget: 1 }));
}
