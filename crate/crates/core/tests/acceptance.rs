//! Runs every acceptance criterion and prints one PASS/FAIL line for each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{all_word_lassos, formulas_up_to, machine, random_formula, random_instance};
use ltl_core::reduction::model_for_layout;
use ltl_core::{
    build_psi, count_vars, eval_lasso, oracle_eval, parse, print, reduce_closed, sat, simulate, valid,
    validate_model, validate_path, write_layout, write_model, Answer, Formula, Layout, SatError,
    DEFAULT_ATOM_BUDGET,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(start: Instant, limit: Duration, detail: String) -> Outcome {
    let spent = start.elapsed();
    if spent <= limit {
        Ok(format!("{detail} in {spent:.2?}"))
    } else {
        Err(format!("{detail} but took {spent:.2?} (limit {limit:?})"))
    }
}

fn closed_fragment() -> Outcome {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let formulas = formulas_up_to(7, 0);
    for f in &formulas {
        let expected = reduce_closed(f).map_err(|e| format!("{f}: {e:?}"))?;
        for _ in 0..5 {
            let (m, pi) = random_instance(&mut rng, 6, 8, 1);
            if eval_lasso(&m, &pi, f).unwrap() != expected {
                return Err(format!("eval disagrees on {f}"));
            }
        }
        if sat(f).unwrap().satisfiable != expected {
            return Err(format!("sat disagrees on {f}"));
        }
    }
    let top = Formula::truth();
    if !reduce_closed(&Formula::until(top.clone(), top.clone())).unwrap()
        || reduce_closed(&Formula::until(top, Formula::falsum())).unwrap()
    {
        return Err("true U true / true U false misclassified".into());
    }
    within(t0, Duration::from_secs(10), format!("{} closed formulas agree", formulas.len()))
}

fn semantics_differential() -> Outcome {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(2);
    let trials = 1000;
    for _ in 0..trials {
        let (m, pi) = random_instance(&mut rng, 6, 8, 2);
        let size = rng.gen_range(1..=10);
        let f = random_formula(&mut rng, size, 2);
        if eval_lasso(&m, &pi, &f).unwrap() != oracle_eval(&m, &pi, &f).unwrap() {
            return Err(format!("mismatch on {f}"));
        }
    }
    within(t0, Duration::from_secs(60), format!("{trials} instances, 0 mismatches"))
}

fn semantic_laws() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let trials = 500;
    for _ in 0..trials {
        let (m, pi) = random_instance(&mut rng, 6, 8, 2);
        let sa = rng.gen_range(1..=5);
        let a = random_formula(&mut rng, sa, 2);
        let sb = rng.gen_range(1..=5);
        let b = random_formula(&mut rng, sb, 2);
        let ev = |pi: &ltl_core::LassoPath, f: &Formula| eval_lasso(&m, pi, f).unwrap();

        let until = Formula::until(a.clone(), b.clone());
        let expansion = Formula::or(b.clone(), Formula::and(a.clone(), Formula::next(until.clone())));
        if ev(&pi, &until) != ev(&pi, &expansion) {
            return Err(format!("Until expansion fails for {until}"));
        }
        if ev(&pi, &Formula::next(a.clone())) != ev(&pi.advance(), &a) {
            return Err(format!("X-suffix coherence fails for {a}"));
        }
        if ev(&pi, &until) != ev(&pi.doubled(), &until) {
            return Err(format!("loop doubling changes {until}"));
        }
        let suffixes: Vec<bool> = std::iter::successors(Some(pi.clone()), |p| Some(p.advance()))
            .take(pi.len())
            .map(|p| ev(&p, &a))
            .collect();
        let always = ev(&pi, &Formula::always(a.clone()));
        let eventually = ev(&pi, &Formula::eventually(a.clone()));
        if always != suffixes.iter().all(|&x| x)
            || eventually != suffixes.iter().any(|&x| x)
            || always != !ev(&pi, &Formula::eventually(Formula::not(a.clone())))
        {
            return Err(format!("eventually/always duality fails for {a}"));
        }
    }
    Ok(format!("4 laws on {trials} instances, 0 failures"))
}

fn sat_sound_and_complete() -> Outcome {
    let t0 = Instant::now();
    let lassos = all_word_lassos(6);
    let formulas = formulas_up_to(8, 1);
    let mut satisfiable = 0;
    for f in &formulas {
        let v = sat(f).unwrap();
        if let Some(w) = &v.witness {
            if !eval_lasso(&w.model, &w.path, f).unwrap() {
                return Err(format!("witness fails for {f}"));
            }
            satisfiable += 1;
        }
        if !v.satisfiable && lassos.iter().any(|(m, pi)| eval_lasso(m, pi, f).unwrap()) {
            return Err(format!("missed a small model of {f}"));
        }
        if sat(&Formula::and(f.clone(), Formula::not(f.clone()))).unwrap().satisfiable {
            return Err(format!("f & !f satisfiable for {f}"));
        }
        if !sat(&Formula::or(f.clone(), Formula::not(f.clone()))).unwrap().satisfiable {
            return Err(format!("f | !f unsatisfiable for {f}"));
        }
    }
    within(
        t0,
        Duration::from_secs(300),
        format!("{} formulas, {satisfiable} satisfiable, {} lassos", formulas.len(), lassos.len()),
    )
}

fn reduction_structure() -> Outcome {
    let t0 = Instant::now();
    for space in 1..=3 {
        let layout = Layout::new(2, 2, space);
        let m = model_for_layout(&layout);
        if layout.k != 6 || m.state_count() != 3 + space * (2 + 36) {
            return Err(format!("S={space}: {} states", m.state_count()));
        }
        validate_model(&m).map_err(|v| format!("S={space}: {v:?}"))?;
        if layout.cycle_len() != 3 + space * 8 {
            return Err(format!("S={space}: L = {}", layout.cycle_len()));
        }
        for a in 0..m.state_count() {
            for &b in m.successors(a) {
                for &c in m.successors(b) {
                    if [a, b, c].iter().all(|&s| m.holds(1, s)) && [a, b, c] != [0, 1, 2] {
                        return Err(format!("S={space}: marker pattern at {a} {b} {c}"));
                    }
                }
            }
        }
    }
    within(t0, Duration::from_secs(10), "S = 1, 2, 3 well formed".into())
}

const CASES: [(&str, &str); 6] =
    [("yes", ""), ("loop", ""), ("parity", "1"), ("parity", "11"), ("parity", "111"), ("parity", "1111")];

fn answers_match_formula() -> Outcome {
    let t0 = Instant::now();
    let mut largest = 0;
    for (name, word) in CASES {
        let t = machine(name);
        let w = t.parse_input(word).unwrap();
        let out = build_psi(&t, &w).map_err(|e| e.to_string())?;
        validate_path(&out.model, &out.run).map_err(|v| format!("{name}: {v:?}"))?;
        let truth = eval_lasso(&out.model, &out.run, &out.psi).unwrap();
        let answer = out.simulation.answer == Answer::Yes;
        if truth != answer {
            return Err(format!("{name} {word:?}: answer={answer} formula={truth}"));
        }
        largest = largest.max(out.psi.dag_size());
    }
    if largest > 100_000 {
        return Err(format!("DAG size {largest} exceeds 1e5"));
    }
    within(t0, Duration::from_secs(120), format!("6 cases consistent, largest DAG {largest}"))
}

fn single_variable() -> Outcome {
    let mut extra = machine("yes");
    extra.space_poly = vec![1];
    let mut checked = 0;
    for (t, word) in CASES.iter().map(|&(n, w)| (machine(n), w)).chain([(extra, "")]) {
        let out = build_psi(&t, &t.parse_input(word).unwrap()).map_err(|e| e.to_string())?;
        if count_vars(&out.psi) != 1 {
            return Err(format!("{} variables", count_vars(&out.psi)));
        }
        checked += 1;
    }
    Ok(format!("{checked} formulas use only p"))
}

fn validity_micro() -> Outcome {
    let t0 = Instant::now();
    let mut t = machine("yes");
    t.space_poly = vec![1];
    let out = build_psi(&t, &[]).map_err(|e| e.to_string())?;
    if simulate(&t, &[]).unwrap().answer != Answer::Yes {
        return Err("T_yes does not accept".into());
    }
    let detail = match valid(&out.psi) {
        Ok(true) => "valid".to_string(),
        Ok(false) => return Err("not-valid verdict for an accepting machine".into()),
        Err(SatError::Inconclusive { budget }) if budget == DEFAULT_ATOM_BUDGET => {
            format!("inconclusive, {budget} atoms exhausted")
        }
        Err(e) => return Err(e.to_string()),
    };
    within(t0, Duration::from_secs(600), detail)
}

fn determinism() -> Outcome {
    for (name, word) in [("yes", ""), ("loop", ""), ("parity", "11")] {
        let t = machine(name);
        let w = t.parse_input(word).unwrap();
        let files = || {
            let out = build_psi(&t, &w).unwrap();
            (write_model(&out.model, Some(&out.run)), print(&out.psi), write_layout(&out.layout))
        };
        let (a, b) = (files(), files());
        if a != b {
            return Err(format!("{name} {word:?} differs between runs"));
        }
        if parse(&a.1).unwrap() != build_psi(&t, &w).unwrap().psi {
            return Err(format!("{name}: printed formula does not parse back"));
        }
    }
    Ok("model, formula and layout files identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("closed fragment", closed_fragment),
        ("evaluator vs oracle", semantics_differential),
        ("semantic laws", semantic_laws),
        ("satisfiability soundness and bounded completeness", sat_sound_and_complete),
        ("reduction structure", reduction_structure),
        ("machine answer matches formula", answers_match_formula),
        ("single variable", single_variable),
        ("validity at micro scale", validity_micro),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
