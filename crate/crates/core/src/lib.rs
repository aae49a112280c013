//! Linear-time temporal logic over a single-variable alphabet: formulas,
//! Kripke models with lasso paths, an exact lasso evaluator, a tableau
//! satisfiability decider, and the compilation of space-bounded Turing machine
//! runs into one-variable model-checking and validity instances.

pub mod eval;
pub mod formula;
pub mod kripke;
pub mod reduction;
pub mod sat;
pub mod turing;

pub use eval::{eval_lasso, oracle_eval, reduce_closed, truth_table, EvalError, TruthTable};
pub use formula::{closure, count_vars, next_power, parse, print, Closure, Formula, Kind, ParseError};
pub use kripke::{
    parse_model, path_at, validate_model, validate_path, write_model, KripkeModel, LassoPath, ModelFile,
    ModelFileError,
};
pub use sat::{sat, sat_with, valid, valid_with, SatError, SatOptions, Verdict, Witness, DEFAULT_ATOM_BUDGET};
pub use reduction::{
    build_model, build_psi, parse_layout, run_lasso, symbol_index, sym_formula, write_layout, Layout, LayoutFileError,
    ReductionError, ReductionOutput,
};
pub use turing::{parse_tm, simulate, space_bound, validate_tm, write_tm, Answer, Configuration, RunResult, TMSpec, TuringError};
