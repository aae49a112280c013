use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ltl_core::{
    build_psi, eval_lasso, parse, parse_model, parse_tm, print, sat_with, valid_with, validate_model,
    validate_path, validate_tm, write_layout, write_model, Answer, Formula, ReductionError, SatError,
    SatOptions, TMSpec, TuringError, DEFAULT_ATOM_BUDGET,
};

#[derive(Parser)]
#[command(name = "ltl", version, about = "Model checking and satisfiability for linear temporal logic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print it in canonical form.
    Parse {
        /// Formula file, or `-` for stdin.
        file: PathBuf,
    },
    /// Evaluate a formula on the path declared in a model file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: PathBuf,
    },
    /// Decide satisfiability.
    Sat {
        #[arg(long)]
        formula: PathBuf,
        /// Write a witness model with its path here when satisfiable.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ATOM_BUDGET)]
        atom_budget: usize,
    },
    /// Decide validity.
    Valid {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ATOM_BUDGET)]
        atom_budget: usize,
    },
    /// Compile a machine and input into a model, run path and formula.
    Reduce {
        #[arg(long)]
        tm: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long)]
        out_formula: PathBuf,
        #[arg(long)]
        out_layout: Option<PathBuf>,
    },
    /// Simulate a machine and check the formula against the run.
    Verify {
        #[arg(long)]
        tm: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
    },
}

enum Failure {
    Internal(String),
    Syntax(String),
    Semantic(String),
    Inconclusive(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Syntax(_) => 2,
            Failure::Semantic(_) => 3,
            Failure::Inconclusive(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Internal(m) | Failure::Syntax(m) | Failure::Semantic(m) | Failure::Inconclusive(m) => m,
        }
    }
}

impl From<SatError> for Failure {
    fn from(e: SatError) -> Self {
        match e {
            SatError::Inconclusive { .. } => Failure::Inconclusive(e.to_string()),
            SatError::WitnessMismatch => Failure::Internal(e.to_string()),
        }
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        Failure::Semantic(e.to_string())
    }
}

impl From<TuringError> for Failure {
    fn from(e: TuringError) -> Self {
        Failure::Semantic(e.to_string())
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).map_err(|e| Failure::Internal(format!("stdin: {e}")))?;
    } else {
        text = fs::read_to_string(path).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn load_formula(path: &Path) -> Result<Formula, Failure> {
    let text = read_source(path)?;
    parse(&text).map_err(|e| Failure::Syntax(format!("{}:{e}", path.display())))
}

fn load_tm(path: &Path) -> Result<TMSpec, Failure> {
    let text = read_source(path)?;
    let t = parse_tm(&text).map_err(|e| Failure::Syntax(format!("{}: {e}", path.display())))?;
    validate_tm(&t).map_err(TuringError::Invalid)?;
    Ok(t)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Parse { file } => Ok(print(&load_formula(&file)?)),
        Command::Eval { model, formula } => {
            let text = read_source(&model)?;
            let file = parse_model(&text).map_err(|e| Failure::Syntax(format!("{}: {e}", model.display())))?;
            let f = load_formula(&formula)?;
            let path = file
                .path
                .ok_or_else(|| Failure::Semantic(format!("{}: no path declared", model.display())))?;
            let join = |v: Vec<String>| v.join("; ");
            validate_model(&file.model)
                .map_err(|v| Failure::Semantic(join(v.iter().map(ToString::to_string).collect())))?;
            validate_path(&file.model, &path)
                .map_err(|v| Failure::Semantic(join(v.iter().map(ToString::to_string).collect())))?;
            let value = eval_lasso(&file.model, &path, &f).map_err(|e| Failure::Semantic(e.to_string()))?;
            Ok(value.to_string())
        }
        Command::Sat { formula, witness, atom_budget } => {
            let f = load_formula(&formula)?;
            let verdict = sat_with(&f, SatOptions { atom_budget })?;
            if let (Some(out), Some(w)) = (witness, &verdict.witness) {
                write_file(&out, &write_model(&w.model, Some(&w.path)))?;
            }
            Ok(if verdict.satisfiable { "sat" } else { "unsat" }.to_string())
        }
        Command::Valid { formula, atom_budget } => {
            let f = load_formula(&formula)?;
            let v = valid_with(&f, SatOptions { atom_budget })?;
            Ok(if v { "valid" } else { "not-valid" }.to_string())
        }
        Command::Reduce { tm, input, out_model, out_formula, out_layout } => {
            let t = load_tm(&tm)?;
            let word = t.parse_input(&input)?;
            let out = build_psi(&t, &word)?;
            write_file(&out_model, &write_model(&out.model, Some(&out.run)))?;
            write_file(&out_formula, &format!("{}\n", print(&out.psi)))?;
            if let Some(path) = out_layout {
                write_file(&path, &write_layout(&out.layout))?;
            }
            Ok(format!(
                "states={} positions={} formula_nodes={} answer={}",
                out.model.state_count(),
                out.run.len(),
                out.psi.dag_size(),
                out.simulation.answer
            ))
        }
        Command::Verify { tm, input } => {
            let t = load_tm(&tm)?;
            let word = t.parse_input(&input)?;
            let out = build_psi(&t, &word)?;
            let truth =
                eval_lasso(&out.model, &out.run, &out.psi).map_err(|e| Failure::Internal(e.to_string()))?;
            let answer = out.simulation.answer == Answer::Yes;
            Ok(format!("answer={} formula={truth} consistent={}", yes_no(answer), yes_no(answer == truth)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            let mut stdout = io::stdout().lock();
            if writeln!(stdout, "{report}").is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
