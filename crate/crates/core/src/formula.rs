//! Formula AST over the five primitive constructors, with builders for the
//! derived connectives.
//!
//! Formulas are reference counted and share subterms. Every node caches a
//! structural hash and its tree size.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// One node of a formula.
#[derive(Debug, Clone)]
pub enum Kind {
    /// Propositional variable `p_i`, `i >= 1`.
    Var(u32),
    Falsum,
    Implies(Formula, Formula),
    Next(Formula),
    Until(Formula, Formula),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
    tree_size: u64,
}

/// An immutable LTL formula.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

const TAG_VAR: u64 = 0x9e37_79b9_7f4a_7c15;
const TAG_FALSUM: u64 = 0xc2b2_ae3d_27d4_eb4f;
const TAG_IMPLIES: u64 = 0x1656_67b1_9e37_79f9;
const TAG_NEXT: u64 = 0x27d4_eb2f_1656_67c5;
const TAG_UNTIL: u64 = 0x85eb_ca77_c2b2_ae63;

fn mix(mut h: u64, v: u64) -> u64 {
    h ^= v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^ (h >> 33)
}

impl Formula {
    fn from_kind(kind: Kind) -> Self {
        let (hash, tree_size) = match &kind {
            Kind::Var(i) => (mix(TAG_VAR, u64::from(*i)), 1),
            Kind::Falsum => (TAG_FALSUM, 1),
            Kind::Implies(a, b) => (
                mix(mix(TAG_IMPLIES, a.0.hash), b.0.hash),
                1u64.saturating_add(a.0.tree_size).saturating_add(b.0.tree_size),
            ),
            Kind::Next(a) => (mix(TAG_NEXT, a.0.hash), a.0.tree_size.saturating_add(1)),
            Kind::Until(a, b) => (
                mix(mix(TAG_UNTIL, a.0.hash), b.0.hash),
                1u64.saturating_add(a.0.tree_size).saturating_add(b.0.tree_size),
            ),
        };
        Formula(Arc::new(Node { kind, hash, tree_size }))
    }

    /// Variable `p_index`.
    ///
    /// Panics if `index` is zero; variable indices start at 1.
    pub fn var(index: u32) -> Self {
        assert!(index >= 1, "variable indices start at 1");
        Self::from_kind(Kind::Var(index))
    }

    /// The single variable `p` (= `p1`).
    pub fn p() -> Self {
        Self::var(1)
    }

    pub fn falsum() -> Self {
        Self::from_kind(Kind::Falsum)
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Self::from_kind(Kind::Implies(lhs, rhs))
    }

    pub fn next(body: Formula) -> Self {
        Self::from_kind(Kind::Next(body))
    }

    pub fn until(lhs: Formula, rhs: Formula) -> Self {
        Self::from_kind(Kind::Until(lhs, rhs))
    }

    /// `⊤ := ⊥ → ⊥`
    pub fn truth() -> Self {
        Self::implies(Self::falsum(), Self::falsum())
    }

    /// `¬a := a → ⊥`
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Self::implies(a, Self::falsum())
    }

    /// `a ∧ b := ¬(a → ¬b)`
    pub fn and(a: Formula, b: Formula) -> Self {
        Self::not(Self::implies(a, Self::not(b)))
    }

    /// `a ∨ b := ¬a → b`
    pub fn or(a: Formula, b: Formula) -> Self {
        Self::implies(Self::not(a), b)
    }

    /// `a ↔ b := (a → b) ∧ (b → a)`
    pub fn iff(a: Formula, b: Formula) -> Self {
        Self::and(Self::implies(a.clone(), b.clone()), Self::implies(b, a))
    }

    /// `◇a := ⊤ U a`
    pub fn eventually(a: Formula) -> Self {
        Self::until(Self::truth(), a)
    }

    /// `□a := ¬◇¬a`
    pub fn always(a: Formula) -> Self {
        Self::not(Self::eventually(Self::not(a)))
    }

    /// Balanced conjunction of `parts`; `⊤` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut layer: Vec<Formula> = parts.into_iter().collect();
        if layer.is_empty() {
            return Self::truth();
        }
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len().div_ceil(2));
            let mut it = layer.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(Self::and(a, b)),
                    None => next.push(a),
                }
            }
            layer = next;
        }
        layer.pop().unwrap()
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn is_truth(&self) -> bool {
        matches!(self.kind(), Kind::Implies(a, b)
            if matches!(a.kind(), Kind::Falsum) && matches!(b.kind(), Kind::Falsum))
    }

    /// Number of nodes in the tree view (saturating).
    pub fn tree_size(&self) -> u64 {
        self.0.tree_size
    }

    /// Number of structurally distinct subformulas, i.e. the size of the
    /// formula as a maximally shared DAG.
    pub fn dag_size(&self) -> usize {
        closure(self).len()
    }

    pub fn ptr_eq(&self, other: &Formula) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }
}

/// `X^n f`: `n` nested `Next` constructors around `f`.
pub fn next_power(n: usize, f: Formula) -> Formula {
    (0..n).fold(f, |acc, _| Formula::next(acc))
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.tree_size != other.0.tree_size {
            return false;
        }
        match (self.kind(), other.kind()) {
            (Kind::Var(a), Kind::Var(b)) => a == b,
            (Kind::Falsum, Kind::Falsum) => true,
            (Kind::Implies(a1, b1), Kind::Implies(a2, b2))
            | (Kind::Until(a1, b1), Kind::Until(a2, b2)) => a1 == a2 && b1 == b2,
            (Kind::Next(a1), Kind::Next(a2)) => a1 == a2,
            _ => false,
        }
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Distinct variable indices occurring in `f`.
pub fn variables(f: &Formula) -> BTreeSet<u32> {
    let mut seen = std::collections::HashSet::new();
    let mut vars = BTreeSet::new();
    let mut stack = vec![f.clone()];
    while let Some(g) = stack.pop() {
        if !seen.insert(g.addr()) {
            continue;
        }
        match g.kind() {
            Kind::Var(i) => {
                vars.insert(*i);
            }
            Kind::Falsum => {}
            Kind::Implies(a, b) | Kind::Until(a, b) => {
                stack.push(a.clone());
                stack.push(b.clone());
            }
            Kind::Next(a) => stack.push(a.clone()),
        }
    }
    vars
}

/// Number of distinct variables occurring in `f`.
pub fn count_vars(f: &Formula) -> usize {
    variables(f).len()
}

/// A closure member with its children replaced by closure indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Var(u32),
    Falsum,
    Implies(usize, usize),
    Next(usize),
    Until(usize, usize),
}

/// The set of subformulas of a root formula.
///
/// Members are listed in post-order of first occurrence, so every member's
/// children precede it and the root is last.
#[derive(Debug, Clone)]
pub struct Closure {
    members: Vec<Formula>,
    ops: Vec<Op>,
    index: HashMap<Op, usize>,
}

impl Closure {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn root(&self) -> usize {
        self.members.len() - 1
    }

    pub fn members(&self) -> &[Formula] {
        &self.members
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> Op {
        self.ops[i]
    }

    pub fn formula(&self, i: usize) -> &Formula {
        &self.members[i]
    }

    /// Position of `f` in the closure, if it is a subformula of the root.
    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        let op = match f.kind() {
            Kind::Var(i) => Op::Var(*i),
            Kind::Falsum => Op::Falsum,
            Kind::Implies(a, b) => Op::Implies(self.index_of(a)?, self.index_of(b)?),
            Kind::Next(a) => Op::Next(self.index_of(a)?),
            Kind::Until(a, b) => Op::Until(self.index_of(a)?, self.index_of(b)?),
        };
        self.index.get(&op).copied()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.index_of(f).is_some()
    }
}

/// Computes the closure of `f`, identifying structurally equal subterms.
pub fn closure(f: &Formula) -> Closure {
    let mut by_addr: HashMap<usize, usize> = HashMap::new();
    let mut index: HashMap<Op, usize> = HashMap::new();
    let mut members = Vec::new();
    let mut ops = Vec::new();

    // Iterative post-order: (node, children_done)
    let mut stack: Vec<(Formula, bool)> = vec![(f.clone(), false)];
    while let Some((g, expanded)) = stack.pop() {
        if by_addr.contains_key(&g.addr()) {
            continue;
        }
        if !expanded {
            stack.push((g.clone(), true));
            match g.kind() {
                Kind::Var(_) | Kind::Falsum => {}
                Kind::Implies(a, b) | Kind::Until(a, b) => {
                    stack.push((b.clone(), false));
                    stack.push((a.clone(), false));
                }
                Kind::Next(a) => stack.push((a.clone(), false)),
            }
            continue;
        }
        let id_of = |h: &Formula| by_addr[&h.addr()];
        let op = match g.kind() {
            Kind::Var(i) => Op::Var(*i),
            Kind::Falsum => Op::Falsum,
            Kind::Implies(a, b) => Op::Implies(id_of(a), id_of(b)),
            Kind::Next(a) => Op::Next(id_of(a)),
            Kind::Until(a, b) => Op::Until(id_of(a), id_of(b)),
        };
        let id = *index.entry(op).or_insert_with(|| {
            members.push(g.clone());
            ops.push(op);
            members.len() - 1
        });
        by_addr.insert(g.addr(), id);
    }
    Closure { members, ops, index }
}

// ---------------------------------------------------------------------------
// Printing

const PREC_IMPLIES: u8 = 0;
const PREC_UNTIL: u8 = 1;
const PREC_UNARY: u8 = 2;

fn precedence(f: &Formula) -> u8 {
    match f.kind() {
        Kind::Implies(..) if !f.is_truth() => PREC_IMPLIES,
        Kind::Until(..) => PREC_UNTIL,
        _ => PREC_UNARY,
    }
}

fn write_at(out: &mut fmt::Formatter<'_>, f: &Formula, min_prec: u8) -> fmt::Result {
    if precedence(f) < min_prec {
        out.write_str("(")?;
        write_formula(out, f)?;
        out.write_str(")")
    } else {
        write_formula(out, f)
    }
}

fn write_formula(out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
    let mut f = f;
    while let Kind::Next(body) = f.kind() {
        out.write_str("X ")?;
        if precedence(body) < PREC_UNARY {
            return write_at(out, body, PREC_UNARY);
        }
        f = body;
    }
    match f.kind() {
        Kind::Var(1) => out.write_str("p"),
        Kind::Var(i) => write!(out, "p{i}"),
        Kind::Falsum => out.write_str("false"),
        _ if f.is_truth() => out.write_str("true"),
        Kind::Implies(a, b) => {
            write_at(out, a, PREC_UNTIL)?;
            out.write_str(" -> ")?;
            write_at(out, b, PREC_IMPLIES)
        }
        Kind::Until(a, b) => {
            write_at(out, a, PREC_UNARY)?;
            out.write_str(" U ")?;
            write_at(out, b, PREC_UNTIL)
        }
        Kind::Next(_) => unreachable!(),
    }
}

/// Canonical text: primitives only, except `⊥ → ⊥` which prints as `true`,
/// with the minimum number of parentheses.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self)
    }
}

pub fn print(f: &Formula) -> String {
    f.to_string()
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Var(u32),
    True,
    False,
    Not,
    Next,
    Eventually,
    Always,
    Until,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Var(i) => write!(f, "'p{i}'"),
            Tok::True => f.write_str("'true'"),
            Tok::False => f.write_str("'false'"),
            Tok::Not => f.write_str("'!'"),
            Tok::Next => f.write_str("'X'"),
            Tok::Eventually => f.write_str("'F'"),
            Tok::Always => f.write_str("'G'"),
            Tok::Until => f.write_str("'U'"),
            Tok::And => f.write_str("'&'"),
            Tok::Or => f.write_str("'|'"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    let err = |line, column, message: String| ParseError { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, column);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            column += n;
        };
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                column = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i);
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    advance(2, &mut i);
                    toks.push(Spanned { tok: Tok::Arrow, line: tl, column: tc });
                    continue;
                }
                return Err(err(tl, tc, "expected '->'".into()));
            }
            'X' => Tok::Next,
            'F' => Tok::Eventually,
            'G' => Tok::Always,
            'U' => Tok::Until,
            'p' => {
                let start = i + 1;
                let mut end = start;
                while end < chars.len() && chars[end].is_ascii_digit() {
                    end += 1;
                }
                let index = if end == start {
                    1
                } else {
                    let digits: String = chars[start..end].iter().collect();
                    match digits.parse::<u32>() {
                        Ok(n) if n >= 1 => n,
                        _ => return Err(err(tl, tc, format!("invalid variable 'p{digits}'"))),
                    }
                };
                advance(end - i, &mut i);
                toks.push(Spanned { tok: Tok::Var(index), line: tl, column: tc });
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let mut end = i;
                while end < chars.len() && chars[end].is_ascii_alphanumeric() {
                    end += 1;
                }
                let word: String = chars[i..end].iter().collect();
                let tok = match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => return Err(err(tl, tc, format!("unknown identifier '{word}'"))),
                };
                advance(end - i, &mut i);
                toks.push(Spanned { tok, line: tl, column: tc });
                continue;
            }
            other => return Err(err(tl, tc, format!("unexpected character '{other}'"))),
        };
        advance(1, &mut i);
        toks.push(Spanned { tok, line: tl, column: tc });
    }
    toks.push(Spanned { tok: Tok::End, line, column });
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Spanned {
        self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos];
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let t = self.peek();
        ParseError { line: t.line, column: t.column, message: format!("expected {what}, found {}", t.tok) }
    }

    // imp := or ('->' imp)?
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.peek().tok == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.peek().tok == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.peek().tok == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.peek().tok == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let mut prefix = Vec::new();
        while matches!(self.peek().tok, Tok::Not | Tok::Next | Tok::Eventually | Tok::Always) {
            prefix.push(self.bump().tok);
        }
        let mut f = self.atom()?;
        for op in prefix.into_iter().rev() {
            f = match op {
                Tok::Not => Formula::not(f),
                Tok::Next => Formula::next(f),
                Tok::Eventually => Formula::eventually(f),
                Tok::Always => Formula::always(f),
                _ => unreachable!(),
            };
        }
        Ok(f)
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().tok {
            Tok::Var(i) => {
                self.bump();
                Ok(Formula::var(i))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::truth())
            }
            Tok::False => {
                self.bump();
                Ok(Formula::falsum())
            }
            Tok::LParen => {
                self.bump();
                let f = self.implication()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.unexpected("')'"));
                }
                self.bump();
                Ok(f)
            }
            _ => Err(self.unexpected("a formula")),
        }
    }
}

/// Parses the concrete formula syntax. Derived connectives are expanded into
/// the five primitives.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    if toks.len() == 1 {
        return Err(ParseError { line: toks[0].line, column: toks[0].column, message: "empty input".into() });
    }
    let mut parser = Parser { toks, pos: 0 };
    let f = parser.implication()?;
    if parser.peek().tok != Tok::End {
        return Err(parser.unexpected("end of input"));
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
