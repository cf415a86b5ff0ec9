//! CNF formulas over a 1-based integer variable space, a name registry for
//! variables and DIMACS input/output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

/// A propositional variable, 1-based as in DIMACS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    /// 0-based position, handy for indexing assignment vectors.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        Var(i as u32 + 1)
    }

    pub fn pos(self) -> Lit {
        Lit(self.0 as i32)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit(-(self.0 as i32))
    }

    pub fn lit(self, positive: bool) -> Lit {
        if positive {
            self.pos()
        } else {
            self.neg()
        }
    }
}

/// A literal in DIMACS encoding: the sign is the polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn from_dimacs(value: i32) -> Self {
        assert!(value != 0, "0 is not a literal");
        Lit(value)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Truth value of the literal when its variable has value `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Clause = Vec<Lit>;

/// Injective map between semantic names and variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarRegistry {
    by_name: BTreeMap<String, Var>,
    by_var: BTreeMap<Var, String>,
}

impl VarRegistry {
    pub fn insert(&mut self, name: String, var: Var) {
        assert!(
            !self.by_name.contains_key(&name) && !self.by_var.contains_key(&var),
            "variable registry must stay injective ({name} -> {})",
            var.0
        );
        self.by_var.insert(var, name.clone());
        self.by_name.insert(name, var);
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, var: Var) -> Option<&str> {
        self.by_var.get(&var).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_var.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_var.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &str)> {
        self.by_var.iter().map(|(&v, n)| (v, n.as_str()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    registry: VarRegistry,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vars(num_vars: u32) -> Self {
        CnfFormula {
            num_vars,
            ..Self::default()
        }
    }

    pub fn from_clauses(num_vars: u32, clauses: impl IntoIterator<Item = Clause>) -> Self {
        let mut f = Self::with_vars(num_vars);
        for c in clauses {
            f.add_clause(c);
        }
        f
    }

    /// Convenience constructor from DIMACS integers.
    pub fn from_dimacs_clauses(num_vars: u32, clauses: &[&[i32]]) -> Self {
        Self::from_clauses(
            num_vars,
            clauses
                .iter()
                .map(|c| c.iter().map(|&l| Lit::from_dimacs(l)).collect()),
        )
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    pub fn registry(&self) -> &VarRegistry {
        &self.registry
    }

    /// Allocates a fresh variable, optionally under a registry name.
    pub fn new_var(&mut self, name: Option<String>) -> Var {
        self.num_vars += 1;
        let v = Var(self.num_vars);
        if let Some(name) = name {
            self.registry.insert(name, v);
        }
        v
    }

    pub fn name_var(&mut self, var: Var, name: String) {
        assert!(var.0 <= self.num_vars);
        self.registry.insert(name, var);
    }

    /// Adds a clause. Duplicate literals are dropped; a clause that contains
    /// both polarities of a variable is a tautology and is not stored.
    /// Returns whether the clause was kept.
    pub fn add_clause(&mut self, mut clause: Clause) -> bool {
        clause.sort_by_key(|l| (l.var(), !l.is_positive()));
        clause.dedup();
        if clause.windows(2).any(|w| w[0].var() == w[1].var()) {
            return false;
        }
        if let Some(max) = clause.iter().map(|l| l.var().0).max() {
            assert!(
                max <= self.num_vars,
                "literal over variable {max} exceeds the variable count {}",
                self.num_vars
            );
        }
        self.clauses.push(clause);
        true
    }

    /// `true` iff every clause has a literal made true by `assignment`
    /// (indexed by `Var::index`).
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.eval(assignment[l.var().index()])))
    }

    /// Writes `p cnf`, the `c atom`/`c p show` comment block and the clauses.
    pub fn write_dimacs<W: Write>(&self, mut out: W, header: &DimacsHeader) -> io::Result<()> {
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for (name, var) in &header.atoms {
            writeln!(out, "c atom {name} {}", var.0)?;
        }
        if let Some(show) = &header.show {
            write!(out, "c p show")?;
            for v in show {
                write!(out, " {}", v.0)?;
            }
            writeln!(out, " 0")?;
        }
        for c in &self.clauses {
            for l in c {
                write!(out, "{l} ")?;
            }
            writeln!(out, "0")?;
        }
        Ok(())
    }

    pub fn to_dimacs_string(&self, header: &DimacsHeader) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf, header)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("DIMACS output is ASCII")
    }
}

/// Comment metadata written alongside the clauses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DimacsHeader {
    pub atoms: Vec<(String, Var)>,
    /// Variables kept by projection. `None` writes no `c p show` line.
    pub show: Option<Vec<Var>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
}

/// A parsed DIMACS file: the formula plus an optional projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimacsFile {
    pub formula: CnfFormula,
    pub show: Option<Vec<Var>>,
}

pub fn parse_dimacs(text: &str) -> Result<DimacsFile, DimacsError> {
    let mut formula: Option<CnfFormula> = None;
    let mut show: Option<Vec<Var>> = None;
    let mut pending: Clause = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let malformed = |message: String| DimacsError::Malformed {
            line: i + 1,
            message,
        };
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("c p show") {
            let vars = show.get_or_insert_with(Vec::new);
            for tok in rest.split_whitespace() {
                let v: u32 = tok
                    .parse()
                    .map_err(|_| malformed(format!("bad show variable `{tok}`")))?;
                if v != 0 {
                    vars.push(Var(v));
                }
            }
            continue;
        }
        if line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let nums: Vec<usize> = rest
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| malformed("bad `p cnf` header".into()))?;
            let [vars, _clauses] = nums[..] else {
                return Err(malformed("bad `p cnf` header".into()));
            };
            formula = Some(CnfFormula::with_vars(vars as u32));
            continue;
        }
        let f = formula.as_mut().ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| malformed(format!("bad literal `{tok}`")))?;
            if lit == 0 {
                f.add_clause(std::mem::take(&mut pending));
            } else {
                if lit.unsigned_abs() > f.num_vars() {
                    return Err(malformed(format!("literal {lit} exceeds variable count")));
                }
                pending.push(Lit::from_dimacs(lit));
            }
        }
    }
    let mut formula = formula.ok_or(DimacsError::MissingHeader)?;
    if !pending.is_empty() {
        formula.add_clause(pending);
    }
    Ok(DimacsFile { formula, show })
}
