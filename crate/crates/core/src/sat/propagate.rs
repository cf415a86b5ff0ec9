//! Syntactic unit propagation of a partial assignment on a clause set.
//!
//! Rounds repeat until the clause set stops changing:
//! (a) drop every clause holding a literal that the assignment makes true;
//! (b) delete every literal the assignment makes false, and every literal
//!     whose complement is present as a unit clause.
//! Unit clauses produced along the way stay in the result: the assignment is
//! never extended, so a derived unit only acts through step (b).

use crate::cnf::{Clause, CnfFormula, Lit, Var};

/// Truth values for a subset of the variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    values: Vec<Option<bool>>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        let i = var.index();
        if self.values.len() <= i {
            self.values.resize(i + 1, None);
        }
        self.values[i] = Some(value);
    }

    pub fn unset(&mut self, var: Var) {
        if let Some(v) = self.values.get_mut(var.index()) {
            *v = None;
        }
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var.index()).copied().flatten()
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var()).map(|v| lit.eval(v))
    }

    /// Sets the literal true.
    pub fn assign_lit(&mut self, lit: Lit) {
        self.set(lit.var(), lit.is_positive());
    }

    /// `τ+`
    pub fn positive(&self) -> impl Iterator<Item = Var> + '_ {
        self.iter().filter(|&(_, b)| b).map(|(v, _)| v)
    }

    /// `τ-`
    pub fn negative(&self) -> impl Iterator<Item = Var> + '_ {
        self.iter().filter(|&(_, b)| !b).map(|(v, _)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (Var::from_index(i), b)))
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_lits(&self) -> Vec<Lit> {
        self.iter().map(|(v, b)| v.lit(b)).collect()
    }
}

impl FromIterator<Lit> for PartialAssignment {
    fn from_iter<T: IntoIterator<Item = Lit>>(iter: T) -> Self {
        let mut a = PartialAssignment::new();
        for l in iter {
            a.assign_lit(l);
        }
        a
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    Formula(CnfFormula),
    /// An empty clause appeared.
    Conflict,
}

impl Propagation {
    pub fn is_conflict(&self) -> bool {
        matches!(self, Propagation::Conflict)
    }

    pub fn formula(&self) -> Option<&CnfFormula> {
        match self {
            Propagation::Formula(f) => Some(f),
            Propagation::Conflict => None,
        }
    }
}

fn canonical(mut clauses: Vec<Clause>) -> Vec<Clause> {
    for c in &mut clauses {
        c.sort_by_key(|l| (l.var(), !l.is_positive()));
        c.dedup();
    }
    clauses.sort();
    clauses.dedup();
    clauses
}

/// Unit propagation fixed point of `tau` on `formula`. The variable space and
/// registry of the input are kept; only the clause set changes.
pub fn unit_propagate(formula: &CnfFormula, tau: &PartialAssignment) -> Propagation {
    let mut clauses = canonical(formula.clauses().to_vec());
    if clauses.iter().any(Vec::is_empty) {
        return Propagation::Conflict;
    }
    loop {
        let units: std::collections::HashSet<Lit> = clauses
            .iter()
            .filter(|c| c.len() == 1)
            .map(|c| c[0])
            .collect();
        let mut next = Vec::with_capacity(clauses.len());
        for c in &clauses {
            if c.iter().any(|&l| tau.lit_value(l) == Some(true)) {
                continue;
            }
            let kept: Clause = c
                .iter()
                .copied()
                .filter(|&l| tau.lit_value(l) != Some(false) && !units.contains(&!l))
                .collect();
            if kept.is_empty() {
                return Propagation::Conflict;
            }
            next.push(kept);
        }
        let next = canonical(next);
        if next == clauses {
            break;
        }
        clauses = next;
    }
    let mut out = formula.clone();
    out_replace_clauses(&mut out, clauses);
    Propagation::Formula(out)
}

fn out_replace_clauses(f: &mut CnfFormula, clauses: Vec<Clause>) {
    let mut fresh = CnfFormula::with_vars(f.num_vars());
    for (v, name) in f.registry().iter() {
        fresh.name_var(v, name.to_string());
    }
    for c in clauses {
        fresh.add_clause(c);
    }
    *f = fresh;
}
