//! A small CDCL solver: two watched literals, first-UIP learning, activity
//! based branching with phase saving, and solving under assumptions.
//!
//! It also supports model enumeration: after a model is reported the clause
//! blocking its decision literals is added and search resumes from the
//! current trail instead of restarting from scratch.

use crate::cnf::{CnfFormula, Lit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct ILit(u32);

impl ILit {
    fn from_lit(l: Lit) -> Self {
        let v = l.var().index() as u32;
        ILit(v << 1 | u32::from(!l.is_positive()))
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    /// `true` for a negative literal.
    fn sign(self) -> bool {
        self.0 & 1 == 1
    }

    fn neg(self) -> ILit {
        ILit(self.0 ^ 1)
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

/// Outcome of a satisfiability call. Models are indexed by `Var::index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Vec<bool>),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&[bool]> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<ILit>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<Value>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    /// `false` once the clause set is unsatisfiable at level 0.
    ok: bool,
    /// Set while the trail holds a reported model during enumeration.
    at_model: bool,
}

const RESTART_FIRST: u64 = 100;

fn lit_value(assigns: &[Value], l: ILit) -> Value {
    match assigns[l.var()] {
        Value::Unassigned => Value::Unassigned,
        Value::True if !l.sign() => Value::True,
        Value::False if l.sign() => Value::True,
        _ => Value::False,
    }
}

impl Solver {
    pub fn new(num_vars: u32) -> Self {
        let n = num_vars as usize;
        Solver {
            num_vars: n,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![Value::Unassigned; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            phase: vec![false; n],
            seen: vec![false; n],
            ok: true,
            at_model: false,
        }
    }

    pub fn from_formula(formula: &CnfFormula) -> Self {
        let mut s = Solver::new(formula.num_vars());
        for c in formula.clauses() {
            if !s.add_clause(c) {
                break;
            }
        }
        s
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars as u32
    }

    fn value(&self, l: ILit) -> Value {
        lit_value(&self.assigns, l)
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Adds a clause at decision level 0. Returns `false` once the formula is
    /// known to be unsatisfiable.
    pub fn add_clause(&mut self, clause: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut lits: Vec<ILit> = clause.iter().map(|&l| ILit::from_lit(l)).collect();
        assert!(
            lits.iter().all(|l| l.var() < self.num_vars),
            "clause mentions a variable outside the solver"
        );
        lits.sort_unstable_by_key(|l| l.0);
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == w[1].neg()) {
            return true;
        }
        lits.retain(|&l| self.value(l) != Value::False);
        if lits.iter().any(|&l| self.value(l) == Value::True) {
            return true;
        }
        match lits.len() {
            0 => {
                self.ok = false;
            }
            1 => {
                self.enqueue(lits[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(lits);
            }
        }
        self.ok
    }

    fn attach(&mut self, lits: Vec<ILit>) -> usize {
        let idx = self.clauses.len();
        self.watches[lits[0].code()].push(idx);
        self.watches[lits[1].code()].push(idx);
        self.clauses.push(lits);
        idx
    }

    fn enqueue(&mut self, l: ILit, reason: Option<usize>) {
        let v = l.var();
        debug_assert_eq!(self.assigns[v], Value::Unassigned);
        self.assigns[v] = if l.sign() { Value::False } else { Value::True };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Returns the index of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p.neg();
            let mut watchers = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut conflict = None;
            while i < watchers.len() {
                let ci = watchers[i];
                let clause = &mut self.clauses[ci];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if lit_value(&self.assigns, first) == Value::True {
                    i += 1;
                    continue;
                }
                let replacement = (2..clause.len())
                    .find(|&k| lit_value(&self.assigns, clause[k]) != Value::False);
                if let Some(k) = replacement {
                    clause.swap(1, k);
                    self.watches[clause[1].code()].push(ci);
                    watchers.swap_remove(i);
                    continue;
                }
                if lit_value(&self.assigns, first) == Value::False {
                    conflict = Some(ci);
                    break;
                }
                self.enqueue(first, Some(ci));
                i += 1;
            }
            // watchers registered on `false_lit` meanwhile (none expected) are kept
            let added = std::mem::take(&mut self.watches[false_lit.code()]);
            watchers.extend(added);
            self.watches[false_lit.code()] = watchers;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for &l in &self.trail[start..] {
            let v = l.var();
            self.phase[v] = !l.sign();
            self.assigns[v] = Value::Unassigned;
            self.reason[v] = None;
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = self.trail.len();
        self.at_model = false;
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest-level other literal second) and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<ILit>, usize) {
        let mut learnt = vec![ILit(0)];
        let mut path = 0;
        let mut idx = self.trail.len();
        let mut p: Option<ILit> = None;
        loop {
            let clause = self.clauses[confl].clone();
            let start = usize::from(p.is_some());
            for &q in &clause[start..] {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var()] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = p.expect("conflict analysis found a UIP").neg();
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let bt = if learnt.len() == 1 {
            0
        } else {
            let (max_i, _) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .max_by_key(|(_, l)| self.level[l.var()])
                .expect("learnt clause has a second literal");
            learnt.swap(1, max_i);
            self.level[learnt[1].var()]
        };
        self.var_inc /= 0.95;
        (learnt, bt)
    }

    fn pick_branch(&self) -> Option<ILit> {
        let mut best: Option<usize> = None;
        for v in 0..self.num_vars {
            if self.assigns[v] == Value::Unassigned
                && best.is_none_or(|b| self.activity[v] > self.activity[b])
            {
                best = Some(v);
            }
        }
        best.map(|v| ILit((v as u32) << 1 | u32::from(!self.phase[v])))
    }

    /// Core search loop from the current trail. Assumption literals occupy
    /// the first decision levels.
    fn search(&mut self, assumptions: &[ILit]) -> bool {
        let mut conflicts: u64 = 0;
        let mut restart_limit = RESTART_FIRST;
        loop {
            if let Some(confl) = self.propagate() {
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return false;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(asserting, Some(ci));
                }
                continue;
            }
            if conflicts >= restart_limit {
                conflicts = 0;
                restart_limit = restart_limit * 3 / 2;
                self.cancel_until(0);
                continue;
            }
            let next = if self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match self.value(a) {
                    Value::True => {
                        // already implied; open an empty level to keep the indexing
                        self.trail_lim.push(self.trail.len());
                        continue;
                    }
                    Value::False => return false,
                    Value::Unassigned => a,
                }
            } else {
                match self.pick_branch() {
                    Some(l) => l,
                    None => return true,
                }
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, None);
        }
    }

    fn current_model(&self) -> Vec<bool> {
        self.assigns.iter().map(|&v| v == Value::True).collect()
    }

    /// Decides the clause set under `assumptions`. The solver stays usable
    /// afterwards; learnt clauses are kept.
    pub fn solve_with(&mut self, assumptions: &[Lit]) -> SatResult {
        if !self.ok {
            return SatResult::Unsat;
        }
        self.cancel_until(0);
        let assumptions: Vec<ILit> = assumptions.iter().map(|&l| ILit::from_lit(l)).collect();
        let sat = self.search(&assumptions);
        let result = if sat {
            SatResult::Sat(self.current_model())
        } else {
            SatResult::Unsat
        };
        self.cancel_until(0);
        result
    }

    pub fn solve(&mut self) -> SatResult {
        self.solve_with(&[])
    }

    /// Returns the next model not reported before, or `None` when all models
    /// over every variable have been listed. Do not interleave with `add_clause`
    /// or `solve_with` while enumerating.
    pub fn next_model(&mut self) -> Option<Vec<bool>> {
        if !self.ok {
            return None;
        }
        if self.at_model {
            self.at_model = false;
            // Block the decisions of the previous model.
            let decisions: Vec<ILit> = self.trail_lim.iter().map(|&i| self.trail[i]).collect();
            match decisions.len() {
                0 => {
                    self.ok = false;
                    return None;
                }
                1 => {
                    self.cancel_until(0);
                    self.enqueue(decisions[0].neg(), None);
                }
                k => {
                    self.cancel_until(k - 1);
                    let mut clause: Vec<ILit> = decisions.iter().rev().map(|l| l.neg()).collect();
                    // clause[0] = ¬d_k (unassigned now), clause[1] = ¬d_{k-1} (false at level k-1)
                    let asserting = clause[0];
                    clause.truncate(k);
                    let ci = self.attach(clause);
                    self.enqueue(asserting, Some(ci));
                }
            }
        } else {
            self.cancel_until(0);
        }
        if self.search(&[]) {
            self.at_model = true;
            Some(self.current_model())
        } else {
            None
        }
    }
}

/// One-shot satisfiability check.
pub fn solve(formula: &CnfFormula) -> SatResult {
    Solver::from_formula(formula).solve()
}

pub fn solve_with(formula: &CnfFormula, assumptions: &[Lit]) -> SatResult {
    Solver::from_formula(formula).solve_with(assumptions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_sat(f: &CnfFormula) -> bool {
        let n = f.num_vars() as usize;
        (0u32..1 << n).any(|mask| {
            let a: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            f.is_satisfied_by(&a)
        })
    }

    fn brute_count(f: &CnfFormula) -> usize {
        let n = f.num_vars() as usize;
        (0u32..1 << n)
            .filter(|mask| {
                let a: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                f.is_satisfied_by(&a)
            })
            .count()
    }

    pub(crate) fn arb_formula(max_vars: u32) -> impl Strategy<Value = CnfFormula> {
        (1..=max_vars).prop_flat_map(|n| {
            prop::collection::vec(
                prop::collection::vec((1..=n as i32, any::<bool>()), 1..4),
                0..(3 * n as usize + 2),
            )
            .prop_map(move |cs| {
                CnfFormula::from_clauses(
                    n,
                    cs.into_iter().map(|c| {
                        c.into_iter()
                            .map(|(v, p)| Lit::from_dimacs(if p { v } else { -v }))
                            .collect()
                    }),
                )
            })
        })
    }

    #[test]
    fn trivial_cases() {
        assert!(solve(&CnfFormula::new()).is_sat());
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]);
        assert_eq!(solve(&f), SatResult::Unsat);
        let mut f = CnfFormula::with_vars(2);
        f.add_clause(vec![]);
        assert_eq!(solve(&f), SatResult::Unsat);
    }

    #[test]
    fn reduced_copy_formula_is_sat() {
        // w' = 1, q1' = 2: (¬w' ∨ q1') ∧ (¬q1' ∨ w') ∧ (¬w' ∨ ¬q1')
        let f = CnfFormula::from_dimacs_clauses(2, &[&[-1, 2], &[-2, 1], &[-1, -2]]);
        let m = solve(&f);
        assert_eq!(m.model(), Some(&[false, false][..]));
    }

    #[test]
    fn assumptions() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, 2], &[-1, 3]]);
        let mut s = Solver::from_formula(&f);
        let r = s.solve_with(&[Lit::from_dimacs(1), Lit::from_dimacs(-3)]);
        assert_eq!(r, SatResult::Unsat);
        let r = s.solve_with(&[Lit::from_dimacs(-2)]);
        let m = r.model().unwrap();
        assert!(m[0] && m[2]);
        // the solver is still usable without assumptions
        assert!(s.solve().is_sat());
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p(i,j): pigeon i in hole j -> var 2*i + j + 1
        let var = |i: i32, j: i32| 2 * i + j + 1;
        let mut clauses: Vec<Vec<i32>> = (0..3).map(|i| vec![var(i, 0), var(i, 1)]).collect();
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    clauses.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        let refs: Vec<&[i32]> = clauses.iter().map(Vec::as_slice).collect();
        assert_eq!(
            solve(&CnfFormula::from_dimacs_clauses(6, &refs)),
            SatResult::Unsat
        );
    }

    proptest! {
        #[test]
        fn agrees_with_truth_table(f in arb_formula(10)) {
            let r = solve(&f);
            prop_assert_eq!(r.is_sat(), brute_sat(&f));
            if let SatResult::Sat(m) = r {
                prop_assert!(f.is_satisfied_by(&m));
            }
        }

        #[test]
        fn enumeration_lists_every_model_once(f in arb_formula(8)) {
            let mut s = Solver::from_formula(&f);
            let mut seen = std::collections::HashSet::new();
            while let Some(m) = s.next_model() {
                prop_assert!(f.is_satisfied_by(&m));
                prop_assert!(seen.insert(m), "model reported twice");
            }
            prop_assert_eq!(seen.len(), brute_count(&f));
        }
    }
}
