//! Exact and projected model counting.
//!
//! DPLL over the kept (non-projected) variables with unit propagation,
//! splitting into variable-disjoint components whose counts multiply, and a
//! cache keyed on the canonical clause set of a component. A component with
//! no kept variable left contributes 1 if satisfiable and 0 otherwise.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::solver;
use crate::cnf::{Clause, CnfFormula, Lit, Var};

pub type BigCount = BigUint;

/// `#F`: models over all `num_vars` variables.
pub fn count_models(formula: &CnfFormula) -> BigCount {
    projected_count(formula, &[])
}

/// `#∃X F`: assignments to the variables outside `project_out` that extend to
/// a model of `formula`.
pub fn projected_count(formula: &CnfFormula, project_out: &[Var]) -> BigCount {
    let n = formula.num_vars() as usize;
    let mut kept = vec![true; n];
    for v in project_out {
        assert!(
            v.index() < n,
            "projected variable {} is outside the formula",
            v.0
        );
        kept[v.index()] = false;
    }
    let mut counter = Counter {
        kept,
        cache: HashMap::new(),
    };
    let scope: Vec<Var> = (0..n).map(Var::from_index).collect();
    counter.count(formula.clauses().to_vec(), &scope)
}

struct Counter {
    kept: Vec<bool>,
    cache: HashMap<Vec<Clause>, BigCount>,
}

enum Simplified {
    Conflict,
    Clauses(Vec<Clause>, Vec<Var>),
}

/// Unit propagation by assignment. Returns the reduced clauses and the
/// variables fixed along the way.
fn simplify(mut clauses: Vec<Clause>) -> Simplified {
    let mut fixed: HashMap<Var, bool> = HashMap::new();
    loop {
        let mut units: Vec<Lit> = Vec::new();
        for c in &clauses {
            if c.is_empty() {
                return Simplified::Conflict;
            }
            if c.len() == 1 {
                units.push(c[0]);
            }
        }
        if units.is_empty() {
            break;
        }
        for u in units {
            match fixed.get(&u.var()) {
                Some(&val) if val != u.is_positive() => return Simplified::Conflict,
                _ => {
                    fixed.insert(u.var(), u.is_positive());
                }
            }
        }
        let mut next = Vec::with_capacity(clauses.len());
        for c in clauses {
            let mut satisfied = false;
            let mut kept = Vec::with_capacity(c.len());
            for l in c {
                match fixed.get(&l.var()) {
                    Some(&val) if l.eval(val) => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => kept.push(l),
                }
            }
            if !satisfied {
                if kept.is_empty() {
                    return Simplified::Conflict;
                }
                next.push(kept);
            }
        }
        clauses = next;
    }
    Simplified::Clauses(clauses, fixed.into_keys().collect())
}

/// Groups clauses into variable-disjoint components (union-find on variables).
fn components(clauses: Vec<Clause>) -> Vec<Vec<Clause>> {
    let mut index: HashMap<Var, usize> = HashMap::new();
    let mut parent: Vec<usize> = Vec::new();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for c in &clauses {
        let mut first: Option<usize> = None;
        for l in c {
            let id = *index.entry(l.var()).or_insert_with(|| {
                parent.push(parent.len());
                parent.len() - 1
            });
            match first {
                None => first = Some(id),
                Some(f) => {
                    let (a, b) = (find(&mut parent, f), find(&mut parent, id));
                    if a != b {
                        parent[b] = a;
                    }
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<Clause>> = HashMap::new();
    for c in clauses {
        let root = find(&mut parent, index[&c[0].var()]);
        groups.entry(root).or_default().push(c);
    }
    let mut out: Vec<Vec<Clause>> = groups.into_values().collect();
    // deterministic order keeps the cache behaviour reproducible
    out.sort_by_key(|g| g.iter().flat_map(|c| c.iter().map(|l| l.var())).min());
    out
}

fn canonical(mut clauses: Vec<Clause>) -> Vec<Clause> {
    for c in &mut clauses {
        c.sort();
        c.dedup();
    }
    clauses.sort();
    clauses.dedup();
    clauses
}

fn pow2(k: usize) -> BigCount {
    BigCount::one() << k
}

impl Counter {
    /// Counts kept-variable assignments over `scope` extendable to models.
    fn count(&mut self, clauses: Vec<Clause>, scope: &[Var]) -> BigCount {
        let (clauses, fixed) = match simplify(clauses) {
            Simplified::Conflict => return BigCount::zero(),
            Simplified::Clauses(c, f) => (c, f),
        };
        // fixed variables take one value; kept ones that vanished are free
        let mut bound: std::collections::HashSet<Var> = fixed.into_iter().collect();
        bound.extend(clauses.iter().flatten().map(|l| l.var()));
        let free_kept = scope
            .iter()
            .filter(|v| !bound.contains(v) && self.kept[v.index()])
            .count();
        let mut total = pow2(free_kept);
        for comp in components(clauses) {
            let c = self.count_component(comp);
            if c.is_zero() {
                return c;
            }
            total *= c;
        }
        total
    }

    fn count_component(&mut self, clauses: Vec<Clause>) -> BigCount {
        let clauses = canonical(clauses);
        if let Some(hit) = self.cache.get(&clauses) {
            return hit.clone();
        }
        let mut occurrences: HashMap<Var, usize> = HashMap::new();
        for c in &clauses {
            for l in c {
                *occurrences.entry(l.var()).or_default() += 1;
            }
        }
        let branch = occurrences
            .iter()
            .filter(|(v, _)| self.kept[v.index()])
            .max_by_key(|(v, n)| (**n, std::cmp::Reverse(**v)))
            .map(|(v, _)| *v);
        let result = match branch {
            None => {
                let n = occurrences.keys().map(|v| v.0).max().unwrap_or(0);
                let f = CnfFormula::from_clauses(n, clauses.iter().cloned());
                if solver::solve(&f).is_sat() {
                    BigCount::one()
                } else {
                    BigCount::zero()
                }
            }
            Some(v) => {
                let scope: Vec<Var> = occurrences.keys().copied().collect();
                let mut sum = BigCount::zero();
                for lit in [v.pos(), v.neg()] {
                    let mut branch = clauses.clone();
                    branch.push(vec![lit]);
                    sum += self.count(branch, &scope);
                }
                sum
            }
        };
        self.cache.insert(clauses, result.clone());
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn truth_table(f: &CnfFormula, project_out: &[Var]) -> u64 {
        let n = f.num_vars() as usize;
        let mut seen = std::collections::HashSet::new();
        for mask in 0u64..1 << n {
            let a: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            if f.is_satisfied_by(&a) {
                let key: Vec<bool> = (0..n)
                    .filter(|i| !project_out.contains(&Var::from_index(*i)))
                    .map(|i| a[i])
                    .collect();
                seen.insert(key);
            }
        }
        seen.len() as u64
    }

    fn arb_formula(max_vars: u32) -> impl Strategy<Value = CnfFormula> {
        (1..=max_vars).prop_flat_map(|n| {
            prop::collection::vec(
                prop::collection::vec((1..=n as i32, any::<bool>()), 1..4),
                0..(2 * n as usize + 2),
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
    fn small_cases() {
        assert_eq!(count_models(&CnfFormula::new()), BigCount::from(1u32));
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]);
        assert_eq!(count_models(&f), BigCount::from(3u32));
        // a = 1, x = 2
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]);
        assert_eq!(projected_count(&f, &[Var(2)]), BigCount::from(2u32));
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1], &[-1]]);
        assert!(count_models(&f).is_zero());
        // variables outside every clause double the count
        assert_eq!(
            count_models(&CnfFormula::with_vars(5)),
            BigCount::from(32u32)
        );
    }

    #[test]
    fn independent_pairs_multiply() {
        let k = 127u32;
        let mut f = CnfFormula::with_vars(2 * k);
        for i in 0..k {
            let (a, b) = (Var(2 * i + 1), Var(2 * i + 2));
            f.add_clause(vec![a.pos(), b.pos()]);
            f.add_clause(vec![a.neg(), b.neg()]);
        }
        assert_eq!(count_models(&f), BigCount::one() << 127);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn count_matches_truth_table(f in arb_formula(16)) {
            prop_assert_eq!(count_models(&f), BigCount::from(truth_table(&f, &[])));
            prop_assert_eq!(count_models(&f).is_zero(), !solver::solve(&f).is_sat());
        }

        #[test]
        fn projected_count_matches_truth_table(f in arb_formula(12), mask in any::<u16>()) {
            let out: Vec<Var> = (0..f.num_vars()).filter(|i| mask >> i & 1 == 1).map(|i| Var(i + 1)).collect();
            prop_assert_eq!(projected_count(&f, &out), BigCount::from(truth_table(&f, &out)));
        }

        #[test]
        fn clause_order_does_not_matter(f in arb_formula(12), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut clauses = f.clauses().to_vec();
            clauses.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let g = CnfFormula::from_clauses(f.num_vars(), clauses);
            prop_assert_eq!(count_models(&f), count_models(&g));
        }
    }
}
