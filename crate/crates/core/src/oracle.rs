//! Answer-set checks: reduct minimality by SAT and by subset enumeration,
//! brute-force counting, and the loop-restricted and copy-based checks.

use num_traits::Zero;
use thiserror::Error;

use crate::cnf::{CnfFormula, Lit, Var};
use crate::completion::completion_holds;
use crate::copy::{copy_operation, CopyNamespace};
use crate::depgraph::LoopAtomSet;
use crate::par::{self, Execution};
use crate::program::{AtomId, GroundProgram, Interpretation};
use crate::sat::{self, unit_propagate, BigCount, PartialAssignment, Propagation, SatResult};

/// Largest program the exhaustive routines accept.
pub const BRUTE_FORCE_MAX_ATOMS: usize = 25;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("program has {0} atoms; exhaustive search supports at most {BRUTE_FORCE_MAX_ATOMS}")]
    TooManyAtoms(usize),
    #[error("interpretation does not satisfy the program")]
    NotAModel,
    #[error("interpretation does not satisfy the completion")]
    NotACompletionModel,
    #[error("interpretation has {found} atoms, program has {expected}")]
    SizeMismatch { expected: usize, found: usize },
}

/// `P^M`: rules whose negative body misses `M`, without their negative body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductProgram {
    pub num_atoms: usize,
    /// `(head, positive body)`
    pub rules: Vec<(Vec<AtomId>, Vec<AtomId>)>,
}

impl ReductProgram {
    pub fn satisfied_by(&self, m: &Interpretation) -> bool {
        self.rules.iter().all(|(head, pos)| {
            head.iter().any(|&h| m.contains(h)) || pos.iter().any(|&b| !m.contains(b))
        })
    }

    /// The reduct as clauses over atom variables `1..=n`.
    pub fn to_cnf(&self) -> CnfFormula {
        let var = |a: AtomId| Var::from_index(a.index());
        CnfFormula::from_clauses(
            self.num_atoms as u32,
            self.rules.iter().map(|(head, pos)| {
                pos.iter()
                    .map(|&b| var(b).neg())
                    .chain(head.iter().map(|&h| var(h).pos()))
                    .collect()
            }),
        )
    }
}

pub fn gl_reduct(program: &GroundProgram, m: &Interpretation) -> ReductProgram {
    ReductProgram {
        num_atoms: program.num_atoms(),
        rules: program
            .rules()
            .iter()
            .filter(|r| r.neg_body.iter().all(|&c| !m.contains(c)))
            .map(|r| (r.head.clone(), r.pos_body.clone()))
            .collect(),
    }
}

fn check_size(program: &GroundProgram, m: &Interpretation) -> Result<(), OracleError> {
    if m.num_atoms() != program.num_atoms() {
        return Err(OracleError::SizeMismatch {
            expected: program.num_atoms(),
            found: m.num_atoms(),
        });
    }
    Ok(())
}

fn atom_lit(a: AtomId, positive: bool) -> Lit {
    Var::from_index(a.index()).lit(positive)
}

/// `P^M ∧ ⋀_{x∉M} ¬x ∧ ⋁_{x∈M} ¬x`: SAT iff some proper subset of `M`
/// satisfies the reduct. Requires `M |= P`.
pub fn justification_check_all(
    program: &GroundProgram,
    m: &Interpretation,
) -> Result<SatResult, OracleError> {
    check_size(program, m)?;
    if !program.satisfied_by(m) {
        return Err(OracleError::NotAModel);
    }
    let mut f = gl_reduct(program, m).to_cnf();
    for a in m.false_atoms() {
        f.add_clause(vec![atom_lit(a, false)]);
    }
    f.add_clause(m.true_atoms().map(|a| atom_lit(a, false)).collect());
    Ok(sat::solve(&f))
}

/// `P^M ∧ ⋀_{x∉M} ¬x ∧ ⋀_{x∈M\L} x ∧ ⋁_{x∈M∩L} ¬x`. Requires `M |= Comp(P)`.
pub fn justification_check_loops(
    program: &GroundProgram,
    m: &Interpretation,
    loops: &LoopAtomSet,
) -> Result<SatResult, OracleError> {
    check_size(program, m)?;
    if !completion_holds(program, m) {
        return Err(OracleError::NotACompletionModel);
    }
    let mut f = gl_reduct(program, m).to_cnf();
    let mut drop = Vec::new();
    for a in (0..program.num_atoms()).map(AtomId) {
        match (m.contains(a), loops.contains(a)) {
            (false, _) => f.add_clause(vec![atom_lit(a, false)]),
            (true, false) => f.add_clause(vec![atom_lit(a, true)]),
            (true, true) => {
                drop.push(atom_lit(a, false));
                true
            }
        };
    }
    f.add_clause(drop);
    Ok(sat::solve(&f))
}

/// Unit propagation of `M` on `Copy(P)`, then `⋁_{x∈M∩L} ¬x'`. UNSAT iff `M`
/// is an answer set. Requires `M |= Comp(P)`.
pub fn copy_check(
    program: &GroundProgram,
    m: &Interpretation,
    loops: &LoopAtomSet,
) -> Result<SatResult, OracleError> {
    check_size(program, m)?;
    if !completion_holds(program, m) {
        return Err(OracleError::NotACompletionModel);
    }
    let copy = copy_operation(program, loops, CopyNamespace::Prime);
    let mut f = CnfFormula::with_vars(program.num_atoms() as u32);
    let copies = copy.encode_into(program, &mut f);
    let tau: PartialAssignment = (0..program.num_atoms())
        .map(|i| atom_lit(AtomId(i), m.contains(AtomId(i))))
        .collect();
    let mut reduced = match unit_propagate(&f, &tau) {
        Propagation::Formula(g) => g,
        Propagation::Conflict => return Ok(SatResult::Unsat),
    };
    reduced.add_clause(
        copies
            .iter()
            .filter(|(a, _)| m.contains(**a))
            .map(|(_, v)| v.neg())
            .collect(),
    );
    Ok(sat::solve(&reduced))
}

pub fn is_answer_set(program: &GroundProgram, m: &Interpretation) -> bool {
    check_size(program, m).is_ok()
        && matches!(justification_check_all(program, m), Ok(SatResult::Unsat))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubsetVerdict {
    AnswerSet,
    NotAModel,
    /// A proper subset of `M` satisfying `P^M`.
    Witness(Interpretation),
}

/// Answer-set test by enumerating every proper subset of `M`. Among witnesses
/// the one found first in increasing-size order is returned.
pub fn is_answer_set_by_subsets(
    program: &GroundProgram,
    m: &Interpretation,
) -> Result<SubsetVerdict, OracleError> {
    check_size(program, m)?;
    if !program.satisfied_by(m) {
        return Ok(SubsetVerdict::NotAModel);
    }
    let members: Vec<AtomId> = m.true_atoms().collect();
    if members.len() > BRUTE_FORCE_MAX_ATOMS {
        return Err(OracleError::TooManyAtoms(members.len()));
    }
    let reduct = gl_reduct(program, m);
    let full = (1u64 << members.len()) - 1;
    let mut masks: Vec<u64> = (0..full).collect();
    masks.sort_by_key(|s| (s.count_ones(), *s));
    for s in masks {
        let sub = Interpretation::from_atoms(
            program.num_atoms(),
            members
                .iter()
                .enumerate()
                .filter(|(i, _)| s >> i & 1 == 1)
                .map(|(_, &a)| a),
        );
        if reduct.satisfied_by(&sub) {
            return Ok(SubsetVerdict::Witness(sub));
        }
    }
    Ok(SubsetVerdict::AnswerSet)
}

fn minimal_by_reduct(program: &GroundProgram, m: &Interpretation) -> bool {
    let reduct = gl_reduct(program, m);
    let members: Vec<AtomId> = m.true_atoms().collect();
    let full = (1u64 << members.len()) - 1;
    (0..full).all(|s| {
        let sub = Interpretation::from_atoms(
            program.num_atoms(),
            members
                .iter()
                .enumerate()
                .filter(|(i, _)| s >> i & 1 == 1)
                .map(|(_, &a)| a),
        );
        !reduct.satisfied_by(&sub)
    })
}

/// Every answer set, by enumerating all interpretations and all their subsets.
pub fn answer_sets_bruteforce(
    program: &GroundProgram,
    exec: Execution,
) -> Result<Vec<Interpretation>, OracleError> {
    let n = program.num_atoms();
    if n > BRUTE_FORCE_MAX_ATOMS {
        return Err(OracleError::TooManyAtoms(n));
    }
    let found = par::map_range(exec, 1u64 << n, |mask| {
        let m = Interpretation::from_mask(n, mask);
        (program.satisfied_by(&m) && minimal_by_reduct(program, &m)).then_some(m)
    });
    Ok(found.into_iter().flatten().collect())
}

pub fn count_answer_sets_bruteforce(
    program: &GroundProgram,
    exec: Execution,
) -> Result<BigCount, OracleError> {
    let mut total = BigCount::zero();
    total += answer_sets_bruteforce(program, exec)?.len();
    Ok(total)
}
