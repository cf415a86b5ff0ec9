//! Clark completion lowered to CNF.
//!
//! Atom `i` of the program is variable `i + 1`. Each group-3 disjunct with more
//! than one literal gets an auxiliary variable defined by a biconditional, so
//! every model over the atom variables extends to exactly one full model and
//! the plain model count equals the count of the completion itself.

use crate::cnf::{CnfFormula, Lit, Var};
use crate::program::{AtomId, GroundProgram, Interpretation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    /// `¬a` for atoms heading no rule.
    G1,
    /// One clause per rule: body implies head.
    G2,
    /// Support: a true atom needs a rule whose body holds and whose other head atoms are false.
    G3,
}

/// `var <-> AND(conjuncts)`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxDefinition {
    pub var: Var,
    pub conjuncts: Vec<Lit>,
}

impl AuxDefinition {
    /// Adds the three-way biconditional to `formula`, returning the number of
    /// clauses added.
    pub(crate) fn encode(&self, formula: &mut CnfFormula) -> usize {
        let mut added = 0;
        for &l in &self.conjuncts {
            added += usize::from(formula.add_clause(vec![self.var.neg(), l]));
        }
        let mut back: Vec<Lit> = self.conjuncts.iter().map(|&l| !l).collect();
        back.push(self.var.pos());
        added += usize::from(formula.add_clause(back));
        added
    }

    pub(crate) fn value(&self, assignment: &[bool]) -> bool {
        self.conjuncts
            .iter()
            .all(|l| l.eval(assignment[l.var().index()]))
    }
}

#[derive(Clone, Debug)]
pub struct CompletionArtifact {
    pub cnf: CnfFormula,
    /// Indexed by atom id.
    pub atom_vars: Vec<Var>,
    /// Definitions in allocation order; each only mentions atom variables.
    pub aux: Vec<AuxDefinition>,
    /// Group of each clause of `cnf`, by clause index.
    pub group_tags: Vec<Group>,
}

impl CompletionArtifact {
    pub fn aux_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.aux.iter().map(|d| d.var)
    }

    pub fn clauses_in(&self, group: Group) -> impl Iterator<Item = &Vec<Lit>> + '_ {
        self.cnf
            .clauses()
            .iter()
            .zip(&self.group_tags)
            .filter(move |(_, &g)| g == group)
            .map(|(c, _)| c)
    }

    /// Full assignment of `cnf` induced by `m`: atoms from `m`, auxiliaries
    /// from their definitions.
    pub fn extend(&self, m: &Interpretation) -> Vec<bool> {
        let mut assignment = vec![false; self.cnf.num_vars() as usize];
        for (i, v) in self.atom_vars.iter().enumerate() {
            assignment[v.index()] = m.contains(AtomId(i));
        }
        for d in &self.aux {
            assignment[d.var.index()] = d.value(&assignment);
        }
        assignment
    }
}

fn atom_var(a: AtomId) -> Var {
    Var::from_index(a.index())
}

/// Literals of the conjunction `body(r) ∧ ⋀_{x ∈ head(r) \ {a}} ¬x`, or `None`
/// when it is contradictory.
fn support_conjunction(program: &GroundProgram, rule: usize, a: AtomId) -> Option<Vec<Lit>> {
    let r = &program.rules()[rule];
    let mut lits: Vec<Lit> = r
        .pos_body
        .iter()
        .map(|&b| atom_var(b).pos())
        .chain(r.neg_body.iter().map(|&c| atom_var(c).neg()))
        .chain(
            r.head
                .iter()
                .filter(|&&x| x != a)
                .map(|&x| atom_var(x).neg()),
        )
        .collect();
    lits.sort_by_key(|l| (l.var(), !l.is_positive()));
    lits.dedup();
    if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
        return None;
    }
    Some(lits)
}

pub fn clark_completion(program: &GroundProgram) -> CompletionArtifact {
    let n = program.num_atoms();
    let mut cnf = CnfFormula::with_vars(n as u32);
    let atom_vars: Vec<Var> = (0..n).map(Var::from_index).collect();
    for (i, atom) in program.atoms().iter().enumerate() {
        cnf.name_var(atom_vars[i], atom.name.clone());
    }
    let mut group_tags = Vec::new();
    let mut aux = Vec::new();

    let heads = program.head_atoms();
    for a in 0..n {
        if !heads[a] && cnf.add_clause(vec![atom_vars[a].neg()]) {
            group_tags.push(Group::G1);
        }
    }

    for r in program.rules() {
        let clause: Vec<Lit> = r
            .pos_body
            .iter()
            .map(|&b| atom_var(b).neg())
            .chain(r.neg_body.iter().map(|&c| atom_var(c).pos()))
            .chain(r.head.iter().map(|&h| atom_var(h).pos()))
            .collect();
        if cnf.add_clause(clause) {
            group_tags.push(Group::G2);
        }
    }

    let mut supporting: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ri, r) in program.rules().iter().enumerate() {
        for h in &r.head {
            supporting[h.index()].push(ri);
        }
    }
    for a in 0..n {
        let atom = AtomId(a);
        if supporting[a].is_empty() {
            continue;
        }
        let mut disjuncts: Vec<(usize, Vec<Lit>)> = Vec::new();
        let mut trivially_supported = false;
        for &ri in &supporting[a] {
            match support_conjunction(program, ri, atom) {
                Some(c) if c.is_empty() => trivially_supported = true,
                Some(c) => disjuncts.push((ri, c)),
                None => {}
            }
        }
        if trivially_supported {
            continue;
        }
        let not_a = atom_vars[a].neg();
        let emit = |cnf: &mut CnfFormula, tags: &mut Vec<Group>, clause: Vec<Lit>| {
            if cnf.add_clause(clause) {
                tags.push(Group::G3);
            }
        };
        match disjuncts.len() {
            0 => emit(&mut cnf, &mut group_tags, vec![not_a]),
            1 => {
                for &l in &disjuncts[0].1 {
                    emit(&mut cnf, &mut group_tags, vec![not_a, l]);
                }
            }
            _ => {
                let mut big = vec![not_a];
                for (ri, conj) in disjuncts {
                    if conj.len() == 1 {
                        big.push(conj[0]);
                        continue;
                    }
                    let name = format!("aux:g3:{}:r{}", program.atom_name(atom), ri + 1);
                    let def = AuxDefinition {
                        var: cnf.new_var(Some(name)),
                        conjuncts: conj,
                    };
                    let added = def.encode(&mut cnf);
                    group_tags.extend(std::iter::repeat_n(Group::G3, added));
                    big.push(def.var.pos());
                    aux.push(def);
                }
                emit(&mut cnf, &mut group_tags, big);
            }
        }
    }
    debug_assert_eq!(group_tags.len(), cnf.num_clauses());
    CompletionArtifact {
        cnf,
        atom_vars,
        aux,
        group_tags,
    }
}

/// `τ_M |= Comp(P)` on the CNF, with auxiliaries set by their definitions.
pub fn completion_model_check(artifact: &CompletionArtifact, m: &Interpretation) -> bool {
    artifact.cnf.is_satisfied_by(&artifact.extend(m))
}

/// Evaluates the three groups of completion implications on `m` directly from
/// the program, with no CNF involved.
pub fn completion_holds(program: &GroundProgram, m: &Interpretation) -> bool {
    let heads = program.head_atoms();
    let g1 = (0..program.num_atoms()).all(|a| heads[a] || !m.contains(AtomId(a)));
    let body_holds = |r: &crate::program::Rule| {
        r.pos_body.iter().all(|&b| m.contains(b)) && r.neg_body.iter().all(|&c| !m.contains(c))
    };
    let g2 = program
        .rules()
        .iter()
        .all(|r| !body_holds(r) || r.head.iter().any(|&h| m.contains(h)));
    let g3 = (0..program.num_atoms()).map(AtomId).all(|a| {
        !heads[a.index()]
            || !m.contains(a)
            || program.rules().iter().any(|r| {
                r.head.contains(&a)
                    && body_holds(r)
                    && r.head.iter().all(|&x| x == a || !m.contains(x))
            })
    });
    g1 && g2 && g3
}
