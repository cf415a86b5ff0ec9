//! The copy operation on loop atoms and the two counting formulas built on it.
//!
//! `Copy(P)` has one implication `x' -> x` per loop atom `x`, and for every rule
//! whose head meets the loop atoms the rule itself with each loop atom `y`
//! replaced by `y'`. `φ1` is the completion; `φ2` adds two copies (primed and
//! starred) and asks for a starred copy strictly above the primed one. Its
//! projection onto the atoms counts the completion models that are not answer
//! sets.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cnf::{CnfFormula, DimacsHeader, Lit, Var};
use crate::completion::{clark_completion, AuxDefinition, CompletionArtifact};
use crate::depgraph::{loop_atoms, LoopAtomSet};
use crate::program::{AtomId, GroundProgram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CopyNamespace {
    /// `x'`
    Prime,
    /// `x*`
    Star,
}

impl CopyNamespace {
    pub fn suffix(self) -> &'static str {
        match self {
            CopyNamespace::Prime => "'",
            CopyNamespace::Star => "*",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Atom(AtomId),
    Copy(AtomId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ImplicationKind {
    /// `x' -> x`
    Link,
    /// Copy of the rule with this index.
    Rule(usize),
}

/// `pos ∧ ¬neg -> head1 ∨ ... ∨ headk`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Implication {
    pub kind: ImplicationKind,
    pub pos: Vec<Term>,
    pub neg: Vec<AtomId>,
    pub head: Vec<Term>,
}

#[derive(Clone, Debug)]
pub struct CopyProgram {
    pub namespace: CopyNamespace,
    /// The loop atoms, ascending.
    pub copied: Vec<AtomId>,
    pub implications: Vec<Implication>,
}

pub fn copy_operation(
    program: &GroundProgram,
    loops: &LoopAtomSet,
    namespace: CopyNamespace,
) -> CopyProgram {
    let f = |x: AtomId| {
        if loops.contains(x) {
            Term::Copy(x)
        } else {
            Term::Atom(x)
        }
    };
    let copied: Vec<AtomId> = loops.iter().collect();
    let mut implications: Vec<Implication> = copied
        .iter()
        .map(|&x| Implication {
            kind: ImplicationKind::Link,
            pos: vec![Term::Copy(x)],
            neg: Vec::new(),
            head: vec![Term::Atom(x)],
        })
        .collect();
    for (ri, r) in program.rules().iter().enumerate() {
        if !r.head.iter().any(|&h| loops.contains(h)) {
            continue;
        }
        implications.push(Implication {
            kind: ImplicationKind::Rule(ri),
            pos: r.pos_body.iter().map(|&b| f(b)).collect(),
            neg: r.neg_body.clone(),
            head: r.head.iter().map(|&h| f(h)).collect(),
        });
    }
    CopyProgram {
        namespace,
        copied,
        implications,
    }
}

impl CopyProgram {
    pub fn is_empty(&self) -> bool {
        self.implications.is_empty()
    }

    /// Allocates one named variable per copied atom (in `copied` order) and
    /// adds every implication as a clause. Atom `i` must be variable `i + 1`
    /// of `formula`.
    pub fn encode_into(
        &self,
        program: &GroundProgram,
        formula: &mut CnfFormula,
    ) -> BTreeMap<AtomId, Var> {
        let vars: BTreeMap<AtomId, Var> = self
            .copied
            .iter()
            .map(|&x| {
                let name = format!("{}{}", program.atom_name(x), self.namespace.suffix());
                (x, formula.new_var(Some(name)))
            })
            .collect();
        let var = |t: Term| match t {
            Term::Atom(a) => Var::from_index(a.index()),
            Term::Copy(a) => vars[&a],
        };
        for imp in &self.implications {
            let clause: Vec<Lit> = imp
                .pos
                .iter()
                .map(|&t| var(t).neg())
                .chain(imp.neg.iter().map(|&c| Var::from_index(c.index()).pos()))
                .chain(imp.head.iter().map(|&t| var(t).pos()))
                .collect();
            formula.add_clause(clause);
        }
        vars
    }

    pub fn display<'a>(&'a self, program: &'a GroundProgram) -> DisplayCopy<'a> {
        DisplayCopy {
            copy: self,
            program,
        }
    }
}

pub struct DisplayCopy<'a> {
    copy: &'a CopyProgram,
    program: &'a GroundProgram,
}

impl fmt::Display for DisplayCopy<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = self.copy.namespace.suffix();
        let term = |t: &Term| match *t {
            Term::Atom(a) => self.program.atom_name(a).to_string(),
            Term::Copy(a) => format!("{}{suffix}", self.program.atom_name(a)),
        };
        for imp in &self.copy.implications {
            let body: Vec<String> = imp
                .pos
                .iter()
                .map(term)
                .chain(
                    imp.neg
                        .iter()
                        .map(|&c| format!("not {}", self.program.atom_name(c))),
                )
                .collect();
            let head: Vec<String> = imp.head.iter().map(term).collect();
            let head = if head.is_empty() {
                "false".to_string()
            } else {
                head.join(" | ")
            };
            if body.is_empty() {
                writeln!(f, "{head}")?;
            } else {
                writeln!(f, "{} -> {head}", body.join(" & "))?;
            }
        }
        Ok(())
    }
}

/// `φ2` with its variable layout.
#[derive(Clone, Debug)]
pub struct SurplusArtifact {
    pub cnf: CnfFormula,
    /// Indexed by atom id.
    pub atom_vars: Vec<Var>,
    pub cv_prime: BTreeMap<AtomId, Var>,
    pub cv_star: BTreeMap<AtomId, Var>,
    /// Completion auxiliaries followed by the `¬x' ∧ x*` selectors.
    pub aux: Vec<Var>,
    /// Everything except the atom variables.
    pub projection_out: Vec<Var>,
}

/// `φ1`: the completion, counted over all of its variables.
pub fn build_phi1(program: &GroundProgram) -> CompletionArtifact {
    clark_completion(program)
}

/// `Comp(P) ∧ Copy'(P) ∧ Copy*(P) ∧ ⋀(x' -> x*) ∧ ⋁(¬x' ∧ x*)`.
/// With no loop atoms the final disjunction is empty and so is the formula's
/// model set.
pub fn build_phi2(program: &GroundProgram) -> SurplusArtifact {
    build_phi2_with(program, &clark_completion(program), &loop_atoms(program))
}

pub fn build_phi2_with(
    program: &GroundProgram,
    completion: &CompletionArtifact,
    loops: &LoopAtomSet,
) -> SurplusArtifact {
    let mut cnf = completion.cnf.clone();
    let cv_prime =
        copy_operation(program, loops, CopyNamespace::Prime).encode_into(program, &mut cnf);
    let cv_star =
        copy_operation(program, loops, CopyNamespace::Star).encode_into(program, &mut cnf);
    for (x, &p) in &cv_prime {
        cnf.add_clause(vec![p.neg(), cv_star[x].pos()]);
    }
    let mut aux: Vec<Var> = completion.aux_vars().collect();
    let mut some_gap = Vec::new();
    for (x, &p) in &cv_prime {
        let def = AuxDefinition {
            var: cnf.new_var(Some(format!("aux:gap:{}", program.atom_name(*x)))),
            conjuncts: vec![p.neg(), cv_star[x].pos()],
        };
        def.encode(&mut cnf);
        some_gap.push(def.var.pos());
        aux.push(def.var);
    }
    cnf.add_clause(some_gap);

    let mut projection_out: Vec<Var> = cv_prime
        .values()
        .chain(cv_star.values())
        .chain(&aux)
        .copied()
        .collect();
    projection_out.sort();
    SurplusArtifact {
        cnf,
        atom_vars: completion.atom_vars.clone(),
        cv_prime,
        cv_star,
        aux,
        projection_out,
    }
}

fn atom_header(program: &GroundProgram, atom_vars: &[Var]) -> Vec<(String, Var)> {
    atom_vars
        .iter()
        .enumerate()
        .map(|(i, &v)| (program.atom_name(AtomId(i)).to_string(), v))
        .collect()
}

/// DIMACS header for `φ1`. With `projected` the atom variables are listed as
/// the show set; otherwise the file is a plain count instance.
pub fn phi1_header(
    program: &GroundProgram,
    artifact: &CompletionArtifact,
    projected: bool,
) -> DimacsHeader {
    DimacsHeader {
        atoms: atom_header(program, &artifact.atom_vars),
        show: projected.then(|| artifact.atom_vars.clone()),
    }
}

/// DIMACS header for `φ2`: the show set is the atom variables.
pub fn phi2_header(program: &GroundProgram, artifact: &SurplusArtifact) -> DimacsHeader {
    DimacsHeader {
        atoms: atom_header(program, &artifact.atom_vars),
        show: Some(artifact.atom_vars.clone()),
    }
}

/// Variable map written next to an encoded `φ2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub atoms: BTreeMap<String, u32>,
    pub cv_prime: BTreeMap<String, u32>,
    pub cv_star: BTreeMap<String, u32>,
    pub aux: Vec<u32>,
}

impl SurplusArtifact {
    pub fn sidecar(&self, program: &GroundProgram) -> Sidecar {
        let by_name = |m: &BTreeMap<AtomId, Var>| {
            m.iter()
                .map(|(&a, v)| (program.atom_name(a).to_string(), v.0))
                .collect()
        };
        Sidecar {
            atoms: self
                .atom_vars
                .iter()
                .enumerate()
                .map(|(i, v)| (program.atom_name(AtomId(i)).to_string(), v.0))
                .collect(),
            cv_prime: by_name(&self.cv_prime),
            cv_star: by_name(&self.cv_star),
            aux: self.aux.iter().map(|v| v.0).collect(),
        }
    }
}
