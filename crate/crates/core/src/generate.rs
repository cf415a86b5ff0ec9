//! Random and structured program families for tests and benchmarks.

use rand::seq::index::sample;
use rand::Rng;

use crate::program::{AtomId, GroundProgram, Rule};

#[derive(Clone, Debug)]
pub struct RandomProgramConfig {
    pub atoms: usize,
    pub rules: usize,
    pub max_head: usize,
    pub max_pos: usize,
    pub max_neg: usize,
    /// Probability that a rule is a constraint.
    pub constraint_prob: f64,
    /// Add `x :- y.` and `y :- x.` for two random atoms.
    pub force_loop: bool,
}

impl Default for RandomProgramConfig {
    fn default() -> Self {
        RandomProgramConfig {
            atoms: 6,
            rules: 8,
            max_head: 2,
            max_pos: 2,
            max_neg: 2,
            constraint_prob: 0.1,
            force_loop: false,
        }
    }
}

fn pick<R: Rng>(rng: &mut R, from: &[usize], max: usize) -> Vec<AtomId> {
    let k = rng.gen_range(0..=max.min(from.len()));
    sample(rng, from.len(), k)
        .into_iter()
        .map(|i| AtomId(from[i]))
        .collect()
}

/// Interns `a{i}` in order of first occurrence, so only atoms that appear in
/// some rule exist.
fn assemble(rules: Vec<(Vec<AtomId>, Vec<AtomId>, Vec<AtomId>)>) -> GroundProgram {
    let mut p = GroundProgram::new();
    for (head, pos, neg) in rules {
        let mut ids = |v: Vec<AtomId>| -> Vec<AtomId> {
            v.into_iter()
                .map(|a| p.intern(&format!("a{}", a.0)))
                .collect()
        };
        let rule = Rule::new(ids(head), ids(pos), ids(neg));
        p.add_rule(rule);
    }
    p
}

pub fn random_program<R: Rng>(rng: &mut R, cfg: &RandomProgramConfig) -> GroundProgram {
    let n = cfg.atoms.max(1);
    let mut rules = Vec::new();
    let all: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.rules {
        let head = if rng.gen_bool(cfg.constraint_prob) {
            Vec::new()
        } else {
            let mut h = pick(rng, &all, cfg.max_head.max(1));
            if h.is_empty() {
                h.push(AtomId(rng.gen_range(0..n)));
            }
            h
        };
        let pos = pick(rng, &all, cfg.max_pos);
        let neg = pick(rng, &all, cfg.max_neg);
        if head.is_empty() && pos.is_empty() && neg.is_empty() {
            continue;
        }
        rules.push((head, pos, neg));
    }
    if cfg.force_loop && n >= 2 {
        let pair = sample(rng, n, 2);
        let (x, y) = (AtomId(pair.index(0)), AtomId(pair.index(1)));
        rules.push((vec![x], vec![y], Vec::new()));
        rules.push((vec![y], vec![x], Vec::new()));
    }
    assemble(rules)
}

/// Positive bodies only mention atoms below every head atom, so the positive
/// dependency graph is acyclic.
pub fn random_tight_program<R: Rng>(rng: &mut R, cfg: &RandomProgramConfig) -> GroundProgram {
    let n = cfg.atoms.max(1);
    let mut rules = Vec::new();
    let all: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.rules {
        let low = rng.gen_range(0..n);
        let (head, below) = if rng.gen_bool(cfg.constraint_prob) {
            (Vec::new(), all.clone())
        } else {
            let above: Vec<usize> = (low..n).collect();
            let mut head = pick(rng, &above, cfg.max_head.max(1));
            if head.is_empty() {
                head.push(AtomId(low));
            }
            let lowest = head.iter().map(|a| a.0).min().unwrap();
            (head, (0..lowest).collect())
        };
        let pos = pick(rng, &below, cfg.max_pos);
        let neg = pick(rng, &all, cfg.max_neg);
        if head.is_empty() && pos.is_empty() && neg.is_empty() {
            continue;
        }
        rules.push((head, pos, neg));
    }
    assemble(rules)
}

/// `a_i | b_i.` for `i < k`: `2^k` answer sets.
pub fn independent_pairs(k: usize) -> GroundProgram {
    let mut p = GroundProgram::new();
    for i in 0..k {
        p.add_named_rule(&[&format!("a{i}"), &format!("b{i}")], &[], &[]);
    }
    p
}

/// A chain of `k` two-atom positive cycles, each guessed by a disjunction:
/// `x_i | y_i. x_i :- y_i. y_i :- x_i.`
pub fn looped_pairs(k: usize) -> GroundProgram {
    let mut p = GroundProgram::new();
    for i in 0..k {
        let (x, y) = (format!("x{i}"), format!("y{i}"));
        p.add_named_rule(&[&x, &y], &[], &[]);
        p.add_named_rule(&[&x], &[&y], &[]);
        p.add_named_rule(&[&y], &[&x], &[]);
    }
    p
}
