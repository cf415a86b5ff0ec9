use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aspsubcount::cnf::Var;
use aspsubcount::completion::{clark_completion, completion_holds, completion_model_check};
use aspsubcount::copy::build_phi2;
use aspsubcount::counter::{
    enumerate_count, hybrid_count, subtractive_count, subtractive_count_with, BackendConfig,
    CountOptions,
};
use aspsubcount::depgraph::is_tight;
use aspsubcount::generate::{random_program, random_tight_program, RandomProgramConfig};
use aspsubcount::oracle::{answer_sets_bruteforce, is_answer_set};
use aspsubcount::program::{parse_program, GroundProgram, Interpretation};
use aspsubcount::sat::{count_models, BigCount, Solver};
use aspsubcount::Execution;

fn program(seed: u64, force_loop: bool) -> GroundProgram {
    let cfg = RandomProgramConfig {
        atoms: 3 + (seed % 6) as usize,
        rules: 2 + (seed % 9) as usize,
        max_head: 3,
        max_pos: 2,
        max_neg: 2,
        constraint_prob: 0.1,
        force_loop,
    };
    random_program(&mut ChaCha8Rng::seed_from_u64(seed), &cfg)
}

/// Models of `φ2` restricted to the atoms, listed by brute-force enumeration.
fn phi2_atom_models(p: &GroundProgram) -> Vec<Interpretation> {
    let phi2 = build_phi2(p);
    let n = p.num_atoms();
    let mut solver = Solver::from_formula(&phi2.cnf);
    let mut seen = std::collections::BTreeSet::new();
    while let Some(m) = solver.next_model() {
        seen.insert(m[..n].to_vec());
    }
    seen.into_iter().map(Interpretation::from_bools).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn answer_sets_are_models_and_completion_models(seed in any::<u64>(), force in any::<bool>()) {
        let p = program(seed, force);
        let comp = clark_completion(&p);
        for m in answer_sets_bruteforce(&p, Execution::Sequential).unwrap() {
            prop_assert!(p.satisfied_by(&m));
            prop_assert!(completion_model_check(&comp, &m));
            prop_assert!(is_answer_set(&p, &m));
        }
    }

    #[test]
    fn completion_cnf_agrees_with_direct_evaluation(seed in any::<u64>(), force in any::<bool>()) {
        let p = program(seed, force);
        let comp = clark_completion(&p);
        let n = p.num_atoms();
        for mask in 0u64..1 << n {
            let m = Interpretation::from_mask(n, mask);
            prop_assert_eq!(completion_model_check(&comp, &m), completion_holds(&p, &m));
        }
        // auxiliaries are determined, so the count is the number of atom models
        let direct = (0u64..1 << n)
            .filter(|&mask| completion_holds(&p, &Interpretation::from_mask(n, mask)))
            .count();
        prop_assert_eq!(count_models(&comp.cnf), BigCount::from(direct));
    }

    /// Atom parts of `φ2` models are exactly the completion models that are
    /// not answer sets.
    #[test]
    fn surplus_models_are_the_rejected_completion_models(seed in any::<u64>()) {
        let p = program(seed, true);
        let n = p.num_atoms();
        prop_assume!(n <= 8);
        let answers = answer_sets_bruteforce(&p, Execution::Sequential).unwrap();
        let want: Vec<Interpretation> = (0u64..1 << n)
            .map(|mask| Interpretation::from_mask(n, mask))
            .filter(|m| completion_holds(&p, m) && !answers.contains(m))
            .collect();
        let mut got = phi2_atom_models(&p);
        let mut want = want;
        got.sort_by(|a, b| a.as_bools().cmp(b.as_bools()));
        want.sort_by(|a, b| a.as_bools().cmp(b.as_bools()));
        prop_assert_eq!(got, want);
    }

    #[test]
    fn counting_paths_agree(seed in any::<u64>(), force in any::<bool>()) {
        let p = program(seed, force);
        let b = BackendConfig::builtin();
        let sub = subtractive_count(&p, &b).unwrap();
        let seq = subtractive_count_with(&p, &b, &CountOptions { execution: Execution::Sequential, ..CountOptions::default() }).unwrap();
        let en = enumerate_count(&p, u64::MAX).unwrap();
        let hy = hybrid_count(&p, 3, &b).unwrap();
        prop_assert_eq!(&sub.answer_sets, &seq.answer_sets);
        prop_assert_eq!(&sub.answer_sets, &BigCount::from(en.count));
        prop_assert_eq!(&sub.answer_sets, &hy.answer_sets);
        prop_assert!(en.exhausted);
        // determinism
        let again = subtractive_count(&p, &b).unwrap();
        prop_assert_eq!((sub.overcount, sub.surplus), (again.overcount, again.surplus));
    }

    #[test]
    fn tight_programs_have_no_surplus(seed in any::<u64>()) {
        let cfg = RandomProgramConfig { atoms: 6, rules: 8, ..RandomProgramConfig::default() };
        let p = random_tight_program(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        prop_assert!(is_tight(&p));
        let opts = CountOptions { tight_shortcut: false, ..CountOptions::default() };
        let r = subtractive_count_with(&p, &BackendConfig::builtin(), &opts).unwrap();
        prop_assert!(r.surplus.is_zero());
    }

    #[test]
    fn printed_programs_reparse_identically(seed in any::<u64>(), force in any::<bool>()) {
        let p = program(seed, force);
        let q = parse_program(&p.to_string()).unwrap();
        prop_assert_eq!(p.rules(), q.rules());
        prop_assert_eq!(p.num_atoms(), q.num_atoms());
    }

    #[test]
    fn phi2_keeps_atoms_in_front(seed in any::<u64>()) {
        let p = program(seed, true);
        let phi2 = build_phi2(&p);
        for (i, v) in phi2.atom_vars.iter().enumerate() {
            prop_assert_eq!(*v, Var::from_index(i));
            prop_assert!(!phi2.projection_out.contains(v));
        }
    }
}

#[test]
fn atom_ids_follow_first_occurrence() {
    let p = parse_program("c :- b, not a. b | d.").unwrap();
    let names: Vec<&str> = p.atoms().iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["c", "b", "a", "d"]);
}

#[test]
fn unsat_completion_counts_zero() {
    let p = parse_program("a. :- a.").unwrap();
    let r = subtractive_count(&p, &BackendConfig::builtin()).unwrap();
    assert!(r.answer_sets.is_zero() && r.overcount.is_zero());
    let e = enumerate_count(&p, 5).unwrap();
    assert_eq!((e.count, e.exhausted), (0, true));
}
