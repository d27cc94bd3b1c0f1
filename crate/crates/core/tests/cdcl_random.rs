use nrfmapf_core::cdcl::CdclSolver;
use nrfmapf_core::{Clause, Deadline, Lit, SatBackend, SolveStatus, Var};
use nrfmapf_testkit::exhaustive_sat;
use proptest::prelude::*;

fn clause_strategy(n: u32) -> impl Strategy<Value = Clause> {
    prop::collection::vec((0..n, any::<bool>()), 1..4)
        .prop_map(|ls| ls.into_iter().map(|(v, p)| Lit::new(Var(v), p)).collect())
}

fn cnf_strategy() -> impl Strategy<Value = (usize, Vec<Clause>)> {
    (1u32..13).prop_flat_map(|n| {
        let m = (n as usize) * 5;
        (Just(n as usize), prop::collection::vec(clause_strategy(n), 0..m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn agrees_with_exhaustive_search((n, clauses) in cnf_strategy(), seed in any::<u64>()) {
        let mut s = CdclSolver::new(seed);
        s.reserve_vars(n);
        s.add_clauses(&clauses);
        let out = s.solve(&Deadline::unlimited());
        let expected = exhaustive_sat(n, &clauses);
        prop_assert_eq!(out.status == SolveStatus::Sat, expected);
        if let Some(model) = out.model {
            prop_assert!(clauses.iter().all(|c| c.iter().any(|l| l.eval(&model))));
        }
    }

    #[test]
    fn incremental_additions_match_from_scratch((n, clauses) in cnf_strategy(), split in 0usize..60) {
        let split = split.min(clauses.len());
        let mut s = CdclSolver::new(1);
        s.reserve_vars(n);
        s.add_clauses(&clauses[..split]);
        let first = s.solve(&Deadline::unlimited());
        prop_assert_eq!(first.status == SolveStatus::Sat, exhaustive_sat(n, &clauses[..split]));
        s.add_clauses(&clauses[split..]);
        let second = s.solve(&Deadline::unlimited());
        prop_assert_eq!(second.status == SolveStatus::Sat, exhaustive_sat(n, &clauses));
        if let Some(model) = second.model {
            prop_assert!(clauses.iter().all(|c| c.iter().any(|l| l.eval(&model))));
        }
    }
}

#[test]
fn same_seed_same_model() {
    let mut clauses = Vec::new();
    for i in 0..30u32 {
        clauses.push(vec![Lit::new(Var(i), true), Lit::new(Var((i * 7 + 3) % 30), false), Lit::new(Var((i * 11 + 5) % 30), true)]);
    }
    let run = || {
        let mut s = CdclSolver::new(9);
        s.reserve_vars(30);
        s.add_clauses(&clauses);
        s.solve(&Deadline::unlimited()).model
    };
    assert_eq!(run(), run());
}

#[test]
fn incremental_sessions_agree_with_fresh_solvers() {
    use nrfmapf_testkit::{rng, Rng};
    let mut r = rng(1);
    let n = 60;
    for it in 0..100 {
        let mut s = CdclSolver::new(it);
        s.reserve_vars(n);
        let mut all = Vec::new();
        for _ in 0..6 {
            for _ in 0..45 {
                let c: Clause = (0..3).map(|_| Lit::new(Var(r.gen_range(0..n as u32)), r.gen())).collect();
                s.add_clause(&c);
                all.push(c);
            }
            let inc = s.solve(&Deadline::unlimited());
            let mut fresh = CdclSolver::new(it + 1000);
            fresh.reserve_vars(n);
            fresh.add_clauses(&all);
            assert_eq!(inc.status, fresh.solve(&Deadline::unlimited()).status);
            if let Some(m) = inc.model {
                assert!(all.iter().all(|c| c.iter().any(|l| l.eval(&m))));
            }
        }
    }
}

#[test]
fn hard_random_instances_match_exhaustive_search() {
    use nrfmapf_testkit::{rng, Rng};
    let mut r = rng(2);
    let n = 20;
    for it in 0..60 {
        let clauses: Vec<Clause> = (0..85)
            .map(|_| (0..3).map(|_| Lit::new(Var(r.gen_range(0..n as u32)), r.gen())).collect())
            .collect();
        let mut s = CdclSolver::new(it);
        s.reserve_vars(n);
        s.add_clauses(&clauses);
        let out = s.solve(&Deadline::unlimited());
        assert_eq!(out.status == SolveStatus::Sat, exhaustive_sat(n, &clauses));
    }
}
