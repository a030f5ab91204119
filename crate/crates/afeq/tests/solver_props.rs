//! Solver behavior against independent references: the crisp enumerator
//! against a full grid scan, forced-zero propagation against the
//! fresh-attacker construction, and the iterator against the residual it
//! claims to minimize. Random inputs use fixed seeds so the corpus never
//! drifts.

mod common;

use std::collections::BTreeSet;

use afeq::af::ArgumentSet;
use afeq::equations::{build_equations, evaluate, perturb, Combinator};
use afeq::solver::{
    decided_ones, decided_zeros, enumerate_crisp_solutions, grounded_propagate,
    iterate_fixed_point, InitialValuation, IterationParams, SolverError, Valuation,
    CRISP_ENUMERATION_BOUND,
};
use common::{catalog, oracle_crisp_solutions, oracle_grounded_decided, random_framework, subsets};

/// Fingerprint of a grid valuation: each value doubled to 0, 1, or 2, in
/// sorted variable order.
fn grid_key(v: &Valuation) -> Vec<u8> {
    v.values().map(|&x| (x * 2.0) as u8).collect()
}

fn grid_set(vals: &[Valuation]) -> BTreeSet<Vec<u8>> {
    vals.iter().map(grid_key).collect()
}

#[test]
fn crisp_enumeration_matches_grid_scan_on_fixtures() {
    for (name, f) in catalog() {
        for kind in [Combinator::Max, Combinator::Product] {
            let sys = build_equations(&f, kind);
            let ours = enumerate_crisp_solutions(&sys).unwrap();
            let reference = oracle_crisp_solutions(&sys);
            assert_eq!(
                grid_set(&ours),
                grid_set(&reference),
                "fixture {name}, {kind:?}"
            );
            assert_eq!(ours.len(), reference.len(), "fixture {name}, {kind:?}");
        }
    }
}

#[test]
fn crisp_enumeration_matches_grid_scan_on_random_frameworks() {
    let mut checked = 0;
    for n in 2..=6 {
        for seed in 0..20 {
            for (salt, p) in [(0u64, 0.2), (1000, 0.45)] {
                let f = random_framework(seed + salt + 31 * n as u64, n, p);
                for kind in [Combinator::Max, Combinator::Product] {
                    let sys = build_equations(&f, kind);
                    let ours = enumerate_crisp_solutions(&sys).unwrap();
                    let reference = oracle_crisp_solutions(&sys);
                    assert_eq!(
                        grid_set(&ours),
                        grid_set(&reference),
                        "seed {seed} salt {salt} n {n}"
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 400, "corpus shrank to {checked}");
}

#[test]
fn crisp_enumeration_handles_clamped_systems() {
    for n in 2..=5 {
        for seed in 40..55 {
            let f = random_framework(seed, n, 0.35);
            let zero: ArgumentSet = f.args().iter().take(n / 2).cloned().collect();
            for kind in [Combinator::Max, Combinator::Product] {
                let sys = perturb(&build_equations(&f, kind), &zero).unwrap();
                let ours = enumerate_crisp_solutions(&sys).unwrap();
                let reference = oracle_crisp_solutions(&sys);
                assert_eq!(grid_set(&ours), grid_set(&reference), "seed {seed} n {n}");
                for sol in &ours {
                    for z in &zero {
                        assert_eq!(sol[z].to_bits(), 0.0f64.to_bits());
                    }
                }
            }
        }
    }
}

#[test]
fn forced_zero_propagation_matches_fresh_attacker_route() {
    for n in 1..=6 {
        for seed in 0..12 {
            let f = random_framework(7000 + seed + 100 * n as u64, n, 0.3);
            for forced in subsets(f.args()) {
                let (decided, residual) = grounded_propagate(&f, &forced).unwrap();

                let grafted = f.add_zero_attackers(&forced).unwrap();
                let reference: Vec<(String, bool)> = oracle_grounded_decided(&grafted)
                    .into_iter()
                    .filter(|(name, _)| f.contains(name))
                    .collect();
                let ours: Vec<(String, bool)> =
                    decided.iter().map(|(k, &v)| (k.clone(), v)).collect();
                assert_eq!(ours, reference, "seed {seed} n {n} forced {forced:?}");

                let undecided: ArgumentSet = f
                    .args()
                    .iter()
                    .filter(|x| !decided.contains_key(*x))
                    .cloned()
                    .collect();
                assert_eq!(residual, f.restrict(&undecided).unwrap());
                for member in &forced {
                    assert_eq!(decided.get(member), Some(&false));
                }
            }
        }
    }
}

#[test]
fn propagation_decides_acyclic_frameworks_completely() {
    for seed in 0..30 {
        let f = common::random_acyclic_framework(seed, 7, 0.4);
        let (decided, residual) = grounded_propagate(&f, &ArgumentSet::new()).unwrap();
        assert_eq!(decided.len(), f.args().len(), "seed {seed}");
        assert!(residual.args().is_empty(), "seed {seed}");
        let ones = decided_ones(&decided);
        let zeros = decided_zeros(&decided);
        assert!(f.is_conflict_free(&ones).unwrap());
        assert_eq!(ones.len() + zeros.len(), f.args().len());
    }
}

#[test]
fn iteration_accepts_crisp_solutions_unchanged() {
    for (name, f) in catalog() {
        if f.args().len() > 6 {
            continue;
        }
        for kind in [Combinator::Max, Combinator::Product] {
            let sys = build_equations(&f, kind);
            for sol in enumerate_crisp_solutions(&sys).unwrap() {
                let params = IterationParams {
                    initial: InitialValuation::Explicit(sol.clone()),
                    ..IterationParams::default()
                };
                let out = iterate_fixed_point(&sys, &params).unwrap();
                for (var, x) in &sol {
                    assert_eq!(
                        out[var].to_bits(),
                        x.to_bits(),
                        "fixture {name}, {kind:?}, var {var}"
                    );
                }
            }
        }
    }
}

#[test]
fn iteration_results_meet_the_tolerance() {
    let params = IterationParams::default();
    let mut converged = 0;
    for n in 2..=7 {
        for seed in 300..312 {
            let f = random_framework(seed + 17 * n as u64, n, 0.35);
            for kind in [Combinator::Max, Combinator::Product] {
                let sys = build_equations(&f, kind);
                match iterate_fixed_point(&sys, &params) {
                    Ok(v) => {
                        let res = evaluate(&sys, &v).unwrap();
                        assert!(
                            res.max_residual <= params.tolerance,
                            "seed {seed} n {n}: residual {}",
                            res.max_residual
                        );
                        converged += 1;
                    }
                    Err(SolverError::NonConvergence { .. }) => {}
                    Err(other) => panic!("seed {seed} n {n}: {other}"),
                }
            }
        }
    }
    assert!(converged >= 60, "only {converged} runs converged");
}

#[test]
fn iteration_pins_clamped_variables_at_zero() {
    for seed in 500..515 {
        let f = random_framework(seed, 5, 0.3);
        let zero: ArgumentSet = f.args().iter().take(2).cloned().collect();
        for kind in [Combinator::Max, Combinator::Product] {
            let sys = perturb(&build_equations(&f, kind), &zero).unwrap();
            if let Ok(v) = iterate_fixed_point(&sys, &IterationParams::default()) {
                for z in &zero {
                    assert_eq!(v[z].to_bits(), 0.0f64.to_bits(), "seed {seed}");
                }
            }
        }
    }
}

#[test]
fn enumeration_bound_is_enforced() {
    let n = CRISP_ENUMERATION_BOUND + 1;
    let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let f = afeq::af::Framework::from_parts(names, Vec::<(String, String)>::new()).unwrap();
    let sys = build_equations(&f, Combinator::Max);
    match enumerate_crisp_solutions(&sys) {
        Err(SolverError::TooManyVariables { count, bound }) => {
            assert_eq!(count, n);
            assert_eq!(bound, CRISP_ENUMERATION_BOUND);
        }
        other => panic!("expected a bound error, got {other:?}"),
    }
}

#[test]
fn bad_iteration_parameters_are_rejected() {
    let sys = build_equations(&common::chain3(), Combinator::Max);
    let bad = [
        IterationParams {
            damping: 0.0,
            ..IterationParams::default()
        },
        IterationParams {
            damping: 1.5,
            ..IterationParams::default()
        },
        IterationParams {
            tolerance: 0.0,
            ..IterationParams::default()
        },
        IterationParams {
            max_iterations: 0,
            ..IterationParams::default()
        },
        IterationParams {
            initial: InitialValuation::Uniform(1.5),
            ..IterationParams::default()
        },
    ];
    for params in bad {
        assert!(matches!(
            iterate_fixed_point(&sys, &params),
            Err(SolverError::InvalidParams(_))
        ));
    }
}
