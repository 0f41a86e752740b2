//! Behavioral contracts of the multistart solver: determinism, start
//! prefix stability, monotonicity in the start budget, the exact
//! ordering of optima along the local-randomness subset lattice, and the
//! shifted-equality window of the Cabello no-principle column.

use nsbound_core::{
    build_problem, case_lr, lr_equalities, maximize, run_suite, sample_starts, tol, Argument,
    Principle, SolverConfig, CASE_ORDER,
};

fn cfg(starts: usize) -> SolverConfig {
    SolverConfig { starts, ..SolverConfig::default() }
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let problem = || build_problem(Argument::Hna, Principle::Lo, &case_lr(13));
    let a = maximize(&problem(), &cfg(2)).unwrap();
    let b = maximize(&problem(), &cfg(2)).unwrap();
    assert_eq!(a, b, "same seed and config must reproduce the identical result");
}

#[test]
fn start_samples_are_prefix_stable() {
    let argument = Argument::Cna;
    let mut eqs = vec![(vec![1.0; argument.dim()], 1.0)];
    eqs.extend(lr_equalities(argument, &case_lr(3)));
    let four = sample_starts(argument.dim(), &eqs, 4, 7).unwrap();
    let eight = sample_starts(argument.dim(), &eqs, 8, 7).unwrap();
    assert_eq!(four[..], eight[..4], "a larger budget must extend, not reshuffle, the starts");
    for s in &eight {
        let total: f64 = s.iter().sum();
        assert!((total - 1.0).abs() <= 1e-8);
        assert!(s.iter().all(|&x| x >= -tol::SIMPLEX_NEG));
    }
}

#[test]
fn more_starts_never_lose_value() {
    // A cell with several basins, so the contract is exercised rather
    // than trivially satisfied.
    let problem = || build_problem(Argument::Cna, Principle::Lo, &case_lr(3));
    let one = maximize(&problem(), &cfg(1)).unwrap();
    let four = maximize(&problem(), &cfg(4)).unwrap();
    assert!(
        four.best_value >= one.best_value - 1e-12,
        "4 starts ({}) must not fall below 1 start ({})",
        four.best_value,
        one.best_value
    );
}

/// The strict positivity floor on the Cabello cross term shifts each
/// no-principle optimum below 1/2 by a small case-dependent multiple of
/// the floor; every case must land in that window.
#[test]
fn cabello_ns_column_sits_in_the_shifted_window() {
    let rows = run_suite(Argument::Cna, &[Principle::Ns], &(1..=16).collect::<Vec<_>>(), &cfg(2));
    for row in rows {
        assert!(row.feasible, "case {} must be feasible", row.case_index);
        assert!(
            row.value <= 0.5 + 1e-9,
            "case {}: value {} exceeds the polytope bound",
            row.case_index,
            row.value
        );
        assert!(
            row.value >= 0.5 - 3.0 * tol::EPS_Q,
            "case {}: value {} fell below the shifted window",
            row.case_index,
            row.value
        );
    }
}

/// Optima are antitone along the subset lattice of local-randomness
/// selections: adding marginal constraints can only shrink the feasible
/// set. Checked on the two cheap principles whose columns vary by case.
#[test]
fn optima_are_antitone_in_the_lr_lattice() {
    let cases: Vec<usize> = (1..=16).collect();
    for (argument, principle) in
        [(Argument::Hna, Principle::Ns), (Argument::Hna, Principle::Lo), (Argument::Cna, Principle::Lo)]
    {
        let rows = run_suite(argument, &[principle], &cases, &cfg(2));
        for a in &rows {
            for b in &rows {
                let sa = CASE_ORDER[a.case_index - 1];
                let sb = CASE_ORDER[b.case_index - 1];
                if sa.is_subset_of(&sb) {
                    // b imposes every constraint of a, so its optimum
                    // cannot exceed a's.
                    assert!(
                        b.value <= a.value + 1e-6,
                        "{argument:?} {principle:?}: case {} ({}) above its superset case {} ({})",
                        b.case_index,
                        b.value,
                        a.case_index,
                        a.value
                    );
                }
            }
        }
    }
}
