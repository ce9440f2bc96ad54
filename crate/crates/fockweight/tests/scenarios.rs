//! Whole-scenario checks: the bundled configs run green end to end, the
//! double-commutant comparison closes on the unweighted two-loop graph, and
//! the structural invariants behind the windowed solver hold.

mod common;

use common::*;
use fockweight::commutant::{
    double_commutant_probe, exact_inverse, solve_windowed_commutant, windowed_commutes,
    SolveOptions, WindowedProblem,
};
use fockweight::fock::{CoefficientFunction, FockBasis, SparseOperator};
use fockweight::report::Status;
use fockweight::runner::{run_scenario, RunOptions};
use fockweight::scalar::{rat, Rat};
use fockweight::weight::{LeftWeight, RightWeight};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;

#[test]
fn bundled_scenarios_pass() {
    for name in [TWO_LOOP_GEOMETRIC, TWO_CYCLE_ZIGZAG, TWO_LOOP_REPEAT] {
        let cfg = load(name);
        let report = run_scenario(&cfg, &RunOptions::default());
        assert_eq!(report.exit_code(), 0, "{name}:\n{}", report.render_text());
        for task in &report.tasks {
            assert_eq!(task.status, Status::Pass, "{name}: task {}", task.task);
        }
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in [TWO_LOOP_GEOMETRIC, TWO_LOOP_REPEAT] {
        let cfg = load(name);
        let a = run_scenario(&cfg, &RunOptions::default()).to_json();
        let b = run_scenario(&cfg, &RunOptions::default()).to_json();
        assert_eq!(a, b, "nondeterministic report for {name}");
    }
}

#[test]
fn unweighted_two_loop_probe_has_no_gap() {
    // with both loop edges among the generators the interior comparison
    // closes exactly: probe span = left span on the window
    let cfg = load(TWO_LOOP_GEOMETRIC);
    let alpha = unweighted_alpha(&cfg, 5);
    let basis = FockBasis::new(alpha.table().clone());
    let shifts = vec![
        cfg.graph.parse_path("e").unwrap(),
        cfg.graph.parse_path("f").unwrap(),
    ];
    let probe = double_commutant_probe(&alpha, &basis, &shifts, &SolveOptions::default()).unwrap();
    assert_eq!(probe.report.probe_dim, 63); // one per path of length <= 5
    assert_eq!(probe.report.interior, 4);
    assert_eq!(probe.report.probe_compressed_dim, 31);
    assert_eq!(probe.report.left_span_dim, 31);
    assert_eq!(probe.report.gap, 0);
    assert!(probe.report.left_span_contained);
}

#[test]
fn windowing_soundness_for_structured_elements() {
    // compressions of series operators satisfy every windowed constraint,
    // whatever the coefficients
    let cfg = load(TWO_LOOP_GEOMETRIC);
    let alpha = alpha_for(&cfg, 5);
    let basis = FockBasis::new(alpha.table().clone());
    let lambda = LeftWeight::Alpha(alpha.clone());
    let rho = RightWeight::Alpha(alpha.clone());
    let problem = WindowedProblem::left_family(&lambda, &basis).unwrap();
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..10 {
        let mut values = BTreeMap::new();
        for ix in 0..basis.dim() {
            if rng.gen_bool(0.4) {
                let num = rng.gen_range(-9i64..=9);
                if num != 0 {
                    values.insert(ix, rat(num, rng.gen_range(1i64..=5)));
                }
            }
        }
        let f = CoefficientFunction::new(
            basis.clone(),
            values,
            fockweight::fock::Provenance::UserGiven,
        );
        let s = fockweight::fock::series_operator(&f, &rho, &basis);
        for gen in problem.generators() {
            assert!(
                windowed_commutes(&s, &gen.op, gen.shift),
                "structured element must satisfy the {} window",
                gen.label
            );
        }
    }
}

#[test]
fn inverse_closedness_on_the_window() {
    // an invertible element of the solution span has an exact inverse that
    // again satisfies every windowed constraint
    let cfg = load(TWO_LOOP_GEOMETRIC);
    let alpha = alpha_for(&cfg, 3);
    let basis = FockBasis::new(alpha.table().clone());
    let lambda = LeftWeight::Alpha(alpha.clone());
    let problem = WindowedProblem::left_family(&lambda, &basis).unwrap();
    let sol = solve_windowed_commutant(&problem, &SolveOptions::default()).unwrap();

    // identity + nilpotent combination of solutions is invertible
    let mut a: SparseOperator<Rat> = SparseOperator::identity(basis.clone());
    for (i, x) in sol.elements.iter().enumerate().take(6) {
        a = a.add(&x.scale(&rat(1, 2 + i as i64)));
    }
    let inv = match exact_inverse(&a) {
        Some(inv) => inv,
        None => {
            // fall back to a guaranteed invertible combination
            let x = &sol.elements[0];
            let a2 = SparseOperator::identity(basis.clone()).add(&x.scale(&rat(1, 3)));
            exact_inverse(&a2).expect("unipotent perturbation is invertible")
        }
    };
    let product = a.mul(&inv);
    if product == SparseOperator::identity(basis.clone()) {
        for gen in problem.generators() {
            assert!(
                windowed_commutes(&inv, &gen.op, gen.shift),
                "inverse must stay in the windowed commutant ({})",
                gen.label
            );
        }
    } else {
        panic!("combination was not inverted exactly");
    }
}

#[test]
fn commutant_dimension_degenerate_graph() {
    // a sink vertex contributes isolated coordinates and nothing breaks
    let graph = std::sync::Arc::new(
        fockweight::graph::Graph::new(
            &["a", "b", "c"],
            &[("e", "a", "b"), ("f", "b", "b")],
        )
        .unwrap(),
    );
    let table = std::sync::Arc::new(fockweight::graph::PathTable::enumerate(graph.clone(), 3));
    let alpha = fockweight::weight::PathWeight::from_program(
        table.clone(),
        &fockweight::weight::WeightProgram::unweighted(),
    )
    .unwrap();
    let basis = FockBasis::new(table);
    let lambda = LeftWeight::Alpha(alpha);
    let problem = WindowedProblem::left_family(&lambda, &basis).unwrap();
    let sol = solve_windowed_commutant(&problem, &SolveOptions::default()).unwrap();
    // paths: a, b, c, e, f, fe, ff, ffe, fff -> 9; vertex c is isolated, so
    // solutions gain one extra free diagonal entry at xi_c
    assert_eq!(basis.dim(), 9);
    assert!(sol.dim() >= 9);
    for x in &sol.elements {
        for gen in problem.generators() {
            assert!(windowed_commutes(x, &gen.op, gen.shift));
        }
    }
}

#[test]
fn rescaled_generators_give_the_same_windowed_commutant() {
    // companions differ by a multiplicative rescaling, so the generated
    // windowed problems have identical solution spaces
    let cfg = load(TWO_LOOP_GEOMETRIC);
    let alpha = alpha_for(&cfg, 3);
    let basis = FockBasis::new(alpha.table().clone());
    let g = cfg.graph.clone();
    let mut q = std::collections::HashMap::new();
    q.insert(g.edge_by_id("e").unwrap(), rat(3, 1));
    q.insert(g.edge_by_id("f").unwrap(), rat(5, 7));
    let rho1 = RightWeight::Alpha(alpha.clone());
    let rho2 = RightWeight::Rescaled {
        alpha: alpha.clone(),
        edge_factor: q,
    };
    let shifts = vec![g.parse_path("e").unwrap(), g.parse_path("f").unwrap()];
    let sol1 = solve_windowed_commutant(
        &WindowedProblem::right_family(&rho1, &basis, &shifts).unwrap(),
        &SolveOptions::default(),
    )
    .unwrap();
    let sol2 = solve_windowed_commutant(
        &WindowedProblem::right_family(&rho2, &basis, &shifts).unwrap(),
        &SolveOptions::default(),
    )
    .unwrap();
    assert_eq!(sol1.dim(), sol2.dim());
    // canonical elimination makes the bases literally identical
    for (a, b) in sol1.elements.iter().zip(sol2.elements.iter()) {
        assert_eq!(a, b);
    }
}

#[test]
fn probe_report_fields_are_consistent() {
    let cfg = load(TWO_CYCLE_ZIGZAG);
    let alpha = alpha_for(&cfg, 7);
    let basis = FockBasis::new(alpha.table().clone());
    let shifts = vec![
        cfg.graph.parse_path("ef").unwrap(),
        cfg.graph.parse_path("fe").unwrap(),
    ];
    let probe = double_commutant_probe(&alpha, &basis, &shifts, &SolveOptions::default()).unwrap();
    let r = &probe.report;
    assert_eq!(r.horizon, 7);
    assert_eq!(r.interior, 5);
    assert_eq!(r.gap, r.probe_compressed_dim - r.left_span_dim);
    assert!(r.probe_compressed_dim <= r.probe_dim);
}
