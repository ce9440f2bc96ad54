//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Every tolerance is pinned here. Exact assertions compare rationals with
//! zero tolerance; the only float comparisons are the Fejér contraction
//! (1e-8) and the discrete-Fourier block cross-check (1e-10).

mod common;

use common::*;
use fockweight::commutant::{
    double_commutant_probe, elementary_growth, extract_coefficients, fejer_left_polynomial,
    reconstruct, sigma_preserves_commutation, solve_windowed_commutant, tails_check,
    vectorize, SigmaCommutationCheck, SolveOptions, TailsVerdict, WindowedProblem,
};
use fockweight::fock::analysis::{
    float_norm, fourier_block_deviation, gauge_check, transport_check, truncated_norm,
    window_max_left,
};
use fockweight::fock::{left_shift, right_shift, FockBasis, SparseOperator};
use fockweight::graph::{Graph, PathTable};
use fockweight::linalg::{rank_of, span_of, SparseVec};
use fockweight::scalar::{rat, rat_int, rat_pow, Rat};
use fockweight::weight::program::parse_weight_program;
use fockweight::weight::{
    check_commuting_square, check_left_cocycle, check_right_cocycle, classify_g_rho,
    ComplexWeightSpec, DivergencePolicy, LeftWeight, PathWeight, PhaseProgram, RightWeight,
};
use num::One;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::Arc;
use std::time::{Duration, Instant};

fn bundled_alphas(horizon: usize) -> Vec<(&'static str, PathWeight)> {
    [TWO_LOOP_GEOMETRIC, TWO_CYCLE_ZIGZAG, TWO_LOOP_REPEAT]
        .iter()
        .map(|name| (*name, alpha_for(&load(name), horizon)))
        .collect()
}

/// Grammar-directed random rule programs; the cocycle identities must hold
/// for the derived weights no matter which rules are drawn.
fn random_program_text(rng: &mut StdRng, graph: &Graph) -> String {
    let edges: Vec<String> = graph
        .edges_lex()
        .iter()
        .map(|&e| graph.edge_id(e).to_string())
        .collect();
    let vertices: Vec<String> = graph
        .vertices()
        .map(|v| graph.vertex_id(v).to_string())
        .collect();
    let consts = ["1/3", "1/2", "2/3", "1", "3/2", "2", "3"];
    let bases = ["1/2", "2", "3/2"];

    let mut text = String::new();
    // a random +-1 walk long enough for horizon 8
    let mut t = vec![0i64];
    for _ in 0..12 {
        let step = if rng.gen_bool(0.5) { 1 } else { -1 };
        t.push(t.last().unwrap() + step);
    }
    let entries: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    text.push_str(&format!("table t = [{}]\n", entries.join(",")));

    let n_rules = rng.gen_range(1..=3);
    for _ in 0..n_rules {
        let n_guards = rng.gen_range(1..=2);
        let mut guards = Vec::new();
        for _ in 0..n_guards {
            let g = match rng.gen_range(0..6) {
                0 => format!("new={}", edges[rng.gen_range(0..edges.len())]),
                1 => format!("trailing={}", edges[rng.gen_range(0..edges.len())]),
                2 => "trailing=none".to_string(),
                3 => "new_eq_trailing".to_string(),
                4 => format!("src={}", vertices[rng.gen_range(0..vertices.len())]),
                _ => {
                    if rng.gen_bool(0.5) {
                        format!("len<{}", rng.gen_range(1..5))
                    } else {
                        let m = rng.gen_range(2..4);
                        format!("len%{}={}", m, rng.gen_range(0..m))
                    }
                }
            };
            guards.push(g);
        }
        let factor = if rng.gen_bool(0.3) {
            format!("pow({}, dtable(t))", bases[rng.gen_range(0..bases.len())])
        } else {
            consts[rng.gen_range(0..consts.len())].to_string()
        };
        text.push_str(&format!("rule {} => {}\n", guards.join(", "), factor));
    }
    text.push_str(&format!(
        "default => {}\n",
        consts[rng.gen_range(0..consts.len())]
    ));
    text
}

#[test]
fn acceptance_01_cocycle_suite() {
    let started = Instant::now();
    let horizon = 8;
    let mut programs: Vec<(String, Arc<Graph>, PathWeight)> = Vec::new();
    for (name, alpha) in bundled_alphas(horizon) {
        let g = alpha.table().graph().clone();
        programs.push((name.to_string(), g, alpha));
    }
    let mut rng = StdRng::seed_from_u64(0xC0FFEE);
    let two_loop = load(TWO_LOOP_GEOMETRIC).graph;
    let two_cycle = load(TWO_CYCLE_ZIGZAG).graph;
    for i in 0..20 {
        let graph = if i % 2 == 0 {
            two_loop.clone()
        } else {
            two_cycle.clone()
        };
        let text = random_program_text(&mut rng, &graph);
        let prog = parse_weight_program(&text, &graph)
            .unwrap_or_else(|e| panic!("generated program must parse: {e}\n{text}"));
        let table = Arc::new(PathTable::enumerate(graph.clone(), horizon));
        let alpha = PathWeight::from_program(table, &prog)
            .unwrap_or_else(|e| panic!("generated program must evaluate: {e}\n{text}"));
        programs.push((format!("random-{i}"), graph, alpha));
    }
    for (name, _, alpha) in &programs {
        let lambda = LeftWeight::Alpha(alpha.clone());
        let rho = RightWeight::Alpha(alpha.clone());
        assert!(
            check_left_cocycle(&lambda, horizon).is_empty(),
            "left cocycle failed for {name}"
        );
        assert!(
            check_right_cocycle(&rho, horizon).is_empty(),
            "right cocycle failed for {name}"
        );
        assert!(
            check_commuting_square(&lambda, &rho, horizon).is_empty(),
            "commuting square failed for {name}"
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(10),
        "cocycle suite took {elapsed:?}"
    );
    println!(
        "acceptance 01: PASS - cocycle + commuting square exact on {} programs, horizon {horizon}, {elapsed:?}",
        programs.len()
    );
}

#[test]
fn acceptance_02_norm_identities() {
    let horizon = 8;
    for (name, alpha) in bundled_alphas(horizon) {
        let basis = FockBasis::new(alpha.table().clone());
        let lambda = LeftWeight::Alpha(alpha.clone());
        let table = basis.table().clone();
        for w in table.paths() {
            if w.len() > 3 {
                break;
            }
            let op = left_shift(&lambda, w, &basis).unwrap();
            let norm = truncated_norm(&op, 0);
            let expected = window_max_left(&lambda, w, &basis);
            assert_eq!(
                norm.exact_value(),
                Some(&expected),
                "norm mismatch at {} in {name}",
                table.graph().path_display(w)
            );
            if name == TWO_LOOP_GEOMETRIC {
                assert!(
                    expected <= Rat::one(),
                    "geometric-weight shifts must be contractions"
                );
            }
        }
    }
    println!("acceptance 02: PASS - shift norms equal exact window maxima (all |w| <= 3, N = 8)");
}

#[test]
fn acceptance_03_commutant_dimensions() {
    let started = Instant::now();
    let opts = SolveOptions::default();

    // two-loop at horizon 4: 31 paths, weighted and unweighted
    let geo = load(TWO_LOOP_GEOMETRIC);
    let rep = load(TWO_LOOP_REPEAT);
    for (name, alpha) in [
        ("unweighted", unweighted_alpha(&geo, 4)),
        ("geometric", alpha_for(&geo, 4)),
        ("repeat", alpha_for(&rep, 4)),
    ] {
        let basis = FockBasis::new(alpha.table().clone());
        let problem =
            WindowedProblem::left_family(&LeftWeight::Alpha(alpha), &basis).unwrap();
        let sol = solve_windowed_commutant(&problem, &opts).unwrap();
        assert_eq!(sol.dim(), 31, "two-loop dimension for {name}");
    }

    // two-cycle at horizon 5 with the zig-zag weight: 12 paths
    let zig = load(TWO_CYCLE_ZIGZAG);
    let alpha = alpha_for(&zig, 5);
    let basis = FockBasis::new(alpha.table().clone());
    let problem = WindowedProblem::left_family(&LeftWeight::Alpha(alpha), &basis).unwrap();
    let sol = solve_windowed_commutant(&problem, &opts).unwrap();
    assert_eq!(sol.dim(), 12, "two-cycle dimension");

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "solves took {elapsed:?}");
    println!("acceptance 03: PASS - windowed commutant dimensions 31/31/31 and 12, {elapsed:?}");
}

/// Restriction of a vectorized matrix to rows of grade < N.
fn restrict_rows(op: &SparseOperator<Rat>, max_row_grade: usize) -> SparseVec {
    let basis = op.basis();
    let d = basis.dim();
    op.entries()
        .filter(|(r, _, _)| basis.grade(*r) <= max_row_grade)
        .map(|(r, c, v)| (r * d + c, v.clone()))
        .collect()
}

#[test]
fn acceptance_04_oracle_equivalence() {
    for (cfg_name, horizon, interior_dim) in [
        (TWO_LOOP_GEOMETRIC, 4usize, 15usize),
        (TWO_CYCLE_ZIGZAG, 5, 10),
    ] {
        let cfg = load(cfg_name);
        let alpha = alpha_for(&cfg, horizon);
        let basis = FockBasis::new(alpha.table().clone());
        let lambda = LeftWeight::Alpha(alpha.clone());
        let rho = RightWeight::Alpha(alpha.clone());

        // brute-force nullspace of the windowed constraints
        let problem = WindowedProblem::left_family(&lambda, &basis).unwrap();
        let brute = solve_windowed_commutant(&problem, &SolveOptions::default()).unwrap();

        // structured side: one-term series operators over every table path
        let table = basis.table().clone();
        let structured: Vec<SparseOperator<Rat>> = (0..table.len())
            .map(|ix| {
                let f = fockweight::fock::CoefficientFunction::indicator(
                    basis.clone(),
                    ix,
                    Rat::one(),
                );
                reconstruct(&f, &rho, &basis)
            })
            .collect();

        let max_grade = horizon - 1;
        let brute_rows: Vec<SparseVec> = brute
            .elements
            .iter()
            .map(|x| restrict_rows(x, max_grade))
            .collect();
        let structured_rows: Vec<SparseVec> = structured
            .iter()
            .map(|x| restrict_rows(x, max_grade))
            .collect();
        let rank_brute = rank_of(brute_rows.clone());
        let rank_structured = rank_of(structured_rows.clone());
        let rank_union = rank_of(brute_rows.into_iter().chain(structured_rows));
        assert_eq!(rank_brute, interior_dim, "brute rank in {cfg_name}");
        assert_eq!(rank_structured, interior_dim, "structured rank in {cfg_name}");
        assert_eq!(rank_union, interior_dim, "subspaces differ in {cfg_name}");
    }
    println!("acceptance 04: PASS - structured and brute-force solvers agree on interior rows");
}

#[test]
fn acceptance_05_growth_witnesses() {
    let geo = load(TWO_LOOP_GEOMETRIC);
    let alpha = alpha_for(&geo, 8);
    let rho = RightWeight::Alpha(alpha);
    let f = geo.graph.parse_path("f").unwrap();
    let growth = elementary_growth(&f, &rho, 8);
    assert_eq!(growth.len(), 8);
    for (n, val) in &growth {
        assert_eq!(
            val,
            &rat_pow(&rat_int(2), *n as i64 - 1),
            "expected doubling at horizon {n}"
        );
    }

    let rep = load(TWO_LOOP_REPEAT);
    let alpha = alpha_for(&rep, 8);
    let rho = RightWeight::Alpha(alpha);
    let e = rep.graph.parse_path("e").unwrap();
    let growth = elementary_growth(&e, &rho, 8);
    for win in growth.windows(2).skip(1) {
        let ratio = &win[1].1 / &win[0].1;
        assert!(
            ratio >= rat_int(2),
            "ratio {} at horizon {} should be >= 2",
            ratio,
            win[1].0
        );
    }
    println!("acceptance 05: PASS - growth witnesses (1,2,4,...,2^7) and ratios >= 2");
}

#[test]
fn acceptance_06_cycle_counterexample() {
    let started = Instant::now();
    let cfg = load(TWO_CYCLE_ZIGZAG);
    let alpha = alpha_for(&cfg, 9);
    let basis = FockBasis::new(alpha.table().clone());

    let outcome = fockweight::commutant::cycle_projection_checks(&alpha, &basis).unwrap();
    assert!(outcome.commutes_with_even_shifts);
    assert!(outcome.functional_kills_left_monomials);
    assert!(outcome.functional_on_projection_is_one);
    assert!(outcome.odd_shift_breaks_commutation);

    let shifts = vec![
        cfg.graph.parse_path("ef").unwrap(),
        cfg.graph.parse_path("fe").unwrap(),
    ];
    let probe =
        double_commutant_probe(&alpha, &basis, &shifts, &SolveOptions::default()).unwrap();
    assert!(probe.report.left_span_contained);
    assert!(probe.report.gap >= 1, "gap = {}", probe.report.gap);
    assert_eq!(probe.report.interior, 7);

    // the projection witnesses the gap: inside the probe span, outside the
    // left-shift span
    let p_compressed = outcome.projection.compress(probe.report.interior);
    assert!(probe.compressed_span.contains(vectorize(&p_compressed)));
    let lambda = LeftWeight::Alpha(alpha.clone());
    let left_span = span_of(
        probe
            .interior_basis
            .table()
            .paths()
            .iter()
            .map(|w| vectorize(&left_shift(&lambda, w, &probe.interior_basis).unwrap())),
    );
    assert!(!left_span.contains(vectorize(&p_compressed)));

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60));
    println!(
        "acceptance 06: PASS - projection separates the probe from the left span (gap {}), {elapsed:?}",
        probe.report.gap
    );
}

#[test]
fn acceptance_07_collapse_to_full_algebra() {
    let cfg = load(TWO_LOOP_REPEAT);

    // every non-vertex path of length <= 3 is flagged divergent
    let alpha = alpha_for(&cfg, 8);
    let rho = RightWeight::Alpha(alpha.clone());
    let class = classify_g_rho(&rho, 3, 8, &DivergencePolicy::default());
    let table = alpha.table();
    for &ix in &class.divergent {
        assert!(!table.path(ix).is_vertex());
    }
    assert_eq!(class.bounded.len(), 1, "only the vertex stays bounded");
    assert!(table.path(class.bounded[0]).is_vertex());
    assert_eq!(class.divergent.len(), table.count_upto(3) - 1);

    // vertex-only probe: the full matrix algebra on the interior window
    let alpha4 = alpha_for(&cfg, 4);
    let basis = FockBasis::new(alpha4.table().clone());
    let probe = double_commutant_probe(&alpha4, &basis, &[], &SolveOptions::default()).unwrap();
    assert_eq!(probe.report.interior, 4);
    assert_eq!(probe.report.probe_compressed_dim, 31 * 31);
    assert_eq!(probe.report.left_span_dim, 31);
    assert_eq!(probe.report.gap, 31 * 31 - 31);
    println!("acceptance 07: PASS - bounded class collapses; probe spans all 31x31 matrices");
}

#[test]
fn acceptance_08_tails_checker() {
    // geometric tail weight: holds, witness `e` for every path
    let geo = load(TWO_LOOP_GEOMETRIC);
    let alpha = alpha_for(&geo, 8);
    let table = alpha.table().clone();
    let rho = RightWeight::Alpha(alpha);
    let class = classify_g_rho(&rho, 6, 8, &DivergencePolicy::default());
    let report = tails_check(&class, &table, 3).unwrap();
    assert_eq!(report.verdict, TailsVerdict::HoldsOnHorizon);
    let e_ix = table.index_of(&geo.graph.parse_path("e").unwrap()).unwrap();
    for (_, w) in &report.witnesses {
        assert_eq!(*w, Some(e_ix));
    }

    // zig-zag: fails, and exactly the odd-length paths are unwitnessed
    let zig = load(TWO_CYCLE_ZIGZAG);
    let alpha = alpha_for(&zig, 18);
    let table = alpha.table().clone();
    let rho = RightWeight::Alpha(alpha);
    let class = classify_g_rho(&rho, 6, 18, &DivergencePolicy::default());
    let report = tails_check(&class, &table, 3).unwrap();
    assert_eq!(report.verdict, TailsVerdict::FailsOnHorizon);
    for (vix, w) in &report.witnesses {
        let odd = table.path(*vix).len() % 2 == 1;
        assert_eq!(w.is_none(), odd, "path {}", table.display(*vix));
    }

    // repeat weight: fails (bounded class is the vertex alone)
    let rep = load(TWO_LOOP_REPEAT);
    let alpha = alpha_for(&rep, 10);
    let table = alpha.table().clone();
    let rho = RightWeight::Alpha(alpha);
    let class = classify_g_rho(&rho, 4, 10, &DivergencePolicy::default());
    let report = tails_check(&class, &table, 2).unwrap();
    assert_eq!(report.verdict, TailsVerdict::FailsOnHorizon);
    for (vix, w) in &report.witnesses {
        assert_eq!(w.is_some(), table.path(*vix).is_vertex());
    }
    println!("acceptance 08: PASS - tail verdicts holds/fails/fails with the expected witnesses");
}

fn random_operator(rng: &mut StdRng, basis: &Arc<FockBasis>) -> SparseOperator<Rat> {
    let d = basis.dim();
    let mut op = SparseOperator::zero(basis.clone());
    for r in 0..d {
        for c in 0..d {
            if rng.gen_bool(0.25) {
                let num = rng.gen_range(-6i64..=6);
                let den = rng.gen_range(1i64..=4);
                if num != 0 {
                    op.insert(r, c, rat(num, den));
                }
            }
        }
    }
    op
}

#[test]
fn acceptance_09_cesaro_fejer_suite() {
    let started = Instant::now();
    let geo = load(TWO_LOOP_GEOMETRIC);
    let basis = basis_for(&geo, 3); // 15-dimensional window
    let mut rng = StdRng::seed_from_u64(0xFE57);

    // Fejér contraction in float, 50 random matrices, tolerance 1e-8
    for _ in 0..50 {
        let x = random_operator(&mut rng, &basis);
        let nx = float_norm(&x, 1);
        for k in [1usize, 2, 3, 5, 8] {
            let ns = float_norm(&x.cesaro_sum(k), 1);
            assert!(ns <= nx + 1e-8, "contraction failed: {ns} > {nx}");
        }
    }

    // discrete-Fourier cross-check of the grade blocks, tolerance 1e-10
    for _ in 0..5 {
        let x = random_operator(&mut rng, &basis);
        for j in -3i64..=3 {
            assert!(fourier_block_deviation(&x, j) < 1e-10);
        }
    }

    // block-commutation preservation, exact, on the zig-zag probe basis
    let zig = load(TWO_CYCLE_ZIGZAG);
    let alpha = alpha_for(&zig, 9);
    let zbasis = FockBasis::new(alpha.table().clone());
    let shifts = vec![
        zig.graph.parse_path("ef").unwrap(),
        zig.graph.parse_path("fe").unwrap(),
    ];
    let probe =
        double_commutant_probe(&alpha, &zbasis, &shifts, &SolveOptions::default()).unwrap();
    let rho = RightWeight::Alpha(alpha.clone());
    let mut gens = Vec::new();
    for v in zig.graph.vertices() {
        gens.push((
            right_shift(&rho, &fockweight::graph::Path::vertex(v), &zbasis).unwrap(),
            0usize,
        ));
    }
    for u in &shifts {
        gens.push((right_shift(&rho, u, &zbasis).unwrap(), u.len()));
    }
    for x in &probe.solutions.elements {
        for (gen, shift) in &gens {
            assert_eq!(
                sigma_preserves_commutation(x, gen, *shift, 3),
                SigmaCommutationCheck::Preserved
            );
        }
    }

    // Fejér sum equals the vacuum polynomial on the interior window, exact
    let n = 5;
    let alpha = unweighted_alpha(&geo, n);
    let ubasis = FockBasis::new(alpha.table().clone());
    let e = geo.graph.parse_path("e").unwrap();
    let f = geo.graph.parse_path("f").unwrap();
    let probe = double_commutant_probe(
        &alpha,
        &ubasis,
        &[e.clone(), f.clone()],
        &SolveOptions::default(),
    )
    .unwrap();
    let lambda = LeftWeight::Alpha(alpha.clone());
    let interior = n - 1;
    let mut combo = SparseOperator::zero(ubasis.clone());
    for (i, t) in probe.solutions.elements.iter().enumerate() {
        for k in 1..=n {
            let sigma = t.cesaro_sum(k).compress(interior);
            let pk = fejer_left_polynomial(t, &lambda, k, &ubasis)
                .unwrap()
                .compress(interior);
            assert_eq!(sigma, pk, "interior identity failed at k={k}");
        }
        combo = combo.add(&t.scale(&rat(1 + i as i64, 3)));
    }
    for k in 1..=n {
        let sigma = combo.cesaro_sum(k).compress(interior);
        let pk = fejer_left_polynomial(&combo, &lambda, k, &ubasis)
            .unwrap()
            .compress(interior);
        assert_eq!(sigma, pk);
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "suite took {elapsed:?}");
    println!("acceptance 09: PASS - contraction, Fourier cross-check, block commutation, vacuum polynomial, {elapsed:?}");
}

#[test]
fn acceptance_10_transport_and_gauge() {
    for name in [TWO_LOOP_GEOMETRIC, TWO_CYCLE_ZIGZAG, TWO_LOOP_REPEAT] {
        let cfg = load(name);
        let alpha = alpha_for(&cfg, 6);
        let basis = FockBasis::new(alpha.table().clone());
        let violations = transport_check(&alpha, &basis, 2);
        assert!(violations.is_empty(), "transport violations in {name}");

        let phases = cfg.phases.clone().unwrap_or_else(PhaseProgram::trivial);
        let spec = ComplexWeightSpec::new(alpha, &phases).unwrap();
        let violations = gauge_check(&spec, &basis, 2);
        assert!(violations.is_empty(), "gauge violations in {name}");
    }
    println!("acceptance 10: PASS - transport and gauge identities exact on all bundled scenarios");
}

#[test]
fn acceptance_extra_solution_coefficients_are_consistent() {
    // extraction agrees with the series structure on every brute solution
    let cfg = load(TWO_LOOP_GEOMETRIC);
    let alpha = alpha_for(&cfg, 4);
    let basis = FockBasis::new(alpha.table().clone());
    let lambda = LeftWeight::Alpha(alpha.clone());
    let rho = RightWeight::Alpha(alpha.clone());
    let problem = WindowedProblem::left_family(&lambda, &basis).unwrap();
    let sol = solve_windowed_commutant(&problem, &SolveOptions::default()).unwrap();
    let interior_rows = basis.table().count_upto(3);
    for x in &sol.elements {
        let f = extract_coefficients(x, &rho);
        let rebuilt = reconstruct(&f, &rho, &basis);
        for r in 0..interior_rows {
            for c in 0..basis.dim() {
                assert!(x.entry(r, c) == rebuilt.entry(r, c));
            }
        }
    }
    assert!(!sol.elements.is_empty());
    let zero = sol.elements[0].sub(&sol.elements[0]);
    assert!(zero.is_zero_op());
    println!("acceptance extra: PASS - coefficient extraction round-trips on the solution basis");
}
