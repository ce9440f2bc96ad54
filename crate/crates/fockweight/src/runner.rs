//! Executes scenario tasks in order and collects a deterministic report.

use crate::commutant::{
    cycle_projection_checks, double_commutant_probe, solve_windowed_commutant, tails_check,
    SolveError, SolveOptions, TailsVerdict, WindowedProblem,
};
use crate::config::{BoundExpect, ScenarioConfig, TailsExpect, Task};
use crate::fock::analysis::{gauge_check, transport_check, MatrixViolation};
use crate::fock::FockBasis;
use crate::graph::{Path, PathTable};
use crate::report::{Report, Status, TaskReport};
use crate::scalar::format_rat;
use crate::weight::{
    canonical_companion, check_commuting_square, check_left_cocycle, check_right_cocycle,
    classify_g_rho, empirical_bound_left, empirical_bound_right, BoundVerdict, ComplexWeightSpec,
    DivergencePolicy, IdentityViolation, LeftWeight, PathWeight, PhaseProgram, RightWeight, Side,
};
use serde_json::{json, Value};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub max_dim: usize,
    pub with_timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            max_dim: SolveOptions::default().max_dim,
            with_timings: false,
        }
    }
}

/// Runs every task of the scenario; per-task errors are embedded in the
/// report rather than aborting the batch.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Report {
    let mut report = Report::new(&cfg.source);
    for task in &cfg.tasks {
        let started = Instant::now();
        let (params, outcome) = run_task(cfg, task, opts);
        let elapsed = started.elapsed().as_millis();
        let (status, details) = match outcome {
            Ok((status, details)) => (status, details),
            Err(err) => (Status::Error, error_details(&err)),
        };
        report.push(TaskReport {
            task: task.name().to_string(),
            params,
            status,
            details,
            elapsed_ms: opts.with_timings.then_some(elapsed),
        });
    }
    report
}

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error(transparent)]
    Weight(#[from] crate::weight::WeightError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Fock(#[from] crate::fock::FockError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

fn error_details(err: &TaskError) -> Value {
    let resource_cap = matches!(err, TaskError::Solve(SolveError::DimensionCap { .. }));
    let mut details = json!({ "error": err.to_string() });
    if resource_cap {
        details["resource_cap"] = json!(true);
    }
    details
}

type TaskOutcome = Result<(Status, Value), TaskError>;

fn run_task(cfg: &ScenarioConfig, task: &Task, opts: &RunOptions) -> (Value, TaskOutcome) {
    match task {
        Task::CheckCocycle { horizon } => (
            json!({ "horizon": horizon }),
            task_check_cocycle(cfg, *horizon),
        ),
        Task::Companion { horizon } => (json!({ "horizon": horizon }), task_companion(cfg, *horizon)),
        Task::Bounds {
            side,
            path,
            horizon,
            expect,
        } => (
            json!({ "side": side, "path": path, "horizon": horizon }),
            task_bounds(cfg, *side, path, *horizon, *expect),
        ),
        Task::Classify {
            cap,
            horizon,
            expect_bounded,
        } => (
            json!({ "cap": cap, "horizon": horizon }),
            task_classify(cfg, *cap, *horizon, expect_bounded.as_deref()),
        ),
        Task::Commutant {
            horizon,
            expect_dim,
        } => (
            json!({ "horizon": horizon }),
            task_commutant(cfg, *horizon, *expect_dim, opts),
        ),
        Task::DoubleCommutant {
            gens,
            cap,
            classify_horizon,
            horizon,
            min_gap,
            expect_gap,
        } => (
            json!({ "horizon": horizon, "gens": gens, "cap": cap }),
            task_double_commutant(
                cfg,
                gens.as_deref(),
                *cap,
                *classify_horizon,
                *horizon,
                *min_gap,
                *expect_gap,
                opts,
            ),
        ),
        Task::Tails {
            cap,
            horizon,
            expect,
        } => (
            json!({ "cap": cap, "horizon": horizon }),
            task_tails(cfg, *cap, *horizon, *expect),
        ),
        Task::CycleProjection { horizon } => (
            json!({ "horizon": horizon }),
            task_cycle_projection(cfg, *horizon),
        ),
        Task::Transport { horizon, max_len } => (
            json!({ "horizon": horizon, "max_len": max_len }),
            task_transport(cfg, *horizon, *max_len),
        ),
        Task::Gauge { horizon, max_len } => (
            json!({ "horizon": horizon, "max_len": max_len }),
            task_gauge(cfg, *horizon, *max_len),
        ),
    }
}

fn alpha_at(cfg: &ScenarioConfig, horizon: usize) -> Result<PathWeight, TaskError> {
    let table = Arc::new(PathTable::enumerate(cfg.graph.clone(), horizon));
    Ok(PathWeight::from_program(table, &cfg.weight)?)
}

fn violations_json(table: &PathTable, violations: &[IdentityViolation]) -> Value {
    let g = table.graph();
    let rows: Vec<Value> = violations
        .iter()
        .take(5)
        .map(|v| {
            json!({
                "parts": v.parts.iter().map(|p| g.path_display(p)).collect::<Vec<_>>(),
                "lhs": format_rat(&v.lhs),
                "rhs": format_rat(&v.rhs),
            })
        })
        .collect();
    json!({ "count": violations.len(), "first": rows })
}

fn task_check_cocycle(cfg: &ScenarioConfig, horizon: usize) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let lambda = LeftWeight::Alpha(alpha.clone());
    let rho = RightWeight::Alpha(alpha.clone());
    let left = check_left_cocycle(&lambda, horizon);
    let right = check_right_cocycle(&rho, horizon);
    let square = check_commuting_square(&lambda, &rho, horizon);
    let ok = left.is_empty() && right.is_empty() && square.is_empty();
    let table = alpha.table();
    let details = json!({
        "left": violations_json(table, &left),
        "right": violations_json(table, &right),
        "commuting_square": violations_json(table, &square),
    });
    Ok((if ok { Status::Pass } else { Status::Fail }, details))
}

fn task_companion(cfg: &ScenarioConfig, horizon: usize) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let lambda = LeftWeight::Alpha(alpha.clone());
    let rho = canonical_companion(&lambda)?;
    let g = cfg.graph.clone();
    let mut edge_mismatch = Vec::new();
    for &e in g.edges_lex() {
        let p = g.path_from_edges(vec![e]).unwrap();
        let r = Path::vertex(g.path_range(&p));
        let s = Path::vertex(g.path_source(&p));
        let lhs = rho.value(&r, &p);
        let rhs = lambda.value(&s, &p);
        if lhs != rhs {
            edge_mismatch.push(json!({
                "edge": g.edge_id(e),
                "rho": format_rat(&lhs),
                "lambda": format_rat(&rhs),
            }));
        }
    }
    let square = check_commuting_square(&lambda, &rho, horizon);
    let ok = edge_mismatch.is_empty() && square.is_empty();
    let details = json!({
        "edge_mismatches": edge_mismatch,
        "commuting_square": violations_json(alpha.table(), &square),
    });
    Ok((if ok { Status::Pass } else { Status::Fail }, details))
}

fn verdict_json(v: BoundVerdict) -> &'static str {
    match v {
        BoundVerdict::BoundedCertified => "bounded_certified",
        BoundVerdict::BoundedEmpirical => "bounded_empirical",
        BoundVerdict::DivergentEmpirical => "divergent_empirical",
    }
}

fn task_bounds(
    cfg: &ScenarioConfig,
    side: Side,
    path: &str,
    horizon: usize,
    expect: Option<BoundExpect>,
) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let target = cfg.graph.parse_path(path)?;
    let policy = DivergencePolicy::default();
    let report = match side {
        Side::Left => empirical_bound_left(&LeftWeight::Alpha(alpha.clone()), &target, horizon, &policy),
        Side::Right => {
            empirical_bound_right(&RightWeight::Alpha(alpha.clone()), &target, horizon, &policy)
        }
    };
    let status = match expect {
        None => Status::Info,
        Some(BoundExpect::Certified) => {
            if report.verdict == BoundVerdict::BoundedCertified {
                Status::Pass
            } else {
                Status::Fail
            }
        }
        Some(BoundExpect::Bounded) => {
            if report.verdict.is_bounded() {
                Status::Pass
            } else {
                Status::Fail
            }
        }
        Some(BoundExpect::Divergent) => {
            if report.verdict == BoundVerdict::DivergentEmpirical {
                Status::Pass
            } else {
                Status::Fail
            }
        }
    };
    let details = json!({
        "verdict": verdict_json(report.verdict),
        "empirical_sup": format_rat(&report.empirical_sup),
        "per_length_max": report
            .per_length_max
            .iter()
            .map(|(l, m)| json!([l, format_rat(m)]))
            .collect::<Vec<_>>(),
        "note": report.note,
    });
    Ok((status, details))
}

fn task_classify(
    cfg: &ScenarioConfig,
    cap: usize,
    horizon: usize,
    expect_bounded: Option<&[String]>,
) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let rho = RightWeight::Alpha(alpha.clone());
    let class = classify_g_rho(&rho, cap, horizon, &DivergencePolicy::default());
    let table = alpha.table();
    let bounded: Vec<String> = class.bounded.iter().map(|&i| table.display(i)).collect();
    let divergent: Vec<String> = class.divergent.iter().map(|&i| table.display(i)).collect();
    let mut status = Status::Info;
    let mut mismatch = Value::Null;
    if let Some(expected) = expect_bounded {
        let mut want: Vec<String> = Vec::new();
        for p in expected {
            let parsed = cfg.graph.parse_path(p)?;
            want.push(cfg.graph.path_display(&parsed));
        }
        let mut got = bounded.clone();
        let mut want_sorted = want.clone();
        got.sort();
        want_sorted.sort();
        if got == want_sorted {
            status = Status::Pass;
        } else {
            status = Status::Fail;
            mismatch = json!({ "expected": want, "actual": bounded });
        }
    }
    let details = json!({
        "bounded": bounded,
        "divergent": divergent,
        "closure_violations": class.closure_violations.len(),
        "mismatch": mismatch,
    });
    Ok((status, details))
}

fn task_commutant(
    cfg: &ScenarioConfig,
    horizon: usize,
    expect_dim: Option<usize>,
    opts: &RunOptions,
) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let basis = FockBasis::new(alpha.table().clone());
    let lambda = LeftWeight::Alpha(alpha.clone());
    let problem = WindowedProblem::left_family(&lambda, &basis)?;
    let solve_opts = SolveOptions {
        max_dim: opts.max_dim,
    };
    let sol = solve_windowed_commutant(&problem, &solve_opts)?;
    let path_count = basis.dim();
    let status = match expect_dim {
        None => Status::Info,
        Some(d) if d == sol.dim() => Status::Pass,
        Some(_) => Status::Fail,
    };
    let details = json!({
        "dimension": sol.dim(),
        "path_count": path_count,
        "expected": expect_dim,
    });
    Ok((status, details))
}

#[allow(clippy::too_many_arguments)]
fn task_double_commutant(
    cfg: &ScenarioConfig,
    gens: Option<&[String]>,
    cap: Option<usize>,
    classify_horizon: Option<usize>,
    horizon: usize,
    min_gap: Option<usize>,
    expect_gap: Option<usize>,
    opts: &RunOptions,
) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let basis = FockBasis::new(alpha.table().clone());
    let shifts: Vec<Path> = match gens {
        Some(list) => {
            let mut out = Vec::new();
            for s in list {
                out.push(cfg.graph.parse_path(s)?);
            }
            out
        }
        None => {
            let cap = cap.expect("config validation guarantees cap when gens is absent");
            let n = classify_horizon.unwrap_or(horizon);
            let alpha_c = alpha_at(cfg, n)?;
            let rho = RightWeight::Alpha(alpha_c.clone());
            let class = classify_g_rho(&rho, cap, n, &DivergencePolicy::default());
            class
                .bounded
                .iter()
                .map(|&ix| alpha_c.table().path(ix).clone())
                .filter(|p| !p.is_vertex())
                .collect()
        }
    };
    let solve_opts = SolveOptions {
        max_dim: opts.max_dim,
    };
    let outcome = double_commutant_probe(&alpha, &basis, &shifts, &solve_opts)?;
    let r = &outcome.report;
    let mut ok = r.left_span_contained;
    if let Some(m) = min_gap {
        ok &= r.gap >= m;
    }
    if let Some(e) = expect_gap {
        ok &= r.gap == e;
    }
    let status = if min_gap.is_none() && expect_gap.is_none() {
        if r.left_span_contained {
            Status::Info
        } else {
            Status::Fail
        }
    } else if ok {
        Status::Pass
    } else {
        Status::Fail
    };
    let details = json!({
        "generators": shifts
            .iter()
            .map(|p| cfg.graph.path_display(p))
            .collect::<Vec<_>>(),
        "report": serde_json::to_value(r).unwrap(),
    });
    Ok((status, details))
}

fn task_tails(
    cfg: &ScenarioConfig,
    cap: usize,
    horizon: usize,
    expect: Option<TailsExpect>,
) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let table = alpha.table().clone();
    let rho = RightWeight::Alpha(alpha.clone());
    let class = classify_g_rho(&rho, 2 * cap, horizon, &DivergencePolicy::default());
    let report = tails_check(&class, &table, cap)?;
    let status = match expect {
        None => Status::Info,
        Some(TailsExpect::Holds) if report.verdict == TailsVerdict::HoldsOnHorizon => Status::Pass,
        Some(TailsExpect::Fails) if report.verdict == TailsVerdict::FailsOnHorizon => Status::Pass,
        Some(_) => Status::Fail,
    };
    let witnesses: Vec<Value> = report
        .witnesses
        .iter()
        .map(|(v, w)| {
            json!({
                "path": table.display(*v),
                "witness": w.map(|ix| table.display(ix)),
            })
        })
        .collect();
    let details = json!({
        "verdict": match report.verdict {
            TailsVerdict::HoldsOnHorizon => "holds_on_horizon",
            TailsVerdict::FailsOnHorizon => "fails_on_horizon",
        },
        "witnesses": witnesses,
    });
    Ok((status, details))
}

fn task_cycle_projection(cfg: &ScenarioConfig, horizon: usize) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let basis = FockBasis::new(alpha.table().clone());
    let outcome = cycle_projection_checks(&alpha, &basis)?;
    let ok = outcome.commutes_with_even_shifts
        && outcome.functional_kills_left_monomials
        && outcome.functional_on_projection_is_one
        && outcome.odd_shift_breaks_commutation;
    let details = json!({
        "commutes_with_even_shifts": outcome.commutes_with_even_shifts,
        "functional_kills_left_monomials": outcome.functional_kills_left_monomials,
        "functional_on_projection_is_one": outcome.functional_on_projection_is_one,
        "odd_shift_breaks_commutation": outcome.odd_shift_breaks_commutation,
    });
    Ok((if ok { Status::Pass } else { Status::Fail }, details))
}

fn matrix_violations_json(violations: &[MatrixViolation]) -> Value {
    let rows: Vec<Value> = violations
        .iter()
        .take(5)
        .map(|v| {
            json!({
                "identity": v.identity,
                "generator": v.generator,
                "entry": [v.row, v.col],
                "lhs": v.lhs,
                "rhs": v.rhs,
            })
        })
        .collect();
    json!({ "count": violations.len(), "first": rows })
}

fn task_transport(cfg: &ScenarioConfig, horizon: usize, max_len: usize) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let basis = FockBasis::new(alpha.table().clone());
    let violations = transport_check(&alpha, &basis, max_len);
    let ok = violations.is_empty();
    Ok((
        if ok { Status::Pass } else { Status::Fail },
        matrix_violations_json(&violations),
    ))
}

fn task_gauge(cfg: &ScenarioConfig, horizon: usize, max_len: usize) -> TaskOutcome {
    let alpha = alpha_at(cfg, horizon)?;
    let basis = FockBasis::new(alpha.table().clone());
    let phases = cfg.phases.clone().unwrap_or_else(PhaseProgram::trivial);
    let spec = ComplexWeightSpec::new(alpha, &phases)?;
    let violations = gauge_check(&spec, &basis, max_len);
    let ok = violations.is_empty();
    Ok((
        if ok { Status::Pass } else { Status::Fail },
        matrix_violations_json(&violations),
    ))
}
