//! Scenario configs: a graph, a weight program, optional phases, and a task
//! list, in one declarative file.
//!
//! ```text
//! graph {
//!   vertex phi
//!   edge e phi -> phi
//!   edge f phi -> phi
//! }
//! weight {
//!   rule trailing_edge=e => 1/2
//!   default => 1
//! }
//! phases {                      # optional; values 1, -1, i, phase(re, im)
//!   rule new=e => i
//!   default => 1
//! }
//! tasks {
//!   check-cocycle horizon=8
//!   classify cap=3 horizon=8 expect-bounded=[phi,e,ee,fe]
//! }
//! ```

use crate::graph::Graph;
use crate::lexer::{err_at, lex, Cursor, LexParseError, Pos, Tok};
use crate::scalar::{is_unit_modulus, GRat, Rat};
use crate::weight::program::{self, parse_rational, ParseError, WeightProgram};
use crate::weight::{PhaseProgram, PhaseRule, Side};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::path::Path as FsPath;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {error}")]
    Io {
        path: String,
        error: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] LexParseError),
    #[error("{0}")]
    Semantic(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundExpect {
    Certified,
    Bounded,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailsExpect {
    Holds,
    Fails,
}

/// One work item of a scenario.
#[derive(Debug, Clone)]
pub enum Task {
    CheckCocycle {
        horizon: usize,
    },
    Companion {
        horizon: usize,
    },
    Bounds {
        side: Side,
        path: String,
        horizon: usize,
        expect: Option<BoundExpect>,
    },
    Classify {
        cap: usize,
        horizon: usize,
        expect_bounded: Option<Vec<String>>,
    },
    Commutant {
        horizon: usize,
        expect_dim: Option<usize>,
    },
    DoubleCommutant {
        /// Explicit shift generators; when absent they come from a
        /// classification at `cap`.
        gens: Option<Vec<String>>,
        cap: Option<usize>,
        classify_horizon: Option<usize>,
        horizon: usize,
        min_gap: Option<usize>,
        expect_gap: Option<usize>,
    },
    Tails {
        cap: usize,
        horizon: usize,
        expect: Option<TailsExpect>,
    },
    /// The 2-cycle diagonal-projection scenario with its separation checks.
    CycleProjection {
        horizon: usize,
    },
    Transport {
        horizon: usize,
        max_len: usize,
    },
    Gauge {
        horizon: usize,
        max_len: usize,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::CheckCocycle { .. } => "check-cocycle",
            Task::Companion { .. } => "companion",
            Task::Bounds { .. } => "bounds",
            Task::Classify { .. } => "classify",
            Task::Commutant { .. } => "commutant",
            Task::DoubleCommutant { .. } => "double-commutant",
            Task::Tails { .. } => "tails",
            Task::CycleProjection { .. } => "cycle-projection",
            Task::Transport { .. } => "transport",
            Task::Gauge { .. } => "gauge",
        }
    }
}

#[derive(Debug)]
pub struct ScenarioConfig {
    pub source: String,
    pub graph: Arc<Graph>,
    pub weight: WeightProgram,
    pub phases: Option<PhaseProgram>,
    pub tasks: Vec<Task>,
}

pub fn load_scenario(path: &FsPath) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|error| ConfigError::Io {
        path: path.display().to_string(),
        error,
    })?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn parse_scenario(text: &str, source: &str) -> Result<ScenarioConfig, ConfigError> {
    let toks = lex(text)?;
    let mut cur = Cursor::new(toks);

    let mut graph: Option<Arc<Graph>> = None;
    let mut weight: Option<WeightProgram> = None;
    let mut phases: Option<PhaseProgram> = None;
    let mut tasks: Option<Vec<Task>> = None;

    loop {
        cur.skip_separators();
        let Some(t) = cur.peek() else { break };
        let pos = t.pos;
        let (section, _) = cur.expect_ident()?;
        cur.expect(&Tok::LBrace)?;
        match section.as_str() {
            "graph" => {
                if graph.is_some() {
                    return Err(dup_section(pos, "graph"));
                }
                graph = Some(parse_graph_section(&mut cur)?);
            }
            "weight" => {
                if weight.is_some() {
                    return Err(dup_section(pos, "weight"));
                }
                let g = graph.as_ref().ok_or_else(|| {
                    ConfigError::Semantic(
                        "the `weight` section needs a preceding `graph` section".into(),
                    )
                })?;
                let mut items = program::parse_program_items(&mut cur, g)?;
                weight = Some(program::finish_program(&mut items)?);
            }
            "phases" => {
                if phases.is_some() {
                    return Err(dup_section(pos, "phases"));
                }
                let g = graph.as_ref().ok_or_else(|| {
                    ConfigError::Semantic(
                        "the `phases` section needs a preceding `graph` section".into(),
                    )
                })?;
                phases = Some(parse_phases_section(&mut cur, g)?);
            }
            "tasks" => {
                if tasks.is_some() {
                    return Err(dup_section(pos, "tasks"));
                }
                tasks = Some(parse_tasks_section(&mut cur)?);
            }
            other => {
                return Err(err_at(pos, format!("unknown section `{other}`")).into());
            }
        }
        cur.expect(&Tok::RBrace)?;
    }

    let graph = graph.ok_or_else(|| ConfigError::Semantic("missing `graph` section".into()))?;
    let weight = weight.ok_or_else(|| ConfigError::Semantic("missing `weight` section".into()))?;
    let tasks = tasks.unwrap_or_default();

    // resolve every path literal now so bad configs fail at load time
    for task in &tasks {
        let check = |s: &str| -> Result<(), ConfigError> {
            graph
                .parse_path(s)
                .map(|_| ())
                .map_err(|e| ConfigError::Semantic(format!("task `{}`: {e}", task.name())))
        };
        match task {
            Task::Bounds { path, .. } => check(path)?,
            Task::Classify { expect_bounded, .. } => {
                for p in expect_bounded.iter().flatten() {
                    check(p)?;
                }
            }
            Task::DoubleCommutant { gens, .. } => {
                for p in gens.iter().flatten() {
                    check(p)?;
                }
            }
            _ => {}
        }
    }

    Ok(ScenarioConfig {
        source: source.to_string(),
        graph,
        weight,
        phases,
        tasks,
    })
}

fn dup_section(pos: Pos, name: &str) -> ConfigError {
    err_at(pos, format!("duplicate `{name}` section")).into()
}

fn parse_graph_section(cur: &mut Cursor) -> Result<Arc<Graph>, ConfigError> {
    let mut vertices: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    loop {
        cur.skip_separators();
        match cur.peek().map(|t| t.tok.clone()) {
            Some(Tok::RBrace) | None => break,
            _ => {}
        }
        let (word, pos) = cur.expect_ident()?;
        match word.as_str() {
            "vertex" => {
                let (id, _) = cur.expect_ident()?;
                vertices.push(id);
            }
            "edge" => {
                let (id, _) = cur.expect_ident()?;
                let (src, _) = cur.expect_ident()?;
                cur.expect(&Tok::Arrow)?;
                let (dst, _) = cur.expect_ident()?;
                edges.push((id, src, dst));
            }
            other => {
                return Err(
                    err_at(pos, format!("expected `vertex` or `edge`, found `{other}`")).into(),
                )
            }
        }
    }
    let vrefs: Vec<&str> = vertices.iter().map(|s| s.as_str()).collect();
    let erefs: Vec<(&str, &str, &str)> = edges
        .iter()
        .map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str()))
        .collect();
    Graph::new(&vrefs, &erefs)
        .map(Arc::new)
        .map_err(|e| ConfigError::Semantic(e.to_string()))
}

fn parse_phases_section(cur: &mut Cursor, graph: &Graph) -> Result<PhaseProgram, ConfigError> {
    let mut rules: Vec<PhaseRule> = Vec::new();
    let mut default: Option<PhaseRule> = None;
    loop {
        cur.skip_separators();
        match cur.peek().map(|t| t.tok.clone()) {
            Some(Tok::RBrace) | None => break,
            _ => {}
        }
        let (word, pos) = cur.expect_ident()?;
        match word.as_str() {
            "rule" => {
                let guards = program::parse_guards_pub(cur, graph)?;
                let (phase, ppos) = parse_phase_value(cur)?;
                require_unit(&phase, ppos)?;
                rules.push(PhaseRule { guards, phase });
            }
            "default" => {
                cur.expect(&Tok::FatArrow)?;
                let (phase, ppos) = parse_phase_value(cur)?;
                require_unit(&phase, ppos)?;
                default = Some(PhaseRule {
                    guards: vec![],
                    phase,
                });
            }
            other => {
                return Err(
                    err_at(pos, format!("expected `rule` or `default`, found `{other}`")).into(),
                )
            }
        }
    }
    let default = default
        .ok_or_else(|| ConfigError::Semantic("phases section has no `default` rule".into()))?;
    let mut all = rules;
    all.push(default);
    Ok(PhaseProgram { rules: all })
}

fn require_unit(z: &GRat, pos: Pos) -> Result<(), ConfigError> {
    if is_unit_modulus(z) {
        Ok(())
    } else {
        Err(err_at(pos, "phases must be unit-modulus").into())
    }
}

/// `1`, `-1`, `i`, or `phase(<rat>, <rat>)`.
fn parse_phase_value(cur: &mut Cursor) -> Result<(GRat, Pos), ParseError> {
    let pos = cur.pos();
    match cur.peek().map(|t| t.tok.clone()) {
        Some(Tok::Ident(w)) if w == "i" => {
            cur.bump();
            Ok((GRat::new(Rat::zero(), Rat::one()), pos))
        }
        Some(Tok::Ident(w)) if w == "phase" => {
            cur.bump();
            cur.expect(&Tok::LParen)?;
            let (re, _) = parse_rational(cur)?;
            cur.expect(&Tok::Comma)?;
            let (im, _) = parse_rational(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok((GRat::new(re, im), pos))
        }
        _ => {
            let (re, _) = parse_rational(cur)?;
            Ok((GRat::new(re, Rat::zero()), pos))
        }
    }
}

#[derive(Debug, Clone)]
enum Val {
    Int(i64),
    Word(String),
    List(Vec<String>),
}

fn parse_tasks_section(cur: &mut Cursor) -> Result<Vec<Task>, ConfigError> {
    let mut tasks = Vec::new();
    loop {
        cur.skip_separators();
        match cur.peek().map(|t| t.tok.clone()) {
            Some(Tok::RBrace) | None => break,
            _ => {}
        }
        let (name, pos) = cur.expect_ident()?;
        let mut args: BTreeMap<String, Val> = BTreeMap::new();
        loop {
            match cur.peek().map(|t| t.tok.clone()) {
                Some(Tok::Newline) | Some(Tok::Semi) | Some(Tok::RBrace) | None => break,
                _ => {}
            }
            let (key, kpos) = cur.expect_ident()?;
            cur.expect(&Tok::Eq)?;
            let val = match cur.peek().map(|t| t.tok.clone()) {
                Some(Tok::Int(n)) => {
                    cur.bump();
                    Val::Int(n)
                }
                Some(Tok::Ident(w)) => {
                    cur.bump();
                    Val::Word(w)
                }
                Some(Tok::LBracket) => {
                    cur.bump();
                    let mut items = Vec::new();
                    loop {
                        match cur.peek().map(|t| t.tok.clone()) {
                            Some(Tok::RBracket) => {
                                cur.bump();
                                break;
                            }
                            Some(Tok::Comma) => {
                                cur.bump();
                            }
                            Some(Tok::Ident(w)) => {
                                cur.bump();
                                items.push(w);
                            }
                            Some(t) => {
                                return Err(
                                    err_at(kpos, format!("unexpected {t} in list value")).into()
                                )
                            }
                            None => {
                                return Err(err_at(cur.eof_pos(), "unterminated list value").into())
                            }
                        }
                    }
                    Val::List(items)
                }
                Some(t) => return Err(err_at(kpos, format!("unexpected value {t}")).into()),
                None => return Err(err_at(cur.eof_pos(), "missing task value").into()),
            };
            if args.insert(key.clone(), val).is_some() {
                return Err(err_at(kpos, format!("duplicate key `{key}`")).into());
            }
        }
        tasks.push(build_task(&name, pos, args)?);
    }
    Ok(tasks)
}

fn take_usize(
    args: &mut BTreeMap<String, Val>,
    key: &str,
    pos: Pos,
) -> Result<Option<usize>, ConfigError> {
    match args.remove(key) {
        None => Ok(None),
        Some(Val::Int(n)) if n >= 0 => Ok(Some(n as usize)),
        Some(_) => Err(err_at(pos, format!("`{key}` must be a non-negative integer")).into()),
    }
}

fn require(name: &str, key: &str, pos: Pos, v: Option<usize>) -> Result<usize, ConfigError> {
    v.ok_or_else(|| err_at(pos, format!("task `{name}` needs `{key}=<n>`")).into())
}

fn build_task(name: &str, pos: Pos, mut args: BTreeMap<String, Val>) -> Result<Task, ConfigError> {

    let task = match name {
        "check-cocycle" => Task::CheckCocycle {
            horizon: require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?,
        },
        "companion" => Task::Companion {
            horizon: require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?,
        },
        "bounds" => {
            let horizon = require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?;
            let side = match args.remove("side") {
                Some(Val::Word(w)) if w == "left" => Side::Left,
                Some(Val::Word(w)) if w == "right" => Side::Right,
                _ => return Err(err_at(pos, "bounds needs `side=left|right`").into()),
            };
            let path = match args.remove("path") {
                Some(Val::Word(w)) => w,
                _ => return Err(err_at(pos, "bounds needs `path=<path>`").into()),
            };
            let expect = match args.remove("expect") {
                None => None,
                Some(Val::Word(w)) => Some(match w.as_str() {
                    "certified" => BoundExpect::Certified,
                    "bounded" => BoundExpect::Bounded,
                    "divergent" => BoundExpect::Divergent,
                    other => {
                        return Err(
                            err_at(pos, format!("unknown bounds expectation `{other}`")).into()
                        )
                    }
                }),
                Some(_) => return Err(err_at(pos, "`expect` must be a word").into()),
            };
            Task::Bounds {
                side,
                path,
                horizon,
                expect,
            }
        }
        "classify" => {
            let cap = require(name, "cap", pos, take_usize(&mut args, "cap", pos)?)?;
            let horizon = require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?;
            let expect_bounded = match args.remove("expect-bounded") {
                None => None,
                Some(Val::List(items)) => Some(items),
                Some(_) => return Err(err_at(pos, "`expect-bounded` must be a list").into()),
            };
            Task::Classify {
                cap,
                horizon,
                expect_bounded,
            }
        }
        "commutant" => Task::Commutant {
            horizon: require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?,
            expect_dim: take_usize(&mut args, "expect-dim", pos)?,
        },
        "double-commutant" => {
            let horizon = require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?;
            let gens = match args.remove("gens") {
                None => None,
                Some(Val::List(items)) => Some(items),
                Some(_) => return Err(err_at(pos, "`gens` must be a list").into()),
            };
            let cap = take_usize(&mut args, "cap", pos)?;
            let classify_horizon = take_usize(&mut args, "classify-horizon", pos)?;
            if gens.is_none() && cap.is_none() {
                return Err(err_at(pos, "double-commutant needs `gens=[...]` or `cap=<k>`").into());
            }
            Task::DoubleCommutant {
                gens,
                cap,
                classify_horizon,
                horizon,
                min_gap: take_usize(&mut args, "min-gap", pos)?,
                expect_gap: take_usize(&mut args, "expect-gap", pos)?,
            }
        }
        "tails" => {
            let cap = require(name, "cap", pos, take_usize(&mut args, "cap", pos)?)?;
            let horizon = require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?;
            let expect = match args.remove("expect") {
                None => None,
                Some(Val::Word(w)) => Some(match w.as_str() {
                    "holds" => TailsExpect::Holds,
                    "fails" => TailsExpect::Fails,
                    other => {
                        return Err(
                            err_at(pos, format!("unknown tails expectation `{other}`")).into()
                        )
                    }
                }),
                Some(_) => return Err(err_at(pos, "`expect` must be `holds` or `fails`").into()),
            };
            Task::Tails {
                cap,
                horizon,
                expect,
            }
        }
        "cycle-projection" => Task::CycleProjection {
            horizon: require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?,
        },
        "transport" => Task::Transport {
            horizon: require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?,
            max_len: take_usize(&mut args, "max-len", pos)?.unwrap_or(2),
        },
        "gauge" => Task::Gauge {
            horizon: require(name, "horizon", pos, take_usize(&mut args, "horizon", pos)?)?,
            max_len: take_usize(&mut args, "max-len", pos)?.unwrap_or(2),
        },
        other => return Err(err_at(pos, format!("unknown task `{other}`")).into()),
    };
    if let Some(key) = args.keys().next() {
        return Err(err_at(pos, format!("task `{name}` does not accept `{key}`")).into());
    }
    Ok(task)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
# two-loop scenario
graph {
  vertex phi
  edge e phi -> phi
  edge f phi -> phi
}

weight {
  rule trailing_edge=e => 1/2
  default => 1
}

phases {
  rule new=e => i
  default => 1
}

tasks {
  check-cocycle horizon=8
  bounds side=right path=f horizon=8 expect=divergent
  classify cap=3 horizon=8 expect-bounded=[phi,e,ee,fe,eee,efe,fee,ffe]
  double-commutant gens=[ef,fe] horizon=6 min-gap=1
  transport horizon=6 max-len=2
}
"#;

    #[test]
    fn parses_full_scenario() {
        let cfg = parse_scenario(SAMPLE, "sample").unwrap();
        assert_eq!(cfg.graph.edge_count(), 2);
        assert_eq!(cfg.tasks.len(), 5);
        assert!(cfg.phases.is_some());
        match &cfg.tasks[1] {
            Task::Bounds {
                side, path, expect, ..
            } => {
                assert_eq!(*side, Side::Right);
                assert_eq!(path, "f");
                assert_eq!(*expect, Some(BoundExpect::Divergent));
            }
            other => panic!("unexpected task {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_edge_in_rule() {
        let text = SAMPLE.replace("trailing_edge=e", "trailing_edge=g");
        let err = parse_scenario(&text, "sample").unwrap_err();
        assert!(err.to_string().contains("unknown edge"), "{err}");
    }

    #[test]
    fn rejects_bad_task_paths_at_load() {
        let text = SAMPLE.replace("path=f", "path=q");
        let err = parse_scenario(&text, "sample").unwrap_err();
        assert!(err.to_string().contains("task `bounds`"), "{err}");
    }

    #[test]
    fn reports_line_and_column() {
        let text = "graph {\n  vertex x\n  edge e x -> @\n}";
        let err = parse_scenario(text, "sample").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn phase_literals() {
        let text = r#"
graph { vertex x }
weight { default => 1 }
phases { rule len<1 => phase(3/5, 4/5); default => -1 }
tasks { }
"#;
        let cfg = parse_scenario(text, "s").unwrap();
        let rules = &cfg.phases.unwrap().rules;
        assert_eq!(rules.len(), 2);
        assert!(is_unit_modulus(&rules[0].phase));
        // non-unit phase is rejected
        let bad = text.replace("phase(3/5, 4/5)", "phase(1/2, 0)");
        assert!(parse_scenario(&bad, "s").is_err());
    }
}
