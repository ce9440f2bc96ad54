//! The weight-rule language.
//!
//! A program defines a path weight `alpha` on a graph by extension factors:
//! `alpha(vertex) = 1` and `alpha(ev) = factor(e, v) * alpha(v)`, where the
//! factor of a step is decided by the first rule whose guard matches. Guards
//! look at the step `(e, v)` — `e` the new edge being prepended, `v` the path
//! being extended:
//!
//! * `new=<edge>` — the new edge is `<edge>`;
//! * `trailing=<edge>` — the extended path `ev` ends in `<edge>` (for a
//!   nonempty `v` this is the trailing edge of `v`; when `v` is a vertex the
//!   first edge laid down is also the trailing one, so the new edge is
//!   tested);
//! * `trailing=none` — `v` is a vertex (the step leaves a vacuum);
//! * `new_eq_trailing` — `v` is nonempty and its trailing edge equals the
//!   new edge;
//! * `src=<vertex>` — `s(v) = <vertex>` (equivalently `s(ev)`);
//! * `len<k`, `len%m=r` — predicates on `|v|`.
//!
//! Long spellings `new_edge=`, `trailing_edge=`, `source_vertex=` and
//! `new_edge equals trailing_edge` are accepted as aliases. Factors are
//! strictly positive rationals or `pow(b, dtable(t))` where `t` is a named
//! integer table and the exponent of a step is `t(|v|+1) - t(|v|)`.

use crate::graph::{EdgeIx, Graph, Path, VertexIx};
use crate::lexer::{err_at, lex, Cursor, LexParseError, Pos, Tok};
use crate::scalar::{rat_pow, Rat};
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type ParseError = LexParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardAtom {
    NewEdge(EdgeIx),
    /// Trailing edge of the extended path.
    TrailingIs(EdgeIx),
    /// The extension starts from a vacuum vector.
    TrailingNone,
    NewEqTrailing,
    Source(VertexIx),
    LenLt(usize),
    LenMod { modulus: usize, residue: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    Const(Rat),
    /// `base ^ (table(|v|+1) - table(|v|))`.
    PowDeltaTable { base: Rat, table: String },
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub guards: Vec<GuardAtom>, // conjunction; empty = default
    pub factor: Factor,
}

/// An ordered, first-match-wins rule list with a mandatory default.
#[derive(Debug, Clone)]
pub struct WeightProgram {
    pub rules: Vec<Rule>, // last entry is the default (no guards)
    pub tables: BTreeMap<String, Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("table `{table}` needs index {index} but has {len} entries")]
    TableUnderflow {
        table: String,
        index: usize,
        len: usize,
    },
}

impl WeightProgram {
    /// The unweighted program: every factor is 1.
    pub fn unweighted() -> WeightProgram {
        WeightProgram {
            rules: vec![Rule {
                guards: vec![],
                factor: Factor::Const(Rat::one()),
            }],
            tables: BTreeMap::new(),
        }
    }

    fn guard_matches(&self, graph: &Graph, atom: &GuardAtom, new_edge: EdgeIx, v: &Path) -> bool {
        match atom {
            GuardAtom::NewEdge(e) => new_edge == *e,
            GuardAtom::TrailingIs(e) => match v.trailing_edge() {
                Some(t) => t == *e,
                None => new_edge == *e,
            },
            GuardAtom::TrailingNone => v.is_vertex(),
            GuardAtom::NewEqTrailing => v.trailing_edge() == Some(new_edge),
            GuardAtom::Source(x) => graph.path_source(v) == *x,
            GuardAtom::LenLt(k) => v.len() < *k,
            GuardAtom::LenMod { modulus, residue } => v.len() % *modulus == *residue,
        }
    }

    /// The factor of the step `v -> (new_edge)v`.
    pub fn factor_for(&self, graph: &Graph, new_edge: EdgeIx, v: &Path) -> Result<Rat, EvalError> {
        for rule in &self.rules {
            if rule
                .guards
                .iter()
                .all(|g| self.guard_matches(graph, g, new_edge, v))
            {
                return self.eval_factor(&rule.factor, v.len());
            }
        }
        unreachable!("programs always end in a default rule")
    }

    fn eval_factor(&self, factor: &Factor, old_len: usize) -> Result<Rat, EvalError> {
        match factor {
            Factor::Const(c) => Ok(c.clone()),
            Factor::PowDeltaTable { base, table } => {
                let t = &self.tables[table];
                if old_len + 1 >= t.len() {
                    return Err(EvalError::TableUnderflow {
                        table: table.clone(),
                        index: old_len + 1,
                        len: t.len(),
                    });
                }
                let delta = t[old_len + 1] - t[old_len];
                Ok(rat_pow(base, delta))
            }
        }
    }

    /// Every factor value the program can produce for steps with `|v| < horizon`.
    /// Used by the boundedness certificates.
    pub fn factor_values_upto(&self, horizon: usize) -> Result<Vec<Rat>, EvalError> {
        let mut out = Vec::new();
        for rule in &self.rules {
            match &rule.factor {
                Factor::Const(c) => out.push(c.clone()),
                Factor::PowDeltaTable { .. } => {
                    for l in 0..horizon {
                        out.push(self.eval_factor(&rule.factor, l)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Const(c) => write!(f, "{}", crate::scalar::format_rat(c)),
            Factor::PowDeltaTable { base, table } => {
                write!(f, "pow({}, dtable({}))", crate::scalar::format_rat(base), table)
            }
        }
    }
}

/// Parses a rule program against a graph (identifiers are resolved eagerly).
pub fn parse_weight_program(text: &str, graph: &Graph) -> Result<WeightProgram, ParseError> {
    let toks = lex(text)?;
    let mut cur = Cursor::new(toks);
    let mut items = parse_program_items(&mut cur, graph)?;
    cur.skip_separators();
    if let Some(t) = cur.peek() {
        return Err(err_at(t.pos, format!("unexpected {}", t.tok)));
    }
    finish_program(&mut items)
}

/// Program items as parsed from a `weight { ... }` block body.
pub(crate) struct ProgramItems {
    pub rules: Vec<Rule>,
    pub default: Option<Rule>,
    pub tables: BTreeMap<String, Vec<i64>>,
    pub start: Pos,
}

pub(crate) fn finish_program(items: &mut ProgramItems) -> Result<WeightProgram, ParseError> {
    let Some(default) = items.default.take() else {
        return Err(err_at(items.start, "weight program has no `default` rule"));
    };
    let mut rules = std::mem::take(&mut items.rules);
    rules.push(default);
    Ok(WeightProgram {
        rules,
        tables: std::mem::take(&mut items.tables),
    })
}

/// Parses items until end of input or a closing `}` (not consumed).
pub(crate) fn parse_program_items(
    cur: &mut Cursor,
    graph: &Graph,
) -> Result<ProgramItems, ParseError> {
    let mut items = ProgramItems {
        rules: Vec::new(),
        default: None,
        tables: BTreeMap::new(),
        start: cur.pos(),
    };
    loop {
        cur.skip_separators();
        let Some(t) = cur.peek() else { break };
        if t.tok == Tok::RBrace {
            break;
        }
        let (word, pos) = cur.expect_ident()?;
        match word.as_str() {
            "table" => {
                let (name, _) = cur.expect_ident()?;
                cur.expect(&Tok::Eq)?;
                cur.expect(&Tok::LBracket)?;
                let mut vals = Vec::new();
                loop {
                    cur.skip_newlines();
                    let (n, _) = cur.expect_int()?;
                    vals.push(n);
                    cur.skip_newlines();
                    match cur.bump() {
                        Some(t) if t.tok == Tok::Comma => continue,
                        Some(t) if t.tok == Tok::RBracket => break,
                        Some(t) => {
                            return Err(err_at(t.pos, format!("expected `,` or `]`, found {}", t.tok)))
                        }
                        None => return Err(err_at(cur.eof_pos(), "unterminated table")),
                    }
                }
                items.tables.insert(name, vals);
            }
            "rule" => {
                let guards = parse_guards(cur, graph)?;
                let factor = parse_factor(cur, &items.tables)?;
                items.rules.push(Rule { guards, factor });
            }
            "default" => {
                cur.expect(&Tok::FatArrow)?;
                let factor = parse_factor_body(cur, &items.tables)?;
                if items.default.is_some() {
                    return Err(err_at(pos, "duplicate `default` rule"));
                }
                items.default = Some(Rule {
                    guards: vec![],
                    factor,
                });
            }
            other => {
                return Err(err_at(
                    pos,
                    format!("expected `table`, `rule` or `default`, found `{other}`"),
                ))
            }
        }
    }
    Ok(items)
}

/// Parses a guard conjunction up to and including the `=>`; shared with the
/// phase-rule grammar.
pub(crate) fn parse_guards_pub(cur: &mut Cursor, graph: &Graph) -> Result<Vec<GuardAtom>, ParseError> {
    parse_guards(cur, graph)
}

fn parse_guards(cur: &mut Cursor, graph: &Graph) -> Result<Vec<GuardAtom>, ParseError> {
    let mut guards = Vec::new();
    loop {
        let (key, pos) = cur.expect_ident()?;
        let atom = match key.as_str() {
            "new" | "new_edge" => {
                // `new_edge equals trailing_edge` or `new=<id>`
                match cur.peek().map(|t| t.tok.clone()) {
                    Some(Tok::Ident(w)) if w == "equals" => {
                        cur.bump();
                        let (rhs, rpos) = cur.expect_ident()?;
                        if rhs != "trailing_edge" && rhs != "trailing" {
                            return Err(err_at(rpos, "expected `trailing_edge` after `equals`"));
                        }
                        GuardAtom::NewEqTrailing
                    }
                    _ => {
                        cur.expect(&Tok::Eq)?;
                        let (id, ipos) = cur.expect_ident()?;
                        let e = graph
                            .edge_by_id(&id)
                            .map_err(|e| err_at(ipos, e.to_string()))?;
                        GuardAtom::NewEdge(e)
                    }
                }
            }
            "trailing" | "trailing_edge" => {
                cur.expect(&Tok::Eq)?;
                let (id, ipos) = cur.expect_ident()?;
                if id == "none" {
                    GuardAtom::TrailingNone
                } else {
                    let e = graph
                        .edge_by_id(&id)
                        .map_err(|e| err_at(ipos, e.to_string()))?;
                    GuardAtom::TrailingIs(e)
                }
            }
            "src" | "source_vertex" => {
                cur.expect(&Tok::Eq)?;
                let (id, ipos) = cur.expect_ident()?;
                let v = graph
                    .vertex_by_id(&id)
                    .map_err(|e| err_at(ipos, e.to_string()))?;
                GuardAtom::Source(v)
            }
            "new_eq_trailing" => GuardAtom::NewEqTrailing,
            "len" => match cur.bump() {
                Some(t) if t.tok == Tok::Lt => {
                    let (k, kpos) = cur.expect_int()?;
                    if k < 0 {
                        return Err(err_at(kpos, "length bound must be non-negative"));
                    }
                    GuardAtom::LenLt(k as usize)
                }
                Some(t) if t.tok == Tok::Percent => {
                    let (m, mpos) = cur.expect_int()?;
                    if m <= 0 {
                        return Err(err_at(mpos, "modulus must be positive"));
                    }
                    cur.expect(&Tok::Eq)?;
                    let (r, rpos) = cur.expect_int()?;
                    if r < 0 || r >= m {
                        return Err(err_at(rpos, "residue out of range"));
                    }
                    GuardAtom::LenMod {
                        modulus: m as usize,
                        residue: r as usize,
                    }
                }
                Some(t) => return Err(err_at(t.pos, format!("expected `<` or `%`, found {}", t.tok))),
                None => return Err(err_at(cur.eof_pos(), "unterminated `len` guard")),
            },
            other => return Err(err_at(pos, format!("unknown guard `{other}`"))),
        };
        guards.push(atom);
        // separator between atoms: optional comma; `=>` ends the guard list
        if matches!(cur.peek().map(|t| &t.tok), Some(Tok::Comma)) {
            cur.bump();
        }
        if matches!(cur.peek().map(|t| &t.tok), Some(Tok::FatArrow)) {
            cur.bump();
            return Ok(guards);
        }
    }
}

fn parse_factor(cur: &mut Cursor, tables: &BTreeMap<String, Vec<i64>>) -> Result<Factor, ParseError> {
    parse_factor_body(cur, tables)
}

fn parse_factor_body(
    cur: &mut Cursor,
    tables: &BTreeMap<String, Vec<i64>>,
) -> Result<Factor, ParseError> {
    match cur.peek().map(|t| t.tok.clone()) {
        Some(Tok::Ident(w)) if w == "pow" => {
            cur.bump();
            cur.expect(&Tok::LParen)?;
            let (base, bpos) = parse_rational(cur)?;
            require_positive(&base, bpos)?;
            cur.expect(&Tok::Comma)?;
            let (kw, kpos) = cur.expect_ident()?;
            if kw != "dtable" {
                return Err(err_at(kpos, "expected `dtable(<name>)`"));
            }
            cur.expect(&Tok::LParen)?;
            let (name, npos) = cur.expect_ident()?;
            if !tables.contains_key(&name) {
                return Err(err_at(npos, format!("unknown table `{name}` (declare it first)")));
            }
            cur.expect(&Tok::RParen)?;
            cur.expect(&Tok::RParen)?;
            Ok(Factor::PowDeltaTable { base, table: name })
        }
        _ => {
            let (c, pos) = parse_rational(cur)?;
            require_positive(&c, pos)?;
            Ok(Factor::Const(c))
        }
    }
}

fn require_positive(r: &Rat, pos: Pos) -> Result<(), ParseError> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(err_at(pos, "weight factors must be strictly positive"))
    }
}

/// `<int>` or `<int>/<int>`.
pub(crate) fn parse_rational(cur: &mut Cursor) -> Result<(Rat, Pos), ParseError> {
    let (n, pos) = cur.expect_int()?;
    if matches!(cur.peek().map(|t| &t.tok), Some(Tok::Slash)) {
        cur.bump();
        let (d, dpos) = cur.expect_int()?;
        if d == 0 {
            return Err(err_at(dpos, "zero denominator"));
        }
        Ok((crate::scalar::rat(n, d), pos))
    } else {
        Ok((Rat::from_integer(n.into()), pos))
    }
}

/// True when a factor list certifies contraction (all values at most 1).
pub fn all_factors_at_most_one(values: &[Rat]) -> bool {
    values.iter().all(|v| v <= &Rat::one())
}

/// True when every factor is exactly 1 (the unweighted case).
pub fn all_factors_one(values: &[Rat]) -> bool {
    values.iter().all(|v| v.is_one() && !v.is_zero())
}
