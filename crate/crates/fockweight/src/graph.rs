//! Directed multigraphs and their path semigroupoids.
//!
//! A path is an edge word `e1 e2 ... ek` read right to left: `ek` acts
//! first, so consecutive edges must satisfy `s(e_i) = r(e_{i+1})`. Vertices
//! are the length-0 paths and act as partial identities: `w = r(w) w s(w)`.
//! Products `wv` are defined exactly when `s(w) = r(v)` and concatenate the
//! words.
//!
//! [`PathTable`] enumerates all paths up to a horizon in a canonical order
//! (by length, then lexicographically on the edge-identifier word), which
//! pins down basis indices for every matrix built downstream.

use crate::scalar::fnv1a64;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexIx(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeIx(pub usize);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` references undeclared vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("cannot parse `{0}` as a path")]
    BadPath(String),
    #[error("graph has no vertices")]
    Empty,
}

/// A finite directed multigraph with named vertices and edges.
#[derive(Debug)]
pub struct Graph {
    vertex_ids: Vec<String>,
    edge_ids: Vec<String>,
    edge_source: Vec<VertexIx>,
    edge_range: Vec<VertexIx>,
    by_id: HashMap<String, Id>,
    /// Edge indices sorted by identifier; drives the canonical path order.
    edges_lex: Vec<EdgeIx>,
    /// Lexicographic rank of each edge identifier.
    edge_lex_rank: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
enum Id {
    Vertex(VertexIx),
    Edge(EdgeIx),
}

impl Graph {
    /// Validates a raw description: identifiers must be unique (across both
    /// namespaces) and edge endpoints declared.
    pub fn new(
        vertices: &[&str],
        edges: &[(&str, &str, &str)], // (id, source, range-target written as src -> dst)
    ) -> Result<Graph, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut by_id = HashMap::new();
        let mut vertex_ids = Vec::new();
        for &v in vertices {
            if by_id
                .insert(v.to_string(), Id::Vertex(VertexIx(vertex_ids.len())))
                .is_some()
            {
                return Err(GraphError::DuplicateId(v.to_string()));
            }
            vertex_ids.push(v.to_string());
        }
        let mut edge_ids = Vec::new();
        let mut edge_source = Vec::new();
        let mut edge_range = Vec::new();
        for &(id, src, dst) in edges {
            let lookup = |name: &str| match by_id.get(name) {
                Some(Id::Vertex(ix)) => Ok(*ix),
                _ => Err(GraphError::DanglingEndpoint {
                    edge: id.to_string(),
                    vertex: name.to_string(),
                }),
            };
            let s = lookup(src)?;
            let r = lookup(dst)?;
            if by_id
                .insert(id.to_string(), Id::Edge(EdgeIx(edge_ids.len())))
                .is_some()
            {
                return Err(GraphError::DuplicateId(id.to_string()));
            }
            edge_ids.push(id.to_string());
            edge_source.push(s);
            edge_range.push(r);
        }
        let mut edges_lex: Vec<EdgeIx> = (0..edge_ids.len()).map(EdgeIx).collect();
        edges_lex.sort_by(|a, b| edge_ids[a.0].cmp(&edge_ids[b.0]));
        let mut edge_lex_rank = vec![0usize; edge_ids.len()];
        for (rank, e) in edges_lex.iter().enumerate() {
            edge_lex_rank[e.0] = rank;
        }
        Ok(Graph {
            vertex_ids,
            edge_ids,
            edge_source,
            edge_range,
            by_id,
            edges_lex,
            edge_lex_rank,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexIx> + '_ {
        (0..self.vertex_ids.len()).map(VertexIx)
    }

    /// Edges in lexicographic identifier order.
    pub fn edges_lex(&self) -> &[EdgeIx] {
        &self.edges_lex
    }

    pub fn vertex_id(&self, v: VertexIx) -> &str {
        &self.vertex_ids[v.0]
    }

    pub fn edge_id(&self, e: EdgeIx) -> &str {
        &self.edge_ids[e.0]
    }

    pub fn source(&self, e: EdgeIx) -> VertexIx {
        self.edge_source[e.0]
    }

    pub fn range(&self, e: EdgeIx) -> VertexIx {
        self.edge_range[e.0]
    }

    pub fn vertex_by_id(&self, id: &str) -> Result<VertexIx, GraphError> {
        match self.by_id.get(id) {
            Some(Id::Vertex(ix)) => Ok(*ix),
            _ => Err(GraphError::UnknownVertex(id.to_string())),
        }
    }

    pub fn edge_by_id(&self, id: &str) -> Result<EdgeIx, GraphError> {
        match self.by_id.get(id) {
            Some(Id::Edge(ix)) => Ok(*ix),
            _ => Err(GraphError::UnknownEdge(id.to_string())),
        }
    }

    /// The opposite graph: same identifiers, every edge reversed.
    pub fn opposite(&self) -> Graph {
        let vertices: Vec<&str> = self.vertex_ids.iter().map(|s| s.as_str()).collect();
        let edges: Vec<(&str, &str, &str)> = (0..self.edge_ids.len())
            .map(|i| {
                (
                    self.edge_ids[i].as_str(),
                    self.vertex_ids[self.edge_range[i].0].as_str(),
                    self.vertex_ids[self.edge_source[i].0].as_str(),
                )
            })
            .collect();
        Graph::new(&vertices, &edges).expect("opposite of a valid graph is valid")
    }

    /// Parses a path literal: a vertex identifier, a single edge identifier,
    /// a dot-separated edge word, or (when every referenced id is one
    /// character) a plain concatenation like `efe`.
    pub fn parse_path(&self, text: &str) -> Result<Path, GraphError> {
        let text = text.trim();
        if let Ok(v) = self.vertex_by_id(text) {
            return Ok(Path::vertex(v));
        }
        if let Ok(e) = self.edge_by_id(text) {
            return self
                .path_from_edges(vec![e])
                .ok_or_else(|| GraphError::BadPath(text.to_string()));
        }
        let symbols: Vec<String> = if text.contains('.') {
            text.split('.').map(|s| s.trim().to_string()).collect()
        } else {
            text.chars().map(|c| c.to_string()).collect()
        };
        let mut edges = Vec::with_capacity(symbols.len());
        for s in &symbols {
            edges.push(self.edge_by_id(s)?);
        }
        self.path_from_edges(edges)
            .ok_or_else(|| GraphError::BadPath(text.to_string()))
    }

    /// Builds a path from an edge word (leftmost edge acts last); `None` if
    /// consecutive edges do not compose.
    pub fn path_from_edges(&self, edges: Vec<EdgeIx>) -> Option<Path> {
        if edges.is_empty() {
            return None;
        }
        for pair in edges.windows(2) {
            if self.source(pair[0]) != self.range(pair[1]) {
                return None;
            }
        }
        Some(Path::Edges(edges))
    }

    pub fn path_source(&self, p: &Path) -> VertexIx {
        match p {
            Path::Vertex(v) => *v,
            Path::Edges(es) => self.source(*es.last().unwrap()),
        }
    }

    pub fn path_range(&self, p: &Path) -> VertexIx {
        match p {
            Path::Vertex(v) => *v,
            Path::Edges(es) => self.range(es[0]),
        }
    }

    /// `compose(w, v) = wv`, defined when `s(w) = r(v)`.
    pub fn compose(&self, w: &Path, v: &Path) -> Option<Path> {
        if self.path_source(w) != self.path_range(v) {
            return None;
        }
        Some(match (w, v) {
            (Path::Vertex(_), _) => v.clone(),
            (_, Path::Vertex(_)) => w.clone(),
            (Path::Edges(a), Path::Edges(b)) => {
                let mut es = Vec::with_capacity(a.len() + b.len());
                es.extend_from_slice(a);
                es.extend_from_slice(b);
                Path::Edges(es)
            }
        })
    }

    /// Splits `p = e v` into the leftmost edge (applied last) and the rest;
    /// `None` for vertices.
    pub fn split_head(&self, p: &Path) -> Option<(EdgeIx, Path)> {
        match p {
            Path::Vertex(_) => None,
            Path::Edges(es) => {
                let head = es[0];
                let rest = if es.len() == 1 {
                    Path::Vertex(self.source(head))
                } else {
                    Path::Edges(es[1..].to_vec())
                };
                Some((head, rest))
            }
        }
    }

    /// The sub-path picking edges `a..b` of `p`; for `a == b` this is the
    /// vertex sitting at cut position `a`. Cut positions run 0..=len.
    pub fn segment(&self, p: &Path, a: usize, b: usize) -> Path {
        debug_assert!(a <= b && b <= p.len());
        match p {
            Path::Vertex(v) => Path::Vertex(*v),
            Path::Edges(es) => {
                if a == b {
                    let v = if a < es.len() {
                        self.range(es[a])
                    } else {
                        self.source(es[es.len() - 1])
                    };
                    Path::Vertex(v)
                } else {
                    Path::Edges(es[a..b].to_vec())
                }
            }
        }
    }

    /// Solves `w = v u` for `u`: `v` must be the leftmost part of `w`.
    pub fn split_prefix(&self, w: &Path, v: &Path) -> Option<Path> {
        match v {
            Path::Vertex(x) => (self.path_range(w) == *x).then(|| w.clone()),
            Path::Edges(vs) => match w {
                Path::Vertex(_) => None,
                Path::Edges(ws) => {
                    if ws.len() < vs.len() || &ws[..vs.len()] != vs.as_slice() {
                        return None;
                    }
                    Some(self.segment(w, vs.len(), ws.len()))
                }
            },
        }
    }

    /// Solves `w = u v` for `u`: `v` must be the trailing part of `w`.
    pub fn split_suffix(&self, w: &Path, v: &Path) -> Option<Path> {
        match v {
            Path::Vertex(x) => (self.path_source(w) == *x).then(|| w.clone()),
            Path::Edges(vs) => match w {
                Path::Vertex(_) => None,
                Path::Edges(ws) => {
                    if ws.len() < vs.len() || &ws[ws.len() - vs.len()..] != vs.as_slice() {
                        return None;
                    }
                    Some(self.segment(w, 0, ws.len() - vs.len()))
                }
            },
        }
    }

    /// Reverses the edge word; a path of this graph becomes a path of the
    /// opposite graph and vice versa. Anti-multiplicative: `(wv)^t = v^t w^t`.
    pub fn reverse_path(&self, p: &Path) -> Path {
        match p {
            Path::Vertex(v) => Path::Vertex(*v),
            Path::Edges(es) => {
                let mut r = es.clone();
                r.reverse();
                Path::Edges(r)
            }
        }
    }

    /// Display form: single-character edge ids concatenate, otherwise the
    /// word is dot-separated.
    pub fn path_display(&self, p: &Path) -> String {
        match p {
            Path::Vertex(v) => self.vertex_id(*v).to_string(),
            Path::Edges(es) => {
                let ids: Vec<&str> = es.iter().map(|e| self.edge_id(*e)).collect();
                if ids.iter().all(|s| s.chars().count() == 1) {
                    ids.concat()
                } else {
                    ids.join(".")
                }
            }
        }
    }

    fn lex_key<'a>(&'a self, p: &'a Path) -> (usize, Vec<usize>) {
        match p {
            Path::Vertex(_) => (0, vec![]),
            Path::Edges(es) => (es.len(), es.iter().map(|e| self.edge_lex_rank[e.0]).collect()),
        }
    }

    /// Stable content fingerprint (identifiers and incidences).
    pub fn fingerprint(&self) -> u64 {
        let mut buf = String::new();
        for v in &self.vertex_ids {
            buf.push_str(v);
            buf.push(';');
        }
        buf.push('|');
        for i in 0..self.edge_ids.len() {
            buf.push_str(&self.edge_ids[i]);
            buf.push(',');
            buf.push_str(&self.vertex_ids[self.edge_source[i].0]);
            buf.push(',');
            buf.push_str(&self.vertex_ids[self.edge_range[i].0]);
            buf.push(';');
        }
        fnv1a64(buf.as_bytes())
    }
}

/// A finite path: a vertex (length 0) or a composable edge word.
/// Length-0 paths are vertices, not "empty", so there is no `is_empty`;
/// use [`Path::is_vertex`].
#[allow(clippy::len_without_is_empty)]
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Path {
    Vertex(VertexIx),
    Edges(Vec<EdgeIx>),
}

impl Path {
    pub fn vertex(v: VertexIx) -> Path {
        Path::Vertex(v)
    }

    pub fn len(&self) -> usize {
        match self {
            Path::Vertex(_) => 0,
            Path::Edges(es) => es.len(),
        }
    }

    pub fn is_vertex(&self) -> bool {
        matches!(self, Path::Vertex(_))
    }

    /// The trailing edge: the rightmost symbol, i.e. the edge applied first.
    pub fn trailing_edge(&self) -> Option<EdgeIx> {
        match self {
            Path::Vertex(_) => None,
            Path::Edges(es) => es.last().copied(),
        }
    }
}

/// All paths with length at most `horizon`, in canonical order.
#[derive(Debug)]
pub struct PathTable {
    graph: Arc<Graph>,
    horizon: usize,
    paths: Vec<Path>,
    index: HashMap<Path, usize>,
    /// `grade_start[l]..grade_start[l+1]` indexes the paths of length `l`.
    grade_start: Vec<usize>,
}

impl PathTable {
    /// Enumerates `{w : |w| <= horizon}` level by level; every level is
    /// emitted in lexicographic order because edges are scanned in
    /// identifier order over an already-ordered previous level.
    pub fn enumerate(graph: Arc<Graph>, horizon: usize) -> PathTable {
        let mut paths: Vec<Path> = Vec::new();
        let mut grade_start = vec![0usize];

        let mut vertices: Vec<VertexIx> = graph.vertices().collect();
        vertices.sort_by(|a, b| graph.vertex_id(*a).cmp(graph.vertex_id(*b)));
        for v in vertices {
            paths.push(Path::Vertex(v));
        }
        grade_start.push(paths.len());

        let mut level_begin = 0usize;
        let mut level_end = paths.len();
        for _len in 1..=horizon {
            let mut next = Vec::new();
            for &e in graph.edges_lex() {
                for v in &paths[level_begin..level_end] {
                    if graph.source(e) == graph.path_range(v) {
                        let mut es = vec![e];
                        if let Path::Edges(tail) = v {
                            es.extend_from_slice(tail);
                        }
                        next.push(Path::Edges(es));
                    }
                }
            }
            level_begin = paths.len();
            paths.extend(next);
            level_end = paths.len();
            grade_start.push(level_end);
        }

        let index = paths
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        PathTable {
            graph,
            horizon,
            paths,
            index,
            grade_start,
        }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn path(&self, ix: usize) -> &Path {
        &self.paths[ix]
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn grade(&self, ix: usize) -> usize {
        self.paths[ix].len()
    }

    /// Index range of the paths of length `l`.
    pub fn grade_range(&self, l: usize) -> std::ops::Range<usize> {
        if l > self.horizon {
            return 0..0;
        }
        self.grade_start[l]..self.grade_start[l + 1]
    }

    /// Number of paths with length at most `m` (a prefix of the table).
    pub fn count_upto(&self, m: usize) -> usize {
        let m = m.min(self.horizon);
        self.grade_start[m + 1]
    }

    pub fn display(&self, ix: usize) -> String {
        self.graph.path_display(&self.paths[ix])
    }

    /// Fingerprint of graph content plus horizon; names matrix exports.
    pub fn fingerprint(&self) -> u64 {
        fnv1a64(format!("{:016x}:{}", self.graph.fingerprint(), self.horizon).as_bytes())
    }
}

impl fmt::Display for GraphFmt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.path_display(self.1))
    }
}

/// Helper for formatting paths against their graph.
pub struct GraphFmt<'a>(pub &'a Graph, pub &'a Path);

/// Canonical comparison used by the table order (length, then lex).
pub fn canonical_cmp(graph: &Graph, a: &Path, b: &Path) -> std::cmp::Ordering {
    let ka = graph.lex_key(a);
    let kb = graph.lex_key(b);
    match ka.0.cmp(&kb.0) {
        std::cmp::Ordering::Equal => {
            if ka.0 == 0 {
                // vertices: compare by identifier
                let (Path::Vertex(x), Path::Vertex(y)) = (a, b) else {
                    unreachable!()
                };
                graph.vertex_id(*x).cmp(graph.vertex_id(*y))
            } else {
                ka.1.cmp(&kb.1)
            }
        }
        o => o,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn two_loop() -> Arc<Graph> {
        Arc::new(Graph::new(&["phi"], &[("e", "phi", "phi"), ("f", "phi", "phi")]).unwrap())
    }

    pub fn two_cycle() -> Arc<Graph> {
        Arc::new(Graph::new(&["x", "y"], &[("e", "x", "y"), ("f", "y", "x")]).unwrap())
    }

    #[test]
    fn validates_and_rejects() {
        assert!(two_loop().vertex_count() == 1 && two_loop().edge_count() == 2);
        assert!(two_cycle().edge_count() == 2);
        let err = Graph::new(&["x"], &[("e", "x", "z")]).unwrap_err();
        assert_eq!(
            err,
            GraphError::DanglingEndpoint {
                edge: "e".into(),
                vertex: "z".into()
            }
        );
        assert!(matches!(
            Graph::new(&["x", "x"], &[]).unwrap_err(),
            GraphError::DuplicateId(_)
        ));
        assert!(matches!(
            Graph::new(&["x"], &[("x", "x", "x")]).unwrap_err(),
            GraphError::DuplicateId(_)
        ));
    }

    #[test]
    fn path_counts() {
        let t = PathTable::enumerate(two_loop(), 3);
        assert_eq!(t.len(), 15); // 1 + 2 + 4 + 8
        let t = PathTable::enumerate(two_cycle(), 5);
        assert_eq!(t.len(), 12); // 2 per length 0..5
        let t = PathTable::enumerate(two_cycle(), 1);
        let names: Vec<String> = (0..t.len()).map(|i| t.display(i)).collect();
        assert_eq!(names, vec!["x", "y", "e", "f"]);
    }

    #[test]
    fn two_loop_table_is_binary_counting() {
        for n in 0..=6 {
            let t = PathTable::enumerate(two_loop(), n);
            assert_eq!(t.len(), (1 << (n + 1)) - 1);
        }
    }

    #[test]
    fn composition_rules() {
        let g = two_cycle();
        let e = g.parse_path("e").unwrap();
        let f = g.parse_path("f").unwrap();
        let ef = g.compose(&e, &f).unwrap();
        assert_eq!(g.path_display(&ef), "ef");
        assert_eq!(ef.len(), 2);
        assert_eq!(g.vertex_id(g.path_source(&ef)), "y");
        assert_eq!(g.vertex_id(g.path_range(&ef)), "y");
        assert!(g.compose(&e, &e).is_none()); // s(e)=x, r(e)=y

        let x = g.parse_path("x").unwrap();
        let fe = g.compose(&f, &e).unwrap();
        assert_eq!(g.compose(&x, &fe), Some(fe.clone())); // r(fe) = x
        assert_eq!(g.compose(&fe, &x), Some(fe));
    }

    #[test]
    fn associativity_exhaustive_small() {
        let g = two_cycle();
        let t = PathTable::enumerate(g.clone(), 4);
        for a in t.paths() {
            for b in t.paths() {
                for c in t.paths() {
                    if a.len() + b.len() + c.len() > 4 {
                        continue;
                    }
                    let left = g.compose(a, b).and_then(|ab| g.compose(&ab, c));
                    let right = g.compose(b, c).and_then(|bc| g.compose(a, &bc));
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn opposite_reverses() {
        let g = two_cycle();
        let gt = g.opposite();
        let e = gt.edge_by_id("e").unwrap();
        assert_eq!(gt.vertex_id(gt.source(e)), "y");
        assert_eq!(gt.vertex_id(gt.range(e)), "x");

        let ef = g.parse_path("ef").unwrap();
        let rev = g.reverse_path(&ef);
        assert_eq!(gt.path_display(&rev), "fe");
        // anti-multiplicative on a sample
        let f = g.parse_path("f").unwrap();
        let e = g.parse_path("e").unwrap();
        let ef2 = g.compose(&e, &f).unwrap();
        let lhs = g.reverse_path(&ef2);
        let rhs = gt
            .compose(&g.reverse_path(&f), &g.reverse_path(&e))
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn opposite_is_involutive_on_tables() {
        let g = two_loop();
        let gt = Arc::new(g.opposite());
        let gtt = Arc::new(gt.opposite());
        let t = PathTable::enumerate(g.clone(), 4);
        let tt = PathTable::enumerate(gtt, 4);
        assert_eq!(t.len(), tt.len());
        for i in 0..t.len() {
            assert_eq!(t.display(i), tt.display(i));
        }
        // double reversal is the identity path map
        for p in t.paths() {
            assert_eq!(&g.reverse_path(&g.reverse_path(p)), p);
        }
    }

    #[test]
    fn segments_and_splits() {
        let g = two_cycle();
        let efe = g.parse_path("efe").unwrap();
        assert_eq!(g.path_display(&g.segment(&efe, 0, 2)), "ef");
        assert_eq!(g.path_display(&g.segment(&efe, 1, 3)), "fe");
        assert_eq!(g.path_display(&g.segment(&efe, 1, 1)), "x"); // s(e) = r(f) = x at cut 1
        let (head, rest) = g.split_head(&efe).unwrap();
        assert_eq!(g.edge_id(head), "e");
        assert_eq!(g.path_display(&rest), "fe");
        let ef = g.parse_path("ef").unwrap();
        let u = g.split_prefix(&efe, &ef).unwrap();
        assert_eq!(g.path_display(&u), "e");
        let fe = g.parse_path("fe").unwrap();
        let u = g.split_suffix(&efe, &fe).unwrap();
        assert_eq!(g.path_display(&u), "e");
        assert!(g.split_prefix(&efe, &fe).is_none());
    }

    #[test]
    fn path_parsing() {
        let g = two_cycle();
        assert_eq!(g.parse_path("x").unwrap(), Path::Vertex(VertexIx(0)));
        assert_eq!(g.parse_path("efe").unwrap().len(), 3);
        assert_eq!(g.parse_path("e.f.e").unwrap().len(), 3);
        assert!(g.parse_path("ee").is_err()); // not composable
        assert!(g.parse_path("q").is_err());
    }
}
