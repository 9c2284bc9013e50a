//! Undirected graphs with non-negative integer edge weights, validated trees,
//! the edge-list text format and single-source shortest paths.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::fmt;
use std::io::BufRead;

use thiserror::Error;

/// Shortest-path distance. `None` marks an unreachable vertex.
pub type Distance = Option<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("not a tree: {0}")]
    NotATree(&'static str),
}

/// An undirected graph on the dense vertex set `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, u64)>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self, GraphError> {
        let mut seen = HashSet::new();
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::new();
        for e in edges {
            for x in [e.u, e.v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.u));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(GraphError::DuplicateEdge(e.u, e.v));
            }
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
            list.push(e);
        }
        Ok(Graph { n, edges: list, adj })
    }

    /// Unit-weight graph from vertex pairs.
    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        Self::new(n, pairs.into_iter().map(|(u, v)| Edge { u, v, w: 1 }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `v` together with the connecting edge weight.
    pub fn neighbors(&self, v: usize) -> &[(usize, u64)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.w == 1)
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.w).max().unwrap_or(0)
    }

    /// Component label per vertex (labels numbered in order of the smallest
    /// vertex of each component) and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().1 == 1
    }

    /// Subgraph induced by the vertices with `keep[v] == true`, relabelled
    /// densely in increasing order. Returns the graph and the old id of each
    /// new vertex.
    pub fn induced_subgraph(&self, keep: &[bool]) -> (Graph, Vec<usize>) {
        let mut new_id = vec![usize::MAX; self.n];
        let mut old_id = Vec::new();
        for v in 0..self.n {
            if keep[v] {
                new_id[v] = old_id.len();
                old_id.push(v);
            }
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| keep[e.u] && keep[e.v])
            .map(|e| Edge {
                u: new_id[e.u],
                v: new_id[e.v],
                w: e.w,
            })
            .collect();
        let mut adj = vec![Vec::new(); old_id.len()];
        for e in &edges {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        (
            Graph {
                n: old_id.len(),
                edges,
                adj,
            },
            old_id,
        )
    }

    /// Deletes the given vertices; the remaining vertices are relabelled as
    /// in [`Graph::induced_subgraph`].
    pub fn remove_vertices(&self, removed: &[usize]) -> Graph {
        let mut keep = vec![true; self.n];
        for &v in removed {
            keep[v] = false;
        }
        self.induced_subgraph(&keep).0
    }
}

/// A connected graph with exactly `n - 1` unit-weight edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree(Graph);

impl Tree {
    pub fn new(g: Graph) -> Result<Self, GraphError> {
        if g.n == 0 {
            return Err(GraphError::NotATree("no vertices"));
        }
        if g.m() != g.n - 1 {
            return Err(GraphError::NotATree("edge count is not n - 1"));
        }
        if !g.is_unit_weight() {
            return Err(GraphError::NotATree("edge weights must all be 1"));
        }
        if !g.is_connected() {
            return Err(GraphError::NotATree("disconnected"));
        }
        Ok(Tree(g))
    }

    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        Self::new(Graph::from_pairs(n, pairs)?)
    }

    /// Tree from a parent array; `parent[root]` is ignored and must be the
    /// only vertex without a parent.
    pub fn from_parents(parent: &[Option<usize>]) -> Result<Self, GraphError> {
        let pairs = parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (p, v)));
        Self::from_pairs(parent.len(), pairs)
    }

    pub fn path(n: usize) -> Self {
        Self::from_pairs(n, (1..n).map(|v| (v - 1, v))).expect("path is a tree")
    }

    /// Star with centre 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Self::from_pairs(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star is a tree")
    }

    pub fn graph(&self) -> &Graph {
        &self.0
    }

    pub fn into_graph(self) -> Graph {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.adj[v].iter().map(|&(u, _)| u)
    }
}

impl AsRef<Graph> for Tree {
    fn as_ref(&self) -> &Graph {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Io(String),
    MissingHeader,
    BadHeader(String),
    Malformed(String),
    DuplicateEdge(usize, usize),
    SelfLoop(usize),
    VertexOutOfRange(i64),
    NegativeWeight(String),
    EdgeCount { declared: usize, found: usize },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Io(e) => write!(f, "read error: {e}"),
            ParseErrorKind::MissingHeader => write!(f, "missing \"n m\" header"),
            ParseErrorKind::BadHeader(s) => write!(f, "bad header {s:?}, expected \"n m\""),
            ParseErrorKind::Malformed(s) => write!(f, "malformed edge line {s:?}"),
            ParseErrorKind::DuplicateEdge(u, v) => write!(f, "duplicate edge {u}-{v}"),
            ParseErrorKind::SelfLoop(u) => write!(f, "self-loop at vertex {u}"),
            ParseErrorKind::VertexOutOfRange(v) => write!(f, "vertex {v} out of range"),
            ParseErrorKind::NegativeWeight(s) => write!(f, "negative weight {s}"),
            ParseErrorKind::EdgeCount { declared, found } => {
                write!(f, "header declares {declared} edges but {found} were given")
            }
        }
    }
}

/// Parses the `n m` + edge-lines format. With `weighted`, every edge line
/// carries a third weight column; otherwise weights are 1. Blank lines are
/// ignored.
pub fn parse_edge_list<R: BufRead>(reader: R, weighted: bool) -> Result<Graph, ParseError> {
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(ParseError {
            line: i + 1,
            kind: ParseErrorKind::Io(e.to_string()),
        })),
    });

    let (hline, header) = match lines.next() {
        Some(r) => r?,
        None => {
            return Err(ParseError {
                line: 1,
                kind: ParseErrorKind::MissingHeader,
            })
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, m) = match fields[..] {
        [a, b] => match (a.parse::<usize>(), b.parse::<usize>()) {
            (Ok(n), Ok(m)) => (n, m),
            _ => {
                return Err(ParseError {
                    line: hline,
                    kind: ParseErrorKind::BadHeader(header.clone()),
                })
            }
        },
        _ => {
            return Err(ParseError {
                line: hline,
                kind: ParseErrorKind::BadHeader(header.clone()),
            })
        }
    };

    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    let mut last_line = hline;
    for item in lines {
        let (line, text) = item?;
        last_line = line;
        let err = |kind| ParseError { line, kind };
        let fields: Vec<&str> = text.split_whitespace().collect();
        let expected = if weighted { 3 } else { 2 };
        if fields.len() != expected {
            return Err(err(ParseErrorKind::Malformed(text.clone())));
        }
        let mut ids = [0usize; 2];
        for (slot, f) in ids.iter_mut().zip(&fields) {
            let id = f
                .parse::<i64>()
                .map_err(|_| err(ParseErrorKind::Malformed(text.clone())))?;
            if id < 0 || id as u64 >= n as u64 {
                return Err(err(ParseErrorKind::VertexOutOfRange(id)));
            }
            *slot = id as usize;
        }
        let w = if weighted {
            let f = fields[2];
            match f.parse::<u64>() {
                Ok(w) => w,
                Err(_) if f.starts_with('-') && f[1..].parse::<u64>().is_ok() => {
                    return Err(err(ParseErrorKind::NegativeWeight(f.to_string())))
                }
                Err(_) => return Err(err(ParseErrorKind::Malformed(text.clone()))),
            }
        } else {
            1
        };
        let [u, v] = ids;
        if u == v {
            return Err(err(ParseErrorKind::SelfLoop(u)));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(err(ParseErrorKind::DuplicateEdge(u, v)));
        }
        edges.push(Edge { u, v, w });
    }
    if edges.len() != m {
        return Err(ParseError {
            line: last_line,
            kind: ParseErrorKind::EdgeCount {
                declared: m,
                found: edges.len(),
            },
        });
    }
    Ok(Graph::new(n, edges).expect("edges validated while parsing"))
}

/// Parses an edge list from a string. Unweighted unless `weighted`.
pub fn parse_edge_list_str(text: &str, weighted: bool) -> Result<Graph, ParseError> {
    parse_edge_list(text.as_bytes(), weighted)
}

/// Writes the graph in the edge-list format, with weights if any edge is not
/// unit weight.
pub fn write_edge_list(g: &Graph) -> String {
    use std::fmt::Write;
    let weighted = !g.is_unit_weight();
    let mut out = format!("{} {}\n", g.n(), g.m());
    for e in g.edges() {
        if weighted {
            writeln!(out, "{} {} {}", e.u, e.v, e.w).unwrap();
        } else {
            writeln!(out, "{} {}", e.u, e.v).unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("source vertex {source_vertex} out of range for {n} vertices")]
pub struct SourceOutOfRange {
    pub source_vertex: usize,
    pub n: usize,
}

/// Hop distances from `source`, ignoring edge weights.
pub fn bfs_distances(g: &Graph, source: usize) -> Result<Vec<Distance>, SourceOutOfRange> {
    if source >= g.n {
        return Err(SourceOutOfRange {
            source_vertex: source,
            n: g.n,
        });
    }
    let mut dist = vec![None; g.n];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &(v, _) in &g.adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Weighted shortest-path distances from `source`.
pub fn dijkstra_distances(g: &Graph, source: usize) -> Result<Vec<Distance>, SourceOutOfRange> {
    if source >= g.n {
        return Err(SourceOutOfRange {
            source_vertex: source,
            n: g.n,
        });
    }
    Ok(dijkstra_adj(&g.adj, source))
}

pub(crate) fn dijkstra_adj(adj: &[Vec<(usize, u64)>], source: usize) -> Vec<Distance> {
    let mut dist: Vec<Distance> = vec![None; adj.len()];
    let mut done = vec![false; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(0);
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if dist[v].is_none_or(|old| nd < old) {
                dist[v] = Some(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_path() {
        let g = parse_edge_list_str("3 2\n0 1\n1 2", false).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 2);
        assert!(Tree::new(g).is_ok());
    }

    #[test]
    fn parses_isolated_vertex() {
        let g = parse_edge_list_str("1 0", false).unwrap();
        assert_eq!((g.n(), g.m()), (1, 0));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = parse_edge_list_str("3 2\n0 1\n0 1", false).unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.kind, ParseErrorKind::DuplicateEdge(0, 1));

        let e = parse_edge_list_str("3 2\n0 1\n1 0", false).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateEdge(1, 0));

        let e = parse_edge_list_str("3 1\n2 2", false).unwrap_err();
        assert_eq!((e.line, e.kind), (2, ParseErrorKind::SelfLoop(2)));

        let e = parse_edge_list_str("3 1\n0 3", false).unwrap_err();
        assert_eq!((e.line, e.kind), (2, ParseErrorKind::VertexOutOfRange(3)));

        let e = parse_edge_list_str("3 1\n-1 2", false).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::VertexOutOfRange(-1));

        let e = parse_edge_list_str("3 1\n0 1 -2", true).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NegativeWeight("-2".into()));

        let e = parse_edge_list_str("3 1\n0 x", false).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Malformed(_)));

        let e = parse_edge_list_str("3 2\n0 1", false).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::EdgeCount { declared: 2, found: 1 }));

        let e = parse_edge_list_str("", false).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingHeader);

        let e = parse_edge_list_str("3\n", false).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::BadHeader(_)));
    }

    #[test]
    fn weighted_parse_keeps_weights() {
        let g = parse_edge_list_str("2 1\n0 1 7\n", true).unwrap();
        assert_eq!(g.edges()[0].w, 7);
        assert_eq!(parse_edge_list_str(&write_edge_list(&g), true).unwrap(), g);
    }

    #[test]
    fn bfs_examples() {
        let p = Tree::path(3);
        assert_eq!(
            bfs_distances(p.graph(), 0).unwrap(),
            vec![Some(0), Some(1), Some(2)]
        );
        let two = Graph::from_pairs(2, []).unwrap();
        assert_eq!(bfs_distances(&two, 0).unwrap(), vec![Some(0), None]);
        let star = Tree::star(3);
        assert_eq!(
            bfs_distances(star.graph(), 0).unwrap(),
            vec![Some(0), Some(1), Some(1), Some(1)]
        );
        assert!(bfs_distances(&two, 2).is_err());
    }

    #[test]
    fn dijkstra_examples() {
        let tri = Graph::new(
            3,
            [
                Edge { u: 0, v: 1, w: 1 },
                Edge { u: 1, v: 2, w: 1 },
                Edge { u: 0, v: 2, w: 3 },
            ],
        )
        .unwrap();
        assert_eq!(
            dijkstra_distances(&tri, 0).unwrap(),
            vec![Some(0), Some(1), Some(2)]
        );
        let zero = Graph::new(2, [Edge { u: 0, v: 1, w: 0 }]).unwrap();
        assert_eq!(dijkstra_distances(&zero, 0).unwrap(), vec![Some(0), Some(0)]);
        assert!(dijkstra_distances(&zero, 5).is_err());
    }

    #[test]
    fn tree_validation() {
        assert!(Tree::from_pairs(3, [(0, 1)]).is_err());
        assert!(Tree::from_pairs(4, [(0, 1), (1, 2), (0, 2)]).is_err());
        assert!(Tree::new(Graph::new(2, [Edge { u: 0, v: 1, w: 2 }]).unwrap()).is_err());
        assert!(Tree::from_pairs(1, []).is_ok());
    }

    #[test]
    fn induced_subgraph_relabels() {
        let p = Tree::path(5);
        let (g, old) = p.graph().induced_subgraph(&[true, true, false, true, true]);
        assert_eq!(old, vec![0, 1, 3, 4]);
        assert_eq!(g.m(), 2);
        assert_eq!(g.components().1, 2);
    }
}
