//! Tree decompositions and the distance-distribution prefix for graphs of
//! bounded treewidth.
//!
//! The prefix computation works on a nice decomposition. It splits the
//! decomposition at a balanced edge `(i, j)`. `A` is the set of vertices
//! appearing in the bags on `i`'s side, and the separator is
//! `S = B_i ∩ B_j`. Each side is solved recursively after turning `S` into a
//! clique weighted by shortest-path distances. Pairs inside `S` are then
//! subtracted once. Pairs that cross the separator are attributed to the
//! first separator vertex on a shortest path and counted through
//! [`redblue`](crate::redblue) instances.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::checks;
use crate::distribution::DistanceDistribution;
use crate::graph::{dijkstra_adj, Distance, Graph};
use crate::poly::{poly_mul, CoeffPoly};
use crate::redblue::{redblue_solve, Point, RedBlueInstance};

/// Bags over the vertices `0..n` and the edges of the decomposition tree.
/// Nodes are `0..bags.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("decomposition line {line}: {message}")]
pub struct TdParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("decomposition has no nodes but the graph has {n} vertices")]
    Empty { n: usize },
    #[error("decomposition tree: {0}")]
    NotATree(String),
    #[error("bag {node} contains vertex {vertex}, which is out of range")]
    VertexOutOfRange { node: usize, vertex: usize },
    #[error("bag {node} lists vertex {vertex} twice")]
    RepeatedVertex { node: usize, vertex: usize },
    #[error("vertex coverage: vertex {vertex} is in no bag")]
    UncoveredVertex { vertex: usize },
    #[error("edge coverage: no bag contains edge {u}-{v}")]
    UncoveredEdge { u: usize, v: usize },
    #[error("coherence: the bags containing vertex {vertex} are not connected")]
    Incoherent { vertex: usize },
}

impl TreeDecomposition {
    pub fn new(bags: Vec<Vec<usize>>, edges: Vec<(usize, usize)>) -> Self {
        TreeDecomposition { bags, edges }
    }

    /// One bag holding every vertex.
    pub fn single_bag(n: usize) -> Self {
        TreeDecomposition {
            bags: vec![(0..n).collect()],
            edges: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }

    /// Largest bag size minus one (0 for a decomposition of empty bags).
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    /// Reads the text format: a header `I width`, then `I` lines of bag
    /// vertices (0-based, a blank line is an empty bag), then `I - 1` lines
    /// `a b` joining nodes, numbered from 1.
    pub fn parse(text: &str) -> Result<Self, TdParseError> {
        let err = |line: usize, message: String| TdParseError { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (hl, header) = loop {
            match lines.next() {
                Some((_, l)) if l.is_empty() || l.starts_with('#') => continue,
                Some(x) => break x,
                None => return Err(err(1, "missing header".into())),
            }
        };
        let head: Vec<&str> = header.split_whitespace().collect();
        let [count, width] = head[..] else {
            return Err(err(hl, "header must be `nodes width`".into()));
        };
        let count: usize = count
            .parse()
            .map_err(|_| err(hl, format!("bad node count `{count}`")))?;
        let width: usize = width
            .parse()
            .map_err(|_| err(hl, format!("bad width `{width}`")))?;
        let mut bags = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| err(hl, format!("expected {count} bag lines")))?;
            let bag = l
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| err(ln, format!("bad vertex `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            bags.push(bag);
        }
        let mut edges = Vec::with_capacity(count.saturating_sub(1));
        let mut last = hl;
        for (ln, l) in lines {
            last = ln;
            if l.is_empty() {
                continue;
            }
            let parts: Vec<&str> = l.split_whitespace().collect();
            let [a, b] = parts[..] else {
                return Err(err(ln, "edge line must be `a b`".into()));
            };
            let node = |t: &str| match t.parse::<usize>() {
                Ok(x) if (1..=count).contains(&x) => Ok(x - 1),
                _ => Err(err(ln, format!("bad node id `{t}`"))),
            };
            edges.push((node(a)?, node(b)?));
        }
        if edges.len() != count.saturating_sub(1) {
            return Err(err(
                last,
                format!("expected {} tree edges, found {}", count.saturating_sub(1), edges.len()),
            ));
        }
        let td = TreeDecomposition { bags, edges };
        if count > 0 && td.width() != width {
            return Err(err(
                hl,
                format!("declared width {width} but the largest bag gives {}", td.width()),
            ));
        }
        Ok(td)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.bags.len(), self.width());
        for bag in &self.bags {
            let line: Vec<String> = bag.iter().map(ToString::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        for &(a, b) in &self.edges {
            writeln!(out, "{} {}", a + 1, b + 1).unwrap();
        }
        out
    }
}

/// Checks vertex coverage, edge coverage and coherence, and that the nodes
/// form a tree. Returns the width.
pub fn validate_decomposition(g: &Graph, td: &TreeDecomposition) -> Result<usize, DecompositionError> {
    let edges = g.edges().iter().map(|e| (e.u, e.v));
    validate_parts(g.n(), edges, &td.bags, &td.edges)
}

fn validate_parts(
    n: usize,
    graph_edges: impl Iterator<Item = (usize, usize)>,
    bags: &[Vec<usize>],
    tree_edges: &[(usize, usize)],
) -> Result<usize, DecompositionError> {
    let nodes = bags.len();
    if nodes == 0 {
        return if n == 0 { Ok(0) } else { Err(DecompositionError::Empty { n }) };
    }
    if tree_edges.len() != nodes - 1 {
        return Err(DecompositionError::NotATree(format!(
            "{} nodes need {} edges, found {}",
            nodes,
            nodes - 1,
            tree_edges.len()
        )));
    }
    let mut uf = UnionFind::new(nodes);
    for &(a, b) in tree_edges {
        if a >= nodes || b >= nodes {
            return Err(DecompositionError::NotATree(format!("edge {a}-{b} names a missing node")));
        }
        if !uf.union(a, b) {
            return Err(DecompositionError::NotATree(format!("edge {a}-{b} closes a cycle")));
        }
    }
    let mut sorted: Vec<Vec<usize>> = Vec::with_capacity(nodes);
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (node, bag) in bags.iter().enumerate() {
        let mut b = bag.clone();
        b.sort_unstable();
        for w in b.windows(2) {
            if w[0] == w[1] {
                return Err(DecompositionError::RepeatedVertex { node, vertex: w[0] });
            }
        }
        for &v in &b {
            if v >= n {
                return Err(DecompositionError::VertexOutOfRange { node, vertex: v });
            }
            holders[v].push(node);
        }
        sorted.push(b);
    }
    if let Some(vertex) = (0..n).find(|&v| holders[v].is_empty()) {
        return Err(DecompositionError::UncoveredVertex { vertex });
    }
    for (u, v) in graph_edges {
        let (a, b) = if holders[u].len() <= holders[v].len() { (u, v) } else { (v, u) };
        if !holders[a].iter().any(|&x| sorted[x].binary_search(&b).is_ok()) {
            return Err(DecompositionError::UncoveredEdge { u: u.min(v), v: u.max(v) });
        }
    }
    // Nodes holding a vertex induce a forest; it is connected exactly when it
    // has one edge fewer than nodes.
    let mut shared = vec![0usize; n];
    for &(a, b) in tree_edges {
        for v in intersect(&sorted[a], &sorted[b]) {
            shared[v] += 1;
        }
    }
    if let Some(vertex) = (0..n).find(|&v| shared[v] + 1 != holders[v].len()) {
        return Err(DecompositionError::Incoherent { vertex });
    }
    Ok(sorted.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// Vertices of degree above this get their fill estimated as `d(d-1)/2`
/// rather than counted.
const FILL_DEGREE_CAP: usize = 64;

/// Decomposition from a greedy minimum-fill elimination order (ties by
/// degree, then vertex id). Disconnected graphs get one subtree per
/// component, chained together.
pub fn heuristic_decomposition(g: &Graph) -> TreeDecomposition {
    let n = g.n();
    if n == 0 {
        return TreeDecomposition::new(Vec::new(), Vec::new());
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|v| g.neighbors(v).iter().map(|&(u, _)| u).collect())
        .collect();
    let fill = |adj: &[BTreeSet<usize>], v: usize| -> usize {
        let d = adj[v].len();
        if d > FILL_DEGREE_CAP {
            return d * (d - 1) / 2;
        }
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        let mut missing = 0;
        for (i, &x) in nb.iter().enumerate() {
            missing += nb[i + 1..].iter().filter(|y| !adj[x].contains(y)).count();
        }
        missing
    };
    let mut key: Vec<(usize, usize)> = (0..n).map(|v| (fill(&adj, v), adj[v].len())).collect();
    let mut queue: BTreeSet<(usize, usize, usize)> = (0..n).map(|v| (key[v].0, key[v].1, v)).collect();
    let mut position = vec![usize::MAX; n];
    let mut elim_nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut step = 0;
    while let Some((_, _, v)) = queue.pop_first() {
        position[v] = step;
        step += 1;
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        let mut added = false;
        for (i, &x) in nb.iter().enumerate() {
            adj[x].remove(&v);
            for &y in &nb[i + 1..] {
                if adj[x].insert(y) {
                    adj[y].insert(x);
                    added = true;
                }
            }
        }
        let mut touched: BTreeSet<usize> = nb.iter().copied().collect();
        if added {
            for &x in &nb {
                touched.extend(adj[x].iter().copied());
            }
        }
        for x in touched {
            if position[x] != usize::MAX {
                continue;
            }
            queue.remove(&(key[x].0, key[x].1, x));
            key[x] = (fill(&adj, x), adj[x].len());
            queue.insert((key[x].0, key[x].1, x));
        }
        elim_nbrs[v] = nb;
    }
    let bags: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut b = elim_nbrs[v].clone();
            b.push(v);
            b.sort_unstable();
            b
        })
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    let mut roots = Vec::new();
    for v in 0..n {
        match elim_nbrs[v].iter().min_by_key(|&&u| position[u]) {
            Some(&parent) => edges.push((parent, v)),
            None => roots.push(v),
        }
    }
    for w in roots.windows(2) {
        edges.push((w[0], w[1]));
    }
    TreeDecomposition { bags, edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NiceKind {
    Leaf,
    Introduce(usize),
    Forget(usize),
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceNode {
    pub kind: NiceKind,
    /// Sorted.
    pub bag: Vec<usize>,
    pub children: Vec<usize>,
}

/// Rooted nice decomposition. Leaves have empty bags; the root keeps the bag
/// of the root of the decomposition it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceDecomposition {
    pub nodes: Vec<NiceNode>,
    pub root: usize,
}

/// Node-count constant: a nice decomposition of width `w` over `n >= 1`
/// vertices has at most `NICE_NODE_FACTOR * (w + 1) * n` nodes.
pub const NICE_NODE_FACTOR: usize = 5;

impl NiceDecomposition {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn width(&self) -> usize {
        self.nodes.iter().map(|x| x.bag.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn to_tree_decomposition(&self) -> TreeDecomposition {
        let bags = self.nodes.iter().map(|x| x.bag.clone()).collect();
        let edges = self
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(p, x)| x.children.iter().map(move |&c| (p, c)))
            .collect();
        TreeDecomposition { bags, edges }
    }

    /// Checks the local rules for each node kind.
    pub fn check_nice(&self) -> Result<(), String> {
        for (id, node) in self.nodes.iter().enumerate() {
            let kids: Vec<&NiceNode> = node.children.iter().map(|&c| &self.nodes[c]).collect();
            let ok = match (node.kind, kids.as_slice()) {
                (NiceKind::Leaf, []) => node.bag.is_empty(),
                (NiceKind::Introduce(v), [c]) => {
                    c.bag.binary_search(&v).is_err() && with(&c.bag, v) == node.bag
                }
                (NiceKind::Forget(v), [c]) => {
                    c.bag.binary_search(&v).is_ok() && without(&c.bag, v) == node.bag
                }
                (NiceKind::Join, [a, b]) => a.bag == node.bag && b.bag == node.bag,
                _ => false,
            };
            if !ok {
                return Err(format!("node {id} ({:?}) breaks its rule", node.kind));
            }
        }
        Ok(())
    }
}

fn with(bag: &[usize], v: usize) -> Vec<usize> {
    let mut b = bag.to_vec();
    let at = b.binary_search(&v).unwrap_or_else(|x| x);
    b.insert(at, v);
    b
}

fn without(bag: &[usize], v: usize) -> Vec<usize> {
    bag.iter().copied().filter(|&x| x != v).collect()
}

/// Converts a valid decomposition into a nice one of the same width.
///
/// Bags contained in a neighbouring bag are merged away first, which leaves
/// at most `n` nodes. The first surviving node becomes the root.
pub fn make_nice(td: &TreeDecomposition) -> NiceDecomposition {
    let count = td.bags.len();
    let leaf = NiceNode {
        kind: NiceKind::Leaf,
        bag: Vec::new(),
        children: Vec::new(),
    };
    if count == 0 {
        return NiceDecomposition { nodes: vec![leaf], root: 0 };
    }
    let mut bags: Vec<Vec<usize>> = td
        .bags
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b
        })
        .collect();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); count];
    for &(a, b) in &td.edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut alive = vec![true; count];
    let mut work: Vec<(usize, usize)> = td.edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
    work.reverse();
    while let Some((a, b)) = work.pop() {
        if !alive[a] || !alive[b] || !adj[a].contains(&b) || !is_subset(&bags[a], &bags[b]) {
            continue;
        }
        alive[a] = false;
        let others: Vec<usize> = adj[a].iter().copied().filter(|&c| c != b).collect();
        adj[b].remove(&a);
        for c in others {
            adj[c].remove(&a);
            adj[c].insert(b);
            adj[b].insert(c);
            work.push((b, c));
            work.push((c, b));
        }
        adj[a].clear();
        bags[a].clear();
    }
    let root = (0..count).find(|&x| alive[x]).unwrap();
    // Preorder with parents, then build bottom-up.
    let mut order = Vec::new();
    let mut parent = vec![usize::MAX; count];
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        order.push(x);
        for &c in adj[x].iter().rev() {
            if c != parent[x] {
                parent[c] = x;
                stack.push(c);
            }
        }
    }
    let mut nodes: Vec<NiceNode> = Vec::new();
    let push = |nodes: &mut Vec<NiceNode>, kind: NiceKind, bag: Vec<usize>, children: Vec<usize>| {
        nodes.push(NiceNode { kind, bag, children });
        nodes.len() - 1
    };
    let chain = |nodes: &mut Vec<NiceNode>, mut top: usize, target: &[usize]| {
        let from = nodes[top].bag.clone();
        let mut bag = from.clone();
        for &v in from.iter().filter(|v| target.binary_search(v).is_err()) {
            bag = without(&bag, v);
            top = push(nodes, NiceKind::Forget(v), bag.clone(), vec![top]);
        }
        for &v in target.iter().filter(|v| from.binary_search(v).is_err()) {
            bag = with(&bag, v);
            top = push(nodes, NiceKind::Introduce(v), bag.clone(), vec![top]);
        }
        top
    };
    let mut top = vec![usize::MAX; count];
    for &x in order.iter().rev() {
        let kids: Vec<usize> = adj[x].iter().copied().filter(|&c| c != parent[x]).collect();
        let mut tops: Vec<usize> = if kids.is_empty() {
            let l = push(&mut nodes, NiceKind::Leaf, Vec::new(), Vec::new());
            vec![chain(&mut nodes, l, &bags[x])]
        } else {
            kids.iter().map(|&c| chain(&mut nodes, top[c], &bags[x])).collect()
        };
        let mut acc = tops.remove(0);
        for t in tops {
            acc = push(&mut nodes, NiceKind::Join, bags[x].clone(), vec![acc, t]);
        }
        top[x] = acc;
    }
    let nd = NiceDecomposition { root: top[root], nodes };
    if checks::enabled() {
        nd.check_nice().expect("nice construction");
        let n = td.bags.iter().flatten().copied().max().map_or(0, |v| v + 1);
        assert!(nd.len() <= NICE_NODE_FACTOR * (nd.width() + 1) * n.max(1));
    }
    nd
}

/// A decomposition-tree edge `(i, j)`, `j` a child of `i`, whose removal
/// leaves between `N/3` and `2N/3` nodes on each side. The first such edge
/// in preorder (children in stored order) is returned. If no edge meets the
/// bounds, the most balanced edge is returned instead.
pub fn balanced_edge(nd: &NiceDecomposition) -> (usize, usize) {
    let children: Vec<Vec<usize>> = nd.nodes.iter().map(|x| x.children.clone()).collect();
    split_edge(&children, nd.root)
}

fn split_edge(children: &[Vec<usize>], root: usize) -> (usize, usize) {
    let total = children.len();
    assert!(total >= 2, "a split needs at least two nodes");
    let mut order = Vec::with_capacity(total);
    let mut parent = vec![usize::MAX; total];
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        order.push(x);
        for &c in children[x].iter().rev() {
            parent[c] = x;
            stack.push(c);
        }
    }
    let mut size = vec![1usize; total];
    for &x in order.iter().rev() {
        if parent[x] != usize::MAX {
            size[parent[x]] += size[x];
        }
    }
    let first = order[1..]
        .iter()
        .find(|&&x| 3 * size[x] >= total && 3 * size[x] <= 2 * total);
    let j = match first {
        Some(&x) => x,
        None => *order[1..]
            .iter()
            .min_by_key(|&&x| size[x].max(total - size[x]))
            .unwrap(),
    };
    (parent[j], j)
}

/// Exact counts of vertex pairs at each distance `1..=p`.
///
/// A supplied decomposition is validated first; without one the min-fill
/// heuristic is used.
pub fn tw_distance_prefix(
    g: &Graph,
    td: Option<&TreeDecomposition>,
    p: u64,
) -> Result<DistanceDistribution, DecompositionError> {
    prefix_impl(g, td, p, false)
}

/// With `eager`, small graphs are still split until at most three nodes are
/// left, so tests reach the separator logic on tiny inputs.
fn prefix_impl(
    g: &Graph,
    td: Option<&TreeDecomposition>,
    p: u64,
    eager: bool,
) -> Result<DistanceDistribution, DecompositionError> {
    let td = match td {
        Some(td) => {
            validate_decomposition(g, td)?;
            td.clone()
        }
        None => heuristic_decomposition(g),
    };
    let mut out = DistanceDistribution::new(g.n());
    if g.n() < 2 || p == 0 {
        return Ok(out);
    }
    // No shortest path is longer than the total weight, so p can be capped.
    let total: u64 = g.edges().iter().fold(0u64, |a, e| a.saturating_add(e.w));
    let p = p.min(total);
    assert!(p < 1 << 60, "prefix bound too large");
    let nd = make_nice(&td);
    let adj: Vec<Vec<(usize, u64)>> = (0..g.n()).map(|v| g.neighbors(v).to_vec()).collect();
    let children: Vec<Vec<usize>> = nd.nodes.iter().map(|x| x.children.clone()).collect();
    let bags: Vec<Vec<usize>> = nd.nodes.iter().map(|x| x.bag.clone()).collect();
    let keep = vec![true; bags.len()];
    let sub = Sub::restrict(&adj, &bags, &children, nd.root, &keep, &vec![true; g.n()], &[]).0;
    for (d, c) in solve(sub, p, eager) {
        out.add(d, c);
    }
    Ok(out)
}

/// A graph with a rooted decomposition whose root is node 0.
struct Sub {
    adj: Vec<Vec<(usize, u64)>>,
    bags: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Sub {
    /// The part of a decomposition on the nodes marked in `nodes` (a subtree
    /// containing `root`) over the vertices marked in `verts`, with `extra`
    /// edges added. Returns the sub-instance and its vertex ids in the parent.
    fn restrict(
        adj: &[Vec<(usize, u64)>],
        bags: &[Vec<usize>],
        children: &[Vec<usize>],
        root: usize,
        nodes: &[bool],
        verts: &[bool],
        extra: &[(usize, usize, u64)],
    ) -> (Sub, Vec<usize>) {
        let mut local = vec![usize::MAX; adj.len()];
        let mut old = Vec::new();
        for v in 0..adj.len() {
            if verts[v] {
                local[v] = old.len();
                old.push(v);
            }
        }
        let mut edges: Vec<(usize, usize, u64)> = Vec::new();
        for &u in &old {
            for &(v, w) in &adj[u] {
                if u < v && verts[v] {
                    edges.push((local[u], local[v], w));
                }
            }
        }
        for &(u, v, w) in extra {
            let (a, b) = (local[u].min(local[v]), local[u].max(local[v]));
            edges.push((a, b, w));
        }
        edges.sort_unstable();
        edges.dedup_by_key(|e| (e.0, e.1));
        let mut new_adj = vec![Vec::new(); old.len()];
        for (u, v, w) in edges {
            new_adj[u].push((v, w));
            new_adj[v].push((u, w));
        }
        let mut node_id = HashMap::new();
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            node_id.insert(x, order.len());
            order.push(x);
            for &c in children[x].iter().rev() {
                if nodes[c] {
                    stack.push(c);
                }
            }
        }
        let new_bags = order
            .iter()
            .map(|&x| {
                let mut b: Vec<usize> = bags[x].iter().map(|&v| local[v]).collect();
                b.sort_unstable();
                b
            })
            .collect();
        let new_children = order
            .iter()
            .map(|&x| children[x].iter().filter(|&&c| nodes[c]).map(|c| node_id[c]).collect())
            .collect();
        let sub = Sub {
            adj: new_adj,
            bags: new_bags,
            children: new_children,
        };
        (sub, old)
    }

    /// Re-rooted copy of this decomposition restricted to `nodes`, rooted at
    /// `root`, which need not be node 0.
    fn reroot(&self, root: usize, nodes: &[bool]) -> Vec<Vec<usize>> {
        let mut undirected = vec![Vec::new(); self.children.len()];
        for (p, cs) in self.children.iter().enumerate() {
            for &c in cs {
                if nodes[p] && nodes[c] {
                    undirected[p].push(c);
                    undirected[c].push(p);
                }
            }
        }
        let mut directed = vec![Vec::new(); self.children.len()];
        let mut seen = vec![false; self.children.len()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(x) = stack.pop() {
            for &c in &undirected[x] {
                if !seen[c] {
                    seen[c] = true;
                    directed[x].push(c);
                    stack.push(c);
                }
            }
        }
        directed
    }
}

type Counts = HashMap<u64, i128>;

fn add_count(c: &mut Counts, d: u64, k: i128) {
    if d > 0 && k != 0 {
        *c.entry(d).or_insert(0) += k;
    }
}

fn solve(sub: Sub, p: u64, eager: bool) -> Vec<(u64, u64)> {
    let mut counts = solve_rec(sub, p, eager);
    counts.retain(|_, c| *c != 0);
    let mut out: Vec<(u64, u64)> = counts
        .into_iter()
        .map(|(d, c)| (d, u64::try_from(c).expect("pair counts are non-negative")))
        .collect();
    out.sort_unstable();
    out
}

fn solve_rec(sub: Sub, p: u64, eager: bool) -> Counts {
    let n = sub.adj.len();
    let nodes = sub.bags.len();
    let k = sub.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1);
    if (!eager && n <= 2 * (k + 2)) || nodes <= 3 {
        return all_pairs(&sub.adj, p);
    }
    let (i, j) = split_edge(&sub.children, 0);
    let mut in_j = vec![false; nodes];
    let mut stack = vec![j];
    while let Some(x) = stack.pop() {
        in_j[x] = true;
        stack.extend(sub.children[x].iter().copied());
    }
    let in_i: Vec<bool> = in_j.iter().map(|&b| !b).collect();
    let mut in_a = vec![false; n];
    for x in (0..nodes).filter(|&x| in_i[x]) {
        for &v in &sub.bags[x] {
            in_a[v] = true;
        }
    }
    let sep = intersect(&sub.bags[i], &sub.bags[j]);
    let mut in_s = vec![false; n];
    for &s in &sep {
        in_s[s] = true;
    }
    if checks::enabled() {
        for a in (0..n).filter(|&a| in_a[a]) {
            if sub.adj[a].iter().any(|&(b, _)| !in_a[b]) {
                assert!(in_s[a], "vertex {a} has a neighbour outside A but is not in S");
            }
        }
    }
    let dist: Vec<Vec<Distance>> = sep.par_iter().map(|&s| dijkstra_adj(&sub.adj, s)).collect();
    let mut clique = Vec::new();
    let mut inside = Counts::new();
    for x in 0..sep.len() {
        for y in x + 1..sep.len() {
            if let Some(d) = dist[x][sep[y]] {
                clique.push((sep[x], sep[y], d));
                if d <= p {
                    add_count(&mut inside, d, -1);
                }
            }
        }
    }
    let keep_b: Vec<bool> = (0..n).map(|v| !in_a[v] || in_s[v]).collect();
    let (left, _) = Sub::restrict(&sub.adj, &sub.bags, &sub.children, 0, &in_i, &in_a, &clique);
    let j_children = sub.reroot(j, &in_j);
    let (right, _) = Sub::restrict(&sub.adj, &sub.bags, &j_children, j, &in_j, &keep_b, &clique);
    if checks::enabled() {
        for child in [&left, &right] {
            let edges = child
                .adj
                .iter()
                .enumerate()
                .flat_map(|(u, nb)| nb.iter().filter(move |e| u < e.0).map(move |e| (u, e.0)));
            let tree_edges: Vec<(usize, usize)> = child
                .children
                .iter()
                .enumerate()
                .flat_map(|(x, cs)| cs.iter().map(move |&c| (x, c)))
                .collect();
            validate_parts(child.adj.len(), edges, &child.bags, &tree_edges)
                .expect("child decomposition stays valid");
        }
    }
    let reds: Vec<usize> = (0..n).filter(|&v| in_a[v] && !in_s[v]).collect();
    let blues: Vec<usize> = (0..n).filter(|&v| !in_a[v]).collect();
    let ((mut total, right_counts), cross) = rayon::join(
        || rayon::join(|| solve_rec(left, p, eager), || solve_rec(right, p, eager)),
        || cross_pairs(&dist, &reds, &blues, p, n),
    );
    for (d, c) in right_counts.into_iter().chain(inside).chain(cross) {
        add_count(&mut total, d, c);
    }
    total
}

fn all_pairs(adj: &[Vec<(usize, u64)>], p: u64) -> Counts {
    let n = adj.len();
    let rows: Vec<Counts> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut c = Counts::new();
            for d in dijkstra_adj(adj, u).into_iter().skip(u + 1).flatten() {
                if d <= p {
                    add_count(&mut c, d, 1);
                }
            }
            c
        })
        .collect();
    let mut out = Counts::new();
    for row in rows {
        for (d, c) in row {
            add_count(&mut out, d, c);
        }
    }
    out
}

/// Red coordinate of `a` for separator vertices `i` and `j`. Coordinates are
/// clamped to `[-(p + 2), p + 2]`: every blue coordinate is at least `-p` and
/// every red one at most `p`, so the clamp keeps all comparisons.
fn red_coord(di: u64, dj: Distance, p: u64) -> i64 {
    let lim = p as i128 + 2;
    match dj {
        Some(dj) => (di as i128 - dj as i128).max(-lim) as i64,
        None => -lim as i64,
    }
}

fn blue_coord(di: u64, dj: Distance, offset: bool, p: u64) -> i64 {
    let lim = p as i128 + 2;
    match dj {
        Some(dj) => (dj as i128 - di as i128 + offset as i128).min(lim) as i64,
        None => lim as i64,
    }
}

/// Pairs `(a, b)` with `a` a red and `b` a blue at distance `<= p`, where
/// every path between them passes through a separator vertex. `dist[i]` holds
/// distances from the `i`-th separator vertex.
fn cross_pairs(dist: &[Vec<Distance>], reds: &[usize], blues: &[usize], p: u64, n: usize) -> Counts {
    let s = dist.len();
    let mut out = Counts::new();
    if s == 0 || reds.is_empty() || blues.is_empty() {
        return out;
    }
    let within = |d: Distance| d.filter(|&x| x <= p);
    let bound = (n as u64).saturating_mul(n as u64);
    let polys: Vec<CoeffPoly> = (0..s)
        .into_par_iter()
        .map(|i| {
            let red_pts: Vec<Point> = reds
                .iter()
                .filter_map(|&a| {
                    let di = within(dist[i][a])?;
                    let x = (0..s).filter(|&j| j != i).map(|j| red_coord(di, dist[j][a], p)).collect();
                    Some(Point::new(x, di))
                })
                .collect();
            let blue_pts: Vec<Point> = blues
                .iter()
                .filter_map(|&b| {
                    let di = within(dist[i][b])?;
                    let x = (0..s)
                        .filter(|&j| j != i)
                        .map(|j| blue_coord(di, dist[j][b], j > i, p))
                        .collect();
                    Some(Point::new(x, di))
                })
                .collect();
            if s == 1 {
                let mut r = CoeffPoly::zero();
                let mut b = CoeffPoly::zero();
                red_pts.iter().for_each(|x| r.add_term(x.value as usize, 1));
                blue_pts.iter().for_each(|x| b.add_term(x.value as usize, 1));
                return poly_mul(&r, &b, bound).expect("pair counts are at most n^2");
            }
            let inst = RedBlueInstance::new(s - 1, red_pts, blue_pts).expect("consistent dimension");
            redblue_solve(&inst).expect("consistent dimension")
        })
        .collect();
    if checks::enabled() && n <= 64 && s > 1 {
        check_unique_association(dist, reds, blues, p);
    }
    for poly in polys {
        for (e, c) in poly.terms() {
            if e as u64 <= p {
                add_count(&mut out, e as u64, c as i128);
            }
        }
    }
    out
}

/// Every cross pair within distance `p` satisfies the inequality system
/// for exactly one separator vertex.
fn check_unique_association(dist: &[Vec<Distance>], reds: &[usize], blues: &[usize], p: u64) {
    let s = dist.len();
    for &a in reds {
        for &b in blues {
            let via = |i: usize| Some(dist[i][a]? + dist[i][b]?);
            let d = (0..s).filter_map(via).min();
            let hits = (0..s)
                .filter(|&i| {
                    let (Some(da), Some(db)) = (dist[i][a], dist[i][b]) else {
                        return false;
                    };
                    if da > p || db > p || da + db > p {
                        return false;
                    }
                    (0..s).filter(|&j| j != i).all(|j| {
                        red_coord(da, dist[j][a], p) < blue_coord(db, dist[j][b], j > i, p)
                    })
                })
                .count();
            let expected = usize::from(d.is_some_and(|d| d <= p));
            assert_eq!(hits, expected, "pair ({a}, {b}) associated with {hits} separator vertices");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::distance_distribution_oracle;
    use crate::generate::{clique, cycle};
    use crate::graph::Tree;

    fn path3() -> Graph {
        Graph::from_pairs(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn validate_examples() {
        let td = TreeDecomposition::new(vec![vec![0, 1], vec![1, 2]], vec![(0, 1)]);
        assert_eq!(validate_decomposition(&path3(), &td), Ok(1));
        let k3 = clique(3);
        assert_eq!(validate_decomposition(&k3, &TreeDecomposition::single_bag(3)), Ok(2));
        let missing = TreeDecomposition::new(vec![vec![0, 1], vec![2]], vec![(0, 1)]);
        assert_eq!(
            validate_decomposition(&path3(), &missing),
            Err(DecompositionError::UncoveredEdge { u: 1, v: 2 })
        );
        let incoherent = TreeDecomposition::new(
            vec![vec![0, 1], vec![2], vec![1, 2]],
            vec![(0, 1), (1, 2)],
        );
        assert_eq!(
            validate_decomposition(&path3(), &incoherent),
            Err(DecompositionError::Incoherent { vertex: 1 })
        );
        let uncovered = TreeDecomposition::new(vec![vec![0, 1]], vec![]);
        assert_eq!(
            validate_decomposition(&path3(), &uncovered),
            Err(DecompositionError::UncoveredVertex { vertex: 2 })
        );
    }

    #[test]
    fn heuristic_widths() {
        let t = Tree::path(20).into_graph();
        assert_eq!(validate_decomposition(&t, &heuristic_decomposition(&t)), Ok(1));
        for n in [3, 4, 9] {
            let c = cycle(n);
            assert_eq!(validate_decomposition(&c, &heuristic_decomposition(&c)), Ok(2));
        }
        let k4 = clique(4);
        assert_eq!(validate_decomposition(&k4, &heuristic_decomposition(&k4)), Ok(3));
    }

    #[test]
    fn nice_examples() {
        let single = make_nice(&TreeDecomposition::single_bag(3));
        assert_eq!(single.len(), 4);
        assert_eq!(single.nodes[single.root].bag, vec![0, 1, 2]);
        assert!(single
            .nodes
            .iter()
            .all(|x| matches!(x.kind, NiceKind::Leaf | NiceKind::Introduce(_))));
        let td = TreeDecomposition::new(vec![vec![0, 1], vec![1, 2]], vec![(0, 1)]);
        let nd = make_nice(&td);
        nd.check_nice().unwrap();
        assert!(nd.nodes.iter().any(|x| matches!(x.kind, NiceKind::Forget(_))));
        assert_eq!(validate_decomposition(&path3(), &nd.to_tree_decomposition()), Ok(1));
    }

    #[test]
    fn balanced_edge_examples() {
        let node = |children: Vec<usize>| NiceNode {
            kind: NiceKind::Join,
            bag: Vec::new(),
            children,
        };
        let two = NiceDecomposition { nodes: vec![node(vec![1]), node(vec![])], root: 0 };
        assert_eq!(balanced_edge(&two), (0, 1));
        let seven = NiceDecomposition {
            nodes: vec![
                node(vec![1, 2]),
                node(vec![3, 4]),
                node(vec![5, 6]),
                node(vec![]),
                node(vec![]),
                node(vec![]),
                node(vec![]),
            ],
            root: 0,
        };
        assert_eq!(balanced_edge(&seven), (0, 1));
    }

    #[test]
    fn cycle_prefix() {
        let c4 = cycle(4);
        let td = TreeDecomposition::new(vec![vec![0, 1, 2], vec![0, 2, 3]], vec![(0, 1)]);
        let d = tw_distance_prefix(&c4, Some(&td), 3).unwrap();
        assert_eq!(d.counts.into_iter().collect::<Vec<_>>(), vec![(1, 4), (2, 2)]);
    }

    #[test]
    fn matches_oracle_on_cycles_and_paths() {
        for g in [cycle(30), Tree::path(40).into_graph(), Tree::star(25).into_graph()] {
            let full = distance_distribution_oracle(&g);
            for p in [1, 3, 100] {
                assert_eq!(tw_distance_prefix(&g, None, p).unwrap(), full.truncated(p));
                assert_eq!(prefix_impl(&g, None, p, true).unwrap(), full.truncated(p));
            }
        }
    }

    #[test]
    fn separator_pairs_counted_once() {
        // Two triangles sharing the edge 2-3, with pendant vertices.
        let g = Graph::from_pairs(6, [(0, 2), (0, 3), (2, 3), (1, 2), (1, 3), (4, 0), (5, 1)]).unwrap();
        let td = TreeDecomposition::new(
            vec![vec![0, 4], vec![0, 2, 3], vec![1, 2, 3], vec![1, 5]],
            vec![(0, 1), (1, 2), (2, 3)],
        );
        let full = distance_distribution_oracle(&g);
        for p in 1..=4 {
            assert_eq!(prefix_impl(&g, Some(&td), p, true).unwrap(), full.truncated(p));
        }
    }

    #[test]
    fn parse_round_trip() {
        let td = TreeDecomposition::new(vec![vec![0, 1, 2], vec![0, 2, 3]], vec![(0, 1)]);
        let text = td.to_text();
        assert_eq!(text, "2 2\n0 1 2\n0 2 3\n1 2\n");
        assert_eq!(TreeDecomposition::parse(&text).unwrap(), td);
        assert!(TreeDecomposition::parse("2 1\n0 1 2\n0 2 3\n1 2\n").is_err());
        assert!(TreeDecomposition::parse("2 2\n0 1 2\n0 2 3\n1 3\n").is_err());
    }
}
