//! Distance distribution of a tree by centroid decomposition.
//!
//! At each level the pairs whose path passes through the centroid `r` are
//! counted from the distance polynomials `P_i(x) = sum x^{d(r, w)}` of the
//! branches hanging off `r` (with `P_0 = 1` for `r` itself):
//!
//! ```text
//! (sum_i P_i)^2 - sum_i P_i^2  =  sum_j b_j x^j,   b_j = 2 * #{pairs at distance j through r}
//! ```
//!
//! The centroid is then deleted and every remaining branch is solved on its
//! own, each relabelled into a compact adjacency array.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::checks;
use crate::distribution::DistanceDistribution;
use crate::graph::Tree;
use crate::poly::{poly_add_assign, poly_square, poly_sub_nonneg, poly_truncate, CoeffPoly};

/// Adjacency of a tree on `0..n` in CSR form.
struct Compact {
    start: Vec<usize>,
    nbr: Vec<u32>,
}

impl Compact {
    fn from_tree(t: &Tree) -> Self {
        let n = t.n();
        let mut start = Vec::with_capacity(n + 1);
        let mut nbr = Vec::with_capacity(2 * (n - 1));
        start.push(0);
        for v in 0..n {
            nbr.extend(t.neighbors(v).map(|u| u as u32));
            start.push(nbr.len());
        }
        Compact { start, nbr }
    }

    fn n(&self) -> usize {
        self.start.len() - 1
    }

    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.nbr[self.start[v]..self.start[v + 1]]
            .iter()
            .map(|&u| u as usize)
    }
}

/// Preorder and parent array of the tree rooted at `root`.
fn rooted_order(c: &Compact, root: usize) -> (Vec<usize>, Vec<usize>) {
    let n = c.n();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![root];
    parent[root] = root;
    while let Some(u) = stack.pop() {
        order.push(u);
        for v in c.neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    (order, parent)
}

fn sizes_from_order(order: &[usize], parent: &[usize]) -> Vec<usize> {
    let mut size = vec![1usize; parent.len()];
    for &u in order.iter().skip(1).rev() {
        size[parent[u]] += size[u];
    }
    size
}

/// Size of the subtree of every vertex when the tree is rooted at `root`.
pub fn subtree_sizes(t: &Tree, root: usize) -> Vec<usize> {
    assert!(root < t.n(), "root {root} out of range");
    let c = Compact::from_tree(t);
    let (order, parent) = rooted_order(&c, root);
    sizes_from_order(&order, &parent)
}

/// Centroids of `c` in increasing id order (one, or two adjacent ones).
fn centroids(c: &Compact) -> Vec<usize> {
    let n = c.n();
    let (order, parent) = rooted_order(c, 0);
    let size = sizes_from_order(&order, &parent);
    let mut best = usize::MAX;
    let mut found = Vec::new();
    for v in 0..n {
        let mut largest = n - size[v];
        for u in c.neighbors(v) {
            if parent[u] == v {
                largest = largest.max(size[u]);
            }
        }
        if largest < best {
            best = largest;
            found.clear();
        }
        if largest == best {
            found.push(v);
        }
    }
    found
}

/// A vertex whose deletion leaves components of at most `n / 2` vertices.
/// When the tree has two centroids the smaller id is returned.
pub fn find_centroid(t: &Tree) -> usize {
    centroids(&Compact::from_tree(t))[0]
}

/// Dense counts of the pairs whose path passes through `r`, plus the BFS data
/// needed to split the tree at `r`: the branch index of every vertex (branch
/// `i` is the subtree of the `i`-th neighbour of `r`) and the vertices in BFS
/// order.
struct Split {
    counts: Vec<u64>,
    branch: Vec<usize>,
    order: Vec<usize>,
    branches: usize,
}

fn split_at(c: &Compact, r: usize, coeff_bound: u64, prefix: Option<usize>) -> Split {
    let n = c.n();
    let mut dist = vec![0usize; n];
    let mut branch = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut branches = 0;
    order.push(r);
    for v in c.neighbors(r) {
        branch[v] = branches;
        dist[v] = 1;
        branches += 1;
        queue.push_back(v);
    }
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for v in c.neighbors(u) {
            if v != r && branch[v] == usize::MAX {
                branch[v] = branch[u];
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }

    let limit = prefix.unwrap_or(usize::MAX);
    let mut per_branch = vec![Vec::<u64>::new(); branches];
    for &v in &order[1..] {
        let d = dist[v];
        if d > limit {
            continue;
        }
        let p = &mut per_branch[branch[v]];
        if p.len() <= d {
            p.resize(d + 1, 0);
        }
        p[d] += 1;
    }

    let mut total = CoeffPoly::one();
    let mut squares = CoeffPoly::one();
    for coeffs in per_branch {
        let p = CoeffPoly::from_coeffs(coeffs);
        poly_add_assign(&mut total, &p);
        let sq = poly_square(&p, coeff_bound).expect("branch mass is at most n");
        poly_add_assign(&mut squares, &truncate(&sq, prefix));
    }
    let full = poly_square(&total, coeff_bound).expect("tree mass is at most n");
    let doubled = poly_sub_nonneg(&truncate(&full, prefix), &squares)
        .expect("cross terms dominate the per-branch squares");
    let counts = doubled
        .coeffs()
        .iter()
        .map(|&b| {
            debug_assert!(b % 2 == 0);
            b / 2
        })
        .collect();
    Split {
        counts,
        branch,
        order,
        branches,
    }
}

fn truncate(p: &CoeffPoly, prefix: Option<usize>) -> CoeffPoly {
    match prefix {
        Some(max) => poly_truncate(p, max),
        None => p.clone(),
    }
}

fn square_bound(n: usize) -> u64 {
    (n as u64).saturating_mul(n as u64).max(1)
}

/// Contribution of the pairs whose path passes through `r` (including pairs
/// with `r` as an endpoint). With `max_degree`, only distances up to it are
/// computed.
pub fn root_contribution(t: &Tree, r: usize, max_degree: Option<usize>) -> DistanceDistribution {
    assert!(r < t.n(), "vertex {r} out of range");
    let c = Compact::from_tree(t);
    let split = split_at(&c, r, square_bound(t.n()), max_degree);
    DistanceDistribution::from_dense(t.n(), &split.counts)
}

/// Number of unordered pairs of distinct vertices whose path contains `r`.
pub fn path_count_through(t: &Tree, r: usize) -> u64 {
    root_contribution(t, r, None).total_pairs()
}

/// Exact distance distribution of `t`, or its prefix `a_1 .. a_p` when
/// `prefix` is given.
pub fn tree_distance_distribution(t: &Tree, prefix: Option<u64>) -> DistanceDistribution {
    let prefix = prefix.map(|p| usize::try_from(p).unwrap_or(usize::MAX));
    let c = Compact::from_tree(t);
    let n = t.n();
    let ctx = Ctx {
        coeff_bound: square_bound(n),
        prefix,
        max_depth: (n as f64).log2().floor() as usize + 1,
    };
    let counts = solve(c, &ctx, 1);
    DistanceDistribution::from_dense(n, &counts)
}

struct Ctx {
    coeff_bound: u64,
    prefix: Option<usize>,
    max_depth: usize,
}

fn solve(c: Compact, ctx: &Ctx, depth: usize) -> Vec<u64> {
    let n = c.n();
    if checks::enabled() {
        assert!(
            depth <= ctx.max_depth,
            "centroid recursion depth {depth} exceeds log2(n) + 1 = {}",
            ctx.max_depth
        );
    }
    match n {
        0 | 1 => return Vec::new(),
        2 => return if ctx.prefix == Some(0) { Vec::new() } else { vec![0, 1] },
        _ => {}
    }
    let r = centroids(&c)[0];
    let split = split_at(&c, r, ctx.coeff_bound, ctx.prefix);

    // Relabel every branch into its own compact tree, in BFS order.
    let mut new_id = vec![0u32; n];
    let mut members = vec![Vec::new(); split.branches];
    for &v in &split.order[1..] {
        let b = split.branch[v];
        new_id[v] = members[b].len() as u32;
        members[b].push(v);
    }
    if checks::enabled() {
        for m in &members {
            assert!(2 * m.len() <= n, "centroid left a component of {} > n/2", m.len());
        }
    }
    let parts: Vec<Compact> = members
        .iter()
        .map(|vs| {
            let mut start = Vec::with_capacity(vs.len() + 1);
            let mut nbr = Vec::with_capacity(2 * vs.len());
            start.push(0);
            for &v in vs {
                nbr.extend(c.neighbors(v).filter(|&u| u != r).map(|u| new_id[u]));
                start.push(nbr.len());
            }
            Compact { start, nbr }
        })
        .collect();
    drop(c);

    let below = parts
        .into_par_iter()
        .map(|part| solve(part, ctx, depth + 1))
        .reduce(Vec::new, add_dense);
    add_dense(split.counts, below)
}

fn add_dense(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    if a.len() < b.len() {
        return add_dense(b, a);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}
