//! Graph generators for tests, benchmarks and fixtures.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Edge, Graph, Tree};
use crate::treewidth::TreeDecomposition;

/// Uniformly random labelled tree on `n` vertices, decoded from a random
/// Prüfer sequence.
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Tree {
    assert!(n >= 1);
    if n <= 2 {
        return Tree::path(n);
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &seq {
        degree[x] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut pairs = Vec::with_capacity(n - 1);
    for &x in &seq {
        let leaf = leaves.pop_first().expect("a leaf always exists");
        pairs.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.insert(x);
        }
    }
    let a = leaves.pop_first().unwrap();
    let b = leaves.pop_first().unwrap();
    pairs.push((a, b));
    Tree::from_pairs(n, pairs).expect("Prüfer decoding yields a tree")
}

/// Random recursive tree: vertex `v` attaches to a uniform earlier vertex.
/// These are shallow (logarithmic depth) compared with [`random_tree`].
pub fn random_recursive_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Tree {
    Tree::from_pairs(n, (1..n).map(|v| (rng.gen_range(0..v), v))).expect("recursive tree")
}

/// Caterpillar: a spine path with `legs` leaves spread along it.
pub fn caterpillar(spine: usize, legs: usize) -> Tree {
    assert!(spine >= 1);
    let n = spine + legs;
    let pairs = (1..spine)
        .map(|v| (v - 1, v))
        .chain((0..legs).map(|i| (i % spine, spine + i)));
    Tree::from_pairs(n, pairs).expect("caterpillar is a tree")
}

/// Every unlabelled tree on `n` vertices, exactly once each.
pub fn all_unlabeled_trees(n: usize) -> Vec<Tree> {
    assert!(n >= 1);
    let mut level: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for size in 2..=n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for edges in &level {
            for v in 0..size - 1 {
                let mut e = edges.clone();
                e.push((v, size - 1));
                let t = Tree::from_pairs(size, e.iter().copied()).unwrap();
                if seen.insert(canonical_form(&t)) {
                    next.push(e);
                }
            }
        }
        level = next;
    }
    level
        .into_iter()
        .map(|e| Tree::from_pairs(n, e).unwrap())
        .collect()
}

/// Isomorphism-invariant encoding of an unrooted tree: the smallest
/// parenthesis string over rootings at its centre(s).
pub fn canonical_form(t: &Tree) -> String {
    centers(t)
        .into_iter()
        .map(|c| rooted_code(t, c, usize::MAX))
        .min()
        .unwrap()
}

fn rooted_code(t: &Tree, v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = t
        .neighbors(v)
        .filter(|&u| u != parent)
        .map(|u| rooted_code(t, u, v))
        .collect();
    kids.sort();
    format!("({})", kids.concat())
}

fn centers(t: &Tree) -> Vec<usize> {
    let n = t.n();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = (0..n).map(|v| t.graph().degree(v)).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &leaf in &layer {
            for u in t.neighbors(leaf) {
                degree[u] -= 1;
                if degree[u] == 1 {
                    next.push(u);
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

/// Random partial `k`-tree on `n` vertices together with a tree
/// decomposition of width at most `k` that is valid for it.
///
/// A `k`-tree is grown from a `(k+1)`-clique by attaching each new vertex to a
/// uniformly chosen existing `k`-clique; every edge is then kept with
/// probability `keep`. Weights are uniform in `weights` (inclusive).
pub fn random_partial_ktree<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    keep: f64,
    weights: (u64, u64),
    rng: &mut R,
) -> (Graph, TreeDecomposition) {
    assert!(n >= 1);
    let base = (k + 1).min(n);
    let mut edges = Vec::new();
    for u in 0..base {
        for v in u + 1..base {
            edges.push((u, v));
        }
    }
    let mut bags = vec![(0..base).collect::<Vec<_>>()];
    let mut td_edges = Vec::new();
    // Each k-clique remembers a bag that contains it.
    let mut cliques: Vec<(Vec<usize>, usize)> = Vec::new();
    if base == k + 1 {
        for skip in 0..base {
            let c: Vec<usize> = (0..base).filter(|&x| x != skip).collect();
            cliques.push((c, 0));
        }
    }
    for v in base..n {
        let (clique, host) = cliques.choose(rng).expect("k-cliques exist").clone();
        for &u in &clique {
            edges.push((u, v));
        }
        let mut bag = clique.clone();
        bag.push(v);
        let node = bags.len();
        bags.push(bag.clone());
        td_edges.push((host, node));
        for skip in 0..clique.len() {
            let mut c: Vec<usize> = clique
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &x)| x)
                .collect();
            c.push(v);
            cliques.push((c, node));
        }
    }
    let mut kept = Vec::new();
    for (u, v) in edges {
        if rng.gen_bool(keep) {
            let w = rng.gen_range(weights.0..=weights.1);
            kept.push(Edge { u, v, w });
        }
    }
    let g = Graph::new(n, kept).expect("k-tree edges are simple");
    (
        g,
        TreeDecomposition {
            bags,
            edges: td_edges,
        },
    )
}

/// Cycle on `n >= 3` vertices with unit weights.
pub fn cycle(n: usize) -> Graph {
    Graph::from_pairs(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle")
}

/// Complete graph on `n` vertices with unit weights.
pub fn clique(n: usize) -> Graph {
    Graph::from_pairs(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("clique")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn unlabeled_tree_counts() {
        let counts: Vec<usize> = (1..=9).map(|n| all_unlabeled_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 11, 23, 47]);
    }

    #[test]
    fn random_tree_is_a_tree() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for n in [1, 2, 3, 10, 100] {
            assert_eq!(random_tree(n, &mut rng).n(), n);
            assert_eq!(random_recursive_tree(n, &mut rng).n(), n);
        }
        assert_eq!(caterpillar(4, 6).n(), 10);
    }

    #[test]
    fn canonical_form_ignores_labels() {
        let a = Tree::from_pairs(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let b = Tree::from_pairs(4, [(2, 0), (0, 3), (3, 1)]).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert_ne!(canonical_form(&a), canonical_form(&Tree::star(3)));
    }
}
