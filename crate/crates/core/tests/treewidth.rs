use geodesic::generate::{all_unlabeled_trees, clique, cycle, random_partial_ktree, random_tree};
use geodesic::treewidth::{NiceKind, NICE_NODE_FACTOR};
use geodesic::{
    balanced_edge, distance_distribution_oracle, heuristic_decomposition, make_nice,
    tree_distance_distribution, tw_distance_prefix, validate_decomposition, DecompositionError,
    Edge, Graph, NiceDecomposition, TreeDecomposition, Tree,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn td(bags: &[&[usize]], edges: &[(usize, usize)]) -> TreeDecomposition {
    TreeDecomposition::new(bags.iter().map(|b| b.to_vec()).collect(), edges.to_vec())
}

fn vertex_count(td: &TreeDecomposition) -> usize {
    td.bags.iter().flatten().max().map_or(0, |v| v + 1)
}

fn check_nice(nd: &NiceDecomposition, source: &TreeDecomposition, g: &Graph) {
    nd.check_nice().unwrap();
    assert_eq!(nd.width(), source.width());
    assert_eq!(validate_decomposition(g, &nd.to_tree_decomposition()).unwrap(), source.width());
    assert!(nd.len() <= NICE_NODE_FACTOR * (nd.width() + 1) * vertex_count(source).max(1));
}

/// Sizes of the two sides of the tree edge `(i, j)`, `j` a child of `i`.
fn sides(nd: &NiceDecomposition, j: usize) -> (usize, usize) {
    let mut below = 0;
    let mut stack = vec![j];
    while let Some(x) = stack.pop() {
        below += 1;
        stack.extend(&nd.nodes[x].children);
    }
    (nd.len() - below, below)
}

#[test]
fn validation_examples() {
    let p3 = Tree::path(3).into_graph();
    assert_eq!(validate_decomposition(&p3, &td(&[&[0, 1], &[1, 2]], &[(0, 1)])), Ok(1));
    assert_eq!(validate_decomposition(&clique(3), &TreeDecomposition::single_bag(3)), Ok(2));
    assert_eq!(
        validate_decomposition(&p3, &td(&[&[0, 1], &[2]], &[(0, 1)])),
        Err(DecompositionError::UncoveredEdge { u: 1, v: 2 })
    );
    assert_eq!(
        validate_decomposition(&p3, &td(&[&[0, 1]], &[])),
        Err(DecompositionError::UncoveredVertex { vertex: 2 })
    );
    assert_eq!(
        validate_decomposition(&p3, &td(&[&[0, 1], &[2], &[1, 2]], &[(0, 1), (1, 2)])),
        Err(DecompositionError::Incoherent { vertex: 1 })
    );
    assert!(matches!(
        validate_decomposition(&p3, &td(&[&[0, 1], &[1, 2]], &[(0, 1), (1, 0)])),
        Err(DecompositionError::NotATree(_))
    ));
    assert!(matches!(
        validate_decomposition(&p3, &td(&[&[0, 1, 7], &[1, 2]], &[(0, 1)])),
        Err(DecompositionError::VertexOutOfRange { .. })
    ));
}

#[test]
fn heuristic_widths() {
    for n in 2..=9 {
        for t in all_unlabeled_trees(n) {
            assert_eq!(validate_decomposition(t.graph(), &heuristic_decomposition(t.graph())), Ok(1));
        }
    }
    for n in 3..40 {
        assert_eq!(validate_decomposition(&cycle(n), &heuristic_decomposition(&cycle(n))), Ok(2));
    }
    assert_eq!(validate_decomposition(&clique(4), &heuristic_decomposition(&clique(4))), Ok(3));
    // Full k-trees are chordal, so min-fill finds the exact width.
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for k in 1..=5 {
        let (g, _) = random_partial_ktree(60, k, 1.0, (1, 1), &mut rng);
        assert_eq!(validate_decomposition(&g, &heuristic_decomposition(&g)), Ok(k));
    }
}

#[test]
fn nice_examples() {
    let single = TreeDecomposition::single_bag(3);
    let nd = make_nice(&single);
    check_nice(&nd, &single, &clique(3));
    let introduces = nd.nodes.iter().filter(|x| matches!(x.kind, NiceKind::Introduce(_))).count();
    assert_eq!(introduces, 3);
    assert_eq!(nd.nodes.iter().filter(|x| x.kind == NiceKind::Leaf).count(), 1);

    let p3 = Tree::path(3).into_graph();
    let two = td(&[&[0, 1], &[1, 2]], &[(0, 1)]);
    let nd = make_nice(&two);
    check_nice(&nd, &two, &p3);
    assert!(nd.nodes.iter().any(|x| matches!(x.kind, NiceKind::Forget(_))));
}

#[test]
fn nice_form_of_random_decompositions() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for i in 0..150 {
        let k = 1 + i % 5;
        let n = rng.gen_range(1..=200);
        let (g, given) = random_partial_ktree(n, k, 0.7, (1, 1), &mut rng);
        check_nice(&make_nice(&given), &given, &g);
        let heuristic = heuristic_decomposition(&g);
        check_nice(&make_nice(&heuristic), &heuristic, &g);
    }
}

#[test]
fn balanced_edge_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..100 {
        let (_, given) = random_partial_ktree(rng.gen_range(2..150), rng.gen_range(1..=4), 0.8, (1, 1), &mut rng);
        let nd = make_nice(&given);
        let (i, j) = balanced_edge(&nd);
        assert!(nd.nodes[i].children.contains(&j));
        let (a, b) = sides(&nd, j);
        let n = nd.len();
        assert!(3 * a >= n && 3 * a <= 2 * n && 3 * b >= n && 3 * b <= 2 * n, "{a}+{b}");
    }
}

#[test]
fn separator_examples() {
    let c4 = cycle(4);
    let c4_td = td(&[&[0, 1, 2], &[0, 2, 3]], &[(0, 1)]);
    let d = tw_distance_prefix(&c4, Some(&c4_td), 3).unwrap();
    assert_eq!((d.get(1), d.get(2), d.total_pairs()), (4, 2, 6));
    assert!(tw_distance_prefix(&c4, Some(&td(&[&[0, 1, 2]], &[])), 3).is_err());
}

#[test]
fn full_prefix_on_trees_matches_tree_module() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    for _ in 0..60 {
        let t = random_tree(rng.gen_range(1..200), &mut rng);
        let p = (t.n() as u64).saturating_sub(1).max(1);
        assert_eq!(tw_distance_prefix(t.graph(), None, p).unwrap(), tree_distance_distribution(&t, None));
    }
}

#[test]
fn matches_oracle_on_partial_ktrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for i in 0..200 {
        let k = 1 + i % 4;
        let n = rng.gen_range(1..=150);
        let weights = [(1, 1), (1, 5), (0, 3)][i % 3];
        let (g, given) = random_partial_ktree(n, k, rng.gen_range(0.3..1.0), weights, &mut rng);
        let full = distance_distribution_oracle(&g);
        let diameter = full.max_distance().unwrap_or(1).max(1);
        for p in [1, 2, diameter / 2 + 1, diameter, diameter + 3] {
            assert_eq!(tw_distance_prefix(&g, Some(&given), p).unwrap(), full.truncated(p), "graph {i}, p={p}");
            assert_eq!(tw_distance_prefix(&g, None, p).unwrap(), full.truncated(p), "graph {i}, heuristic, p={p}");
        }
    }
}

#[test]
fn disconnected_and_degenerate_graphs() {
    let empty = Graph::new(5, []).unwrap();
    assert!(tw_distance_prefix(&empty, None, 4).unwrap().counts.is_empty());
    let two_paths = Graph::new(6, [(0, 1), (1, 2), (3, 4), (4, 5)].map(|(u, v)| Edge { u, v, w: 2 })).unwrap();
    assert_eq!(tw_distance_prefix(&two_paths, None, 10).unwrap(), distance_distribution_oracle(&two_paths));
    let k6 = clique(6);
    assert_eq!(tw_distance_prefix(&k6, None, 1).unwrap(), distance_distribution_oracle(&k6));
}

#[test]
fn td_text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    let (_, given) = random_partial_ktree(40, 3, 0.8, (1, 1), &mut rng);
    assert_eq!(TreeDecomposition::parse(&given.to_text()).unwrap(), given);
    assert!(TreeDecomposition::parse("1 0\n0 1\n").is_err());
    assert!(TreeDecomposition::parse("").is_err());
}
