//! Distance distributions, inverse geodesic length (IGL) and Wiener index of
//! trees and bounded-treewidth graphs, plus exact solvers for the problem of
//! deleting `k` vertices from a tree to minimise an additive measure.
//!
//! * [`tree_distance`] computes the distance distribution of a tree by
//!   centroid decomposition and polynomial squaring.
//! * [`treewidth`] handles general non-negative integer weighted graphs through
//!   a tree decomposition, reducing cross-separator pairs to [`redblue`]
//!   dominance-polynomial instances.
//! * [`minh`] solves the vertex-deletion problem on trees by exhaustive search
//!   or a dynamic program over ordered tree shapes.

pub mod checks;
pub mod distribution;
pub mod generate;
pub mod graph;
pub mod minh;
pub mod poly;
pub mod redblue;
pub mod tree_distance;
pub mod treewidth;

pub use distribution::{
    distance_distribution_oracle, igl_approx, igl_from_distribution, wiener_from_distribution,
    DistanceDistribution,
};
pub use graph::{
    bfs_distances, dijkstra_distances, parse_edge_list, parse_edge_list_str, Distance, Edge, Graph,
    GraphError, ParseError, ParseErrorKind, Tree,
};
pub use poly::CoeffPoly;
pub use minh::{
    enumerate_ordered_trees, measure_eval, minh_bruteforce, minh_solve, minh_trim_dp, utility,
    BalanceParams, Measure, MinhError, OrderedTree, Solution,
};
pub use redblue::{redblue_bruteforce, redblue_solve, redblue_solve_1d, Point, RedBlueInstance};
pub use tree_distance::tree_distance_distribution;
pub use treewidth::{
    balanced_edge, heuristic_decomposition, make_nice, tw_distance_prefix, validate_decomposition,
    DecompositionError, NiceDecomposition, TreeDecomposition,
};
