//! Distance distributions and the measures derived from them.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::graph::{bfs_distances, dijkstra_distances, Graph};

/// Number of unordered vertex pairs at each finite, non-zero distance.
///
/// Pairs joined by zero-weight paths (distance 0) are not recorded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceDistribution {
    pub n: usize,
    pub counts: BTreeMap<u64, u64>,
}

impl DistanceDistribution {
    pub fn new(n: usize) -> Self {
        DistanceDistribution {
            n,
            counts: BTreeMap::new(),
        }
    }

    /// Builds a distribution from dense counts, `dense[d]` being the count at
    /// distance `d`. Index 0 is ignored.
    pub fn from_dense(n: usize, dense: &[u64]) -> Self {
        let counts = dense
            .iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, &c)| c > 0)
            .map(|(d, &c)| (d as u64, c))
            .collect();
        DistanceDistribution { n, counts }
    }

    pub fn add(&mut self, distance: u64, count: u64) {
        if distance == 0 || count == 0 {
            return;
        }
        *self.counts.entry(distance).or_insert(0) += count;
    }

    /// Subtracts `count` pairs at `distance`.
    ///
    /// Panics if fewer than `count` pairs are recorded there.
    pub fn remove(&mut self, distance: u64, count: u64) {
        if distance == 0 || count == 0 {
            return;
        }
        let slot = self
            .counts
            .get_mut(&distance)
            .expect("removing pairs at an absent distance");
        *slot = slot
            .checked_sub(count)
            .expect("removing more pairs than recorded");
        if *slot == 0 {
            self.counts.remove(&distance);
        }
    }

    pub fn merge(&mut self, other: &DistanceDistribution) {
        for (&d, &c) in &other.counts {
            self.add(d, c);
        }
    }

    pub fn get(&self, distance: u64) -> u64 {
        self.counts.get(&distance).copied().unwrap_or(0)
    }

    /// Total number of recorded pairs.
    pub fn total_pairs(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn max_distance(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// Keeps only distances `<= max_distance`.
    pub fn truncated(&self, max_distance: u64) -> Self {
        DistanceDistribution {
            n: self.n,
            counts: self
                .counts
                .range(..=max_distance)
                .map(|(&d, &c)| (d, c))
                .collect(),
        }
    }

    /// `distance<TAB>count` lines in ascending distance order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (d, c) in &self.counts {
            writeln!(out, "{d}\t{c}").unwrap();
        }
        out
    }

    /// `{"n":…,"counts":{"1":…}}` with keys in ascending numeric order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distribution serializes")
    }
}

/// Exact distribution by running a shortest-path search from every vertex.
/// BFS is used for unit-weight graphs and Dijkstra otherwise.
pub fn distance_distribution_oracle(g: &Graph) -> DistanceDistribution {
    let unit = g.is_unit_weight();
    let mut dist = DistanceDistribution::new(g.n());
    for s in 0..g.n() {
        let row = if unit {
            bfs_distances(g, s)
        } else {
            dijkstra_distances(g, s)
        }
        .expect("source in range");
        for d in row.iter().skip(s + 1).flatten() {
            dist.add(*d, 1);
        }
    }
    dist
}

/// Sum of `a_i / i` as an exact rational.
pub fn igl_from_distribution(d: &DistanceDistribution) -> BigRational {
    if d.counts.is_empty() {
        return BigRational::zero();
    }
    // Common denominator: lcm of the distances present.
    let mut lcm = BigUint::one();
    for &dist in d.counts.keys() {
        let rem = (&lcm % dist).iter_u64_digits().next().unwrap_or(0);
        let g = rem.gcd(&dist);
        lcm *= dist / g;
    }
    let mut num = BigUint::zero();
    for (&dist, &count) in &d.counts {
        num += (&lcm / dist) * count;
    }
    BigRational::new(BigInt::from(num), BigInt::from(lcm))
}

/// Floating-point IGL. Agrees with [`igl_from_distribution`] to within about
/// `1e-9` relative error for the sizes this crate targets.
pub fn igl_approx(d: &DistanceDistribution) -> f64 {
    d.counts
        .iter()
        .rev()
        .map(|(&dist, &c)| c as f64 / dist as f64)
        .sum()
}

/// Sum of `i * a_i`.
pub fn wiener_from_distribution(d: &DistanceDistribution) -> u128 {
    d.counts
        .iter()
        .map(|(&dist, &c)| dist as u128 * c as u128)
        .sum()
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Tree;

    fn dist(pairs: &[(u64, u64)]) -> DistanceDistribution {
        let mut d = DistanceDistribution::new(0);
        for &(k, c) in pairs {
            d.add(k, c);
        }
        d
    }

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            distance_distribution_oracle(Tree::path(4).graph()).counts,
            dist(&[(1, 3), (2, 2), (3, 1)]).counts
        );
        assert_eq!(
            distance_distribution_oracle(Tree::star(3).graph()).counts,
            dist(&[(1, 3), (2, 3)]).counts
        );
        let c4 = Graph::from_pairs(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(
            distance_distribution_oracle(&c4).counts,
            dist(&[(1, 4), (2, 2)]).counts
        );
    }

    #[test]
    fn igl_examples() {
        assert_eq!(igl_from_distribution(&dist(&[(1, 3), (2, 2), (3, 1)])), ratio(13, 3));
        assert_eq!(igl_from_distribution(&dist(&[])), ratio(0, 1));
        assert_eq!(igl_from_distribution(&dist(&[(1, 3), (2, 3)])), ratio(9, 2));
        let d = dist(&[(1, 3), (2, 2), (3, 1)]);
        assert!((igl_approx(&d) - 13.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn wiener_examples() {
        assert_eq!(wiener_from_distribution(&dist(&[(1, 3), (2, 2), (3, 1)])), 10);
        assert_eq!(wiener_from_distribution(&dist(&[])), 0);
        assert_eq!(wiener_from_distribution(&dist(&[(1, 3), (2, 3)])), 9);
    }

    #[test]
    fn serialization_formats() {
        let mut d = dist(&[(10, 1), (2, 5), (1, 4)]);
        d.n = 6;
        assert_eq!(d.to_tsv(), "1\t4\n2\t5\n10\t1\n");
        assert_eq!(d.to_json(), r#"{"n":6,"counts":{"1":4,"2":5,"10":1}}"#);
        let back: DistanceDistribution = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn zero_distance_pairs_are_not_recorded() {
        let g = Graph::new(2, [crate::graph::Edge { u: 0, v: 1, w: 0 }]).unwrap();
        assert!(distance_distribution_oracle(&g).counts.is_empty());
    }

    #[test]
    fn truncation_and_removal() {
        let mut d = dist(&[(1, 3), (2, 2), (3, 1)]);
        assert_eq!(d.truncated(2).counts, dist(&[(1, 3), (2, 2)]).counts);
        d.remove(2, 2);
        assert_eq!(d.counts, dist(&[(1, 3), (3, 1)]).counts);
    }
}
