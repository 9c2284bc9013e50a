//! Red/blue dominance polynomials.
//!
//! Given valued red and blue points in `d` dimensions, compute
//! `sum x^(value(red) + value(blue))` over all pairs in which the blue point
//! strictly exceeds the red point in every coordinate.
//!
//! One dimension is handled by sorting (blue before red on ties), cutting the
//! order into groups, checking pairs inside a group directly and counting
//! cross-group pairs with one polynomial product per group. Higher
//! dimensions split at the median of the first coordinate, recurse on both
//! halves, and solve the red-left/blue-right pairs one dimension down.

use rayon::join;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks;
use crate::poly::{poly_mul, CoeffPoly};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Point {
    #[serde(rename = "x")]
    pub coords: Vec<i64>,
    #[serde(rename = "v")]
    pub value: u64,
}

impl Point {
    pub fn new(coords: Vec<i64>, value: u64) -> Self {
        Point { coords, value }
    }

    /// Whether `self` strictly exceeds `other` in every coordinate.
    pub fn dominates(&self, other: &Point) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| a > b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedBlueInstance {
    #[serde(rename = "d")]
    pub dim: usize,
    pub reds: Vec<Point>,
    pub blues: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RedBlueError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("{color} point {index} has {got} coordinates, expected {dim}")]
    DimensionMismatch {
        color: &'static str,
        index: usize,
        got: usize,
        dim: usize,
    },
    #[error("the one-dimensional solver needs d = 1, got d = {0}")]
    NotOneDimensional(usize),
    #[error("malformed instance: {0}")]
    Json(String),
}

impl RedBlueInstance {
    pub fn new(dim: usize, reds: Vec<Point>, blues: Vec<Point>) -> Result<Self, RedBlueError> {
        let inst = RedBlueInstance { dim, reds, blues };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), RedBlueError> {
        if self.dim == 0 {
            return Err(RedBlueError::ZeroDimension);
        }
        for (color, pts) in [("red", &self.reds), ("blue", &self.blues)] {
            for (index, p) in pts.iter().enumerate() {
                if p.coords.len() != self.dim {
                    return Err(RedBlueError::DimensionMismatch {
                        color,
                        index,
                        got: p.coords.len(),
                        dim: self.dim,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, RedBlueError> {
        let inst: RedBlueInstance =
            serde_json::from_str(text).map_err(|e| RedBlueError::Json(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    /// Largest point value.
    pub fn value_bound(&self) -> u64 {
        self.reds
            .iter()
            .chain(&self.blues)
            .map(|p| p.value)
            .max()
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.reds.len() + self.blues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Result as sorted `(exponent, coefficient)` pairs of the non-zero terms.
pub fn to_pairs(p: &CoeffPoly) -> Vec<(usize, u64)> {
    p.terms().collect()
}

/// Checks every red/blue pair.
pub fn redblue_bruteforce(inst: &RedBlueInstance) -> CoeffPoly {
    let mut out = CoeffPoly::zero();
    for r in &inst.reds {
        for b in &inst.blues {
            if b.dominates(r) {
                out.add_term((r.value + b.value) as usize, 1);
            }
        }
    }
    out
}

/// Group size for the one-dimensional solver: `ceil(sqrt(v * log2(n + 2)))`
/// clamped to `1..=n`.
pub fn group_size(n: usize, value_bound: u64) -> usize {
    let t = (value_bound as f64 * ((n + 2) as f64).log2()).sqrt().ceil() as usize;
    t.clamp(1, n.max(1))
}

pub fn redblue_solve_1d(inst: &RedBlueInstance) -> Result<CoeffPoly, RedBlueError> {
    redblue_solve_1d_with_group(inst, group_size(inst.len(), inst.value_bound()))
}

/// One-dimensional solver with an explicit group size.
pub fn redblue_solve_1d_with_group(
    inst: &RedBlueInstance,
    group: usize,
) -> Result<CoeffPoly, RedBlueError> {
    inst.validate()?;
    if inst.dim != 1 {
        return Err(RedBlueError::NotOneDimensional(inst.dim));
    }
    let pts = Points::new(inst);
    let items = pts.all_items();
    Ok(pts.solve_1d(items, 0, group.max(1)))
}

/// Solves an instance of any dimension `d >= 1`.
pub fn redblue_solve(inst: &RedBlueInstance) -> Result<CoeffPoly, RedBlueError> {
    inst.validate()?;
    let pts = Points::new(inst);
    let items = pts.all_items();
    Ok(pts.solve(items, 0))
}

/// Flattened points: reds are `0..reds`, blues follow.
struct Points {
    dim: usize,
    coords: Vec<i64>,
    values: Vec<u64>,
    reds: usize,
}

#[derive(Clone, Copy)]
struct Item {
    idx: u32,
    blue: bool,
}

impl Points {
    fn new(inst: &RedBlueInstance) -> Self {
        let mut coords = Vec::with_capacity(inst.len() * inst.dim);
        let mut values = Vec::with_capacity(inst.len());
        for p in inst.reds.iter().chain(&inst.blues) {
            coords.extend_from_slice(&p.coords);
            values.push(p.value);
        }
        Points {
            dim: inst.dim,
            coords,
            values,
            reds: inst.reds.len(),
        }
    }

    fn all_items(&self) -> Vec<Item> {
        (0..self.values.len())
            .map(|i| Item {
                idx: i as u32,
                blue: i >= self.reds,
            })
            .collect()
    }

    fn coord(&self, it: Item, axis: usize) -> i64 {
        self.coords[it.idx as usize * self.dim + axis]
    }

    fn value(&self, it: Item) -> u64 {
        self.values[it.idx as usize]
    }

    /// Strict dominance of `blue` over `red` on axes `axis..dim`.
    fn dominates_from(&self, blue: Item, red: Item, axis: usize) -> bool {
        (axis..self.dim).all(|a| self.coord(blue, a) > self.coord(red, a))
    }

    /// Sort key: coordinate, then blue before red.
    fn sort_by_axis(&self, items: &mut [Item], axis: usize) {
        items.sort_by_key(|&it| (self.coord(it, axis), !it.blue, it.idx));
    }

    fn solve(&self, mut items: Vec<Item>, axis: usize) -> CoeffPoly {
        if !items.iter().any(|i| i.blue) || items.iter().all(|i| i.blue) {
            return CoeffPoly::zero();
        }
        if axis + 1 == self.dim {
            let n = items.len();
            let v = items.iter().map(|&i| self.value(i)).max().unwrap_or(0);
            return self.solve_1d(items, axis, group_size(n, v));
        }
        let n = items.len();
        self.sort_by_axis(&mut items, axis);
        let median = self.coord(items[(n - 1) / 2], axis);
        let less = items.partition_point(|&i| self.coord(i, axis) < median);
        let blues_at = items[less..]
            .iter()
            .take_while(|&&i| self.coord(i, axis) == median && i.blue)
            .count();
        let mut half = (less + blues_at).min(n.div_ceil(2));
        if half == 0 {
            // Nothing below the median and no blue on it: every point at the
            // median is red. If all points share the coordinate no pair can
            // be strictly ordered on this axis.
            let at = items.iter().take_while(|&&i| self.coord(i, axis) == median).count();
            if at == n {
                return CoeffPoly::zero();
            }
            half = at;
        }
        let second = items.split_off(half);
        let first = items;
        if checks::enabled() {
            let max_red = first.iter().filter(|i| !i.blue).map(|&i| self.coord(i, axis)).max();
            let min_blue = second.iter().filter(|i| i.blue).map(|&i| self.coord(i, axis)).min();
            if let (Some(r), Some(b)) = (max_red, min_blue) {
                assert!(r < b, "split put a red at {r} left of a blue at {b}");
            }
        }
        let cross: Vec<Item> = first
            .iter()
            .filter(|i| !i.blue)
            .chain(second.iter().filter(|i| i.blue))
            .copied()
            .collect();
        let ((a, b), c) = join(
            || join(|| self.solve(first, axis), || self.solve(second, axis)),
            || self.solve(cross, axis + 1),
        );
        let mut out = a;
        crate::poly::poly_add_assign(&mut out, &b);
        crate::poly::poly_add_assign(&mut out, &c);
        CoeffPoly::from_coeffs(out.into_coeffs())
    }

    fn solve_1d(&self, mut items: Vec<Item>, axis: usize, group: usize) -> CoeffPoly {
        let n = items.len();
        if n == 0 {
            return CoeffPoly::zero();
        }
        let v = items.iter().map(|&i| self.value(i)).max().unwrap_or(0) as usize;
        let bound = (n as u64).saturating_mul(n as u64).max(1);
        self.sort_by_axis(&mut items, axis);
        let mut out = vec![0u64; 2 * v + 1];
        let mut reds_before = vec![0u64; v + 1];
        for chunk in items.chunks(group) {
            for &b in chunk.iter().filter(|i| i.blue) {
                for &r in chunk.iter().filter(|i| !i.blue) {
                    if self.dominates_from(b, r, axis) {
                        out[(self.value(r) + self.value(b)) as usize] += 1;
                    }
                }
            }
            let mut blue_poly = vec![0u64; v + 1];
            for &b in chunk.iter().filter(|i| i.blue) {
                blue_poly[self.value(b) as usize] += 1;
            }
            let product = poly_mul(
                &CoeffPoly::from_coeffs(reds_before.clone()),
                &CoeffPoly::from_coeffs(blue_poly),
                bound,
            )
            .expect("cross-group coefficients are at most n^2");
            for (e, c) in product.terms() {
                out[e] += c;
            }
            for &r in chunk.iter().filter(|i| !i.blue) {
                reds_before[self.value(r) as usize] += 1;
            }
        }
        CoeffPoly::from_coeffs(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[i64], v: u64) -> Point {
        Point::new(c.to_vec(), v)
    }

    fn example_1d() -> RedBlueInstance {
        RedBlueInstance::new(
            1,
            vec![pt(&[0], 1), pt(&[2], 3)],
            vec![pt(&[1], 2), pt(&[3], 0)],
        )
        .unwrap()
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(to_pairs(&redblue_bruteforce(&example_1d())), vec![(1, 1), (3, 2)]);
        let single = RedBlueInstance::new(2, vec![pt(&[0, 0], 0)], vec![pt(&[1, 1], 0)]).unwrap();
        assert_eq!(to_pairs(&redblue_bruteforce(&single)), vec![(0, 1)]);
        let weak = RedBlueInstance::new(2, vec![pt(&[0, 0], 4)], vec![pt(&[0, 1], 2)]).unwrap();
        assert!(redblue_bruteforce(&weak).is_zero());
    }

    #[test]
    fn one_dimensional_examples() {
        assert_eq!(
            to_pairs(&redblue_solve_1d_with_group(&example_1d(), 2).unwrap()),
            vec![(1, 1), (3, 2)]
        );
        let blues_only =
            RedBlueInstance::new(1, vec![], vec![pt(&[1], 0), pt(&[2], 1)]).unwrap();
        assert!(redblue_solve_1d(&blues_only).unwrap().is_zero());
        let one_red = RedBlueInstance::new(
            1,
            vec![pt(&[-5], 0)],
            vec![pt(&[1], 0), pt(&[2], 0), pt(&[3], 0)],
        )
        .unwrap();
        assert_eq!(to_pairs(&redblue_solve_1d(&one_red).unwrap()), vec![(0, 3)]);
        let two_d = RedBlueInstance::new(2, vec![], vec![]).unwrap();
        assert_eq!(redblue_solve_1d(&two_d), Err(RedBlueError::NotOneDimensional(2)));
    }

    #[test]
    fn ties_never_count() {
        let tie = RedBlueInstance::new(1, vec![pt(&[4], 1)], vec![pt(&[4], 1)]).unwrap();
        for g in 1..=2 {
            assert!(redblue_solve_1d_with_group(&tie, g).unwrap().is_zero());
        }
        let dup = RedBlueInstance::new(3, vec![pt(&[1, 2, 3], 0)], vec![pt(&[1, 2, 3], 0)]).unwrap();
        assert!(redblue_solve(&dup).unwrap().is_zero());
    }

    #[test]
    fn median_split_with_red_block_at_minimum() {
        // The lower median sits on a run of reds with nothing below it.
        let inst = RedBlueInstance::new(
            2,
            vec![pt(&[0, 0], 1), pt(&[0, 5], 2), pt(&[0, 1], 0)],
            vec![pt(&[3, 3], 1), pt(&[4, 6], 0)],
        )
        .unwrap();
        assert_eq!(redblue_solve(&inst).unwrap(), redblue_bruteforce(&inst));
        let same = RedBlueInstance::new(
            2,
            vec![pt(&[0, 0], 1), pt(&[0, 5], 2)],
            vec![pt(&[0, 3], 1)],
        )
        .unwrap();
        assert!(redblue_solve(&same).unwrap().is_zero());
    }

    #[test]
    fn group_size_clamps() {
        assert_eq!(group_size(10, 0), 1);
        assert_eq!(group_size(1, 1000), 1);
        assert_eq!(group_size(1000, 50), 23);
    }

    #[test]
    fn validation() {
        assert_eq!(
            RedBlueInstance::new(0, vec![], vec![]),
            Err(RedBlueError::ZeroDimension)
        );
        assert!(matches!(
            RedBlueInstance::new(2, vec![pt(&[1], 0)], vec![]),
            Err(RedBlueError::DimensionMismatch { .. })
        ));
        assert!(RedBlueInstance::from_json("{").is_err());
        let inst = RedBlueInstance::from_json(r#"{"d":1,"reds":[{"x":[0],"v":1}],"blues":[]}"#)
            .unwrap();
        assert_eq!(inst.reds[0].value, 1);
    }
}
