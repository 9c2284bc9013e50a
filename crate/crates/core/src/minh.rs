//! Deleting `k` vertices of a tree to minimise an additive distance measure.
//!
//! Three solvers: exhaustive search over all `k`-subsets, a dynamic program
//! over deletion sets that leave every component with at most `L` vertices,
//! and a combined solver that picks one of the two from `n`, `k` and the
//! measure's balance parameters.
//!
//! The dynamic program keeps, for each vertex `u` that stays, the shape of
//! the part of `u`'s component below `u` as an ordered forest (the children
//! of `u` in their fixed order, each carrying its own shape). Pairs inside a
//! component are charged once, when the shape of the whole component is
//! known, by evaluating the measure on that shape. Shapes are interned as
//! `(prefix forest, last tree)` pairs so that forests sharing a prefix share
//! their work.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::checks;
use crate::distribution::{
    distance_distribution_oracle, igl_from_distribution, wiener_from_distribution,
    DistanceDistribution,
};
use crate::graph::{Graph, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Sum of inverse distances over connected pairs.
    Igl,
    /// Sum of distances over connected pairs.
    Wiener,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Igl => "igl",
            Measure::Wiener => "wiener",
        }
    }

    /// Both measures are sums over components.
    pub fn is_additive(self) -> bool {
        true
    }

    pub fn from_distribution(self, d: &DistanceDistribution) -> BigRational {
        match self {
            Measure::Igl => igl_from_distribution(d),
            Measure::Wiener => BigRational::from_integer(BigInt::from(wiener_from_distribution(d))),
        }
    }

    /// Balance parameters known to hold for the measure.
    pub fn default_params(self) -> Option<BalanceParams> {
        match self {
            Measure::Igl => Some(BalanceParams::igl()),
            Measure::Wiener => None,
        }
    }

    /// A multiplier making the measure integral on every graph whose
    /// distances are at most `max_distance`.
    fn scale(self, max_distance: usize) -> BigUint {
        match self {
            Measure::Igl => (1..=max_distance.max(1) as u64)
                .map(BigUint::from)
                .fold(BigUint::one(), |a, b| a.lcm(&b)),
            Measure::Wiener => BigUint::one(),
        }
    }

    fn scaled(self, d: &DistanceDistribution, scale: &BigUint) -> BigUint {
        d.counts
            .iter()
            .map(|(&dist, &c)| match self {
                Measure::Igl => scale / dist * c,
                Measure::Wiener => scale * dist * c,
            })
            .sum()
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "igl" => Ok(Measure::Igl),
            "wiener" => Ok(Measure::Wiener),
            other => Err(format!("unknown measure `{other}`")),
        }
    }
}

/// Exact value of the measure on any graph. Disconnected pairs contribute
/// nothing.
pub fn measure_eval(m: Measure, g: &Graph) -> BigRational {
    m.from_distribution(&distance_distribution_oracle(g))
}

/// Decrease in IGL caused by deleting `s` from `t`.
pub fn utility(t: &Tree, s: &[usize]) -> BigRational {
    let g = t.graph();
    measure_eval(Measure::Igl, g) - measure_eval(Measure::Igl, &g.remove_vertices(s))
}

/// `c` and `t` of the claim that some optimal deletion set leaves components
/// of at most `ceil(c * (n / k)^t)` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceParams {
    pub c: BigRational,
    pub t: BigRational,
}

impl BalanceParams {
    pub fn new(c: BigRational, t: BigRational) -> Result<Self, MinhError> {
        if !c.is_positive() || !t.is_positive() {
            return Err(MinhError::InvalidParams(format!(
                "c = {c} and t = {t} must both be positive"
            )));
        }
        Ok(BalanceParams { c, t })
    }

    /// `c = 8 * 15^4`, `t = 5`.
    pub fn igl() -> Self {
        BalanceParams {
            c: BigRational::from_integer(BigInt::from(8 * 15u32.pow(4))),
            t: BigRational::from_integer(BigInt::from(5)),
        }
    }

    /// `ceil(c * (n / k)^t)`, saturating at `u64::MAX`. Exact when `t` is an
    /// integer. `k = 0` gives `u64::MAX`.
    pub fn trim_bound(&self, n: usize, k: usize) -> u64 {
        if k == 0 {
            return u64::MAX;
        }
        if self.t.is_integer() {
            let Some(t) = self.t.to_integer().to_u32() else {
                return u64::MAX;
            };
            let ratio = BigRational::new(BigInt::from(n), BigInt::from(k));
            let value = &self.c * num_traits::pow(ratio, t as usize);
            return value.ceil().to_integer().to_u64().unwrap_or(u64::MAX);
        }
        let c = rational_f64(&self.c);
        let t = rational_f64(&self.t);
        let v = (c * (n as f64 / k as f64).powf(t)).ceil();
        if v >= u64::MAX as f64 {
            u64::MAX
        } else {
            v as u64
        }
    }

    /// `k* = n^(t/(t+1)) * ln(n)^(-1/(t+1))`, the budget below which brute
    /// force is preferred.
    pub fn k_star(&self, n: usize) -> f64 {
        if n <= 1 {
            return f64::INFINITY;
        }
        let t = rational_f64(&self.t);
        let n = n as f64;
        n.powf(t / (t + 1.0)) * n.ln().powf(-1.0 / (t + 1.0))
    }
}

fn rational_f64(r: &BigRational) -> f64 {
    crate::distribution::rational_to_f64(r)
}

/// Parses `p/q`, an integer, or a decimal such as `-1.25`, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("`{s}` is not a rational number");
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(format!("`{s}` has a zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits_ok = |x: &str| x.chars().all(|c| c.is_ascii_digit());
    if (int.is_empty() && frac.is_empty()) || !digits_ok(int) || !digits_ok(frac) {
        return Err(bad());
    }
    let numer: BigInt = format!("{int}{frac}").trim_start_matches('0').parse().unwrap_or_default();
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

/// Rooted tree with ordered children; vertex 0 is the root and vertices are
/// numbered in preorder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedTree {
    pub children: Vec<Vec<usize>>,
}

impl OrderedTree {
    /// Tree whose root's children forest is written as balanced parentheses,
    /// each `(...)` being one child with its own forest inside.
    pub fn from_parens(s: &str) -> Self {
        let mut children = vec![Vec::new()];
        let mut stack = vec![0];
        for ch in s.chars() {
            match ch {
                '(' => {
                    let v = children.len();
                    children.push(Vec::new());
                    children[*stack.last().unwrap()].push(v);
                    stack.push(v);
                }
                ')' => {
                    stack.pop();
                    assert!(!stack.is_empty(), "unbalanced parentheses");
                }
                _ => panic!("unexpected character {ch:?}"),
            }
        }
        assert_eq!(stack.len(), 1, "unbalanced parentheses");
        OrderedTree { children }
    }

    pub fn to_parens(&self) -> String {
        let mut out = String::new();
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        while let Some((v, i)) = stack.pop() {
            if i < self.children[v].len() {
                stack.push((v, i + 1));
                out.push('(');
                stack.push((self.children[v][i], 0));
            } else if v != 0 {
                out.push(')');
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The underlying unordered tree.
    pub fn to_tree(&self) -> Tree {
        let pairs = self
            .children
            .iter()
            .enumerate()
            .flat_map(|(p, cs)| cs.iter().map(move |&c| (p, c)));
        Tree::from_pairs(self.len(), pairs).expect("ordered tree")
    }
}

/// `C(m) = (2m)! / (m! (m+1)!)`.
pub fn catalan(m: u32) -> u128 {
    (0..m).fold(1u128, |c, i| c * 2 * (2 * i as u128 + 1) / (i as u128 + 2))
}

/// Every ordered tree with `1..=max_size` vertices, by increasing size. There
/// are `catalan(l - 1)` of size `l`.
pub fn enumerate_ordered_trees(max_size: usize) -> Vec<OrderedTree> {
    assert!(max_size >= 1);
    // forests[s]: all ordered forests with s vertices, as parentheses.
    let mut forests: Vec<Vec<String>> = vec![vec![String::new()]];
    for s in 1..max_size {
        let mut here = Vec::new();
        for first in 1..=s {
            for inner in &forests[first - 1] {
                for rest in &forests[s - first] {
                    here.push(format!("({inner}){rest}"));
                }
            }
        }
        forests.push(here);
    }
    forests
        .iter()
        .flatten()
        .map(|f| OrderedTree::from_parens(f))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    BruteForce,
    TrimDp { trim: u64 },
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::BruteForce => f.write_str("brute-force"),
            Algorithm::TrimDp { .. } => f.write_str("trim-dp"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Sorted.
    pub deleted: Vec<usize>,
    pub value: BigRational,
    pub algorithm: Algorithm,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinhError {
    #[error("budget k = {k} is out of range for {n} vertices")]
    BudgetOutOfRange { k: usize, n: usize },
    #[error("the trim bound must be at least 1")]
    ZeroTrim,
    #[error("no set of {k} vertices leaves all components with at most {trim} vertices")]
    Infeasible { k: usize, trim: u64 },
    #[error("invalid balance parameters: {0}")]
    InvalidParams(String),
}

/// Tries every `k`-subset. Among optimal sets the lexicographically smallest
/// is returned.
pub fn minh_bruteforce(t: &Tree, m: Measure, k: usize) -> Result<Solution, MinhError> {
    let n = t.n();
    if k > n {
        return Err(MinhError::BudgetOutOfRange { k, n });
    }
    let mut best: Option<(BigRational, Vec<usize>)> = None;
    for set in (0..n).combinations(k) {
        let value = measure_eval(m, &t.graph().remove_vertices(&set));
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, set));
        }
    }
    let (value, deleted) = best.expect("at least one subset");
    Ok(Solution {
        deleted,
        value,
        algorithm: Algorithm::BruteForce,
    })
}

/// Optimum over sets of exactly `k` vertices whose deletion leaves no
/// component with more than `trim` vertices.
pub fn minh_trim_dp(t: &Tree, m: Measure, k: usize, trim: u64) -> Result<Solution, MinhError> {
    let n = t.n();
    if k > n {
        return Err(MinhError::BudgetOutOfRange { k, n });
    }
    if trim == 0 {
        return Err(MinhError::ZeroTrim);
    }
    let limit = (trim.min((n - k) as u64) as usize).max(1);
    let scale = m.scale(limit - 1);
    // Largest possible scaled total: every pair at distance 1 (IGL) or
    // every pair at distance `limit` (Wiener).
    let worst = &scale * BigUint::from(n * n) * BigUint::from(limit);
    let found = if worst.bits() < 120 {
        Dp::<u128>::new(t, m, k, limit, scale.clone())
            .run()
            .map(|(d, v)| (d, BigUint::from(v)))
    } else {
        Dp::<BigUint>::new(t, m, k, limit, scale.clone()).run()
    };
    let Some((deleted, scaled)) = found else {
        return Err(MinhError::Infeasible { k, trim });
    };
    let value = measure_eval(m, &t.graph().remove_vertices(&deleted));
    if checks::enabled() {
        let from_dp = BigRational::new(BigInt::from(scaled), BigInt::from(scale));
        assert_eq!(from_dp, value, "table value disagrees with the re-evaluated set");
    }
    Ok(Solution {
        deleted,
        value,
        algorithm: Algorithm::TrimDp { trim },
    })
}

/// What [`minh_solve`] will run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plan {
    pub algorithm: Algorithm,
    /// `None` when no balance parameters are available.
    pub k_star: Option<f64>,
}

/// Brute force when `k <= k*` or when the measure has no balance
/// parameters, otherwise the trimming DP with `L = ceil(c (n/k)^t)`.
pub fn plan(n: usize, k: usize, params: Option<&BalanceParams>) -> Plan {
    match params {
        None => Plan {
            algorithm: Algorithm::BruteForce,
            k_star: None,
        },
        Some(p) => {
            let k_star = p.k_star(n);
            let algorithm = if (k as f64) <= k_star {
                Algorithm::BruteForce
            } else {
                Algorithm::TrimDp {
                    trim: p.trim_bound(n, k),
                }
            };
            Plan {
                algorithm,
                k_star: Some(k_star),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub solution: Solution,
    /// `value <= tau` when a threshold was given.
    pub decision: Option<bool>,
}

/// Runs the solver chosen by [`plan`]. `params` defaults to the measure's
/// own parameters.
pub fn minh_solve(
    t: &Tree,
    m: Measure,
    k: usize,
    params: Option<&BalanceParams>,
    tau: Option<&BigRational>,
) -> Result<Report, MinhError> {
    if k > t.n() {
        return Err(MinhError::BudgetOutOfRange { k, n: t.n() });
    }
    let defaults = m.default_params();
    let params = params.or(defaults.as_ref());
    let solution = match plan(t.n(), k, params).algorithm {
        Algorithm::BruteForce => minh_bruteforce(t, m, k)?,
        Algorithm::TrimDp { trim } => minh_trim_dp(t, m, k, trim)?,
    };
    let decision = tau.map(|tau| solution.value <= *tau);
    Ok(Report { solution, decision })
}

/// Table entries: `None` is an unreachable state.
trait Cost: Clone + Ord {
    fn zero_cost() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn from_big(b: BigUint) -> Self;
}

impl Cost for u128 {
    fn zero_cost() -> Self {
        0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn from_big(b: BigUint) -> Self {
        b.to_u128().expect("scaled value fits")
    }
}

impl Cost for BigUint {
    fn zero_cost() -> Self {
        BigUint::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn from_big(b: BigUint) -> Self {
        b
    }
}

fn sum<V: Cost>(a: &Option<V>, b: &Option<V>) -> Option<V> {
    Some(a.as_ref()?.plus(b.as_ref()?))
}

fn relax<V: Cost>(slot: &mut Option<V>, value: Option<V>) {
    if let Some(v) = value {
        if slot.as_ref().is_none_or(|s| v < *s) {
            *slot = Some(v);
        }
    }
}

/// Interned ordered forests. Id 0 is the empty forest; any other id is a
/// prefix forest followed by one tree, the tree given by its root's
/// children forest.
struct Shapes {
    parts: Vec<(u32, u32)>,
    size: Vec<usize>,
    lookup: HashMap<(u32, u32), u32>,
}

impl Shapes {
    fn new() -> Self {
        Shapes {
            parts: vec![(0, 0)],
            size: vec![0],
            lookup: HashMap::new(),
        }
    }

    fn append(&mut self, prefix: u32, tree: u32) -> u32 {
        if let Some(&id) = self.lookup.get(&(prefix, tree)) {
            return id;
        }
        let id = self.parts.len() as u32;
        self.parts.push((prefix, tree));
        self.size.push(self.size[prefix as usize] + 1 + self.size[tree as usize]);
        self.lookup.insert((prefix, tree), id);
        id
    }

    /// The tree made of a root above `forest`.
    fn tree(&self, forest: u32) -> Tree {
        let mut parent = vec![None];
        let mut stack = vec![(0usize, forest)];
        while let Some((node, mut f)) = stack.pop() {
            while f != 0 {
                let (prefix, child) = self.parts[f as usize];
                let id = parent.len();
                parent.push(Some(node));
                stack.push((id, child));
                f = prefix;
            }
        }
        Tree::from_parents(&parent).expect("shape is a tree")
    }
}

type Row<V> = Vec<Option<V>>;
type ShapeRows<V> = BTreeMap<u32, Row<V>>;

enum State {
    /// Vertex deleted, `b` deletions in its subtree including itself.
    Deleted(usize),
    /// Vertex kept with the given children shape, `b` deletions below it.
    Kept(u32, usize),
    /// Whichever of the two is cheaper.
    Any(usize),
}

struct Dp<V> {
    children: Vec<Vec<usize>>,
    size: Vec<usize>,
    order: Vec<usize>,
    k: usize,
    limit: usize,
    measure: Measure,
    scale: BigUint,
    shapes: Shapes,
    tree_cost: HashMap<u32, V>,
    /// Root deleted.
    f: Vec<Row<V>>,
    /// Root kept, cost of its component included.
    g: Vec<Row<V>>,
    g_shape: Vec<Vec<u32>>,
    /// Root kept with the given children shape; its component not charged.
    kept: Vec<ShapeRows<V>>,
}

impl<V: Cost> Dp<V> {
    fn new(t: &Tree, measure: Measure, k: usize, limit: usize, scale: BigUint) -> Self {
        let n = t.n();
        let mut children = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        let mut parent = vec![usize::MAX; n];
        let mut stack = vec![0];
        parent[0] = 0;
        while let Some(u) = stack.pop() {
            order.push(u);
            let mut kids: Vec<usize> = t.neighbors(u).filter(|&v| parent[v] == usize::MAX).collect();
            kids.sort_unstable();
            for &v in &kids {
                parent[v] = u;
                stack.push(v);
            }
            children[u] = kids;
        }
        let mut size = vec![1; n];
        for &u in order.iter().rev() {
            for &v in &children[u] {
                size[u] += size[v];
            }
        }
        Dp {
            children,
            size,
            order,
            k,
            limit,
            measure,
            scale,
            shapes: Shapes::new(),
            tree_cost: HashMap::new(),
            f: vec![Vec::new(); n],
            g: vec![Vec::new(); n],
            g_shape: vec![Vec::new(); n],
            kept: vec![BTreeMap::new(); n],
        }
    }

    fn cap(&self, u: usize) -> usize {
        self.k.min(self.size[u])
    }

    fn run(mut self) -> Option<(Vec<usize>, V)> {
        for idx in (0..self.order.len()).rev() {
            let u = self.order[idx];
            self.forward(u);
        }
        let (k, root) = (self.k, 0);
        let best = self.f[root][k].clone().min_by_cost(self.g[root][k].clone())?;
        let deleted = self.reconstruct(root, State::Any(k));
        Some((deleted, best))
    }

    fn forward(&mut self, u: usize) {
        let kept_rows = self.kept_rows(u).pop().unwrap();
        let free_rows = self.free_rows(u);
        let cap = self.cap(u);
        let mut f = vec![None; cap + 1];
        for b in 1..=cap {
            f[b] = free_rows.last().unwrap().get(b - 1).cloned().flatten();
        }
        let mut g = vec![None; cap + 1];
        let mut g_shape = vec![0u32; cap + 1];
        for (&shape, row) in &kept_rows {
            let cost = Some(self.cost_of(shape));
            for b in 0..row.len().min(cap + 1) {
                let v = sum(&row[b], &cost);
                if v.is_some() && (g[b].is_none() || v < g[b]) {
                    g[b] = v;
                    g_shape[b] = shape;
                }
            }
        }
        self.f[u] = f;
        self.g[u] = g;
        self.g_shape[u] = g_shape;
        self.kept[u] = kept_rows
            .into_iter()
            .filter(|(_, row)| row.iter().any(Option::is_some))
            .collect();
    }

    fn cost_of(&mut self, shape: u32) -> V {
        if let Some(c) = self.tree_cost.get(&shape) {
            return c.clone();
        }
        let tree = self.shapes.tree(shape);
        let d = crate::tree_distance::tree_distance_distribution(&tree, None);
        let c = V::from_big(self.measure.scaled(&d, &self.scale));
        self.tree_cost.insert(shape, c.clone());
        c
    }

    /// Rows of the child-by-child table for `u` kept: entry `i` maps the
    /// shape formed by the kept children among the first `i` to the cost per
    /// budget spent in their subtrees.
    fn kept_rows(&mut self, u: usize) -> Vec<ShapeRows<V>> {
        let mut rows = vec![BTreeMap::from([(0u32, vec![Some(V::zero_cost())])])];
        let mut spent_cap = 0;
        for ci in 0..self.children[u].len() {
            let v = self.children[u][ci];
            let vcap = self.cap(v);
            spent_cap = (spent_cap + self.size[v]).min(self.k);
            let mut next: ShapeRows<V> = BTreeMap::new();
            let prev = rows.last().unwrap();
            for (&shape, row) in prev {
                for (b1, c1) in row.iter().enumerate() {
                    if c1.is_none() {
                        continue;
                    }
                    let slot = next.entry(shape).or_insert_with(|| vec![None; spent_cap + 1]);
                    for b2 in 1..=vcap.min(self.k - b1) {
                        relax(&mut slot[b1 + b2], sum(c1, &self.f[v][b2]));
                    }
                }
                for (&child_shape, crow) in &self.kept[v] {
                    let grown = self.shapes.size[shape as usize] + 1 + self.shapes.size[child_shape as usize];
                    if grown + 1 > self.limit {
                        continue;
                    }
                    let joined = self.shapes.append(shape, child_shape);
                    let slot = next.entry(joined).or_insert_with(|| vec![None; spent_cap + 1]);
                    for (b1, c1) in row.iter().enumerate() {
                        if c1.is_none() {
                            continue;
                        }
                        for b2 in 0..crow.len().min(self.k - b1 + 1) {
                            relax(&mut slot[b1 + b2], sum(c1, &crow[b2]));
                        }
                    }
                }
            }
            rows.push(next);
        }
        rows
    }

    /// Rows for `u` deleted: children are unconstrained.
    fn free_rows(&self, u: usize) -> Vec<Row<V>> {
        let mut rows = vec![vec![Some(V::zero_cost())]];
        let mut spent_cap = 0;
        for &v in &self.children[u] {
            spent_cap = (spent_cap + self.size[v]).min(self.k);
            let best = self.best_row(v);
            let prev = rows.last().unwrap();
            let mut next = vec![None; spent_cap + 1];
            for (b1, c1) in prev.iter().enumerate() {
                for (b2, c2) in best.iter().enumerate().take(self.k - b1 + 1) {
                    relax(&mut next[b1 + b2], sum(c1, c2));
                }
            }
            rows.push(next);
        }
        rows
    }

    fn best_row(&self, v: usize) -> Row<V> {
        self.f[v]
            .iter()
            .zip(&self.g[v])
            .map(|(a, b)| a.clone().min_by_cost(b.clone()))
            .collect()
    }

    fn reconstruct(&mut self, root: usize, state: State) -> Vec<usize> {
        let mut deleted = Vec::new();
        let mut stack = vec![(root, state)];
        while let Some((u, state)) = stack.pop() {
            let state = match state {
                State::Any(b) => {
                    if self.f[u][b].is_some() && (self.g[u][b].is_none() || self.f[u][b] <= self.g[u][b]) {
                        State::Deleted(b)
                    } else {
                        State::Kept(self.g_shape[u][b], b)
                    }
                }
                s => s,
            };
            match state {
                State::Deleted(b) => {
                    deleted.push(u);
                    let rows = self.free_rows(u);
                    let mut left = b - 1;
                    for ci in (0..self.children[u].len()).rev() {
                        let v = self.children[u][ci];
                        let target = rows[ci + 1][left].clone();
                        let best = self.best_row(v);
                        let b2 = (0..=left.min(best.len() - 1))
                            .find(|&b2| {
                                rows[ci].get(left - b2).is_some_and(|c| sum(c, &best[b2]) == target)
                            })
                            .expect("free row traceback");
                        stack.push((v, State::Any(b2)));
                        left -= b2;
                    }
                    assert_eq!(left, 0);
                }
                State::Kept(shape, b) => {
                    let rows = self.kept_rows(u);
                    let (mut shape, mut left) = (shape, b);
                    for ci in (0..self.children[u].len()).rev() {
                        let v = self.children[u][ci];
                        let target = rows[ci + 1][&shape][left].clone();
                        let prev = |s: u32, b: usize| rows[ci].get(&s).and_then(|r| r.get(b)).cloned().flatten();
                        let by_delete = (1..=left.min(self.cap(v)))
                            .find(|&b2| sum(&prev(shape, left - b2), &self.f[v][b2]) == target);
                        if let Some(b2) = by_delete {
                            stack.push((v, State::Deleted(b2)));
                            left -= b2;
                            continue;
                        }
                        let (prefix, child_shape) = self.shapes.parts[shape as usize];
                        assert_ne!(shape, 0, "kept row traceback");
                        let crow = &self.kept[v][&child_shape];
                        let b2 = (0..=left.min(crow.len() - 1))
                            .find(|&b2| sum(&prev(prefix, left - b2), &crow[b2]) == target)
                            .expect("kept row traceback");
                        stack.push((v, State::Kept(child_shape, b2)));
                        shape = prefix;
                        left -= b2;
                    }
                    assert_eq!((shape, left), (0, 0));
                }
                State::Any(_) => unreachable!(),
            }
        }
        deleted.sort_unstable();
        deleted
    }
}

trait MinByCost<V> {
    fn min_by_cost(self, other: Option<V>) -> Option<V>;
}

impl<V: Cost> MinByCost<V> for Option<V> {
    fn min_by_cost(self, other: Option<V>) -> Option<V> {
        match (self, other) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        }
    }
}
