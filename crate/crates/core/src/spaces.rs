//! Finite metric spaces, exact probability measures on them, and the
//! resolution-`q` grid of the probability simplex.

use std::collections::HashMap;
use std::fmt;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};

use crate::{Error, Result, Q};

/// A finite metric space with exact rational distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    metric: Vec<Vec<Q>>,
}

impl FiniteSpace {
    /// Validates the metric axioms exactly (symmetry, zero diagonal,
    /// positivity off the diagonal, triangle inequality).
    pub fn new(labels: Vec<String>, metric: Vec<Vec<Q>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidMetric("space has no points".into()));
        }
        if metric.len() != n {
            return Err(Error::Dimension { expected: n, found: metric.len() });
        }
        for row in &metric {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, found: row.len() });
            }
        }
        for i in 0..n {
            if !metric[i][i].is_zero() {
                return Err(Error::InvalidMetric(format!("d({i},{i}) is not zero")));
            }
            for j in 0..n {
                if metric[i][j] != metric[j][i] {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) != d({j},{i})")));
                }
                if i != j && !metric[i][j].is_positive() {
                    return Err(Error::InvalidMetric(format!(
                        "d({i},{j}) must be positive for distinct points"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if metric[i][k] > &metric[i][j] + &metric[j][k] {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteSpace { labels, metric })
    }

    /// `m` points at mutual distance one.
    pub fn discrete(m: usize) -> Self {
        let metric = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { Q::zero() } else { Q::one() })
                    .collect()
            })
            .collect();
        FiniteSpace { labels: default_labels(m), metric }
    }

    /// `m` points on a line at unit spacing.
    pub fn path(m: usize) -> Self {
        let metric = (0..m)
            .map(|i| (0..m).map(|j| Q::from_integer(BigInt::from(i.abs_diff(j)))).collect())
            .collect();
        FiniteSpace { labels: default_labels(m), metric }
    }

    /// The same space with its labels replaced.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn metric(&self) -> &[Vec<Q>] {
        &self.metric
    }

    pub fn distance(&self, i: usize, j: usize) -> &Q {
        &self.metric[i][j]
    }

    pub(crate) fn check_point(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidPoint { index, size: self.len() })
        }
    }
}

fn default_labels(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("x{i}")).collect()
}

/// An exact probability vector over the points of a finite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Measure {
    weights: Vec<Q>,
}

impl Measure {
    pub fn new(weights: Vec<Q>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("no weights".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if w.is_negative() || *w > Q::one() {
                return Err(Error::InvalidMeasure(format!("weight {i} = {w} is outside [0,1]")));
            }
        }
        let total: Q = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Measure { weights })
    }

    /// Caller guarantees the probability-vector invariant.
    pub(crate) fn from_weights_unchecked(weights: Vec<Q>) -> Self {
        debug_assert!(weights.iter().sum::<Q>().is_one());
        Measure { weights }
    }

    pub fn dirac(m: usize, point: usize) -> Self {
        assert!(point < m, "point {point} out of range for {m} points");
        let mut weights = vec![Q::zero(); m];
        weights[point] = Q::one();
        Measure { weights }
    }

    pub fn uniform(m: usize) -> Self {
        let w = Q::new(BigInt::one(), BigInt::from(m));
        Measure { weights: vec![w; m] }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn weight(&self, point: usize) -> &Q {
        &self.weights[point]
    }

    /// Total mass on a set of points (repeats are counted once).
    pub fn mass(&self, set: &[usize]) -> Q {
        let mut seen = vec![false; self.len()];
        let mut total = Q::zero();
        for &p in set {
            if p < self.len() && !seen[p] {
                seen[p] = true;
                total += &self.weights[p];
            }
        }
        total
    }

    /// `Some(x)` when this is the point mass at `x`.
    pub fn point_mass(&self) -> Option<usize> {
        self.weights.iter().position(One::is_one)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.weights[i].is_zero()).collect()
    }

    /// The convex combination `a·self + (1−a)·other`.
    pub fn mix(&self, a: &Q, other: &Measure) -> Result<Measure> {
        check_same_len(self, other)?;
        if a.is_negative() || *a > Q::one() {
            return Err(Error::InvalidArgument(format!("mixing coefficient {a} outside [0,1]")));
        }
        let b = Q::one() - a;
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(x, y)| a * x + &b * y)
            .collect();
        Ok(Measure { weights })
    }

    /// Least common multiple of the weight denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

fn check_same_len(mu: &Measure, nu: &Measure) -> Result<()> {
    if mu.len() == nu.len() {
        Ok(())
    } else {
        Err(Error::Dimension { expected: mu.len(), found: nu.len() })
    }
}

/// Total variation distance `½ Σ |μᵢ − νᵢ|`.
pub fn tv_distance(mu: &Measure, nu: &Measure) -> Result<Q> {
    check_same_len(mu, nu)?;
    let sum: Q = mu
        .weights
        .iter()
        .zip(&nu.weights)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / Q::from_integer(BigInt::from(2)))
}

/// Exact Wasserstein-1 (earth mover) distance under the space's metric.
///
/// Masses and costs are scaled to integers by their common denominators and
/// the resulting transportation problem is solved as an integer min-cost flow.
pub fn w1_distance(space: &FiniteSpace, mu: &Measure, nu: &Measure) -> Result<Q> {
    if mu.len() != space.len() {
        return Err(Error::Dimension { expected: space.len(), found: mu.len() });
    }
    check_same_len(mu, nu)?;
    let n = space.len();

    let mass_scale = mu.common_denominator().lcm(&nu.common_denominator());
    let cost_scale = space
        .metric
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, d| acc.lcm(d.denom()));

    let to_i128 = |x: &Q, scale: &BigInt, what: &str| -> Result<i128> {
        let scaled = x * Q::from_integer(scale.clone());
        debug_assert!(scaled.is_integer());
        scaled
            .to_integer()
            .to_i128()
            .ok_or_else(|| Error::Overflow(format!("{what} does not fit in 128 bits")))
    };
    let supply = mu
        .weights
        .iter()
        .map(|w| to_i128(w, &mass_scale, "scaled mass"))
        .collect::<Result<Vec<_>>>()?;
    let demand = nu
        .weights
        .iter()
        .map(|w| to_i128(w, &mass_scale, "scaled mass"))
        .collect::<Result<Vec<_>>>()?;
    let mut cost = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            cost[i][j] = to_i128(&space.metric[i][j], &cost_scale, "scaled distance")?;
        }
    }

    let total = transport_cost(&supply, &demand, &cost)?;
    Ok(Q::new(BigInt::from(total), mass_scale * cost_scale))
}

struct Edge {
    to: usize,
    cap: i128,
    cost: i128,
}

/// Min-cost transportation by successive shortest paths (Bellman–Ford on the
/// residual network). Supplies and demands must have equal totals.
fn transport_cost(supply: &[i128], demand: &[i128], cost: &[Vec<i128>]) -> Result<i128> {
    let n = supply.len();
    let source = 2 * n;
    let sink = 2 * n + 1;
    let nodes = 2 * n + 2;
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut add = |edges: &mut Vec<Edge>, from: usize, to: usize, cap: i128, cost: i128| {
        adj[from].push(edges.len());
        edges.push(Edge { to, cap, cost });
        adj[to].push(edges.len());
        edges.push(Edge { to: from, cap: 0, cost: -cost });
    };
    let total: i128 = supply.iter().sum();
    for i in 0..n {
        if supply[i] > 0 {
            add(&mut edges, source, i, supply[i], 0);
        }
        if demand[i] > 0 {
            add(&mut edges, n + i, sink, demand[i], 0);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if supply[i] > 0 && demand[j] > 0 {
                add(&mut edges, i, n + j, total, cost[i][j]);
            }
        }
    }

    let mut flow = 0i128;
    let mut result = 0i128;
    while flow < total {
        let mut dist: Vec<Option<i128>> = vec![None; nodes];
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        dist[source] = Some(0);
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                let Some(du) = dist[u] else { continue };
                for &e in &adj[u] {
                    let edge = &edges[e];
                    if edge.cap > 0 && dist[edge.to].is_none_or(|dv| du + edge.cost < dv) {
                        dist[edge.to] = Some(du + edge.cost);
                        via[edge.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let Some(path_cost) = dist[sink] else {
            return Err(Error::InvalidMeasure("unequal total masses".into()));
        };
        let mut push = total - flow;
        let mut v = sink;
        while let Some(e) = via[v] {
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        let mut v = sink;
        while let Some(e) = via[v] {
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            v = edges[e ^ 1].to;
        }
        flow += push;
        result += push * path_cost;
    }
    Ok(result)
}

/// All measures on `m` points whose weights are multiples of `1/q`, in
/// decreasing lexicographic order of numerator vectors (so `δ₀` comes first).
pub fn grid_atoms(m: usize, q: usize) -> Vec<Measure> {
    compositions(m, q)
        .into_iter()
        .map(|nums| numerators_to_measure(&nums, q))
        .collect()
}

fn compositions(m: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, remaining: usize, slots: usize, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=remaining).rev() {
            prefix.push(a);
            rec(prefix, remaining - a, slots - 1, out);
            prefix.pop();
        }
    }
    assert!(m >= 1 && q >= 1, "grid needs m >= 1 and q >= 1");
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(m), q, m, &mut out);
    out
}

fn numerators_to_measure(nums: &[usize], q: usize) -> Measure {
    let den = BigInt::from(q);
    Measure::from_weights_unchecked(
        nums.iter()
            .map(|&a| Q::new(BigInt::from(a), den.clone()))
            .collect(),
    )
}

/// The resolution-`q` grid of the probability simplex over `m` points.
#[derive(Debug, Clone)]
pub struct GridSimplex {
    points: usize,
    resolution: usize,
    atoms: Vec<Measure>,
    index: HashMap<Measure, usize>,
}

impl GridSimplex {
    pub fn new(points: usize, resolution: usize) -> Result<Self> {
        if points == 0 || resolution == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one point and resolution at least 1".into(),
            ));
        }
        let atoms = grid_atoms(points, resolution);
        let index = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Ok(GridSimplex { points, resolution, atoms, index })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn atoms(&self) -> &[Measure] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, i: usize) -> &Measure {
        &self.atoms[i]
    }

    pub fn index_of(&self, mu: &Measure) -> Option<usize> {
        self.index.get(mu).copied()
    }

    /// Atom index of the vertex `δ_x`.
    pub fn vertex(&self, x: usize) -> usize {
        self.index[&Measure::dirac(self.points, x)]
    }
}

/// `binomial(n, k)` as a `u128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// For each set, the smallest mass any measure in `seq` puts on it.
///
/// `sets` must be nested increasing. The sequence is tight at level `1−ε`
/// when some entry is at least `1−ε`; see [`is_tight`].
pub fn tightness_profile(seq: &[Measure], sets: &[Vec<usize>]) -> Result<Vec<Q>> {
    let Some(first) = seq.first() else {
        return Err(Error::InvalidArgument("empty measure sequence".into()));
    };
    for mu in seq {
        check_same_len(first, mu)?;
    }
    for pair in sets.windows(2) {
        if !pair[0].iter().all(|p| pair[1].contains(p)) {
            return Err(Error::InvalidArgument("sets are not nested increasing".into()));
        }
    }
    Ok(sets
        .iter()
        .map(|set| {
            seq.iter()
                .map(|mu| mu.mass(set))
                .min()
                .expect("sequence is nonempty")
        })
        .collect())
}

pub fn is_tight(profile: &[Q], epsilon: &Q) -> bool {
    let level = Q::one() - epsilon;
    profile.iter().any(|m| *m >= level)
}
