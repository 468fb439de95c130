//! Finitely generated semigroup actions on a finite space.
//!
//! A generator is either a deterministic self-map of the points
//! ([`Transformation`]) or a row-stochastic matrix ([`StochasticMatrix`]),
//! which acts affinely on measures as `μ ↦ μ·S`. Words apply left to right.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num::{One, Signed, Zero};

use crate::spaces::{tv_distance, FiniteSpace, Measure};
use crate::{Error, Result, Q};

/// A total self-map of `{0, …, m−1}`; `image[i]` is the image of point `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transformation {
    image: Vec<usize>,
}

impl Transformation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let m = image.len();
        if let Some(&bad) = image.iter().find(|&&p| p >= m) {
            return Err(Error::InvalidPoint { index: bad, size: m });
        }
        Ok(Transformation { image })
    }

    pub fn identity(m: usize) -> Self {
        Transformation { image: (0..m).collect() }
    }

    pub fn constant(m: usize, target: usize) -> Self {
        assert!(target < m);
        Transformation { image: vec![target; m] }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, point: usize) -> usize {
        self.image[point]
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Transformation) -> Transformation {
        Transformation { image: self.image.iter().map(|&p| next.image[p]).collect() }
    }

    pub fn is_constant(&self) -> bool {
        self.image.windows(2).all(|w| w[0] == w[1])
    }

    pub fn is_bijective(&self) -> bool {
        let mut hit = vec![false; self.len()];
        for &p in &self.image {
            if hit[p] {
                return false;
            }
            hit[p] = true;
        }
        true
    }

    /// Image of a set of points, sorted and deduplicated.
    pub fn apply_set(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&p| self.image[p]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Pushforward `λ ↦ λ∘t⁻¹`: each target collects the mass of its preimage.
    pub fn push(&self, mu: &Measure) -> Result<Measure> {
        if mu.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: mu.len() });
        }
        let mut out = vec![Q::zero(); self.len()];
        for (i, w) in mu.weights().iter().enumerate() {
            out[self.image[i]] += w;
        }
        Ok(Measure::from_weights_unchecked(out))
    }

    pub fn to_matrix(&self) -> StochasticMatrix {
        let m = self.len();
        let rows = self
            .image
            .iter()
            .map(|&t| (0..m).map(|j| if j == t { Q::one() } else { Q::zero() }).collect())
            .collect();
        StochasticMatrix { rows }
    }
}

/// A square matrix with entries in `[0,1]` and every row summing to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StochasticMatrix {
    rows: Vec<Vec<Q>>,
}

impl StochasticMatrix {
    pub fn new(rows: Vec<Vec<Q>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty stochastic matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, found: row.len() });
            }
            if row.iter().any(|v| v.is_negative() || *v > Q::one()) {
                return Err(Error::InvalidArgument(format!("row {i} has an entry outside [0,1]")));
            }
            if !row.iter().sum::<Q>().is_one() {
                return Err(Error::InvalidArgument(format!("row {i} does not sum to 1")));
            }
        }
        Ok(StochasticMatrix { rows })
    }

    pub fn identity(n: usize) -> Self {
        Transformation::identity(n).to_matrix()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Measure {
        Measure::from_weights_unchecked(self.rows[i].clone())
    }

    /// Matrix product `self · other` (apply `self`, then `other`).
    pub fn then(&self, other: &StochasticMatrix) -> StochasticMatrix {
        StochasticMatrix { rows: crate::linalg::mat_mul(&self.rows, &other.rows) }
    }

    /// Row vector times matrix, `μ·S`.
    pub fn push(&self, mu: &Measure) -> Result<Measure> {
        if mu.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: mu.len() });
        }
        let n = self.len();
        let out = (0..n)
            .map(|j| mu.weights().iter().zip(&self.rows).map(|(w, r)| w * &r[j]).sum())
            .collect();
        Ok(Measure::from_weights_unchecked(out))
    }

    /// `Some(t)` when every row is a unit vector, i.e. the matrix of a map.
    pub fn as_transformation(&self) -> Option<Transformation> {
        let image = self
            .rows
            .iter()
            .map(|row| {
                if row.iter().all(|v| v.is_zero() || v.is_one()) {
                    row.iter().position(One::is_one)
                } else {
                    None
                }
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Transformation { image })
    }

    pub fn is_rank_one(&self) -> bool {
        self.rows.windows(2).all(|w| w[0] == w[1])
    }
}

/// Dobrushin ergodicity coefficient `½ max_{i,j} Σ_k |S_ik − S_jk|`.
pub fn dobrushin(s: &StochasticMatrix) -> Q {
    let n = s.len();
    let mut best = Q::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = tv_distance(&s.row(i), &s.row(j)).expect("rows share a length");
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// A sequence of generator indices, applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn then(&self, letter: usize) -> Word {
        let mut letters = self.0.clone();
        letters.push(letter);
        Word(letters)
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Deterministic,
    Stochastic,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionKind::Deterministic => "deterministic",
            ActionKind::Stochastic => "stochastic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generators {
    Deterministic(Vec<Transformation>),
    Stochastic(Vec<StochasticMatrix>),
}

/// A finite space together with the generators of the acting semigroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSystem {
    space: FiniteSpace,
    generators: Generators,
}

impl ActionSystem {
    pub fn new(space: FiniteSpace, generators: Generators) -> Result<Self> {
        let m = space.len();
        let count = match &generators {
            Generators::Deterministic(g) => g.len(),
            Generators::Stochastic(g) => g.len(),
        };
        if count == 0 {
            return Err(Error::InvalidArgument("system needs at least one generator".into()));
        }
        let sizes: Vec<usize> = match &generators {
            Generators::Deterministic(g) => g.iter().map(Transformation::len).collect(),
            Generators::Stochastic(g) => g.iter().map(StochasticMatrix::len).collect(),
        };
        if let Some((index, &found)) = sizes.iter().enumerate().find(|(_, &s)| s != m) {
            return Err(Error::InvalidGenerator {
                index,
                reason: format!("acts on {found} points but the space has {m}"),
            });
        }
        Ok(ActionSystem { space, generators })
    }

    pub fn deterministic(space: FiniteSpace, maps: Vec<Transformation>) -> Result<Self> {
        Self::new(space, Generators::Deterministic(maps))
    }

    pub fn stochastic(space: FiniteSpace, matrices: Vec<StochasticMatrix>) -> Result<Self> {
        Self::new(space, Generators::Stochastic(matrices))
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn generators(&self) -> &Generators {
        &self.generators
    }

    pub fn kind(&self) -> ActionKind {
        match self.generators {
            Generators::Deterministic(_) => ActionKind::Deterministic,
            Generators::Stochastic(_) => ActionKind::Stochastic,
        }
    }

    pub fn points(&self) -> usize {
        self.space.len()
    }

    pub fn generator_count(&self) -> usize {
        match &self.generators {
            Generators::Deterministic(g) => g.len(),
            Generators::Stochastic(g) => g.len(),
        }
    }

    pub fn maps(&self) -> Result<&[Transformation]> {
        match &self.generators {
            Generators::Deterministic(g) => Ok(g),
            Generators::Stochastic(_) => Err(Error::UnsupportedKind("deterministic")),
        }
    }

    /// Every generator as a stochastic matrix (maps embed as 0/1 matrices).
    pub fn matrices(&self) -> Vec<StochasticMatrix> {
        match &self.generators {
            Generators::Deterministic(g) => g.iter().map(Transformation::to_matrix).collect(),
            Generators::Stochastic(g) => g.clone(),
        }
    }

    /// The deterministic system behind a stochastic one whose generators are
    /// all 0/1 matrices; `None` otherwise.
    pub fn deterministic_embedding(&self) -> Option<ActionSystem> {
        match &self.generators {
            Generators::Deterministic(_) => Some(self.clone()),
            Generators::Stochastic(g) => {
                let maps = g
                    .iter()
                    .map(StochasticMatrix::as_transformation)
                    .collect::<Option<Vec<_>>>()?;
                Some(ActionSystem { space: self.space.clone(), generators: Generators::Deterministic(maps) })
            }
        }
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        let generators = self.generator_count();
        match w.0.iter().find(|&&l| l >= generators) {
            Some(&letter) => Err(Error::InvalidWord { letter, generators }),
            None => Ok(()),
        }
    }

    /// The map induced by a word on a deterministic system.
    pub fn word_transformation(&self, w: &Word) -> Result<Transformation> {
        let maps = self.maps()?;
        self.check_word(w)?;
        Ok(w.0
            .iter()
            .fold(Transformation::identity(self.points()), |acc, &l| acc.then(&maps[l])))
    }

    /// The matrix induced by a word (product of generator matrices).
    pub fn word_matrix(&self, w: &Word) -> Result<StochasticMatrix> {
        self.check_word(w)?;
        Ok(match &self.generators {
            Generators::Deterministic(_) => self.word_transformation(w)?.to_matrix(),
            Generators::Stochastic(g) => w
                .0
                .iter()
                .fold(StochasticMatrix::identity(self.points()), |acc, &l| acc.then(&g[l])),
        })
    }
}

/// Pushforward of `mu` along the word `w`.
pub fn pushforward(sys: &ActionSystem, w: &Word, mu: &Measure) -> Result<Measure> {
    if mu.len() != sys.points() {
        return Err(Error::Dimension { expected: sys.points(), found: mu.len() });
    }
    sys.check_word(w)?;
    let mut current = mu.clone();
    match sys.generators() {
        Generators::Deterministic(g) => {
            for &l in &w.0 {
                current = g[l].push(&current)?;
            }
        }
        Generators::Stochastic(g) => {
            for &l in &w.0 {
                current = g[l].push(&current)?;
            }
        }
    }
    Ok(current)
}

/// The finite monoid generated by a deterministic system.
#[derive(Debug, Clone)]
pub struct MonoidClosure {
    /// Elements in order of discovery; `elements[0]` is the identity.
    pub elements: Vec<Transformation>,
    /// Shortest (then lexicographically least) word producing each element.
    pub witnesses: Vec<Word>,
    /// Set when the element cap stopped the enumeration early.
    pub truncated: bool,
}

impl MonoidClosure {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, t: &Transformation) -> Option<usize> {
        self.elements.iter().position(|e| e == t)
    }
}

/// Breadth-first composition closure from the identity, deduplicated by
/// image vector, stopping after `cap` elements.
pub fn closure(sys: &ActionSystem, cap: usize) -> Result<MonoidClosure> {
    let maps = sys.maps()?;
    if cap == 0 {
        return Err(Error::InvalidArgument("closure cap must be at least 1".into()));
    }
    let identity = Transformation::identity(sys.points());
    let mut seen: HashMap<Transformation, usize> = HashMap::new();
    seen.insert(identity.clone(), 0);
    let mut elements = vec![identity];
    let mut witnesses = vec![Word::empty()];
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    'bfs: while let Some(i) = queue.pop_front() {
        for (letter, g) in maps.iter().enumerate() {
            let next = elements[i].then(g);
            if seen.contains_key(&next) {
                continue;
            }
            if elements.len() == cap {
                truncated = true;
                break 'bfs;
            }
            seen.insert(next.clone(), elements.len());
            witnesses.push(witnesses[i].then(letter));
            queue.push_back(elements.len());
            elements.push(next);
        }
    }
    Ok(MonoidClosure { elements, witnesses, truncated })
}

/// A finite magma given by its multiplication table, validated associative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemigroupTable {
    table: Vec<Vec<usize>>,
}

impl SemigroupTable {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty semigroup table".into()));
        }
        for row in &table {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, found: row.len() });
            }
            if let Some(&bad) = row.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidPoint { index: bad, size: n });
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if table[table[x][y]][z] != table[x][table[y][z]] {
                        return Err(Error::NonAssociative { x, y, z });
                    }
                }
            }
        }
        Ok(SemigroupTable { table })
    }

    /// `ℤ/n` under addition.
    pub fn cyclic(n: usize) -> Self {
        SemigroupTable { table: (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect() }
    }

    /// `x·y = x`.
    pub fn left_zero(n: usize) -> Self {
        SemigroupTable { table: (0..n).map(|x| vec![x; n]).collect() }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn product(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    /// A two-sided identity element, if there is one.
    pub fn identity(&self) -> Option<usize> {
        let n = self.len();
        (0..n).find(|&e| (0..n).all(|x| self.table[e][x] == x && self.table[x][e] == x))
    }
}

/// Convolution `(μ*ν)(z) = Σ_{x·y=z} μ(x)ν(y)`.
pub fn convolution(table: &SemigroupTable, mu: &Measure, nu: &Measure) -> Result<Measure> {
    let n = table.len();
    for m in [mu, nu] {
        if m.len() != n {
            return Err(Error::Dimension { expected: n, found: m.len() });
        }
    }
    let mut out = vec![Q::zero(); n];
    for x in mu.support() {
        for y in nu.support() {
            out[table.product(x, y)] += mu.weight(x) * nu.weight(y);
        }
    }
    Ok(Measure::from_weights_unchecked(out))
}

/// `true` when `tv(μS, νS) ≤ δ(S)·tv(μ, ν)` holds exactly.
pub fn contraction_holds(s: &StochasticMatrix, mu: &Measure, nu: &Measure) -> Result<bool> {
    let before = tv_distance(mu, nu)?;
    let after = tv_distance(&s.push(mu)?, &s.push(nu)?)?;
    Ok(after <= dobrushin(s) * before)
}

/// Stationary distribution of `s` when the invariant subspace is
/// one-dimensional; `None` otherwise.
pub fn unique_stationary(s: &StochasticMatrix) -> Option<Measure> {
    let n = s.len();
    // πS = π  ⇔  (Sᵀ − I)πᵀ = 0
    let mut system = crate::linalg::transpose(s.rows());
    for (i, row) in system.iter_mut().enumerate() {
        row[i] -= Q::one();
    }
    let basis = crate::linalg::nullspace(&system, n);
    if basis.len() != 1 {
        return None;
    }
    let v = &basis[0];
    let total: Q = v.iter().sum();
    if total.is_zero() {
        return None;
    }
    let weights: Vec<Q> = v.iter().map(|x| x / &total).collect();
    Measure::new(weights).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, ratio};

    fn det(m: usize, maps: &[&[usize]]) -> ActionSystem {
        ActionSystem::deterministic(
            FiniteSpace::discrete(m),
            maps.iter().map(|t| Transformation::new(t.to_vec()).unwrap()).collect(),
        )
        .unwrap()
    }

    fn mat(rows: &[&[(i64, i64)]]) -> StochasticMatrix {
        StochasticMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|&(a, b)| ratio(a, b)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn pushforward_examples() {
        let constant = det(2, &[&[0, 0]]);
        let half = Measure::uniform(2);
        assert_eq!(pushforward(&constant, &Word(vec![0]), &half).unwrap(), Measure::dirac(2, 0));
        assert_eq!(pushforward(&constant, &Word::empty(), &half).unwrap(), half);

        let swap = det(2, &[&[1, 0]]);
        let mu = Measure::new(vec![ratio(3, 4), ratio(1, 4)]).unwrap();
        let pushed = pushforward(&swap, &Word(vec![0]), &mu).unwrap();
        assert_eq!(pushed.weights(), &[ratio(1, 4), ratio(3, 4)]);
    }

    #[test]
    fn pushforward_errors() {
        let swap = det(2, &[&[1, 0]]);
        assert!(matches!(
            pushforward(&swap, &Word::empty(), &Measure::uniform(3)),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            pushforward(&swap, &Word(vec![1]), &Measure::uniform(2)),
            Err(Error::InvalidWord { .. })
        ));
    }

    #[test]
    fn stochastic_pushforward_is_row_times_matrix() {
        let s = mat(&[&[(3, 4), (1, 4)], &[(1, 4), (3, 4)]]);
        let sys = ActionSystem::stochastic(FiniteSpace::discrete(2), vec![s]).unwrap();
        let out = pushforward(&sys, &Word(vec![0]), &Measure::dirac(2, 0)).unwrap();
        assert_eq!(out.weights(), &[ratio(3, 4), ratio(1, 4)]);
        let out = pushforward(&sys, &Word(vec![0, 0]), &Measure::dirac(2, 0)).unwrap();
        assert_eq!(out.weights(), &[ratio(5, 8), ratio(3, 8)]);
    }

    #[test]
    fn closure_examples() {
        assert_eq!(closure(&det(3, &[&[0, 1, 2]]), 100).unwrap().len(), 1);
        let c = closure(&det(3, &[&[1, 1, 1]]), 100).unwrap();
        assert_eq!(c.len(), 2);
        assert!(!c.truncated);
        assert!(c.elements[1].is_constant());
    }

    #[test]
    fn closure_truncates_at_cap() {
        // S_4 generated by a 4-cycle and a transposition has 24 elements.
        let sys = det(4, &[&[1, 2, 3, 0], &[1, 0, 2, 3]]);
        let full = closure(&sys, 1000).unwrap();
        assert_eq!(full.len(), 24);
        assert!(!full.truncated);
        let cut = closure(&sys, 10).unwrap();
        assert_eq!(cut.len(), 10);
        assert!(cut.truncated);
    }

    #[test]
    fn closure_witnesses_replay() {
        let sys = det(4, &[&[1, 2, 3, 0], &[1, 1, 2, 3]]);
        let c = closure(&sys, 10_000).unwrap();
        for (e, w) in c.elements.iter().zip(&c.witnesses) {
            assert_eq!(&sys.word_transformation(w).unwrap(), e);
        }
    }

    #[test]
    fn closure_rejects_stochastic() {
        let sys = ActionSystem::stochastic(FiniteSpace::discrete(2), vec![StochasticMatrix::identity(2)])
            .unwrap();
        assert_eq!(closure(&sys, 10).unwrap_err(), Error::UnsupportedKind("deterministic"));
    }

    #[test]
    fn convolution_examples() {
        let lz = SemigroupTable::left_zero(3);
        let mu = Measure::new(vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)]).unwrap();
        let nu = Measure::dirac(3, 2);
        assert_eq!(convolution(&lz, &mu, &nu).unwrap(), mu);

        let z2 = SemigroupTable::cyclic(2);
        let d1 = Measure::dirac(2, 1);
        assert_eq!(convolution(&z2, &d1, &d1).unwrap(), Measure::dirac(2, 0));
        let nu = Measure::new(vec![ratio(2, 7), ratio(5, 7)]).unwrap();
        assert_eq!(convolution(&z2, &Measure::uniform(2), &nu).unwrap(), Measure::uniform(2));
    }

    #[test]
    fn non_associative_table_rejected() {
        // x·y = y−x mod 3 is not associative.
        let table = (0..3).map(|x| (0..3).map(|y| (y + 3 - x) % 3).collect()).collect();
        assert!(matches!(SemigroupTable::new(table), Err(Error::NonAssociative { .. })));
        assert!(SemigroupTable::new(SemigroupTable::cyclic(4).rows().to_vec()).is_ok());
    }

    #[test]
    fn dobrushin_examples() {
        assert_eq!(dobrushin(&StochasticMatrix::identity(2)), int(1));
        assert_eq!(dobrushin(&mat(&[&[(1, 1), (0, 1)], &[(1, 1), (0, 1)]])), int(0));
        assert_eq!(dobrushin(&mat(&[&[(3, 4), (1, 4)], &[(1, 4), (3, 4)]])), ratio(1, 2));
    }

    #[test]
    fn stationary_of_symmetric_chain_is_uniform() {
        let s = mat(&[&[(3, 4), (1, 4)], &[(1, 4), (3, 4)]]);
        assert_eq!(unique_stationary(&s), Some(Measure::uniform(2)));
        assert_eq!(unique_stationary(&StochasticMatrix::identity(2)), None);
    }

    #[test]
    fn matrix_to_transformation() {
        let t = Transformation::new(vec![2, 0, 0]).unwrap();
        assert_eq!(t.to_matrix().as_transformation(), Some(t));
        assert_eq!(mat(&[&[(1, 2), (1, 2)], &[(0, 1), (1, 1)]]).as_transformation(), None);
    }
}
