//! Decision procedures for proximality and strong proximality.
//!
//! Deterministic systems are decided exactly: a pair is proximal iff some
//! word merges it (breadth-first search on the pair graph), and the system is
//! strongly proximal iff some word acts as a constant map (breadth-first
//! search on the subset automaton). Stochastic systems are searched word by
//! word under a [`Budget`]; they answer `Unknown` rather than guess.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num::{BigInt, One, Signed, Zero};

use crate::actions::{dobrushin, pushforward, unique_stationary, ActionKind, ActionSystem, StochasticMatrix, Transformation, Word};
use crate::spaces::{tv_distance, Measure};
use crate::{Error, Result, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Yes => "YES",
            Status::No => "NO",
            Status::Unknown => "UNKNOWN",
        })
    }
}

/// Search limits. `epsilon` is the total-variation threshold that counts as
/// "converged" for stochastic systems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budget {
    pub max_word_len: usize,
    pub max_closure: usize,
    pub epsilon: Q,
}

impl Budget {
    pub fn new(max_word_len: usize, max_closure: usize, epsilon: Q) -> Result<Self> {
        if max_word_len == 0 || max_closure == 0 {
            return Err(Error::InvalidArgument("budget limits must be positive".into()));
        }
        if !epsilon.is_positive() || epsilon >= Q::one() {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} must lie in (0,1)")));
        }
        Ok(Budget { max_word_len, max_closure, epsilon })
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_word_len: 64,
            max_closure: 100_000,
            epsilon: Q::new(BigInt::one(), BigInt::from(1000)),
        }
    }
}

/// What a witness word is claimed to achieve; checked by [`Verdict::replay`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Claim {
    /// The word sends every point to one common point.
    Collapse,
    /// Rows `x` and `y` of the word's matrix agree exactly (`tolerance` is
    /// `None`) or lie within total variation `tolerance`.
    MergePair { x: usize, y: usize, tolerance: Option<Q> },
    /// Pushforwards of both measures agree exactly or within `tolerance`.
    MergeMeasures { mu: Measure, nu: Measure, tolerance: Option<Q> },
    /// The word's Dobrushin coefficient is below one.
    Contract,
    /// Every row of the word's matrix puts more than `1 − epsilon` on `vertex`.
    NearVertex { vertex: usize, epsilon: Q },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Word>,
    pub claim: Option<Claim>,
    pub certificate: Option<String>,
}

impl Verdict {
    fn yes(witness: Word, claim: Claim, certificate: impl Into<String>) -> Self {
        Verdict {
            status: Status::Yes,
            witness: Some(witness),
            claim: Some(claim),
            certificate: Some(certificate.into()),
        }
    }

    fn yes_certified(certificate: impl Into<String>) -> Self {
        Verdict { status: Status::Yes, witness: None, claim: None, certificate: Some(certificate.into()) }
    }

    fn no(certificate: impl Into<String>) -> Self {
        Verdict { status: Status::No, witness: None, claim: None, certificate: Some(certificate.into()) }
    }

    fn unknown(certificate: impl Into<String>) -> Self {
        Verdict { status: Status::Unknown, witness: None, claim: None, certificate: Some(certificate.into()) }
    }

    pub fn is_yes(&self) -> bool {
        self.status == Status::Yes
    }

    /// Re-executes the witness word on `sys` and checks the claim. Verdicts
    /// without a witness have nothing to replay and pass trivially.
    pub fn replay(&self, sys: &ActionSystem) -> Result<bool> {
        let (Some(word), Some(claim)) = (&self.witness, &self.claim) else {
            return Ok(true);
        };
        let matrix = sys.word_matrix(word)?;
        Ok(match claim {
            Claim::Collapse => {
                matrix.is_rank_one() && matrix.as_transformation().is_some_and(|t| t.is_constant())
            }
            Claim::MergePair { x, y, tolerance } => {
                sys.space().check_point(*x)?;
                sys.space().check_point(*y)?;
                within(&matrix.row(*x), &matrix.row(*y), tolerance.as_ref())?
            }
            Claim::MergeMeasures { mu, nu, tolerance } => {
                let a = pushforward(sys, word, mu)?;
                let b = pushforward(sys, word, nu)?;
                within(&a, &b, tolerance.as_ref())?
            }
            Claim::Contract => dobrushin(&matrix) < Q::one(),
            Claim::NearVertex { vertex, epsilon } => {
                sys.space().check_point(*vertex)?;
                near_vertex(&matrix, *vertex, epsilon)
            }
        })
    }
}

fn within(a: &Measure, b: &Measure, tolerance: Option<&Q>) -> Result<bool> {
    Ok(match tolerance {
        None => a == b,
        Some(eps) => tv_distance(a, b)? < *eps,
    })
}

fn near_vertex(matrix: &StochasticMatrix, vertex: usize, epsilon: &Q) -> bool {
    let level = Q::one() - epsilon;
    matrix.rows().iter().all(|row| row[vertex] > level)
}

fn unordered(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Shortest (then lexicographically least) word merging `x` and `y`, by
/// breadth-first search on the pair graph.
fn merge_pair_word(maps: &[Transformation], x: usize, y: usize) -> std::result::Result<Word, usize> {
    if x == y {
        return Ok(Word::empty());
    }
    let start = unordered(x, y);
    let mut parent: HashMap<(usize, usize), ((usize, usize), usize)> = HashMap::new();
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(pair) = queue.pop_front() {
        for (letter, g) in maps.iter().enumerate() {
            let next = unordered(g.apply(pair.0), g.apply(pair.1));
            if next.0 == next.1 {
                let mut letters = vec![letter];
                let mut cur = pair;
                while let Some(&(prev, l)) = parent.get(&cur) {
                    letters.push(l);
                    cur = prev;
                }
                letters.reverse();
                return Ok(Word(letters));
            }
            if seen.insert(next) {
                parent.insert(next, (pair, letter));
                queue.push_back(next);
            }
        }
    }
    Err(seen.len())
}

/// Pairs `(a, b)`, `a < b`, from which the diagonal is reachable in the pair
/// graph, computed as a backward fixpoint.
fn mergeable_pairs(maps: &[Transformation], m: usize) -> Vec<Vec<bool>> {
    let mut merge = vec![vec![false; m]; m];
    for (a, row) in merge.iter_mut().enumerate() {
        row[a] = true;
    }
    loop {
        let mut changed = false;
        for a in 0..m {
            for b in (a + 1)..m {
                if merge[a][b] {
                    continue;
                }
                if maps.iter().any(|g| merge[g.apply(a)][g.apply(b)]) {
                    merge[a][b] = true;
                    merge[b][a] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return merge;
        }
    }
}

/// Synchronizing word built by repeatedly applying a shortest word that
/// merges some pair of the current image. Valid but not necessarily minimal.
pub fn greedy_reset_word(maps: &[Transformation], m: usize) -> Option<Word> {
    let mut current: Vec<usize> = (0..m).collect();
    let mut word = Word::empty();
    let mut map = Transformation::identity(m);
    while current.len() > 1 {
        let mut best: Option<Word> = None;
        for (i, &a) in current.iter().enumerate() {
            for &b in &current[i + 1..] {
                if let Ok(w) = merge_pair_word(maps, a, b) {
                    if best.as_ref().is_none_or(|cur| (w.len(), &w) < (cur.len(), cur)) {
                        best = Some(w);
                    }
                }
            }
        }
        let step = best?;
        let t = step
            .letters()
            .iter()
            .fold(Transformation::identity(m), |acc, &l| acc.then(&maps[l]));
        map = map.then(&t);
        current = t.apply_set(&current);
        word = word.concat(&step);
    }
    debug_assert!(map.is_constant());
    Some(word)
}

pub fn proximal_pair(sys: &ActionSystem, x: usize, y: usize, b: &Budget) -> Result<Verdict> {
    sys.space().check_point(x)?;
    sys.space().check_point(y)?;
    if let Some(det) = sys.deterministic_embedding() {
        let maps = det.maps()?;
        return Ok(match merge_pair_word(maps, x, y) {
            Ok(w) => Verdict::yes(
                w,
                Claim::MergePair { x, y, tolerance: None },
                "shortest merging word (pair-graph search)",
            ),
            Err(explored) => Verdict::no(format!(
                "diagonal unreachable from pair ({x},{y}); {explored} pair states exhausted"
            )),
        });
    }

    let eps = b.epsilon.clone();
    let dx = Measure::dirac(sys.points(), x);
    let dy = Measure::dirac(sys.points(), y);
    let found = search_words(sys, b, |s| {
        if tv_distance(&s.row(x), &s.row(y)).ok()? < eps {
            Some(Hit::Direct)
        } else if dobrushin(s) < Q::one() {
            Some(Hit::Contracting)
        } else {
            None
        }
    })?;
    Ok(match found {
        Search::Found(w, Hit::Direct) => Verdict::yes(
            w,
            Claim::MergePair { x, y, tolerance: Some(eps) },
            "rows within epsilon in total variation",
        ),
        Search::Found(w, Hit::Contracting) => contraction_verdict(sys, &w, &dx, &dy, b, |_, _| {
            Claim::MergePair { x, y, tolerance: Some(b.epsilon.clone()) }
        })?,
        Search::Exhausted { explored, .. } => Verdict::unknown(format!(
            "no word within budget ({explored} distinct matrices, max word length {})",
            b.max_word_len
        )),
    })
}

pub fn is_proximal(sys: &ActionSystem, b: &Budget) -> Result<Verdict> {
    if let Some(det) = sys.deterministic_embedding() {
        let maps = det.maps()?;
        let m = det.points();
        let merge = mergeable_pairs(maps, m);
        for a in 0..m {
            for c in (a + 1)..m {
                if !merge[a][c] {
                    return Ok(Verdict::no(format!(
                        "pair ({a},{c}) never merges: diagonal unreachable in the pair graph"
                    )));
                }
            }
        }
        let certificate = format!("all {} pairs merge", m * (m - 1) / 2);
        return Ok(match greedy_reset_word(maps, m) {
            Some(w) => Verdict::yes(w, Claim::Collapse, certificate),
            None => Verdict::yes_certified(certificate),
        });
    }

    Ok(match contracting_word(sys, b)? {
        Ok(w) => {
            let delta = dobrushin(&sys.word_matrix(&w)?);
            Verdict::yes(
                w,
                Claim::Contract,
                format!("dobrushin coefficient {delta} < 1: every pair contracts under powers"),
            )
        }
        Err((x, y)) => Verdict::no(format!(
            "rows {x} and {y} of every word matrix have disjoint supports, so points {x} and {y} \
             stay at total variation 1"
        )),
    })
}

/// Shortest word with Dobrushin coefficient below one when the budgeted
/// search finds one, else the pairwise construction of [`scrambling_word`].
/// `Err` carries a pair of points that no word brings together.
pub fn contracting_word(sys: &ActionSystem, b: &Budget) -> Result<std::result::Result<Word, (usize, usize)>> {
    let fallback = match scrambling_word(sys) {
        Ok(w) => w,
        Err(pair) => return Ok(Err(pair)),
    };
    Ok(Ok(match search_words(sys, b, |s| (dobrushin(s) < Q::one()).then_some(()))? {
        Search::Found(w, ()) => w,
        Search::Exhausted { .. } => fallback,
    }))
}

/// Shortest synchronizing (constant-producing) word of a deterministic system.
pub fn reset_word(sys: &ActionSystem, b: &Budget) -> Result<Verdict> {
    let maps = sys.maps()?;
    let m = sys.points();
    let full: Vec<usize> = (0..m).collect();
    if m == 1 {
        return Ok(Verdict::yes(Word::empty(), Claim::Collapse, "single point"));
    }

    let mut parent: HashMap<Vec<usize>, (Vec<usize>, usize)> = HashMap::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([full.clone()]);
    let mut frontier = vec![full.clone()];
    let mut depth = 0;
    let mut over_budget = false;
    'levels: while !frontier.is_empty() {
        if depth == b.max_word_len {
            over_budget = true;
            break;
        }
        depth += 1;
        let mut next_frontier = Vec::new();
        for set in &frontier {
            for (letter, g) in maps.iter().enumerate() {
                let image = g.apply_set(set);
                if seen.contains(&image) {
                    continue;
                }
                if image.len() == 1 {
                    let mut letters = vec![letter];
                    let mut cur = set.clone();
                    while let Some((prev, l)) = parent.get(&cur) {
                        letters.push(*l);
                        cur = prev.clone();
                    }
                    letters.reverse();
                    return Ok(Verdict::yes(
                        Word(letters),
                        Claim::Collapse,
                        "shortest reset word (subset search)",
                    ));
                }
                if seen.len() >= b.max_closure {
                    over_budget = true;
                    break 'levels;
                }
                seen.insert(image.clone());
                parent.insert(image.clone(), (set.clone(), letter));
                next_frontier.push(image);
            }
        }
        frontier = next_frontier;
    }

    if !over_budget {
        return Ok(Verdict::no(format!(
            "{} reachable subsets, none a singleton",
            seen.len()
        )));
    }

    // Subset lattice too large: fall back to pairwise merging.
    let merge = mergeable_pairs(maps, m);
    for a in 0..m {
        for c in (a + 1)..m {
            if !merge[a][c] {
                return Ok(Verdict::no(format!(
                    "pair ({a},{c}) never merges, so no word is constant"
                )));
            }
        }
    }
    Ok(match greedy_reset_word(maps, m) {
        Some(w) if w.len() <= b.max_word_len => Verdict::yes(
            w,
            Claim::Collapse,
            "greedy pair-merging reset word (subset search over budget; not necessarily shortest)",
        ),
        _ => Verdict::unknown(format!(
            "subset search exceeded budget ({} subsets, max word length {}) and greedy word too long",
            seen.len(),
            b.max_word_len
        )),
    })
}

pub fn strongly_proximal(sys: &ActionSystem, b: &Budget) -> Result<Verdict> {
    if sys.kind() == ActionKind::Deterministic {
        return reset_word(sys, b);
    }
    if let Some(det) = sys.deterministic_embedding() {
        return reset_word(&det, b);
    }

    if let Some(pi) = common_stationary(sys) {
        if pi.support().len() == sys.points() {
            let deltas: Vec<String> = sys.matrices().iter().map(|s| dobrushin(s).to_string()).collect();
            return Ok(Verdict::no(format!(
                "full-support measure {pi} is fixed by every generator, so it stays at positive \
                 distance from every point mass (generator dobrushin coefficients: {})",
                deltas.join(", ")
            )));
        }
    }

    if let Err((x, y)) = scrambling_word(sys) {
        return Ok(Verdict::no(format!(
            "rows {x} and {y} of every word matrix have disjoint supports, so the midpoint of \
             points {x} and {y} stays at total variation 1/2 from every point mass"
        )));
    }
    if let Some(floor) = interior_floor(sys) {
        return Ok(Verdict::no(format!(
            "every generator is a permutation or strictly positive, so the uniform measure keeps \
             every coordinate at least {floor} under all words"
        )));
    }

    let eps = b.epsilon.clone();
    let m = sys.points();
    let found = search_words(sys, b, |s| (0..m).find(|&v| near_vertex(s, v, &eps)))?;
    Ok(match found {
        Search::Found(w, vertex) => Verdict::yes(
            w,
            Claim::NearVertex { vertex, epsilon: eps },
            format!("every row within epsilon of vertex {vertex}"),
        ),
        Search::Exhausted { explored, .. } => Verdict::unknown(format!(
            "no word pushes all measures near one point mass within budget ({explored} distinct matrices)"
        )),
    })
}

/// Shortest word (ties lexicographic) after which rows `a` and `b` of the
/// word matrix share a support point, searched on pairs of support points.
fn support_meeting_word(supports: &[Vec<Vec<usize>>], m: usize, a: usize, b: usize) -> Option<Word> {
    let start = unordered(a, b);
    if start.0 == start.1 {
        return Some(Word::empty());
    }
    let mut parent: HashMap<(usize, usize), ((usize, usize), usize)> = HashMap::new();
    let mut seen = vec![vec![false; m]; m];
    seen[start.0][start.1] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(pair) = queue.pop_front() {
        for (letter, g) in supports.iter().enumerate() {
            for &x in &g[pair.0] {
                for &y in &g[pair.1] {
                    let next = unordered(x, y);
                    if seen[next.0][next.1] {
                        continue;
                    }
                    seen[next.0][next.1] = true;
                    parent.insert(next, (pair, letter));
                    if next.0 == next.1 {
                        let mut letters = Vec::new();
                        let mut at = next;
                        while let Some(&(prev, l)) = parent.get(&at) {
                            letters.push(l);
                            at = prev;
                        }
                        letters.reverse();
                        return Some(Word(letters));
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    None
}

/// A word whose matrix has Dobrushin coefficient below one, or a pair of
/// points whose rows have disjoint supports under every word.
///
/// Rows that share a support point keep sharing one after any further
/// letter, so merging the pairs one at a time yields a single word.
pub fn scrambling_word(sys: &ActionSystem) -> std::result::Result<Word, (usize, usize)> {
    let m = sys.points();
    let supports: Vec<Vec<Vec<usize>>> = sys
        .matrices()
        .iter()
        .map(|s| s.rows().iter().map(|r| (0..m).filter(|&j| !r[j].is_zero()).collect()).collect())
        .collect();
    for a in 0..m {
        for c in a + 1..m {
            if support_meeting_word(&supports, m, a, c).is_none() {
                return Err((a, c));
            }
        }
    }
    let mut word = Word::empty();
    let mut current = StochasticMatrix::identity(m);
    for a in 0..m {
        for c in a + 1..m {
            let (ra, rc) = (current.row(a).support(), current.row(c).support());
            if ra.iter().any(|x| rc.contains(x)) {
                continue;
            }
            let u = support_meeting_word(&supports, m, ra[0], rc[0]).expect("every pair meets");
            current = current.then(&sys.word_matrix(&u).expect("letters are generators"));
            word = word.concat(&u);
        }
    }
    Ok(word)
}

/// Lower bound on every coordinate of the uniform measure's orbit when each
/// generator is a permutation matrix or has only positive entries.
/// Permutations keep the uniform measure fixed; a positive matrix maps any
/// measure to one whose coordinates are at least its smallest entry.
fn interior_floor(sys: &ActionSystem) -> Option<Q> {
    let m = sys.points();
    if m < 2 {
        return None;
    }
    let mut floor = Q::new(BigInt::one(), BigInt::from(m));
    for s in sys.matrices() {
        if s.as_transformation().is_some_and(|t| t.is_bijective()) {
            continue;
        }
        let least = s.rows().iter().flatten().min().cloned()?;
        if !least.is_positive() {
            return None;
        }
        floor = floor.min(least);
    }
    Some(floor)
}

/// A probability vector fixed by every generator, when the common fixed
/// subspace is one-dimensional.
fn common_stationary(sys: &ActionSystem) -> Option<Measure> {
    let matrices = sys.matrices();
    if matrices.len() == 1 {
        return unique_stationary(&matrices[0]);
    }
    let m = sys.points();
    let mut system = Vec::new();
    for s in &matrices {
        let mut block = crate::linalg::transpose(s.rows());
        for (i, row) in block.iter_mut().enumerate() {
            row[i] -= Q::one();
        }
        system.extend(block);
    }
    let basis = crate::linalg::nullspace(&system, m);
    if basis.len() != 1 {
        return None;
    }
    let total: Q = basis[0].iter().sum();
    if total.is_zero() {
        return None;
    }
    Measure::new(basis[0].iter().map(|v| v / &total).collect()).ok()
}

pub fn measure_pair_proximal(sys: &ActionSystem, mu: &Measure, nu: &Measure, b: &Budget) -> Result<Verdict> {
    for m in [mu, nu] {
        if m.len() != sys.points() {
            return Err(Error::Dimension { expected: sys.points(), found: m.len() });
        }
    }
    let exact = Claim::MergeMeasures { mu: mu.clone(), nu: nu.clone(), tolerance: None };
    if mu == nu {
        return Ok(Verdict::yes(Word::empty(), exact, "measures already equal"));
    }

    if let Some(det) = sys.deterministic_embedding() {
        let maps = det.maps()?;
        let start = (mu.clone(), nu.clone());
        let mut parent: HashMap<(Measure, Measure), ((Measure, Measure), usize)> = HashMap::new();
        let mut seen = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(state) = queue.pop_front() {
            for (letter, g) in maps.iter().enumerate() {
                let next = (g.push(&state.0)?, g.push(&state.1)?);
                if next.0 == next.1 {
                    let mut letters = vec![letter];
                    let mut cur = state.clone();
                    while let Some((prev, l)) = parent.get(&cur) {
                        letters.push(*l);
                        cur = prev.clone();
                    }
                    letters.reverse();
                    return Ok(Verdict::yes(Word(letters), exact, "shortest word equalizing the pushforwards"));
                }
                if seen.contains(&next) {
                    continue;
                }
                if seen.len() >= b.max_closure {
                    return Ok(Verdict::unknown(format!(
                        "measure-pair search exceeded {} states",
                        b.max_closure
                    )));
                }
                seen.insert(next.clone());
                parent.insert(next.clone(), (state.clone(), letter));
                queue.push_back(next);
            }
        }
        return Ok(Verdict::no(format!(
            "{} reachable measure pairs exhausted, pushforwards never equal",
            seen.len()
        )));
    }

    let eps = b.epsilon.clone();
    let found = search_words(sys, b, |s| {
        let a = s.push(mu).ok()?;
        let c = s.push(nu).ok()?;
        if tv_distance(&a, &c).ok()? < eps {
            Some(Hit::Direct)
        } else if dobrushin(s) < Q::one() {
            Some(Hit::Contracting)
        } else {
            None
        }
    })?;
    let near = |mu: &Measure, nu: &Measure| Claim::MergeMeasures {
        mu: mu.clone(),
        nu: nu.clone(),
        tolerance: Some(b.epsilon.clone()),
    };
    Ok(match found {
        Search::Found(w, Hit::Direct) => Verdict::yes(w, near(mu, nu), "pushforwards within epsilon"),
        Search::Found(w, Hit::Contracting) => contraction_verdict(sys, &w, mu, nu, b, near)?,
        Search::Exhausted { explored, .. } => Verdict::unknown(format!(
            "no word within budget ({explored} distinct matrices)"
        )),
    })
}

/// Longest power witness we materialize from a contracting word.
const MAX_POWER_WITNESS: usize = 4096;

/// Turns a word with Dobrushin coefficient below one into a YES verdict: the
/// smallest power whose coefficient bound drops below epsilon is checked and
/// returned as witness when short enough, otherwise the bound is certified.
fn contraction_verdict(
    sys: &ActionSystem,
    w: &Word,
    mu: &Measure,
    nu: &Measure,
    b: &Budget,
    claim: impl Fn(&Measure, &Measure) -> Claim,
) -> Result<Verdict> {
    let s = sys.word_matrix(w)?;
    let delta = dobrushin(&s);
    let mut bound = tv_distance(mu, nu)?;
    let mut k = 0usize;
    while bound >= b.epsilon {
        bound *= &delta;
        k += 1;
    }
    let certificate = format!(
        "dobrushin({w}) = {delta} < 1, so total variation after {k} repetitions is at most {bound}"
    );
    if k * w.len().max(1) <= MAX_POWER_WITNESS {
        let power = w.repeat(k);
        let verdict = Verdict::yes(power, claim(mu, nu), certificate.clone());
        if verdict.replay(sys)? {
            return Ok(verdict);
        }
    }
    Ok(Verdict::yes_certified(certificate))
}

enum Hit {
    Direct,
    Contracting,
}

enum Search<T> {
    Found(Word, T),
    Exhausted { explored: usize },
}

/// Breadth-first search over words (shortest first, then lexicographic),
/// deduplicated by the exact word matrix and bounded by the budget.
fn search_words<T>(
    sys: &ActionSystem,
    b: &Budget,
    mut hit: impl FnMut(&StochasticMatrix) -> Option<T>,
) -> Result<Search<T>> {
    let matrices = sys.matrices();
    let identity = StochasticMatrix::identity(sys.points());
    if let Some(t) = hit(&identity) {
        return Ok(Search::Found(Word::empty(), t));
    }
    let mut seen: HashSet<StochasticMatrix> = HashSet::from([identity.clone()]);
    let mut frontier = vec![(identity, Word::empty())];
    for _ in 0..b.max_word_len {
        let mut next = Vec::new();
        for (s, w) in &frontier {
            for (letter, g) in matrices.iter().enumerate() {
                let product = s.then(g);
                if seen.contains(&product) {
                    continue;
                }
                let word = w.then(letter);
                if let Some(t) = hit(&product) {
                    return Ok(Search::Found(word, t));
                }
                if seen.len() >= b.max_closure {
                    return Ok(Search::Exhausted { explored: seen.len() });
                }
                seen.insert(product.clone());
                next.push((product, word));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(Search::Exhausted { explored: seen.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::Transformation;
    use crate::sample::cerny;
    use crate::spaces::FiniteSpace;
    use crate::ratio;

    fn det(m: usize, maps: &[&[usize]]) -> ActionSystem {
        ActionSystem::deterministic(
            FiniteSpace::discrete(m),
            maps.iter().map(|t| Transformation::new(t.to_vec()).unwrap()).collect(),
        )
        .unwrap()
    }

    fn stoch(rows: &[&[(i64, i64)]]) -> ActionSystem {
        let s = StochasticMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|&(a, b)| ratio(a, b)).collect())
                .collect(),
        )
        .unwrap();
        ActionSystem::stochastic(FiniteSpace::discrete(rows.len()), vec![s]).unwrap()
    }

    #[test]
    fn proximal_pair_examples() {
        let b = Budget::default();
        let swap = det(2, &[&[1, 0]]);
        assert_eq!(proximal_pair(&swap, 0, 1, &b).unwrap().status, Status::No);

        let with_const = det(3, &[&[1, 2, 0], &[2, 2, 2]]);
        let v = proximal_pair(&with_const, 0, 1, &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert_eq!(v.witness.as_ref().unwrap().len(), 1);
        assert!(v.replay(&with_const).unwrap());

        let c4 = cerny(4);
        let v = proximal_pair(&c4, 0, 2, &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert!(v.replay(&c4).unwrap());
    }

    #[test]
    fn proximal_pair_rejects_bad_points() {
        let swap = det(2, &[&[1, 0]]);
        assert!(matches!(
            proximal_pair(&swap, 0, 5, &Budget::default()),
            Err(Error::InvalidPoint { index: 5, size: 2 })
        ));
    }

    #[test]
    fn is_proximal_examples() {
        let b = Budget::default();
        assert_eq!(is_proximal(&det(3, &[&[1, 2, 0], &[0, 2, 1]]), &b).unwrap().status, Status::No);
        let v = is_proximal(&det(3, &[&[1, 2, 0], &[1, 1, 1]]), &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        let c4 = cerny(4);
        let v = is_proximal(&c4, &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert!(v.replay(&c4).unwrap());
    }

    #[test]
    fn reset_word_examples() {
        let b = Budget::default();
        let v = reset_word(&det(2, &[&[0, 0]]), &b).unwrap();
        assert_eq!(v.witness.unwrap().len(), 1);
        assert_eq!(reset_word(&det(3, &[&[1, 2, 0], &[1, 0, 2]]), &b).unwrap().status, Status::No);
        let c4 = cerny(4);
        let v = reset_word(&c4, &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert_eq!(v.witness.as_ref().unwrap().len(), 9);
        assert!(v.replay(&c4).unwrap());
    }

    #[test]
    fn reset_word_rejects_stochastic() {
        let sys = stoch(&[&[(1, 1), (0, 1)], &[(1, 1), (0, 1)]]);
        assert_eq!(
            reset_word(&sys, &Budget::default()).unwrap_err(),
            Error::UnsupportedKind("deterministic")
        );
    }

    #[test]
    fn reset_word_budget_fallback_and_unknown() {
        let c5 = cerny(5);
        let tight = Budget { max_closure: 3, ..Budget::default() };
        let v = reset_word(&c5, &tight).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert!(v.witness.as_ref().unwrap().len() >= 16);
        assert!(v.replay(&c5).unwrap());

        let short = Budget { max_word_len: 5, max_closure: 3, ..Budget::default() };
        assert_eq!(reset_word(&c5, &short).unwrap().status, Status::Unknown);
    }

    #[test]
    fn stochastic_strong_proximality_examples() {
        let b = Budget::default();
        let absorbing = stoch(&[&[(1, 1), (0, 1)], &[(1, 1), (0, 1)]]);
        let v = strongly_proximal(&absorbing, &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert!(v.replay(&absorbing).unwrap());

        let mixing = stoch(&[&[(3, 4), (1, 4)], &[(1, 4), (3, 4)]]);
        let v = strongly_proximal(&mixing, &b).unwrap();
        assert_eq!(v.status, Status::No);
        assert!(v.certificate.unwrap().contains("(1/2, 1/2)"));

        // Proximal though: powers contract every pair.
        let v = is_proximal(&mixing, &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert!(v.replay(&mixing).unwrap());
        let v = proximal_pair(&mixing, 0, 1, &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert!(v.replay(&mixing).unwrap());
    }

    #[test]
    fn stochastic_absorbing_chain_is_strongly_proximal_within_epsilon() {
        // State 1 leaks into the absorbing state 0 at rate 1/2.
        let sys = stoch(&[&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]]);
        let v = strongly_proximal(&sys, &Budget::default()).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert_eq!(v.witness.as_ref().unwrap().len(), 10);
        assert!(v.replay(&sys).unwrap());
    }

    #[test]
    fn stochastic_search_reports_unknown_at_budget() {
        let sys = ActionSystem::stochastic(
            FiniteSpace::discrete(2),
            vec![
                StochasticMatrix::new(vec![
                    vec![ratio(1, 2), ratio(1, 2)],
                    vec![ratio(1, 2), ratio(1, 2)],
                ])
                .unwrap(),
                StochasticMatrix::new(vec![
                    vec![ratio(1, 1), ratio(0, 1)],
                    vec![ratio(1, 3), ratio(2, 3)],
                ])
                .unwrap(),
            ],
        )
        .unwrap();
        let small = Budget { max_word_len: 2, max_closure: 10, ..Budget::default() };
        assert_eq!(strongly_proximal(&sys, &small).unwrap().status, Status::Unknown);
        let v = strongly_proximal(&sys, &Budget::default()).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert!(v.replay(&sys).unwrap());
    }

    #[test]
    fn positive_and_permutation_generators_trap_the_uniform_measure() {
        let positive = StochasticMatrix::new(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 3), ratio(2, 3)],
        ])
        .unwrap();
        let swap = Transformation::new(vec![1, 0]).unwrap().to_matrix();
        let sys = ActionSystem::stochastic(FiniteSpace::discrete(2), vec![positive.clone(), swap]).unwrap();
        let v = strongly_proximal(&sys, &Budget::default()).unwrap();
        assert_eq!(v.status, Status::No);
        assert!(v.certificate.unwrap().contains("1/3"));
        for w in 0..64usize {
            let word = Word((0..6).map(|i| (w >> i) & 1).collect());
            let image = pushforward(&sys, &word, &Measure::uniform(2)).unwrap();
            assert!(image.weights().iter().all(|x| *x >= ratio(1, 3)));
        }
        let absorbing = StochasticMatrix::new(vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(1, 2), ratio(1, 2)]]).unwrap();
        let sys = ActionSystem::stochastic(FiniteSpace::discrete(2), vec![positive, absorbing]).unwrap();
        assert!(interior_floor(&sys).is_none());
    }

    #[test]
    fn zero_one_stochastic_delegates_to_exact_engine() {
        let swap = Transformation::new(vec![1, 0]).unwrap().to_matrix();
        let sys = ActionSystem::stochastic(FiniteSpace::discrete(2), vec![swap]).unwrap();
        assert_eq!(is_proximal(&sys, &Budget::default()).unwrap().status, Status::No);
        assert_eq!(strongly_proximal(&sys, &Budget::default()).unwrap().status, Status::No);
    }

    #[test]
    fn measure_pair_examples() {
        let b = Budget::default();
        let constant = det(3, &[&[1, 2, 0], &[0, 0, 0]]);
        let mu = Measure::uniform(3);
        let nu = Measure::dirac(3, 2);
        let v = measure_pair_proximal(&constant, &mu, &nu, &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert!(v.replay(&constant).unwrap());

        let swap = det(2, &[&[1, 0]]);
        let v = measure_pair_proximal(&swap, &Measure::dirac(2, 0), &Measure::dirac(2, 1), &b).unwrap();
        assert_eq!(v.status, Status::No);

        let mixing = stoch(&[&[(3, 4), (1, 4)], &[(1, 4), (3, 4)]]);
        let v = measure_pair_proximal(&mixing, &Measure::dirac(2, 0), &Measure::dirac(2, 1), &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        assert!(v.replay(&mixing).unwrap());
    }

    #[test]
    fn measure_pair_halves_of_mixture_merge_with_reset_word() {
        let b = Budget::default();
        let c4 = cerny(4);
        let mu = Measure::new(vec![ratio(1, 2), ratio(1, 2), ratio(0, 1), ratio(0, 1)]).unwrap();
        let nu = Measure::new(vec![ratio(0, 1), ratio(0, 1), ratio(1, 4), ratio(3, 4)]).unwrap();
        let v = measure_pair_proximal(&c4, &mu, &nu, &b).unwrap();
        assert_eq!(v.status, Status::Yes);
        let w = v.witness.as_ref().unwrap();
        assert!(v.replay(&c4).unwrap());
        let reset = reset_word(&c4, &b).unwrap().witness.unwrap();
        assert!(w.len() <= reset.len());
        let merged = pushforward(&c4, &reset, &mu).unwrap();
        assert_eq!(merged, pushforward(&c4, &reset, &nu).unwrap());
    }

    #[test]
    fn replay_detects_bogus_witness() {
        let c4 = cerny(4);
        let bogus = Verdict::yes(Word(vec![0, 0]), Claim::Collapse, "bogus");
        assert!(!bogus.replay(&c4).unwrap());
    }

    #[test]
    fn budget_validation() {
        assert!(Budget::new(0, 1, ratio(1, 2)).is_err());
        assert!(Budget::new(1, 1, ratio(1, 1)).is_err());
        assert!(Budget::new(1, 1, ratio(0, 1)).is_err());
        assert!(Budget::new(3, 4, ratio(1, 2)).is_ok());
    }
}
