//! Independent brute-force oracles. None of these call the search or
//! transport code they are used to check.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use num::{BigInt, Integer, One, ToPrimitive, Zero};
use proxilift::actions::{closure, ActionSystem, Transformation, Word};
use proxilift::spaces::{FiniteSpace, GridSimplex, Measure};
use proxilift::Q;

/// Minimum transport cost over all couplings with entries that are multiples
/// of the common mass denominator. The transportation polytope with integer
/// margins has integral vertices, so this is the exact optimum.
pub fn brute_w1(space: &FiniteSpace, mu: &Measure, nu: &Measure) -> Q {
    let scale = mu
        .weights()
        .iter()
        .chain(nu.weights())
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let to_int = |w: &Q| (w * Q::from_integer(scale.clone())).to_integer().to_i64().unwrap();
    let rows: Vec<i64> = mu.weights().iter().map(to_int).collect();
    let mut cols: Vec<i64> = nu.weights().iter().map(to_int).collect();

    fn rec(
        i: usize,
        j: usize,
        rows_left: &mut Vec<i64>,
        cols: &mut Vec<i64>,
        cost: Q,
        space: &FiniteSpace,
        best: &mut Option<Q>,
    ) {
        let n = cols.len();
        if i == n {
            if cols.iter().all(|&c| c == 0) && best.as_ref().is_none_or(|b| cost < *b) {
                *best = Some(cost);
            }
            return;
        }
        if j == n - 1 {
            // the last cell of a row takes whatever the row has left
            let amount = rows_left[i];
            if amount > cols[j] {
                return;
            }
            cols[j] -= amount;
            let c = &cost + space.distance(i, j) * Q::from_integer(amount.into());
            rec(i + 1, 0, rows_left, cols, c, space, best);
            cols[j] += amount;
            return;
        }
        let cap = rows_left[i].min(cols[j]);
        for amount in 0..=cap {
            rows_left[i] -= amount;
            cols[j] -= amount;
            let c = &cost + space.distance(i, j) * Q::from_integer(amount.into());
            rec(i, j + 1, rows_left, cols, c, space, best);
            rows_left[i] += amount;
            cols[j] += amount;
        }
    }

    let mut best = None;
    let mut rows_left = rows;
    rec(0, 0, &mut rows_left, &mut cols, Q::from_integer(0.into()), space, &mut best);
    best.expect("equal margins admit a coupling") / Q::from_integer(scale)
}

/// Length of a shortest constant-producing word by plain BFS over subsets
/// encoded as bitmasks, or `None` if no word is constant.
pub fn subset_bfs_reset_len(sys: &ActionSystem) -> Option<usize> {
    let maps = sys.maps().unwrap();
    let m = sys.points();
    assert!(m <= 20);
    let full: u32 = (1u32 << m) - 1;
    let mut dist = vec![usize::MAX; 1 << m];
    dist[full as usize] = 0;
    let mut queue = VecDeque::from([full]);
    while let Some(set) = queue.pop_front() {
        if set.count_ones() == 1 {
            return Some(dist[set as usize]);
        }
        for g in maps {
            let mut image = 0u32;
            for p in 0..m {
                if set >> p & 1 == 1 {
                    image |= 1 << g.image()[p];
                }
            }
            if dist[image as usize] == usize::MAX {
                dist[image as usize] = dist[set as usize] + 1;
                queue.push_back(image);
            }
        }
    }
    None
}

fn word_map(maps: &[Transformation], letters: &[usize], m: usize) -> Vec<usize> {
    (0..m)
        .map(|p| letters.iter().fold(p, |x, &l| maps[l].image()[x]))
        .collect()
}

/// First constant word in shortlex order among words of length at most
/// `max_len`, by exhaustive enumeration.
pub fn brute_force_reset(sys: &ActionSystem, max_len: usize) -> Option<Word> {
    let maps = sys.maps().unwrap();
    let k = maps.len();
    let m = sys.points();
    for len in 0..=max_len {
        let total = k.pow(len as u32);
        for code in 0..total {
            let mut letters = vec![0; len];
            let mut c = code;
            for slot in (0..len).rev() {
                letters[slot] = c % k;
                c /= k;
            }
            let img = word_map(maps, &letters, m);
            if img.windows(2).all(|w| w[0] == w[1]) {
                return Some(Word(letters));
            }
        }
    }
    None
}

/// Strong proximality read off the grid directly: every atom must be sent
/// to a point mass by some element of the generated monoid.
pub fn grid_collapse_oracle(sys: &ActionSystem, q: usize) -> bool {
    let monoid = closure(sys, 1_000_000).unwrap();
    assert!(!monoid.truncated);
    let grid = GridSimplex::new(sys.points(), q).unwrap();
    grid.atoms().iter().all(|atom| {
        monoid
            .elements
            .iter()
            .any(|t| t.push(atom).unwrap().point_mass().is_some())
    })
}

/// Whether some word matrix has every pair of rows sharing a support point,
/// by exhaustive search over reachable boolean support patterns.
pub fn scrambling_pattern_reachable(sys: &ActionSystem) -> bool {
    let m = sys.points();
    let pattern = |rows: &[Vec<Q>]| -> Vec<u32> {
        rows.iter()
            .map(|r| (0..m).filter(|&j| !r[j].is_zero()).fold(0u32, |acc, j| acc | 1 << j))
            .collect()
    };
    let gens: Vec<Vec<u32>> = sys.matrices().iter().map(|s| pattern(s.rows())).collect();
    let scrambling = |p: &[u32]| (0..m).all(|a| (0..m).all(|b| p[a] & p[b] != 0));
    let identity: Vec<u32> = (0..m).map(|i| 1 << i).collect();
    let mut seen = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some(p) = queue.pop_front() {
        if scrambling(&p) {
            return true;
        }
        for g in &gens {
            let next: Vec<u32> = p
                .iter()
                .map(|&row| (0..m).filter(|&j| row >> j & 1 == 1).fold(0, |acc, j| acc | g[j]))
                .collect();
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    false
}
