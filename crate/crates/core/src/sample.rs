//! Named example systems and seeded random generators for instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::actions::{ActionSystem, StochasticMatrix, Transformation, Word};
use crate::spaces::{FiniteSpace, GridSimplex, Measure};
use crate::{int, Q};

/// The Černý automaton on `n` states: a cyclic shift and a map sending state
/// 0 to 1 while fixing the rest. Its shortest reset word has length `(n−1)²`.
pub fn cerny(n: usize) -> ActionSystem {
    assert!(n >= 2);
    let shift = Transformation::new((0..n).map(|i| (i + 1) % n).collect()).unwrap();
    let merge = Transformation::new((0..n).map(|i| if i == 0 { 1 } else { i }).collect()).unwrap();
    ActionSystem::deterministic(FiniteSpace::discrete(n), vec![shift, merge]).unwrap()
}

/// Two points exchanged by a single involution.
pub fn swap() -> ActionSystem {
    ActionSystem::deterministic(
        FiniteSpace::discrete(2),
        vec![Transformation::new(vec![1, 0]).unwrap()],
    )
    .unwrap()
}

/// Random metric: shortest-path closure of random positive edge weights
/// with small denominators.
pub fn random_metric<R: Rng + ?Sized>(rng: &mut R, m: usize) -> FiniteSpace {
    let mut d = vec![vec![int(0); m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let w = Q::new(rng.gen_range(1..=8).into(), rng.gen_range(1..=4).into());
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let labels = (0..m).map(|i| format!("x{i}")).collect();
    FiniteSpace::new(labels, d).expect("shortest-path distances form a metric")
}

pub fn random_transformation<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Transformation {
    Transformation::new((0..m).map(|_| rng.gen_range(0..m)).collect()).unwrap()
}

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Transformation {
    let mut image: Vec<usize> = (0..m).collect();
    image.shuffle(rng);
    Transformation::new(image).unwrap()
}

/// Random deterministic system with `2..=max_points` points and
/// `1..=max_generators` generators; each generator is a permutation with
/// probability one half, so both synchronizing and non-synchronizing
/// systems are common.
pub fn random_deterministic<R: Rng + ?Sized>(rng: &mut R, max_points: usize, max_generators: usize) -> ActionSystem {
    let m = rng.gen_range(2..=max_points.max(2));
    let k = rng.gen_range(1..=max_generators.max(1));
    let maps = (0..k)
        .map(|_| {
            if rng.gen_bool(0.5) {
                random_permutation(rng, m)
            } else {
                random_transformation(rng, m)
            }
        })
        .collect();
    let space = if rng.gen_bool(0.5) { FiniteSpace::discrete(m) } else { random_metric(rng, m) };
    ActionSystem::deterministic(space, maps).unwrap()
}

/// Random measure with weights `aᵢ / Σa` for small random integers `aᵢ`.
pub fn random_measure<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Measure {
    let mut raw: Vec<i64> = (0..m)
        .map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=9) })
        .collect();
    if raw.iter().all(|&a| a == 0) {
        raw[rng.gen_range(0..m)] = 1;
    }
    normalize(&raw)
}

pub fn random_atom<R: Rng + ?Sized>(rng: &mut R, grid: &GridSimplex) -> Measure {
    grid.atom(rng.gen_range(0..grid.len())).clone()
}

pub fn random_stochastic<R: Rng + ?Sized>(rng: &mut R, m: usize) -> StochasticMatrix {
    let rows = (0..m).map(|_| random_measure(rng, m).weights().to_vec()).collect();
    StochasticMatrix::new(rows).unwrap()
}

pub fn random_word<R: Rng + ?Sized>(rng: &mut R, generators: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word((0..len).map(|_| rng.gen_range(0..generators)).collect())
}

/// Probability vector proportional to nonnegative integers (not all zero).
pub fn normalize(raw: &[i64]) -> Measure {
    let total: i64 = raw.iter().sum();
    assert!(total > 0 && raw.iter().all(|&a| a >= 0));
    Measure::new(raw.iter().map(|&a| Q::new(a.into(), total.into())).collect()).unwrap()
}
