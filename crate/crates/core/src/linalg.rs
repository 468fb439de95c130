//! Exact rational Gaussian elimination.
//!
//! Matrices are dense row-major `Vec<Vec<Q>>`; all rows must share a length.

use num::{One, Zero};

use crate::Q;

/// Reduces `matrix` in place to reduced row echelon form over the first
/// `cols` columns and returns the pivot column of each nonzero row.
fn reduce(matrix: &mut [Vec<Q>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == matrix.len() {
            break;
        }
        let Some(found) = (row..matrix.len()).find(|&r| !matrix[r][col].is_zero()) else {
            continue;
        };
        matrix.swap(row, found);
        let lead = matrix[row][col].clone();
        for value in matrix[row].iter_mut() {
            *value /= &lead;
        }
        for r in 0..matrix.len() {
            if r == row || matrix[r][col].is_zero() {
                continue;
            }
            let factor = matrix[r][col].clone();
            let (pivot_row, target) = if r < row {
                let (head, tail) = matrix.split_at_mut(row);
                (&tail[0], &mut head[r])
            } else {
                let (head, tail) = matrix.split_at_mut(r);
                (&head[row], &mut tail[0])
            };
            for (t, p) in target.iter_mut().zip(pivot_row) {
                *t -= &factor * p;
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(matrix: &[Vec<Q>]) -> usize {
    let cols = matrix.first().map_or(0, Vec::len);
    let mut work = matrix.to_vec();
    reduce(&mut work, cols).len()
}

/// Returns some solution of `matrix · x = rhs` (free variables set to zero),
/// or `None` when the system is inconsistent.
pub fn solve(matrix: &[Vec<Q>], rhs: &[Q]) -> Option<Vec<Q>> {
    assert_eq!(matrix.len(), rhs.len(), "row count must match rhs length");
    let cols = matrix.first().map_or(0, Vec::len);
    let mut work: Vec<Vec<Q>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = reduce(&mut work, cols);
    if work[pivots.len()..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (row, &col) in pivots.iter().enumerate() {
        x[col] = work[row][cols].clone();
    }
    Some(x)
}

/// Basis of `{ x : matrix · x = 0 }`, one vector per free column.
pub fn nullspace(matrix: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let mut work = matrix.to_vec();
    let pivots = reduce(&mut work, cols);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Q::zero(); cols];
            v[free] = Q::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -work[row][free].clone();
            }
            v
        })
        .collect()
}

pub fn mat_vec(matrix: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    matrix
        .iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(matrix: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let cols = matrix.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| matrix.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn identity(n: usize) -> Vec<Vec<Q>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Q::one() } else { Q::zero() })
                .collect()
        })
        .collect()
}

/// Inverse of a square matrix, or `None` if singular.
pub fn inverse(matrix: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = matrix.len();
    let mut work: Vec<Vec<Q>> = matrix
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    let pivots = reduce(&mut work, n);
    if pivots.len() < n {
        return None;
    }
    Some(work.into_iter().map(|row| row[n..].to_vec()).collect())
}
