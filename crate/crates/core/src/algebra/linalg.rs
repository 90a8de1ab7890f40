//! Dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use super::poly::Q;

pub type Matrix = Vec<Vec<Q>>;

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut Matrix, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(m: &Matrix, ncols: usize) -> usize {
    let mut a = m.clone();
    rref(&mut a, ncols).len()
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace(m: &Matrix, ncols: usize) -> Vec<Vec<Q>> {
    let mut a = m.clone();
    let pivots = rref(&mut a, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (row, &pc) in a.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// A solution of `m x = b`, if one exists.
pub fn solve(m: &Matrix, ncols: usize, b: &[Q]) -> Option<Vec<Q>> {
    let mut a: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut a, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (row, &pc) in a.iter().zip(&pivots) {
        x[pc] = row[ncols].clone();
    }
    Some(x)
}

pub fn transpose(m: &Matrix, ncols: usize) -> Matrix {
    (0..ncols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &Matrix, v: &[Q]) -> Vec<Q> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Basis of the row space.
pub fn row_basis(rows: &Matrix, ncols: usize) -> Matrix {
    let mut a = rows.clone();
    rref(&mut a, ncols);
    a
}
