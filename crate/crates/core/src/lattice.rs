//! Integer lattice arithmetic: Hermite normal forms, kernels, saturation.
//!
//! Lattices are sublattices of `Z^n`, given by a list of spanning rows.
//! The canonical representative is the row-style Hermite normal form with
//! positive pivots and entries above each pivot reduced into `[0, pivot)`.

use num_integer::Integer;

pub type IntVec = Vec<i64>;

fn is_zero(v: &[i64]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// Row-style Hermite normal form of the lattice spanned by `rows` inside `Z^n`.
/// Zero rows are dropped.
pub fn hnf(rows: &[IntVec], n: usize) -> Vec<IntVec> {
    let mut m: Vec<IntVec> = rows.iter().filter(|r| !is_zero(r)).cloned().collect();
    for r in &m {
        assert_eq!(r.len(), n, "row length mismatch");
    }
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        if pivot_row >= m.len() {
            break;
        }
        // Euclid on the column below pivot_row.
        loop {
            let mut best: Option<usize> = None;
            for i in pivot_row..m.len() {
                if m[i][col] != 0 && best.map_or(true, |b| m[i][col].abs() < m[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            m.swap(pivot_row, b);
            let mut done = true;
            for i in (pivot_row + 1)..m.len() {
                if m[i][col] != 0 {
                    let q = Integer::div_floor(&m[i][col], &m[pivot_row][col]);
                    for j in 0..n {
                        m[i][j] -= q * m[pivot_row][j];
                    }
                    if m[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col] == 0 {
            continue;
        }
        if m[pivot_row][col] < 0 {
            for x in m[pivot_row].iter_mut() {
                *x = -*x;
            }
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    // reduce entries above pivots
    for &(r, c) in &pivots {
        let p = m[r][c];
        for i in 0..r {
            let q = Integer::div_floor(&m[i][c], &p);
            if q != 0 {
                for j in 0..n {
                    m[i][j] -= q * m[r][j];
                }
            }
        }
    }
    m
}

/// Integer kernel `{x in Z^k : sum_i x_i rows[i] = 0}` of a list of `k` rows
/// in `Z^n`, returned in Hermite normal form. The result is saturated.
pub fn left_kernel(rows: &[IntVec], n: usize) -> Vec<IntVec> {
    let k = rows.len();
    // augmented rows [row | e_i]
    let aug: Vec<IntVec> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..k).map(|j| i64::from(i == j)));
            v
        })
        .collect();
    let h = hnf(&aug, n + k);
    let ker: Vec<IntVec> = h
        .into_iter()
        .filter(|r| is_zero(&r[..n]))
        .map(|r| r[n..].to_vec())
        .collect();
    hnf(&ker, k)
}

/// Orthogonal complement `{v in Z^n : <v, r> = 0 for all rows r}`.
pub fn orthogonal(rows: &[IntVec], n: usize) -> Vec<IntVec> {
    if rows.is_empty() {
        return identity(n);
    }
    // columns of the matrix are the coordinates; left kernel of the transpose.
    let cols: Vec<IntVec> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    left_kernel(&cols, rows.len())
}

pub fn identity(n: usize) -> Vec<IntVec> {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

/// Saturation `(L tensor Q) cap Z^n`.
pub fn saturate(rows: &[IntVec], n: usize) -> Vec<IntVec> {
    let perp = orthogonal(rows, n);
    orthogonal(&perp, n)
}

pub fn sum(a: &[IntVec], b: &[IntVec], n: usize) -> Vec<IntVec> {
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    hnf(&all, n)
}

pub fn intersect(a: &[IntVec], b: &[IntVec], n: usize) -> Vec<IntVec> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut stacked = a.to_vec();
    stacked.extend(b.iter().map(|r| r.iter().map(|x| -x).collect::<IntVec>()));
    let ker = left_kernel(&stacked, n);
    let vecs: Vec<IntVec> = ker
        .iter()
        .map(|c| {
            let mut v = vec![0i64; n];
            for (i, row) in a.iter().enumerate() {
                for j in 0..n {
                    v[j] += c[i] * row[j];
                }
            }
            v
        })
        .collect();
    hnf(&vecs, n)
}

/// Coordinates of `v` with respect to an HNF basis, if `v` lies in the lattice.
pub fn coords(basis: &[IntVec], v: &[i64]) -> Option<IntVec> {
    let n = v.len();
    let mut rem = v.to_vec();
    let mut out = vec![0i64; basis.len()];
    for (i, row) in basis.iter().enumerate() {
        let Some(c) = row.iter().position(|&x| x != 0) else { continue };
        if rem[c] % row[c] != 0 {
            return None;
        }
        let q = rem[c] / row[c];
        out[i] = q;
        for j in 0..n {
            rem[j] -= q * row[j];
        }
    }
    if is_zero(&rem) {
        Some(out)
    } else {
        None
    }
}

pub fn contains(basis: &[IntVec], v: &[i64]) -> bool {
    coords(basis, v).is_some()
}

/// `a subseteq b` as lattices, with `b` in HNF.
pub fn is_sublattice(a: &[IntVec], b: &[IntVec]) -> bool {
    a.iter().all(|r| contains(b, r))
}

pub fn rank(rows: &[IntVec], n: usize) -> usize {
    hnf(rows, n).len()
}

/// Index of `a` inside `b` when both have the same rank (product of pivots ratio).
pub fn det_hnf(rows: &[IntVec]) -> i64 {
    rows.iter()
        .map(|r| r.iter().find(|&&x| x != 0).copied().unwrap_or(1))
        .product()
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Primitive representative of a nonzero vector: divide by the gcd and make
/// the first nonzero entry positive.
pub fn primitive(v: &[i64]) -> IntVec {
    let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return v.to_vec();
    }
    let mut out: IntVec = v.iter().map(|x| x / g).collect();
    if out.iter().find(|&&x| x != 0).copied().unwrap_or(0) < 0 {
        for x in out.iter_mut() {
            *x = -*x;
        }
    }
    out
}
