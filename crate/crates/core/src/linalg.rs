//! Small exact linear algebra over [`FieldElem`]: row reduction, rank, kernels.

use crate::field::{Field, FieldElem};

pub type Matrix = Vec<Vec<FieldElem>>;

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<FieldElem>]) -> (Matrix, Vec<usize>) {
    let mut m: Matrix = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].try_inv().expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let sub = &f * &m[r][j];
                    m[i][j] = &m[i][j] - &sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<FieldElem>]) -> usize {
    rref(rows).1.len()
}

/// Basis of the right kernel `{x | rows · x = 0}`.
pub fn kernel(rows: &[Vec<FieldElem>], ncols: usize, field: Field) -> Matrix {
    let (m, pivots) = rref(rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![field.zero(); ncols];
            v[f] = field.one();
            for (row, &pc) in m.iter().zip(&pivots) {
                v[pc] = -&row[f];
            }
            v
        })
        .collect()
}

pub fn dot(a: &[FieldElem], b: &[FieldElem]) -> FieldElem {
    let field = a[0].field();
    a.iter()
        .zip(b)
        .fold(field.zero(), |acc, (x, y)| &acc + &(x * y))
}

/// Determinant by fraction-free elimination over the field.
pub fn det(rows: &[Vec<FieldElem>]) -> FieldElem {
    let n = rows.len();
    let field = rows[0][0].field();
    let mut m = rows.to_vec();
    let mut d = field.one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return field.zero();
        };
        if pr != c {
            m.swap(pr, c);
            d = -&d;
        }
        d = &d * &m[c][c];
        let inv = m[c][c].try_inv().expect("nonzero pivot");
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..n {
                let sub = &f * &m[c][j];
                m[i][j] = &m[i][j] - &sub;
            }
        }
    }
    d
}

/// Inverse of a square matrix, or `None` when singular.
pub fn inverse(rows: &[Vec<FieldElem>]) -> Option<Matrix> {
    let n = rows.len();
    let field = rows[0][0].field();
    let aug: Matrix = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            v
        })
        .collect();
    let (m, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}
