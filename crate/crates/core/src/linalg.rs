//! Small dense linear algebra over a generic scalar.
//!
//! Row reduction uses the first usable pivot in exact mode and partial
//! pivoting (largest magnitude) in approx mode.

use crate::scalar::Scalar;

pub type Vector<S> = Vec<S>;
pub type Matrix<S> = Vec<Vec<S>>;

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len(), "dot: dimension mismatch");
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

pub fn scale<S: Scalar>(v: &[S], c: &S) -> Vector<S> {
    v.iter().map(|x| x.clone() * c.clone()).collect()
}

/// a + c*b
pub fn axpy<S: Scalar>(a: &[S], c: &S, b: &[S]) -> Vector<S> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + c.clone() * y.clone())
        .collect()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vector<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vector<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn is_zero_vec<S: Scalar>(v: &[S], tol: &S) -> bool {
    v.iter().all(|x| x.is_zero_tol(tol))
}

/// Kronecker product of two vectors: out[i*b.len()+j] = a[i]*b[j].
pub fn kron<S: Scalar>(a: &[S], b: &[S]) -> Vector<S> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.clone() * y.clone());
        }
    }
    out
}

/// Reduced row echelon form in place. Returns pivot column indices.
pub fn rref<S: Scalar>(rows: &mut Matrix<S>, tol: &S) -> Vec<usize> {
    if rows.is_empty() {
        return Vec::new();
    }
    let ncols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= rows.len() {
            break;
        }
        // pivot selection
        let mut best: Option<usize> = None;
        for (i, row) in rows.iter().enumerate().skip(r) {
            if !row[c].is_zero_tol(tol) {
                if S::EXACT {
                    best = Some(i);
                    break;
                }
                match best {
                    Some(j) if rows[j][c].abs() >= row[c].abs() => {}
                    _ => best = Some(i),
                }
            }
        }
        let Some(p) = best else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        rows[r] = scale(&rows[r], &inv);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero_tol(tol) {
                let f = -rows[i][c].clone();
                rows[i] = axpy(&rows[i], &f, &rows[r].clone());
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank<S: Scalar>(rows: &Matrix<S>, tol: &S) -> usize {
    let mut m = rows.clone();
    rref(&mut m, tol).len()
}

/// Basis of { x : rows * x = 0 }, each basis vector of length `dim`.
pub fn null_space<S: Scalar>(rows: &Matrix<S>, dim: usize, tol: &S) -> Matrix<S> {
    let mut m: Matrix<S> = rows.iter().filter(|r| !is_zero_vec(r, tol)).cloned().collect();
    let pivots = rref(&mut m, tol);
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..dim {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![S::zero(); dim];
        v[free] = S::one();
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[ri][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Matrix-vector product with rows of `m`.
pub fn mat_vec<S: Scalar>(m: &Matrix<S>, v: &[S]) -> Vector<S> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// v interpreted in the column space: sum_j v[j] * cols[j].
pub fn combine<S: Scalar>(cols: &Matrix<S>, v: &[S]) -> Vector<S> {
    assert_eq!(cols.len(), v.len());
    let dim = cols.first().map_or(0, |c| c.len());
    let mut out = vec![S::zero(); dim];
    for (c, w) in cols.iter().zip(v) {
        for (o, x) in out.iter_mut().zip(c) {
            *o = o.clone() + w.clone() * x.clone();
        }
    }
    out
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    fn rv(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| rat(x, 1)).collect()
    }

    #[test]
    fn rref_finds_rank_and_pivots() {
        let mut m = vec![rv(&[1, 2, 3]), rv(&[2, 4, 6]), rv(&[0, 1, 1])];
        let pivots = rref(&mut m, &Rat::default_tol());
        assert_eq!(pivots, vec![0, 1]);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn null_space_annihilates_rows() {
        let rows = vec![rv(&[1, 1, 0, 0]), rv(&[0, 0, 1, -1])];
        let ns = null_space(&rows, 4, &Rat::default_tol());
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for r in &rows {
                assert!(dot(r, v).is_zero_tol(&Rat::default_tol()));
            }
        }
    }

    #[test]
    fn kron_is_row_major() {
        let a = rv(&[1, 2]);
        let b = rv(&[3, 5]);
        assert_eq!(kron(&a, &b), rv(&[3, 5, 6, 10]));
    }

    #[test]
    fn approx_rank_ignores_noise() {
        let rows = vec![vec![1.0, 2.0], vec![1.0, 2.0 + 1e-13]];
        assert_eq!(rank(&rows, &1e-9), 1);
    }
}
