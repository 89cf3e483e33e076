//! Shared fixtures and an independent brute-force enumerator used to
//! cross-check the double-description implementation.

use adaptive_chsh_core::cone::{self, ConeH};
use adaptive_chsh_core::gpt::{gbit_square, polygon_system, trit};
use adaptive_chsh_core::linalg::{self, Matrix, Vector};
use adaptive_chsh_core::scalar::{Rat, Scalar};

/// Every extremal ray of a pointed H-cone, the slow way: for each subset of
/// inequality rows (equalities always included) whose kernel is a line, keep
/// the direction on that line satisfying every constraint. A ray is extremal
/// exactly when such a subset exists for it, so this enumerates the same set
/// as the incremental algorithm without sharing any code with it.
pub fn brute_force_rays<S: Scalar>(h: &ConeH<S>) -> Vec<Vector<S>> {
    let tol = S::default_tol();
    let m = h.ineqs.len();
    assert!(m <= 20, "subset enumeration is exponential in the constraint count");
    let mut found: Matrix<S> = Vec::new();
    for mask in 0u32..(1u32 << m) {
        let mut rows: Matrix<S> = h.eqs.clone();
        for (i, row) in h.ineqs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                rows.push(row.clone());
            }
        }
        let kernel = linalg::null_space(&rows, h.dim, &tol);
        if kernel.len() != 1 {
            continue;
        }
        for dir in [kernel[0].clone(), linalg::scale(&kernel[0], &-S::one())] {
            if h.contains(&dir, &tol) {
                found.push(dir);
            }
        }
    }
    cone::canonicalize_rows(&found, &tol, false)
}

/// Ray-set equality: exact scalars compare canonically sorted lists, floats
/// demand a one-to-one matching within tolerance.
pub fn same_ray_sets<S: Scalar>(a: &[Vector<S>], b: &[Vector<S>], tol: &S) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if S::EXACT {
        return a == b;
    }
    let close = |x: &[S], y: &[S]| {
        x.iter().zip(y).all(|(p, q)| (p.clone() - q.clone()).is_zero_tol(tol))
    };
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        b.iter().enumerate().any(|(j, y)| {
            if !used[j] && close(x, y) {
                used[j] = true;
                true
            } else {
                false
            }
        })
    })
}

fn rows(data: &[&[i64]]) -> Matrix<Rat> {
    data.iter().map(|r| r.iter().map(|&x| Rat::from_int(x)).collect()).collect()
}

/// Exact cones of ambient dimension at most 6 with at most 12 constraints,
/// covering redundancy, equalities, and the state cones the library uses.
pub fn rational_fixtures() -> Vec<(&'static str, ConeH<Rat>)> {
    let mut out = Vec::new();
    out.push((
        "orthant dim 3",
        ConeH::new(3, rows(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]), Vec::new()),
    ));
    out.push(("square state cone", gbit_square().state_h.clone()));
    out.push(("trit state cone", trit().state_h.clone()));
    let mut cross = Vec::new();
    for s in 0..8u32 {
        let sign = |b: u32| if s & b != 0 { -1 } else { 1 };
        cross.push(vec![
            Rat::from_int(sign(1)),
            Rat::from_int(sign(2)),
            Rat::from_int(sign(4)),
            Rat::from_int(1),
        ]);
    }
    out.push(("cross-polytope cone dim 4", ConeH::new(4, cross, Vec::new())));
    out.push((
        "orthant dim 4 with redundant rows",
        ConeH::new(
            4,
            rows(&[
                &[1, 0, 0, 0],
                &[0, 1, 0, 0],
                &[0, 0, 1, 0],
                &[0, 0, 0, 1],
                &[1, 1, 0, 0],
                &[0, 0, 1, 1],
                &[1, 1, 1, 1],
            ]),
            Vec::new(),
        ),
    ));
    out.push((
        "orthant dim 4 sliced by an equality",
        ConeH::new(
            4,
            rows(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]),
            rows(&[&[1, -1, 0, 0]]),
        ),
    ));
    out.push((
        "orthant dim 6 with pair sums",
        ConeH::new(
            6,
            rows(&[
                &[1, 0, 0, 0, 0, 0],
                &[0, 1, 0, 0, 0, 0],
                &[0, 0, 1, 0, 0, 0],
                &[0, 0, 0, 1, 0, 0],
                &[0, 0, 0, 0, 1, 0],
                &[0, 0, 0, 0, 0, 1],
                &[1, 1, 0, 0, 0, 0],
                &[0, 1, 1, 0, 0, 0],
                &[0, 0, 1, 1, 0, 0],
                &[0, 0, 0, 1, 1, 0],
                &[0, 0, 0, 0, 1, 1],
                &[1, 0, 0, 0, 0, 1],
            ]),
            Vec::new(),
        ),
    ));
    out
}

/// Floating-point cones: polygon state cones have irrational facet normals.
pub fn float_fixtures() -> Vec<(String, ConeH<f64>)> {
    [5usize, 6, 7]
        .into_iter()
        .map(|n| (format!("polygon state cone n={n}"), polygon_system(n).unwrap().state_h))
        .collect()
}
