//! Double description: conversion between inequality and generator form.
//!
//! The incremental algorithm starts from the whole space (lineality basis =
//! identity, no rays) and inserts inequalities one at a time. While an
//! inequality is non-trivial on the current lineality space the step is a
//! lineality split: one basis vector becomes a ray and everything else is
//! projected onto the new hyperplane. Once the lineality space is orthogonal
//! to the inequality, the usual positive/zero/negative ray step applies, with
//! adjacency decided by the combinatorial zero-set test. Equalities are
//! eliminated up front by restricting to their null space.

use crate::cone::{canonical_ray, ConeH, ConeV};
use crate::linalg::{self, Matrix, Vector};
use crate::scalar::Scalar;

// ---------------------------------------------------------------------------
// zero-set bitsets
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(n_bits: usize) -> Self {
        BitSet(vec![0; n_bits.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Self) -> Self {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_superset_of(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray<S> {
    v: Vector<S>,
    zero: BitSet,
}

// ---------------------------------------------------------------------------
// core insertion loop
// ---------------------------------------------------------------------------

fn dd_core<S: Scalar>(dim: usize, ineqs: &Matrix<S>, tol: &S) -> (Matrix<S>, Matrix<S>) {
    let n = ineqs.len();
    let mut lins: Matrix<S> = (0..dim)
        .map(|i| {
            let mut e = vec![S::zero(); dim];
            e[i] = S::one();
            e
        })
        .collect();
    let mut rays: Vec<Ray<S>> = Vec::new();

    for (t, a) in ineqs.iter().enumerate() {
        // Lineality split: the inequality sees part of the lineality space.
        let pivot = lins
            .iter()
            .enumerate()
            .map(|(i, l)| (i, linalg::dot(a, l)))
            .filter(|(_, d)| !d.is_zero_tol(tol))
            .max_by(|(_, x), (_, y)| x.abs().partial_cmp(&y.abs()).unwrap());
        if let Some((i, d)) = pivot {
            let mut w = lins.swap_remove(i);
            if d < S::zero() {
                w = w.iter().map(|x| -x.clone()).collect();
            }
            let aw = linalg::dot(a, &w);
            for l in lins.iter_mut() {
                let c = linalg::dot(a, l) / aw.clone();
                if !c.is_zero_tol(tol) {
                    *l = l.iter().zip(&w).map(|(x, y)| x.clone() - c.clone() * y.clone()).collect();
                }
            }
            for r in rays.iter_mut() {
                let c = linalg::dot(a, &r.v) / aw.clone();
                if !c.is_zero_tol(tol) {
                    let v: Vector<S> =
                        r.v.iter().zip(&w).map(|(x, y)| x.clone() - c.clone() * y.clone()).collect();
                    r.v = canonical_ray(&v, tol).unwrap_or(v);
                }
                // after projection every old ray lies on the new hyperplane
                r.zero.set(t);
            }
            // w satisfied every earlier inequality with equality (it lived in
            // the lineality space until now), so its zero set is full below t.
            let mut zero = BitSet::new(n);
            for b in 0..t {
                zero.set(b);
            }
            let w = canonical_ray(&w, tol).unwrap_or(w);
            rays.push(Ray { v: w, zero });
            continue;
        }

        // Ray step.
        let signs: Vec<i8> = rays.iter().map(|r| linalg::dot(a, &r.v).sign_tol(tol)).collect();
        if signs.iter().all(|&s| s >= 0) {
            for (r, &s) in rays.iter_mut().zip(&signs) {
                if s == 0 {
                    r.zero.set(t);
                }
            }
            continue;
        }
        let mut next: Vec<Ray<S>> = Vec::new();
        for (r, &s) in rays.iter().zip(&signs) {
            if s >= 0 {
                let mut kept = Ray { v: r.v.clone(), zero: r.zero.clone() };
                if s == 0 {
                    kept.zero.set(t);
                }
                next.push(kept);
            }
        }
        for (ip, p) in rays.iter().enumerate().filter(|&(i, _)| signs[i] > 0) {
            for (im, m) in rays.iter().enumerate().filter(|&(i, _)| signs[i] < 0) {
                let meet = p.zero.and(&m.zero);
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(j, r)| j == ip || j == im || !r.zero.is_superset_of(&meet));
                if !adjacent {
                    continue;
                }
                let ap = linalg::dot(a, &p.v);
                let am = linalg::dot(a, &m.v);
                let v: Vector<S> =
                    p.v.iter()
                        .zip(&m.v)
                        .map(|(x, y)| ap.clone() * y.clone() - am.clone() * x.clone())
                        .collect();
                let v = canonical_ray(&v, tol).unwrap_or(v);
                let mut zero = meet;
                zero.set(t);
                next.push(Ray { v, zero });
            }
        }
        rays = next;
    }
    (rays.into_iter().map(|r| r.v).collect(), lins)
}

// ---------------------------------------------------------------------------
// public conversions
// ---------------------------------------------------------------------------

/// All extremal rays and a lineality basis of an H-form cone.
pub fn enumerate<S: Scalar>(h: &ConeH<S>) -> ConeV<S> {
    let tol = S::default_tol();
    if h.eqs.is_empty() {
        let (rays, lins) = dd_core(h.dim, &h.ineqs, &tol);
        return ConeV::new(h.dim, rays, lins);
    }
    let basis = linalg::null_space(&h.eqs, h.dim, &tol);
    if basis.is_empty() {
        return ConeV::new(h.dim, Vec::new(), Vec::new());
    }
    let reduced: Matrix<S> = h
        .ineqs
        .iter()
        .map(|a| basis.iter().map(|b| linalg::dot(a, b)).collect())
        .collect();
    let (rays_r, lins_r) = dd_core(basis.len(), &reduced, &tol);
    let lift = |v: &Vector<S>| -> Vector<S> {
        let mut out = vec![S::zero(); h.dim];
        for (c, b) in v.iter().zip(&basis) {
            for (o, x) in out.iter_mut().zip(b) {
                *o = o.clone() + c.clone() * x.clone();
            }
        }
        out
    };
    ConeV::new(h.dim, rays_r.iter().map(lift).collect(), lins_r.iter().map(lift).collect())
}

/// Facet description of a V-form cone (its double dual's H-form).
pub fn v_to_h<S: Scalar>(v: &ConeV<S>) -> ConeH<S> {
    let dual_v = dualize(v);
    ConeH::new(v.dim, dual_v.rays, dual_v.lineality)
}

/// Generator form of the dual cone { y : r.y >= 0 on rays, l.y = 0 on lineality }.
pub fn dualize<S: Scalar>(v: &ConeV<S>) -> ConeV<S> {
    enumerate(&ConeH::new(v.dim, v.rays.clone(), v.lineality.clone()))
}

/// Remove redundant generators, keeping only extremal rays.
pub fn reduce_v<S: Scalar>(v: &ConeV<S>) -> ConeV<S> {
    enumerate(&v_to_h(v))
}

/// Membership in a V-form cone. Converts to H-form; prefer a cached H-form
/// when testing many points against the same cone.
pub fn member_v<S: Scalar>(v: &ConeV<S>, x: &[S], tol: &S) -> bool {
    v_to_h(v).contains(x, tol)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};
    use proptest::prelude::*;

    fn rv(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| rat(x, 1)).collect()
    }

    fn unit(dim: usize, i: usize) -> Vec<Rat> {
        let mut e = vec![rat(0, 1); dim];
        e[i] = rat(1, 1);
        e
    }

    #[test]
    fn orthant_enumerates_to_unit_rays() {
        let h = ConeH::new(3, (0..3).map(|i| unit(3, i)).collect(), Vec::new());
        let v = enumerate(&h);
        assert!(v.is_pointed());
        assert_eq!(v.rays, vec![unit(3, 2), unit(3, 1), unit(3, 0)]);
        assert_eq!(v_to_h(&v), h);
    }

    #[test]
    fn square_cone_round_trip() {
        let rays: Vec<Vec<Rat>> = vec![rv(&[1, 1, 1]), rv(&[1, -1, 1]), rv(&[-1, 1, 1]), rv(&[-1, -1, 1])];
        let v = ConeV::from_rays(rays.clone());
        let h = v_to_h(&v);
        assert_eq!(h.ineqs.len(), 4);
        assert!(h.eqs.is_empty());
        let back = enumerate(&h);
        assert_eq!(back, v);
    }

    #[test]
    fn cube_cone_in_dim_four() {
        let mut ineqs = Vec::new();
        for i in 0..3 {
            let mut plus = unit(4, 3);
            plus[i] = rat(1, 1);
            let mut minus = unit(4, 3);
            minus[i] = rat(-1, 1);
            ineqs.push(plus);
            ineqs.push(minus);
        }
        let v = enumerate(&ConeH::new(4, ineqs, Vec::new()));
        assert_eq!(v.rays.len(), 8);
        assert!(v.rays.iter().all(|r| r[3] == rat(1, 1) && r[..3].iter().all(|x| x.abs() == rat(1, 1))));
    }

    #[test]
    fn halfspace_keeps_lineality() {
        let h = ConeH::new(2, vec![rv(&[1, 0])], Vec::new());
        let v = enumerate(&h);
        assert_eq!(v.rays, vec![rv(&[1, 0])]);
        assert_eq!(v.lineality, vec![rv(&[0, 1])]);
        assert_eq!(v_to_h(&v), h);
    }

    #[test]
    fn equalities_restrict_to_null_space() {
        let h = ConeH::new(3, Vec::new(), vec![rv(&[1, 0, 0])]);
        let v = enumerate(&h);
        assert!(v.rays.is_empty());
        assert_eq!(v.lineality.len(), 2);
    }

    #[test]
    fn opposing_inequalities_leave_origin() {
        let h = ConeH::new(1, vec![rv(&[1]), rv(&[-1])], Vec::new());
        let v = enumerate(&h);
        assert!(v.rays.is_empty() && v.lineality.is_empty());
    }

    #[test]
    fn orthant_is_self_dual() {
        let v = ConeV::from_rays((0..3).map(|i| unit(3, i)).collect());
        assert_eq!(dualize(&v), v);
    }

    #[test]
    fn dual_of_halfspace_drops_to_single_ray() {
        let v = ConeV::new(2, vec![rv(&[1, 0])], vec![rv(&[0, 1])]);
        let d = dualize(&v);
        assert_eq!(d.rays, vec![rv(&[1, 0])]);
        assert!(d.lineality.is_empty());
    }

    #[test]
    fn reduce_drops_interior_generators() {
        let v = ConeV::from_rays(vec![rv(&[1, 0]), rv(&[0, 1]), rv(&[1, 1])]);
        let r = reduce_v(&v);
        assert_eq!(r.rays, vec![rv(&[0, 1]), rv(&[1, 0])]);
    }

    #[test]
    fn approx_mode_recovers_square_cone() {
        let noise = 1e-12;
        let rays: Vec<Vec<f64>> = vec![
            vec![1.0 + noise, 1.0, 1.0],
            vec![1.0, -1.0 - noise, 1.0],
            vec![-1.0, 1.0, 1.0 + noise],
            vec![-1.0, -1.0, 1.0],
        ];
        let v = ConeV::from_rays(rays);
        let h = v_to_h(&v);
        assert_eq!(h.ineqs.len(), 4);
        let back = enumerate(&h);
        assert_eq!(back.rays.len(), 4);
        let tol = f64::default_tol();
        for r in &back.rays {
            assert!(h.contains(r, &tol));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn round_trip_is_idempotent(raw in proptest::collection::vec(
            proptest::collection::vec(-3i64..=3, 3), 1..6)) {
            let rays: Vec<Vec<Rat>> = raw.iter().map(|r| rv(r)).collect();
            let v = ConeV::from_rays(rays);
            let w = reduce_v(&v);
            prop_assert_eq!(reduce_v(&w), w.clone());
            prop_assert!(w.rays.len() <= v.rays.len());
            let h = v_to_h(&v);
            let tol = Rat::default_tol();
            for r in &v.rays {
                prop_assert!(h.contains(r, &tol));
            }
        }
    }
}
