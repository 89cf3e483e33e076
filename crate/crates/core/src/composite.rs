//! Bipartite composites of two single systems.
//!
//! The joint state lives in the tensor of the local spaces. The smallest
//! composite allows only mixtures of product states; the largest allows any
//! vector that gives nonnegative probability to every product of dual-cone
//! effects. When a system restricts its effect cone below the full dual, the
//! corresponding composite only requires positivity against allowed effects
//! on one side and dual effects on the other, which can exceed the largest
//! unrestricted composite.

use crate::cone::{is_extremal_in_h, ConeH, ConeV, GeometryError};
use crate::dd;
use crate::gpt::{Measurement, SystemModel};
use crate::linalg::{self, Matrix, Vector};
use crate::lp::{self, Cmp, LinearProgram, LpError};
use crate::scalar::Scalar;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CompositeError {
    #[error("system {0:?} restricts its effects below the full dual cone; the unrestricted composite is not defined for it")]
    RestrictedEffects(String),
}

/// Result of maximizing a functional over normalized joint states.
#[derive(Debug, Clone)]
pub struct Optimum<S> {
    pub value: S,
    pub state: Vector<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionKind {
    Min,
    Max,
    GeneralizedMax,
}

#[derive(Debug, Clone)]
pub struct JointModel<S: Scalar> {
    pub label: String,
    pub kind: CompositionKind,
    pub dim: usize,
    pub a_dim: usize,
    pub b_dim: usize,
    pub unit: Vector<S>,
    /// Local binary measurements inherited from each factor, so correlation
    /// sweeps need no reference back to the single-system models.
    pub a_measurements: Vec<Measurement<S>>,
    pub b_measurements: Vec<Measurement<S>>,
    v: OnceLock<ConeV<S>>,
    h: OnceLock<ConeH<S>>,
}

impl<S: Scalar> JointModel<S> {
    fn from_v(label: String, kind: CompositionKind, a: &SystemModel<S>, b: &SystemModel<S>, v: ConeV<S>) -> Self {
        let cell = OnceLock::new();
        cell.set(v).ok();
        JointModel {
            label,
            kind,
            dim: a.dim * b.dim,
            a_dim: a.dim,
            b_dim: b.dim,
            unit: linalg::kron(&a.unit, &b.unit),
            a_measurements: a.measurements.clone(),
            b_measurements: b.measurements.clone(),
            v: cell,
            h: OnceLock::new(),
        }
    }

    fn from_h(label: String, kind: CompositionKind, a: &SystemModel<S>, b: &SystemModel<S>, h: ConeH<S>) -> Self {
        let cell = OnceLock::new();
        cell.set(h).ok();
        JointModel {
            label,
            kind,
            dim: a.dim * b.dim,
            a_dim: a.dim,
            b_dim: b.dim,
            unit: linalg::kron(&a.unit, &b.unit),
            a_measurements: a.measurements.clone(),
            b_measurements: b.measurements.clone(),
            v: OnceLock::new(),
            h: cell,
        }
    }

    pub fn v_form(&self) -> &ConeV<S> {
        self.v.get_or_init(|| dd::enumerate(self.h.get().expect("one form is always present")))
    }

    pub fn h_form(&self) -> &ConeH<S> {
        self.h.get_or_init(|| dd::v_to_h(self.v.get().expect("one form is always present")))
    }

    pub fn contains(&self, z: &[S], tol: &S) -> bool {
        self.h_form().contains(z, tol)
    }

    pub fn is_extremal(&self, z: &[S], tol: &S) -> Result<bool, GeometryError> {
        is_extremal_in_h(self.h_form(), z, tol)
    }

    /// Extremal joint states scaled to unit probability.
    pub fn normalized_vertices(&self) -> Vec<Vector<S>> {
        self.v_form()
            .rays
            .iter()
            .map(|r| {
                let h = linalg::dot(&self.unit, r);
                linalg::scale(r, &h.recip())
            })
            .collect()
    }

    /// Maximize a linear functional over normalized joint states, using
    /// whichever cone description is already available: weights over the
    /// generators for a V-form model, the state vector itself for an H-form
    /// model. Neither path triggers a cone conversion.
    pub fn optimize(&self, objective: &[S]) -> Result<Optimum<S>, LpError<S>> {
        if let Some(v) = self.v.get() {
            let vals: Vector<S> = v.rays.iter().map(|r| linalg::dot(objective, r)).collect();
            let heights: Vector<S> = v.rays.iter().map(|r| linalg::dot(&self.unit, r)).collect();
            let mut lp = LinearProgram::new_nonneg(vals);
            lp.add(heights, Cmp::Eq, S::one());
            let sol = lp::solve(&lp)?;
            let mut state = vec![S::zero(); self.dim];
            for (c, r) in sol.x.iter().zip(&v.rays) {
                if !c.is_zero_tol(&S::default_tol()) {
                    state = linalg::axpy(&state, c, r);
                }
            }
            return Ok(Optimum { value: sol.value, state });
        }
        let h = self.h_form();
        let mut lp = LinearProgram::new(objective.to_vec(), vec![false; self.dim]);
        for row in &h.ineqs {
            lp.add(row.clone(), Cmp::Ge, S::zero());
        }
        for row in &h.eqs {
            lp.add(row.clone(), Cmp::Eq, S::zero());
        }
        lp.add(self.unit.clone(), Cmp::Eq, S::one());
        let sol = lp::solve(&lp)?;
        Ok(Optimum { value: sol.value, state: sol.x })
    }
}

// ---------------------------------------------------------------------------
// constructors
// ---------------------------------------------------------------------------

pub(crate) fn kron_rows<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for ra in a {
        for rb in b {
            out.push(linalg::kron(ra, rb));
        }
    }
    out
}

/// Mixtures of product states. Products of extremal local states are exactly
/// the extremal rays.
pub fn min_tensor<S: Scalar>(a: &SystemModel<S>, b: &SystemModel<S>) -> JointModel<S> {
    let rays = kron_rows(&a.states.rays, &b.states.rays);
    JointModel::from_v(
        format!("{} (x)min {}", a.label, b.label),
        CompositionKind::Min,
        a,
        b,
        ConeV::from_rays(rays),
    )
}

fn is_unrestricted<S: Scalar>(m: &SystemModel<S>) -> bool {
    let tol = S::default_tol();
    let dual = dd::dualize(&m.states);
    dual.rays.iter().all(|r| m.effect_h.contains(r, &tol))
        && m.effects.rays.iter().all(|r| dd::v_to_h(&dual).contains(r, &tol))
}

/// Everything nonnegative on products of dual-cone effects. Requires both
/// systems to allow their full dual cone as effects.
pub fn max_tensor<S: Scalar>(
    a: &SystemModel<S>,
    b: &SystemModel<S>,
) -> Result<JointModel<S>, CompositeError> {
    for m in [a, b] {
        if !is_unrestricted(m) {
            return Err(CompositeError::RestrictedEffects(m.label.clone()));
        }
    }
    let da = dd::dualize(&a.states);
    let db = dd::dualize(&b.states);
    Ok(JointModel::from_h(
        format!("{} (x)max {}", a.label, b.label),
        CompositionKind::Max,
        a,
        b,
        ConeH::new(a.dim * b.dim, kron_rows(&da.rays, &db.rays), Vec::new()),
    ))
}

/// Largest composite compatible with the restricted local effect cones:
/// positivity against allowed effects on either side tensored with dual-cone
/// effects on the other. Coincides with the unrestricted composite when
/// neither system restricts its effects.
pub fn generalized_max_tensor<S: Scalar>(a: &SystemModel<S>, b: &SystemModel<S>) -> JointModel<S> {
    let da = dd::dualize(&a.states);
    let db = dd::dualize(&b.states);
    let mut ineqs = kron_rows(&a.effects.rays, &db.rays);
    ineqs.extend(kron_rows(&da.rays, &b.effects.rays));
    JointModel::from_h(
        format!("{} (x)gmax {}", a.label, b.label),
        CompositionKind::GeneralizedMax,
        a,
        b,
        ConeH::new(a.dim * b.dim, ineqs, Vec::new()),
    )
}

// ---------------------------------------------------------------------------
// correlations and separability
// ---------------------------------------------------------------------------

/// The 16-entry table P(ab|xy) from a joint state and a pair of binary
/// measurements per side.
pub fn correlation_vector<S: Scalar>(
    z: &[S],
    ma: [&Measurement<S>; 2],
    mb: [&Measurement<S>; 2],
) -> Vector<S> {
    let mut out = vec![S::zero(); 16];
    for (x, mx) in ma.iter().enumerate() {
        for (y, my) in mb.iter().enumerate() {
            for (a, ea) in mx.effects.iter().enumerate() {
                for (b, eb) in my.effects.iter().enumerate() {
                    out[crate::boxes::idx(a as u8, b as u8, x as u8, y as u8)] =
                        linalg::dot(&linalg::kron(ea, eb), z);
                }
            }
        }
    }
    out
}

/// Express a functional on correlation tables as a functional on joint
/// states, for a fixed pair of binary measurements per side.
pub fn pull_back_functional<S: Scalar>(
    w: &[S],
    ma: [&Measurement<S>; 2],
    mb: [&Measurement<S>; 2],
    dim: usize,
) -> Vector<S> {
    let mut out = vec![S::zero(); dim];
    for (x, mx) in ma.iter().enumerate() {
        for (y, my) in mb.iter().enumerate() {
            for (a, ea) in mx.effects.iter().enumerate() {
                for (b, eb) in my.effects.iter().enumerate() {
                    let coeff = &w[crate::boxes::idx(a as u8, b as u8, x as u8, y as u8)];
                    if coeff.is_zero_tol(&S::default_tol()) {
                        continue;
                    }
                    let k = linalg::kron(ea, eb);
                    out = linalg::axpy(&out, coeff, &k);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub enum Separability<S> {
    /// Convex weights over products of extremal local states.
    Separable { weights: Vector<S> },
    /// Functional nonnegative on every product state but negative on the
    /// tested state.
    Entangled { witness: Vector<S> },
}

pub fn is_separable<S: Scalar>(z: &[S], a: &SystemModel<S>, b: &SystemModel<S>) -> Separability<S> {
    let products = kron_rows(&a.states.rays, &b.states.rays);
    let n = products.len();
    let mut lp = LinearProgram::new_nonneg(vec![S::zero(); n]);
    for k in 0..z.len() {
        let row: Vector<S> = products.iter().map(|p| p[k].clone()).collect();
        lp.add(row, Cmp::Eq, z[k].clone());
    }
    match lp::solve(&lp) {
        Ok(sol) => Separability::Separable { weights: sol.x },
        Err(LpError::Infeasible { farkas }) => {
            debug_assert!(products
                .iter()
                .all(|p| linalg::dot(&farkas, p).sign_tol(&S::default_tol()) >= 0));
            debug_assert!(linalg::dot(&farkas, z).sign_tol(&S::default_tol()) < 0);
            Separability::Entangled { witness: farkas }
        }
        Err(LpError::Unbounded) => unreachable!("feasibility problem has zero objective"),
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
