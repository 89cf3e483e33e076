//! Single-system models: a state cone with a unit effect, an effect cone,
//! and a list of finite-outcome measurements.
//!
//! The models used throughout are the square-state system (two binary
//! measurements reading out the two coordinates), the classical trit, and the
//! regular polygon systems, optionally rescaled so that the state cone
//! coincides with its dual.

use crate::cone::{ConeH, ConeV};
use crate::dd;
use crate::linalg::{self, Vector};
use crate::scalar::{rat, Rat, Scalar};
use serde_json::{json, Value};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GptError {
    #[error("polygon systems need at least 3 vertices, got {0}")]
    PolygonTooSmall(usize),
    #[error("system {0:?} is not rotation symmetric about the unit axis")]
    NotRotationSymmetric(String),
}

/// A finite-outcome measurement: effects that sum to the unit.
#[derive(Debug, Clone)]
pub struct Measurement<S> {
    pub effects: Vec<Vector<S>>,
}

#[derive(Debug, Clone)]
pub struct SystemModel<S> {
    pub label: String,
    pub dim: usize,
    pub unit: Vector<S>,
    pub states: ConeV<S>,
    pub effects: ConeV<S>,
    pub state_h: ConeH<S>,
    pub effect_h: ConeH<S>,
    pub measurements: Vec<Measurement<S>>,
    pub self_dual: bool,
    pub polygon_n: Option<usize>,
}

/// Probability of an effect on a normalized state.
pub fn probability<S: Scalar>(effect: &[S], state: &[S]) -> S {
    linalg::dot(effect, state)
}

fn cones_equal<S: Scalar>(a: &ConeV<S>, b: &ConeV<S>, tol: &S) -> bool {
    if a.lineality.len() != b.lineality.len() {
        return false;
    }
    let ha = dd::v_to_h(a);
    let hb = dd::v_to_h(b);
    a.rays.iter().all(|r| hb.contains(r, tol))
        && b.rays.iter().all(|r| ha.contains(r, tol))
        && a.lineality.iter().all(|l| {
            hb.contains(l, tol) && hb.contains(&l.iter().map(|x| -x.clone()).collect::<Vec<_>>(), tol)
        })
}

impl<S: Scalar> SystemModel<S> {
    fn assemble(
        label: &str,
        unit: Vector<S>,
        states: ConeV<S>,
        effects: ConeV<S>,
        measurements: Vec<Measurement<S>>,
        polygon_n: Option<usize>,
    ) -> Self {
        let tol = S::default_tol();
        let dim = unit.len();
        let state_h = dd::v_to_h(&states);
        let effect_h = dd::v_to_h(&effects);
        for m in &measurements {
            let mut sum = vec![S::zero(); dim];
            for e in &m.effects {
                assert!(effect_h.contains(e, &tol), "measurement effect outside effect cone");
                sum = linalg::add(&sum, e);
            }
            assert!(
                sum.iter().zip(&unit).all(|(a, b)| (a.clone() - b.clone()).is_zero_tol(&tol)),
                "measurement effects do not sum to the unit"
            );
        }
        let self_dual = cones_equal(&states, &effects, &tol);
        SystemModel {
            label: label.to_string(),
            dim,
            unit,
            states,
            effects,
            state_h,
            effect_h,
            measurements,
            self_dual,
            polygon_n,
        }
    }

    /// Extremal states scaled so the unit effect evaluates to 1.
    pub fn normalized_states(&self) -> Vec<Vector<S>> {
        self.states
            .rays
            .iter()
            .map(|r| {
                let h = linalg::dot(&self.unit, r);
                linalg::scale(r, &h.recip())
            })
            .collect()
    }

    pub fn is_normalized_state(&self, x: &[S], tol: &S) -> bool {
        self.state_h.contains(x, tol)
            && (linalg::dot(&self.unit, x) - S::one()).is_zero_tol(tol)
    }

    pub fn is_effect(&self, e: &[S], tol: &S) -> bool {
        self.effect_h.contains(e, tol)
    }

    pub fn outcome_distribution(&self, measurement: usize, state: &[S]) -> Vector<S> {
        self.measurements[measurement]
            .effects
            .iter()
            .map(|e| probability(e, state))
            .collect()
    }

    /// Two extremal states told apart with certainty by one measurement:
    /// outcome `out_a` fires on state `a` with probability one and outcome
    /// `out_b` on state `b`.
    pub fn perfectly_distinguishable_pair(&self) -> Option<DistinguishedPair> {
        let tol = S::default_tol();
        let states = self.normalized_states();
        for (mi, m) in self.measurements.iter().enumerate() {
            for (ia, sa) in states.iter().enumerate() {
                for (ib, sb) in states.iter().enumerate() {
                    if ia == ib {
                        continue;
                    }
                    for (oa, ea) in m.effects.iter().enumerate() {
                        if !(probability(ea, sa) - S::one()).is_zero_tol(&tol) {
                            continue;
                        }
                        for (ob, eb) in m.effects.iter().enumerate() {
                            if ob != oa && (probability(eb, sb) - S::one()).is_zero_tol(&tol) {
                                return Some(DistinguishedPair {
                                    measurement: mi,
                                    state_a: ia,
                                    state_b: ib,
                                    out_a: oa,
                                    out_b: ob,
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// Serializable summary of the model.
    pub fn descriptor(&self) -> Value {
        let sc = |x: &S| -> Value {
            if S::EXACT {
                Value::String(x.render())
            } else {
                json!(x.to_f64())
            }
        };
        let vecs = |rows: &Vec<Vector<S>>| -> Value {
            Value::Array(rows.iter().map(|r| Value::Array(r.iter().map(sc).collect())).collect())
        };
        json!({
            "schema": 1,
            "label": self.label,
            "dim": self.dim,
            "polygon_n": self.polygon_n,
            "self_dual": self.self_dual,
            "exact": S::EXACT,
            "unit": Value::Array(self.unit.iter().map(sc).collect()),
            "states": vecs(&self.states.rays),
            "effect_rays": vecs(&self.effects.rays),
            "measurements": Value::Array(
                self.measurements.iter().map(|m| vecs(&m.effects)).collect()
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistinguishedPair {
    pub measurement: usize,
    pub state_a: usize,
    pub state_b: usize,
    pub out_a: usize,
    pub out_b: usize,
}

// ---------------------------------------------------------------------------
// concrete models
// ---------------------------------------------------------------------------

/// Square-state system: two binary measurements with independent uniform
/// fiducial outcomes. States are (P(0|first), P(0|second), 1).
pub fn gbit_square() -> SystemModel<Rat> {
    let states = ConeV::from_rays(vec![
        vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        vec![rat(0, 1), rat(1, 1), rat(1, 1)],
        vec![rat(1, 1), rat(0, 1), rat(1, 1)],
        vec![rat(1, 1), rat(1, 1), rat(1, 1)],
    ]);
    let effects = dd::dualize(&states);
    let unit = vec![rat(0, 1), rat(0, 1), rat(1, 1)];
    let m0 = Measurement {
        effects: vec![
            vec![rat(1, 1), rat(0, 1), rat(0, 1)],
            vec![rat(-1, 1), rat(0, 1), rat(1, 1)],
        ],
    };
    let m1 = Measurement {
        effects: vec![
            vec![rat(0, 1), rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(-1, 1), rat(1, 1)],
        ],
    };
    SystemModel::assemble("gbit-square", unit, states, effects, vec![m0, m1], None)
}

/// Classical three-outcome system: the probability simplex.
pub fn trit() -> SystemModel<Rat> {
    let e = |i: usize| -> Vector<Rat> {
        let mut v = vec![rat(0, 1); 3];
        v[i] = rat(1, 1);
        v
    };
    let states = ConeV::from_rays(vec![e(0), e(1), e(2)]);
    let effects = ConeV::from_rays(vec![e(0), e(1), e(2)]);
    let unit = vec![rat(1, 1), rat(1, 1), rat(1, 1)];
    let m = Measurement { effects: vec![e(0), e(1), e(2)] };
    SystemModel::assemble("trit", unit, states, effects, vec![m], None)
}

/// Vertices of the regular polygon system in angular order, radius
/// sqrt(sec(pi/n)) at height 1.
fn polygon_vertices(n: usize) -> Vec<Vector<f64>> {
    let r = (1.0 / (PI / n as f64).cos()).sqrt();
    (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            vec![r * a.cos(), r * a.sin(), 1.0]
        })
        .collect()
}

/// Binary measurements read off the facet structure: each effect is a facet
/// normal scaled so its largest value on a vertex is 1, paired with its
/// complement. For even n the complement of effect k is effect k + n/2, so
/// only n/2 distinct measurements remain.
fn polygon_measurements(verts: &[Vector<f64>], unit: &[f64]) -> Vec<Measurement<f64>> {
    let n = verts.len();
    let r = verts[0][..2].iter().map(|x| x * x).sum::<f64>().sqrt();
    let c = (PI / n as f64).cos();
    let count = if n % 2 == 0 { n / 2 } else { n };
    (0..count)
        .map(|k| {
            let th = (2 * k + 1) as f64 * PI / n as f64;
            let g = vec![-th.cos(), -th.sin(), r * c];
            let max = verts.iter().map(|v| linalg::dot(&g, v)).fold(f64::MIN, f64::max);
            let e: Vector<f64> = g.iter().map(|x| x / max).collect();
            let rest = linalg::sub(unit, &e);
            Measurement { effects: vec![e, rest] }
        })
        .collect()
}

/// Regular polygon system with the full dual cone as effects.
pub fn polygon_system(n: usize) -> Result<SystemModel<f64>, GptError> {
    if n < 3 {
        return Err(GptError::PolygonTooSmall(n));
    }
    let verts = polygon_vertices(n);
    let unit = vec![0.0, 0.0, 1.0];
    let states = ConeV::from_rays(verts.clone());
    let effects = dd::dualize(&states);
    let measurements = polygon_measurements(&verts, &unit);
    Ok(SystemModel::assemble(
        &format!("polygon-{n}"),
        unit,
        states,
        effects,
        measurements,
        Some(n),
    ))
}

/// Lossless float copy of an exact model.
pub fn to_f64_model(m: &SystemModel<Rat>) -> SystemModel<f64> {
    let conv = |v: &Vector<Rat>| -> Vector<f64> { v.iter().map(Scalar::to_f64).collect() };
    let cone = |c: &ConeV<Rat>| -> ConeV<f64> {
        ConeV::new(c.dim, c.rays.iter().map(conv).collect(), c.lineality.iter().map(conv).collect())
    };
    SystemModel::assemble(
        &m.label,
        conv(&m.unit),
        cone(&m.states),
        cone(&m.effects),
        m.measurements
            .iter()
            .map(|meas| Measurement { effects: meas.effects.iter().map(conv).collect() })
            .collect(),
        m.polygon_n,
    )
}

// ---------------------------------------------------------------------------
// self-dualization
// ---------------------------------------------------------------------------

/// Angularly ordered normalized states, or an error when the vertex set is
/// not a regular polygon centered on the unit axis.
fn regular_vertices(m: &SystemModel<f64>) -> Result<Vec<Vector<f64>>, GptError> {
    let tol = 1e-7;
    let err = || GptError::NotRotationSymmetric(m.label.clone());
    if m.dim != 3 {
        return Err(err());
    }
    let mut verts = Vec::new();
    for r in &m.states.rays {
        let h = linalg::dot(&m.unit, r);
        if h <= tol {
            return Err(err());
        }
        verts.push(linalg::scale(r, &(1.0 / h)));
    }
    let n = verts.len();
    let cx = verts.iter().map(|v| v[0]).sum::<f64>() / n as f64;
    let cy = verts.iter().map(|v| v[1]).sum::<f64>() / n as f64;
    if cx.abs() > tol || cy.abs() > tol {
        return Err(err());
    }
    let radii: Vec<f64> = verts.iter().map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt()).collect();
    if radii.iter().any(|&r| (r - radii[0]).abs() > tol) {
        return Err(err());
    }
    verts.sort_by(|a, b| a[1].atan2(a[0]).partial_cmp(&b[1].atan2(b[0])).unwrap());
    let step = 2.0 * PI / n as f64;
    for i in 0..n {
        let a = verts[i][1].atan2(verts[i][0]);
        let b = verts[(i + 1) % n][1].atan2(verts[(i + 1) % n][0]);
        let mut d = b - a;
        while d <= -tol {
            d += 2.0 * PI;
        }
        if (d - step).abs() > tol {
            return Err(err());
        }
    }
    Ok(verts)
}

/// Rescale a rotation-symmetric system so its state cone equals its dual,
/// then read the measurements off the shared cone. The scale is the largest
/// radial factor t with t^2 (w_i . w_j) + 1 >= 0 across vertex pairs, which
/// is exactly where containment in the dual becomes equality.
pub fn self_dualize(m: &SystemModel<f64>) -> Result<SystemModel<f64>, GptError> {
    let verts = regular_vertices(m)?;
    let n = verts.len();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let d = -(verts[i][0] * verts[j][0] + verts[i][1] * verts[j][1]);
            worst = worst.max(d);
        }
    }
    assert!(worst > 0.0, "polygon vertex pairs must include obtuse angles");
    let t = (1.0 / worst).sqrt();
    let scaled: Vec<Vector<f64>> =
        verts.iter().map(|v| vec![t * v[0], t * v[1], 1.0]).collect();

    let states = ConeV::from_rays(scaled.clone());
    // Effects are restricted to the state cone itself. At the maximal scale
    // the cone sits inside its dual (all pairwise inner products of scaled
    // vertices are nonnegative) and touches it, so every such effect is
    // positive on every state; for odd n the two cones coincide exactly.
    let effects = states.clone();
    let tol = f64::default_tol();
    if cfg!(debug_assertions) {
        let mut min_pair = f64::MAX;
        for a in &scaled {
            for b in &scaled {
                min_pair = min_pair.min(linalg::dot(a, b));
            }
        }
        debug_assert!(min_pair.abs() < 1e-7, "maximal scale must touch the dual");
    }

    let unit = vec![0.0, 0.0, 1.0];
    let count = if n % 2 == 0 { n / 2 } else { n };
    let measurements: Vec<Measurement<f64>> = (0..count)
        .map(|k| {
            let v = &scaled[k];
            let max = scaled.iter().map(|w| linalg::dot(v, w)).fold(f64::MIN, f64::max);
            let e: Vector<f64> = v.iter().map(|x| x / max).collect();
            let rest = linalg::sub(&unit, &e);
            Measurement { effects: vec![e, rest] }
        })
        .collect();
    for meas in &measurements {
        debug_assert!(dd::v_to_h(&effects).contains(&meas.effects[1], &tol));
    }

    Ok(SystemModel::assemble(
        &format!("{}-selfdual", m.label),
        unit,
        states,
        effects,
        measurements,
        m.polygon_n,
    ))
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
