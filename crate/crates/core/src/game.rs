//! The adaptive game: two sources feed three players in a line, and the
//! middle player announces which CHSH-type relation the outer two must
//! satisfy.
//!
//! Bob holds one half of each source and produces his announcement with a
//! four-outcome measurement on that pair. Each announcement leaves a
//! conditioned state on Alice and Charlie, and the winning probability is
//! governed by the CHSH behaviour of those states. Upper-bound sweeps work
//! with one middle effect at a time, mirroring that argument; the reference
//! strategies carry Bob's full measurement.

use crate::boxes::{self, Orientation};
use crate::composite::{correlation_vector, JointModel};
use crate::dd;
use crate::gpt::{Measurement, SystemModel};
use crate::linalg::{self, Vector};
use crate::scalar::Scalar;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("system {0:?} has no perfectly distinguishable pair of states")]
    NoDistinguishablePair(String),
    #[error("the wiring bound applies to mixing weights in [2/3, 1], got {0}")]
    MixingWeightOutOfRange(f64),
}

// ---------------------------------------------------------------------------
// winning conditions
// ---------------------------------------------------------------------------

pub const ANNOUNCEMENTS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// The relation the outer players must satisfy for each announcement: after
/// Bob outputs b, the round is won when a xor c = g(r_A, r_C) for the stored
/// truth table g.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameOutcomeTable {
    rounds: [Orientation; 4],
}

impl GameOutcomeTable {
    /// The four rounds of the adaptive game: announcement (0,0) demands
    /// a xor c = r_A r_C xor r_C, announcement (0,1) demands the inclusive
    /// or of the questions, and the announcements with first bit 1 demand
    /// the negations of those two relations in reverse order.
    pub fn standard() -> Self {
        let table = |g: fn(u8, u8) -> u8| Orientation([g(0, 0), g(0, 1), g(1, 0), g(1, 1)]);
        GameOutcomeTable {
            rounds: [
                table(|ra, rc| (ra & rc) ^ rc),
                table(|ra, rc| (ra & rc) ^ ra ^ rc),
                table(|ra, rc| (ra & rc) ^ ra ^ rc ^ 1),
                table(|ra, rc| (ra & rc) ^ rc ^ 1),
            ],
        }
    }

    pub fn round(&self, b: (u8, u8)) -> &Orientation {
        &self.rounds[2 * b.0 as usize + b.1 as usize]
    }

    /// The predicate Q(a, b, c, r_A, r_C).
    pub fn wins(&self, a: u8, b: (u8, u8), c: u8, ra: u8, rc: u8) -> bool {
        a ^ c == self.round(b).eval(ra, rc)
    }
}

// ---------------------------------------------------------------------------
// conditioning
// ---------------------------------------------------------------------------

/// The end-to-end state left on the outer pair when `effect` fires between
/// them, flattened with the Alice index major, together with the probability
/// of the effect firing. Dimensions run in line order; the sources are
/// kron-flattened with their left factor major.
pub fn conditioned_state<S: Scalar>(
    source_ab: &[S],
    source_bc: &[S],
    effect: &[S],
    dims: &[usize; 4],
    a_unit: &[S],
    c_unit: &[S],
) -> (Vector<S>, S) {
    let [da, db, dbp, dc] = *dims;
    debug_assert_eq!(source_ab.len(), da * db);
    debug_assert_eq!(source_bc.len(), dbp * dc);
    debug_assert_eq!(effect.len(), db * dbp);
    // contract the B index first, then B'
    let mut half = vec![S::zero(); da * dbp];
    for i in 0..da {
        for j in 0..db {
            let s = &source_ab[i * db + j];
            if s.is_zero() {
                continue;
            }
            for k in 0..dbp {
                half[i * dbp + k] =
                    half[i * dbp + k].clone() + s.clone() * effect[j * dbp + k].clone();
            }
        }
    }
    let mut t = vec![S::zero(); da * dc];
    for i in 0..da {
        for k in 0..dbp {
            let h = &half[i * dbp + k];
            if h.is_zero() {
                continue;
            }
            for l in 0..dc {
                t[i * dc + l] = t[i * dc + l].clone() + h.clone() * source_bc[k * dc + l].clone();
            }
        }
    }
    let weight = linalg::dot(&linalg::kron(a_unit, c_unit), &t);
    (t, weight)
}

// ---------------------------------------------------------------------------
// strategies
// ---------------------------------------------------------------------------

/// A complete strategy: the two source states, Bob's four-outcome measurement
/// on the middle pair, and question-indexed binary measurements for the outer
/// players. The global state is the product of the two sources; nothing else
/// is shared.
#[derive(Debug, Clone)]
pub struct Strategy<S> {
    pub label: String,
    /// local dimensions in line order Alice, Bob left, Bob right, Charlie
    pub dims: [usize; 4],
    pub a_unit: Vector<S>,
    pub c_unit: Vector<S>,
    /// unit on the middle pair, which Bob's effects must sum to
    pub middle_unit: Vector<S>,
    pub source_ab: Vector<S>,
    pub source_bc: Vector<S>,
    /// effects indexed by announcement as 2 b0 + b1
    pub bob_effects: Vec<Vector<S>>,
    pub alice: Vec<Measurement<S>>,
    pub charlie: Vec<Measurement<S>>,
}

impl<S: Scalar> Strategy<S> {
    fn check(&self) {
        let [da, db, dbp, dc] = self.dims;
        assert_eq!(self.source_ab.len(), da * db);
        assert_eq!(self.source_bc.len(), dbp * dc);
        assert_eq!(self.bob_effects.len(), 4, "one effect per announcement");
        let mut sum = vec![S::zero(); db * dbp];
        for e in &self.bob_effects {
            sum = linalg::add(&sum, e);
        }
        let tol = S::default_tol();
        assert!(
            sum.iter().zip(&self.middle_unit).all(|(a, b)| (a.clone() - b.clone()).is_zero_tol(&tol)),
            "announcement effects must sum to the middle unit"
        );
        assert_eq!(self.alice.len(), 2);
        assert_eq!(self.charlie.len(), 2);
    }

    /// Winning probability with the questions uniform over the four input
    /// pairs. Announcements that never fire contribute nothing.
    pub fn p_win(&self, table: &GameOutcomeTable) -> S {
        self.check();
        let quarter = S::from_ratio(1, 4);
        let tol = S::default_tol();
        let mut total = S::zero();
        for (bi, effect) in self.bob_effects.iter().enumerate() {
            let b = ((bi / 2) as u8, (bi % 2) as u8);
            let (t, weight) = conditioned_state(
                &self.source_ab,
                &self.source_bc,
                effect,
                &self.dims,
                &self.a_unit,
                &self.c_unit,
            );
            if weight.is_zero_tol(&tol) {
                continue;
            }
            for ra in 0..2u8 {
                for rc in 0..2u8 {
                    for (a, ea) in self.alice[ra as usize].effects.iter().enumerate() {
                        for (c, ec) in self.charlie[rc as usize].effects.iter().enumerate() {
                            if table.wins(a as u8, b, c as u8, ra, rc) {
                                let mass = linalg::dot(&linalg::kron(ea, ec), &t);
                                total = total + quarter.clone() * mass;
                            }
                        }
                    }
                }
            }
        }
        total
    }
}

/// The strategy available in any model with two perfectly distinguishable
/// states: both sources emit one of the two with equal probability, every
/// party applies the distinguishing measurement binarized to "was it the
/// first state", the outer players answer their outcome, and Bob announces
/// (0,0) or (1,0) on equal outcomes and (0,1) or (1,1) otherwise, each with
/// probability one half. Wins with probability exactly 3/4: every
/// announcement picks a relation its conditioned answers satisfy on three of
/// the four question pairs.
pub fn classical_reference<S: Scalar>(sys: &SystemModel<S>) -> Result<Strategy<S>, GameError> {
    let pair = sys
        .perfectly_distinguishable_pair()
        .ok_or_else(|| GameError::NoDistinguishablePair(sys.label.clone()))?;
    let states = sys.normalized_states();
    let (s0, s1) = (&states[pair.state_a], &states[pair.state_b]);
    let e0 = sys.measurements[pair.measurement].effects[pair.out_a].clone();
    let e1 = linalg::sub(&sys.unit, &e0);
    let half = S::from_ratio(1, 2);
    let source = linalg::scale(&linalg::add(&linalg::kron(s0, s0), &linalg::kron(s1, s1)), &half);
    let same = linalg::scale(&linalg::add(&linalg::kron(&e0, &e0), &linalg::kron(&e1, &e1)), &half);
    let differ =
        linalg::scale(&linalg::add(&linalg::kron(&e0, &e1), &linalg::kron(&e1, &e0)), &half);
    let m = Measurement { effects: vec![e0, e1] };
    Ok(Strategy {
        label: format!("{} classical reference", sys.label),
        dims: [sys.dim; 4],
        a_unit: sys.unit.clone(),
        c_unit: sys.unit.clone(),
        middle_unit: linalg::kron(&sys.unit, &sys.unit),
        source_ab: source.clone(),
        source_bc: source,
        bob_effects: vec![same.clone(), differ.clone(), same, differ],
        alice: vec![m.clone(), m.clone()],
        charlie: vec![m.clone(), m],
    })
}

// ---------------------------------------------------------------------------
// conditioned-state sweeps
// ---------------------------------------------------------------------------

/// Every distinct normalized end-party state a middle effect can leave
/// behind, over all pairs of extremal sources from `joint` and all extremal
/// rays of its dual cone. All four local systems are copies of `sys`
/// composed by the same rule, so the dual of `joint` also describes the
/// middle pair's effects.
pub fn conditioned_extremes<S: Scalar>(
    sys: &SystemModel<S>,
    joint: &JointModel<S>,
) -> Vec<Vector<S>> {
    let tol = S::default_tol();
    let sources = joint.normalized_vertices();
    let effects = dd::dualize(joint.v_form()).rays;
    let dims = [sys.dim; 4];
    let (ns, ne) = (sources.len(), effects.len());
    let mut states: Vec<Vector<S>> = (0..ns * ns * ne)
        .into_par_iter()
        .filter_map(|i| {
            let (s1, s2, e) = (&sources[i / (ns * ne)], &sources[(i / ne) % ns], &effects[i % ne]);
            let (t, weight) = conditioned_state(s1, s2, e, &dims, &sys.unit, &sys.unit);
            if weight.is_zero_tol(&tol) {
                return None;
            }
            Some(linalg::scale(&t, &weight.recip()))
        })
        .collect();
    states.sort_by(|a, b| crate::cone::cmp_vec(a, b));
    states.dedup_by(|a, b| linalg::is_zero_vec(&linalg::sub(a, b), &tol));
    states
}

/// One binary measurement per extremal effect, scaled so the effect peaks at
/// probability one on the state space. Outcome swaps are left to the
/// winning-condition sweep.
fn binary_measurements<S: Scalar>(sys: &SystemModel<S>) -> Vec<Measurement<S>> {
    let states = sys.normalized_states();
    sys.effects
        .rays
        .iter()
        .map(|f| {
            let mut max = linalg::dot(f, &states[0]);
            for s in &states[1..] {
                let v = linalg::dot(f, s);
                if v > max {
                    max = v;
                }
            }
            let e = linalg::scale(f, &max.recip());
            let rest = linalg::sub(&sys.unit, &e);
            Measurement { effects: vec![e, rest] }
        })
        .collect()
}

/// Best CHSH winning probability a bipartite state reaches with binary
/// measurements built from the extremal effects of the local model, over all
/// question assignments and all eight winning conditions.
pub fn best_chsh_of_state<S: Scalar>(z: &[S], sys: &SystemModel<S>) -> S {
    let pool = binary_measurements(sys);
    let rows: Vec<Vector<S>> =
        boxes::chsh_orientations().iter().map(|g| boxes::chsh_row::<S>(g)).collect();
    let mut best = None;
    for m0 in &pool {
        for m1 in &pool {
            for m2 in &pool {
                for m3 in &pool {
                    let table = correlation_vector(z, [m0, m1], [m2, m3]);
                    for row in &rows {
                        let v = linalg::dot(row, &table);
                        if best.as_ref().map_or(true, |b| v > *b) {
                            best = Some(v);
                        }
                    }
                }
            }
        }
    }
    best.expect("local model has at least one extremal effect")
}

// ---------------------------------------------------------------------------
// wirings of noisy maximally entangled states
// ---------------------------------------------------------------------------

/// Mixing the maximally entangled state of an even polygon pair with the
/// completely mixed state at weight w >= 2/3 yields correlations whose
/// wirings behave like an isotropic family with the reduced weight
/// w' = 1 - 4(1 - w) / (2 - w), which no wiring can distill further. The
/// CHSH winning probability of anything built from them is therefore at
/// most 1/2 + (w' + 1)/4.
pub fn isotropic_wiring_bound(weight: f64) -> Result<f64, GameError> {
    if !(2.0 / 3.0..=1.0).contains(&weight) {
        return Err(GameError::MixingWeightOutOfRange(weight));
    }
    let reduced = 1.0 - 4.0 * (1.0 - weight) / (2.0 - weight);
    Ok(0.5 + (reduced + 1.0) / 4.0)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
