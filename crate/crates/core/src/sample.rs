//! Seeded randomness for property checks: simplex sampling plus exact
//! rational snapping so downstream arithmetic can stay exact.

use crate::scalar::{rat, Rat};
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Denominator used when freezing sampled weights into rationals.
pub const SNAP_DENOMINATOR: i64 = 1 << 20;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the probability simplex with `k` coordinates
/// (flat Dirichlet), via normalized exponential variates.
pub fn dirichlet_f64<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    assert!(k > 0);
    let mut v: Vec<f64> = (0..k)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            -u.ln()
        })
        .collect();
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    v
}

/// Round simplex weights to rationals over a fixed power-of-two denominator,
/// pushing the rounding slack into the largest entry so the result still
/// sums to exactly one.
pub fn snap_weights(w: &[f64]) -> Vec<Rat> {
    assert!(!w.is_empty());
    let mut out: Vec<Rat> = w
        .iter()
        .map(|x| rat((x * SNAP_DENOMINATOR as f64).round() as i64, SNAP_DENOMINATOR))
        .collect();
    let total = out.iter().fold(rat(0, 1), |acc, x| acc + x.clone());
    let imax = w
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    out[imax] = out[imax].clone() + (rat(1, 1) - total);
    debug_assert!(out.iter().all(|x| x >= &Rat::zero()));
    out
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
