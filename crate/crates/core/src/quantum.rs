//! The optimal quantum strategy: a maximally correlated qubit pair from each
//! source, a Bell-basis announcement in the middle, rotated binary
//! measurements at the ends.
//!
//! Every amplitude involved is real, so the whole computation runs on real
//! vectors: outcome probabilities are squared contractions of the product of
//! the two source states against the measured basis vectors.

use crate::game::{GameOutcomeTable, ANNOUNCEMENTS};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Full behaviour of the strategy: P(a, b, c | r_A, r_C), indexed
/// [r_A][r_C][2 b0 + b1][a][c].
#[derive(Debug, Clone)]
pub struct QuantumReference {
    pub p: [[[[[f64; 2]; 2]; 4]; 2]; 2],
}

fn ket(theta: f64) -> [f64; 2] {
    [(theta / 2.0).cos(), (theta / 2.0).sin()]
}

/// The four maximally entangled two-qubit states, indexed by announcement.
fn bell(b: (u8, u8)) -> [f64; 4] {
    let r = FRAC_1_SQRT_2;
    match b {
        (0, 0) => [r, 0.0, 0.0, r],
        (0, 1) => [r, 0.0, 0.0, -r],
        (1, 0) => [0.0, r, r, 0.0],
        _ => [0.0, r, -r, 0.0],
    }
}

/// Angle measured by an outer player: Alice uses bases at 0 and pi/2,
/// Charlie the ones rotated by pi/4; outcome 1 is the antipodal vector.
fn outer_angle(charlie: bool, question: u8, outcome: u8) -> f64 {
    let base = if charlie { PI / 4.0 } else { 0.0 };
    base + question as f64 * PI / 2.0 + outcome as f64 * PI
}

/// Both sources emit the (0,0) Bell state, Bob measures his pair in the Bell
/// basis and announces the indices of the outcome, the outer players measure
/// in the rotated bases above.
pub fn quantum_reference() -> QuantumReference {
    let src = bell((0, 0));
    let mut p = [[[[[0.0; 2]; 2]; 4]; 2]; 2];
    for ra in 0..2usize {
        for rc in 0..2usize {
            for (bi, &b) in ANNOUNCEMENTS.iter().enumerate() {
                let mid = bell(b);
                for a in 0..2usize {
                    let ka = ket(outer_angle(false, ra as u8, a as u8));
                    for c in 0..2usize {
                        let kc = ket(outer_angle(true, rc as u8, c as u8));
                        let mut amp = 0.0;
                        for i in 0..2 {
                            for j in 0..2 {
                                for k in 0..2 {
                                    for l in 0..2 {
                                        amp += ka[i]
                                            * mid[2 * j + k]
                                            * kc[l]
                                            * src[2 * i + j]
                                            * src[2 * k + l];
                                    }
                                }
                            }
                        }
                        p[ra][rc][bi][a][c] = amp * amp;
                    }
                }
            }
        }
    }
    QuantumReference { p }
}

impl QuantumReference {
    /// Probability of an announcement; independent of the questions.
    pub fn announcement_probability(&self, b: (u8, u8)) -> f64 {
        let bi = 2 * b.0 as usize + b.1 as usize;
        let block = &self.p[0][0][bi];
        block.iter().flatten().sum()
    }

    /// P(a, c | r_A, r_C, b) as a 16-entry correlation table.
    pub fn conditional_table(&self, b: (u8, u8)) -> Vec<f64> {
        let bi = 2 * b.0 as usize + b.1 as usize;
        let norm = self.announcement_probability(b);
        let mut out = vec![0.0; 16];
        for ra in 0..2usize {
            for rc in 0..2usize {
                for a in 0..2usize {
                    for c in 0..2usize {
                        out[crate::boxes::idx(a as u8, c as u8, ra as u8, rc as u8)] =
                            self.p[ra][rc][bi][a][c] / norm;
                    }
                }
            }
        }
        out
    }

    /// Overall winning probability with uniform questions.
    pub fn p_win(&self, table: &GameOutcomeTable) -> f64 {
        let mut total = 0.0;
        for ra in 0..2u8 {
            for rc in 0..2u8 {
                for (bi, &b) in ANNOUNCEMENTS.iter().enumerate() {
                    for a in 0..2u8 {
                        for c in 0..2u8 {
                            if table.wins(a, b, c, ra, rc) {
                                total += self.p[ra as usize][rc as usize][bi][a as usize]
                                    [c as usize];
                            }
                        }
                    }
                }
            }
        }
        total / 4.0
    }

    /// Winning probability conditional on one announcement.
    pub fn p_win_given(&self, table: &GameOutcomeTable, b: (u8, u8)) -> f64 {
        let cond = self.conditional_table(b);
        let mut total = 0.0;
        for ra in 0..2u8 {
            for rc in 0..2u8 {
                for a in 0..2u8 {
                    for c in 0..2u8 {
                        if table.wins(a, b, c, ra, rc) {
                            total += cond[crate::boxes::idx(a, c, ra, rc)];
                        }
                    }
                }
            }
        }
        total / 4.0
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
