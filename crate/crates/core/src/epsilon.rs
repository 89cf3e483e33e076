//! Square-pair composites with a bounded game value.
//!
//! For a window parameter eps in [0, 1/8], consider every theory of two
//! squares whose correlation tables keep all four CHSH-type quantities
//! inside [2 eps, 1 - 2 eps]. The largest state cone compatible with that
//! restriction is cut out by positivity and the translated window rows; the
//! largest effect cone is the dual of the states every such theory is forced
//! to contain, namely the sixteen deterministic products and eight noisy
//! boxes. Sweeping all extremal source pairs and middle effects then bounds
//! the adaptive game exactly, and the extrema admit closed forms in eps.
//!
//! Everything here runs on exact rationals.

use crate::boxes::{self, Orientation};
use crate::composite::{is_separable, kron_rows, pull_back_functional, Separability};
use crate::cone::{self, ConeH, ConeV};
use crate::dd;
use crate::game::conditioned_state;
use crate::gpt::{gbit_square, SystemModel};
use crate::linalg::{self, Matrix, Vector};
use crate::scalar::{rat, Rat, Scalar};
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EpsilonError {
    #[error("window parameter must lie in [0, 1/8], got {0}")]
    OutOfRange(Rat),
}

// ---------------------------------------------------------------------------
// the window model
// ---------------------------------------------------------------------------

/// Outer approximations to the state and effect spaces of any square-pair
/// theory with the CHSH window restriction.
#[derive(Debug, Clone)]
pub struct EpsilonModel {
    pub epsilon: Rat,
    /// the local square, kept for its fiducial measurements and unit
    pub local: SystemModel<Rat>,
    /// facet description of the state cone: 16 positivity rows, 8 window rows
    pub state_h: ConeH<Rat>,
    /// extremal rays of the largest state cone
    pub states: ConeV<Rat>,
    /// extremal rays of the largest effect cone
    pub effects: ConeV<Rat>,
    /// the eight noisy boxes the window forces into every such theory
    pub isotropic_states: Vec<Vector<Rat>>,
}

/// The four correlation expressions as functionals on joint states, pulled
/// back through the fiducial measurements.
fn ch_state_rows(local: &SystemModel<Rat>) -> Vec<Vector<Rat>> {
    let m = [&local.measurements[0], &local.measurements[1]];
    (1..=4).map(|i| pull_back_functional(&boxes::ch_row::<Rat>(i), m, m, 9)).collect()
}

/// Joint state whose fiducial table is the noisy box for the given winning
/// condition: winning entries 1/2 - eps, losing entries eps, uniform
/// marginals.
pub fn isotropic_state(g: &Orientation, eps: &Rat) -> Vector<Rat> {
    let mut z = vec![rat(1, 2); 9];
    z[8] = rat(1, 1);
    for x in 0..2u8 {
        for y in 0..2u8 {
            z[3 * x as usize + y as usize] = if g.eval(x, y) == 0 {
                rat(1, 2) - eps.clone()
            } else {
                eps.clone()
            };
        }
    }
    z
}

impl EpsilonModel {
    /// The interval the four correlation expressions are confined to.
    pub fn window(&self) -> (Rat, Rat) {
        (rat(4, 1) * self.epsilon.clone() - rat(1, 2), rat(3, 2) - rat(4, 1) * self.epsilon.clone())
    }

    /// Extremal states scaled to unit probability.
    pub fn normalized_states(&self) -> Vec<Vector<Rat>> {
        let unit = linalg::kron(&self.local.unit, &self.local.unit);
        self.states
            .rays
            .iter()
            .map(|r| linalg::scale(r, &linalg::dot(&unit, r).recip()))
            .collect()
    }
}

/// Build the model for an exact window parameter in [0, 1/8]. The state cone
/// is enumerated from its facets; the effect cone is the dual of the sixteen
/// deterministic products together with the eight noisy boxes.
pub fn build_epsilon_model(epsilon: Rat) -> Result<EpsilonModel, EpsilonError> {
    if epsilon < rat(0, 1) || epsilon > rat(1, 8) {
        return Err(EpsilonError::OutOfRange(epsilon));
    }
    let local = gbit_square();
    let unit9 = linalg::kron(&local.unit, &local.unit);
    let lo = rat(4, 1) * epsilon.clone() - rat(1, 2);
    let hi = rat(3, 2) - rat(4, 1) * epsilon.clone();
    let mut ineqs = kron_rows(&local.effects.rays, &local.effects.rays);
    for row in ch_state_rows(&local) {
        ineqs.push(linalg::axpy(&row, &(-lo.clone()), &unit9));
        ineqs.push(linalg::axpy(&linalg::scale(&row, &rat(-1, 1)), &hi, &unit9));
    }
    let state_h = ConeH::new(9, ineqs, Vec::new());
    let states = dd::enumerate(&state_h);
    let isotropic_states: Vec<Vector<Rat>> =
        boxes::chsh_orientations().iter().map(|g| isotropic_state(g, &epsilon)).collect();
    let mut forced = kron_rows(&local.states.rays, &local.states.rays);
    forced.extend(isotropic_states.iter().cloned());
    let effects = dd::dualize(&ConeV::from_rays(forced));
    Ok(EpsilonModel { epsilon, local, state_h, states, effects, isotropic_states })
}

// ---------------------------------------------------------------------------
// closed forms
// ---------------------------------------------------------------------------

fn form_denominator(eps: &Rat) -> Rat {
    rat(96, 1) * eps.clone() * eps.clone() - rat(12, 1) * eps.clone() + rat(1, 1)
}

/// Smallest correlation-expression value any conditioned end state reaches:
/// 2 eps (8 eps - 1) / (96 eps^2 - 12 eps + 1).
pub fn ch_floor_form(eps: &Rat) -> Rat {
    rat(2, 1) * eps.clone() * (rat(8, 1) * eps.clone() - rat(1, 1)) / form_denominator(eps)
}

/// Largest such value: (80 eps^2 - 10 eps + 1) / (96 eps^2 - 12 eps + 1).
pub fn ch_ceiling_form(eps: &Rat) -> Rat {
    (rat(80, 1) * eps.clone() * eps.clone() - rat(10, 1) * eps.clone() + rat(1, 1))
        / form_denominator(eps)
}

/// Upper bound on the adaptive-game winning probability of any square-pair
/// theory with the window restriction: 3/4 + eps (1 - 8 eps) / denominator.
pub fn gbit_bound(eps: &Rat) -> Result<Rat, EpsilonError> {
    if eps < &rat(0, 1) || eps > &rat(1, 8) {
        return Err(EpsilonError::OutOfRange(eps.clone()));
    }
    Ok(rat(3, 4) - ch_floor_form(eps) / rat(2, 1))
}

/// The companion lower bound from the same sweep: 3/4 minus half the ceiling.
pub fn gbit_bound_floor(eps: &Rat) -> Result<Rat, EpsilonError> {
    if eps < &rat(0, 1) || eps > &rat(1, 8) {
        return Err(EpsilonError::OutOfRange(eps.clone()));
    }
    Ok(rat(3, 4) - ch_ceiling_form(eps) / rat(2, 1))
}

// ---------------------------------------------------------------------------
// relabelings
// ---------------------------------------------------------------------------

fn mat_mul(a: &Matrix<Rat>, b: &Matrix<Rat>) -> Matrix<Rat> {
    let n = a.len();
    let mut out = vec![vec![rat(0, 1); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] = out[i][j].clone() + a[i][k].clone() * b[k][j].clone();
            }
        }
    }
    out
}

/// The eight question/outcome relabelings of one square in cone coordinates:
/// question swap plus the per-question outcome flips generate the group.
fn local_relabelings() -> Vec<Matrix<Rat>> {
    let m = |rows: [[i64; 3]; 3]| -> Matrix<Rat> {
        rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect()
    };
    let gens = [
        m([[0, 1, 0], [1, 0, 0], [0, 0, 1]]),
        m([[-1, 0, 1], [0, 1, 0], [0, 0, 1]]),
        m([[1, 0, 0], [0, -1, 1], [0, 0, 1]]),
    ];
    let key = |g: &Matrix<Rat>| -> Vec<String> {
        g.iter().flat_map(|r| r.iter().map(Scalar::render)).collect()
    };
    let mut group = vec![m([[1, 0, 0], [0, 1, 0], [0, 0, 1]])];
    let mut seen: BTreeSet<Vec<String>> = group.iter().map(key).collect();
    let mut frontier = group.clone();
    while let Some(g) = frontier.pop() {
        for gen in &gens {
            let h = mat_mul(&g, gen);
            if seen.insert(key(&h)) {
                group.push(h.clone());
                frontier.push(h);
            }
        }
    }
    assert_eq!(group.len(), 8);
    group
}

/// Act with a relabeling pair on a joint state: Z -> ga Z gb^T.
fn apply_pair(ga: &Matrix<Rat>, gb: &Matrix<Rat>, z: &[Rat]) -> Vector<Rat> {
    let mut out = vec![rat(0, 1); 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = rat(0, 1);
            for k in 0..3 {
                if ga[i][k].is_zero() {
                    continue;
                }
                for l in 0..3 {
                    if gb[j][l].is_zero() {
                        continue;
                    }
                    acc = acc + ga[i][k].clone() * z[3 * k + l].clone() * gb[j][l].clone();
                }
            }
            out[3 * i + j] = acc;
        }
    }
    out
}

/// One state per orbit of the simultaneous two-sided relabeling action.
/// The input list must be closed under the action.
fn orbit_representatives(verts: &[Vector<Rat>]) -> Vec<Vector<Rat>> {
    let group = local_relabelings();
    let keys: BTreeSet<Vec<String>> =
        verts.iter().map(|v| v.iter().map(Scalar::render).collect()).collect();
    let mut reps: Vec<Vector<Rat>> = Vec::new();
    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    for v in verts {
        let mut best = v.clone();
        for ga in &group {
            for gb in &group {
                let w = apply_pair(ga, gb, v);
                let wkey: Vec<String> = w.iter().map(Scalar::render).collect();
                assert!(keys.contains(&wkey), "relabeling left the swept family");
                if cone::cmp_vec(&w, &best) == std::cmp::Ordering::Less {
                    best = w;
                }
            }
        }
        if seen.insert(best.iter().map(Scalar::render).collect()) {
            reps.push(best);
        }
    }
    reps
}

/// Flip both outcomes on the Alice side; the four correlation expressions of
/// the flipped state are one minus the originals.
fn flip_alice(z: &[Rat]) -> Vector<Rat> {
    let m = |rows: [[i64; 3]; 3]| -> Matrix<Rat> {
        rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect()
    };
    apply_pair(&m([[-1, 0, 1], [0, -1, 1], [0, 0, 1]]), &m([[1, 0, 0], [0, 1, 0], [0, 0, 1]]), z)
}

// ---------------------------------------------------------------------------
// the post-measurement sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub ch_min: Rat,
    pub ch_max: Rat,
    /// normalized conditioned end states attaining the extrema
    pub min_witness: Vector<Rat>,
    pub max_witness: Vector<Rat>,
    pub p_win_upper: Rat,
    pub p_win_lower: Rat,
    pub matches_closed_form: bool,
    pub pruned: bool,
    pub triples_evaluated: usize,
}

struct Core {
    min: Rat,
    min_witness: Vector<Rat>,
    max: Rat,
    max_witness: Vector<Rat>,
    evaluated: usize,
}

impl Core {
    fn merge(a: Core, b: Core) -> Core {
        let (min, min_witness) =
            if a.min <= b.min { (a.min, a.min_witness) } else { (b.min, b.min_witness) };
        let (max, max_witness) =
            if a.max >= b.max { (a.max, a.max_witness) } else { (b.max, b.max_witness) };
        Core { min, min_witness, max, max_witness, evaluated: a.evaluated + b.evaluated }
    }
}

/// Exact extrema of the four correlation expressions over all normalized end
/// states conditioned from the given sources and middle effects.
fn sweep_extrema(
    sources: &[Vector<Rat>],
    effects: &[Vector<Rat>],
    rows: &[Vector<Rat>],
    unit: &[Rat],
) -> Option<Core> {
    let (ns, ne) = (sources.len(), effects.len());
    (0..ns * ns * ne)
        .into_par_iter()
        .filter_map(|i| {
            let s1 = &sources[i / (ns * ne)];
            let s2 = &sources[(i / ne) % ns];
            let e = &effects[i % ne];
            let (t, w) = conditioned_state(s1, s2, e, &[3; 4], unit, unit);
            if w.is_zero() {
                return None;
            }
            let z = linalg::scale(&t, &w.recip());
            let mut vals = rows.iter().map(|r| linalg::dot(r, &z));
            let first = vals.next().expect("four expression rows");
            let (mut lo, mut hi) = (first.clone(), first);
            for v in vals {
                if v < lo {
                    lo = v;
                } else if v > hi {
                    hi = v;
                }
            }
            Some(Core {
                min: lo,
                min_witness: z.clone(),
                max: hi,
                max_witness: z,
                evaluated: 1,
            })
        })
        .reduce_with(Core::merge)
}

/// The expression range over the sixteen deterministic product states, with
/// attaining states. This is the exact classical range, so any conditioned
/// state that is separable scores inside it.
fn classical_edges(rows: &[Vector<Rat>], local: &SystemModel<Rat>) -> (Core, Rat, Rat) {
    let dets = kron_rows(&local.states.rays, &local.states.rays);
    let mut core: Option<Core> = None;
    for z in dets {
        let vals: Vec<Rat> = rows.iter().map(|r| linalg::dot(r, &z)).collect();
        let lo = vals.iter().min().unwrap().clone();
        let hi = vals.iter().max().unwrap().clone();
        let c = Core {
            min: lo.clone(),
            min_witness: z.clone(),
            max: hi.clone(),
            max_witness: z,
            evaluated: 0,
        };
        core = Some(match core {
            None => c,
            Some(acc) => Core::merge(acc, c),
        });
    }
    let core = core.expect("sixteen product states");
    let (lo, hi) = (core.min.clone(), core.max.clone());
    (core, lo, hi)
}

/// Extrema over every source pair and middle effect from the given families,
/// both closed under local relabelings and containing the deterministic
/// products (as states) and product effects. Separable members only reach
/// the classical range, so they are replaced by its edges; entangled sources
/// are reduced to orbit representatives, which is lossless because the
/// effect family absorbs the middle-side action and an outcome flip turns
/// any expression value v into 1 - v.
fn pruned_extrema(
    local: &SystemModel<Rat>,
    sources: &[Vector<Rat>],
    effects: &[Vector<Rat>],
    rows: &[Vector<Rat>],
) -> Core {
    let tol = Rat::default_tol();
    let entangled_sources: Vec<Vector<Rat>> = sources
        .iter()
        .filter(|z| matches!(is_separable(z, local, local), Separability::Entangled { .. }))
        .cloned()
        .collect();
    let product_effects = ConeV::from_rays(kron_rows(&local.effects.rays, &local.effects.rays));
    let entangled_effects: Vec<Vector<Rat>> =
        effects.iter().filter(|e| !dd::member_v(&product_effects, e, &tol)).cloned().collect();
    let (classical, class_lo, class_hi) = classical_edges(rows, local);
    assert_eq!(class_lo, rat(0, 1));
    assert_eq!(class_hi, rat(1, 1));
    let reps = orbit_representatives(&entangled_sources);
    let swept = sweep_extrema(&reps, &entangled_effects, rows, &local.unit);
    match swept {
        None => classical,
        Some(core) => {
            let flipped = Core {
                min: rat(1, 1) - core.max.clone(),
                min_witness: flip_alice(&core.max_witness),
                max: rat(1, 1) - core.min.clone(),
                max_witness: flip_alice(&core.min_witness),
                evaluated: 0,
            };
            Core::merge(Core::merge(core, flipped), classical)
        }
    }
}

fn outcome_from_core(core: Core, eps: &Rat, rows: &[Vector<Rat>], pruned: bool) -> SweepOutcome {
    let attained = |z: &Vector<Rat>, value: &Rat| {
        rows.iter().any(|r| linalg::dot(r, z) == *value)
    };
    assert!(attained(&core.min_witness, &core.min), "minimum witness must attain the bound");
    assert!(attained(&core.max_witness, &core.max), "maximum witness must attain the bound");
    let matches_closed_form =
        core.min == ch_floor_form(eps) && core.max == ch_ceiling_form(eps);
    SweepOutcome {
        p_win_upper: rat(3, 4) - core.min.clone() / rat(2, 1),
        p_win_lower: rat(3, 4) - core.max.clone() / rat(2, 1),
        ch_min: core.min,
        ch_max: core.max,
        min_witness: core.min_witness,
        max_witness: core.max_witness,
        matches_closed_form,
        pruned,
        triples_evaluated: core.evaluated,
    }
}

/// Exact extrema of the four correlation expressions over every end state
/// conditioned from extremal state pairs and extremal effect rays of the
/// window model, together with the game bounds they imply. With `prune` set,
/// separable states and effects and symmetry-equivalent triples are skipped;
/// the reduction is validated against the full sweep in the tests.
pub fn post_measurement_sweep(model: &EpsilonModel, prune: bool) -> SweepOutcome {
    let rows = ch_state_rows(&model.local);
    let sources = model.normalized_states();
    if prune {
        let core = pruned_extrema(&model.local, &sources, &model.effects.rays, &rows);
        outcome_from_core(core, &model.epsilon, &rows, true)
    } else {
        let core = sweep_extrema(&sources, &model.effects.rays, &rows, &model.local.unit)
            .expect("the window model always has sources and effects");
        outcome_from_core(core, &model.epsilon, &rows, false)
    }
}

/// Expression extrema for the two concrete pairings the window model
/// suggests: the state cone with its own dual as effects, and the dual of
/// the effect cone as states with the effect cone itself.
pub struct PairingOutcome {
    pub label: &'static str,
    pub ch_min: Rat,
    pub ch_max: Rat,
    pub p_win_upper: Rat,
}

pub fn paired_construction_extrema(model: &EpsilonModel) -> [PairingOutcome; 2] {
    let rows = ch_state_rows(&model.local);
    let unit9 = linalg::kron(&model.local.unit, &model.local.unit);
    let normalize = |rays: &[Vector<Rat>]| -> Vec<Vector<Rat>> {
        rays.iter().map(|r| linalg::scale(r, &linalg::dot(&unit9, r).recip())).collect()
    };
    let own_dual = dd::dualize(&model.states);
    let first = pruned_extrema(&model.local, &model.normalized_states(), &own_dual.rays, &rows);
    let forced = dd::dualize(&model.effects);
    let second =
        pruned_extrema(&model.local, &normalize(&forced.rays), &model.effects.rays, &rows);
    [
        PairingOutcome {
            label: "window states with their dual effects",
            p_win_upper: rat(3, 4) - first.min.clone() / rat(2, 1),
            ch_min: first.min,
            ch_max: first.max,
        },
        PairingOutcome {
            label: "forced states with the window effect cone",
            p_win_upper: rat(3, 4) - second.min.clone() / rat(2, 1),
            ch_min: second.min,
            ch_max: second.max,
        },
    ]
}

/// Serializable summary of one window model and its sweep.
pub fn report(model: &EpsilonModel, sweep: &SweepOutcome) -> Value {
    json!({
        "schema": 1,
        "epsilon": model.epsilon.render(),
        "vertex_count": model.states.rays.len(),
        "ray_count": model.effects.rays.len(),
        "ch_min": sweep.ch_min.render(),
        "ch_max": sweep.ch_max.render(),
        "p_win_upper": sweep.p_win_upper.render(),
        "p_win_lower": sweep.p_win_lower.render(),
        "matches_closed_form": sweep.matches_closed_form,
        "pruned": sweep.pruned,
    })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::correlation_vector;
    use crate::sample;
    use rand::Rng;

    #[test]
    fn window_models_have_the_expected_extremal_counts() {
        for (eps, verts, rays) in [
            (rat(1, 16), 80, 80),
            (rat(1, 8), 16, 24),
            (rat(0, 1), 24, 16),
        ] {
            let m = build_epsilon_model(eps.clone()).unwrap();
            assert_eq!(m.states.rays.len(), verts, "states at {}", eps);
            assert_eq!(m.effects.rays.len(), rays, "effects at {}", eps);
        }
    }

    #[test]
    fn parameters_outside_the_window_are_rejected() {
        assert!(matches!(build_epsilon_model(rat(1, 7)), Err(EpsilonError::OutOfRange(_))));
        assert!(matches!(build_epsilon_model(rat(-1, 100)), Err(EpsilonError::OutOfRange(_))));
        assert!(gbit_bound(&rat(1, 7)).is_err());
        assert!(gbit_bound_floor(&rat(-1, 2)).is_err());
    }

    #[test]
    fn noisy_boxes_sit_in_the_state_cone_and_pin_the_window() {
        let m = build_epsilon_model(rat(1, 16)).unwrap();
        let (lo, hi) = m.window();
        let rows = ch_state_rows(&m.local);
        let fid = [&m.local.measurements[0], &m.local.measurements[1]];
        let mut edge_hits = (0, 0);
        for (g, z) in boxes::chsh_orientations().iter().zip(&m.isotropic_states) {
            assert_eq!(
                correlation_vector(z, fid, fid),
                boxes::iso_box::<Rat>(g, &rat(1, 16))
            );
            assert!(m.state_h.contains(z, &Rat::default_tol()));
            let vals: Vec<Rat> = rows.iter().map(|r| linalg::dot(r, z)).collect();
            let at_edge = vals
                .iter()
                .filter(|v| {
                    if **v == lo {
                        edge_hits.0 += 1;
                        true
                    } else if **v == hi {
                        edge_hits.1 += 1;
                        true
                    } else {
                        false
                    }
                })
                .count();
            assert_eq!(at_edge, 1, "one expression per noisy box touches the window");
        }
        assert_eq!(edge_hits, (4, 4));
    }

    #[test]
    fn effect_rays_vanish_on_a_spanning_subset_of_forced_states() {
        let m = build_epsilon_model(rat(1, 16)).unwrap();
        let mut forced = kron_rows(&m.local.states.rays, &m.local.states.rays);
        forced.extend(m.isotropic_states.iter().cloned());
        let tol = Rat::default_tol();
        for ray in &m.effects.rays {
            let active: Vec<Vector<Rat>> = forced
                .iter()
                .filter(|s| linalg::dot(ray, s).is_zero())
                .cloned()
                .collect();
            assert!(forced.iter().all(|s| linalg::dot(ray, s) >= rat(0, 1)));
            assert!(active.len() >= 8, "each extremal ray kills at least eight states");
            assert_eq!(linalg::rank(&active, &tol), 8);
        }
        // the sixteen product effects stay extremal in the dual
        let keys: BTreeSet<Vec<String>> = m
            .effects
            .rays
            .iter()
            .map(|r| r.iter().map(Scalar::render).collect())
            .collect();
        for p in kron_rows(&m.local.effects.rays, &m.local.effects.rays) {
            let canon = cone::canonical_ray(&p, &tol).unwrap();
            assert!(keys.contains(&canon.iter().map(Scalar::render).collect::<Vec<String>>()));
        }
    }

    #[test]
    fn state_vertices_saturate_a_spanning_facet_set() {
        let m = build_epsilon_model(rat(1, 16)).unwrap();
        let (lo, hi) = m.window();
        let rows = ch_state_rows(&m.local);
        let tol = Rat::default_tol();
        for z in m.normalized_states() {
            let active = m.state_h.active_ineqs(&z, &tol);
            assert!(active.len() >= 8);
            let active_rows: Vec<Vector<Rat>> =
                active.iter().map(|&i| m.state_h.ineqs[i].clone()).collect();
            assert_eq!(linalg::rank(&active_rows, &tol), 8);
            for r in &rows {
                let v = linalg::dot(r, &z);
                assert!(v >= lo && v <= hi);
            }
        }
    }

    #[test]
    fn sweep_matches_the_closed_forms_for_every_sampled_window() {
        for (num, den) in [(1i64, 20i64), (1, 16), (1, 12), (1, 10), (3, 32), (1, 8)] {
            let eps = rat(num, den);
            let m = build_epsilon_model(eps.clone()).unwrap();
            let s = post_measurement_sweep(&m, true);
            assert!(s.matches_closed_form, "window {}", eps);
            assert_eq!(s.ch_min, ch_floor_form(&eps));
            assert_eq!(s.ch_max, ch_ceiling_form(&eps));
            assert_eq!(s.p_win_upper, gbit_bound(&eps).unwrap());
            assert_eq!(s.p_win_lower, gbit_bound_floor(&eps).unwrap());
        }
    }

    #[test]
    fn sweep_extremes_at_the_peak_window_are_the_published_ones() {
        let eps = rat(1, 16);
        let m = build_epsilon_model(eps.clone()).unwrap();
        let s = post_measurement_sweep(&m, true);
        assert_eq!(s.ch_min, rat(-1, 10));
        assert_eq!(s.ch_max, rat(11, 10));
        assert_eq!(s.p_win_upper, rat(4, 5));
        assert_eq!(s.p_win_lower, rat(1, 5));
    }

    #[test]
    fn pruning_loses_nothing_against_the_full_sweep() {
        for eps in [rat(1, 8), rat(1, 16)] {
            let m = build_epsilon_model(eps.clone()).unwrap();
            let full = post_measurement_sweep(&m, false);
            let pruned = post_measurement_sweep(&m, true);
            assert_eq!(full.ch_min, pruned.ch_min, "window {}", eps);
            assert_eq!(full.ch_max, pruned.ch_max, "window {}", eps);
            assert!(pruned.triples_evaluated < full.triples_evaluated);
        }
    }

    #[test]
    fn the_window_bound_peaks_at_one_sixteenth() {
        assert_eq!(gbit_bound(&rat(1, 16)).unwrap(), rat(4, 5));
        assert_eq!(gbit_bound(&rat(0, 1)).unwrap(), rat(3, 4));
        assert_eq!(gbit_bound(&rat(1, 8)).unwrap(), rat(3, 4));
        let grid: Vec<Rat> = (0..=20).map(|k| rat(k, 160)).collect();
        let vals: Vec<Rat> = grid.iter().map(|e| gbit_bound(e).unwrap()).collect();
        let best = vals.iter().enumerate().max_by(|a, b| a.1.cmp(b.1)).unwrap();
        assert_eq!(best.0, 10);
        for k in 0..10 {
            assert!(vals[k] < vals[k + 1], "increasing below the peak");
        }
        for k in 10..20 {
            assert!(vals[k] > vals[k + 1], "decreasing above the peak");
        }
    }

    #[test]
    fn conditioned_mixtures_stay_in_the_span_of_extremal_conditioning() {
        // mixing the triple entries commutes with conditioning, so a sampled
        // mixture must land in the cone of the conditioned support triples
        let tol = Rat::default_tol();
        for eps in [rat(1, 8), rat(1, 16)] {
            let m = build_epsilon_model(eps).unwrap();
            let verts = m.normalized_states();
            let rays = &m.effects.rays;
            let mut rng = sample::seeded_rng(2024);
            for _ in 0..100 {
                let pick = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| -> Vec<usize> {
                    let mut idx = BTreeSet::new();
                    while idx.len() < 3 {
                        idx.insert(rng.gen_range(0..n));
                    }
                    idx.into_iter().collect()
                };
                let mix = |items: &[Vector<Rat>],
                           idx: &[usize],
                           rng: &mut rand_chacha::ChaCha8Rng|
                 -> Vector<Rat> {
                    let w = sample::snap_weights(&sample::dirichlet_f64(rng, idx.len()));
                    let mut out = vec![rat(0, 1); 9];
                    for (i, wi) in idx.iter().zip(&w) {
                        out = linalg::axpy(&out, wi, &items[*i]);
                    }
                    out
                };
                let (i1, i2, i3) =
                    (pick(&mut rng, verts.len()), pick(&mut rng, verts.len()), pick(&mut rng, rays.len()));
                let s1 = mix(&verts, &i1, &mut rng);
                let s2 = mix(&verts, &i2, &mut rng);
                let e = mix(rays, &i3, &mut rng);
                let (t, w) = conditioned_state(&s1, &s2, &e, &[3; 4], &m.local.unit, &m.local.unit);
                assert!(!w.is_zero());
                let z = linalg::scale(&t, &w.recip());
                let mut support = Vec::new();
                for a in &i1 {
                    for b in &i2 {
                        for c in &i3 {
                            let (tt, ww) = conditioned_state(
                                &verts[*a],
                                &verts[*b],
                                &rays[*c],
                                &[3; 4],
                                &m.local.unit,
                                &m.local.unit,
                            );
                            if !ww.is_zero() {
                                support.push(linalg::scale(&tt, &ww.recip()));
                            }
                        }
                    }
                }
                assert!(dd::member_v(&ConeV::from_rays(support), &z, &tol));
            }
        }
    }

    #[test]
    fn separable_middle_effects_leave_separable_end_states() {
        let m = build_epsilon_model(rat(1, 16)).unwrap();
        let verts = m.normalized_states();
        let entangled: Vec<Vector<Rat>> = verts
            .iter()
            .filter(|z| matches!(is_separable(z, &m.local, &m.local), Separability::Entangled { .. }))
            .cloned()
            .collect();
        assert_eq!(entangled.len(), 64);
        let products = kron_rows(&m.local.effects.rays, &m.local.effects.rays);
        let mut rng = sample::seeded_rng(77);
        for _ in 0..30 {
            let s1 = &entangled[rng.gen_range(0..entangled.len())];
            let s2 = &entangled[rng.gen_range(0..entangled.len())];
            let w = sample::snap_weights(&sample::dirichlet_f64(&mut rng, 4));
            let mut e = vec![rat(0, 1); 9];
            for (wi, _) in w.iter().zip(0..4) {
                let p = &products[rng.gen_range(0..products.len())];
                e = linalg::axpy(&e, wi, p);
            }
            let (t, wt) = conditioned_state(s1, s2, &e, &[3; 4], &m.local.unit, &m.local.unit);
            if wt.is_zero() {
                continue;
            }
            let z = linalg::scale(&t, &wt.recip());
            assert!(matches!(
                is_separable(&z, &m.local, &m.local),
                Separability::Separable { .. }
            ));
        }
    }

    #[test]
    fn explicit_pairings_only_reach_the_classical_range() {
        let m = build_epsilon_model(rat(1, 16)).unwrap();
        for pairing in paired_construction_extrema(&m) {
            assert_eq!(pairing.ch_min, rat(0, 1), "{}", pairing.label);
            assert_eq!(pairing.ch_max, rat(1, 1), "{}", pairing.label);
            assert_eq!(pairing.p_win_upper, rat(3, 4), "{}", pairing.label);
        }
    }

    #[test]
    fn report_serializes_rationals_as_fractions() {
        let m = build_epsilon_model(rat(1, 16)).unwrap();
        let s = post_measurement_sweep(&m, true);
        let r = report(&m, &s);
        assert_eq!(r["schema"], 1);
        assert_eq!(r["epsilon"], "1/16");
        assert_eq!(r["vertex_count"], 80);
        assert_eq!(r["ray_count"], 80);
        assert_eq!(r["ch_min"], "-1/10");
        assert_eq!(r["p_win_upper"], "4/5");
        assert_eq!(r["matches_closed_form"], true);
        assert_eq!(r["pruned"], true);
    }
}
