//! Bipartite binary-input binary-output boxes as vectors in R^16.
//!
//! Entry layout: P(ab|xy) sits at (2x+a)*4 + (2y+b), which is the row-major
//! 4x4 display with rows indexed by (x,a) and columns by (y,b), and at the
//! same time the Kronecker product of two 4-dimensional one-party layouts
//! indexed by 2x+a and 2y+b.

use crate::cone::ConeH;
use crate::linalg::Vector;
use crate::scalar::Scalar;

pub const TABLE_DIM: usize = 16;
pub const PARTY_DIM: usize = 4;

pub fn idx(a: u8, b: u8, x: u8, y: u8) -> usize {
    (2 * x as usize + a as usize) * 4 + (2 * y as usize + b as usize)
}

// ---------------------------------------------------------------------------
// orientations
// ---------------------------------------------------------------------------

/// A CHSH winning condition a xor b = g(x,y), stored as the truth table
/// (g(0,0), g(0,1), g(1,0), g(1,1)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Orientation(pub [u8; 4]);

impl Orientation {
    pub fn eval(&self, x: u8, y: u8) -> u8 {
        self.0[2 * x as usize + y as usize]
    }

    pub fn mask(&self) -> u8 {
        self.0.iter().fold(0, |m, &b| (m << 1) | b)
    }

    pub fn complement(&self) -> Orientation {
        Orientation([1 - self.0[0], 1 - self.0[1], 1 - self.0[2], 1 - self.0[3]])
    }
}

/// The eight facet-defining winning conditions: truth tables with an odd
/// number of ones, ordered by truth-table mask.
pub fn chsh_orientations() -> Vec<Orientation> {
    let mut out = Vec::with_capacity(8);
    for m in 0..16u8 {
        if (m.count_ones() % 2) == 1 {
            out.push(Orientation([(m >> 3) & 1, (m >> 2) & 1, (m >> 1) & 1, m & 1]));
        }
    }
    out
}

pub fn and_orientation() -> Orientation {
    Orientation([0, 0, 0, 1])
}

pub fn nand_orientation() -> Orientation {
    Orientation([1, 1, 1, 0])
}

// ---------------------------------------------------------------------------
// boxes
// ---------------------------------------------------------------------------

/// One party's deterministic assignment table: entry 1 at (2x+a) iff a = f(x).
pub fn party_det<S: Scalar>(f: [u8; 2]) -> Vector<S> {
    let mut v = vec![S::zero(); PARTY_DIM];
    for (x, &fx) in f.iter().enumerate() {
        v[2 * x + fx as usize] = S::one();
    }
    v
}

pub fn det_box<S: Scalar>(alpha: [u8; 2], beta: [u8; 2]) -> Vector<S> {
    crate::linalg::kron(&party_det::<S>(alpha), &party_det::<S>(beta))
}

/// The 16 local deterministic boxes, ordered by (alpha, beta) bit patterns.
pub fn all_det_boxes<S: Scalar>() -> Vec<Vector<S>> {
    let mut out = Vec::with_capacity(16);
    for a0 in 0..2u8 {
        for a1 in 0..2u8 {
            for b0 in 0..2u8 {
                for b1 in 0..2u8 {
                    out.push(det_box([a0, a1], [b0, b1]));
                }
            }
        }
    }
    out
}

pub fn pr_box<S: Scalar>(g: &Orientation) -> Vector<S> {
    let mut v = vec![S::zero(); TABLE_DIM];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a in 0..2u8 {
                let b = a ^ g.eval(x, y);
                v[idx(a, b, x, y)] = S::from_ratio(1, 2);
            }
        }
    }
    v
}

/// Noisy box: winning entries 1/2 - eps, losing entries eps. This is the
/// mixture (1 - 4 eps) PR + 4 eps uniform.
pub fn iso_box<S: Scalar>(g: &Orientation, eps: &S) -> Vector<S> {
    let mut v = vec![S::zero(); TABLE_DIM];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    v[idx(a, b, x, y)] = if a ^ b == g.eval(x, y) {
                        S::from_ratio(1, 2) - eps.clone()
                    } else {
                        eps.clone()
                    };
                }
            }
        }
    }
    v
}

pub fn uniform_box<S: Scalar>() -> Vector<S> {
    vec![S::from_ratio(1, 4); TABLE_DIM]
}

// ---------------------------------------------------------------------------
// the no-signalling cone
// ---------------------------------------------------------------------------

/// Sum of the (x,y) = (0,0) block; equals 1 on normalized tables.
pub fn normalization_row<S: Scalar>() -> Vector<S> {
    let mut v = vec![S::zero(); TABLE_DIM];
    for a in 0..2u8 {
        for b in 0..2u8 {
            v[idx(a, b, 0, 0)] = S::one();
        }
    }
    v
}

/// Entrywise positivity plus seven independent equalities: equal block sums
/// across the four input pairs and input-independent marginals per party.
pub fn ns_cone_h<S: Scalar>() -> ConeH<S> {
    let mut ineqs = Vec::with_capacity(TABLE_DIM);
    for i in 0..TABLE_DIM {
        let mut row = vec![S::zero(); TABLE_DIM];
        row[i] = S::one();
        ineqs.push(row);
    }
    let mut eqs = Vec::new();
    let base = normalization_row::<S>();
    for (x, y) in [(0u8, 1u8), (1, 0), (1, 1)] {
        let mut row = base.clone();
        for a in 0..2u8 {
            for b in 0..2u8 {
                row[idx(a, b, x, y)] = row[idx(a, b, x, y)].clone() - S::one();
            }
        }
        eqs.push(row);
    }
    for x in 0..2u8 {
        let mut row = vec![S::zero(); TABLE_DIM];
        for b in 0..2u8 {
            row[idx(0, b, x, 0)] = row[idx(0, b, x, 0)].clone() + S::one();
            row[idx(0, b, x, 1)] = row[idx(0, b, x, 1)].clone() - S::one();
        }
        eqs.push(row);
    }
    for y in 0..2u8 {
        let mut row = vec![S::zero(); TABLE_DIM];
        for a in 0..2u8 {
            row[idx(a, 0, 0, y)] = row[idx(a, 0, 0, y)].clone() + S::one();
            row[idx(a, 0, 1, y)] = row[idx(a, 0, 1, y)].clone() - S::one();
        }
        eqs.push(row);
    }
    ConeH::new(TABLE_DIM, ineqs, eqs)
}

// ---------------------------------------------------------------------------
// functionals
// ---------------------------------------------------------------------------

/// The four correlation expressions, 1-indexed. Each is three positive joint
/// probabilities minus P(11|00) and ranges over [-1/2, 3/2] on no-signalling
/// boxes and over [0, 1] on local ones.
pub fn ch_row<S: Scalar>(i: usize) -> Vector<S> {
    let terms: [[(u8, u8, u8, u8); 3]; 4] = [
        [(1, 0, 0, 1), (1, 1, 1, 0), (0, 1, 1, 1)],
        [(1, 1, 0, 1), (0, 1, 1, 0), (1, 0, 1, 1)],
        [(1, 0, 0, 1), (0, 1, 1, 0), (1, 1, 1, 1)],
        [(1, 1, 0, 1), (1, 1, 1, 0), (0, 0, 1, 1)],
    ];
    assert!((1..=4).contains(&i), "expression index must be 1..=4");
    let mut v = vec![S::zero(); TABLE_DIM];
    for &(a, b, x, y) in &terms[i - 1] {
        v[idx(a, b, x, y)] = S::one();
    }
    v[idx(1, 1, 0, 0)] = -S::one();
    v
}

/// Winning probability functional for uniformly random inputs:
/// (1/4) sum of P(ab|xy) over a xor b = g(x,y).
pub fn chsh_row<S: Scalar>(g: &Orientation) -> Vector<S> {
    let mut v = vec![S::zero(); TABLE_DIM];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a in 0..2u8 {
                let b = a ^ g.eval(x, y);
                v[idx(a, b, x, y)] = S::from_ratio(1, 4);
            }
        }
    }
    v
}

/// Orientation whose winning probability is 3/4 - expr_i/2 on normalized
/// no-signalling boxes.
pub fn ch_orientation(i: usize) -> Orientation {
    match i {
        1 => Orientation([0, 0, 1, 0]),
        2 => Orientation([0, 1, 0, 0]),
        3 => and_orientation(),
        4 => Orientation([0, 1, 1, 1]),
        _ => panic!("expression index must be 1..=4"),
    }
}

// ---------------------------------------------------------------------------
// local relabelings
// ---------------------------------------------------------------------------

/// The eight one-party relabelings as permutations of the one-party index
/// 2x+a: optional input swap composed with an input-conditioned outcome flip.
pub fn party_relabelings() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(8);
    for swap in 0..2usize {
        for h in 0..4usize {
            let mut p = [0usize; 4];
            for x in 0..2usize {
                for a in 0..2usize {
                    let nx = x ^ swap;
                    let na = a ^ ((h >> x) & 1);
                    p[2 * x + a] = 2 * nx + na;
                }
            }
            out.push(p);
        }
    }
    out
}

/// Push a table through one-party relabelings on each side.
pub fn apply_relabeling<S: Scalar>(t: &[S], pa: &[usize; 4], pb: &[usize; 4]) -> Vector<S> {
    let mut out = vec![S::zero(); TABLE_DIM];
    for ra in 0..4 {
        for cb in 0..4 {
            out[pa[ra] * 4 + pb[cb]] = t[ra * 4 + cb].clone();
        }
    }
    out
}

/// Render the 4x4 display, rows (x,a), columns (y,b).
pub fn format_table<S: Scalar>(t: &[S]) -> String {
    let mut s = String::new();
    for row in 0..4 {
        let cells: Vec<String> = (0..4)
            .map(|col| {
                if S::EXACT {
                    t[row * 4 + col].render()
                } else {
                    format!("{:.10}", t[row * 4 + col].to_f64())
                }
            })
            .collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::is_extremal_in_h;
    use crate::dd;
    use crate::linalg::dot;
    use crate::scalar::{rat, Rat};
    use std::collections::BTreeSet;

    #[test]
    fn deterministic_boxes_are_distinct_extremal_and_normalized() {
        let ns = ns_cone_h::<Rat>();
        let tol = Rat::default_tol();
        let boxes = all_det_boxes::<Rat>();
        assert_eq!(boxes.len(), 16);
        let distinct: BTreeSet<Vec<String>> =
            boxes.iter().map(|b| b.iter().map(|x| x.render()).collect()).collect();
        assert_eq!(distinct.len(), 16);
        for b in &boxes {
            assert!(ns.contains(b, &tol));
            assert_eq!(dot(&normalization_row::<Rat>(), b), rat(1, 1));
            assert!(is_extremal_in_h(&ns, b, &tol).unwrap());
        }
    }

    #[test]
    fn no_signalling_cone_has_24_extremal_rays() {
        let v = dd::enumerate(&ns_cone_h::<Rat>());
        assert!(v.is_pointed());
        assert_eq!(v.rays.len(), 24);
        let tol = Rat::default_tol();
        let known: Vec<Vec<Rat>> = all_det_boxes::<Rat>()
            .into_iter()
            .chain(chsh_orientations().iter().map(|g| pr_box::<Rat>(g)))
            .collect();
        assert_eq!(known.len(), 24);
        let h = dd::v_to_h(&v);
        for k in &known {
            assert!(h.contains(k, &tol));
            assert!(is_extremal_in_h(&ns_cone_h::<Rat>(), k, &tol).unwrap());
        }
    }

    #[test]
    fn local_cone_has_24_facets() {
        let local = crate::cone::ConeV::from_rays(all_det_boxes::<Rat>());
        let h = dd::v_to_h(&local);
        assert_eq!(h.ineqs.len(), 24);
        assert_eq!(h.eqs.len(), 7);
        // every noiseless nonlocal box violates some facet
        let tol = Rat::default_tol();
        for g in chsh_orientations() {
            assert!(!h.contains(&pr_box::<Rat>(&g), &tol));
        }
    }

    #[test]
    fn winning_probability_matches_expression_on_all_vertices() {
        let vertices: Vec<Vec<Rat>> = all_det_boxes::<Rat>()
            .into_iter()
            .chain(chsh_orientations().iter().map(|g| pr_box::<Rat>(g)))
            .collect();
        for i in 1..=4 {
            let ch = ch_row::<Rat>(i);
            let win = chsh_row::<Rat>(&ch_orientation(i));
            for v in &vertices {
                let lhs = dot(&win, v);
                let rhs = rat(3, 4) - rat(1, 2) * dot(&ch, v);
                assert_eq!(lhs, rhs, "expression {i}");
            }
        }
    }

    #[test]
    fn complement_orientation_flips_the_winning_probability() {
        let vertices: Vec<Vec<Rat>> = all_det_boxes::<Rat>()
            .into_iter()
            .chain(chsh_orientations().iter().map(|g| pr_box::<Rat>(g)))
            .collect();
        for g in chsh_orientations() {
            let w = chsh_row::<Rat>(&g);
            let wc = chsh_row::<Rat>(&g.complement());
            for v in &vertices {
                assert_eq!(dot(&w, v) + dot(&wc, v), rat(1, 1));
            }
        }
    }

    #[test]
    fn expression_range_on_vertices() {
        let det = all_det_boxes::<Rat>();
        let pr: Vec<Vec<Rat>> = chsh_orientations().iter().map(|g| pr_box::<Rat>(g)).collect();
        for i in 1..=4 {
            let ch = ch_row::<Rat>(i);
            let det_vals: BTreeSet<Rat> = det.iter().map(|v| dot(&ch, v)).collect();
            assert!(det_vals.iter().all(|v| *v == rat(0, 1) || *v == rat(1, 1)));
            assert!(det_vals.contains(&rat(0, 1)) && det_vals.contains(&rat(1, 1)));
            let pr_vals: BTreeSet<Rat> = pr.iter().map(|v| dot(&ch, v)).collect();
            assert_eq!(*pr_vals.iter().min().unwrap(), rat(-1, 2));
            assert_eq!(*pr_vals.iter().max().unwrap(), rat(3, 2));
        }
    }

    #[test]
    fn iso_box_interpolates_pr_and_uniform() {
        let g = nand_orientation();
        let eps = rat(1, 16);
        let iso = iso_box::<Rat>(&g, &eps);
        let pr = pr_box::<Rat>(&g);
        let uni = uniform_box::<Rat>();
        for i in 0..TABLE_DIM {
            let mix = (rat(1, 1) - rat(4, 1) * eps.clone()) * pr[i].clone()
                + rat(4, 1) * eps.clone() * uni[i].clone();
            assert_eq!(iso[i], mix);
        }
        assert_eq!(iso_box::<Rat>(&g, &rat(0, 1)), pr_box::<Rat>(&g));
        assert_eq!(iso_box::<Rat>(&g, &rat(1, 4)), uniform_box::<Rat>());
    }

    #[test]
    fn relabelings_permute_the_vertex_set_and_act_transitively() {
        let perms = party_relabelings();
        assert_eq!(perms.len(), 8);
        let ns = ns_cone_h::<Rat>();
        let tol = Rat::default_tol();
        let orientations = chsh_orientations();
        let pr_set: BTreeSet<Vec<String>> = orientations
            .iter()
            .map(|g| pr_box::<Rat>(g).iter().map(|x| x.render()).collect())
            .collect();

        let id = [0usize, 1, 2, 3];
        let mut orbit: BTreeSet<Vec<String>> = BTreeSet::new();
        let mut frontier = vec![pr_box::<Rat>(&and_orientation())];
        while let Some(t) = frontier.pop() {
            let key: Vec<String> = t.iter().map(|x| x.render()).collect();
            if !orbit.insert(key) {
                continue;
            }
            for p in &perms {
                frontier.push(apply_relabeling(&t, p, &id));
            }
        }
        // one-sided relabelings reach every orientation from any single one
        assert_eq!(orbit, pr_set);

        // and two-sided relabelings keep deterministic boxes deterministic
        let det_set: BTreeSet<Vec<String>> = all_det_boxes::<Rat>()
            .iter()
            .map(|b| b.iter().map(|x| x.render()).collect())
            .collect();
        for pa in &perms {
            for pb in &perms {
                for d in all_det_boxes::<Rat>() {
                    let moved = apply_relabeling(&d, pa, pb);
                    assert!(det_set.contains(
                        &moved.iter().map(|x| x.render()).collect::<Vec<String>>()
                    ));
                    assert!(ns.contains(&moved, &tol));
                }
            }
        }
    }

    #[test]
    fn table_layout_is_row_major_in_x_a() {
        // P(ab|xy) at row 2x+a, column 2y+b
        assert_eq!(idx(0, 0, 0, 0), 0);
        assert_eq!(idx(1, 1, 0, 0), 5);
        assert_eq!(idx(1, 0, 0, 1), 6);
        assert_eq!(idx(0, 1, 1, 1), 11);
        assert_eq!(idx(1, 1, 1, 1), 15);
        let g = nand_orientation();
        let iso = iso_box::<Rat>(&g, &rat(1, 16));
        let shown = format_table(&iso);
        let first_line = shown.lines().next().unwrap();
        // x=0, a=0 row: (y,b) columns 00 01 10 11 against g(0,.) = 1
        assert_eq!(first_line, "1/16 7/16 1/16 7/16");
    }
}
