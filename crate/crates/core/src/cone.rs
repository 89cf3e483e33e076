//! Polyhedral cones in generator (V) and inequality (H) form.
//!
//! Canonical form makes cone descriptions comparable and serializable:
//! exact rays are scaled so the leading nonzero entry has absolute value 1,
//! approx rays to unit Euclidean norm; sign-free rows (lineality, equalities)
//! get a leading +1; rows are deduplicated and sorted lexicographically.

use crate::linalg::{self, Matrix, Vector};
use crate::scalar::Scalar;
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("cone is not pointed; lineality space has dimension {lineality_dim}")]
    NotPointed { lineality_dim: usize },
    #[error("text format: {0}")]
    Parse(String),
}

/// Generator form: cone(rays) + span(lineality).
#[derive(Debug, Clone, PartialEq)]
pub struct ConeV<S> {
    pub dim: usize,
    pub rays: Matrix<S>,
    pub lineality: Matrix<S>,
}

/// Inequality form: { x : ineqs * x >= 0, eqs * x = 0 }.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeH<S> {
    pub dim: usize,
    pub ineqs: Matrix<S>,
    pub eqs: Matrix<S>,
}

// ---------------------------------------------------------------------------
// canonicalization
// ---------------------------------------------------------------------------

/// Scale a ray so direction is preserved and magnitude is canonical.
pub fn canonical_ray<S: Scalar>(v: &[S], tol: &S) -> Option<Vector<S>> {
    if S::EXACT {
        let lead = v.iter().find(|x| !x.is_zero_tol(tol))?;
        let inv = lead.abs().recip();
        Some(linalg::scale(v, &inv))
    } else {
        let norm2 = v.iter().fold(S::zero(), |a, x| a + x.clone() * x.clone());
        if norm2.is_zero_tol(tol) || v.iter().all(|x| x.is_zero_tol(tol)) {
            return None;
        }
        Some(linalg::scale(v, &norm2.sqrt().recip()))
    }
}

/// Scale a sign-free row to a leading +1.
pub fn canonical_row<S: Scalar>(v: &[S], tol: &S) -> Option<Vector<S>> {
    let r = canonical_ray(v, tol)?;
    let lead = r.iter().find(|x| !x.is_zero_tol(tol))?;
    if *lead < S::zero() {
        Some(r.iter().map(|x| -x.clone()).collect())
    } else {
        Some(r)
    }
}

pub fn cmp_vec<S: Scalar>(a: &[S], b: &[S]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

fn vec_close<S: Scalar>(a: &[S], b: &[S], tol: &S) -> bool {
    a.iter().zip(b).all(|(x, y)| (x.clone() - y.clone()).is_zero_tol(tol))
}

/// Canonicalize, deduplicate and sort a list of rays (or rows when
/// `sign_free`), dropping zero vectors.
pub fn canonicalize_rows<S: Scalar>(rows: &Matrix<S>, tol: &S, sign_free: bool) -> Matrix<S> {
    let mut out: Matrix<S> = rows
        .iter()
        .filter_map(|r| {
            if sign_free {
                canonical_row(r, tol)
            } else {
                canonical_ray(r, tol)
            }
        })
        .collect();
    out.sort_by(|a, b| cmp_vec(a, b));
    let mut dedup: Matrix<S> = Vec::with_capacity(out.len());
    for r in out {
        if dedup.last().map_or(true, |p| !vec_close(p, &r, tol)) {
            dedup.push(r);
        }
    }
    dedup
}

impl<S: Scalar> ConeV<S> {
    pub fn new(dim: usize, rays: Matrix<S>, lineality: Matrix<S>) -> Self {
        let tol = S::default_tol();
        for r in rays.iter().chain(lineality.iter()) {
            assert_eq!(r.len(), dim, "generator dimension mismatch");
        }
        let mut lin = lineality;
        let pivots = linalg::rref(&mut lin, &tol);
        // Reduce rays modulo the lineality span so each ray gets a unique
        // representative (zero at every lineality pivot column).
        let reduced: Matrix<S> = rays
            .iter()
            .map(|r| {
                let mut x = r.clone();
                for (l, &p) in lin.iter().zip(&pivots) {
                    let c = x[p].clone();
                    if !c.is_zero_tol(&tol) {
                        x = x.iter().zip(l).map(|(a, b)| a.clone() - c.clone() * b.clone()).collect();
                    }
                }
                x
            })
            .collect();
        ConeV {
            dim,
            rays: canonicalize_rows(&reduced, &tol, false),
            lineality: canonicalize_rows(&lin, &tol, true),
        }
    }

    pub fn from_rays(rays: Matrix<S>) -> Self {
        let dim = rays.first().map_or(0, |r| r.len());
        Self::new(dim, rays, Vec::new())
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }
}

impl<S: Scalar> ConeH<S> {
    pub fn new(dim: usize, ineqs: Matrix<S>, eqs: Matrix<S>) -> Self {
        let tol = S::default_tol();
        for r in ineqs.iter().chain(eqs.iter()) {
            assert_eq!(r.len(), dim, "constraint dimension mismatch");
        }
        let mut e = eqs;
        linalg::rref(&mut e, &tol);
        ConeH {
            dim,
            ineqs: canonicalize_rows(&ineqs, &tol, false),
            eqs: canonicalize_rows(&e, &tol, true),
        }
    }

    pub fn full_space(dim: usize) -> Self {
        ConeH { dim, ineqs: Vec::new(), eqs: Vec::new() }
    }

    /// Membership test with the mode tolerance.
    pub fn contains(&self, x: &[S], tol: &S) -> bool {
        x.len() == self.dim
            && self.ineqs.iter().all(|a| linalg::dot(a, x).sign_tol(tol) >= 0)
            && self.eqs.iter().all(|a| linalg::dot(a, x).is_zero_tol(tol))
    }

    /// Indices of inequalities active (tight) at x, for extremality tests.
    pub fn active_ineqs(&self, x: &[S], tol: &S) -> Vec<usize> {
        self.ineqs
            .iter()
            .enumerate()
            .filter(|(_, a)| linalg::dot(a, x).is_zero_tol(tol))
            .map(|(i, _)| i)
            .collect()
    }
}

/// A member x of an H-cone is an extremal ray when its active constraints fix
/// it up to scale: rank(active ineqs + eqs) = dim - 1.
pub fn is_extremal_in_h<S: Scalar>(cone: &ConeH<S>, x: &[S], tol: &S) -> Result<bool, GeometryError> {
    if x.len() != cone.dim {
        return Err(GeometryError::Dimension { expected: cone.dim, got: x.len() });
    }
    let mut all_rows: Matrix<S> = cone.ineqs.iter().chain(cone.eqs.iter()).cloned().collect();
    let lin_dim = cone.dim - linalg::rref(&mut all_rows, tol).len();
    if lin_dim > 0 {
        return Err(GeometryError::NotPointed { lineality_dim: lin_dim });
    }
    if linalg::is_zero_vec(x, tol) || !cone.contains(x, tol) {
        return Ok(false);
    }
    let mut active: Matrix<S> = cone
        .active_ineqs(x, tol)
        .into_iter()
        .map(|i| cone.ineqs[i].clone())
        .chain(cone.eqs.iter().cloned())
        .collect();
    Ok(linalg::rref(&mut active, tol).len() == cone.dim - 1)
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------
//
//   # comment
//   V 3            (or "H 3")
//   ray 1/1 0/1 -1/2
//   lin 0/1 1/1 0/1    (for H: "ineq" / "eq")

impl<S: Scalar> ConeV<S> {
    pub fn to_text(&self) -> String {
        let mut out = format!("V {}\n", self.dim);
        for r in &self.rays {
            out.push_str("ray");
            for x in r {
                out.push(' ');
                out.push_str(&x.render());
            }
            out.push('\n');
        }
        for l in &self.lineality {
            out.push_str("lin");
            for x in l {
                out.push(' ');
                out.push_str(&x.render());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GeometryError> {
        let (kind, dim, rows) = parse_sections::<S>(text)?;
        if kind != 'V' {
            return Err(GeometryError::Parse("expected a V cone".into()));
        }
        let mut rays = Vec::new();
        let mut lineality = Vec::new();
        for (tag, v) in rows {
            match tag.as_str() {
                "ray" => rays.push(v),
                "lin" => lineality.push(v),
                other => return Err(GeometryError::Parse(format!("unknown row tag {other:?} in V cone"))),
            }
        }
        Ok(ConeV::new(dim, rays, lineality))
    }
}

impl<S: Scalar> ConeH<S> {
    pub fn to_text(&self) -> String {
        let mut out = format!("H {}\n", self.dim);
        for r in &self.ineqs {
            out.push_str("ineq");
            for x in r {
                out.push(' ');
                out.push_str(&x.render());
            }
            out.push('\n');
        }
        for l in &self.eqs {
            out.push_str("eq");
            for x in l {
                out.push(' ');
                out.push_str(&x.render());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GeometryError> {
        let (kind, dim, rows) = parse_sections::<S>(text)?;
        if kind != 'H' {
            return Err(GeometryError::Parse("expected an H cone".into()));
        }
        let mut ineqs = Vec::new();
        let mut eqs = Vec::new();
        for (tag, v) in rows {
            match tag.as_str() {
                "ineq" => ineqs.push(v),
                "eq" => eqs.push(v),
                other => return Err(GeometryError::Parse(format!("unknown row tag {other:?} in H cone"))),
            }
        }
        Ok(ConeH::new(dim, ineqs, eqs))
    }
}

fn parse_sections<S: Scalar>(text: &str) -> Result<(char, usize, Vec<(String, Vector<S>)>), GeometryError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| GeometryError::Parse("empty input".into()))?;
    let mut parts = header.split_whitespace();
    let kind = parts
        .next()
        .filter(|k| *k == "V" || *k == "H")
        .ok_or_else(|| GeometryError::Parse(format!("bad header {header:?}")))?;
    let dim: usize = parts
        .next()
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| GeometryError::Parse(format!("bad dimension in header {header:?}")))?;
    let mut rows = Vec::new();
    for line in lines {
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap().to_string();
        let entries: Option<Vector<S>> = it.map(S::parse_entry).collect();
        let v = entries.ok_or_else(|| GeometryError::Parse(format!("bad entry in line {line:?}")))?;
        if v.len() != dim {
            return Err(GeometryError::Parse(format!(
                "line {line:?} has {} entries, expected {dim}",
                v.len()
            )));
        }
        rows.push((tag, v));
    }
    Ok((kind.chars().next().unwrap(), dim, rows))
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
