//! Weak, strong and star Ewald conditions for smooth Fano polytopes.
//!
//! For a reflexive `P` with dual `P*`, the symmetric set is
//! `E = P* ∩ (-P*) ∩ Z^n = { x : |<x, v>| <= 1 for every vertex v of P }`.
//! Facet `j` of `P*` is `{ x in P* : <x, v_j> = -1 }`, so a face of `P*` is
//! addressed by the set `S` of vertices of `P` whose facets contain it.

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{det_rows, dot, rank_rows, IntMatrix, IntVector};
use crate::polytope::{FaceRef, LatticePolytope};
use crate::tumatrix::{row_split, standard_form_for_basis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EwaldKind {
    Weak,
    Strong,
    Star,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EwaldWitness {
    pub kind: EwaldKind,
    /// Lattice basis inside `E` (weak) or inside `E ∩ F` (strong).
    pub basis: Vec<IntVector>,
    /// Star point (star condition only).
    pub lambda: Option<IntVector>,
    /// Vertices of `P` whose dual facets cut out the face (empty for weak).
    pub facet_set: Vec<usize>,
    /// Unimodular map produced by a constructive algorithm.
    pub transform: Option<IntMatrix>,
}

/// Result of a per-face condition: all witnesses, or the first face
/// (by facet set) where none exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EwaldOutcome {
    Holds(Vec<EwaldWitness>),
    Fails { facet_set: Vec<usize> },
}

impl EwaldOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, EwaldOutcome::Holds(_))
    }
}

fn require_reflexive_smooth(p: &LatticePolytope) -> Result<LatticePolytope> {
    if !p.is_smooth_fano() {
        return Err(Error::Precondition("polytope is not smooth Fano".into()));
    }
    p.dual()
}

/// `E(P*)` computed from the vertex side: `|<x, v>| <= 1` for all vertices.
pub fn symmetric_dual_points(p: &LatticePolytope) -> Result<Vec<IntVector>> {
    Ok(p.dual()?.symmetric_points())
}

/// Searches `candidates` for `n` vectors with determinant `±1`.
///
/// Partial selections are kept saturated (their maximal minors have gcd 1),
/// which every subset of a lattice basis satisfies.
fn find_unimodular_basis(candidates: &[IntVector], n: usize) -> Option<Vec<IntVector>> {
    fn saturated(rows: &[IntVector], n: usize) -> bool {
        let k = rows.len();
        if rank_rows(rows.to_vec()) < k {
            return false;
        }
        let mut g = BigInt::zero();
        for cols in (0..n).combinations(k) {
            let minor: Vec<IntVector> = rows
                .iter()
                .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
                .collect();
            g = num_integer::Integer::gcd(&g, &det_rows(minor));
            if g.is_one() {
                return true;
            }
        }
        false
    }
    fn go(c: &[IntVector], start: usize, n: usize, acc: &mut Vec<IntVector>) -> bool {
        if acc.len() == n {
            return true;
        }
        for i in start..c.len() {
            acc.push(c[i].clone());
            if saturated(acc, n) && go(c, i + 1, n, acc) {
                return true;
            }
            acc.pop();
        }
        false
    }
    let mut acc = Vec::new();
    go(candidates, 0, n, &mut acc).then_some(acc)
}

/// A lattice basis inside `E(P*)`, if one exists.
pub fn weak_ewald(p: &LatticePolytope) -> Result<Option<EwaldWitness>> {
    let q = require_reflexive_smooth(p)?;
    // E is symmetric; one representative of each ± pair suffices. Short
    // vectors first.
    let mut half: Vec<IntVector> = q
        .symmetric_points()
        .into_iter()
        .filter(|x| {
            x.iter()
                .find(|c| !c.is_zero())
                .is_some_and(|c| c.is_positive())
        })
        .collect();
    half.sort_by_key(|x| x.iter().map(|c| c.abs()).sum::<BigInt>());
    Ok(
        find_unimodular_basis(&half, p.dim()).map(|basis| EwaldWitness {
            kind: EwaldKind::Weak,
            basis,
            lambda: None,
            facet_set: vec![],
            transform: None,
        }),
    )
}

/// A lattice basis inside `E(P*) ∩ F` for every facet `F` of `P*`.
pub fn strong_ewald(p: &LatticePolytope) -> Result<EwaldOutcome> {
    let q = require_reflexive_smooth(p)?;
    let e = q.symmetric_points();
    let minus_one = -BigInt::one();
    let mut out = Vec::with_capacity(p.num_vertices());
    for j in 0..p.num_vertices() {
        let v = p.vertex(j);
        let on_facet: Vec<IntVector> = e
            .iter()
            .filter(|x| dot(x, v) == minus_one)
            .cloned()
            .collect();
        match find_unimodular_basis(&on_facet, p.dim()) {
            Some(basis) => out.push(EwaldWitness {
                kind: EwaldKind::Strong,
                basis,
                lambda: None,
                facet_set: vec![j],
                transform: None,
            }),
            None => return Ok(EwaldOutcome::Fails { facet_set: vec![j] }),
        }
    }
    Ok(EwaldOutcome::Holds(out))
}

/// A unimodular `T` with every entry of `M·T` in `{-1, 0, 1}` and vertex
/// `v` mapped to `(1, ..., 1)`.
///
/// Starts from the standard form for a facet containing `v` (with `v`
/// first, so `v` maps to `e_1`); each other column `c_j` is replaced by
/// `c_j - c_1` when that stays in `{-1, 0, 1}`, otherwise by `c_j + c_1`;
/// finally columns whose entry at `v` is `-1` are negated.
pub fn strong_ewald_transform(p: &LatticePolytope, v: usize) -> Result<IntMatrix> {
    if v >= p.num_vertices() {
        return Err(Error::IndexOutOfRange {
            index: v,
            len: p.num_vertices(),
        });
    }
    let facet = p
        .facets()?
        .iter()
        .find(|f| f.vertex_indices.contains(&v))
        .ok_or_else(|| Error::Precondition("vertex lies on no facet".into()))?;
    let mut basis = vec![v];
    basis.extend(facet.vertex_indices.iter().copied().filter(|&i| i != v));
    let (sf, n_inv) = standard_form_for_basis(p.vertices(), &basis)?;
    let n = p.dim();
    let mut a = sf.to_rows();
    let mut t = n_inv.to_rows();
    let in_range = |x: &BigInt| x.abs() <= BigInt::one();
    let col_op = |rows: &mut Vec<IntVector>, j: usize, s: i64| {
        for r in rows.iter_mut() {
            let add = &r[0] * s;
            r[j] += add;
        }
    };
    for j in 1..n {
        if !a[v][j].is_zero() {
            continue;
        }
        let minus_ok = a.iter().all(|r| in_range(&(&r[j] - &r[0])));
        let plus_ok = a.iter().all(|r| in_range(&(&r[j] + &r[0])));
        let s = if minus_ok {
            -1
        } else if plus_ok {
            1
        } else {
            return Err(Error::NotTotallyUnimodular(format!(
                "column {j} leaves {{-1, 0, 1}} under both c_j - c_1 and c_j + c_1"
            )));
        };
        col_op(&mut a, j, s);
        col_op(&mut t, j, s);
    }
    for j in 0..n {
        if a[v][j] == -BigInt::one() {
            for r in a.iter_mut().chain(t.iter_mut()) {
                r[j] = -&r[j];
            }
        }
    }
    IntMatrix::from_rows(t)
}

/// Star condition predicate: `λ ∈ E`, exactly one `i ∈ S` has
/// `<λ, v_i> = -1`, and no `i ∈ S` has `<λ, v_i> = 1`.
pub fn is_star_witness(p: &LatticePolytope, facet_set: &[usize], lambda: &[BigInt]) -> bool {
    let one = BigInt::one();
    if !p
        .vertices()
        .iter_rows()
        .all(|v| dot(lambda, v).abs() <= one)
    {
        return false;
    }
    let vals: Vec<BigInt> = facet_set
        .iter()
        .map(|&i| dot(lambda, p.vertex(i)))
        .collect();
    vals.iter().filter(|x| **x == -&one).count() == 1 && !vals.contains(&one)
}

/// Definitional star check over every proper face of `P*`, scanning `E`.
pub fn star_ewald(p: &LatticePolytope) -> Result<EwaldOutcome> {
    let q = require_reflexive_smooth(p)?;
    let e = q.symmetric_points();
    let mut out = Vec::new();
    for face in q.faces()? {
        let s = &face.facet_indices;
        match e.iter().find(|x| is_star_witness(p, s, x)) {
            Some(l) => out.push(EwaldWitness {
                kind: EwaldKind::Star,
                basis: vec![],
                lambda: Some(l.clone()),
                facet_set: s.clone(),
                transform: None,
            }),
            None => {
                return Ok(EwaldOutcome::Fails {
                    facet_set: s.clone(),
                })
            }
        }
    }
    Ok(EwaldOutcome::Holds(out))
}

/// Constructs a star point for a face of `P*` from a row split of the
/// standard form.
///
/// With `S = {u_1, ..., u_d}` the face's facet set, a vertex of the face
/// gives a facet basis `N = {u_1, ..., u_n}` of `P`. A split of the columns
/// `1, d+1, ..., n` of `M·N⁻¹`, oriented so column 1 has sign `-1`, yields
/// `λᵀ = N⁻¹ (-1, 0, ..., 0, s_(d+1), ..., s_n)ᵀ`.
pub fn find_star_ewald_point(p: &LatticePolytope, face: &FaceRef) -> Result<IntVector> {
    let s = &face.facet_indices;
    let d = s.len();
    if d == 0 {
        return Err(Error::Precondition("face has an empty facet set".into()));
    }
    let facets = p.facets()?;
    // Vertex `i` of the dual is facet `i` of P.
    let facet = face
        .vertex_indices
        .iter()
        .map(|&i| &facets[i])
        .find(|f| s.iter().all(|x| f.vertex_indices.contains(x)))
        .ok_or_else(|| Error::Precondition("no facet of P contains the face's facet set".into()))?;
    let mut basis = s.clone();
    basis.extend(
        facet
            .vertex_indices
            .iter()
            .copied()
            .filter(|i| !s.contains(i)),
    );
    let n = p.dim();
    if basis.len() != n {
        return Err(Error::NotSmooth(
            "face does not extend to a facet basis".into(),
        ));
    }
    let (sf, n_inv) = standard_form_for_basis(p.vertices(), &basis)?;
    let cols: Vec<usize> = std::iter::once(0).chain(d..n).collect();
    let split = row_split(&sf.transpose(), &cols)?;
    let flip = split.plus.contains(&0);
    let mut y = vec![BigInt::zero(); n];
    for &c in &split.plus {
        y[c] = if flip { -BigInt::one() } else { BigInt::one() };
    }
    for &c in &split.minus {
        y[c] = if flip { BigInt::one() } else { -BigInt::one() };
    }
    let lambda = n_inv
        .mul(&IntMatrix::from_rows(
            y.into_iter().map(|x| vec![x]).collect(),
        )?)?
        .column(0);
    if !is_star_witness(p, s, &lambda) {
        return Err(Error::NotTotallyUnimodular(
            "constructed point fails the star predicate".into(),
        ));
    }
    Ok(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ivec;
    use std::collections::HashSet;

    fn triangle() -> LatticePolytope {
        LatticePolytope::from_i64_rows(&[[1, 0], [0, 1], [-1, -1]]).unwrap()
    }

    fn cross() -> LatticePolytope {
        LatticePolytope::from_i64_rows(&[[1, 0], [0, 1], [-1, 0], [0, -1]]).unwrap()
    }

    #[test]
    fn weak_examples() {
        for p in [triangle(), cross()] {
            let w = weak_ewald(&p).unwrap().unwrap();
            let got: HashSet<IntVector> = w.basis.into_iter().collect();
            assert_eq!(got, [ivec(&[1, 0]), ivec(&[0, 1])].into_iter().collect());
        }
    }

    #[test]
    fn strong_triangle_facet() {
        let out = strong_ewald(&triangle()).unwrap();
        let EwaldOutcome::Holds(ws) = out else {
            panic!("strong condition fails")
        };
        assert_eq!(ws.len(), 3);
        let w0 = &ws[0];
        assert_eq!(w0.facet_set, vec![0]);
        let pts: HashSet<IntVector> = w0.basis.iter().cloned().collect();
        assert_eq!(pts, [ivec(&[-1, 0]), ivec(&[-1, 1])].into_iter().collect());
        assert!(strong_ewald(&cross()).unwrap().holds());
    }

    #[test]
    fn transform_triangle() {
        let t = strong_ewald_transform(&triangle(), 0).unwrap();
        let img = triangle().vertices().mul(&t).unwrap();
        assert_eq!(
            img,
            IntMatrix::from_i64_rows(&[[1, 1], [0, -1], [-1, 0]]).unwrap()
        );
        let t = strong_ewald_transform(&cross(), 0).unwrap();
        let img = cross().vertices().mul(&t).unwrap();
        assert_eq!(img.row(0), ivec(&[1, 1]).as_slice());
        assert!(img.iter_rows().flatten().all(|x| x.abs() <= BigInt::one()));
        assert!(t.det().unwrap().abs().is_one());
    }

    #[test]
    fn star_triangle_vertex_face() {
        let p = triangle();
        let q = p.dual().unwrap();
        let face = q
            .faces()
            .unwrap()
            .into_iter()
            .find(|f| f.dim == 0 && q.vertex(f.vertex_indices[0]) == ivec(&[-1, -1]).as_slice())
            .unwrap();
        assert_eq!(face.facet_indices, vec![0, 1]);
        assert!(is_star_witness(&p, &face.facet_indices, &ivec(&[-1, 0])));
        let l = find_star_ewald_point(&p, &face).unwrap();
        assert_eq!(dot(&l, p.vertex(0)), BigInt::from(-1));
        assert_eq!(dot(&l, p.vertex(1)), BigInt::zero());
        assert!(star_ewald(&p).unwrap().holds());
    }

    #[test]
    fn star_on_facets() {
        let p = cross();
        let q = p.dual().unwrap();
        for face in q.faces().unwrap().into_iter().filter(|f| f.dim == 1) {
            let l = find_star_ewald_point(&p, &face).unwrap();
            assert_eq!(dot(&l, p.vertex(face.facet_indices[0])), BigInt::from(-1));
        }
    }

    #[test]
    fn non_smooth_input_is_rejected() {
        let p = LatticePolytope::from_i64_rows(&[[1, 1], [1, -1], [-1, 1], [-1, -1]]).unwrap();
        assert!(matches!(weak_ewald(&p), Err(Error::Precondition(_))));
    }
}
