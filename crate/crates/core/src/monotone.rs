//! Smooth reflexive polytopes on the dual side: corner frames, deep
//! smoothness, UT-freeness and first displacements of faces.

use std::collections::{BTreeSet, HashSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    affine_dim, content, det_rows, dot, primitive_part, solve_rational, IntVector, RatVector,
};
use crate::polytope::{close_faces, FaceRef, LatticePolytope};

/// Primitive edge directions at a vertex, pointing away from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CornerFrame {
    pub vertex: usize,
    /// Neighbouring vertex along each edge.
    pub neighbors: Vec<usize>,
    pub edges: Vec<IntVector>,
}

/// Vertex adjacency along edges, each list sorted.
pub fn edge_adjacency(q: &LatticePolytope) -> Result<Vec<Vec<usize>>> {
    let mut adj = vec![Vec::new(); q.num_vertices()];
    for f in q.faces()?.into_iter().filter(|f| f.dim == 1) {
        let (a, b) = (f.vertex_indices[0], f.vertex_indices[1]);
        adj[a].push(b);
        adj[b].push(a);
    }
    for l in &mut adj {
        l.sort_unstable();
    }
    Ok(adj)
}

fn frame_from(q: &LatticePolytope, v: usize, neighbors: &[usize]) -> Result<CornerFrame> {
    let n = q.dim();
    if neighbors.len() != n {
        return Err(Error::NotSmooth(format!(
            "vertex {v} has {} edges",
            neighbors.len()
        )));
    }
    let p = q.vertex(v);
    let edges: Vec<IntVector> = neighbors
        .iter()
        .map(|&w| {
            primitive_part(
                &q.vertex(w)
                    .iter()
                    .zip(p)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    if !det_rows(edges.clone()).abs().is_one() {
        return Err(Error::NotSmooth(format!(
            "edge directions at vertex {v} are not a lattice basis"
        )));
    }
    Ok(CornerFrame {
        vertex: v,
        neighbors: neighbors.to_vec(),
        edges,
    })
}

pub fn corner_frame(q: &LatticePolytope, v: usize) -> Result<CornerFrame> {
    if v >= q.num_vertices() {
        return Err(Error::IndexOutOfRange {
            index: v,
            len: q.num_vertices(),
        });
    }
    frame_from(q, v, &edge_adjacency(q)?[v])
}

pub fn corner_frames(q: &LatticePolytope) -> Result<Vec<CornerFrame>> {
    let adj = edge_adjacency(q)?;
    (0..q.num_vertices())
        .map(|v| frame_from(q, v, &adj[v]))
        .collect()
}

/// Smooth polytope: simple with a lattice-basis frame at every vertex.
pub fn is_smooth_polytope(q: &LatticePolytope) -> bool {
    q.is_full_dimensional() && corner_frames(q).is_ok()
}

/// Reflexive with a smooth Fano dual.
pub fn is_monotone(q: &LatticePolytope) -> bool {
    q.is_reflexive().unwrap_or(false) && q.dual().is_ok_and(|p| p.is_smooth_fano())
}

/// Every corner parallelepiped `v + Σ_{i∈T} u_i` lies in `Q`; by convexity
/// it suffices to test the `2^n` corners against every facet.
pub fn is_deeply_smooth(q: &LatticePolytope) -> Result<bool> {
    let facets = q.facets()?;
    for frame in corner_frames(q)? {
        let v = q.vertex(frame.vertex);
        for subset in frame.edges.iter().powerset() {
            let mut x: IntVector = v.to_vec();
            for u in subset {
                for (a, b) in x.iter_mut().zip(u) {
                    *a += b;
                }
            }
            if facets.iter().any(|f| f.slack(&x).is_negative()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// What counts as a unimodular triangle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum TriangleRule {
    /// All three edges are primitive (no lattice point in their relative
    /// interiors).
    #[default]
    PrimitiveEdges,
    /// Normalized area 1 in the lattice of its plane.
    UnitArea,
}

fn is_unimodular_triangle(pts: [&[BigInt]; 3], rule: TriangleRule) -> bool {
    let diff =
        |a: &[BigInt], b: &[BigInt]| -> IntVector { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    let e1 = diff(pts[1], pts[0]);
    let e2 = diff(pts[2], pts[0]);
    match rule {
        TriangleRule::PrimitiveEdges => {
            let e3 = diff(pts[2], pts[1]);
            [e1, e2, e3].iter().all(|e| content(e).is_one())
        }
        TriangleRule::UnitArea => {
            // Index of the lattice spanned by e1, e2 in the plane's lattice:
            // gcd of the 2 x 2 minors.
            let n = e1.len();
            let mut g = BigInt::zero();
            for (i, j) in (0..n).tuple_combinations() {
                g = g.gcd(&(&e1[i] * &e2[j] - &e1[j] * &e2[i]));
            }
            g.is_one()
        }
    }
}

/// Vertex sets of faces together with points, for full or lower-dimensional
/// polytopes alike.
struct FaceData {
    points: Vec<IntVector>,
    dim: usize,
    /// Proper faces as vertex sets, with their affine dimension.
    faces: Vec<(Vec<usize>, usize)>,
}

impl FaceData {
    fn of_polytope(q: &LatticePolytope) -> Result<Self> {
        let faces = q
            .faces()?
            .into_iter()
            .map(|f| (f.vertex_indices, f.dim))
            .collect();
        Ok(Self {
            points: q.vertices().to_rows(),
            dim: q.affine_dim(),
            faces,
        })
    }

    /// From vertices and the tight sets of valid inequalities.
    fn from_tight_sets(points: Vec<IntVector>, tight: &[Vec<usize>]) -> Self {
        let m = points.len();
        let dim = affine_dim(points.iter().map(Vec::as_slice)).unwrap_or(0);
        let gens: Vec<Vec<usize>> = tight
            .iter()
            .filter(|t| !t.is_empty() && t.len() < m)
            .cloned()
            .collect();
        let faces = close_faces(&gens, m)
            .into_iter()
            .filter(|s| s.len() < m)
            .map(|s| {
                let d = affine_dim(s.iter().map(|&i| points[i].as_slice())).unwrap_or(0);
                (s, d)
            })
            .collect();
        Self { points, dim, faces }
    }

    fn has_unimodular_triangle(&self, rule: TriangleRule) -> bool {
        let all: Vec<usize> = (0..self.points.len()).collect();
        let mut two_faces: Vec<&Vec<usize>> = self
            .faces
            .iter()
            .filter(|(_, d)| *d == 2)
            .map(|(s, _)| s)
            .collect();
        if self.dim == 2 {
            two_faces.push(&all);
        }
        two_faces.into_iter().any(|s| {
            s.len() == 3
                && is_unimodular_triangle(
                    [&self.points[s[0]], &self.points[s[1]], &self.points[s[2]]],
                    rule,
                )
        })
    }
}

/// No 2-face is a unimodular triangle (all three edges primitive).
pub fn is_ut_free(q: &LatticePolytope) -> Result<bool> {
    is_ut_free_with(q, TriangleRule::PrimitiveEdges)
}

pub fn is_ut_free_with(q: &LatticePolytope, rule: TriangleRule) -> Result<bool> {
    Ok(!FaceData::of_polytope(q)?.has_unimodular_triangle(rule))
}

/// The first displacement `F₀` of a face and the checks made on it.
#[derive(Clone, Debug, Serialize)]
pub struct DisplacementReport {
    /// Facets of `Q` cutting out the face.
    pub facet_set: Vec<usize>,
    pub vertices: Vec<RatVector>,
    pub dim: usize,
    pub is_lattice: bool,
    /// `None` when `F₀` is not a lattice polytope.
    pub is_reflexive_after_recentering: Option<bool>,
    pub center: Option<IntVector>,
    pub normal_match: bool,
    pub ut_free: Option<bool>,
    pub diagnostic: Option<String>,
}

fn rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

fn rat_dot(u: &[BigInt], x: &[BigRational]) -> BigRational {
    u.iter().zip(x).map(|(a, b)| rat(a) * b).sum()
}

/// Tightens the facets through `face` by one lattice step and enumerates
/// the vertices of the resulting slice.
pub fn first_displacement(q: &LatticePolytope, face: &FaceRef) -> Result<DisplacementReport> {
    let facets = q.facets()?;
    let n = q.dim();
    let s = &face.facet_indices;
    let rest: Vec<usize> = (0..facets.len()).filter(|j| !s.contains(j)).collect();
    let rhs = |j: usize| -> BigRational {
        let b = rat(&facets[j].level);
        if s.contains(&j) {
            b - BigRational::one()
        } else {
            b
        }
    };
    let feasible = |x: &[BigRational]| {
        rest.iter()
            .all(|&j| rat_dot(&facets[j].normal, x) <= rhs(j))
            && s.iter().all(|&j| rat_dot(&facets[j].normal, x) == rhs(j))
    };
    let k = s.len();
    let mut found: BTreeSet<Vec<BigRational>> = BTreeSet::new();
    if k <= n {
        for extra in rest.iter().copied().combinations(n - k) {
            let rows: Vec<usize> = s.iter().copied().chain(extra).collect();
            let a: Vec<Vec<BigRational>> = rows
                .iter()
                .map(|&j| facets[j].normal.iter().map(rat).collect())
                .collect();
            let b: Vec<BigRational> = rows.iter().map(|&j| rhs(j)).collect();
            if let Some(x) = solve_rational(a, b) {
                if feasible(&x) {
                    found.insert(x);
                }
            }
        }
    }
    if found.is_empty() {
        return Err(Error::EmptySlice);
    }
    let vertices: Vec<RatVector> = found.into_iter().map(RatVector).collect();
    let is_lattice = vertices.iter().all(RatVector::is_integral);
    let mut report = DisplacementReport {
        facet_set: s.clone(),
        dim: 0,
        is_lattice,
        vertices,
        is_reflexive_after_recentering: None,
        center: None,
        normal_match: false,
        ut_free: None,
        diagnostic: None,
    };
    if !is_lattice {
        report.diagnostic = Some("slice has non-integral vertices".into());
        return Ok(report);
    }
    let points: Vec<IntVector> = report
        .vertices
        .iter()
        .map(|v| v.to_integers().expect("integral"))
        .collect();
    report.dim = affine_dim(points.iter().map(Vec::as_slice)).unwrap_or(0);
    let tight_of = |pts: &[IntVector], j: usize| -> Vec<usize> {
        (0..pts.len())
            .filter(|&i| dot(&facets[j].normal, &pts[i]) == facets[j].level)
            .collect()
    };
    let slice_tight: Vec<Vec<usize>> = rest.iter().map(|&j| tight_of(&points, j)).collect();
    let slice = FaceData::from_tight_sets(points.clone(), &slice_tight);
    report.ut_free = Some(!slice.has_unimodular_triangle(TriangleRule::PrimitiveEdges));

    // Incidence surrogate for normal isomorphism: the face and its slice are
    // cut by the same facets of Q, with the same family of tight sets at
    // their vertices.
    let face_pts: Vec<IntVector> = face
        .vertex_indices
        .iter()
        .map(|&i| q.vertex(i).to_vec())
        .collect();
    let family = |pts: &[IntVector]| -> BTreeSet<Vec<usize>> {
        pts.iter()
            .map(|x| {
                rest.iter()
                    .copied()
                    .filter(|&j| dot(&facets[j].normal, x) == facets[j].level)
                    .collect()
            })
            .collect()
    };
    report.normal_match = report.dim == face.dim
        && face_pts.len() == points.len()
        && family(&face_pts) == family(&points);

    // Reflexivity inside the affine lattice of the slice, centred at its
    // unique relative-interior lattice point.
    let (refl, center, diag) = recentered_reflexivity(q, face, &points, &slice, &rest);
    report.is_reflexive_after_recentering = Some(refl);
    report.center = center;
    if diag.is_some() {
        report.diagnostic = diag;
    }
    Ok(report)
}

fn recentered_reflexivity(
    q: &LatticePolytope,
    face: &FaceRef,
    points: &[IntVector],
    slice: &FaceData,
    rest: &[usize],
) -> (bool, Option<IntVector>, Option<String>) {
    let facets = q.facets().expect("full-dimensional");
    let d = slice.dim;
    if d == 0 {
        return (true, Some(points[0].clone()), None);
    }
    // A basis of the slice's lattice: the edges of a vertex frame of Q that
    // run inside the face.
    let Ok(frame) = corner_frame(q, face.vertex_indices[0]) else {
        return (false, None, Some("face vertex has no lattice frame".into()));
    };
    let along: Vec<IntVector> = frame
        .neighbors
        .iter()
        .zip(&frame.edges)
        .filter(|(w, _)| face.vertex_indices.contains(w))
        .map(|(_, e)| e.clone())
        .collect();
    if along.len() != d {
        return (
            false,
            None,
            Some("slice dimension differs from the face".into()),
        );
    }
    // Relative facets of the slice with a defining facet of Q each.
    let rel_facets: Vec<(&Vec<usize>, usize)> = slice
        .faces
        .iter()
        .filter(|(_, dim)| *dim + 1 == d)
        .filter_map(|(set, _)| {
            rest.iter()
                .copied()
                .find(|&j| {
                    set.iter()
                        .all(|&i| dot(&facets[j].normal, &points[i]) == facets[j].level)
                        && along.iter().any(|e| !dot(&facets[j].normal, e).is_zero())
                })
                .map(|j| (set, j))
        })
        .collect();
    let interior = |x: &[BigInt]| {
        rel_facets
            .iter()
            .all(|&(_, j)| dot(&facets[j].normal, x) < facets[j].level)
    };
    let member = |x: &[BigInt]| {
        facets.iter().enumerate().all(|(j, f)| {
            let v = dot(&f.normal, x);
            if rest.contains(&j) {
                v <= f.level
            } else {
                v == &f.level - 1
            }
        })
    };
    let (lo, hi) = bounds(points);
    let centers: Vec<IntVector> = crate::polytope::box_points(&lo, &hi)
        .filter(|x| member(x) && interior(x))
        .collect();
    if centers.len() != 1 {
        return (
            false,
            None,
            Some(format!(
                "{} relative-interior lattice points",
                centers.len()
            )),
        );
    }
    let c = centers.into_iter().next().expect("one center");
    let ok = rel_facets.iter().all(|&(_, j)| {
        let u = &facets[j].normal;
        let g = along.iter().fold(BigInt::zero(), |g, e| g.gcd(&dot(u, e)));
        let dist = &facets[j].level - dot(u, &c);
        !g.is_zero() && dist == g
    });
    (ok, Some(c), None)
}

fn bounds(points: &[IntVector]) -> (Vec<i64>, Vec<i64>) {
    let n = points[0].len();
    let lo = (0..n)
        .map(|j| {
            points
                .iter()
                .map(|p| p[j].to_i64().expect("small"))
                .min()
                .unwrap()
        })
        .collect();
    let hi = (0..n)
        .map(|j| {
            points
                .iter()
                .map(|p| p[j].to_i64().expect("small"))
                .max()
                .unwrap()
        })
        .collect();
    (lo, hi)
}

/// `Q` is UT-free and so is the first displacement of every proper face.
/// An empty displacement fails the check.
pub fn deeply_smooth_via_displacements(q: &LatticePolytope) -> Result<bool> {
    if !is_ut_free(q)? {
        return Ok(false);
    }
    for face in q.faces()? {
        match first_displacement(q, &face) {
            Ok(r) if r.ut_free == Some(true) => {}
            Ok(_) | Err(Error::EmptySlice) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrameSumCheck {
    /// `v = -(u_1 + ... + u_n)` for the corner frame at `v`.
    pub holds: bool,
    /// Whether `Q` is monotone and UT-free, where the identity is expected.
    pub precondition_met: bool,
}

/// Compares a vertex with the negated sum of its corner frame.
pub fn vertex_is_negated_frame_sum(q: &LatticePolytope, v: usize) -> Result<FrameSumCheck> {
    let frame = corner_frame(q, v)?;
    let n = q.dim();
    let mut sum = vec![BigInt::zero(); n];
    for e in &frame.edges {
        for (s, x) in sum.iter_mut().zip(e) {
            *s -= x;
        }
    }
    let precondition_met = is_monotone(q) && is_ut_free(q)?;
    Ok(FrameSumCheck {
        holds: sum.as_slice() == q.vertex(v),
        precondition_met,
    })
}

/// Membership in `E(Q)` of two frame vectors and of their sum or difference.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FramePairWitness {
    pub vertex: usize,
    pub pair: (usize, usize),
    pub first_in_e: bool,
    pub second_in_e: bool,
    pub sum_in_e: bool,
    pub difference_in_e: bool,
}

impl FramePairWitness {
    pub fn holds(&self) -> bool {
        self.first_in_e && self.second_in_e && (self.sum_in_e || self.difference_in_e)
    }
}

/// One entry per vertex and unordered pair of its frame vectors.
pub fn frame_pair_witnesses(q: &LatticePolytope) -> Result<Vec<FramePairWitness>> {
    let e: HashSet<IntVector> = q.symmetric_points().into_iter().collect();
    let mut out = Vec::new();
    for frame in corner_frames(q)? {
        for (i, j) in (0..frame.edges.len()).tuple_combinations() {
            let (a, b) = (&frame.edges[i], &frame.edges[j]);
            let sum: IntVector = a.iter().zip(b).map(|(x, y)| x + y).collect();
            let diff: IntVector = a.iter().zip(b).map(|(x, y)| x - y).collect();
            out.push(FramePairWitness {
                vertex: frame.vertex,
                pair: (i, j),
                first_in_e: e.contains(a),
                second_in_e: e.contains(b),
                sum_in_e: e.contains(&sum),
                difference_in_e: e.contains(&diff),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ivec;

    fn square() -> LatticePolytope {
        LatticePolytope::from_i64_rows(&[[1, 1], [1, -1], [-1, 1], [-1, -1]]).unwrap()
    }

    fn triangle_dual() -> LatticePolytope {
        LatticePolytope::from_i64_rows(&[[-1, -1], [2, -1], [-1, 2]]).unwrap()
    }

    fn vertex_index(q: &LatticePolytope, v: &[i64]) -> usize {
        (0..q.num_vertices())
            .find(|&i| q.vertex(i) == ivec(v).as_slice())
            .unwrap()
    }

    #[test]
    fn frames() {
        let sq = square();
        let f = corner_frame(&sq, vertex_index(&sq, &[1, 1])).unwrap();
        let got: HashSet<IntVector> = f.edges.into_iter().collect();
        assert_eq!(got, [ivec(&[-1, 0]), ivec(&[0, -1])].into_iter().collect());
        let t = triangle_dual();
        let f = corner_frame(&t, vertex_index(&t, &[2, -1])).unwrap();
        let got: HashSet<IntVector> = f.edges.into_iter().collect();
        assert_eq!(got, [ivec(&[-1, 0]), ivec(&[-1, 1])].into_iter().collect());
    }

    #[test]
    fn non_simple_vertex_is_rejected() {
        let pyramid = LatticePolytope::from_i64_rows(&[
            [1, 1, 0],
            [1, -1, 0],
            [-1, 1, 0],
            [-1, -1, 0],
            [0, 0, 1],
        ])
        .unwrap();
        assert!(matches!(
            corner_frame(&pyramid, 4),
            Err(Error::NotSmooth(_))
        ));
    }

    #[test]
    fn deep_smoothness() {
        assert!(is_deeply_smooth(&square()).unwrap());
        assert!(is_deeply_smooth(&triangle_dual()).unwrap());
    }

    #[test]
    fn unimodular_triangles() {
        assert!(is_ut_free(&square()).unwrap());
        let t = LatticePolytope::from_i64_rows(&[[0, 0], [1, 0], [0, 1]]).unwrap();
        assert!(!is_ut_free(&t).unwrap());
        assert!(!is_ut_free_with(&t, TriangleRule::UnitArea).unwrap());
        // Primitive edges but area 3.
        let big = LatticePolytope::from_i64_rows(&[[0, 0], [2, 1], [1, 2]]).unwrap();
        assert!(!is_ut_free(&big).unwrap());
        assert!(is_ut_free_with(&big, TriangleRule::UnitArea).unwrap());
        assert!(is_ut_free(&triangle_dual()).unwrap());
    }

    fn facet_face(q: &LatticePolytope, normal: &[i64]) -> FaceRef {
        let k = q
            .facets()
            .unwrap()
            .iter()
            .position(|f| f.normal == ivec(normal))
            .unwrap();
        q.faces()
            .unwrap()
            .into_iter()
            .find(|f| f.facet_indices == vec![k] && f.dim == 1)
            .unwrap()
    }

    #[test]
    fn square_displacement() {
        let sq = square();
        let r = first_displacement(&sq, &facet_face(&sq, &[1, 0])).unwrap();
        assert!(r.is_lattice);
        let pts: HashSet<IntVector> = r
            .vertices
            .iter()
            .map(|v| v.to_integers().unwrap())
            .collect();
        assert_eq!(pts, [ivec(&[0, -1]), ivec(&[0, 1])].into_iter().collect());
        assert!(r.normal_match);
        assert_eq!(r.is_reflexive_after_recentering, Some(true));
        assert_eq!(r.center, Some(ivec(&[0, 0])));
    }

    #[test]
    fn triangle_dual_displacement() {
        let t = triangle_dual();
        let r = first_displacement(&t, &facet_face(&t, &[-1, 0])).unwrap();
        let pts: HashSet<IntVector> = r
            .vertices
            .iter()
            .map(|v| v.to_integers().unwrap())
            .collect();
        assert_eq!(pts, [ivec(&[0, -1]), ivec(&[0, 1])].into_iter().collect());
        assert!(r.normal_match);
        assert!(deeply_smooth_via_displacements(&t).unwrap());
        assert!(deeply_smooth_via_displacements(&square()).unwrap());
    }

    #[test]
    fn frame_sums() {
        let sq = square();
        assert!(
            vertex_is_negated_frame_sum(&sq, vertex_index(&sq, &[1, 1]))
                .unwrap()
                .holds
        );
        let t = triangle_dual();
        let c = vertex_is_negated_frame_sum(&t, vertex_index(&t, &[2, -1])).unwrap();
        assert!(c.holds && c.precondition_met);
    }

    #[test]
    fn frame_pairs() {
        for q in [square(), triangle_dual()] {
            assert!(frame_pair_witnesses(&q)
                .unwrap()
                .iter()
                .all(FramePairWitness::holds));
        }
        let t = triangle_dual();
        let v = vertex_index(&t, &[2, -1]);
        let w = frame_pair_witnesses(&t)
            .unwrap()
            .into_iter()
            .find(|w| w.vertex == v)
            .unwrap();
        assert!(w.difference_in_e || w.sum_in_e);
    }
}
