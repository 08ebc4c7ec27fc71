//! Lattice polytopes given by their vertices.
//!
//! Facets are found by scanning every set of `n` points that spans a
//! hyperplane; faces are the closed vertex sets of the vertex–facet incidence
//! relation. Polar duality uses the convention
//! `P* = { x : <x, y> >= -1 for all y in P }` throughout, so a facet
//! `<u, x> <= 1` of `P` becomes the vertex `-u` of `P*`.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    affine_dim, det_rows, dot, is_primitive, orthogonal_complement, rank_rows, IntMatrix, IntVector,
};
use crate::par::{self, Execution};

/// A facet `<normal, x> <= level` with primitive outer normal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Facet {
    /// Indices (into the polytope's vertex list) of the vertices on the facet.
    pub vertex_indices: Vec<usize>,
    pub normal: IntVector,
    pub level: BigInt,
}

impl Facet {
    /// Slack `level - <normal, x>`; nonnegative exactly on the valid side.
    pub fn slack(&self, x: &[BigInt]) -> BigInt {
        &self.level - dot(&self.normal, x)
    }
}

/// A nonempty proper face, described from both sides of the incidence
/// relation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FaceRef {
    /// Facets containing the face; the face is their intersection.
    pub facet_indices: Vec<usize>,
    /// Vertices lying on every one of those facets.
    pub vertex_indices: Vec<usize>,
    pub dim: usize,
}

/// Flags of the smooth Fano test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SmoothFanoReport {
    pub projective: bool,
    pub fano: bool,
    pub simplicial: bool,
    pub smooth: bool,
}

impl SmoothFanoReport {
    pub fn is_smooth_fano(&self) -> bool {
        self.fano && self.smooth
    }
}

/// A lattice polytope `conv(vertices)` in `R^n`.
///
/// Top-level polytopes are full-dimensional; lower-dimensional ones (for
/// instance images of projections or of degenerate digraphs) are allowed and
/// report their affine dimension, but have no facet list.
#[derive(Clone, Debug)]
pub struct LatticePolytope {
    vertices: IntMatrix,
    affine_dim: usize,
    facets: OnceLock<Vec<Facet>>,
}

impl PartialEq for LatticePolytope {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl LatticePolytope {
    /// Builds a polytope whose rows must be pairwise distinct extreme points.
    pub fn new(vertices: IntMatrix) -> Result<Self> {
        let rows = vertices.to_rows();
        let mut seen = HashSet::new();
        for (i, r) in rows.iter().enumerate() {
            if !seen.insert(r) {
                return Err(Error::Domain(format!("vertex {i} is repeated")));
            }
        }
        let hull = hull(&rows);
        if hull.extreme.len() != rows.len() {
            let bad = (0..rows.len())
                .find(|i| !hull.extreme.contains(i))
                .unwrap_or(0);
            return Err(Error::Domain(format!("point {i} is not a vertex", i = bad)));
        }
        let out = Self {
            vertices,
            affine_dim: hull.affine_dim,
            facets: OnceLock::new(),
        };
        if let Some(f) = hull.facets {
            let _ = out.facets.set(f);
        }
        Ok(out)
    }

    /// Convex hull of arbitrary points: duplicates and non-extreme points
    /// are dropped, the remaining order is preserved.
    pub fn from_points(points: &IntMatrix) -> Self {
        let mut rows: Vec<IntVector> = Vec::new();
        let mut seen = HashSet::new();
        for r in points.iter_rows() {
            if seen.insert(r.to_vec()) {
                rows.push(r.to_vec());
            }
        }
        let hull = hull(&rows);
        let keep: Vec<IntVector> = hull.extreme.iter().map(|&i| rows[i].clone()).collect();
        let vertices = IntMatrix::from_rows(keep).expect("nonempty hull");
        let out = Self {
            vertices,
            affine_dim: hull.affine_dim,
            facets: OnceLock::new(),
        };
        if let Some(f) = hull.facets {
            // Re-index facet vertices to the compacted list.
            let pos: HashMap<usize, usize> = hull
                .extreme
                .iter()
                .enumerate()
                .map(|(new, &old)| (old, new))
                .collect();
            let f = f
                .into_iter()
                .map(|mut fc| {
                    fc.vertex_indices = fc.vertex_indices.iter().map(|i| pos[i]).collect();
                    fc
                })
                .collect();
            let _ = out.facets.set(f);
        }
        out
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(IntMatrix::from_i64_rows(rows)?)
    }

    /// Trusted constructor for polytopes whose facets are already known.
    pub(crate) fn with_facets(vertices: IntMatrix, facets: Vec<Facet>) -> Self {
        let n = vertices.cols();
        let out = Self {
            vertices,
            affine_dim: n,
            facets: OnceLock::new(),
        };
        let _ = out.facets.set(facets);
        out
    }

    /// Ambient dimension.
    #[inline]
    pub fn dim(&self) -> usize {
        self.vertices.cols()
    }

    #[inline]
    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    #[inline]
    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == self.dim()
    }

    #[inline]
    pub fn vertices(&self) -> &IntMatrix {
        &self.vertices
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.vertices.rows()
    }

    pub fn vertex(&self, i: usize) -> &[BigInt] {
        self.vertices.row(i)
    }

    /// Complete facet list. Errors for lower-dimensional polytopes.
    pub fn facets(&self) -> Result<&[Facet]> {
        if !self.is_full_dimensional() {
            return Err(Error::Dimension(format!(
                "polytope of affine dimension {} in R^{} has no facets in the ambient space",
                self.affine_dim,
                self.dim()
            )));
        }
        Ok(self.facets.get_or_init(|| {
            hull(&self.vertices.to_rows())
                .facets
                .expect("full-dimensional hull")
        }))
    }

    /// Origin in the interior.
    pub fn is_projective(&self) -> bool {
        match self.facets() {
            Ok(fs) => fs.iter().all(|f| f.level.is_positive()),
            Err(_) => false,
        }
    }

    pub fn smooth_fano_report(&self) -> SmoothFanoReport {
        let mut rep = SmoothFanoReport::default();
        let Ok(facets) = self.facets() else {
            return rep;
        };
        let n = self.dim();
        rep.projective = facets.iter().all(|f| f.level.is_positive());
        rep.fano = rep.projective
            && self
                .vertices
                .iter_rows()
                .all(|v| is_primitive(v).unwrap_or(false));
        rep.simplicial = facets.iter().all(|f| f.vertex_indices.len() == n);
        rep.smooth = rep.simplicial
            && facets.iter().all(|f| {
                let basis: Vec<IntVector> = f
                    .vertex_indices
                    .iter()
                    .map(|&i| self.vertex(i).to_vec())
                    .collect();
                det_rows(basis).abs().is_one()
            });
        rep
    }

    pub fn is_smooth_fano(&self) -> bool {
        self.smooth_fano_report().is_smooth_fano()
    }

    /// Every facet sits at level 1 (normals are primitive).
    pub fn is_reflexive(&self) -> Result<bool> {
        if !self.is_projective() {
            return Err(Error::NotProjective);
        }
        Ok(self.facets()?.iter().all(|f| f.level.is_one()))
    }

    /// Polar dual under `<x, y> >= -1`. Vertex `i` of the dual belongs to
    /// facet `i` of `self`, and facet `j` of the dual to vertex `j` of `self`.
    pub fn dual(&self) -> Result<LatticePolytope> {
        if !self.is_reflexive()? {
            return Err(Error::NotReflexive);
        }
        let facets = self.facets()?;
        let rows: Vec<IntVector> = facets
            .iter()
            .map(|f| f.normal.iter().map(|x| -x).collect())
            .collect();
        let dual_facets = (0..self.num_vertices())
            .map(|j| Facet {
                vertex_indices: facets
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.vertex_indices.contains(&j))
                    .map(|(i, _)| i)
                    .collect(),
                normal: self.vertex(j).iter().map(|x| -x).collect(),
                level: BigInt::one(),
            })
            .collect();
        Ok(LatticePolytope::with_facets(
            IntMatrix::from_rows(rows)?,
            dual_facets,
        ))
    }

    /// All nonempty proper faces, sorted by dimension and then vertex set.
    pub fn faces(&self) -> Result<Vec<FaceRef>> {
        let facets = self.facets()?;
        let m = self.num_vertices();
        let sets: Vec<Vec<usize>> = facets.iter().map(|f| f.vertex_indices.clone()).collect();
        let mut out: Vec<FaceRef> = close_faces(&sets, m)
            .into_iter()
            .map(|vs| {
                let dim = affine_dim(vs.iter().map(|&i| self.vertex(i))).unwrap_or(0);
                let facet_indices = facets_containing(&sets, &vs);
                FaceRef {
                    facet_indices,
                    vertex_indices: vs,
                    dim,
                }
            })
            .collect();
        out.sort_by(|a, b| (a.dim, &a.vertex_indices).cmp(&(b.dim, &b.vertex_indices)));
        Ok(out)
    }

    /// Membership test for an integer point.
    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.membership().contains(x)
    }

    fn membership(&self) -> Membership {
        if let Ok(f) = self.facets() {
            return Membership::full(f);
        }
        Membership::lower(&self.vertices.to_rows(), self.affine_dim)
    }

    /// All lattice points, in lexicographic order.
    pub fn lattice_points(&self) -> Vec<IntVector> {
        let (lo, hi) = self.bounding_box();
        let mem = self.membership();
        box_points(&lo, &hi).filter(|p| mem.contains(p)).collect()
    }

    /// `E(P) = P ∩ (-P) ∩ Z^n`, in lexicographic order.
    pub fn symmetric_points(&self) -> Vec<IntVector> {
        let (lo, hi) = self.bounding_box();
        let lo2: Vec<i64> = lo.iter().zip(&hi).map(|(&l, &h)| l.max(-h)).collect();
        let hi2: Vec<i64> = lo.iter().zip(&hi).map(|(&l, &h)| h.min(-l)).collect();
        let mem = self.membership();
        box_points(&lo2, &hi2)
            .filter(|p| {
                let neg: IntVector = p.iter().map(|x| -x).collect();
                mem.contains(p) && mem.contains(&neg)
            })
            .collect()
    }

    fn bounding_box(&self) -> (Vec<i64>, Vec<i64>) {
        let n = self.dim();
        let mut lo = vec![i64::MAX; n];
        let mut hi = vec![i64::MIN; n];
        for r in self.vertices.iter_rows() {
            for j in 0..n {
                let x = r[j]
                    .to_i64()
                    .expect("coordinates fit in i64 for lattice scans");
                lo[j] = lo[j].min(x);
                hi[j] = hi[j].max(x);
            }
        }
        (lo, hi)
    }

    /// Convex hull of the vertex rows restricted to the columns in `keep`.
    pub fn project(&self, keep: &[usize]) -> Result<LatticePolytope> {
        if keep.is_empty() {
            return Err(Error::Domain(
                "projection onto an empty coordinate set".into(),
            ));
        }
        Ok(LatticePolytope::from_points(
            &self.vertices.delete_columns(keep)?,
        ))
    }

    /// Image under `x -> x · t`.
    pub fn transform(&self, t: &IntMatrix) -> Result<LatticePolytope> {
        let img = self.vertices.mul(t)?;
        Ok(LatticePolytope::from_points(&img))
    }

    pub fn vertex_set(&self) -> HashSet<IntVector> {
        self.vertices.to_rows().into_iter().collect()
    }
}

/// Every `n x n` minor of the vertex matrix lies in `{-1, 0, 1}`.
pub fn is_unimodular_matrix(m: &IntMatrix, exec: Execution) -> bool {
    let n = m.cols();
    if m.rows() < n {
        return true;
    }
    let subsets: Vec<Vec<usize>> = (0..m.rows()).combinations(n).collect();
    let cols: Vec<usize> = (0..n).collect();
    par::find_map_first(exec, &subsets, |rows| {
        let d = det_rows(m.submatrix(rows, &cols));
        (d.abs() > BigInt::one()).then_some(())
    })
    .is_none()
}

pub fn is_unimodular_polytope(p: &LatticePolytope) -> bool {
    is_unimodular_matrix(p.vertices(), Execution::Sequential)
}

/// Searches for an integer `T` with `|det T| = 1` and
/// `{ v · T : v in vertices(p) } = vertices(q)`.
///
/// Fixes one ordered facet basis of `p` and tries every facet of `q` under
/// every vertex ordering; this is complete for smooth Fano polytopes because
/// equivalences map facets to facets.
pub fn unimodular_equivalent(
    p: &LatticePolytope,
    q: &LatticePolytope,
) -> Result<Option<IntMatrix>> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension(format!(
            "dimensions differ: {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    if p.num_vertices() != q.num_vertices() {
        return Ok(None);
    }
    let (fp, fq) = (p.facets()?, q.facets()?);
    if fp.len() != fq.len() {
        return Ok(None);
    }
    let n = p.dim();
    let base = fp
        .iter()
        .find(|f| f.vertex_indices.len() == n)
        .ok_or_else(|| Error::NotSmooth("no simplex facet to anchor the search".into()))?;
    let base_matrix = p.vertices().select_rows(&base.vertex_indices)?;
    let base_inv = base_matrix
        .inverse_unimodular()
        .map_err(|_| Error::NotSmooth("anchor facet is not a lattice basis".into()))?;
    let target = q.vertex_set();
    for g in fq.iter().filter(|f| f.vertex_indices.len() == n) {
        for perm in g.vertex_indices.iter().copied().permutations(n) {
            let image_basis = q.vertices().select_rows(&perm)?;
            if !image_basis.det()?.abs().is_one() {
                break;
            }
            let t = base_inv.mul(&image_basis)?;
            let maps = p
                .vertices()
                .iter_rows()
                .all(|v| target.contains(&t.left_apply(v)));
            if maps {
                return Ok(Some(t));
            }
        }
    }
    Ok(None)
}

struct Hull {
    affine_dim: usize,
    extreme: Vec<usize>,
    facets: Option<Vec<Facet>>,
}

fn hull(points: &[IntVector]) -> Hull {
    let n = points[0].len();
    let ad = affine_dim(points.iter().map(Vec::as_slice)).unwrap_or(0);
    if ad == n {
        let (facets, extreme) = full_hull(points);
        return Hull {
            affine_dim: ad,
            extreme,
            facets: Some(facets),
        };
    }
    if ad == 0 {
        return Hull {
            affine_dim: 0,
            extreme: vec![0],
            facets: None,
        };
    }
    // Project injectively onto `ad` coordinates and take the hull there.
    let base = &points[0];
    let diffs: Vec<IntVector> = points
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let coords = independent_columns(&diffs, ad);
    let projected: Vec<IntVector> = points
        .iter()
        .map(|p| coords.iter().map(|&j| p[j].clone()).collect())
        .collect();
    let (_, extreme) = full_hull(&projected);
    Hull {
        affine_dim: ad,
        extreme,
        facets: None,
    }
}

/// Greedily picks `k` columns of `rows` with full column rank.
fn independent_columns(rows: &[IntVector], k: usize) -> Vec<usize> {
    let n = rows[0].len();
    let mut chosen: Vec<usize> = Vec::new();
    for j in 0..n {
        let mut trial = chosen.clone();
        trial.push(j);
        let cols: Vec<IntVector> = trial
            .iter()
            .map(|&c| rows.iter().map(|r| r[c].clone()).collect())
            .collect();
        if rank_rows(cols) == trial.len() {
            chosen = trial;
            if chosen.len() == k {
                break;
            }
        }
    }
    chosen
}

/// Facets and extreme points of a full-dimensional point set.
fn full_hull(points: &[IntVector]) -> (Vec<Facet>, Vec<usize>) {
    let n = points[0].len();
    let m = points.len();
    let mut facets: Vec<(IntVector, BigInt, Vec<usize>)> = Vec::new();
    let mut seen: HashSet<IntVector> = HashSet::new();
    for subset in (0..m).combinations(n) {
        if facets
            .iter()
            .any(|(_, _, on)| subset.iter().all(|i| on.binary_search(i).is_ok()))
        {
            continue;
        }
        let base = &points[subset[0]];
        let diffs: Vec<IntVector> = subset[1..]
            .iter()
            .map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let Some(mut u) = orthogonal_complement(&diffs, n) else {
            continue;
        };
        let mut b = dot(&u, base);
        let vals: Vec<BigInt> = points.iter().map(|p| dot(&u, p) - &b).collect();
        let (pos, neg) = vals.iter().fold((false, false), |(p, q), v| {
            (p || v.is_positive(), q || v.is_negative())
        });
        if pos && neg {
            continue;
        }
        if pos {
            u = u.iter().map(|x| -x).collect();
            b = -b;
        }
        if !seen.insert(u.clone()) {
            continue;
        }
        let on: Vec<usize> = vals
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_zero())
            .map(|(i, _)| i)
            .collect();
        facets.push((u, b, on));
    }
    // A point is extreme iff the normals of the facets through it span R^n.
    let extreme: Vec<usize> = (0..m)
        .filter(|&i| {
            let normals: Vec<IntVector> = facets
                .iter()
                .filter(|(_, _, on)| on.binary_search(&i).is_ok())
                .map(|(u, _, _)| u.clone())
                .collect();
            rank_rows(normals) == n
        })
        .collect();
    let pos: HashMap<usize, usize> = extreme.iter().enumerate().map(|(a, &b)| (b, a)).collect();
    let mut out: Vec<Facet> = facets
        .into_iter()
        .map(|(normal, level, on)| Facet {
            vertex_indices: on.iter().filter_map(|i| pos.get(i).map(|_| *i)).collect(),
            normal,
            level,
        })
        .collect();
    // Indices stay relative to the input point list; callers compact them.
    out.sort_by(|a, b| {
        a.vertex_indices
            .cmp(&b.vertex_indices)
            .then(a.normal.cmp(&b.normal))
    });
    (out, extreme)
}

/// Vertex sets of all nonempty faces generated by intersecting facets.
pub(crate) fn close_faces(facet_sets: &[Vec<usize>], num_vertices: usize) -> Vec<Vec<usize>> {
    let to_bits = |s: &[usize]| {
        let mut b = FixedBitSet::with_capacity(num_vertices);
        for &i in s {
            b.insert(i);
        }
        b
    };
    let facets: Vec<FixedBitSet> = facet_sets.iter().map(|s| to_bits(s)).collect();
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    let mut queue: Vec<FixedBitSet> = Vec::new();
    for f in &facets {
        if seen.insert(f.clone()) {
            queue.push(f.clone());
        }
    }
    while let Some(s) = queue.pop() {
        for f in &facets {
            let mut t = s.clone();
            t.intersect_with(f);
            if t.count_ones(..) > 0 && seen.insert(t.clone()) {
                queue.push(t);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = seen.into_iter().map(|b| b.ones().collect()).collect();
    out.sort();
    out
}

pub(crate) fn facets_containing(facet_sets: &[Vec<usize>], vertices: &[usize]) -> Vec<usize> {
    facet_sets
        .iter()
        .enumerate()
        .filter(|(_, f)| vertices.iter().all(|v| f.binary_search(v).is_ok()))
        .map(|(i, _)| i)
        .collect()
}

/// Inequality-based membership, with an i64 fast path when everything fits.
enum Membership {
    Small(Vec<(Vec<i64>, i64)>),
    Big(Vec<(IntVector, BigInt)>),
    Lower {
        base: IntVector,
        span: Vec<IntVector>,
        coords: Vec<usize>,
        inner: Box<Membership>,
    },
    Point(IntVector),
}

impl Membership {
    fn full(facets: &[Facet]) -> Self {
        let small: Option<Vec<(Vec<i64>, i64)>> = facets
            .iter()
            .map(|f| {
                let u: Option<Vec<i64>> = f.normal.iter().map(|x| x.to_i64()).collect();
                Some((u?, f.level.to_i64()?))
            })
            .collect();
        match small {
            Some(s) => Membership::Small(s),
            None => Membership::Big(
                facets
                    .iter()
                    .map(|f| (f.normal.clone(), f.level.clone()))
                    .collect(),
            ),
        }
    }

    fn lower(points: &[IntVector], ad: usize) -> Self {
        if ad == 0 {
            return Membership::Point(points[0].clone());
        }
        let base = points[0].clone();
        let diffs: Vec<IntVector> = points
            .iter()
            .map(|p| p.iter().zip(&base).map(|(a, b)| a - b).collect())
            .collect();
        let coords = independent_columns(&diffs, ad);
        let projected: Vec<IntVector> = points
            .iter()
            .map(|p| coords.iter().map(|&j| p[j].clone()).collect())
            .collect();
        let (facets, _) = full_hull(&projected);
        let span: Vec<IntVector> = diffs
            .into_iter()
            .filter(|d| !d.iter().all(Zero::is_zero))
            .collect();
        Membership::Lower {
            base,
            span,
            coords,
            inner: Box::new(Membership::full(&facets)),
        }
    }

    fn contains(&self, x: &[BigInt]) -> bool {
        match self {
            Membership::Small(ineqs) => {
                let xs: Option<Vec<i64>> = x.iter().map(|v| v.to_i64()).collect();
                let Some(xs) = xs else {
                    return false;
                };
                ineqs.iter().all(|(u, b)| {
                    let s: i128 = u
                        .iter()
                        .zip(&xs)
                        .map(|(&a, &c)| a as i128 * c as i128)
                        .sum();
                    s <= *b as i128
                })
            }
            Membership::Big(ineqs) => ineqs.iter().all(|(u, b)| &dot(u, x) <= b),
            Membership::Point(p) => p.as_slice() == x,
            Membership::Lower {
                base,
                span,
                coords,
                inner,
            } => {
                let d: IntVector = x.iter().zip(base).map(|(a, b)| a - b).collect();
                let mut rows = span.clone();
                let r = rank_rows(rows.clone());
                rows.push(d);
                if rank_rows(rows) != r {
                    return false;
                }
                let proj: IntVector = coords.iter().map(|&j| x[j].clone()).collect();
                inner.contains(&proj)
            }
        }
    }
}

pub(crate) fn box_points(lo: &[i64], hi: &[i64]) -> impl Iterator<Item = IntVector> {
    let n = lo.len();
    let empty = lo.iter().zip(hi).any(|(l, h)| l > h);
    let mut cur: Option<Vec<i64>> = if empty { None } else { Some(lo.to_vec()) };
    let (lo, hi) = (lo.to_vec(), hi.to_vec());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut j = n;
        loop {
            if j == 0 {
                cur = None;
                break;
            }
            j -= 1;
            if next[j] < hi[j] {
                next[j] += 1;
                next[j + 1..n].copy_from_slice(&lo[j + 1..n]);
                cur = Some(next);
                break;
            }
        }
        Some(out.into_iter().map(BigInt::from).collect())
    })
}
