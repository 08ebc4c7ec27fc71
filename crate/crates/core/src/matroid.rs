//! Row matroids of integer matrices, graph realizations, `R10` detection and
//! polytopes of directed graphs.

use std::collections::{HashMap, HashSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixtures::Fixture;
use crate::linalg::{rank_rows, solve_rational, IntMatrix, IntVector};
use crate::polytope::{is_unimodular_polytope, LatticePolytope};
use crate::tumatrix::{is_totally_unimodular, standard_form_for_basis};

/// Largest ground set for circuit enumeration and realization checks.
pub const DEFAULT_BOUND: usize = 16;

/// Largest rank for which realization search enumerates spanning trees.
pub const MAX_TREE_RANK: usize = 8;

/// The matroid on the rows of a matrix, independence meaning linear
/// independence over the rationals.
#[derive(Clone, Debug)]
pub struct LinearMatroid {
    source: IntMatrix,
    rank: usize,
}

impl LinearMatroid {
    pub fn new(source: IntMatrix) -> Self {
        let rank = source.rank();
        Self { source, rank }
    }

    pub fn source(&self) -> &IntMatrix {
        &self.source
    }

    pub fn ground_size(&self) -> usize {
        self.source.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_of(&self, subset: &[usize]) -> Result<usize> {
        for &i in subset {
            if i >= self.ground_size() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.ground_size(),
                });
            }
        }
        Ok(self.rank_unchecked(subset))
    }

    fn rank_unchecked(&self, subset: &[usize]) -> usize {
        rank_rows(
            subset
                .iter()
                .map(|&i| self.source.row(i).to_vec())
                .collect(),
        )
    }

    pub fn is_independent(&self, subset: &[usize]) -> Result<bool> {
        Ok(self.rank_of(subset)? == subset.len())
    }

    /// All circuits, each sorted, ordered by size and then lexicographically.
    pub fn circuits(&self) -> Result<Vec<Vec<usize>>> {
        self.circuits_bounded(DEFAULT_BOUND)
    }

    pub fn circuits_bounded(&self, bound: usize) -> Result<Vec<Vec<usize>>> {
        let m = self.ground_size();
        if m > bound {
            return Err(Error::SearchBound(format!(
                "{m} ground elements exceed bound {bound}"
            )));
        }
        let mut out = Vec::new();
        for k in 1..=(self.rank + 1).min(m) {
            for s in (0..m).combinations(k) {
                if self.rank_unchecked(&s) != k - 1 {
                    continue;
                }
                let minimal = (0..k).all(|drop| {
                    let t: Vec<usize> = s
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != drop)
                        .map(|(_, &e)| e)
                        .collect();
                    self.rank_unchecked(&t) == k - 1
                });
                if minimal {
                    out.push(s);
                }
            }
        }
        Ok(out)
    }

    /// Greedy basis in row order.
    pub fn greedy_basis(&self) -> Vec<usize> {
        let mut basis: Vec<usize> = Vec::new();
        for i in 0..self.ground_size() {
            basis.push(i);
            if self.rank_unchecked(&basis) < basis.len() {
                basis.pop();
            }
        }
        basis
    }

    /// Coordinates of every row in the span of `basis` (rows of the result
    /// are indexed like the ground set).
    fn coordinates(&self, basis: &[usize]) -> Vec<Vec<BigRational>> {
        let r = basis.len();
        let bm: Vec<IntVector> = basis.iter().map(|&b| self.source.row(b).to_vec()).collect();
        // Columns J making the r x r block of the basis rows invertible.
        let mut cols: Vec<usize> = Vec::new();
        for j in 0..self.source.cols() {
            cols.push(j);
            let block: Vec<IntVector> = cols
                .iter()
                .map(|&c| bm.iter().map(|row| row[c].clone()).collect())
                .collect();
            if rank_rows(block) < cols.len() {
                cols.pop();
            }
            if cols.len() == r {
                break;
            }
        }
        let a: Vec<Vec<BigRational>> = cols
            .iter()
            .map(|&c| {
                bm.iter()
                    .map(|row| BigRational::from_integer(row[c].clone()))
                    .collect()
            })
            .collect();
        (0..self.ground_size())
            .map(|e| {
                let b = cols
                    .iter()
                    .map(|&c| BigRational::from_integer(self.source.get(e, c).clone()))
                    .collect();
                solve_rational(a.clone(), b).expect("basis block is invertible")
            })
            .collect()
    }

    /// All graph realizations found by the spanning-tree search.
    pub fn graphic_realizations(&self) -> Result<Vec<GraphRealization>> {
        self.realizations(usize::MAX)
    }

    /// A graph whose forests are exactly the independent sets, if any.
    pub fn is_graphic_matroid(&self) -> Result<Option<GraphRealization>> {
        Ok(self.realizations(1)?.into_iter().next())
    }

    fn realizations(&self, limit: usize) -> Result<Vec<GraphRealization>> {
        let m = self.ground_size();
        if m > DEFAULT_BOUND {
            return Err(Error::SearchBound(format!(
                "{m} ground elements exceed bound"
            )));
        }
        if self.rank > MAX_TREE_RANK {
            return Err(Error::SearchBound(format!(
                "rank {} exceeds {MAX_TREE_RANK}",
                self.rank
            )));
        }
        let search = TreeSearch::new(self);
        let verify = !search.regular;
        let circuits = if verify { Some(self.circuits()?) } else { None };
        let mut out = Vec::new();
        for tree in labeled_trees(self.rank + 1) {
            let Some(g) = search.realize(&tree) else {
                continue;
            };
            if let Some(c) = &circuits {
                if !same_circuits(c, &g) {
                    continue;
                }
            }
            out.push(g);
            if out.len() >= limit {
                break;
            }
        }
        Ok(out)
    }
}

/// An undirected multigraph with one edge per ground element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphRealization {
    pub num_vertices: usize,
    /// `edges[e]` joins the two endpoints of element `e` (equal for a loop).
    pub edges: Vec<(usize, usize)>,
}

impl GraphRealization {
    /// Whether the edges indexed by `subset` form a forest.
    pub fn is_acyclic(&self, subset: &[usize]) -> bool {
        let mut parent: Vec<usize> = (0..self.num_vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &e in subset {
            let (a, b) = self.edges[e];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }
}

fn same_circuits(circuits: &[Vec<usize>], g: &GraphRealization) -> bool {
    // Every matroid circuit must be a graph cycle, and no smaller dependent
    // set may exist in the graph; comparing cycle counts closes the gap.
    let is_cycle = |c: &[usize]| {
        !g.is_acyclic(c)
            && (0..c.len()).all(|i| {
                let t: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &e)| e)
                    .collect();
                g.is_acyclic(&t)
            })
    };
    if !circuits.iter().all(|c| is_cycle(c)) {
        return false;
    }
    let m = g.edges.len();
    let max = circuits
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0)
        .max(g.num_vertices);
    let mut count = 0usize;
    for k in 1..=max.min(m) {
        for s in (0..m).combinations(k) {
            if is_cycle(&s) {
                count += 1;
            }
        }
    }
    count == circuits.len()
}

/// Precomputed fundamental circuits relative to a fixed basis.
struct TreeSearch {
    basis: Vec<usize>,
    /// For each ground element, its nonzero coordinates `(basis position, coefficient)`.
    coords: Vec<Vec<(usize, i64)>>,
    regular: bool,
}

impl TreeSearch {
    fn new(m: &LinearMatroid) -> Self {
        let basis = m.greedy_basis();
        let rat = m.coordinates(&basis);
        let int_coords: Option<Vec<Vec<i64>>> = rat
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        if x.is_integer() {
                            x.to_integer().to_i64()
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let regular = match &int_coords {
            Some(rows) if !basis.is_empty() => {
                let mat = IntMatrix::from_i64_rows(rows).expect("nonempty coordinates");
                is_totally_unimodular(&mat).is_tu
            }
            _ => false,
        };
        let coords = rat
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(p, x)| {
                        let v = if x.is_integer() {
                            x.to_integer().to_i64().unwrap_or(2)
                        } else {
                            2
                        };
                        (p, v)
                    })
                    .collect()
            })
            .collect();
        Self {
            basis,
            coords,
            regular,
        }
    }

    /// Graph from a labeled tree: basis element at position `p` becomes the
    /// edge from vertex `p + 1` to its parent; other elements join the ends
    /// of their fundamental-circuit path.
    fn realize(&self, parent: &[usize]) -> Option<GraphRealization> {
        let n = parent.len();
        let m = self.coords.len();
        let mut edges = vec![(0, 0); m];
        let in_basis: HashMap<usize, usize> = self
            .basis
            .iter()
            .enumerate()
            .map(|(p, &e)| (e, p))
            .collect();
        #[allow(clippy::needless_range_loop)]
        for e in 0..m {
            if let Some(&p) = in_basis.get(&e) {
                edges[e] = (p + 1, parent[p + 1]);
                continue;
            }
            let mut deg = vec![0u8; n];
            for &(p, _) in &self.coords[e] {
                deg[p + 1] += 1;
                deg[parent[p + 1]] += 1;
            }
            if deg.iter().any(|&d| d > 2) {
                return None;
            }
            let ends: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
            let touched = deg.iter().filter(|&&d| d > 0).count();
            match ends.len() {
                0 if self.coords[e].is_empty() => edges[e] = (0, 0),
                2 if touched == self.coords[e].len() + 1 => edges[e] = (ends[0], ends[1]),
                _ => return None,
            }
        }
        Some(GraphRealization {
            num_vertices: n,
            edges,
        })
    }
}

/// All labeled trees on `n` vertices as parent arrays rooted at vertex 0.
fn labeled_trees(n: usize) -> Box<dyn Iterator<Item = Vec<usize>>> {
    if n <= 1 {
        return Box::new(std::iter::once(vec![0; n]));
    }
    if n == 2 {
        return Box::new(std::iter::once(vec![0, 0]));
    }
    let codes = (0..n - 2).map(|_| 0..n).multi_cartesian_product();
    Box::new(codes.map(move |code| prufer_to_parents(&code, n)))
}

fn prufer_to_parents(code: &[usize], n: usize) -> Vec<usize> {
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &c in code {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("Prüfer leaf");
        adj[leaf].push(c);
        adj[c].push(leaf);
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    adj[rest[0]].push(rest[1]);
    adj[rest[1]].push(rest[0]);
    let mut parent = vec![0; n];
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                stack.push(w);
            }
        }
    }
    parent
}

/// Whether some 10 ground elements restrict to a matroid isomorphic to
/// `R10`. Only rank 5 is supported: there an `R10` minor is a restriction.
pub fn has_r10_restriction(m: &LinearMatroid) -> Result<bool> {
    if m.rank() != 5 {
        return Err(Error::Unsupported(format!(
            "R10 detection needs rank 5, matroid has rank {}",
            m.rank()
        )));
    }
    if m.ground_size() < 10 {
        return Ok(false);
    }
    let r10 = LinearMatroid::new(Fixture::R10.matrix());
    let r10_circuits: Vec<u32> = r10.circuits()?.iter().map(|c| mask(c)).collect();
    let r10_profile = size_profile(&r10_circuits);
    let circuits: Vec<u32> = m.circuits()?.iter().map(|c| mask(c)).collect();
    for s in (0..m.ground_size()).combinations(10) {
        let smask = mask(&s);
        let inside: Vec<u32> = circuits
            .iter()
            .copied()
            .filter(|c| c & !smask == 0)
            .collect();
        if size_profile(&inside) != r10_profile {
            continue;
        }
        if m.rank_unchecked(&s) != 5 {
            continue;
        }
        if isomorphic_by_circuits(&s, &inside, &r10_circuits) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn mask(s: &[usize]) -> u32 {
    s.iter().map(|&i| 1u32 << i).sum()
}

fn size_profile(circuits: &[u32]) -> Vec<usize> {
    let mut v: Vec<usize> = circuits.iter().map(|c| c.count_ones() as usize).collect();
    v.sort_unstable();
    v
}

/// Backtracking bijection `elements[i] -> i` onto the 10-element target
/// under which circuit sets correspond.
fn isomorphic_by_circuits(elements: &[usize], circuits: &[u32], target: &[u32]) -> bool {
    let k = elements.len();
    let pos: HashMap<usize, usize> = elements.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    // Re-express source circuits over positions 0..k.
    let src: Vec<u32> = circuits
        .iter()
        .map(|&c| {
            (0..32)
                .filter(|b| c >> b & 1 == 1)
                .map(|b| 1u32 << pos[&b])
                .sum()
        })
        .collect();
    let tgt: HashSet<u32> = target.iter().copied().collect();
    let src_set: HashSet<u32> = src.iter().copied().collect();
    let mut image = vec![usize::MAX; k];
    let mut used = vec![false; k];

    fn map_mask(c: u32, image: &[usize]) -> u32 {
        (0..image.len())
            .filter(|b| c >> b & 1 == 1)
            .map(|b| 1u32 << image[b])
            .sum()
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        k: usize,
        src: &[u32],
        tgt: &HashSet<u32>,
        src_set: &HashSet<u32>,
        target: &[u32],
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == k {
            return true;
        }
        let done: u32 = (1u32 << (i + 1)) - 1;
        for t in 0..k {
            if used[t] {
                continue;
            }
            image[i] = t;
            used[t] = true;
            let assigned_img: u32 = image[..=i].iter().map(|&x| 1u32 << x).sum();
            let forward = src
                .iter()
                .filter(|&&c| c & !done == 0 && c >> i & 1 == 1)
                .all(|&c| tgt.contains(&map_mask(c, image)));
            let backward = forward && {
                let inverse: HashMap<usize, usize> = image[..=i]
                    .iter()
                    .enumerate()
                    .map(|(s, &t)| (t, s))
                    .collect();
                target
                    .iter()
                    .filter(|&&c| c & !assigned_img == 0 && c >> t & 1 == 1)
                    .all(|&c| {
                        let pre: u32 = (0..32)
                            .filter(|b| c >> b & 1 == 1)
                            .map(|b| 1u32 << inverse[&(b as usize)])
                            .sum();
                        src_set.contains(&pre)
                    })
            };
            if backward && go(i + 1, k, src, tgt, src_set, target, image, used) {
                return true;
            }
            used[t] = false;
        }
        image[i] = usize::MAX;
        false
    }
    go(0, k, &src, &tgt, &src_set, target, &mut image, &mut used)
}

/// A directed multigraph without loops. Vertices are `0..num_vertices`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Digraph {
    pub num_vertices: usize,
    pub arrows: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn new(num_vertices: usize, arrows: Vec<(usize, usize)>) -> Result<Self> {
        for &(i, j) in &arrows {
            for v in [i, j] {
                if v >= num_vertices {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        len: num_vertices,
                    });
                }
            }
            if i == j {
                return Err(Error::Domain(format!("loop at vertex {i}")));
            }
        }
        Ok(Self {
            num_vertices,
            arrows,
        })
    }

    /// `e_i - e_j` for every arrow, with the last coordinate dropped.
    pub fn arrow_vectors(&self) -> Vec<IntVector> {
        let d = self.num_vertices;
        self.arrows
            .iter()
            .map(|&(i, j)| {
                let mut v = vec![BigInt::zero(); d];
                v[i] += 1;
                v[j] -= 1;
                v.truncate(d - 1);
                v
            })
            .collect()
    }
}

/// `conv{e_i - e_j : (i, j) an arrow}` in the hyperplane `Σx = 0`,
/// identified with `R^(d-1)` by dropping the last coordinate.
pub fn polytope_from_digraph(g: &Digraph) -> Result<LatticePolytope> {
    if g.arrows.is_empty() {
        return Err(Error::Domain("digraph has no arrows".into()));
    }
    Ok(LatticePolytope::from_points(&IntMatrix::from_rows(
        g.arrow_vectors(),
    )?))
}

/// A digraph whose polytope is unimodularly equivalent to `p`, if any.
///
/// The row matroid of a standard form of `p` is realized over every
/// labeled spanning tree on `n + 1` vertices; for each realization and each
/// orientation of the tree edges, the images of the remaining vertices under
/// the linear map fixed on the basis must be of the form `e_i - e_j`.
pub fn is_sfpdg(p: &LatticePolytope) -> Result<Option<Digraph>> {
    if !p.is_smooth_fano() {
        return Err(Error::Precondition("polytope is not smooth Fano".into()));
    }
    if !is_unimodular_polytope(p) {
        return Ok(None);
    }
    let n = p.dim();
    if n > MAX_TREE_RANK {
        return Err(Error::SearchBound(format!(
            "dimension {n} exceeds {MAX_TREE_RANK}"
        )));
    }
    let basis = p.facets()?[0].vertex_indices.clone();
    let (sf, _) = standard_form_for_basis(p.vertices(), &basis)?;
    // Coordinates of each vertex in the facet basis are the rows of the
    // standard form.
    let coords: Vec<Vec<i64>> = sf
        .iter_rows()
        .map(|r| {
            r.iter()
                .map(|x| x.to_i64().expect("unimodular entries"))
                .collect()
        })
        .collect();
    let m = p.num_vertices();
    let in_basis: HashMap<usize, usize> =
        basis.iter().enumerate().map(|(pos, &e)| (e, pos)).collect();
    let matroid = LinearMatroid::new(sf.clone());
    let search = TreeSearch {
        basis: basis.clone(),
        coords: coords
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(p, &x)| (p, x))
                    .collect()
            })
            .collect(),
        regular: true,
    };
    debug_assert_eq!(matroid.rank(), n);
    for tree in labeled_trees(n + 1) {
        if search.realize(&tree).is_none() {
            continue;
        }
        for orient in 0u32..(1 << n) {
            // Tree edge at basis position q runs child -> parent or back.
            let arrow_of = |q: usize| -> (usize, usize) {
                let (c, par) = (q + 1, tree[q + 1]);
                if orient >> q & 1 == 0 {
                    (c, par)
                } else {
                    (par, c)
                }
            };
            let mut arrows = vec![(0, 0); m];
            let mut ok = true;
            for e in 0..m {
                if let Some(&q) = in_basis.get(&e) {
                    arrows[e] = arrow_of(q);
                    continue;
                }
                let mut w = vec![0i64; n + 1];
                for (q, &c) in coords[e].iter().enumerate() {
                    if c != 0 {
                        let (i, j) = arrow_of(q);
                        w[i] += c;
                        w[j] -= c;
                    }
                }
                let pos: Vec<usize> = (0..=n).filter(|&v| w[v] == 1).collect();
                let neg: Vec<usize> = (0..=n).filter(|&v| w[v] == -1).collect();
                let rest = w.iter().filter(|x| x.abs() > 1).count();
                if pos.len() != 1 || neg.len() != 1 || rest > 0 {
                    ok = false;
                    break;
                }
                arrows[e] = (pos[0], neg[0]);
            }
            if ok {
                return Ok(Some(Digraph::new(n + 1, arrows)?));
            }
        }
    }
    Ok(None)
}
