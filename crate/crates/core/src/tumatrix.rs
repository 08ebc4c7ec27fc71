//! Total unimodularity: brute-force and Ghouila-Houri tests, standard forms,
//! row splitting, matroid duals and k-sums.

use std::collections::HashMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{det_rows, IntMatrix, IntVector};
use crate::par::{self, Execution};
use crate::polytope::LatticePolytope;

/// An offending square submatrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinorWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TUReport {
    pub is_tu: bool,
    pub witness: Option<MinorWitness>,
}

impl TUReport {
    fn ok() -> Self {
        Self {
            is_tu: true,
            witness: None,
        }
    }

    fn fail(rows: Vec<usize>, cols: Vec<usize>, det: BigInt) -> Self {
        Self {
            is_tu: false,
            witness: Some(MinorWitness { rows, cols, det }),
        }
    }
}

/// A signed partition of a row collection whose signed sum stays in
/// `{-1, 0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowSplit {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
    pub sum: IntVector,
}

pub fn is_totally_unimodular(m: &IntMatrix) -> TUReport {
    is_totally_unimodular_with(m, Execution::Sequential)
}

/// Checks every square submatrix, building `k x k` determinants from the
/// memoized `(k-1) x (k-1)` ones by expansion along the last column.
///
/// Every stored minor is already known to lie in `{-1, 0, 1}`, so the
/// expansion runs in machine integers. The reported witness is the first
/// failure in (size, column set, row set) order for either strategy.
pub fn is_totally_unimodular_with(m: &IntMatrix, exec: Execution) -> TUReport {
    for (i, r) in m.iter_rows().enumerate() {
        for (j, x) in r.iter().enumerate() {
            if x.abs() > BigInt::one() {
                return TUReport::fail(vec![i], vec![j], x.clone());
            }
        }
    }
    let (rows, cols) = (m.rows(), m.cols());
    if rows > 64 || cols > 64 {
        return brute_force_bareiss(m);
    }
    let a: Vec<Vec<i8>> = m
        .iter_rows()
        .map(|r| {
            r.iter()
                .map(|x| x.to_i8().expect("entry in {-1,0,1}"))
                .collect()
        })
        .collect();

    // Level 1 memo: single entries.
    let mut prev: HashMap<(u64, u64), i8> = HashMap::new();
    for (i, r) in a.iter().enumerate() {
        for (j, &x) in r.iter().enumerate() {
            prev.insert((1 << i, 1 << j), x);
        }
    }
    for k in 2..=rows.min(cols) {
        let col_sets: Vec<Vec<usize>> = (0..cols).combinations(k).collect();
        let row_sets: Vec<Vec<usize>> = (0..rows).combinations(k).collect();
        let results = par::map(exec, &col_sets, |cs| {
            let last = cs[k - 1];
            let cmask_minor: u64 = cs[..k - 1].iter().map(|&c| 1u64 << c).sum();
            let cmask: u64 = cmask_minor | (1 << last);
            let mut level = Vec::with_capacity(row_sets.len());
            for rs in &row_sets {
                let rmask: u64 = rs.iter().map(|&r| 1u64 << r).sum();
                let mut d: i32 = 0;
                for (pos, &r) in rs.iter().enumerate() {
                    let x = a[r][last];
                    if x == 0 {
                        continue;
                    }
                    let minor = prev[&(rmask & !(1 << r), cmask_minor)] as i32;
                    // Sign of entry (pos, k-1) in the cofactor expansion.
                    let sign = if (pos + k - 1) % 2 == 0 { 1 } else { -1 };
                    d += sign * x as i32 * minor;
                }
                if d.abs() > 1 {
                    return Err((rs.clone(), d));
                }
                level.push(((rmask, cmask), d as i8));
            }
            Ok(level)
        });
        let mut next = HashMap::with_capacity(col_sets.len() * row_sets.len());
        for (cs, res) in col_sets.iter().zip(results) {
            match res {
                Ok(level) => next.extend(level),
                Err((rs, d)) => return TUReport::fail(rs, cs.clone(), BigInt::from(d)),
            }
        }
        prev = next;
    }
    TUReport::ok()
}

fn brute_force_bareiss(m: &IntMatrix) -> TUReport {
    for k in 1..=m.rows().min(m.cols()) {
        for cs in (0..m.cols()).combinations(k) {
            for rs in (0..m.rows()).combinations(k) {
                let d = det_rows(m.submatrix(&rs, &cs));
                if d.abs() > BigInt::one() {
                    return TUReport::fail(rs, cs, d);
                }
            }
        }
    }
    TUReport::ok()
}

/// `M · N⁻¹` where `N` is the vertex basis of facet `k`.
pub fn standard_form(p: &LatticePolytope, facet: usize) -> Result<IntMatrix> {
    let facets = p.facets()?;
    let f = facets.get(facet).ok_or(Error::IndexOutOfRange {
        index: facet,
        len: facets.len(),
    })?;
    Ok(standard_form_for_basis(p.vertices(), &f.vertex_indices)?.0)
}

/// Standard form with respect to an ordered row basis; also returns `N⁻¹`.
pub fn standard_form_for_basis(m: &IntMatrix, basis: &[usize]) -> Result<(IntMatrix, IntMatrix)> {
    if basis.len() != m.cols() {
        return Err(Error::NotSmooth(format!(
            "basis has {} rows, dimension is {}",
            basis.len(),
            m.cols()
        )));
    }
    let n = m.select_rows(basis)?;
    let n_inv = n.inverse_unimodular().map_err(|e| match e {
        Error::NotUnimodular(d) => Error::NotSmooth(format!("facet basis has determinant {d}")),
        other => other,
    })?;
    Ok((m.mul(&n_inv)?, n_inv))
}

/// Finds a signed split of `rows` with signed sum in `{-1, 0, 1}`.
///
/// Contiguous splits (the first `t` rows positive, the rest negative, for
/// `t = k-1, ..., 1`) are tried first, then all sign vectors in
/// lexicographic order with `+` before `-`.
pub fn row_split(m: &IntMatrix, rows: &[usize]) -> Result<RowSplit> {
    for &r in rows {
        if r >= m.rows() {
            return Err(Error::IndexOutOfRange {
                index: r,
                len: m.rows(),
            });
        }
    }
    let a = small_rows(m).ok_or_else(|| Error::NoRowSplit(rows.to_vec()))?;
    let k = rows.len();
    let n = m.cols();
    let valid = |signs: &[bool]| -> Option<Vec<i64>> {
        let mut s = vec![0i64; n];
        for (&r, &plus) in rows.iter().zip(signs) {
            for j in 0..n {
                s[j] += if plus { a[r][j] } else { -a[r][j] };
            }
        }
        s.iter().all(|x| x.abs() <= 1).then_some(s)
    };
    let build = |signs: &[bool], s: Vec<i64>| RowSplit {
        plus: rows
            .iter()
            .zip(signs)
            .filter(|(_, &p)| p)
            .map(|(&r, _)| r)
            .collect(),
        minus: rows
            .iter()
            .zip(signs)
            .filter(|(_, &p)| !p)
            .map(|(&r, _)| r)
            .collect(),
        sum: s.into_iter().map(BigInt::from).collect(),
    };
    for t in (1..k).rev() {
        let signs: Vec<bool> = (0..k).map(|i| i < t).collect();
        if let Some(s) = valid(&signs) {
            return Ok(build(&signs, s));
        }
    }
    for code in 0u64..(1u64 << k) {
        // Bit (k-1-i) set means row i is negative, giving + before - order.
        let signs: Vec<bool> = (0..k).map(|i| code >> (k - 1 - i) & 1 == 0).collect();
        if let Some(s) = valid(&signs) {
            return Ok(build(&signs, s));
        }
    }
    Err(Error::NoRowSplit(rows.to_vec()))
}

fn small_rows(m: &IntMatrix) -> Option<Vec<Vec<i64>>> {
    m.iter_rows()
        .map(|r| r.iter().map(|x| x.to_i64()).collect())
        .collect()
}

/// Total unimodularity via the row-splitting characterisation: every subset
/// of rows admits a split with signed sum in `{-1, 0, 1}`.
pub fn ghouila_houri_is_tu(m: &IntMatrix) -> bool {
    let Some(a) = small_rows(m) else {
        return false;
    };
    if a.iter().flatten().any(|x| x.abs() > 1) {
        return false;
    }
    let rows = m.rows();
    assert!(rows < 32, "row-subset scan limited to fewer than 32 rows");
    let n = m.cols();
    (1u32..(1u32 << rows)).all(|mask| {
        let idx: Vec<usize> = (0..rows).filter(|&r| mask >> r & 1 == 1).collect();
        splits_exist(&a, &idx, n)
    })
}

/// Depth-first sign search with partial sums bounded by the number of rows
/// still to place.
fn splits_exist(a: &[Vec<i64>], idx: &[usize], n: usize) -> bool {
    fn go(a: &[Vec<i64>], idx: &[usize], pos: usize, sum: &mut Vec<i64>) -> bool {
        let left = (idx.len() - pos) as i64;
        if sum.iter().any(|s| s.abs() > 1 + left) {
            return false;
        }
        if pos == idx.len() {
            return true;
        }
        let row = &a[idx[pos]];
        for sign in [1i64, -1] {
            for (s, x) in sum.iter_mut().zip(row) {
                *s += sign * x;
            }
            let ok = go(a, idx, pos + 1, sum);
            for (s, x) in sum.iter_mut().zip(row) {
                *s -= sign * x;
            }
            if ok {
                return true;
            }
        }
        false
    }
    go(a, idx, 0, &mut vec![0; n])
}

/// Matroid dual of a row representation containing an identity block.
///
/// Rows equal to the unit vectors `e_1, ..., e_r` (first occurrence of each)
/// form the basis; with the remaining rows stacked as `Aᵀ`, the dual has
/// rows `-A` on the basis elements and the identity on the others. Row `i`
/// of the output is the same ground element as row `i` of the input. When
/// every element is in the basis the dual has rank 0 and is returned as a
/// single zero column.
pub fn matroid_dual_matrix(m: &IntMatrix) -> Result<IntMatrix> {
    let r = m.cols();
    let mut basis = vec![usize::MAX; r];
    for (i, row) in m.iter_rows().enumerate() {
        let nz: Vec<usize> = (0..r).filter(|&j| !row[j].is_zero()).collect();
        if nz.len() == 1 && row[nz[0]].is_one() && basis[nz[0]] == usize::MAX {
            basis[nz[0]] = i;
        }
    }
    if basis.contains(&usize::MAX) {
        return Err(Error::NoIdentityBlock);
    }
    let others: Vec<usize> = (0..m.rows()).filter(|i| !basis.contains(i)).collect();
    let s = others.len();
    if s == 0 {
        return Ok(IntMatrix::zeros(m.rows(), 1));
    }
    let mut out = vec![vec![BigInt::zero(); s]; m.rows()];
    for (j, &b) in basis.iter().enumerate() {
        for (t, &o) in others.iter().enumerate() {
            out[b][t] = -m.get(o, j);
        }
    }
    for (t, &o) in others.iter().enumerate() {
        out[o][t] = BigInt::one();
    }
    IntMatrix::from_rows(out)
}

/// Glue data of a k-sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Glue {
    One,
    /// `a1` is a column of length `rows(A1)`, `a2` of length `rows(A2)`.
    Two {
        a1: IntVector,
        a2: IntVector,
    },
    Three {
        a1: IntVector,
        b1: IntVector,
        a2: IntVector,
        b2: IntVector,
    },
}

impl Glue {
    pub fn k(&self) -> usize {
        match self {
            Glue::One => 1,
            Glue::Two { .. } => 2,
            Glue::Three { .. } => 3,
        }
    }
}

fn int(x: i64) -> BigInt {
    BigInt::from(x)
}

fn check_len(v: &[BigInt], len: usize, name: &str) -> Result<()> {
    if v.len() != len {
        return Err(Error::Shape(format!(
            "{name} has length {}, expected {len}",
            v.len()
        )));
    }
    Ok(())
}

fn require_tu(m: &IntMatrix, name: &str) -> Result<()> {
    let rep = is_totally_unimodular(m);
    if let Some(w) = rep.witness {
        return Err(Error::NotTotallyUnimodular(format!(
            "{name}: rows {:?} cols {:?} det {}",
            w.rows, w.cols, w.det
        )));
    }
    Ok(())
}

/// The two operand matrices of a k-sum, laid out as in the composition
/// templates (`[[A1, a1], [0, 1]]` and `[[1, 0], [a2, A2]]` for k = 2).
pub fn k_sum_operands(
    a1: &IntMatrix,
    a2: &IntMatrix,
    glue: &Glue,
) -> Result<(IntMatrix, IntMatrix)> {
    let z = BigInt::zero;
    let (r1, r2) = (a1.rows(), a2.rows());
    match glue {
        Glue::One => Ok((a1.clone(), a2.clone())),
        Glue::Two { a1: g1, a2: g2 } => {
            check_len(g1, r1, "a1")?;
            check_len(g2, r2, "a2")?;
            let mut left: Vec<IntVector> = a1
                .iter_rows()
                .zip(g1)
                .map(|(r, g)| [r, std::slice::from_ref(g)].concat())
                .collect();
            left.push((0..a1.cols()).map(|_| z()).chain([int(1)]).collect());
            let mut right: Vec<IntVector> = vec![[int(1)]
                .into_iter()
                .chain((0..a2.cols()).map(|_| z()))
                .collect()];
            right.extend(
                a2.iter_rows()
                    .zip(g2)
                    .map(|(r, g)| [std::slice::from_ref(g), r].concat()),
            );
            Ok((IntMatrix::from_rows(left)?, IntMatrix::from_rows(right)?))
        }
        Glue::Three {
            a1: g1,
            b1: h1,
            a2: g2,
            b2: h2,
        } => {
            check_len(g1, r1, "a1")?;
            check_len(h1, r1, "b1")?;
            check_len(g2, r2, "a2")?;
            check_len(h2, r2, "b2")?;
            let c1 = a1.cols();
            let mut left: Vec<IntVector> = a1
                .iter_rows()
                .enumerate()
                .map(|(i, r)| [r, &[g1[i].clone(), h1[i].clone()]].concat())
                .collect();
            for tail in [[1, 1], [1, 0], [0, 1]] {
                left.push((0..c1).map(|_| z()).chain(tail.map(int)).collect());
            }
            let c2 = a2.cols();
            let mut right: Vec<IntVector> = [[1, 1], [1, 0], [0, 1]]
                .iter()
                .map(|head| {
                    head.map(int)
                        .into_iter()
                        .chain((0..c2).map(|_| z()))
                        .collect()
                })
                .collect();
            right.extend(
                a2.iter_rows()
                    .enumerate()
                    .map(|(i, r)| [&[g2[i].clone(), h2[i].clone()], r].concat()),
            );
            Ok((IntMatrix::from_rows(left)?, IntMatrix::from_rows(right)?))
        }
    }
}

/// Composes `A1` and `A2` by a 1-, 2- or 3-sum:
///
/// ```text
/// 1-sum: [[A1, 0], [0, A2]]
/// 2-sum: [[A1, a1, 0], [0, a2, A2]]
/// 3-sum: [[A1, a1, b1, 0], [0, a2, b2, A2]]
/// ```
///
/// Both operand templates (see [`k_sum_operands`]) must be totally
/// unimodular.
pub fn k_sum(a1: &IntMatrix, a2: &IntMatrix, glue: &Glue) -> Result<IntMatrix> {
    let (left, right) = k_sum_operands(a1, a2, glue)?;
    require_tu(&left, "first operand")?;
    require_tu(&right, "second operand")?;
    let glue_cols: Vec<(&IntVector, &IntVector)> = match glue {
        Glue::One => vec![],
        Glue::Two { a1: g1, a2: g2 } => vec![(g1, g2)],
        Glue::Three {
            a1: g1,
            b1: h1,
            a2: g2,
            b2: h2,
        } => vec![(g1, g2), (h1, h2)],
    };
    let (c1, c2) = (a1.cols(), a2.cols());
    let mut rows: Vec<IntVector> = Vec::with_capacity(a1.rows() + a2.rows());
    for (i, r) in a1.iter_rows().enumerate() {
        let mut row = r.to_vec();
        row.extend(glue_cols.iter().map(|(g, _)| g[i].clone()));
        row.extend((0..c2).map(|_| BigInt::zero()));
        rows.push(row);
    }
    for (i, r) in a2.iter_rows().enumerate() {
        let mut row: IntVector = (0..c1).map(|_| BigInt::zero()).collect();
        row.extend(glue_cols.iter().map(|(_, g)| g[i].clone()));
        row.extend(r.iter().cloned());
        rows.push(row);
    }
    IntMatrix::from_rows(rows)
}

/// Structural graphic test: `M` has one or two nonzeros per column, and a
/// column with two nonzeros holds one `1` and one `-1`; or the same holds
/// for the rows of `M`. Entries must lie in `{-1, 0, 1}`.
pub fn is_graphic_matrix(m: &IntMatrix) -> bool {
    if m.iter_rows().flatten().any(|x| x.abs() > BigInt::one()) {
        return false;
    }
    let line_ok = |line: Vec<&BigInt>| {
        let nz: Vec<&BigInt> = line.into_iter().filter(|x| !x.is_zero()).collect();
        match nz.len() {
            1 => true,
            2 => (nz[0] + nz[1]).is_zero(),
            _ => false,
        }
    };
    let cols_ok = (0..m.cols()).all(|j| line_ok((0..m.rows()).map(|i| m.get(i, j)).collect()));
    let rows_ok = m.iter_rows().all(|r| line_ok(r.iter().collect()));
    cols_ok || rows_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture, Fixture};
    use crate::linalg::ivec;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn tu_examples() {
        assert!(is_totally_unimodular(&fixture("R10").unwrap()).is_tu);
        let rep = is_totally_unimodular(&mat(&[&[1, -1], &[1, 1]]));
        assert!(!rep.is_tu);
        assert_eq!(rep.witness.unwrap().det, BigInt::from(2));
        assert!(is_totally_unimodular(&Fixture::Example3.matrix()).is_tu);
        let rep = is_totally_unimodular(&mat(&[&[1, 2]]));
        assert_eq!(rep.witness.unwrap().cols, vec![1]);
    }

    #[test]
    fn parallel_witness_matches_sequential() {
        let m = mat(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        let a = is_totally_unimodular_with(&m, Execution::Sequential);
        let b = is_totally_unimodular_with(&m, Execution::Parallel);
        assert_eq!(a, b);
        assert_eq!(a.witness.unwrap().det.abs(), BigInt::from(2));
    }

    #[test]
    fn standard_forms() {
        let cross = LatticePolytope::from_i64_rows(&[[1, 0], [0, 1], [-1, 0], [0, -1]]).unwrap();
        let k = cross
            .facets()
            .unwrap()
            .iter()
            .position(|f| f.vertex_indices == vec![0, 1])
            .unwrap();
        assert_eq!(standard_form(&cross, k).unwrap(), cross.vertices().clone());
        let tri = LatticePolytope::from_i64_rows(&[[1, 0], [0, 1], [-1, -1]]).unwrap();
        let (sf, _) = standard_form_for_basis(tri.vertices(), &[0, 1]).unwrap();
        assert_eq!(sf, mat(&[&[1, 0], &[0, 1], &[-1, -1]]));
        let tri2 = LatticePolytope::from_i64_rows(&[[1, 0], [0, 1], [-1, -2]]).unwrap();
        assert!(matches!(
            standard_form_for_basis(tri2.vertices(), &[0, 2]),
            Err(Error::NotSmooth(_))
        ));
        assert!(matches!(
            standard_form(&tri, 7),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn example_one_split() {
        let m = Fixture::Example1.matrix();
        let s = row_split(&m, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(s.plus, vec![0, 1, 2, 3]);
        assert_eq!(s.minus, vec![4, 5]);
        assert_eq!(s.sum, ivec(&[1, -1, 1, 1]));
    }

    #[test]
    fn trivial_and_impossible_splits() {
        let m = Fixture::Example1.matrix();
        let s = row_split(&m, &[2]).unwrap();
        assert_eq!((s.plus, s.minus), (vec![2], vec![]));
        let bad = mat(&[&[1, -1], &[1, 1]]);
        assert!(matches!(
            row_split(&bad, &[0, 1]),
            Err(Error::NoRowSplit(_))
        ));
        assert!(row_split(&bad, &[5]).is_err());
    }

    #[test]
    fn ghouila_houri_examples() {
        // The printed representative lives over GF(3); over the integers it
        // has a 2x2 minor equal to 2.
        assert!(!ghouila_houri_is_tu(&Fixture::K33Dual.matrix()));
        assert!(!is_totally_unimodular(&Fixture::K33Dual.matrix()).is_tu);
        assert!(!ghouila_houri_is_tu(&mat(&[&[1, -1], &[1, 1]])));
        for f in Fixture::ALL {
            let m = f.matrix();
            assert_eq!(
                ghouila_houri_is_tu(&m),
                is_totally_unimodular(&m).is_tu,
                "{}",
                f.name()
            );
        }
    }

    #[test]
    fn dual_of_basis_is_rank_zero() {
        let d = matroid_dual_matrix(&IntMatrix::identity(2)).unwrap();
        assert_eq!(d.rows(), 2);
        assert_eq!(d.rank(), 0);
    }

    #[test]
    fn dual_of_triangle_graph() {
        // Edges e1, e2, e1 - e2 of a triangle on three vertices.
        let m = mat(&[&[1, 0], &[0, 1], &[1, -1]]);
        let d = matroid_dual_matrix(&m).unwrap();
        assert_eq!(d, mat(&[&[-1], &[1], &[1]]));
        assert_eq!(m.rank() + d.rank(), 3);
        assert!(matroid_dual_matrix(&mat(&[&[1, 1], &[2, 0]])).is_err());
    }

    #[test]
    fn k_sums() {
        let i2 = IntMatrix::identity(2);
        let s = k_sum(&i2, &i2, &Glue::One).unwrap();
        assert_eq!(s, IntMatrix::identity(4));
        let one = mat(&[&[1]]);
        let g = Glue::Two {
            a1: ivec(&[1]),
            a2: ivec(&[1]),
        };
        let s = k_sum(&one, &one, &g).unwrap();
        assert_eq!(s, mat(&[&[1, 1, 0], &[0, 1, 1]]));
        assert!(is_totally_unimodular(&s).is_tu);
        let g = Glue::Two {
            a1: ivec(&[1, 1]),
            a2: ivec(&[1]),
        };
        assert!(matches!(k_sum(&one, &one, &g), Err(Error::Shape(_))));
    }

    #[test]
    fn graphic_matrices() {
        assert!(is_graphic_matrix(&mat(&[&[1, -1, 0], &[0, 1, -1]])));
        assert!(!is_graphic_matrix(&fixture("R10").unwrap()));
        assert!(!is_graphic_matrix(&Fixture::Example3.matrix()));
    }
}
