//! Exact integer and rational linear algebra.
//!
//! Everything here works over arbitrary-precision integers ([`BigInt`]) or
//! exact rationals ([`BigRational`]). Determinants and ranks use fraction-free
//! (Bareiss) elimination, so every intermediate value is itself a minor of the
//! input and no rounding can occur.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer vector (a lattice point, a facet normal, a matrix row).
pub type IntVector = Vec<BigInt>;

/// Builds an [`IntVector`] from machine integers.
pub fn ivec(values: &[i64]) -> IntVector {
    values.iter().map(|&v| BigInt::from(v)).collect()
}

/// Inner product of two integer vectors of equal length.
pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

/// Greatest common divisor of all entries (0 for the zero vector).
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Returns `true` iff the gcd of the entries of `v` is 1.
///
/// The zero vector has no meaningful primitivity and yields a domain error.
pub fn is_primitive(v: &[BigInt]) -> Result<bool> {
    let g = content(v);
    if g.is_zero() {
        return Err(Error::Domain("primitivity of the zero vector".into()));
    }
    Ok(g.is_one())
}

/// Divides a nonzero vector by the gcd of its entries.
pub fn primitive_part(v: &[BigInt]) -> IntVector {
    let g = content(v);
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// A dense matrix of arbitrary-precision integers, stored row-major.
///
/// Rows are the semantically meaningful unit throughout the crate: a row is
/// a vertex of a polytope or a ground element of a matroid.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<BigInt>>", into = "Vec<Vec<BigInt>>")]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl TryFrom<Vec<Vec<BigInt>>> for IntMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        IntMatrix::from_rows(rows)
    }
}

impl From<IntMatrix> for Vec<Vec<BigInt>> {
    fn from(m: IntMatrix) -> Self {
        m.to_rows()
    }
}

impl IntMatrix {
    /// Builds a matrix from rows. All rows must be nonempty and equally long.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Dimension("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(Error::Dimension("matrix needs at least one column".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(Error::Dimension(format!(
                    "row {i} has length {}, expected {c}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Convenience constructor from machine-integer rows.
    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| ivec(r.as_ref())).collect())
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity of size 0");
        let mut data = vec![BigInt::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = BigInt::one();
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[BigInt]> + '_ {
        self.data.chunks(self.cols)
    }

    pub fn column(&self, j: usize) -> IntVector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<IntVector> {
        self.iter_rows().map(<[BigInt]>::to_vec).collect()
    }

    /// Rows as machine integers; `None` if some entry does not fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        use num_traits::ToPrimitive;
        self.iter_rows()
            .map(|r| r.iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if !a.is_zero() {
                        acc += a * other.get(k, j);
                    }
                }
                data.push(acc);
            }
        }
        Ok(IntMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// Row vector times matrix: `v · self`.
    pub fn left_apply(&self, v: &[BigInt]) -> IntVector {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|j| {
                v.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .fold(BigInt::zero(), |acc, (i, x)| acc + x * self.get(i, j))
            })
            .collect()
    }

    /// The submatrix on the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Result<IntMatrix> {
        if rows.is_empty() {
            return Err(Error::Dimension("empty row selection".into()));
        }
        let mut out = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.rows {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    len: self.rows,
                });
            }
            out.push(self.row(r).to_vec());
        }
        IntMatrix::from_rows(out)
    }

    /// Matrix of the columns indexed by `keep`, order preserved.
    pub fn delete_columns(&self, keep: &[usize]) -> Result<IntMatrix> {
        if keep.is_empty() {
            return Err(Error::Dimension("empty column selection".into()));
        }
        if let Some(&bad) = keep.iter().find(|&&j| j >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.cols,
            });
        }
        let rows = self
            .iter_rows()
            .map(|r| keep.iter().map(|&j| r[j].clone()).collect())
            .collect();
        IntMatrix::from_rows(rows)
    }

    /// Submatrix on the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<IntVector> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j).clone()).collect())
            .collect()
    }

    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of a non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(det_rows(self.to_rows()))
    }

    pub fn rank(&self) -> usize {
        rank_rows(self.to_rows())
    }

    /// Exact solution of `self · x = b`, or `None` when `self` is singular.
    pub fn solve_exact(&self, b: &RatVector) -> Result<Option<RatVector>> {
        if !self.is_square() {
            return Err(Error::Dimension("solve_exact needs a square matrix".into()));
        }
        if b.len() != self.rows {
            return Err(Error::Dimension(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.rows
            )));
        }
        let a: Vec<Vec<BigRational>> = self
            .iter_rows()
            .map(|r| {
                r.iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect();
        Ok(solve_rational(a, b.0.clone()).map(RatVector))
    }

    /// Integer inverse of a matrix with determinant ±1.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let d = self.det()?;
        if d.abs() != BigInt::one() {
            return Err(Error::NotUnimodular(d));
        }
        let n = self.rows;
        let mut aug: Vec<Vec<BigRational>> = self
            .iter_rows()
            .enumerate()
            .map(|(i, r)| {
                let mut row: Vec<BigRational> = r
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect();
                row.extend((0..n).map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }));
                row
            })
            .collect();
        gauss_jordan(&mut aug, n);
        let rows = aug
            .into_iter()
            .map(|r| {
                r[n..]
                    .iter()
                    .map(|q| {
                        debug_assert!(q.is_integer());
                        q.to_integer()
                    })
                    .collect()
            })
            .collect();
        IntMatrix::from_rows(rows)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}{}", self.rows, self.cols, self)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.iter_rows().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in r.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// A vector of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatVector(pub Vec<BigRational>);

/// Entries serialize as strings such as `"-3/2"`.
impl Serialize for RatVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|x| x.to_string()))
    }
}

impl RatVector {
    pub fn from_ints(v: &[BigInt]) -> Self {
        RatVector(
            v.iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect(),
        )
    }

    pub fn from_i64(v: &[i64]) -> Self {
        RatVector(
            v.iter()
                .map(|&x| BigRational::from_integer(x.into()))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(BigRational::is_integer)
    }

    /// The integer vector, if every component is integral.
    pub fn to_integers(&self) -> Option<IntVector> {
        self.is_integral()
            .then(|| self.0.iter().map(BigRational::to_integer).collect())
    }

    pub fn dot_int(&self, v: &[BigInt]) -> BigRational {
        self.0
            .iter()
            .zip(v)
            .fold(BigRational::zero(), |acc, (x, y)| {
                acc + x * BigRational::from_integer(y.clone())
            })
    }
}

/// Determinant by Bareiss fraction-free elimination. The empty matrix has
/// determinant 1.
pub fn det_rows(mut a: Vec<IntVector>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = !sign;
                }
                None => return BigInt::zero(),
            }
        }
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for row in tail.iter_mut() {
            for j in k + 1..n {
                let v = &row[j] * &pivot_row[k] - &row[k] * &pivot_row[j];
                row[j] = v / &prev;
            }
        }
        prev = pivot_row[k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Rank over the rationals by fraction-free row echelon elimination.
pub fn rank_rows(mut a: Vec<IntVector>) -> usize {
    let m = a.len();
    if m == 0 {
        return 0;
    }
    let n = a[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (head, tail) = a.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut() {
            for j in col + 1..n {
                let v = &row[j] * &pivot_row[col] - &row[col] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = pivot_row[col].clone();
        rank += 1;
    }
    rank
}

/// Rank of a list of integer vectors given by reference.
pub fn rank_of<'a, I>(rows: I) -> usize
where
    I: IntoIterator<Item = &'a [BigInt]>,
{
    rank_rows(rows.into_iter().map(<[BigInt]>::to_vec).collect())
}

/// Affine dimension of a point set (`-1` is reported as `None` for the
/// empty set).
pub fn affine_dim<'a, I>(points: I) -> Option<usize>
where
    I: IntoIterator<Item = &'a [BigInt]>,
{
    let mut it = points.into_iter();
    let base = it.next()?;
    let diffs: Vec<IntVector> = it
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    Some(rank_rows(diffs))
}

fn gauss_jordan(a: &mut [Vec<BigRational>], n: usize) -> bool {
    let m = a.len();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            return false;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot) {
                *x -= &f * p;
            }
        }
        r += 1;
    }
    true
}

/// Solves a square rational system; `None` when singular.
pub(crate) fn solve_rational(
    a: Vec<Vec<BigRational>>,
    b: Vec<BigRational>,
) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut aug: Vec<Vec<BigRational>> = a
        .into_iter()
        .zip(b)
        .map(|(mut row, bi)| {
            row.push(bi);
            row
        })
        .collect();
    if !gauss_jordan(&mut aug, n) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

/// A primitive integer vector orthogonal to `n - 1` linearly independent
/// vectors in dimension `n` (generalised cross product), or `None` if the
/// vectors are dependent.
pub(crate) fn orthogonal_complement(vectors: &[IntVector], n: usize) -> Option<IntVector> {
    debug_assert_eq!(vectors.len() + 1, n);
    let mut normal = Vec::with_capacity(n);
    for j in 0..n {
        let minor: Vec<IntVector> = vectors
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let d = det_rows(minor);
        normal.push(if j % 2 == 0 { d } else { -d });
    }
    if normal.iter().all(Zero::is_zero) {
        return None;
    }
    Some(primitive_part(&normal))
}
