//! Matrices printed in the literature on unimodular smooth Fano polytopes,
//! stored exactly as printed (rows are vertices / ground elements).

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fixture {
    /// Representative matrix of the regular matroid R10 (10 x 5).
    R10,
    /// m*(K5), representative of the dual of the cycle matroid of K5 (10 x 6).
    K5Dual,
    /// m*(K3,3) (8 x 4). A GF(3) representative: over the integers it is not
    /// totally unimodular.
    K33Dual,
    /// 6 x 4 totally unimodular matrix used to illustrate row splitting.
    Example1,
    /// The 4-dimensional USFP whose row matroid contains m*(K3,3) (9 x 4).
    /// As printed, row 3 breaks unimodularity; see [`example2_amended`].
    Example2,
    /// A 6-dimensional USFP with a non-graphic matrix (11 x 6).
    Example3,
}

impl Fixture {
    pub const ALL: [Fixture; 6] = [
        Fixture::R10,
        Fixture::K5Dual,
        Fixture::K33Dual,
        Fixture::Example1,
        Fixture::Example2,
        Fixture::Example3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::R10 => "R10",
            Fixture::K5Dual => "K5dual",
            Fixture::K33Dual => "K33dual",
            Fixture::Example1 => "example1",
            Fixture::Example2 => "example2",
            Fixture::Example3 => "example3",
        }
    }

    pub fn matrix(self) -> IntMatrix {
        let rows: &[&[i64]] = match self {
            Fixture::R10 => &[
                &[1, 0, 0, 0, 0],
                &[0, 1, 0, 0, 0],
                &[0, 0, 1, 0, 0],
                &[0, 0, 0, 1, 0],
                &[0, 0, 0, 0, 1],
                &[-1, 1, 0, 0, 1],
                &[1, -1, 1, 0, 0],
                &[0, 1, -1, 1, 0],
                &[0, 0, 1, -1, 1],
                &[1, 0, 0, 1, -1],
            ],
            Fixture::K5Dual => &[
                &[0, 0, 1, 0, -1, 1],
                &[0, 1, 0, -1, 0, -1],
                &[-1, 0, 0, 1, 1, 0],
                &[1, -1, -1, 0, 0, 0],
                &[1, 0, 0, 0, 0, 0],
                &[0, 1, 0, 0, 0, 0],
                &[0, 0, 1, 0, 0, 0],
                &[0, 0, 0, 1, 0, 0],
                &[0, 0, 0, 0, 1, 0],
                &[0, 0, 0, 0, 0, 1],
            ],
            Fixture::K33Dual => &[
                &[0, 1, -1, -1],
                &[0, -1, 1, 0],
                &[-1, 0, 1, 0],
                &[-1, 1, 0, 1],
                &[1, 0, 0, 0],
                &[0, 1, 0, 0],
                &[0, 0, 1, 0],
                &[0, 0, 0, 1],
            ],
            Fixture::Example1 => &[
                &[-1, 1, 0, 1],
                &[1, 0, 1, -1],
                &[0, -1, 0, 0],
                &[1, -1, 0, 0],
                &[0, 0, 1, -1],
                &[0, 0, -1, 0],
            ],
            Fixture::Example2 => &[
                &[0, 1, -1, 1],
                &[0, 0, -1, 0],
                &[1, 1, -1, 0],
                &[0, 1, 0, 1],
                &[0, 0, 0, -1],
                &[-1, 0, 0, 0],
                &[-1, 1, 0, 0],
                &[0, -1, 0, 0],
                &[1, -1, 1, -1],
            ],
            Fixture::Example3 => &[
                &[-1, -1, 0, 0, 0, 0],
                &[-1, 0, -1, 0, 0, 1],
                &[0, -1, 0, -1, -1, -1],
                &[0, 0, -1, -1, 0, 0],
                &[0, 0, 0, 0, 0, 1],
                &[0, 0, 0, 0, 1, 0],
                &[0, 0, 0, 1, 0, 0],
                &[0, 0, 1, 0, 0, 0],
                &[0, 1, 0, 0, 0, 0],
                &[1, 0, 0, 0, 0, 0],
                &[1, 1, 1, 1, 1, 0],
            ],
        };
        IntMatrix::from_i64_rows(rows).expect("fixture matrices are well formed")
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fixture::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownFixture(s.to_string()))
    }
}

/// Looks a fixture up by name (`R10`, `K5dual`, `K33dual`, `example1`,
/// `example2`, `example3`; case-insensitive).
pub fn fixture(name: &str) -> Result<IntMatrix> {
    Ok(name.parse::<Fixture>()?.matrix())
}

pub fn r10() -> IntMatrix {
    Fixture::R10.matrix()
}

/// The `example2` matrix with row 3 replaced by `(1, -1, 1, 0)`.
///
/// The printed row `(1, 1, -1, 0)` gives 4 x 4 minors of 2 and 3. This is the
/// only single-row replacement that yields a unimodular smooth Fano
/// polytope, and the result is equivalent to the one bundled 4-dimensional
/// corpus entry that is a USFP but not an SFPdG.
pub fn example2_amended() -> IntMatrix {
    let mut rows = Fixture::Example2.matrix().to_rows();
    rows[2] = crate::linalg::ivec(&[1, -1, 1, 0]);
    IntMatrix::from_rows(rows).expect("well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn r10_rows_sum_to_one() {
        for row in r10().iter_rows() {
            assert_eq!(row.iter().sum::<BigInt>(), BigInt::from(1));
        }
    }

    #[test]
    fn shapes() {
        let shape = |f: Fixture| (f.matrix().rows(), f.matrix().cols());
        assert_eq!(shape(Fixture::R10), (10, 5));
        assert_eq!(shape(Fixture::K5Dual), (10, 6));
        assert_eq!(shape(Fixture::K33Dual), (8, 4));
        assert_eq!(shape(Fixture::Example1), (6, 4));
        assert_eq!(shape(Fixture::Example2), (9, 4));
        assert_eq!(shape(Fixture::Example3), (11, 6));
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(fixture("r10").unwrap(), r10());
        assert_eq!(fixture("K33dual").unwrap(), Fixture::K33Dual.matrix());
        assert!(matches!(fixture("petersen"), Err(Error::UnknownFixture(_))));
    }
}
