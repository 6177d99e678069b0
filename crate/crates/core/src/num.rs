//! Integer scalars used by the net algebra.
//!
//! Incidence matrices, the state equation and Farkas elimination are generic
//! over any exact signed integer. `i64` is the everyday choice; `BigInt` is
//! used for Farkas intermediate rows, which can grow past machine width.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

/// Exact signed integer usable as a matrix entry.
pub trait Scalar:
    Clone + Debug + Display + Ord + Hash + Integer + Signed + From<i64> + ToPrimitive + Send + Sync
{
    fn from_u64(v: u64) -> Self {
        Self::from(i64::try_from(v).expect("token count exceeds i64"))
    }
}

impl Scalar for i64 {}
impl Scalar for i128 {}
impl Scalar for BigInt {}

/// Greatest common divisor of the absolute values in `row`; zero for an all-zero row.
pub fn row_gcd<S: Scalar>(row: &[S]) -> S {
    row.iter().fold(S::zero(), |g, x| g.gcd(x))
}

/// Divides `row` by its gcd so the entries are coprime.
pub fn normalize_row<S: Scalar>(row: &mut [S]) {
    let g = row_gcd(row);
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x = x.clone() / g.clone();
        }
    }
}
