//! Exact rank and affine dimension by fraction-free (Bareiss) elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::valuation::Valuation;
use crate::value::Value;

/// Clears denominators row by row; scaling a row leaves the rank unchanged.
fn integer_row(row: &[Value]) -> Vec<BigInt> {
    let lcm = row.iter().fold(1i64, |acc, x| acc.lcm(&x.denom()));
    let lcm = BigInt::from(lcm);
    row.iter()
        .map(|x| BigInt::from(x.numer()) * (&lcm / BigInt::from(x.denom())))
        .collect()
}

/// Rank of an integer matrix. Every intermediate entry is a minor of the
/// input, so the divisions are exact.
pub fn rank_bigint(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let (top, rest) = a.split_at_mut(rank + 1);
        let p = &top[rank];
        for row in rest.iter_mut() {
            let f = row[col].clone();
            for c in col + 1..cols {
                let x = &p[col] * &row[c] - &f * &p[c];
                row[c] = x / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Rank over the rationals.
pub fn rank(rows: &[Vec<Value>]) -> usize {
    rank_bigint(rows.iter().map(|r| integer_row(r)).collect())
}

/// Dimension of the affine hull of the given points.
pub fn affine_dimension_of_points(points: &[Vec<Value>]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument("affine dimension of an empty set".into()))?;
    if let Some(bad) = points.iter().find(|p| p.len() != first.len()) {
        return Err(Error::LengthMismatch { expected: first.len(), found: bad.len() });
    }
    let diffs = points[1..]
        .iter()
        .map(|p| {
            p.iter()
                .zip(first)
                .map(|(x, y)| Ok(x.checked_sub(*y)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rank(&diffs))
}

/// Dimension of the affine hull of the valuations' tables.
pub fn affine_dimension(vs: &[Valuation]) -> Result<usize> {
    if vs.is_empty() {
        return Err(Error::InvalidArgument("affine dimension of an empty set".into()));
    }
    if let Some(bad) = vs.iter().find(|v| v.goods() != vs[0].goods()) {
        return Err(Error::GoodsMismatch { left: vs[0].goods(), right: bad.goods() });
    }
    let points: Vec<Vec<Value>> = vs.iter().map(|v| v.table().to_vec()).collect();
    affine_dimension_of_points(&points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::int(x)).collect()
    }

    #[test]
    fn trivial_dimensions() {
        assert_eq!(affine_dimension_of_points(&[ints(&[1, 2, 3])]).unwrap(), 0);
        let pts = [ints(&[0, 0, 0, 0]), ints(&[1, 0, 0, 0]), ints(&[0, 1, 0, 0])];
        assert_eq!(affine_dimension_of_points(&pts).unwrap(), 2);
        assert!(affine_dimension_of_points(&[]).is_err());
    }

    #[test]
    fn rank_with_fractions_and_dependencies() {
        let rows = vec![
            vec![Value::new(1, 2), Value::new(1, 3), Value::ONE],
            vec![Value::ONE, Value::new(2, 3), Value::int(2)],
            vec![Value::ZERO, Value::new(5, 7), Value::int(-1)],
        ];
        assert_eq!(rank(&rows), 2);
        let id: Vec<Vec<Value>> = (0..5)
            .map(|i| (0..5).map(|j| Value::int((i == j) as i64)).collect())
            .collect();
        assert_eq!(rank(&id), 5);
    }

    #[test]
    fn rank_skips_zero_columns() {
        let rows = vec![ints(&[0, 2, 4, 1]), ints(&[0, 1, 2, 3]), ints(&[0, 3, 6, 4])];
        assert_eq!(rank(&rows), 2);
    }
}
