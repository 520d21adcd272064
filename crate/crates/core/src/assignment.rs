//! Assignment valuations: `n` single-unit buyers described by a weight matrix,
//! evaluated by maximum-weight matching, plus the closed form available for
//! monotone (supermodular, row-nonincreasing) square matrices.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{Bundle, MAX_DENSE_GOODS};
use crate::error::{Error, Result};
use crate::valuation::Valuation;
use crate::value::Value;

/// `n × K` matrix of nonnegative weights, `w(i, k)` the value of good `k`
/// to buyer `i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightMatrix {
    rows: usize,
    goods: usize,
    w: Vec<Value>,
}

impl WeightMatrix {
    pub fn new(rows: usize, goods: usize, w: Vec<Value>) -> Result<Self> {
        if w.len() != rows * goods {
            return Err(Error::LengthMismatch { expected: rows * goods, found: w.len() });
        }
        if let Some((index, &value)) = w.iter().enumerate().find(|(_, x)| x.is_negative()) {
            return Err(Error::Negative { index, value });
        }
        Ok(WeightMatrix { rows, goods, w })
    }

    pub fn from_rows(rows: Vec<Vec<Value>>) -> Result<Self> {
        let goods = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != goods) {
            return Err(Error::LengthMismatch { expected: goods, found: bad.len() });
        }
        let n = rows.len();
        WeightMatrix::new(n, goods, rows.into_iter().flatten().collect())
    }

    pub fn from_int_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        WeightMatrix::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| Value::int(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn goods(&self) -> usize {
        self.goods
    }

    /// 0-based buyer and good.
    #[inline]
    pub fn get(&self, buyer: usize, good: usize) -> Value {
        self.w[buyer * self.goods + good]
    }

    pub fn row(&self, buyer: usize) -> &[Value] {
        &self.w[buyer * self.goods..(buyer + 1) * self.goods]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.goods
    }

    fn set(&mut self, buyer: usize, good: usize, x: Value) {
        self.w[buyer * self.goods + good] = x;
    }
}

/// Per-buyer choice: a good (0-based) or the null item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub sigma: Vec<Option<usize>>,
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sigma.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match s {
                Some(g) => write!(f, "{}->{}", i + 1, g + 1)?,
                None => write!(f, "{}->△", i + 1)?,
            }
        }
        Ok(())
    }
}

/// Minimum-cost assignment of every row to a distinct column (`rows <=
/// cols`) by the Hungarian method with exact potentials. Returns the column
/// of each row.
fn hungarian(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> Value) -> Result<Vec<usize>> {
    debug_assert!(rows <= cols);
    let (n, m) = (rows, cols);
    let mut u = vec![Value::ZERO; n + 1];
    let mut v = vec![Value::ZERO; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv: Vec<Option<Value>> = vec![None; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<Value> = None;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1).checked_sub(u[i0])?.checked_sub(v[j])?;
                if minv[j].is_none_or(|x| cur < x) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].expect("just set");
                if delta.is_none_or(|d| mj < d) {
                    delta = Some(mj);
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column always exists");
            for j in 0..=m {
                if used[j] {
                    u[p[j]] = u[p[j]].checked_add(delta)?;
                    v[j] = v[j].checked_sub(delta)?;
                } else if let Some(x) = minv[j].as_mut() {
                    *x = x.checked_sub(delta)?;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            col_of[p[j] - 1] = j - 1;
        }
    }
    Ok(col_of)
}

/// Maximum weight of assigning `buyers` to distinct `goods` or the null item.
fn best_value(w: &WeightMatrix, buyers: &[usize], goods: &[usize]) -> Result<(Value, Vec<Option<usize>>)> {
    let n = buyers.len();
    if n == 0 || goods.is_empty() {
        return Ok((Value::ZERO, vec![None; n]));
    }
    // Columns: the goods, then one private null column per buyer.
    let cols = goods.len() + n;
    let cost = |r: usize, c: usize| {
        if c < goods.len() {
            Value::ZERO.checked_sub(w.get(buyers[r], goods[c])).expect("weights are small")
        } else {
            Value::ZERO
        }
    };
    let col_of = hungarian(n, cols, cost)?;
    let mut total = Value::ZERO;
    let mut sigma = Vec::with_capacity(n);
    for (r, &c) in col_of.iter().enumerate() {
        if c < goods.len() {
            total = total.checked_add(w.get(buyers[r], goods[c]))?;
            sigma.push(Some(goods[c]));
        } else {
            sigma.push(None);
        }
    }
    Ok((total, sigma))
}

fn check_bundle(w: &WeightMatrix, a: Bundle) -> Result<()> {
    if !a.is_subset_of(Bundle::full(w.goods())) {
        return Err(Error::InvalidArgument(format!("bundle {a} has goods beyond {}", w.goods())));
    }
    Ok(())
}

/// Maximum-weight assignment of the goods of `a` to the buyers. Among all
/// optimal assignments the lexicographically smallest `σ` is returned, with
/// goods ordered by index and the null item last.
pub fn eval_assignment(w: &WeightMatrix, a: Bundle) -> Result<(Value, Assignment)> {
    check_bundle(w, a)?;
    let buyers: Vec<usize> = (0..w.rows()).collect();
    let mut free: Vec<usize> = a.goods().collect();
    let (opt, _) = best_value(w, &buyers, &free)?;
    let mut fixed = Value::ZERO;
    let mut sigma = Vec::with_capacity(w.rows());
    for r in 0..w.rows() {
        let rest = &buyers[r + 1..];
        let mut chosen = None;
        for (idx, &g) in free.iter().enumerate() {
            let mut others = free.clone();
            others.remove(idx);
            let with = fixed.checked_add(w.get(r, g))?.checked_add(best_value(w, rest, &others)?.0)?;
            if with == opt {
                chosen = Some((idx, g));
                break;
            }
        }
        match chosen {
            Some((idx, g)) => {
                fixed = fixed.checked_add(w.get(r, g))?;
                free.remove(idx);
                sigma.push(Some(g));
            }
            None => sigma.push(None),
        }
    }
    debug_assert_eq!(fixed, opt);
    Ok((opt, Assignment { sigma }))
}

/// Value of `a` only (no tie-breaking work).
pub fn assignment_value(w: &WeightMatrix, a: Bundle) -> Result<Value> {
    check_bundle(w, a)?;
    let buyers: Vec<usize> = (0..w.rows()).collect();
    let goods: Vec<usize> = a.goods().collect();
    Ok(best_value(w, &buyers, &goods)?.0)
}

/// The full valuation table, one matching per bundle.
pub fn assignment_valuation(w: &WeightMatrix) -> Result<Valuation> {
    if w.goods() > MAX_DENSE_GOODS {
        return Err(Error::TooLarge { goods: w.goods(), limit: MAX_DENSE_GOODS });
    }
    let table = (0..1u32 << w.goods())
        .into_par_iter()
        .map(|m| assignment_value(w, Bundle(m)))
        .collect::<Result<Vec<_>>>()?;
    Valuation::new(w.goods(), table)
}

/// Which listed matrix condition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// `w(i,k) >= 0`.
    Nonnegative,
    /// `w(i+1,k) <= w(i,k)`.
    NonincreasingInRows,
    /// `w(i+1,k+1) - w(i,k+1) - w(i+1,k) + w(i,k) >= 0`.
    Supermodular,
    /// Hat form: zero strictly below the diagonal.
    UpperTriangular,
    /// Hat form: supermodular on squares strictly above the diagonal.
    SupermodularUpper,
    /// Hat form: last column nonincreasing in rows.
    LastColumnNonincreasing,
    /// Hat form: diagonal sums dominate the superdiagonal sums.
    Extension,
}

/// 0-based position of the failure (for `Extension`, `col` is the starting
/// diagonal index).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionFailure {
    pub condition: Condition,
    pub row: usize,
    pub col: usize,
}

fn require_square(w: &WeightMatrix) -> Result<()> {
    if !w.is_square() {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix, got {}×{}",
            w.rows(),
            w.goods()
        )));
    }
    Ok(())
}

fn square_diff(w: &WeightMatrix, i: usize, k: usize) -> Result<Value> {
    Ok(w.get(i + 1, k + 1)
        .checked_sub(w.get(i, k + 1))?
        .checked_sub(w.get(i + 1, k))?
        .checked_add(w.get(i, k))?)
}

/// Conditions 1–3 of the monotone form. Empty means all hold.
pub fn check_monotone_w(w: &WeightMatrix) -> Result<Vec<ConditionFailure>> {
    require_square(w)?;
    let n = w.rows();
    let mut out = Vec::new();
    for i in 0..n {
        for k in 0..n {
            if w.get(i, k).is_negative() {
                out.push(ConditionFailure { condition: Condition::Nonnegative, row: i, col: k });
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        for k in 0..n {
            if w.get(i + 1, k) > w.get(i, k) {
                out.push(ConditionFailure { condition: Condition::NonincreasingInRows, row: i, col: k });
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        for k in 0..n - 1 {
            if square_diff(w, i, k)?.is_negative() {
                out.push(ConditionFailure { condition: Condition::Supermodular, row: i, col: k });
            }
        }
    }
    Ok(out)
}

/// Extension sums `Σ_{t>=k} w(t,t) - Σ_{k<=t<K-1} w(t,t+1)` for `k = 0..K-1`.
fn extension_sums(w: &WeightMatrix) -> Result<Vec<Value>> {
    let n = w.rows();
    let mut out = vec![Value::ZERO; n.saturating_sub(1)];
    let mut acc = if n > 0 { w.get(n - 1, n - 1) } else { Value::ZERO };
    for k in (0..n.saturating_sub(1)).rev() {
        acc = acc.checked_add(w.get(k, k))?.checked_sub(w.get(k, k + 1))?;
        out[k] = acc;
    }
    Ok(out)
}

/// Conditions 0̂–4̂ of the upper-triangular form. Empty means all hold.
pub fn check_hat(w: &WeightMatrix) -> Result<Vec<ConditionFailure>> {
    require_square(w)?;
    let n = w.rows();
    let mut out = Vec::new();
    let mut fail = |condition, row, col| out.push(ConditionFailure { condition, row, col });
    for i in 0..n {
        for k in 0..i {
            if !w.get(i, k).is_zero() {
                fail(Condition::UpperTriangular, i, k);
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            if w.get(i, k).is_negative() {
                fail(Condition::Nonnegative, i, k);
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        for k in i + 1..n - 1 {
            if square_diff(w, i, k)?.is_negative() {
                fail(Condition::SupermodularUpper, i, k);
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        if w.get(i + 1, n - 1) > w.get(i, n - 1) {
            fail(Condition::LastColumnNonincreasing, i, n - 1);
        }
    }
    for (k, s) in extension_sums(w)?.into_iter().enumerate() {
        if s.is_negative() {
            fail(Condition::Extension, k, k);
        }
    }
    Ok(out)
}

/// `v({k_1 < ... < k_L}) = Σ_i w(i, k_i)`, valid for matrices passing either
/// condition set.
pub fn closed_form_eval(w: &WeightMatrix, a: Bundle) -> Result<Value> {
    check_bundle(w, a)?;
    if !check_monotone_w(w)?.is_empty() && !check_hat(w)?.is_empty() {
        return Err(Error::Precondition(
            "matrix satisfies neither the monotone nor the upper-triangular conditions".into(),
        ));
    }
    Ok(Value::sum(a.goods().enumerate().map(|(i, g)| w.get(i, g)))?)
}

/// Fills the strictly lower triangle of an upper-triangular matrix so that
/// every square touching it (including those on the diagonal) has zero
/// supermodular difference. Columns are completed right to left.
pub fn complete_hat(w: &WeightMatrix) -> Result<WeightMatrix> {
    let failures = check_hat(w)?;
    if !failures.is_empty() {
        return Err(Error::Precondition(format!(
            "matrix fails the upper-triangular conditions at {failures:?}"
        )));
    }
    let n = w.rows();
    let mut out = w.clone();
    for k in (0..n.saturating_sub(1)).rev() {
        for i in k..n - 1 {
            let x = out
                .get(i + 1, k + 1)
                .checked_sub(out.get(i, k + 1))?
                .checked_add(out.get(i, k))?;
            out.set(i + 1, k, x);
        }
    }
    Ok(out)
}

/// Random integer matrix satisfying 0̂–4̂, built column by column from the
/// right so that each inequality holds by construction. `spread` bounds the
/// random slack added to every free entry.
pub fn random_hat<R: Rng + ?Sized>(goods: usize, spread: i64, rng: &mut R) -> Result<WeightMatrix> {
    let n = goods;
    let mut w = WeightMatrix::new(n, n, vec![Value::ZERO; n * n])?;
    if n == 0 {
        return Ok(w);
    }
    let slack = |rng: &mut R| Value::int(rng.gen_range(0..=spread));
    // Last column: nonincreasing downwards.
    let mut acc = slack(rng);
    w.set(n - 1, n - 1, acc);
    for i in (0..n - 1).rev() {
        acc = acc.checked_add(slack(rng))?;
        w.set(i, n - 1, acc);
    }
    for k in (0..n - 1).rev() {
        // Diagonal first: large enough for the extension condition at k.
        let mut need = Value::ZERO;
        for t in k..n - 1 {
            need = need.checked_add(w.get(t, t + 1))?;
        }
        for t in k + 1..n {
            need = need.checked_sub(w.get(t, t))?;
        }
        w.set(k, k, need.max(Value::ZERO).checked_add(slack(rng))?);
        for i in (0..k).rev() {
            let floor = w.get(i, k + 1).checked_add(w.get(i + 1, k))?.checked_sub(w.get(i + 1, k + 1))?;
            w.set(i, k, floor.max(Value::ZERO).checked_add(slack(rng))?);
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::{aggregate, single_unit};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn example_w() -> WeightMatrix {
        WeightMatrix::from_int_rows(&[
            [32, 35, 25, 26, 22],
            [24, 30, 20, 21, 19],
            [16, 22, 14, 16, 14],
            [9, 15, 7, 9, 9],
            [2, 8, 1, 4, 5],
        ])
        .unwrap()
    }

    pub(crate) fn example_w_hat() -> WeightMatrix {
        WeightMatrix::from_int_rows(&[
            [32, 35, 25, 26, 22],
            [0, 30, 20, 21, 19],
            [0, 0, 14, 16, 14],
            [0, 0, 0, 9, 9],
            [0, 0, 0, 0, 5],
        ])
        .unwrap()
    }

    /// Exhaustive search over all assignments.
    fn brute(w: &WeightMatrix, a: Bundle) -> Value {
        fn go(w: &WeightMatrix, r: usize, free: Bundle) -> Value {
            if r == w.rows() {
                return Value::ZERO;
            }
            let mut best = go(w, r + 1, free);
            for g in free.goods() {
                best = best.max(w.get(r, g).checked_add(go(w, r + 1, free.without(g))).unwrap());
            }
            best
        }
        go(w, 0, a)
    }

    #[test]
    fn empty_bundle() {
        let (v, s) = eval_assignment(&example_w(), Bundle::EMPTY).unwrap();
        assert_eq!(v, Value::ZERO);
        assert!(s.sigma.iter().all(Option::is_none));
    }

    #[test]
    fn example_values() {
        let w = example_w();
        let (v, s) = eval_assignment(&w, Bundle::from_goods([0, 1])).unwrap();
        assert_eq!(v, Value::int(62));
        assert_eq!(&s.sigma[..2], &[Some(0), Some(1)]);
        let (v, s) = eval_assignment(&w, Bundle::from_goods([1, 3, 4])).unwrap();
        assert_eq!(v, Value::int(70));
        assert_eq!(&s.sigma[..3], &[Some(1), Some(3), Some(4)]);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=4);
            let k = rng.gen_range(1..=5);
            let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..k).map(|_| rng.gen_range(0..6)).collect()).collect();
            let w = WeightMatrix::from_int_rows(&rows).unwrap();
            for m in 0..1u32 << k {
                let (v, s) = eval_assignment(&w, Bundle(m)).unwrap();
                assert_eq!(v, brute(&w, Bundle(m)));
                let total = Value::sum(s.sigma.iter().enumerate().filter_map(|(r, g)| g.map(|g| w.get(r, g)))).unwrap();
                assert_eq!(total, v);
            }
        }
    }

    #[test]
    fn lexicographic_tie_break() {
        // Every assignment of two goods to two identical buyers ties.
        let w = WeightMatrix::from_int_rows(&[[1, 1], [1, 1]]).unwrap();
        let (_, s) = eval_assignment(&w, Bundle(0b11)).unwrap();
        assert_eq!(s.sigma, vec![Some(0), Some(1)]);
        // Buyer 1 may take good 1 or stay out; good 1 is preferred.
        let w = WeightMatrix::from_int_rows(&[[0], [3]]).unwrap();
        let (_, s) = eval_assignment(&w, Bundle(0b1)).unwrap();
        assert_eq!(s.sigma, vec![None, Some(0)]);
    }

    #[test]
    fn single_row_is_single_unit() {
        let w = WeightMatrix::from_int_rows(&[[4, 0, 7, 2]]).unwrap();
        let row: Vec<Value> = w.row(0).to_vec();
        assert_eq!(assignment_valuation(&w).unwrap(), single_unit(&row).unwrap());
    }

    #[test]
    fn equals_aggregated_rows() {
        let w = WeightMatrix::from_int_rows(&[[3, 1, 4, 1], [5, 9, 2, 6], [5, 3, 5, 8]]).unwrap();
        let su = |r: usize| single_unit(w.row(r)).unwrap();
        let agg = aggregate(&aggregate(&su(0), &su(1)).unwrap(), &su(2)).unwrap();
        assert_eq!(assignment_valuation(&w).unwrap(), agg);
    }

    #[test]
    fn example_conditions() {
        assert!(check_monotone_w(&example_w()).unwrap().is_empty());
        assert!(check_hat(&example_w_hat()).unwrap().is_empty());
        let mut bad = example_w_hat();
        bad.set(4, 4, Value::int(10));
        let f = check_hat(&bad).unwrap();
        assert!(f.iter().any(|x| x.condition == Condition::LastColumnNonincreasing));
        assert!(check_hat(&WeightMatrix::from_int_rows(&[[1, 2]]).unwrap()).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let w = example_w();
        assert_eq!(closed_form_eval(&w, Bundle::singleton(1)).unwrap(), Value::int(35));
        assert_eq!(closed_form_eval(&w, Bundle::full(5)).unwrap(), Value::int(90));
        for wm in [example_w(), example_w_hat()] {
            for m in 1..32u32 {
                let b = Bundle(m);
                assert_eq!(closed_form_eval(&wm, b).unwrap(), assignment_value(&wm, b).unwrap());
            }
        }
        let plain = WeightMatrix::from_int_rows(&[[0, 5], [5, 0]]).unwrap();
        assert!(closed_form_eval(&plain, Bundle(0b11)).is_err());
    }

    #[test]
    fn completion_of_example_hat() {
        let full = complete_hat(&example_w_hat()).unwrap();
        assert!(check_monotone_w(&full).unwrap().is_empty());
        let last: Vec<Value> = full.row(4).to_vec();
        assert_eq!(last, [10, 13, 3, 5, 5].map(Value::int).to_vec());
        assert_eq!(&last[..4], &extension_sums(&example_w_hat()).unwrap()[..]);
        assert_eq!(assignment_valuation(&full).unwrap(), assignment_valuation(&example_w_hat()).unwrap());
    }

    #[test]
    fn completion_keeps_full_matrix() {
        // Zero differences on and below the diagonal already.
        let w = WeightMatrix::from_int_rows(&[[5, 4, 3], [4, 3, 2], [3, 2, 1]]).unwrap();
        assert!(check_hat(&w).unwrap().iter().all(|f| f.condition == Condition::UpperTriangular));
        let mut hat = w.clone();
        for i in 0..3 {
            for k in 0..i {
                hat.set(i, k, Value::ZERO);
            }
        }
        assert_eq!(complete_hat(&hat).unwrap(), w);
    }

    #[test]
    fn random_hats_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=6 {
            for _ in 0..20 {
                let w = random_hat(k, 5, &mut rng).unwrap();
                assert!(check_hat(&w).unwrap().is_empty(), "{w:?}");
                for m in 0..1u32 << k {
                    assert_eq!(closed_form_eval(&w, Bundle(m)).unwrap(), brute(&w, Bundle(m)));
                }
            }
        }
    }
}
