//! Verdicts on valuations: monotonicity, submodularity, the triple condition
//! `S3`, the four-good condition `F4`, demand sets, a randomized falsifier
//! for the price-based substitutes definition, and witness prices.

use std::fmt;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{bundles_of_size, pairs_outside, triples_outside, Bundle, MAX_DENSE_GOODS};
use crate::error::{Error, Result};
use crate::valuation::{InteractionFunction, PriceVector, SetFunction, Valuation};
use crate::value::Value;

/// True iff at least two of the three numbers equal their minimum.
pub fn double_min(x: Value, y: Value, z: Value) -> bool {
    let m = x.min(y).min(z);
    (x == m) as u8 + (y == m) as u8 + (z == m) as u8 >= 2
}

/// True iff at least two of the three numbers equal their maximum.
pub fn double_max(x: Value, y: Value, z: Value) -> bool {
    let m = x.max(y).max(z);
    (x == m) as u8 + (y == m) as u8 + (z == m) as u8 >= 2
}

/// Constraint family of a violation. Ordered as reports are sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    Monotone,
    Submodular,
    S3 { level: usize },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Monotone => write!(f, "monotone"),
            Family::Submodular => write!(f, "submodular"),
            Family::S3 { level } => write!(f, "S3({level})"),
        }
    }
}

/// One failing constraint instance.
///
/// * monotone: `goods = [i]`, `values = [v(A), v(Ai)]`
/// * submodular: `goods = [i, j]`, `values = [δ_{ij|A}]`
/// * S3: `goods = [i, j, k]`, `values = [v(Aij)+v(Ak), v(Aik)+v(Aj), v(Ajk)+v(Ai)]`
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub family: Family,
    pub base: Bundle,
    pub goods: Vec<usize>,
    pub values: Vec<Value>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let goods: Vec<String> = self.goods.iter().map(|g| (g + 1).to_string()).collect();
        let values: Vec<String> = self.values.iter().map(Value::to_string).collect();
        match self.family {
            Family::Submodular => write!(
                f,
                "submodular: δ_{{{}|A}} = {} < 0 at A={}",
                goods.join(","),
                values[0],
                self.base
            ),
            _ => write!(
                f,
                "{}: A={} goods ({}) values ({})",
                self.family,
                self.base,
                goods.join(","),
                values.join(", ")
            ),
        }
    }
}

/// Complete verdict for a valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub monotone: bool,
    pub submodular: bool,
    pub s3: bool,
    pub substitute: bool,
    /// All violations, in canonical order (family, then `A` mask, then goods).
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "monotone: {}", self.monotone)?;
        writeln!(f, "submodular: {}", self.submodular)?;
        writeln!(f, "S3: {}", self.s3)?;
        writeln!(f, "substitute: {}", self.substitute)?;
        writeln!(f, "violations: {}", self.violations.len())?;
        if let Some(v) = self.first() {
            writeln!(f, "first: {v}")?;
        }
        Ok(())
    }
}

fn require_dense<F: SetFunction + ?Sized>(v: &F) -> Result<()> {
    if v.goods() > MAX_DENSE_GOODS {
        return Err(Error::TooLarge { goods: v.goods(), limit: MAX_DENSE_GOODS });
    }
    Ok(())
}

fn require_level(goods: usize, level: usize, min: usize, max: usize) -> Result<()> {
    if level < min || level > max || max < min {
        return Err(Error::LevelOutOfRange { level, min, max: max.max(min).min(goods) });
    }
    Ok(())
}

fn violations_at<F: SetFunction + ?Sized>(v: &F, base: Bundle) -> Result<Vec<Violation>> {
    let k = v.goods();
    let mut out = Vec::new();
    let va = v.value(base);
    for g in base.complement_goods(k) {
        let vg = v.value(base.with(g));
        if vg < va {
            out.push(Violation {
                family: Family::Monotone,
                base,
                goods: vec![g],
                values: vec![va, vg],
            });
        }
    }
    for (i, j) in pairs_outside(base, k) {
        let d = v
            .value(base.with(i))
            .checked_add(v.value(base.with(j)))?
            .checked_sub(v.value(base.with(i).with(j)))?
            .checked_sub(va)?;
        if d.is_negative() {
            out.push(Violation {
                family: Family::Submodular,
                base,
                goods: vec![i, j],
                values: vec![d],
            });
        }
    }
    let level = base.len() + 2;
    if level < k {
        for (i, j, l) in triples_outside(base, k) {
            let t = s3_triple_v(v, base, i, j, l)?;
            if !double_max(t[0], t[1], t[2]) {
                out.push(Violation {
                    family: Family::S3 { level },
                    base,
                    goods: vec![i, j, l],
                    values: t.to_vec(),
                });
            }
        }
    }
    Ok(out)
}

fn s3_triple_v<F: SetFunction + ?Sized>(
    v: &F,
    a: Bundle,
    i: usize,
    j: usize,
    k: usize,
) -> Result<[Value; 3]> {
    let val = |b: Bundle| v.value(b);
    Ok([
        val(a.with(i).with(j)).checked_add(val(a.with(k)))?,
        val(a.with(i).with(k)).checked_add(val(a.with(j)))?,
        val(a.with(j).with(k)).checked_add(val(a.with(i)))?,
    ])
}

/// Exhaustive check of monotonicity, local submodularity and `S3(L)` for
/// `2 <= L <= K-1`. Nothing is short-circuited.
pub fn check_valuation<F: SetFunction + Sync + ?Sized>(v: &F) -> Result<CheckReport> {
    require_dense(v)?;
    let per_base: Vec<Vec<Violation>> = (0..1u32 << v.goods())
        .into_par_iter()
        .map(|m| violations_at(v, Bundle(m)))
        .collect::<Result<_>>()?;
    let mut violations: Vec<Violation> = per_base.into_iter().flatten().collect();
    violations.sort();
    let monotone = !violations.iter().any(|x| x.family == Family::Monotone);
    let submodular = !violations.iter().any(|x| x.family == Family::Submodular);
    let s3 = !violations.iter().any(|x| matches!(x.family, Family::S3 { .. }));
    Ok(CheckReport {
        monotone,
        submodular,
        s3,
        substitute: monotone && submodular && s3,
        violations,
    })
}

/// Convenience: monotone, submodular and `S3`.
pub fn is_substitute<F: SetFunction + Sync + ?Sized>(v: &F) -> Result<bool> {
    Ok(check_valuation(v)?.substitute)
}

/// Local submodularity `v(Aij) - v(Ai) - v(Aj) + v(A) <= 0` everywhere.
pub fn is_submodular(v: &Valuation) -> Result<bool> {
    delta_nonnegative(v)
}

/// `δ_{ij|A} >= 0` for every valid `(i, j, A)`.
pub fn delta_nonnegative(v: &Valuation) -> Result<bool> {
    for a in v.bundles() {
        for (i, j) in pairs_outside(a, v.goods()) {
            if crate::valuation::delta(v, i, j, a)?.is_negative() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `θ(Aij) + θ(A) >= θ(Ai) + θ(Aj)` everywhere.
pub fn theta_supermodular(f: &InteractionFunction) -> Result<bool> {
    for m in 0..1u32 << f.goods() {
        let a = Bundle(m);
        for (i, j) in pairs_outside(a, f.goods()) {
            let lhs = f.theta(a.with(i).with(j)).checked_add(f.theta(a))?;
            let rhs = f.theta(a.with(i)).checked_add(f.theta(a.with(j)))?;
            if lhs < rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Monotonicity read off `(θ, μ)`: `μ(k) >= max_{A∌k} θ(Ak) - θ(A)`.
pub fn monotone_by_mu(f: &InteractionFunction) -> Result<bool> {
    for k in 0..f.goods() {
        for m in 0..1u32 << f.goods() {
            let a = Bundle(m);
            if a.contains(k) {
                continue;
            }
            if f.theta(a.with(k)).checked_sub(f.theta(a))? > f.mu()[k] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `S3(L)` on `v` (double maximum form).
pub fn s3_holds(v: &Valuation, level: usize) -> Result<bool> {
    let k = v.goods();
    require_level(k, level, 2, k.saturating_sub(1))?;
    for a in bundles_of_size(k, level - 2) {
        for (i, j, l) in triples_outside(a, k) {
            let t = s3_triple_v(v, a, i, j, l)?;
            if !double_max(t[0], t[1], t[2]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `S3_θ(L)`: `(θ(Aij)+θ(Ak), θ(Aik)+θ(Aj), θ(Ajk)+θ(Ai))` has a double minimum.
pub fn s3_theta_holds(f: &InteractionFunction, level: usize) -> Result<bool> {
    let k = f.goods();
    require_level(k, level, 2, k.saturating_sub(1))?;
    for a in bundles_of_size(k, level - 2) {
        for (i, j, l) in triples_outside(a, k) {
            let t = |x: usize, y: usize, z: usize| {
                f.theta(a.with(x).with(y)).checked_add(f.theta(a.with(z)))
            };
            if !double_min(t(i, j, l)?, t(i, l, j)?, t(j, l, i)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `S3_δ(L)`: `(δ_{ij|A}, δ_{ik|A}, δ_{jk|A})` has a double minimum.
pub fn s3_delta_holds(v: &Valuation, level: usize) -> Result<bool> {
    use crate::valuation::delta;
    let k = v.goods();
    require_level(k, level, 2, k.saturating_sub(1))?;
    for a in bundles_of_size(k, level - 2) {
        for (i, j, l) in triples_outside(a, k) {
            if !double_min(delta(v, i, j, a)?, delta(v, i, l, a)?, delta(v, j, l, a)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// First `(A, [i,j,k,l])` in canonical order where `F4_θ(L)` fails.
pub fn first_f4_violation(
    f: &InteractionFunction,
    level: usize,
) -> Result<Option<(Bundle, [usize; 4])>> {
    let k = f.goods();
    require_level(k, level, 2, k.saturating_sub(2))?;
    for a in bundles_of_size(k, level - 2) {
        let free: Vec<usize> = a.complement_goods(k).collect();
        let n = free.len();
        for p in 0..n {
            for q in p + 1..n {
                for r in q + 1..n {
                    for s in r + 1..n {
                        let (i, j, kk, l) = (free[p], free[q], free[r], free[s]);
                        let t = |x: usize, y: usize, z: usize, w: usize| {
                            f.theta(a.with(x).with(y)).checked_add(f.theta(a.with(z).with(w)))
                        };
                        if !double_min(t(i, j, kk, l)?, t(i, kk, j, l)?, t(i, l, j, kk)?) {
                            return Ok(Some((a, [i, j, kk, l])));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// `F4_θ(L)` for `2 <= L <= K-2`.
pub fn check_f4(f: &InteractionFunction, level: usize) -> Result<bool> {
    Ok(first_f4_violation(f, level)?.is_none())
}

/// Bundles maximizing `v(A) - p·A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandSet {
    /// Ascending by mask.
    pub bundles: Vec<Bundle>,
    pub payoff: Value,
}

impl DemandSet {
    pub fn contains(&self, b: Bundle) -> bool {
        self.bundles.binary_search(&b).is_ok()
    }
}

fn payoffs(v: &Valuation, p: &PriceVector) -> Result<Vec<Value>> {
    if p.len() != v.goods() {
        return Err(Error::LengthMismatch { expected: v.goods(), found: p.len() });
    }
    let mut cost = vec![Value::ZERO; 1 << v.goods()];
    for b in v.bundles().skip(1) {
        let g = b.goods().next().expect("nonempty");
        cost[b.index()] = cost[b.without(g).index()].checked_add(p[g])?;
    }
    v.bundles()
        .map(|b| Ok(v.get(b).checked_sub(cost[b.index()])?))
        .collect()
}

fn argmax(payoffs: &[Value]) -> DemandSet {
    let best = *payoffs.iter().max().expect("∅ is always present");
    DemandSet {
        bundles: (0..payoffs.len() as u32)
            .filter(|&m| payoffs[m as usize] == best)
            .map(Bundle)
            .collect(),
        payoff: best,
    }
}

/// Exact demand correspondence `D(p)`.
pub fn demand(v: &Valuation, p: &PriceVector) -> Result<DemandSet> {
    Ok(argmax(&payoffs(v, p)?))
}

/// Per-pair test of the price-based definition, for `p <= q`: every
/// `A ∈ D(p)` must be matched by some `A' ∈ D(q)` containing the goods of
/// `A` whose price did not change. Returns the first unmatched `A`.
pub fn definition_holds(v: &Valuation, p: &PriceVector, q: &PriceVector) -> Result<Option<Bundle>> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: q.len() });
    }
    if (0..p.len()).any(|k| q[k] < p[k]) {
        return Err(Error::Precondition("q must dominate p".into()));
    }
    let unchanged = Bundle::from_goods((0..p.len()).filter(|&k| p[k] == q[k]));
    let dp = demand(v, p)?;
    let dq = demand(v, q)?;
    Ok(dp.bundles.into_iter().find(|&a| {
        let keep = Bundle(a.mask() & unchanged.mask());
        !dq.bundles.iter().any(|&b| keep.is_subset_of(b))
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Pass,
    Fail { p: PriceVector, q: PriceVector, bundle: Bundle },
}

impl OracleVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, OracleVerdict::Pass)
    }
}

/// Largest number of goods the randomized oracle accepts.
pub const ORACLE_MAX_GOODS: usize = 8;

/// Randomized falsifier for the price-based definition. Prices are drawn on
/// the quarter grid `{j/4 : 0 <= j <= 4M}` with `M = 1 + ⌈max v({k})⌉`; half
/// the trials add a sub-grid perturbation in multiples of `1/64`. Each good's
/// price is either kept or raised when forming `q`. A `Pass` verdict only
/// means no counterexample was found.
pub fn oracle_definition(v: &Valuation, trials: usize, seed: u64) -> Result<OracleVerdict> {
    let k = v.goods();
    if k > ORACLE_MAX_GOODS {
        return Err(Error::TooLarge { goods: k, limit: ORACLE_MAX_GOODS });
    }
    let top = v.singletons().into_iter().max().unwrap_or(Value::ZERO).max(Value::ZERO);
    let steps = 4 * (1 + Integer::div_ceil(&top.numer(), &top.denom()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let perturb = rng.gen_bool(0.5);
        let draw = |rng: &mut ChaCha8Rng, min_steps: i64| {
            let j = rng.gen_range(min_steps..=steps);
            let r = if perturb { rng.gen_range(0..16) } else { 0 };
            Value::new(16 * j + r, 64)
        };
        let p: Vec<Value> = (0..k).map(|_| draw(&mut rng, 0)).collect();
        let mut q = p.clone();
        for qk in q.iter_mut() {
            if rng.gen_bool(0.5) {
                *qk = qk.checked_add(draw(&mut rng, 1))?;
            }
        }
        let (p, q) = (PriceVector::new(p)?, PriceVector::new(q)?);
        if let Some(bundle) = definition_holds(v, &p, &q)? {
            return Ok(OracleVerdict::Fail { p, q, bundle });
        }
    }
    Ok(OracleVerdict::Pass)
}

/// Explicit price pair `(p, q)`, `p <= q`, exhibiting failure of the
/// price-based definition for a submodularity failure or a level-2 triple
/// failure, both at `A = ∅`.
pub fn witness_prices(v: &Valuation, violation: &Violation) -> Result<(PriceVector, PriceVector)> {
    if !violation.base.is_empty() {
        return Err(Error::NotConstructible(format!(
            "only violations at A=∅ are supported, got A={}",
            violation.base
        )));
    }
    let k = v.goods();
    let max_abs = v
        .table()
        .iter()
        .map(|x| if x.is_negative() { x.checked_neg() } else { Ok(*x) })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .max()
        .unwrap_or(Value::ZERO);
    let max_v = v.table().iter().copied().max().unwrap_or(Value::ZERO).max(Value::ZERO);
    let high = max_v.checked_add(Value::ONE)?;
    let raise = Value::int(10).checked_mul(max_abs.max(Value::ONE))?;
    let single = |g: usize| v.get(Bundle::singleton(g));

    let (p, q) = match (violation.family, violation.goods.as_slice()) {
        (Family::Submodular, &[i, j]) => {
            if single(i).is_negative() || single(j).is_negative() {
                return Err(Error::NotConstructible("negative singleton value".into()));
            }
            let s = v
                .get(Bundle::from_goods([i, j]))
                .checked_sub(single(i))?
                .checked_sub(single(j))?;
            let shift = s.checked_mul(Value::new(2, 5))?;
            let mut p = vec![high; k];
            p[i] = single(i).checked_add(shift)?;
            p[j] = single(j).checked_add(shift)?;
            let mut q = p.clone();
            q[i] = raise.max(p[i]);
            (p, q)
        }
        (Family::S3 { level: 2 }, &[a, b, c]) => {
            use crate::valuation::delta;
            let e = Bundle::EMPTY;
            let ds = [
                (delta(v, a, b, e)?, a, b, c),
                (delta(v, a, c, e)?, a, c, b),
                (delta(v, b, c, e)?, b, c, a),
            ];
            let min = ds.iter().map(|d| d.0).min().expect("three entries");
            let argmins: Vec<_> = ds.iter().filter(|d| d.0 == min).collect();
            if argmins.len() != 1 {
                return Err(Error::NotConstructible("δ triple has a double minimum".into()));
            }
            let (dij, i, j, kk) = *argmins[0];
            let g = ds.iter().filter(|d| d.0 != min).map(|d| d.0).min().expect("two others")
                .checked_sub(dij)?;
            let half = Value::new(1, 2);
            let eps = [
                g.checked_mul(Value::new(1, 3))?,
                single(i).checked_sub(dij)?.checked_mul(half)?,
                single(kk).checked_sub(dij)?.checked_mul(half)?,
                single(j).checked_sub(dij)?,
            ]
            .into_iter()
            .min()
            .expect("four entries");
            if !eps.is_positive() {
                return Err(Error::NotConstructible(
                    "singleton values too small for the price chain".into(),
                ));
            }
            let two_eps = eps.checked_add(eps)?;
            let mut p = vec![high; k];
            p[j] = single(j).checked_sub(dij.checked_add(eps)?)?;
            p[i] = single(i).checked_sub(dij.checked_add(two_eps)?)?;
            p[kk] = single(kk).checked_sub(dij.checked_add(two_eps)?)?;
            let mut q = p.clone();
            q[i] = raise.max(p[i]);
            (p, q)
        }
        _ => {
            return Err(Error::NotConstructible(format!(
                "no explicit price recipe for a {} violation",
                violation.family
            )))
        }
    };
    let (p, q) = (
        PriceVector::new(p).map_err(|_| Error::NotConstructible("negative price".into()))?,
        PriceVector::new(q)?,
    );
    match definition_holds(v, &p, &q)? {
        Some(_) => Ok((p, q)),
        None => Err(Error::NotConstructible("recipe prices do not expose the violation".into())),
    }
}

/// Witness prices for the first supported violation of `v`.
pub fn witness_for(v: &Valuation) -> Result<(Violation, PriceVector, PriceVector)> {
    let report = check_valuation(v)?;
    if report.violations.is_empty() {
        return Err(Error::NotConstructible("valuation has no violation".into()));
    }
    let mut last = None;
    for x in report.violations.iter().filter(|x| x.base.is_empty()) {
        match witness_prices(v, x) {
            Ok((p, q)) => return Ok((x.clone(), p, q)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::NotConstructible("no violation at A=∅".into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::{single_unit, to_interaction};

    fn ints(xs: &[i64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::int(x)).collect()
    }

    fn prices(xs: &[Value]) -> PriceVector {
        PriceVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn double_extremes() {
        let v = |a, b, c| (Value::int(a), Value::int(b), Value::int(c));
        let (a, b, c) = v(1, 1, 2);
        assert!(double_min(a, b, c) && !double_max(a, b, c));
        let (a, b, c) = v(1, 2, 3);
        assert!(!double_min(a, b, c) && !double_max(a, b, c));
        let (a, b, c) = v(5, 5, 5);
        assert!(double_min(a, b, c) && double_max(a, b, c));
    }

    #[test]
    fn k2_s3_vacuous() {
        let r = check_valuation(&Valuation::from_ints(2, &[0, 1, 1, 1]).unwrap()).unwrap();
        assert!(r.substitute && r.violations.is_empty());
    }

    #[test]
    fn complementary_pair_report() {
        let r = check_valuation(&Valuation::from_ints(2, &[0, 0, 0, 1]).unwrap()).unwrap();
        assert!(!r.submodular && !r.substitute && r.monotone);
        let first = r.first().unwrap();
        assert_eq!(first.family, Family::Submodular);
        assert_eq!(first.goods, vec![0, 1]);
        assert_eq!(first.values, vec![Value::int(-1)]);
    }

    #[test]
    fn k3_example_is_substitute() {
        let v = Valuation::from_ints(3, &[0, 2, 3, 4, 3, 4, 4, 4]).unwrap();
        assert!(check_valuation(&v).unwrap().substitute);
    }

    #[test]
    fn s3_failure_is_reported() {
        // δ12 = 0 < δ13 = δ23 = 1 — unique minimum.
        let v = Valuation::from_ints(3, &[0, 3, 3, 6, 3, 5, 5, 6]).unwrap();
        let r = check_valuation(&v).unwrap();
        assert!(r.submodular && !r.s3);
        assert_eq!(r.first().unwrap().family, Family::S3 { level: 2 });
        assert!(!s3_delta_holds(&v, 2).unwrap());
        assert!(!s3_theta_holds(&to_interaction(&v).unwrap(), 2).unwrap());
    }

    #[test]
    fn f4_cases() {
        let zero = InteractionFunction::new(4, vec![Value::ZERO; 16], vec![Value::ZERO; 4]).unwrap();
        assert!(check_f4(&zero, 2).unwrap());
        // Case-2 δ pattern: edges 12,23,34,14 = a, diagonals 13 = b, 24 = c.
        let mut theta = vec![Value::ZERO; 16];
        for m in [0b0011, 0b0110, 0b1100, 0b1001] {
            theta[m] = Value::int(1);
        }
        theta[0b0101] = Value::int(5);
        theta[0b1010] = Value::int(7);
        let f = InteractionFunction::new(4, theta, vec![Value::ZERO; 4]).unwrap();
        assert!(check_f4(&f, 2).unwrap());
        assert!(check_f4(&f, 3).is_err());
    }

    #[test]
    fn demand_examples() {
        let v = Valuation::from_ints(3, &[0, 2, 3, 4, 3, 4, 4, 4]).unwrap();
        let d = demand(&v, &PriceVector::zeros(3)).unwrap();
        let want: Vec<Bundle> = [0b011, 0b101, 0b110, 0b111].into_iter().map(Bundle).collect();
        assert_eq!(d.bundles, want);
        let d = demand(&v, &prices(&ints(&[100, 100, 100]))).unwrap();
        assert_eq!(d.bundles, vec![Bundle::EMPTY]);
    }

    #[test]
    fn oracle_linear_passes() {
        let v = Valuation::linear(&ints(&[3, 1, 2])).unwrap();
        assert!(oracle_definition(&v, 500, 7).unwrap().passed());
    }

    #[test]
    fn oracle_finds_complementarity() {
        let v = Valuation::from_ints(2, &[0, 0, 0, 1]).unwrap();
        match oracle_definition(&v, 1000, 1).unwrap() {
            OracleVerdict::Fail { p, q, bundle } => {
                assert_eq!(definition_holds(&v, &p, &q).unwrap(), Some(bundle));
            }
            OracleVerdict::Pass => panic!("complementarity not detected"),
        }
    }

    #[test]
    fn submodular_witness_prices() {
        let v = Valuation::from_ints(2, &[0, 0, 0, 1]).unwrap();
        let r = check_valuation(&v).unwrap();
        let (p, q) = witness_prices(&v, r.first().unwrap()).unwrap();
        assert_eq!(p.as_slice(), &[Value::new(2, 5), Value::new(2, 5)]);
        assert_eq!(q.as_slice(), &[Value::int(10), Value::new(2, 5)]);
        assert_eq!(demand(&v, &p).unwrap().bundles, vec![Bundle(0b11)]);
        assert_eq!(demand(&v, &q).unwrap().bundles, vec![Bundle::EMPTY]);
    }

    #[test]
    fn s3_witness_prices() {
        let v = Valuation::from_ints(3, &[0, 3, 3, 6, 3, 5, 5, 6]).unwrap();
        let (x, p, q) = witness_for(&v).unwrap();
        assert_eq!(x.family, Family::S3 { level: 2 });
        assert!(definition_holds(&v, &p, &q).unwrap().is_some());
    }

    #[test]
    fn witness_rejects_substitute() {
        let v = single_unit(&ints(&[3, 1, 2])).unwrap();
        assert!(matches!(witness_for(&v), Err(Error::NotConstructible(_))));
    }

    #[test]
    fn fact_1b_agrees_with_table() {
        let v = Valuation::from_ints(2, &[0, 2, 1, 1]).unwrap();
        let f = to_interaction(&v).unwrap();
        assert_eq!(monotone_by_mu(&f).unwrap(), v.is_nondecreasing());
        assert!(!v.is_nondecreasing());
    }
}
