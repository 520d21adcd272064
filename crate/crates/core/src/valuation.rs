//! Valuations, interaction functions and the basic operators on them.

use std::fmt;
use std::sync::Arc;

use crate::bundle::{Bundle, MAX_DENSE_GOODS, MAX_GOODS};
use crate::error::{Error, Result};
use crate::value::Value;

/// Anything that assigns a value to every bundle of a fixed set of goods.
pub trait SetFunction {
    fn goods(&self) -> usize;
    fn value(&self, bundle: Bundle) -> Value;
}

/// Dense valuation table indexed by bundle mask, with `v(∅) = 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Valuation {
    goods: usize,
    table: Vec<Value>,
}

impl Valuation {
    pub fn new(goods: usize, table: Vec<Value>) -> Result<Self> {
        if goods > MAX_DENSE_GOODS {
            return Err(Error::TooLarge { goods, limit: MAX_DENSE_GOODS });
        }
        let expected = 1usize << goods;
        if table.len() != expected {
            return Err(Error::LengthMismatch { expected, found: table.len() });
        }
        if !table[0].is_zero() {
            return Err(Error::NonzeroEmpty(table[0]));
        }
        Ok(Valuation { goods, table })
    }

    pub fn from_ints(goods: usize, table: &[i64]) -> Result<Self> {
        Valuation::new(goods, table.iter().map(|&x| Value::int(x)).collect())
    }

    pub fn try_from_fn<F>(goods: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(Bundle) -> Result<Value>,
    {
        if goods > MAX_DENSE_GOODS {
            return Err(Error::TooLarge { goods, limit: MAX_DENSE_GOODS });
        }
        let table = (0..1u32 << goods)
            .map(|m| f(Bundle(m)))
            .collect::<Result<Vec<_>>>()?;
        Valuation::new(goods, table)
    }

    pub fn zero(goods: usize) -> Result<Self> {
        Valuation::try_from_fn(goods, |_| Ok(Value::ZERO))
    }

    /// `v(A) = μ·A`.
    pub fn linear(mu: &[Value]) -> Result<Self> {
        Valuation::try_from_fn(mu.len(), |b| Ok(Value::sum(b.goods().map(|g| mu[g]))?))
    }

    pub fn goods(&self) -> usize {
        self.goods
    }

    pub fn table(&self) -> &[Value] {
        &self.table
    }

    pub fn into_table(self) -> Vec<Value> {
        self.table
    }

    #[inline]
    pub fn get(&self, bundle: Bundle) -> Value {
        self.table[bundle.index()]
    }

    pub fn full(&self) -> Bundle {
        Bundle::full(self.goods)
    }

    pub fn bundles(&self) -> impl Iterator<Item = Bundle> {
        (0..1u32 << self.goods).map(Bundle)
    }

    pub fn singletons(&self) -> Vec<Value> {
        (0..self.goods).map(|g| self.get(Bundle::singleton(g))).collect()
    }

    pub fn is_integer_valued(&self) -> bool {
        self.table.iter().all(Value::is_integer)
    }

    /// First non-integer entry, if any.
    pub fn require_integer(&self) -> Result<()> {
        match self.bundles().find(|&b| !self.get(b).is_integer()) {
            Some(b) => Err(Error::NonInteger { bundle: b, value: self.get(b) }),
            None => Ok(()),
        }
    }

    /// Relabel goods: good `g` of `self` becomes good `perm[g]` of the result.
    pub fn permute_goods(&self, perm: &[usize]) -> Result<Valuation> {
        if perm.len() != self.goods {
            return Err(Error::LengthMismatch { expected: self.goods, found: perm.len() });
        }
        let mut seen = vec![false; self.goods];
        for &p in perm {
            if p >= self.goods || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
        }
        let mut table = vec![Value::ZERO; self.table.len()];
        for b in self.bundles() {
            let image = Bundle::from_goods(b.goods().map(|g| perm[g]));
            table[image.index()] = self.get(b);
        }
        Valuation::new(self.goods, table)
    }

    /// True when `v(A) <= v(B)` for all `A ⊆ B`.
    pub fn is_nondecreasing(&self) -> bool {
        self.bundles().all(|b| {
            b.complement_goods(self.goods)
                .all(|g| self.get(b) <= self.get(b.with(g)))
        })
    }
}

impl SetFunction for Valuation {
    fn goods(&self) -> usize {
        self.goods
    }

    fn value(&self, bundle: Bundle) -> Value {
        self.get(bundle)
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Valuation(K={}; ", self.goods)?;
        for (n, v) in self.table.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Valuation evaluated on demand, for good counts where a full table is
/// impractical.
#[derive(Clone)]
pub struct LazyValuation {
    goods: usize,
    eval: Arc<dyn Fn(Bundle) -> Value + Send + Sync>,
}

impl LazyValuation {
    pub fn new<F>(goods: usize, eval: F) -> Result<Self>
    where
        F: Fn(Bundle) -> Value + Send + Sync + 'static,
    {
        if goods > MAX_GOODS {
            return Err(Error::GoodsOutOfRange { goods, max: MAX_GOODS });
        }
        if !eval(Bundle::EMPTY).is_zero() {
            return Err(Error::NonzeroEmpty(eval(Bundle::EMPTY)));
        }
        Ok(LazyValuation { goods, eval: Arc::new(eval) })
    }

    /// Materialize the table; refused above the dense limit.
    pub fn to_dense(&self) -> Result<Valuation> {
        if self.goods > MAX_DENSE_GOODS {
            return Err(Error::TooLarge { goods: self.goods, limit: MAX_DENSE_GOODS });
        }
        Valuation::try_from_fn(self.goods, |b| Ok((self.eval)(b)))
    }
}

impl SetFunction for LazyValuation {
    fn goods(&self) -> usize {
        self.goods
    }

    fn value(&self, bundle: Bundle) -> Value {
        (self.eval)(bundle)
    }
}

impl fmt::Debug for LazyValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LazyValuation(K={})", self.goods)
    }
}

/// `θ` with `θ(A) = 0` for `|A| <= 1`, together with the singleton values `μ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionFunction {
    goods: usize,
    theta: Vec<Value>,
    mu: Vec<Value>,
}

impl InteractionFunction {
    pub fn new(goods: usize, theta: Vec<Value>, mu: Vec<Value>) -> Result<Self> {
        if goods > MAX_DENSE_GOODS {
            return Err(Error::TooLarge { goods, limit: MAX_DENSE_GOODS });
        }
        let expected = 1usize << goods;
        if theta.len() != expected {
            return Err(Error::LengthMismatch { expected, found: theta.len() });
        }
        if mu.len() != goods {
            return Err(Error::LengthMismatch { expected: goods, found: mu.len() });
        }
        for m in 0..expected as u32 {
            let b = Bundle(m);
            if b.len() <= 1 && !theta[m as usize].is_zero() {
                return Err(Error::InteractionNotZero { bundle: b, value: theta[m as usize] });
            }
        }
        Ok(InteractionFunction { goods, theta, mu })
    }

    pub fn goods(&self) -> usize {
        self.goods
    }

    #[inline]
    pub fn theta(&self, bundle: Bundle) -> Value {
        self.theta[bundle.index()]
    }

    pub fn thetas(&self) -> &[Value] {
        &self.theta
    }

    pub fn mu(&self) -> &[Value] {
        &self.mu
    }

    pub fn with_mu(mut self, mu: Vec<Value>) -> Result<Self> {
        if mu.len() != self.goods {
            return Err(Error::LengthMismatch { expected: self.goods, found: mu.len() });
        }
        self.mu = mu;
        Ok(self)
    }

    /// `θ(Aij) − θ(Ai) − θ(Aj) + θ(A)`.
    pub fn delta(&self, i: usize, j: usize, base: Bundle) -> Result<Value> {
        check_delta_args(self.goods, i, j, base)?;
        Ok(self
            .theta(base.with(i).with(j))
            .checked_sub(self.theta(base.with(i)))?
            .checked_sub(self.theta(base.with(j)))?
            .checked_add(self.theta(base))?)
    }
}

fn check_delta_args(goods: usize, i: usize, j: usize, base: Bundle) -> Result<()> {
    if i >= goods || j >= goods || i == j || base.contains(i) || base.contains(j) {
        return Err(Error::InvalidArgument(format!(
            "δ needs distinct goods outside A, got i={}, j={}, A={base}",
            i + 1,
            j + 1
        )));
    }
    Ok(())
}

/// Nonnegative price per good.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriceVector(Vec<Value>);

impl PriceVector {
    pub fn new(prices: Vec<Value>) -> Result<Self> {
        if let Some((index, &value)) = prices.iter().enumerate().find(|(_, p)| p.is_negative()) {
            return Err(Error::Negative { index, value });
        }
        Ok(PriceVector(prices))
    }

    pub fn zeros(goods: usize) -> Self {
        PriceVector(vec![Value::ZERO; goods])
    }

    pub fn as_slice(&self) -> &[Value] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `p·A`.
    pub fn cost(&self, bundle: Bundle) -> Result<Value> {
        Ok(Value::sum(bundle.goods().map(|g| self.0[g]))?)
    }
}

impl std::ops::Index<usize> for PriceVector {
    type Output = Value;

    fn index(&self, good: usize) -> &Value {
        &self.0[good]
    }
}

impl fmt::Display for PriceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, p) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// `μ(k) = v({k})`, `θ(A) = μ·A − v(A)`.
pub fn to_interaction(v: &Valuation) -> Result<InteractionFunction> {
    let mu = v.singletons();
    let theta = v
        .bundles()
        .map(|b| Ok(Value::sum(b.goods().map(|g| mu[g]))?.checked_sub(v.get(b))?))
        .collect::<Result<Vec<_>>>()?;
    InteractionFunction::new(v.goods(), theta, mu)
}

/// `v(A) = μ·A − θ(A)`.
pub fn from_interaction(f: &InteractionFunction) -> Result<Valuation> {
    Valuation::try_from_fn(f.goods(), |b| {
        Ok(Value::sum(b.goods().map(|g| f.mu()[g]))?.checked_sub(f.theta(b))?)
    })
}

/// `δ_{ij|A} = v(Ai) + v(Aj) − v(Aij) − v(A)`.
pub fn delta(v: &Valuation, i: usize, j: usize, base: Bundle) -> Result<Value> {
    check_delta_args(v.goods(), i, j, base)?;
    Ok(v
        .get(base.with(i))
        .checked_add(v.get(base.with(j)))?
        .checked_sub(v.get(base.with(i).with(j)))?
        .checked_sub(v.get(base))?)
}

/// `L`-satiation: best sub-bundle of at most `level` goods.
pub fn satiate(v: &Valuation, level: usize) -> Result<Valuation> {
    if level > v.goods() {
        return Err(Error::LevelOutOfRange { level, min: 0, max: v.goods() });
    }
    // best[A] = max over B ⊆ A with |B| <= level of v(B), built up by removing one good.
    let mut best: Vec<Value> = Vec::with_capacity(1 << v.goods());
    for b in v.bundles() {
        let mut m = if b.len() <= level { Some(v.get(b)) } else { None };
        for g in b.goods() {
            let sub = best[b.without(g).index()];
            m = Some(m.map_or(sub, |x| x.max(sub)));
        }
        best.push(m.unwrap_or(Value::ZERO));
    }
    Valuation::new(v.goods(), best)
}

/// Max convolution `(v1 * v2)(A) = max_{B ⊆ A} v1(A∖B) + v2(B)`.
pub fn aggregate(v1: &Valuation, v2: &Valuation) -> Result<Valuation> {
    if v1.goods() != v2.goods() {
        return Err(Error::GoodsMismatch { left: v1.goods(), right: v2.goods() });
    }
    Valuation::try_from_fn(v1.goods(), |a| {
        let mut best: Option<Value> = None;
        for b in a.subsets() {
            let x = v1.get(a.difference(b)).checked_add(v2.get(b))?;
            best = Some(best.map_or(x, |m| m.max(x)));
        }
        Ok(best.expect("every bundle has at least one split"))
    })
}

/// `v(A) = max{w_k : k ∈ A}`, `v(∅) = 0`.
pub fn single_unit(weights: &[Value]) -> Result<Valuation> {
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| w.is_negative()) {
        return Err(Error::Negative { index, value });
    }
    Valuation::try_from_fn(weights.len(), |b| {
        Ok(b.goods().map(|g| weights[g]).max().unwrap_or(Value::ZERO))
    })
}

/// Defines `θ` on level `level + 1` by `θ(A) = min_{i∈A} θ(A−i) + μ(i)`.
///
/// Requires `F4_θ(level)` unless `level == 1`; the result then satisfies
/// `S3_θ(level + 1)`. Other levels and `f.mu()` are left untouched.
pub fn extend_level(f: &InteractionFunction, level: usize, mu: &[Value]) -> Result<InteractionFunction> {
    let k = f.goods();
    if k < 2 || level < 1 || level + 1 > k {
        return Err(Error::LevelOutOfRange { level, min: 1, max: k.saturating_sub(1) });
    }
    if mu.len() != k {
        return Err(Error::LengthMismatch { expected: k, found: mu.len() });
    }
    if level >= 2 && level + 2 <= k {
        if let Some(w) = crate::checks::first_f4_violation(f, level)? {
            return Err(Error::F4Violation { base: w.0, goods: w.1 });
        }
    }
    let mut theta = f.thetas().to_vec();
    for b in crate::bundle::bundles_of_size(k, level + 1) {
        let mut best: Option<Value> = None;
        for g in b.goods() {
            let x = theta[b.without(g).index()].checked_add(mu[g])?;
            best = Some(best.map_or(x, |m| m.min(x)));
        }
        theta[b.index()] = best.expect("nonempty bundle");
    }
    InteractionFunction::new(k, theta, f.mu().to_vec())
}
