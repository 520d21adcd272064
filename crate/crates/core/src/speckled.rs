//! Speckled valuations: a level-wise concave baseline with independent small
//! bumps ("specks") on the words of a constant-weight code of minimum
//! distance 4.
//!
//! `θ(A) = β_{|A|} + [A ∈ C]·γ_A + 1.5·|A|(|A|−1)` and `μ_k = 3K − 1 + α_k`,
//! with every parameter in `[0, 1]`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{bundles_of_size, Bundle, MAX_GOODS};
use crate::checks::double_max;
use crate::error::{Error, Result};
use crate::valuation::{LazyValuation, SetFunction, Valuation};
use crate::value::Value;

/// Largest good count for which speckled tables are built densely.
pub const MAX_DENSE_SPECKLED: usize = 16;

/// Denominator of the parameter grid.
pub const GRID: i64 = 256;

/// How a code was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Construction {
    /// Words of weight `L` whose 1-based good sum is `≡ r (mod K)`; one
    /// `(L, r)` entry per level.
    GrahamSloane { residues: Vec<(usize, usize)> },
    /// Supplied word list.
    Explicit,
}

/// Set of bundles of even weight in `[2, K−1]`, pairwise at Hamming
/// distance at least 4 within each weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeFamily {
    goods: usize,
    /// Sorted by `(weight, mask)`.
    words: Vec<Bundle>,
    members: HashSet<Bundle>,
    construction: Construction,
}

fn checksum(b: Bundle, goods: usize) -> usize {
    b.goods().map(|g| g + 1).sum::<usize>() % goods
}

impl CodeFamily {
    fn build(goods: usize, mut words: Vec<Bundle>, construction: Construction) -> Self {
        words.sort_by_key(|b| (b.len(), b.mask()));
        let members = words.iter().copied().collect();
        CodeFamily { goods, words, members, construction }
    }

    /// Validated explicit code.
    pub fn explicit(goods: usize, words: Vec<Bundle>) -> Result<Self> {
        let code = CodeFamily::build(goods, words, Construction::Explicit);
        if code.members.len() != code.words.len() {
            return Err(Error::InvalidArgument("duplicate codeword".into()));
        }
        code.validate()?;
        Ok(code)
    }

    pub fn empty(goods: usize) -> Self {
        CodeFamily::build(goods, Vec::new(), Construction::Explicit)
    }

    pub fn goods(&self) -> usize {
        self.goods
    }

    pub fn words(&self) -> &[Bundle] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn contains(&self, b: Bundle) -> bool {
        self.members.contains(&b)
    }

    pub fn level(&self, weight: usize) -> impl Iterator<Item = Bundle> + '_ {
        self.words.iter().copied().filter(move |b| b.len() == weight)
    }

    /// Checks both code invariants. Two distinct words of equal weight are
    /// at distance 2 exactly when one is obtained from the other by
    /// swapping a single good, so every such neighbour of every word is
    /// looked up; this is exhaustive.
    pub fn validate(&self) -> Result<()> {
        let k = self.goods;
        if k > MAX_GOODS {
            return Err(Error::GoodsOutOfRange { goods: k, max: MAX_GOODS });
        }
        for &w in &self.words {
            let n = w.len();
            if !w.is_subset_of(Bundle::full(k)) || n < 2 || n + 1 > k || n % 2 == 1 {
                return Err(Error::InvalidArgument(format!(
                    "codeword {w} must have even weight in [2, {}]",
                    k.saturating_sub(1)
                )));
            }
            for out in w.goods() {
                for inn in w.complement_goods(k) {
                    let nb = w.without(out).with(inn);
                    if self.members.contains(&nb) {
                        return Err(Error::InvalidArgument(format!(
                            "codewords {w} and {nb} are at distance 2"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "code(K={}, |C|={})", self.goods, self.words.len())
    }
}

/// Residue-class construction: for each even weight `L` in `[2, K−1]` keep
/// the largest class of weight-`L` words by good-index sum modulo `K`
/// (smallest residue among ties).
pub fn graham_sloane_code(goods: usize) -> Result<CodeFamily> {
    if !(3..=MAX_GOODS).contains(&goods) {
        return Err(Error::GoodsOutOfRange { goods, max: MAX_GOODS });
    }
    let mut residues = Vec::new();
    let mut words = Vec::new();
    for level in (2..goods).step_by(2) {
        let mut counts = vec![0usize; goods];
        for b in bundles_of_size(goods, level) {
            counts[checksum(b, goods)] += 1;
        }
        let best = *counts.iter().max().expect("goods >= 3");
        let r = counts.iter().position(|&c| c == best).expect("maximum exists");
        residues.push((level, r));
        words.extend(bundles_of_size(goods, level).filter(|&b| checksum(b, goods) == r));
    }
    Ok(CodeFamily::build(goods, words, Construction::GrahamSloane { residues }))
}

/// `⌈(2^{K−1} − 2) / K⌉`, the guaranteed size of the residue construction.
pub fn graham_sloane_bound(goods: usize) -> usize {
    ((1usize << (goods - 1)) - 2).div_ceil(goods)
}

/// Parameters of a speckled valuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpeckleSpec {
    pub goods: usize,
    pub alpha: Vec<Value>,
    /// Indexed by level `0..=K`; entries 0 and 1 are zero.
    pub beta: Vec<Value>,
    pub gamma: BTreeMap<Bundle, Value>,
    pub code: CodeFamily,
}

fn in_unit(x: Value) -> bool {
    !x.is_negative() && x <= Value::ONE
}

impl SpeckleSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.goods;
        if k != self.code.goods() {
            return Err(Error::GoodsMismatch { left: k, right: self.code.goods() });
        }
        if self.alpha.len() != k {
            return Err(Error::LengthMismatch { expected: k, found: self.alpha.len() });
        }
        if self.beta.len() != k + 1 {
            return Err(Error::LengthMismatch { expected: k + 1, found: self.beta.len() });
        }
        if !self.beta[0].is_zero() || self.beta.get(1).is_some_and(|b| !b.is_zero()) {
            return Err(Error::InvalidArgument("β₀ and β₁ must be 0".into()));
        }
        let params = self.alpha.iter().chain(&self.beta).chain(self.gamma.values());
        if let Some(x) = params.copied().find(|&x| !in_unit(x)) {
            return Err(Error::InvalidArgument(format!("parameter {x} outside [0, 1]")));
        }
        if self.gamma.len() != self.code.len() || self.gamma.keys().any(|b| !self.code.contains(*b)) {
            return Err(Error::InvalidArgument("γ must be keyed exactly by the codewords".into()));
        }
        Ok(())
    }

    /// All parameters zero.
    pub fn zero(code: CodeFamily) -> Self {
        let k = code.goods();
        SpeckleSpec {
            goods: k,
            alpha: vec![Value::ZERO; k],
            beta: vec![Value::ZERO; k + 1],
            gamma: code.words().iter().map(|&b| (b, Value::ZERO)).collect(),
            code,
        }
    }

    /// Parameters drawn uniformly from the grid `{j/256 : 0 <= j <= 256}`.
    pub fn random<R: Rng + ?Sized>(code: CodeFamily, rng: &mut R) -> Self {
        let mut draw = || Value::new(rng.gen_range(0..=GRID), GRID);
        let k = code.goods();
        let alpha = (0..k).map(|_| draw()).collect();
        let beta = (0..=k).map(|l| if l < 2 { Value::ZERO } else { draw() }).collect();
        let gamma = code.words().iter().map(|&b| (b, draw())).collect();
        SpeckleSpec { goods: k, alpha, beta, gamma, code }
    }

    /// Number of free parameters, `2K − 1 + |C|`.
    pub fn parameter_count(&self) -> usize {
        2 * self.goods - 1 + self.code.len()
    }

    fn phi(level: usize) -> Value {
        let l = level as i64;
        Value::new(3 * l * (l - 1), 2)
    }

    pub fn theta(&self, b: Bundle) -> Result<Value> {
        let l = b.len();
        let mut t = self.beta[l].checked_add(SpeckleSpec::phi(l))?;
        if let Some(g) = self.gamma.get(&b) {
            t = t.checked_add(*g)?;
        }
        Ok(t)
    }

    pub fn mu(&self, good: usize) -> Result<Value> {
        Ok(Value::int(3 * self.goods as i64 - 1).checked_add(self.alpha[good])?)
    }

    pub fn value(&self, b: Bundle) -> Result<Value> {
        let mut lin = Value::ZERO;
        for g in b.goods() {
            lin = lin.checked_add(self.mu(g)?)?;
        }
        Ok(lin.checked_sub(self.theta(b)?)?)
    }
}

/// Dense table, `K <= 16`.
pub fn build_speckled(spec: &SpeckleSpec) -> Result<Valuation> {
    spec.validate()?;
    if spec.goods > MAX_DENSE_SPECKLED {
        return Err(Error::TooLarge { goods: spec.goods, limit: MAX_DENSE_SPECKLED });
    }
    let table = (0..1u32 << spec.goods)
        .into_par_iter()
        .map(|m| spec.value(Bundle(m)))
        .collect::<Result<Vec<_>>>()?;
    Valuation::new(spec.goods, table)
}

/// Evaluated on demand, `K <= 24`.
pub fn lazy_speckled(spec: &SpeckleSpec) -> Result<LazyValuation> {
    spec.validate()?;
    let spec = spec.clone();
    LazyValuation::new(spec.goods, move |b| {
        spec.value(b).expect("speckled values are small rationals")
    })
}

/// Recovers the parameters of a speckled valuation for a known code. Every
/// non-code bundle of a level must give the same `β`.
pub fn invert_speckled(v: &Valuation, code: &CodeFamily) -> Result<SpeckleSpec> {
    let k = v.goods();
    if k != code.goods() {
        return Err(Error::GoodsMismatch { left: k, right: code.goods() });
    }
    let base = Value::int(3 * k as i64 - 1);
    let alpha: Vec<Value> = v
        .singletons()
        .into_iter()
        .map(|x| x.checked_sub(base))
        .collect::<Result<_, _>>()?;
    let mu: Vec<Value> = alpha.iter().map(|a| a.checked_add(base)).collect::<Result<_, _>>()?;
    let theta = |b: Bundle| -> Result<Value> {
        let lin = Value::sum(b.goods().map(|g| mu[g]))?;
        Ok(lin.checked_sub(v.get(b))?.checked_sub(SpeckleSpec::phi(b.len()))?)
    };
    let mut beta = vec![Value::ZERO; k + 1];
    for (level, slot) in beta.iter_mut().enumerate().skip(2) {
        let mut found: Option<(Bundle, Value)> = None;
        for b in bundles_of_size(k, level).filter(|b| !code.contains(*b)) {
            let x = theta(b)?;
            match found {
                None => found = Some((b, x)),
                Some((b0, x0)) if x0 != x => {
                    return Err(Error::Inconsistent(format!(
                        "level {level}: β from {b0} is {x0} but from {b} is {x}"
                    )))
                }
                _ => {}
            }
        }
        *slot = found
            .ok_or_else(|| Error::Inconsistent(format!("level {level} has no bundle outside the code")))?
            .1;
    }
    let mut gamma = BTreeMap::new();
    for &b in code.words() {
        gamma.insert(b, theta(b)?.checked_sub(beta[b.len()])?);
    }
    let spec = SpeckleSpec { goods: k, alpha, beta, gamma, code: code.clone() };
    spec.validate()
        .map_err(|e| Error::Inconsistent(format!("recovered parameters invalid: {e}")))?;
    Ok(spec)
}

/// Number of independent parameters of the speckled family for `code`, from
/// the inversion argument: each `α_k` is read off a singleton, each `β_L`
/// off a non-code bundle of level `L`, and each `γ_A` off its codeword.
/// Requires the code to be valid and to leave a non-code bundle on every
/// level. No table is built, so this works for any `K <= 24`.
pub fn structural_dimension(code: &CodeFamily) -> Result<usize> {
    code.validate()?;
    let k = code.goods();
    let mut per_level = vec![0u64; k + 1];
    for w in code.words() {
        per_level[w.len()] += 1;
    }
    let mut binom = 1u64;
    for (level, &used) in per_level.iter().enumerate() {
        if level >= 2 && used >= binom {
            return Err(Error::Inconsistent(format!("level {level} is entirely codewords")));
        }
        binom = binom * (k - level) as u64 / (level as u64 + 1);
    }
    Ok(2 * k - 1 + code.len())
}

/// The origin of the parameter cube and the `2K − 1 + |C|` vertices with a
/// single parameter at 1.
pub fn cube_vertex_samples(code: &CodeFamily) -> Result<Vec<Valuation>> {
    let zero = SpeckleSpec::zero(code.clone());
    let mut specs = vec![zero.clone()];
    for g in 0..zero.goods {
        let mut s = zero.clone();
        s.alpha[g] = Value::ONE;
        specs.push(s);
    }
    for l in 2..=zero.goods {
        let mut s = zero.clone();
        s.beta[l] = Value::ONE;
        specs.push(s);
    }
    for &b in code.words() {
        let mut s = zero.clone();
        s.gamma.insert(b, Value::ONE);
        specs.push(s);
    }
    specs.iter().map(build_speckled).collect()
}

/// Outcome of the randomized local check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalCheck {
    pub tuples: usize,
    pub failures: usize,
    /// First failing `(A, i, j, k)` among the sampled tuples, goods 0-based.
    pub first: Option<(Bundle, usize, usize, usize)>,
}

fn sample_tuple(rng: &mut ChaCha8Rng, k: usize) -> (Bundle, usize, usize, usize) {
    let mut goods: Vec<usize> = (0..k).collect();
    for i in 0..3 {
        let j = rng.gen_range(i..k);
        goods.swap(i, j);
    }
    let a = Bundle::from_goods(goods[3..].iter().copied().filter(|_| rng.gen_bool(0.5)));
    (a, goods[0], goods[1], goods[2])
}

fn tuple_ok<F: SetFunction + ?Sized>(v: &F, t: (Bundle, usize, usize, usize)) -> Result<bool> {
    let (a, i, j, k) = t;
    let val = |b: Bundle| v.value(b);
    let va = val(a);
    if val(a.with(i)) < va {
        return Ok(false);
    }
    let d = val(a.with(i)).checked_add(val(a.with(j)))?.checked_sub(val(a.with(i).with(j)))?.checked_sub(va)?;
    if d.is_negative() {
        return Ok(false);
    }
    let x = val(a.with(i).with(j)).checked_add(val(a.with(k)))?;
    let y = val(a.with(i).with(k)).checked_add(val(a.with(j)))?;
    let z = val(a.with(j).with(k)).checked_add(val(a.with(i)))?;
    Ok(double_max(x, y, z))
}

/// Checks monotonicity, local submodularity and the triple property on
/// `tuples` random `(A, i, j, k)`, in parallel batches with independent
/// seeded streams. Requires `K >= 3`.
pub fn local_check<F: SetFunction + Sync + ?Sized>(v: &F, tuples: usize, seed: u64) -> Result<LocalCheck> {
    let k = v.goods();
    if k < 3 {
        return Err(Error::InvalidArgument("local check needs at least three goods".into()));
    }
    const BATCH: usize = 4096;
    let batches = tuples.div_ceil(BATCH);
    let results = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let n = BATCH.min(tuples - b * BATCH);
            let mut failures = 0;
            let mut first = None;
            for _ in 0..n {
                let t = sample_tuple(&mut rng, k);
                if !tuple_ok(v, t)? {
                    failures += 1;
                    first.get_or_insert(t);
                }
            }
            Ok((failures, first))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalCheck {
        tuples,
        failures: results.iter().map(|r| r.0).sum(),
        first: results.iter().find_map(|r| r.1),
    })
}
