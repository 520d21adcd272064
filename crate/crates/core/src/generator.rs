//! Random generation of nondecreasing substitute valuations.
//!
//! A nominal integer interaction function `θ₀` is sampled, then repaired
//! level by level into the least supermodular interaction function with the
//! triple property that dominates `θ₀`. Finally the singleton values `μ` are
//! lifted just enough to make the valuation nondecreasing.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with a 64-bit seed
//! via `SeedableRng::seed_from_u64`, so tables are reproducible across
//! platforms.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{bundles_of_size, pairs_outside, Bundle, MAX_DENSE_GOODS};
use crate::error::{Error, Result};
use crate::valuation::{from_interaction, to_interaction, InteractionFunction, Valuation};
use crate::value::Value;

/// Distribution of the nominal interaction values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// `θ₀(A)` uniform on the integers `[0, m·|A|]`.
    Uniform(u32),
    /// `θ₀(A)` the sum of `|A|` independent uniforms on `[0, m]`.
    SumUniform(u32),
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Uniform(m) => write!(f, "uniform:{m}"),
            Model::SumUniform(m) => write!(f, "sumuniform:{m}"),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("model `{s}` is not uniform:M or sumuniform:M"));
        let (name, m) = s.split_once(':').ok_or_else(bad)?;
        let m: u32 = m.parse().map_err(|_| bad())?;
        match name {
            "uniform" => Ok(Model::Uniform(m)),
            "sumuniform" => Ok(Model::SumUniform(m)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub goods: usize,
    pub model: Model,
    pub seed: u64,
    /// Nominal singleton values; empty means all zero.
    pub mu0: Vec<i64>,
}

impl GenConfig {
    pub fn new(goods: usize, model: Model, seed: u64) -> Self {
        GenConfig { goods, model, seed, mu0: Vec::new() }
    }

    fn mu0_values(&self) -> Result<Vec<Value>> {
        if self.mu0.is_empty() {
            return Ok(vec![Value::ZERO; self.goods]);
        }
        if self.mu0.len() != self.goods {
            return Err(Error::LengthMismatch { expected: self.goods, found: self.mu0.len() });
        }
        Ok(self.mu0.iter().map(|&x| Value::int(x)).collect())
    }
}

/// Order in which bundles, pairs and third goods are visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// Ascending `A` mask, lexicographic pairs `i < j`, ascending `k`.
    #[default]
    Canonical,
    /// Everything visited in the opposite order.
    Reversed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub order: SweepOrder,
    /// Maximum number of sweeps in the second part of any phase.
    pub cap: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { order: SweepOrder::Canonical, cap: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseStats {
    pub level: usize,
    /// Sweeps of the triple repair, including the final no-change sweep.
    pub iterations: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GenStats {
    /// One entry per level `2..=K-1`; the top level has no triple repair.
    pub phases: Vec<PhaseStats>,
    /// Number of update statements that raised an entry.
    pub increments: u64,
    #[serde(skip)]
    pub wall: Duration,
}

impl GenStats {
    pub fn iterations(&self, level: usize) -> Option<usize> {
        self.phases.iter().find(|p| p.level == level).map(|p| p.iterations)
    }
}

/// Step 1: the nominal interaction function, zero on bundles of size <= 1.
pub fn sample_theta0(cfg: &GenConfig) -> Result<InteractionFunction> {
    if cfg.goods > MAX_DENSE_GOODS {
        return Err(Error::TooLarge { goods: cfg.goods, limit: MAX_DENSE_GOODS });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut theta = vec![Value::ZERO; 1 << cfg.goods];
    for (m, slot) in theta.iter_mut().enumerate() {
        let size = (m as u32).count_ones() as u64;
        if size <= 1 {
            continue;
        }
        let x = match cfg.model {
            Model::Uniform(w) => rng.gen_range(0..=w as u64 * size),
            Model::SumUniform(w) => (0..size).map(|_| rng.gen_range(0..=w as u64)).sum(),
        };
        *slot = Value::int(x as i64);
    }
    InteractionFunction::new(cfg.goods, theta, cfg.mu0_values()?)
}

fn as_int(b: Bundle, x: Value) -> Result<i64> {
    x.to_integer().ok_or(Error::NonInteger { bundle: b, value: x })
}

fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow(crate::value::Overflow))
}

fn sub(a: i64, b: i64) -> Result<i64> {
    a.checked_sub(b).ok_or(Error::Overflow(crate::value::Overflow))
}

/// The `(A, i, j)` visits of a phase in sweep order.
fn pair_visits(goods: usize, level: usize, order: SweepOrder) -> Vec<(u32, usize, usize)> {
    let mut out: Vec<_> = bundles_of_size(goods, level - 2)
        .flat_map(|a| pairs_outside(a, goods).into_iter().map(move |(i, j)| (a.mask(), i, j)))
        .collect();
    if order == SweepOrder::Reversed {
        out.reverse();
    }
    out
}

/// The `(A, i, j, k)` visits, `i < j` the raised pair and `k` any other good.
fn triple_visits(goods: usize, level: usize, order: SweepOrder) -> Vec<(u32, usize, usize, usize)> {
    let mut out = Vec::new();
    for a in bundles_of_size(goods, level - 2) {
        for (i, j) in pairs_outside(a, goods) {
            for k in a.complement_goods(goods).filter(|&k| k != i && k != j) {
                out.push((a.mask(), i, j, k));
            }
        }
    }
    if order == SweepOrder::Reversed {
        out.reverse();
    }
    out
}

/// Steps 2 and 3 applied to an integer `θ₀` and `μ₀`.
pub fn run_algorithm(
    theta0: &InteractionFunction,
    mu0: &[Value],
    opts: &RunOptions,
) -> Result<(InteractionFunction, GenStats)> {
    let start = Instant::now();
    let k = theta0.goods();
    if mu0.len() != k {
        return Err(Error::LengthMismatch { expected: k, found: mu0.len() });
    }
    let mut t: Vec<i64> = (0..1u32 << k)
        .map(|m| as_int(Bundle(m), theta0.theta(Bundle(m))))
        .collect::<Result<_>>()?;
    let mu0: Vec<i64> = mu0
        .iter()
        .enumerate()
        .map(|(g, &x)| as_int(Bundle::singleton(g), x))
        .collect::<Result<_>>()?;

    let mut stats = GenStats::default();
    for level in 2..=k {
        for (a, i, j) in pair_visits(k, level, opts.order) {
            let (ai, aj, aij) = (a | 1 << i, a | 1 << j, a | 1 << i | 1 << j);
            let need = sub(add(t[ai as usize], t[aj as usize])?, t[a as usize])?;
            if need > t[aij as usize] {
                t[aij as usize] = need;
                stats.increments += 1;
            }
        }
        if level == k {
            // No three goods lie outside a bundle of size K-2.
            break;
        }
        let visits = triple_visits(k, level, opts.order);
        let mut iterations = 0;
        loop {
            if iterations == opts.cap {
                return Err(Error::IterationCap { level, cap: opts.cap });
            }
            iterations += 1;
            let mut changed = false;
            for &(a, i, j, kk) in &visits {
                let (bi, bj, bk) = (1u32 << i, 1u32 << j, 1u32 << kk);
                let x = add(t[(a | bi | bk) as usize], t[(a | bj) as usize])?;
                let y = add(t[(a | bj | bk) as usize], t[(a | bi) as usize])?;
                let need = sub(x.min(y), t[(a | bk) as usize])?;
                let slot = &mut t[(a | bi | bj) as usize];
                if need > *slot {
                    *slot = need;
                    stats.increments += 1;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        stats.phases.push(PhaseStats { level, iterations });
    }

    let mut mu = mu0;
    for (g, mu_g) in mu.iter_mut().enumerate() {
        for m in 0..1u32 << k {
            if m >> g & 1 == 0 {
                *mu_g = (*mu_g).max(sub(t[(m | 1 << g) as usize], t[m as usize])?);
            }
        }
    }
    let theta = t.into_iter().map(Value::int).collect();
    let f = InteractionFunction::new(k, theta, mu.into_iter().map(Value::int).collect())?;
    stats.wall = start.elapsed();
    Ok((f, stats))
}

/// Full pipeline: sample, repair, lift, convert.
pub fn generate(cfg: &GenConfig) -> Result<(Valuation, GenStats)> {
    let theta0 = sample_theta0(cfg)?;
    let (f, stats) = run_algorithm(&theta0, theta0.mu(), &RunOptions::default())?;
    Ok((from_interaction(&f)?, stats))
}

/// `count` runs with seeds `cfg.seed, cfg.seed + 1, ...`, in parallel on the
/// current rayon pool. Results are identical to sequential runs.
pub fn generate_batch(cfg: &GenConfig, count: usize) -> Vec<Result<(Valuation, GenStats)>> {
    (0..count as u64)
        .into_par_iter()
        .map(|n| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(n);
            generate(&c)
        })
        .collect()
}

/// Nearby substitute valuation: the deterministic steps applied to
/// `θ₀ = θ_v`, `μ₀ = (v({k}))_k`.
pub fn repair(v: &Valuation) -> Result<Valuation> {
    v.require_integer()?;
    let f = to_interaction(v)?;
    let (out, _) = run_algorithm(&f, f.mu(), &RunOptions::default())?;
    from_interaction(&out)
}

/// Both update rules hold at `level`: supermodularity for every `(A, i, j)`
/// and the triple inequality for every `(A, i, j, k)`, with `|A| = level - 2`.
pub fn level_constraints_hold(f: &InteractionFunction, level: usize) -> Result<bool> {
    let k = f.goods();
    if level < 2 || level > k {
        return Err(Error::LevelOutOfRange { level, min: 2, max: k });
    }
    let th = |m: u32| f.theta(Bundle(m));
    for (a, i, j) in pair_visits(k, level, SweepOrder::Canonical) {
        let (ai, aj) = (a | 1 << i, a | 1 << j);
        if th(ai | aj) < th(ai).checked_add(th(aj))?.checked_sub(th(a))? {
            return Ok(false);
        }
    }
    if level < k {
        for (a, i, j, kk) in triple_visits(k, level, SweepOrder::Canonical) {
            let (bi, bj, bk) = (1u32 << i, 1u32 << j, 1u32 << kk);
            let lhs = th(a | bi | bj).checked_add(th(a | bk))?;
            let x = th(a | bi | bk).checked_add(th(a | bj))?;
            let y = th(a | bj | bk).checked_add(th(a | bi))?;
            if lhs < x.min(y) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Bundles `B` that were raised above `θ₀(B)` but can be lowered by one
/// without breaking the update rules at level `|B|`. Empty for a least
/// repair.
pub fn non_minimal_entries(theta0: &InteractionFunction, out: &InteractionFunction) -> Result<Vec<Bundle>> {
    let k = out.goods();
    let mut bad = Vec::new();
    for m in 0..1u32 << k {
        let b = Bundle(m);
        if b.len() < 2 || out.theta(b) <= theta0.theta(b) {
            continue;
        }
        let mut theta = out.thetas().to_vec();
        theta[b.index()] = theta[b.index()].checked_sub(Value::ONE)?;
        let lowered = InteractionFunction::new(k, theta, out.mu().to_vec())?;
        if level_constraints_hold(&lowered, b.len())? {
            bad.push(b);
        }
    }
    Ok(bad)
}

/// The nominal table of the slow-convergence example on six goods. Each mask
/// string is a binary number, so its rightmost character is good 1.
pub fn slow_example(m: i64) -> Result<InteractionFunction> {
    let mut theta = vec![Value::ZERO; 64];
    let mut set = |s: &str, x: i64| {
        let mask = usize::from_str_radix(s, 2).expect("binary literal");
        theta[mask] = Value::int(x);
    };
    for s in ["111100", "110011", "001111"] {
        set(s, m);
    }
    for s in ["000111", "010111", "100111"] {
        set(s, 1);
    }
    InteractionFunction::new(6, theta, vec![Value::ZERO; 6])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::check_valuation;

    fn theta_k3(t12: i64, t13: i64, t23: i64, t123: i64) -> InteractionFunction {
        let theta = [0, 0, 0, t12, 0, t13, t23, t123].map(Value::int).to_vec();
        InteractionFunction::new(3, theta, vec![Value::ZERO; 3]).unwrap()
    }

    #[test]
    fn zero_model_is_zero() {
        let f = sample_theta0(&GenConfig::new(5, Model::Uniform(0), 9)).unwrap();
        assert!(f.thetas().iter().all(Value::is_zero));
    }

    #[test]
    fn zero_theta_is_fixed() {
        let f = theta_k3(0, 0, 0, 0);
        let mu0 = [Value::int(1), Value::int(0), Value::int(4)];
        let (out, stats) = run_algorithm(&f, &mu0, &RunOptions::default()).unwrap();
        assert_eq!(out.thetas(), f.thetas());
        assert_eq!(out.mu(), &mu0[..]);
        assert_eq!(stats.iterations(2), Some(1));
        assert_eq!(stats.increments, 0);
    }

    #[test]
    fn hand_traced_k3() {
        let (out, _) = run_algorithm(&theta_k3(1, 2, 3, 0), &[Value::ZERO; 3], &RunOptions::default()).unwrap();
        assert_eq!(out, theta_k3(2, 2, 3, 5).with_mu(vec![Value::int(2), Value::int(3), Value::int(3)]).unwrap());
    }

    #[test]
    fn repair_examples() {
        let comp = Valuation::from_ints(2, &[0, 0, 0, 1]).unwrap();
        assert_eq!(repair(&comp).unwrap(), Valuation::zero(2).unwrap());
        let good = Valuation::from_ints(3, &[0, 2, 3, 4, 3, 4, 4, 4]).unwrap();
        assert_eq!(repair(&good).unwrap(), good);
        let frac = Valuation::new(1, vec![Value::ZERO, Value::new(1, 2)]).unwrap();
        assert!(matches!(repair(&frac), Err(Error::NonInteger { .. })));
    }

    #[test]
    fn generated_outputs_check() {
        for seed in 0..50 {
            for model in [Model::Uniform(4), Model::SumUniform(3)] {
                let cfg = GenConfig::new(2 + (seed as usize % 5), model, seed);
                let (v, _) = generate(&cfg).unwrap();
                assert!(check_valuation(&v).unwrap().substitute, "{cfg:?}");
            }
        }
    }

    #[test]
    fn slow_example_sweeps() {
        for m in [1, 3, 100] {
            let theta0 = slow_example(m).unwrap();
            let (out, stats) = run_algorithm(&theta0, &[Value::ZERO; 6], &RunOptions::default()).unwrap();
            assert_eq!(stats.iterations(4), Some(m as usize + 1));
            for b in bundles_of_size(6, 4) {
                assert_eq!(out.theta(b), Value::int(m));
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let opts = RunOptions { cap: 3, ..RunOptions::default() };
        let err = run_algorithm(&slow_example(100).unwrap(), &[Value::ZERO; 6], &opts).unwrap_err();
        assert!(matches!(err, Error::IterationCap { level: 4, cap: 3 }));
    }

    #[test]
    fn batch_matches_sequential() {
        let cfg = GenConfig::new(5, Model::SumUniform(2), 40);
        let batch = generate_batch(&cfg, 8);
        for (n, r) in batch.into_iter().enumerate() {
            let mut c = cfg.clone();
            c.seed += n as u64;
            assert_eq!(r.unwrap().0, generate(&c).unwrap().0);
        }
    }

    #[test]
    fn model_parsing() {
        assert_eq!("uniform:5".parse::<Model>().unwrap(), Model::Uniform(5));
        assert_eq!("sumuniform:0".parse::<Model>().unwrap(), Model::SumUniform(0));
        assert!("normal:3".parse::<Model>().is_err());
    }
}
