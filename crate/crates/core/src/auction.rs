//! Ascending-price auction with integer increments and straightforward
//! bidding, plus a brute-force welfare oracle.
//!
//! Every good starts at price 0, provisionally assigned to a random buyer.
//! In each round every buyer demands a payoff-maximizing bundle at its
//! effective prices (the current price for goods it holds, one more for the
//! others) and bids on the goods of that bundle it does not hold. Each good
//! with bids goes to a random bidder and its price rises by one. The auction
//! ends after a round without bids.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundle::{Bundle, MAX_DENSE_GOODS};
use crate::error::{Error, Result};
use crate::valuation::Valuation;
use crate::value::{Overflow, Value};

/// Prices, provisional owners and the number of completed rounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuctionState {
    pub prices: Vec<i64>,
    pub owner: Vec<usize>,
    pub round: usize,
}

/// One round of the transcript. Round 0 records the opening assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Goods bid on by each buyer.
    pub bids: Vec<Bundle>,
    /// Goods whose price rose this round, with the winning bidder.
    pub awards: Vec<(usize, usize)>,
    pub prices: Vec<i64>,
    pub owner: Vec<usize>,
}

impl fmt::Display for RoundRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bids: Vec<String> =
            self.bids.iter().enumerate().map(|(b, g)| format!("{}:{}", b + 1, g)).collect();
        let awards: Vec<String> =
            self.awards.iter().map(|(g, b)| format!("{}->{}", g + 1, b + 1)).collect();
        let prices: Vec<String> = self.prices.iter().map(i64::to_string).collect();
        let owner: Vec<String> = self.owner.iter().map(|b| (b + 1).to_string()).collect();
        write!(
            f,
            "round {}: bids {} awards [{}] prices ({}) owners ({})",
            self.round,
            bids.join(" "),
            awards.join(" "),
            prices.join(","),
            owner.join(",")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuctionOutcome {
    pub prices: Vec<i64>,
    /// Bundle won by each buyer.
    pub allocation: Vec<Bundle>,
    /// Rounds with bids; the closing round without bids is not counted.
    pub rounds: usize,
    pub transcript: Vec<RoundRecord>,
}

impl AuctionOutcome {
    /// One line per round.
    pub fn transcript_text(&self) -> String {
        self.transcript.iter().map(|r| format!("{r}\n")).collect()
    }
}

fn integer_tables(valuations: &[Valuation]) -> Result<(usize, Vec<Vec<i64>>)> {
    let first = valuations
        .first()
        .ok_or_else(|| Error::InvalidArgument("an auction needs at least one buyer".into()))?;
    let goods = first.goods();
    if goods > MAX_DENSE_GOODS {
        return Err(Error::TooLarge { goods, limit: MAX_DENSE_GOODS });
    }
    valuations
        .iter()
        .map(|v| {
            if v.goods() != goods {
                return Err(Error::GoodsMismatch { left: goods, right: v.goods() });
            }
            v.require_integer()?;
            Ok(v.table().iter().map(|x| x.to_integer().expect("checked integer")).collect())
        })
        .collect::<Result<Vec<_>>>()
        .map(|t| (goods, t))
}

/// True iff `a` is preferred to `b` on ties: first more held goods, then
/// inclusion of the lowest good on which they differ.
fn preferred(a: Bundle, b: Bundle, held: Bundle) -> bool {
    let kept = |x: Bundle| (x.mask() & held.mask()).count_ones();
    match kept(a).cmp(&kept(b)) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            let diff = a.mask() ^ b.mask();
            diff != 0 && a.mask() & (diff & diff.wrapping_neg()) != 0
        }
    }
}

/// Payoff-maximizing bundle at effective prices, with the tie-break above.
fn straightforward_demand(table: &[i64], prices: &[i64], held: Bundle) -> Result<Bundle> {
    let goods = prices.len();
    let mut best = Bundle::EMPTY;
    let mut best_payoff = i64::MIN;
    for mask in 0..(1u32 << goods) {
        let b = Bundle(mask);
        let mut cost: i64 = 0;
        for g in b.goods() {
            let p = prices[g] + i64::from(!held.contains(g));
            cost = cost.checked_add(p).ok_or(Error::Overflow(Overflow))?;
        }
        let payoff = table[b.index()].checked_sub(cost).ok_or(Error::Overflow(Overflow))?;
        if payoff > best_payoff || (payoff == best_payoff && preferred(b, best, held)) {
            best = b;
            best_payoff = payoff;
        }
    }
    Ok(best)
}

/// Runs the auction. Random choices (opening assignment, winners among
/// simultaneous bidders) are drawn from a generator seeded with `seed`.
pub fn run_auction(valuations: &[Valuation], seed: u64) -> Result<AuctionOutcome> {
    let (goods, tables) = integer_tables(valuations)?;
    let buyers = tables.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = AuctionState {
        prices: vec![0; goods],
        owner: (0..goods).map(|_| rng.gen_range(0..buyers)).collect(),
        round: 0,
    };
    let mut transcript = vec![RoundRecord {
        round: 0,
        bids: vec![Bundle::EMPTY; buyers],
        awards: Vec::new(),
        prices: state.prices.clone(),
        owner: state.owner.clone(),
    }];
    loop {
        let holdings = allocation(&state.owner, buyers);
        let bids = tables
            .iter()
            .zip(&holdings)
            .map(|(t, &held)| {
                Ok(straightforward_demand(t, &state.prices, held)?.difference(held))
            })
            .collect::<Result<Vec<Bundle>>>()?;
        if bids.iter().all(|b| b.is_empty()) {
            break;
        }
        state.round += 1;
        let mut awards = Vec::new();
        for g in 0..goods {
            let bidders: Vec<usize> = (0..buyers).filter(|&b| bids[b].contains(g)).collect();
            if bidders.is_empty() {
                continue;
            }
            let winner = bidders[rng.gen_range(0..bidders.len())];
            state.prices[g] += 1;
            state.owner[g] = winner;
            awards.push((g, winner));
        }
        transcript.push(RoundRecord {
            round: state.round,
            bids,
            awards,
            prices: state.prices.clone(),
            owner: state.owner.clone(),
        });
    }
    Ok(AuctionOutcome {
        allocation: allocation(&state.owner, buyers),
        prices: state.prices,
        rounds: state.round,
        transcript,
    })
}

fn allocation(owner: &[usize], buyers: usize) -> Vec<Bundle> {
    let mut out = vec![Bundle::EMPTY; buyers];
    for (g, &b) in owner.iter().enumerate() {
        out[b] = out[b].with(g);
    }
    out
}

/// Total value of an allocation.
pub fn welfare(valuations: &[Valuation], allocation: &[Bundle]) -> Result<Value> {
    if valuations.len() != allocation.len() {
        return Err(Error::LengthMismatch { expected: valuations.len(), found: allocation.len() });
    }
    Ok(Value::sum(valuations.iter().zip(allocation).map(|(v, &b)| v.get(b)))?)
}

/// Largest number of allocations `optimal_welfare` will enumerate.
pub const MAX_ALLOCATIONS: u64 = 1 << 20;

/// Maximum welfare over all ways to give each good to one buyer or to
/// nobody; the first maximizer in enumeration order (good 1 most
/// significant, "nobody" last) is returned.
pub fn optimal_welfare(valuations: &[Valuation]) -> Result<(Value, Vec<Bundle>)> {
    let first = valuations
        .first()
        .ok_or_else(|| Error::InvalidArgument("welfare needs at least one buyer".into()))?;
    let goods = first.goods();
    if let Some(bad) = valuations.iter().find(|v| v.goods() != goods) {
        return Err(Error::GoodsMismatch { left: goods, right: bad.goods() });
    }
    let choices = valuations.len() as u64 + 1;
    let total = u32::try_from(goods)
        .ok()
        .and_then(|k| choices.checked_pow(k))
        .filter(|&t| t <= MAX_ALLOCATIONS)
        .ok_or_else(|| Error::InvalidArgument(format!(
            "{} buyers and {goods} goods exceed {MAX_ALLOCATIONS} allocations",
            valuations.len()
        )))?;
    let mut best: Option<(Value, Vec<Bundle>)> = None;
    let mut digits = vec![0u64; goods];
    for _ in 0..total {
        let mut alloc = vec![Bundle::EMPTY; valuations.len()];
        for (g, &d) in digits.iter().enumerate() {
            if (d as usize) < valuations.len() {
                alloc[d as usize] = alloc[d as usize].with(g);
            }
        }
        let w = welfare(valuations, &alloc)?;
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, alloc));
        }
        // Increment, last good least significant.
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < choices {
                break;
            }
            *d = 0;
        }
    }
    Ok(best.expect("at least one allocation"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::single_unit;

    fn ints(goods: usize, xs: &[i64]) -> Valuation {
        Valuation::from_ints(goods, xs).unwrap()
    }

    #[test]
    fn single_buyer_takes_everything_for_free() {
        let v = ints(2, &[0, 3, 4, 5]);
        let out = run_auction(std::slice::from_ref(&v), 9).unwrap();
        assert_eq!(out.prices, vec![0, 0]);
        assert_eq!(out.allocation, vec![Bundle::full(2)]);
        assert_eq!(out.rounds, 0);
        let (w, alloc) = optimal_welfare(&[v]).unwrap();
        assert_eq!((w, alloc), (Value::int(5), vec![Bundle::full(2)]));
    }

    #[test]
    fn one_good_goes_to_the_higher_value() {
        for seed in 0..20 {
            let out = run_auction(&[ints(1, &[0, 5]), ints(1, &[0, 3])], seed).unwrap();
            assert_eq!(out.allocation, vec![Bundle(1), Bundle::EMPTY], "seed {seed}");
            assert!((3..=4).contains(&out.prices[0]), "seed {seed}: {:?}", out.prices);
        }
    }

    #[test]
    fn brute_force_welfare() {
        let w1 = single_unit(&[Value::int(3), Value::int(1)]).unwrap();
        let w2 = single_unit(&[Value::int(2), Value::int(2)]).unwrap();
        let (w, alloc) = optimal_welfare(&[w1, w2]).unwrap();
        assert_eq!(w, Value::int(5));
        assert_eq!(alloc, vec![Bundle(1), Bundle(2)]);
    }

    #[test]
    fn prices_never_fall_and_transcript_is_stable() {
        let vals = [ints(2, &[0, 4, 3, 6]), ints(2, &[0, 3, 4, 5])];
        let out = run_auction(&vals, 3).unwrap();
        for pair in out.transcript.windows(2) {
            assert!(pair[0].prices.iter().zip(&pair[1].prices).all(|(a, b)| a <= b));
        }
        assert_eq!(out.transcript.len(), out.rounds + 1);
        assert_eq!(out, run_auction(&vals, 3).unwrap());
        let first = out.transcript[0].to_string();
        assert!(first.starts_with("round 0: bids 1:{} 2:{} awards [] prices (0,0) owners ("));
    }

    #[test]
    fn complementarity_can_strand_a_buyer() {
        // Buyer 1 values only the pair; buyer 2 wants good 1 alone.
        let pair = ints(2, &[0, 0, 0, 10]);
        let single = single_unit(&[Value::int(9), Value::int(0)]).unwrap();
        let vals = [pair, single];
        let (opt, _) = optimal_welfare(&vals).unwrap();
        let stranded = (0..32).any(|seed| {
            let out = run_auction(&vals, seed).unwrap();
            welfare(&vals, &out.allocation).unwrap() < opt
        });
        assert!(stranded);
    }

    #[test]
    fn tie_break_prefers_held_then_low_goods() {
        let held = Bundle(0b100);
        assert!(preferred(Bundle(0b100), Bundle(0b011), held));
        assert!(preferred(Bundle(0b001), Bundle(0b010), Bundle::EMPTY));
        assert!(preferred(Bundle(0b011), Bundle(0b010), Bundle::EMPTY));
        assert!(!preferred(Bundle(0b010), Bundle(0b010), Bundle::EMPTY));
    }

    #[test]
    fn rejects_fractional_values_and_empty_markets() {
        let v = Valuation::new(1, vec![Value::ZERO, Value::new(1, 2)]).unwrap();
        assert!(run_auction(&[v], 0).is_err());
        assert!(run_auction(&[], 0).is_err());
        assert!(optimal_welfare(&[]).is_err());
    }
}
