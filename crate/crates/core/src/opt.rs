//! Optimal trade scheduling for a known basic profile.
//!
//! [`compute_opt`] runs the O(T²) dynamic program over sell slots and
//! reconstructs the buy/sell slot sets. Two independent routes verify it:
//! [`brute_force_payoff`] enumerates every interleaved schedule (bounded
//! horizon), and [`greedy_payoff`] evaluates the closed-form
//! sum-of-positive-differences optimum for unlimited transactions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::BasicProfile;

/// Horizon bound for the exhaustive oracle (2^T schedules).
const BRUTE_FORCE_MAX_T: usize = 16;

/// Optimal trading plan for one asset.
///
/// `opt[t]` is the maximum cumulative payoff realizable by the end of slot
/// `t` with all positions closed (`opt[0] = 0`). Buy and sell slots
/// strictly interleave: `buys[0] < sells[0] < buys[1] < sells[1] < …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradingPlan {
    pub asset_id: String,
    /// DP table over slots `0..=T`.
    pub opt: Vec<f64>,
    /// Buy slots, ascending (1-based).
    pub buys: Vec<usize>,
    /// Sell slots, ascending (1-based).
    pub sells: Vec<usize>,
    /// `max_t opt[t]`.
    pub payoff: f64,
}

impl TradingPlan {
    /// Buy/sell pairs in chronological order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.buys.iter().copied().zip(self.sells.iter().copied())
    }

    /// Recomputes the payoff by walking the recorded pairs.
    pub fn replay_payoff(&self, profile: &BasicProfile) -> f64 {
        self.pairs()
            .map(|(b, s)| profile.value(s) - profile.value(b))
            .sum()
    }
}

/// Flat record for plan files: `{asset_id, payoff, buys, sells}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanRecord {
    pub asset_id: String,
    pub payoff: f64,
    pub buys: Vec<usize>,
    pub sells: Vec<usize>,
}

impl From<&TradingPlan> for PlanRecord {
    fn from(plan: &TradingPlan) -> Self {
        PlanRecord {
            asset_id: plan.asset_id.clone(),
            payoff: plan.payoff,
            buys: plan.buys.clone(),
            sells: plan.sells.clone(),
        }
    }
}

/// Runs the sell-slot dynamic program and reconstructs trading points.
///
/// Recurrence: `opt[t] = max(opt[t-1], max_{t' < t} [opt[t'] + v(t) -
/// min_{t' <= t'' < t} v(t'')])`. Ties in the maximizing `t'` and in the
/// minimizing buy slot resolve to the earliest slot, so the reconstruction
/// is deterministic. Zero-gain trades are not recorded.
pub fn compute_opt(profile: &BasicProfile) -> Result<TradingPlan> {
    if profile.is_empty() {
        return Err(Error::domain("cannot plan over an empty profile"));
    }
    let t_max = profile.len();
    let v = |t: usize| profile.value(t);

    // opt[t] for t = 0..=T; opt[0] = opt[1] = 0.
    let mut opt = vec![0.0_f64; t_max + 1];
    for t in 2..=t_max {
        let mut best = opt[t - 1];
        let mut window_min = f64::INFINITY;
        // Walk t' downward keeping min over [t', t).
        for t_prime in (1..t).rev() {
            window_min = window_min.min(v(t_prime));
            let candidate = opt[t_prime] + v(t) - window_min;
            if candidate > best {
                best = candidate;
            }
        }
        opt[t] = best;
    }
    let payoff = opt[t_max];

    // Backtrack from the earliest slot achieving the final value. Earliest
    // tie-breaking keeps the pairs strictly interleaved: a merged
    // single-pair route always exists at an earlier t' than any
    // sell-then-rebuy-in-place route.
    let mut pairs_rev: Vec<(usize, usize)> = Vec::new();
    let mut target = payoff;
    while target > 0.0 {
        let sell = (1..=t_max)
            .find(|&t| opt[t] == target)
            .expect("target value present in table");
        let mut found = None;
        let mut window_min = f64::INFINITY;
        let mut window_argmin = sell;
        // Earliest t' wins: scan downward recording, then pick the lowest.
        for t_prime in (1..sell).rev() {
            if v(t_prime) <= window_min {
                // `<=` keeps the earliest argmin as the scan moves left.
                window_min = v(t_prime);
                window_argmin = t_prime;
            }
            if opt[t_prime] + v(sell) - window_min == target {
                found = Some((t_prime, window_argmin));
            }
        }
        let (t_prime, buy) =
            found.expect("optimal decomposition exists for a positive table value");
        pairs_rev.push((buy, sell));
        target = opt[t_prime];
    }
    pairs_rev.reverse();

    let buys = pairs_rev.iter().map(|&(b, _)| b).collect();
    let sells = pairs_rev.iter().map(|&(_, s)| s).collect();
    Ok(TradingPlan {
        asset_id: profile.asset_id.clone(),
        opt,
        buys,
        sells,
        payoff,
    })
}

/// Exhaustively enumerates every strictly interleaved buy/sell schedule
/// and returns the best total payoff. Horizons above 16 slots are refused.
pub fn brute_force_payoff(profile: &BasicProfile) -> Result<f64> {
    if profile.is_empty() {
        return Err(Error::domain("cannot enumerate an empty profile"));
    }
    if profile.len() > BRUTE_FORCE_MAX_T {
        return Err(Error::domain(format!(
            "exhaustive enumeration capped at T = {BRUTE_FORCE_MAX_T} (got {})",
            profile.len()
        )));
    }

    fn recurse(values: &[f64], i: usize, holding: Option<f64>) -> f64 {
        if i == values.len() {
            // An unclosed buy is not a valid schedule.
            return if holding.is_some() { f64::NEG_INFINITY } else { 0.0 };
        }
        let skip = recurse(values, i + 1, holding);
        let act = match holding {
            None => recurse(values, i + 1, Some(values[i])),
            Some(buy) => values[i] - buy + recurse(values, i + 1, None),
        };
        skip.max(act)
    }

    Ok(recurse(&profile.values, 0, None))
}

/// Closed-form optimum for unlimited transactions: the sum of positive
/// consecutive differences.
pub fn greedy_payoff(profile: &BasicProfile) -> Result<f64> {
    if profile.is_empty() {
        return Err(Error::domain("cannot evaluate an empty profile"));
    }
    Ok(profile
        .values
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0.0))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(values: &[f64]) -> BasicProfile {
        BasicProfile::new("test", values.to_vec()).unwrap()
    }

    #[test]
    fn monotone_decreasing_has_no_trades() {
        let plan = compute_opt(&profile(&[5.0, 4.0, 3.0])).unwrap();
        assert_eq!(plan.payoff, 0.0);
        assert!(plan.buys.is_empty());
        assert!(plan.sells.is_empty());
    }

    #[test]
    fn single_rise() {
        let plan = compute_opt(&profile(&[1.0, 5.0])).unwrap();
        assert_eq!(plan.payoff, 4.0);
        assert_eq!(plan.buys, vec![1]);
        assert_eq!(plan.sells, vec![2]);
    }

    #[test]
    fn two_dips_two_trades() {
        let plan = compute_opt(&profile(&[3.0, 1.0, 4.0, 1.0, 5.0])).unwrap();
        assert_eq!(plan.payoff, 7.0);
        assert_eq!(plan.buys, vec![2, 4]);
        assert_eq!(plan.sells, vec![3, 5]);
        assert_eq!(plan.replay_payoff(&profile(&[3.0, 1.0, 4.0, 1.0, 5.0])), 7.0);
    }

    #[test]
    fn table_is_non_decreasing_and_anchored() {
        let plan = compute_opt(&profile(&[3.0, 1.0, 4.0, 1.0, 5.0])).unwrap();
        assert_eq!(plan.opt[0], 0.0);
        for w in plan.opt.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn rising_profile_merges_into_one_pair() {
        let plan = compute_opt(&profile(&[1.0, 2.0, 4.0])).unwrap();
        assert_eq!(plan.payoff, 3.0);
        assert_eq!(plan.buys, vec![1]);
        assert_eq!(plan.sells, vec![3]);
    }

    #[test]
    fn flat_profile_records_nothing() {
        let plan = compute_opt(&profile(&[2.0, 2.0, 2.0])).unwrap();
        assert_eq!(plan.payoff, 0.0);
        assert!(plan.buys.is_empty());
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_payoff(&profile(&[1.0, 5.0])).unwrap(), 4.0);
        assert_eq!(
            brute_force_payoff(&profile(&[3.0, 1.0, 4.0, 1.0, 5.0])).unwrap(),
            7.0
        );
        assert_eq!(brute_force_payoff(&profile(&[2.0, 2.0, 2.0])).unwrap(), 0.0);
    }

    #[test]
    fn brute_force_refuses_long_horizons() {
        let long = profile(&[1.0; 17]);
        assert!(brute_force_payoff(&long).is_err());
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(
            greedy_payoff(&profile(&[3.0, 1.0, 4.0, 1.0, 5.0])).unwrap(),
            7.0
        );
        assert_eq!(greedy_payoff(&profile(&[5.0, 4.0, 3.0])).unwrap(), 0.0);
        assert_eq!(greedy_payoff(&profile(&[1.0, 2.0, 4.0])).unwrap(), 3.0);
    }

    #[test]
    fn three_routes_agree_on_small_grid() {
        // small deterministic sweep; the full randomized sweep lives in the
        // acceptance suite
        let cases: Vec<Vec<f64>> = vec![
            vec![2.0, 1.0, 3.0, 0.0, 4.0, 2.0],
            vec![9.0, 9.0, 9.0, 9.0],
            vec![0.0, 10.0, 0.0, 10.0, 0.0, 10.0],
            vec![4.0, 7.0, 2.0, 8.0, 1.0, 1.0, 6.0],
        ];
        for values in cases {
            let p = profile(&values);
            let plan = compute_opt(&p).unwrap();
            let brute = brute_force_payoff(&p).unwrap();
            let greedy = greedy_payoff(&p).unwrap();
            assert_eq!(plan.payoff, brute, "dp vs brute on {values:?}");
            assert_eq!(plan.payoff, greedy, "dp vs greedy on {values:?}");
            assert_eq!(plan.replay_payoff(&p), plan.payoff);
        }
    }
}
