//! Incentive mechanism: per-slot incentive amounts that put every slot of
//! a buy/sell span on the optimal payoff path, the expected-payoff formula
//! for symmetric bidding, the probabilistic allocation lottery, an
//! equilibrium verifier, and a best-response probe for the two-seller
//! undercutting dynamic.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::econ::EconomyParams;
use crate::error::{Error, Result};
use crate::opt::TradingPlan;
use crate::profile::BasicProfile;

/// Absolute tolerance for incentive-path accounting identities.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Per-slot incentive amounts for one asset.
///
/// `w[t-1]` is the incentive paid to a buyer in slot `t`; it is zero on
/// the plan's own buy and sell slots and on every slot outside a
/// buy-to-sell span. Negative amounts (a surcharge) are kept as computed
/// and flagged rather than clamped, since clamping would break the path
/// identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncentiveSchedule {
    pub asset_id: String,
    /// Incentive per slot `1..=T`.
    pub w: Vec<f64>,
    /// Q: buy slots, sell slots, and every slot with a nonzero incentive.
    pub q_slots: Vec<usize>,
    /// Slots whose computed incentive came out negative.
    pub negative_slots: Vec<usize>,
}

impl IncentiveSchedule {
    pub fn w_at(&self, t: usize) -> f64 {
        self.w[t - 1]
    }

    /// Flat record for schedule files: `{asset_id, slots: [{t, w}]}`.
    pub fn to_record(&self) -> ScheduleRecord {
        ScheduleRecord {
            asset_id: self.asset_id.clone(),
            slots: self
                .w
                .iter()
                .enumerate()
                .map(|(i, &w)| ScheduleSlot { t: i + 1, w })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub asset_id: String,
    pub slots: Vec<ScheduleSlot>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleSlot {
    pub t: usize,
    pub w: f64,
}

/// A game player's action in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlayerSlotAction {
    Null,
    /// Sell the named asset (index into the scenario's asset list).
    Sell(usize),
    /// Bid to buy the named asset.
    Buy(usize),
}

/// The platform's action in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PlatformSlotAction {
    Null,
    /// Sell the asset, granting the attached incentive amount.
    PSell(usize, f64),
    /// Buy the asset back at its current price.
    PBuy(usize),
}

/// Joint strategy state for one slot: every player's action, the
/// platform's action, and the per-asset bidder counts derived from them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub player_actions: Vec<PlayerSlotAction>,
    pub platform_action: PlatformSlotAction,
    /// `alpha[j]`: number of players bidding `Buy(j)` this slot.
    pub alpha: Vec<u32>,
}

impl StrategyProfile {
    /// Builds the profile and derives `alpha` from the actions.
    pub fn from_actions(
        player_actions: Vec<PlayerSlotAction>,
        platform_action: PlatformSlotAction,
        asset_count: usize,
    ) -> Self {
        let mut alpha = vec![0u32; asset_count];
        for action in &player_actions {
            if let PlayerSlotAction::Buy(j) = action {
                alpha[*j] += 1;
            }
        }
        StrategyProfile {
            player_actions,
            platform_action,
            alpha,
        }
    }

    /// Verifies `alpha[j]` matches the recorded actions and never exceeds
    /// the player count.
    pub fn validate(&self, params: &EconomyParams) -> Result<()> {
        let mut counted = vec![0u32; self.alpha.len()];
        for action in &self.player_actions {
            if let PlayerSlotAction::Buy(j) = action {
                if *j >= self.alpha.len() {
                    return Err(Error::domain(format!("bid on unknown asset {j}")));
                }
                counted[*j] += 1;
            }
        }
        if counted != self.alpha {
            return Err(Error::domain("alpha does not match recorded buy actions"));
        }
        if self.alpha.iter().any(|&a| a > params.players) {
            return Err(Error::domain("alpha exceeds player count"));
        }
        Ok(())
    }
}

/// Solves the span identity for every intermediate slot of the plan.
///
/// For a buy slot `b` and its sell slot `s`, each `t''` strictly between
/// them receives `w(t'') = OPT(s) − OPT(b) − v(s) + v(t'')`, which makes
/// buying at `t''` at effective price `v(t'') − w(t'')` land on the same
/// cumulative payoff as the plan itself. Slots outside spans, including
/// the tail after the last sell, carry zero.
pub fn incentive_schedule(
    profile: &BasicProfile,
    plan: &TradingPlan,
) -> Result<IncentiveSchedule> {
    if plan.opt.len() != profile.len() + 1 {
        return Err(Error::domain(format!(
            "plan table covers {} slots but profile has {}",
            plan.opt.len().saturating_sub(1),
            profile.len()
        )));
    }
    let mut w = vec![0.0_f64; profile.len()];
    let mut negative_slots = Vec::new();
    for (buy, sell) in plan.pairs() {
        for t in buy + 1..sell {
            let amount = plan.opt[sell] - plan.opt[buy] - profile.value(sell) + profile.value(t);
            w[t - 1] = amount;
            if amount < 0.0 {
                negative_slots.push(t);
            }
        }
    }
    let mut q: BTreeSet<usize> = plan.buys.iter().chain(plan.sells.iter()).copied().collect();
    for (i, &amount) in w.iter().enumerate() {
        if amount != 0.0 {
            q.insert(i + 1);
        }
    }
    Ok(IncentiveSchedule {
        asset_id: profile.asset_id.clone(),
        w,
        q_slots: q.into_iter().collect(),
        negative_slots,
    })
}

/// Expected payoff of a player who bids on the given buy/sell pairs under
/// symmetric bidding: `Σ (1/α(t)) (v(t') − v(t)) + c/N` per pair. A player
/// taking no action earns zero (empty `pairs`).
///
/// `alpha[t-1]` is the bidder count in slot `t`; every buy slot must lie
/// in `q_slots` and carry at least one bidder.
pub fn expected_payoff(
    profile: &BasicProfile,
    q_slots: &[usize],
    pairs: &[(usize, usize)],
    alpha: &[u32],
    params: &EconomyParams,
) -> Result<f64> {
    if alpha.len() != profile.len() {
        return Err(Error::domain("alpha must cover every slot"));
    }
    let q: BTreeSet<usize> = q_slots.iter().copied().collect();
    let mut total = 0.0;
    for &(buy, sell) in pairs {
        if sell <= buy {
            return Err(Error::domain(format!(
                "pair sells at {sell} which is not after buy slot {buy}"
            )));
        }
        if !q.contains(&buy) {
            return Err(Error::domain(format!("buy slot {buy} not in Q")));
        }
        let a = alpha[buy - 1];
        if a == 0 {
            return Err(Error::domain(format!("no bidders recorded in slot {buy}")));
        }
        total += (profile.value(sell) - profile.value(buy)) / a as f64
            + params.c / params.players as f64;
    }
    Ok(total)
}

/// Picks the winning bidder with uniform probability, deterministically in
/// the seed.
pub fn allocate(bidders: &[String], seed: u64) -> Result<String> {
    if bidders.is_empty() {
        return Err(Error::domain("cannot allocate among zero bidders"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let winner = rng.gen_range(0..bidders.len());
    Ok(bidders[winner].clone())
}

/// Index-only variant of [`allocate`] used by the simulator's hot path.
pub fn allocate_index(n_bidders: usize, seed: u64) -> Result<usize> {
    if n_bidders == 0 {
        return Err(Error::domain("cannot allocate among zero bidders"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rng.gen_range(0..n_bidders))
}

/// One under-subsidized entry slot found by [`equilibrium_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationGain {
    /// The intermediate slot whose subsidized entry falls short.
    pub slot: usize,
    /// Shortfall against the span's optimal increment; a player bidding
    /// here would strictly prefer taking no action.
    pub gain: f64,
}

/// Equilibrium verdict for the symmetric all-bid strategy on `Q`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub is_equilibrium: bool,
    pub worst_deviation_gain: f64,
    pub deviations: Vec<DeviationGain>,
    /// Expected per-player payoff of the all-bid strategy with `alpha = N`.
    pub symmetric_payoff: f64,
}

/// Checks the symmetric all-bid strategy against unilateral single-slot
/// deviations to no action.
///
/// For each intermediate slot `t''` of a span `(b, s)`, the subsidized
/// entry must reproduce the span's optimal increment:
/// `OPT(b) + (v(s) − v(t'') + w(t'')) = OPT(s)`. A positive shortfall
/// means a player asked to bid at `t''` strictly gains by sitting out, so
/// the all-bid strategy is no equilibrium. Within tolerance the schedule
/// produced by [`incentive_schedule`] always passes.
pub fn equilibrium_check(
    profile: &BasicProfile,
    schedule: &IncentiveSchedule,
    params: &EconomyParams,
) -> Result<EquilibriumReport> {
    if schedule.w.len() != profile.len() {
        return Err(Error::domain("schedule does not cover the profile"));
    }
    let plan = crate::opt::compute_opt(profile)?;
    let mut deviations = Vec::new();
    let mut worst: f64 = 0.0;
    for (buy, sell) in plan.pairs() {
        for t in buy + 1..sell {
            let path_increment = plan.opt[sell] - plan.opt[buy];
            let entry_value = profile.value(sell) - profile.value(t) + schedule.w_at(t);
            let gain = path_increment - entry_value;
            if gain > IDENTITY_TOL {
                deviations.push(DeviationGain { slot: t, gain });
            }
            worst = worst.max(gain);
        }
    }

    // Report the symmetric expected payoff alongside the verdict.
    let alpha = vec![params.players; profile.len()];
    let pairs: Vec<(usize, usize)> = plan.pairs().collect();
    let symmetric_payoff = if pairs.is_empty() {
        0.0
    } else {
        expected_payoff(profile, &schedule.q_slots, &pairs, &alpha, params)?
    };

    Ok(EquilibriumReport {
        is_equilibrium: deviations.is_empty(),
        worst_deviation_gain: worst.max(0.0),
        deviations,
        symmetric_payoff,
    })
}

/// Snapshot of the probe's posted prices; `turn` is the seller about to
/// move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeState {
    pub prices: Vec<f64>,
    pub turn: usize,
}

/// Outcome of the alternating best-response probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub cycled: bool,
    /// The repeating state segment when a cycle was found, else empty.
    pub cycle: Vec<ProbeState>,
    pub iterations: usize,
}

/// Alternating price competition between `sellers` identical sellers.
///
/// Each mover undercuts the cheapest competitor by `undercut_step`; once a
/// competitor sits at the floor there is nothing left to undercut and the
/// mover resets to the initial price `v0`. Repetition of an exact state
/// (prices and turn) with period two or more counts as a cycle; a fixed
/// point (a monopolist holding its price) does not.
pub fn best_response_probe(
    params: &EconomyParams,
    sellers: usize,
    price_floor: f64,
    undercut_step: f64,
    max_iters: usize,
) -> Result<ProbeReport> {
    if max_iters == 0 {
        return Err(Error::domain("max_iters must be positive"));
    }
    if undercut_step <= 0.0 {
        return Err(Error::domain("undercut_step must be positive"));
    }
    if price_floor < params.floor {
        return Err(Error::domain("price_floor below the economy's price floor"));
    }
    if sellers == 0 {
        return Err(Error::domain("need at least one seller"));
    }

    let mut state = ProbeState {
        prices: vec![params.v0; sellers],
        turn: 0,
    };
    let mut trace: Vec<ProbeState> = vec![state.clone()];
    let key = |s: &ProbeState| {
        let mut k: Vec<u64> = s.prices.iter().map(|p| p.to_bits()).collect();
        k.push(s.turn as u64);
        k
    };
    let mut seen = std::collections::HashMap::new();
    seen.insert(key(&state), 0usize);

    for step in 1..=max_iters {
        let mover = state.turn;
        let min_opponent = state
            .prices
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != mover)
            .map(|(_, &p)| p)
            .fold(f64::INFINITY, f64::min);
        let response = if min_opponent.is_infinite() {
            // monopolist: nothing to respond to
            state.prices[mover]
        } else if min_opponent <= price_floor {
            params.v0
        } else {
            (min_opponent - undercut_step).max(price_floor)
        };
        state.prices[mover] = response;
        state.turn = (mover + 1) % sellers;

        if let Some(&first) = seen.get(&key(&state)) {
            let cycle: Vec<ProbeState> = trace[first..].to_vec();
            // A period-one repeat is a fixed point, not a cycle.
            let cycled = cycle.len() >= 2;
            return Ok(ProbeReport {
                cycled,
                cycle: if cycled { cycle } else { Vec::new() },
                iterations: step,
            });
        }
        seen.insert(key(&state), trace.len());
        trace.push(state.clone());
    }

    Ok(ProbeReport {
        cycled: false,
        cycle: Vec::new(),
        iterations: max_iters,
    })
}
