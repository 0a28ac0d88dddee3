//! Discrete-time market simulator and calibration.
//!
//! # Market mechanics
//!
//! One run walks slots `1..=T` over `K` assets priced by a shared (or
//! per-asset) basic profile:
//!
//! - The platform releases inventory along the largest-remainder quota
//!   line (see [`crate::econ::platform_release`]); the release decided at
//!   decision step `t` goes on sale in slot `max(t, 1)`.
//! - Participation is uniform: while an asset's profile shows any price
//!   dispersion, all `N` players bid on every asset offered in every slot;
//!   a perfectly flat profile gives players no signal and nobody trades
//!   (the zero branch of the buy/sell/hold rule).
//! - Holders relinquish their asset each slot at the basic price and the
//!   platform immediately reallocates it to a lottery winner. Relayed
//!   sales carry the demand premium: the winner is credited incentive
//!   tokens worth `traded_value(v, α) − v`. Fresh platform inventory
//!   sells at the posted price without a premium.
//! - With the incentive schedule enabled, a buyer in slot `t` pays
//!   `v(t) − w(t)`.
//! - At the horizon the platform redeems every outstanding asset at the
//!   final price.
//!
//! Per-position accounting follows the cumulative-profit formula: sale
//! price minus purchase price plus holding benefit `f` per held slot,
//! plus any incentive credits. `mean_trade_profit` divides the total
//! player profit by the number of player sales, which is the quantity
//! comparable to per-trade profit averages computed from transfer logs;
//! `mean_player_profit` divides by `N`.
//!
//! Runs are deterministic in `(scenario, seed)`: all randomness (lottery
//! draws, price shocks) flows from one seeded generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::econ::{platform_release, platform_profit, traded_value, EconomyParams, PlatformBook};
use crate::error::{Error, Result};
use crate::mechanism::{allocate_index, incentive_schedule, IncentiveSchedule};
use crate::opt::compute_opt;
use crate::profile::{build_basic_profile, BasicProfile};

/// Upper end of the calibration search range for `c`.
pub const C_MAX: f64 = 4.0;

const BISECTION_MAX_ITERS: usize = 200;

/// Where a scenario's price profiles come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSource {
    /// Straight-line profile from average first-hand sale price to average
    /// trade price, shared by every asset.
    Aggregates { sell_profit: f64, trade_price: f64 },
    /// Path to a profile CSV (`asset_id,t,value`).
    Csv { profile_csv: String },
    /// Explicit profiles; one shared or one per asset.
    Explicit { profiles: Vec<BasicProfile> },
}

/// Shock process applied to realized trade prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shock {
    #[default]
    None,
    Gaussian { sigma: f64 },
}

/// Price estimator the platform uses for its release decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    /// Next price expected to equal the current price.
    #[default]
    Martingale,
    /// Next price extrapolates the last one-slot change.
    LastDiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncentiveToggle {
    pub enabled: bool,
}

/// Full parameterization of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub economy: EconomyParams,
    pub profile: ProfileSource,
    pub incentive: IncentiveToggle,
    #[serde(default)]
    pub shock: Shock,
    #[serde(default)]
    pub estimator: Estimator,
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: u32,
}

fn default_runs() -> u32 {
    1
}

impl Scenario {
    /// Resolves the profile source into concrete per-asset profiles
    /// (shared profiles stay as a single entry).
    pub fn resolve_profiles(&self) -> Result<Vec<BasicProfile>> {
        let profiles = match &self.profile {
            ProfileSource::Aggregates {
                sell_profit,
                trade_price,
            } => vec![build_basic_profile(
                *sell_profit,
                *trade_price,
                self.economy.lifespan,
            )?],
            ProfileSource::Csv { profile_csv } => crate::profile::read_profiles_file(profile_csv)?,
            ProfileSource::Explicit { profiles } => profiles.clone(),
        };
        if profiles.is_empty() {
            return Err(Error::domain("scenario has no profiles"));
        }
        if profiles.len() != 1 && profiles.len() != self.economy.assets as usize {
            return Err(Error::domain(format!(
                "need 1 shared profile or K = {} profiles (got {})",
                self.economy.assets,
                profiles.len()
            )));
        }
        for p in &profiles {
            if p.len() != self.economy.lifespan as usize {
                return Err(Error::domain(format!(
                    "profile {} covers {} slots, scenario lifespan is {}",
                    p.asset_id,
                    p.len(),
                    self.economy.lifespan
                )));
            }
            p.check_bounds(self.economy.floor, self.economy.cap)?;
        }
        Ok(profiles)
    }

    pub fn validate(&self) -> Result<()> {
        self.economy.validate()?;
        if self.runs == 0 {
            return Err(Error::domain("runs must be at least 1"));
        }
        if let Shock::Gaussian { sigma } = self.shock {
            if sigma < 0.0 {
                return Err(Error::domain("shock sigma must be non-negative"));
            }
        }
        self.resolve_profiles().map(|_| ())
    }
}

/// Outcome of a single simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Total player profit divided by `N`.
    pub mean_player_profit: f64,
    /// Total player profit divided by the number of player sales; the
    /// quantity comparable to per-trade averages from transfer logs.
    pub mean_trade_profit: f64,
    /// Release-book profit per the cumulative-profit formula.
    pub platform_profit: f64,
    pub total_player_profit: f64,
    /// Player sale events (relinquishments and horizon settlements).
    pub player_trade_count: u64,
    /// Incentive amounts paid out through purchase discounts.
    pub incentive_cost: f64,
    /// Cash received by the platform across every sale to a player.
    pub platform_sale_revenue: f64,
    /// Cash paid by players across every purchase.
    pub player_purchase_outlay: f64,
    /// Resale count per asset.
    pub per_asset_trades: Vec<u32>,
    /// Bidder count per slot (outer) and asset (inner).
    pub alpha_trace: Vec<Vec<u32>>,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy)]
enum AssetState {
    Unreleased,
    OnSale { fresh: bool },
    Held {
        cost_paid: f64,
        credit: f64,
        buy_slot: u32,
    },
    Settled,
}

/// Runs one market simulation.
pub fn simulate(scenario: &Scenario, seed: u64) -> Result<RunResult> {
    scenario.validate()?;
    let params = &scenario.economy;
    let n_assets = params.assets as usize;
    let t_max = params.lifespan as usize;
    let profiles = scenario.resolve_profiles()?;
    let shared = profiles.len() == 1;

    let profile_for = |asset: usize| -> &BasicProfile {
        if shared {
            &profiles[0]
        } else {
            &profiles[asset]
        }
    };

    // Plans and schedules are common knowledge, computed on the clean
    // profiles (one shared computation when all assets price alike).
    let schedules: Vec<Option<IncentiveSchedule>> = if scenario.incentive.enabled {
        profiles
            .iter()
            .map(|p| {
                let plan = compute_opt(p)?;
                incentive_schedule(p, &plan).map(Some)
            })
            .collect::<Result<_>>()?
    } else {
        profiles.iter().map(|_| None).collect()
    };
    let schedule_for = |asset: usize| -> Option<&IncentiveSchedule> {
        let idx = if shared { 0 } else { asset };
        schedules[idx].as_ref()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Realized per-asset trade prices: profile plus optional shock,
    // clamped to the price band. With no shock the profile is the path.
    let mut realized: Vec<Vec<f64>> = Vec::with_capacity(profiles.len());
    for p in &profiles {
        let mut path = p.values.clone();
        if let Shock::Gaussian { sigma } = scenario.shock {
            for v in path.iter_mut() {
                let shock = sigma * standard_normal(&mut rng);
                *v = params.clamp_price(*v + shock);
            }
        }
        realized.push(path);
    }
    let price_at = |asset: usize, slot: usize| -> f64 {
        let idx = if shared { 0 } else { asset };
        realized[idx][slot - 1]
    };

    // Release decisions walk the quota line on the realized path of the
    // first profile (assets share one market clock).
    let estimate = |slot: usize| -> f64 {
        let v_t = realized[0][slot - 1];
        match scenario.estimator {
            Estimator::Martingale => v_t,
            Estimator::LastDiff => {
                if slot == 1 {
                    v_t
                } else {
                    v_t + (v_t - realized[0][slot - 2])
                }
            }
        }
    };
    let mut cohort_at_slot = vec![0u32; t_max + 1];
    let mut released = 0u32;
    for t in 0..=params.lifespan {
        let slot = (t.max(1) as usize).min(t_max);
        let k = platform_release(t, released, realized[0][slot - 1], estimate(slot), params)?;
        released += k;
        cohort_at_slot[slot] += k;
    }

    let mut states = vec![AssetState::Unreleased; n_assets];
    let mut next_asset = 0usize;

    let mut total_player_profit = 0.0_f64;
    let mut player_trade_count = 0u64;
    let mut incentive_cost = 0.0_f64;
    let mut platform_sale_revenue = 0.0_f64;
    let mut player_purchase_outlay = 0.0_f64;
    let mut per_asset_trades = vec![0u32; n_assets];
    let mut alpha_trace = vec![vec![0u32; n_assets]; t_max];
    let mut book = PlatformBook::default();

    for slot in 1..=t_max {
        // Fresh inventory enters the market.
        for _ in 0..cohort_at_slot[slot] {
            states[next_asset] = AssetState::OnSale { fresh: true };
            next_asset += 1;
        }

        // Holders relinquish at the basic price.
        for asset in 0..n_assets {
            if let AssetState::Held {
                cost_paid,
                credit,
                buy_slot,
            } = states[asset]
            {
                let sale = price_at(asset, slot);
                total_player_profit +=
                    sale - cost_paid + credit + params.f * (slot as u32 - buy_slot) as f64;
                player_trade_count += 1;
                per_asset_trades[asset] += 1;
                states[asset] = AssetState::OnSale { fresh: false };
            }
        }

        // Purchase round: lottery per asset on sale.
        let mut fresh_sold = 0u32;
        for asset in 0..n_assets {
            let fresh = match states[asset] {
                AssetState::OnSale { fresh } => fresh,
                _ => continue,
            };
            if profile_for(asset).is_flat() {
                // no price signal, nobody bids; inventory stays put
                continue;
            }
            let alpha = params.players;
            alpha_trace[slot - 1][asset] = alpha;
            let _winner = allocate_index(alpha as usize, rng.gen::<u64>())?;

            let base = price_at(asset, slot);
            let w = schedule_for(asset).map_or(0.0, |s| s.w_at(slot));
            let paid = base - w;
            let credit = if fresh {
                0.0
            } else {
                traded_value(base, alpha, params)? - base
            };
            player_purchase_outlay += paid;
            platform_sale_revenue += paid;
            incentive_cost += w;
            if fresh {
                fresh_sold += 1;
            }
            states[asset] = AssetState::Held {
                cost_paid: paid,
                credit,
                buy_slot: slot as u32,
            };
        }
        if fresh_sold > 0 {
            book.record(fresh_sold, price_at(0, slot));
        }

        // Horizon settlement: the platform redeems whatever is still held.
        if slot == t_max {
            for asset in 0..n_assets {
                if let AssetState::Held {
                    cost_paid,
                    credit,
                    buy_slot,
                } = states[asset]
                {
                    let sale = price_at(asset, slot);
                    total_player_profit +=
                        sale - cost_paid + credit + params.f * (slot as u32 - buy_slot) as f64;
                    player_trade_count += 1;
                    per_asset_trades[asset] += 1;
                    states[asset] = AssetState::Settled;
                }
            }
        }
    }

    let mean_trade_profit = if player_trade_count == 0 {
        0.0
    } else {
        total_player_profit / player_trade_count as f64
    };
    Ok(RunResult {
        mean_player_profit: total_player_profit / params.players as f64,
        mean_trade_profit,
        platform_profit: platform_profit(&book, params)?,
        total_player_profit,
        player_trade_count,
        incentive_cost,
        platform_sale_revenue,
        player_purchase_outlay,
        per_asset_trades,
        alpha_trace,
        rng_seed: seed,
    })
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Mean, standard deviation, and 95% confidence half-width of one metric
/// across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAggregate {
    pub mean: f64,
    pub stdev: f64,
    pub ci95_half_width: f64,
}

impl MetricAggregate {
    fn over(values: &[f64]) -> MetricAggregate {
        let n = values.len() as f64;
        if values.iter().all(|&v| v == values[0]) {
            // identical samples: zero spread, exactly
            return MetricAggregate {
                mean: values[0],
                stdev: 0.0,
                ci95_half_width: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let stdev = variance.sqrt();
        MetricAggregate {
            mean,
            stdev,
            ci95_half_width: 1.96 * stdev / n.sqrt(),
        }
    }
}

/// Aggregate statistics over a scenario's Monte-Carlo runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloAggregate {
    pub runs: u32,
    pub mean_player_profit: MetricAggregate,
    pub mean_trade_profit: MetricAggregate,
    pub platform_profit: MetricAggregate,
    /// Per-run seeds derived from the scenario seed by the fixed mixer.
    pub run_seeds: Vec<u64>,
}

/// SplitMix64 step; the fixed mixing function turning `seed + run index`
/// into independent per-run seeds.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the scenario `scenario.runs` times with derived seeds and
/// aggregates the profit metrics.
pub fn monte_carlo(scenario: &Scenario) -> Result<MonteCarloAggregate> {
    scenario.validate()?;
    let mut player = Vec::with_capacity(scenario.runs as usize);
    let mut trade = Vec::with_capacity(scenario.runs as usize);
    let mut platform = Vec::with_capacity(scenario.runs as usize);
    let mut run_seeds = Vec::with_capacity(scenario.runs as usize);
    for i in 0..scenario.runs {
        let run_seed = mix_seed(scenario.seed, i as u64);
        let result = simulate(scenario, run_seed)?;
        player.push(result.mean_player_profit);
        trade.push(result.mean_trade_profit);
        platform.push(result.platform_profit);
        run_seeds.push(run_seed);
    }
    Ok(MonteCarloAggregate {
        runs: scenario.runs,
        mean_player_profit: MetricAggregate::over(&player),
        mean_trade_profit: MetricAggregate::over(&trade),
        platform_profit: MetricAggregate::over(&platform),
        run_seeds,
    })
}

/// Calibration outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub c: f64,
    /// Mean per-trade profit the calibrated scenario produces.
    pub achieved_profit: f64,
    pub target_profit: f64,
    pub relative_error: f64,
    pub evaluations: u32,
}

/// Finds `c ∈ [0, C_MAX]` whose simulated mean per-trade profit matches
/// the target within the relative tolerance, by bisection.
///
/// Mean profit is non-decreasing in `c` under the uniform participation
/// policy (the demand premium is the only `c`-dependent term), which is
/// what makes bisection sound. The scenario must have incentives
/// disabled; the simulated mean is taken over `scenario.runs` derived
/// seeds.
pub fn calibrate_c(scenario: &Scenario, target_mean_profit: f64, tol: f64) -> Result<CalibrationResult> {
    if scenario.incentive.enabled {
        return Err(Error::domain(
            "calibration runs with incentives disabled; the incentive-on profit is a downstream comparison",
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    if !target_mean_profit.is_finite() {
        return Err(Error::domain("target profit must be finite"));
    }
    scenario.validate()?;

    let mut evaluations = 0u32;
    let mut eval = |c: f64| -> Result<f64> {
        let mut probe = scenario.clone();
        probe.economy.c = c;
        evaluations += 1;
        Ok(monte_carlo(&probe)?.mean_trade_profit.mean)
    };
    let denom = target_mean_profit.abs().max(1e-9);
    let within = |profit: f64| (profit - target_mean_profit).abs() / denom;

    let at_zero = eval(0.0)?;
    if within(at_zero) <= tol {
        return Ok(CalibrationResult {
            c: 0.0,
            achieved_profit: at_zero,
            target_profit: target_mean_profit,
            relative_error: within(at_zero),
            evaluations,
        });
    }
    let at_max = eval(C_MAX)?;
    if target_mean_profit < at_zero || target_mean_profit > at_max {
        return Err(Error::Calibration {
            target: target_mean_profit,
            c_max: C_MAX,
            at_zero,
            at_max,
        });
    }

    let (mut lo, mut hi) = (0.0_f64, C_MAX);
    for _ in 0..BISECTION_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let profit = eval(mid)?;
        if within(profit) <= tol {
            return Ok(CalibrationResult {
                c: mid,
                achieved_profit: profit,
                target_profit: target_mean_profit,
                relative_error: within(profit),
                evaluations,
            });
        }
        if profit < target_mean_profit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Calibration {
        target: target_mean_profit,
        c_max: C_MAX,
        at_zero,
        at_max,
    })
}
