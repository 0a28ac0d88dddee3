//! Economy primitives: parameters, decision rules, and profit accounting.
//!
//! Everything here is a pure function of its inputs. Prices are abstract
//! currency units carried as `f64`; accounting comparisons elsewhere in the
//! crate use an absolute tolerance of `1e-9`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global parameters of a game economy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyParams {
    /// Player count.
    #[serde(rename = "N")]
    pub players: u32,
    /// Total asset count.
    #[serde(rename = "K")]
    pub assets: u32,
    /// Lifespan in slots.
    #[serde(rename = "T")]
    pub lifespan: u32,
    /// Rarity/demand constant.
    pub c: f64,
    /// Per-slot holding benefit of one asset.
    pub f: f64,
    /// Development-cost constant (total development cost is `C0 * K * f`).
    #[serde(rename = "C0")]
    pub c0: f64,
    /// Initial asset price.
    pub v0: f64,
    /// Global price floor.
    #[serde(rename = "L")]
    pub floor: f64,
    /// Global price cap.
    #[serde(rename = "U")]
    pub cap: f64,
}

impl EconomyParams {
    /// Checks the type invariants: counts ≥ 1, non-negative constants,
    /// `floor ≤ v0 ≤ cap`.
    pub fn validate(&self) -> Result<()> {
        if self.players == 0 || self.assets == 0 || self.lifespan == 0 {
            return Err(Error::domain("N, K and T must all be at least 1"));
        }
        if self.c < 0.0 || self.f < 0.0 || self.c0 < 0.0 {
            return Err(Error::domain("c, f and C0 must be non-negative"));
        }
        if !(self.floor <= self.v0 && self.v0 <= self.cap) {
            return Err(Error::domain(format!(
                "initial price {} outside bounds [{}, {}]",
                self.v0, self.floor, self.cap
            )));
        }
        Ok(())
    }

    /// Total development cost `C0 * K * f`.
    pub fn development_cost(&self) -> f64 {
        self.c0 * self.assets as f64 * self.f
    }

    /// Clamps a price into the global `[floor, cap]` band.
    pub fn clamp_price(&self, v: f64) -> f64 {
        v.clamp(self.floor, self.cap)
    }
}

/// One slot of market price state.
///
/// The next realized price is `v_est + shock`, clamped into the global
/// price band (excursions beyond the band are cut off, not reflected).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceState {
    /// Current price.
    pub v_t: f64,
    /// Market estimate of the next-slot price.
    pub v_est: f64,
    /// External shock hitting between this slot and the next.
    pub shock: f64,
}

impl PriceState {
    /// Next-slot price: estimate plus shock, clamped to the price band.
    pub fn next_price(&self, params: &EconomyParams) -> f64 {
        params.clamp_price(self.v_est + self.shock)
    }
}

/// A player's position in one asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    /// Slot in which the asset was bought.
    pub buy_slot: u32,
    /// Price paid.
    pub buy_price: f64,
    /// Slot in which the asset was sold, if closed.
    pub sell_slot: Option<u32>,
    /// Price received, if closed.
    pub sell_price: Option<f64>,
}

impl Position {
    pub fn open(buy_slot: u32, buy_price: f64) -> Self {
        Position {
            buy_slot,
            buy_price,
            sell_slot: None,
            sell_price: None,
        }
    }

    pub fn closed(buy_slot: u32, buy_price: f64, sell_slot: u32, sell_price: f64) -> Self {
        Position {
            buy_slot,
            buy_price,
            sell_slot: Some(sell_slot),
            sell_price: Some(sell_price),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.sell_slot.is_some()
    }
}

/// The platform's release history: per-slot release counts and sale prices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlatformBook {
    /// Assets released (and sold) per slot.
    pub releases: Vec<u32>,
    /// Sale price per slot, aligned with `releases`.
    pub prices: Vec<f64>,
}

impl PlatformBook {
    pub fn record(&mut self, released: u32, price: f64) {
        self.releases.push(released);
        self.prices.push(price);
    }

    pub fn total_released(&self) -> u32 {
        self.releases.iter().sum()
    }
}

/// A player's three-way slot decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlayerAction {
    Buy,
    Sell,
    Hold,
}

/// Demand-inflated traded value `v * (1 + c * alpha / N)`.
///
/// `alpha` is the number of players bidding to buy; with no bidders the
/// traded value equals the basic value, with all `N` bidding it is
/// `(1 + c) * v`.
pub fn traded_value(v: f64, alpha: u32, params: &EconomyParams) -> Result<f64> {
    if alpha > params.players {
        return Err(Error::domain(format!(
            "alpha {} exceeds player count {}",
            alpha, params.players
        )));
    }
    if v < 0.0 {
        return Err(Error::domain("base price must be non-negative"));
    }
    Ok(v * (1.0 + params.c * alpha as f64 / params.players as f64))
}

/// Sign classification of `v_est + f - v_t`: buy on positive expected
/// return, sell on negative, hold on exact balance.
pub fn player_decision(v_t: f64, v_est: f64, f: f64) -> PlayerAction {
    let signal = v_est + f - v_t;
    if signal > 0.0 {
        PlayerAction::Buy
    } else if signal < 0.0 {
        PlayerAction::Sell
    } else {
        PlayerAction::Hold
    }
}

/// Number of assets the platform releases in slot `t`.
///
/// When the market estimate exceeds the current price the platform tracks
/// the cumulative quota line `(t+1)K/(T+1)`; at equality it stays on the
/// same line (one steady per-slot quota); below it holds everything.
/// Quotas are resolved with the largest-remainder rule, so cumulative
/// releases drift less than one unit from the ideal line and reach exactly
/// `K` when the estimate never falls below the price.
pub fn platform_release(
    t: u32,
    released_so_far: u32,
    v_t: f64,
    v_est: f64,
    params: &EconomyParams,
) -> Result<u32> {
    if released_so_far > params.assets {
        return Err(Error::state(format!(
            "released_so_far {} exceeds K = {}",
            released_so_far, params.assets
        )));
    }
    if t > params.lifespan {
        return Err(Error::domain(format!(
            "slot {} beyond lifespan {}",
            t, params.lifespan
        )));
    }
    if v_est < v_t {
        return Ok(0);
    }
    // Integer arithmetic keeps the quota line exact for exact divisions.
    let k = params.assets as u64;
    let denom = params.lifespan as u64 + 1;
    let quota = ((t as u64 + 1) * k) / denom;
    let release = quota.saturating_sub(released_so_far as u64);
    Ok(release.min(k - released_so_far as u64) as u32)
}

/// Cumulative platform profit per the release book: `Σ v_n k_n − C0·K·f`.
pub fn platform_profit(book: &PlatformBook, params: &EconomyParams) -> Result<f64> {
    if book.releases.len() != book.prices.len() {
        return Err(Error::domain(
            "platform book releases and prices must align per slot",
        ));
    }
    let revenue: f64 = book
        .releases
        .iter()
        .zip(&book.prices)
        .map(|(&k, &v)| k as f64 * v)
        .sum();
    Ok(revenue - params.development_cost())
}

/// Cumulative player profit at slot `t`.
///
/// Closed positions contribute realized spread plus holding benefit over
/// the held interval; open positions are carried at cost (subtracted) plus
/// holding benefit accrued up to `t`.
pub fn player_profit(closed: &[Position], open: &[Position], t: u32, f: f64) -> Result<f64> {
    let mut total = 0.0;
    for p in closed {
        let (s, sell_price) = match (p.sell_slot, p.sell_price) {
            (Some(s), Some(v)) => (s, v),
            _ => return Err(Error::domain("closed position missing sell slot or price")),
        };
        if s <= p.buy_slot {
            return Err(Error::domain(format!(
                "position sold at slot {} not after buy slot {}",
                s, p.buy_slot
            )));
        }
        total += sell_price - p.buy_price + f * (s - p.buy_slot) as f64;
    }
    for p in open {
        if p.is_closed() {
            return Err(Error::domain("open position carries a sell record"));
        }
        if p.buy_slot > t {
            return Err(Error::domain("open position bought after current slot"));
        }
        total += -p.buy_price + (t - p.buy_slot) as f64 * f;
    }
    Ok(total)
}

/// Upper bound on platform profit: `k0·v0 + (K − k0)·vmax − C0·K·f`.
///
/// Every simulated platform profit must stay at or below this bound when
/// `vmax` is the trajectory's realized price maximum.
pub fn platform_max_profit(k0: u32, vmax: f64, params: &EconomyParams) -> Result<f64> {
    if k0 > params.assets {
        return Err(Error::domain(format!(
            "k0 {} exceeds K = {}",
            k0, params.assets
        )));
    }
    Ok(k0 as f64 * params.v0 + (params.assets - k0) as f64 * vmax - params.development_cost())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32, k: u32, t: u32, c: f64, f: f64, c0: f64) -> EconomyParams {
        EconomyParams {
            players: n,
            assets: k,
            lifespan: t,
            c,
            f,
            c0,
            v0: 0.0,
            floor: 0.0,
            cap: 1e12,
        }
    }

    #[test]
    fn traded_value_matches_closed_form() {
        let p = params(100, 100, 12, 0.5, 0.0, 0.0);
        assert_eq!(traded_value(100.0, 0, &p).unwrap(), 100.0);
        assert_eq!(traded_value(100.0, 100, &p).unwrap(), 150.0);

        let p = params(100, 100, 12, 0.8, 0.0, 0.0);
        assert_eq!(traded_value(200.0, 25, &p).unwrap(), 240.0);
    }

    #[test]
    fn traded_value_rejects_bad_inputs() {
        let p = params(10, 10, 5, 0.5, 0.0, 0.0);
        assert!(traded_value(1.0, 11, &p).is_err());
        assert!(traded_value(-1.0, 0, &p).is_err());
    }

    #[test]
    fn player_decision_three_way() {
        assert_eq!(player_decision(100.0, 105.0, 10.0), PlayerAction::Buy);
        assert_eq!(player_decision(100.0, 80.0, 5.0), PlayerAction::Sell);
        assert_eq!(player_decision(100.0, 95.0, 5.0), PlayerAction::Hold);
    }

    #[test]
    fn release_follows_quota_line() {
        let p = params(100, 130, 12, 0.0, 0.0, 0.0);
        // exact division: steady quota 130/13 = 10
        assert_eq!(platform_release(0, 0, 5.0, 5.0, &p).unwrap(), 10);
        // catch-up after a hold
        assert_eq!(platform_release(3, 25, 5.0, 6.0, &p).unwrap(), 15);
        // falling estimate holds everything
        assert_eq!(platform_release(7, 25, 5.0, 4.0, &p).unwrap(), 0);
    }

    #[test]
    fn release_largest_remainder_sums_to_k() {
        let p = params(100, 100, 12, 0.0, 0.0, 0.0);
        let mut released = 0u32;
        let mut per_slot = Vec::new();
        for t in 0..=12 {
            let k = platform_release(t, released, 5.0, 5.0, &p).unwrap();
            released += k;
            per_slot.push(k);
            assert!(released <= p.assets);
        }
        assert_eq!(released, 100);
        // per-slot quota never drifts more than one unit from 100/13
        for &k in &per_slot {
            assert!(k == 7 || k == 8, "unexpected slot release {k}");
        }
    }

    #[test]
    fn release_rejects_overdrawn_state() {
        let p = params(100, 10, 12, 0.0, 0.0, 0.0);
        assert!(platform_release(0, 11, 5.0, 5.0, &p).is_err());
    }

    #[test]
    fn platform_profit_examples() {
        let p = params(100, 100, 12, 0.0, 1.0, 0.01);
        let mut book = PlatformBook::default();
        book.record(5, 10.0);
        book.record(5, 12.0);
        assert!((platform_profit(&book, &p).unwrap() - 109.0).abs() < 1e-12);

        let p0 = params(100, 100, 12, 0.0, 0.0, 0.0);
        assert_eq!(platform_profit(&PlatformBook::default(), &p0).unwrap(), 0.0);

        let p_cost = params(100, 10, 12, 0.0, 2.0, 1.0);
        let empty_releases = PlatformBook {
            releases: vec![0, 0, 0],
            prices: vec![1.0, 1.0, 1.0],
        };
        assert_eq!(platform_profit(&empty_releases, &p_cost).unwrap(), -20.0);
    }

    #[test]
    fn player_profit_examples() {
        let closed = [Position::closed(1, 10.0, 3, 15.0)];
        assert_eq!(player_profit(&closed, &[], 3, 2.0).unwrap(), 9.0);

        assert_eq!(player_profit(&[], &[], 5, 7.0).unwrap(), 0.0);

        let open = [Position::open(2, 12.0)];
        assert!((player_profit(&closed, &open, 4, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn player_profit_rejects_malformed_positions() {
        let bad = [Position::closed(3, 10.0, 3, 15.0)];
        assert!(player_profit(&bad, &[], 5, 0.0).is_err());
    }

    #[test]
    fn max_profit_examples() {
        let mut p = params(100, 100, 12, 0.0, 0.0, 0.0);
        p.v0 = 5.0;
        // k0 = K collapses to K * v0
        assert_eq!(platform_max_profit(100, 8.0, &p).unwrap(), 500.0);
        assert_eq!(platform_max_profit(10, 8.0, &p).unwrap(), 770.0);

        let mut tiny = params(1, 1, 1, 0.0, 1.0, 1.0);
        tiny.v0 = 0.0;
        assert_eq!(platform_max_profit(0, 3.0, &tiny).unwrap(), 2.0);
        assert!(platform_max_profit(2, 3.0, &tiny).is_err());
    }

    #[test]
    fn price_state_clamps_next_price() {
        let mut p = params(10, 10, 5, 0.0, 0.0, 0.0);
        p.floor = 0.0;
        p.cap = 100.0;
        let s = PriceState {
            v_t: 90.0,
            v_est: 95.0,
            shock: 20.0,
        };
        assert_eq!(s.next_price(&p), 100.0);
        let s = PriceState {
            v_t: 5.0,
            v_est: 3.0,
            shock: -10.0,
        };
        assert_eq!(s.next_price(&p), 0.0);
    }
}
