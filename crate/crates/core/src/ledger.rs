//! Trade-ledger analytics over exported transfer logs.
//!
//! The ingestion path validates every CSV row and collects malformed rows
//! into a rejects report instead of dropping them. All metrics are pure
//! functions of the immutable ledger, so re-ingesting the same file yields
//! identical outputs.
//!
//! Chain conventions: per token, events are strictly time-ordered; the
//! first trade is the developer sale with cost zero, and every later trade
//! is a player resale whose cost is the previous trade's price. A
//! zero-profit resale still counts as a loss in the win/loss tally, since
//! the seller paid the transaction fee.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::ops::Range;
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HOURS_PER_DAY: f64 = 24.0;

/// One validated transfer event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeEvent {
    pub game: String,
    pub token_id: String,
    pub seller: String,
    pub buyer: String,
    pub price_usd: f64,
    pub timestamp: DateTime<Utc>,
}

/// A rejected input row and the first reason it failed validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub reason: String,
    pub raw: String,
}

/// Result of ingesting one trades file.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub ledger: TradeLedger,
    pub rejects: Vec<RejectedRow>,
}

/// Immutable, indexed trade ledger.
#[derive(Debug, Clone, Default)]
pub struct TradeLedger {
    /// Events sorted by `(token_id, timestamp, seller, buyer)`.
    events: Vec<TradeEvent>,
    /// Per-token contiguous ranges into `events`.
    chains: BTreeMap<String, Range<usize>>,
}

impl TradeLedger {
    /// Builds a ledger from already-validated events.
    pub fn from_events(mut events: Vec<TradeEvent>) -> Self {
        events.sort_by(|a, b| {
            (&a.token_id, a.timestamp, &a.seller, &a.buyer, a.price_usd.to_bits()).cmp(&(
                &b.token_id,
                b.timestamp,
                &b.seller,
                &b.buyer,
                b.price_usd.to_bits(),
            ))
        });
        let mut chains = BTreeMap::new();
        let mut start = 0usize;
        for i in 1..=events.len() {
            if i == events.len() || events[i].token_id != events[start].token_id {
                chains.insert(events[start].token_id.clone(), start..i);
                start = i;
            }
        }
        TradeLedger { events, chains }
    }

    pub fn events(&self) -> &[TradeEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Number of distinct traded tokens.
    pub fn traded_token_count(&self) -> usize {
        self.chains.len()
    }

    /// Distinct game identifiers present in the ledger.
    pub fn games(&self) -> Vec<String> {
        let mut games: Vec<String> = self
            .events
            .iter()
            .map(|e| e.game.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        games.sort();
        games
    }

    /// Sub-ledger holding only one game's events.
    pub fn filter_game(&self, game: &str) -> TradeLedger {
        TradeLedger::from_events(
            self.events
                .iter()
                .filter(|e| e.game == game)
                .cloned()
                .collect(),
        )
    }

    /// Per-token chains in token order.
    pub fn chains(&self) -> impl Iterator<Item = (&str, &[TradeEvent])> {
        self.chains
            .iter()
            .map(move |(token, range)| (token.as_str(), &self.events[range.clone()]))
    }

    /// Wallet holdings as of `instant` (inclusive): each token counts
    /// toward its latest buyer at or before that time. Wallets holding
    /// nothing do not appear.
    pub fn holdings_at(&self, instant: DateTime<Utc>) -> HoldingsSnapshot {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for (_, chain) in self.chains() {
            let holder = chain
                .iter()
                .take_while(|e| e.timestamp <= instant)
                .last()
                .map(|e| e.buyer.clone());
            if let Some(holder) = holder {
                *counts.entry(holder).or_insert(0) += 1;
            }
        }
        HoldingsSnapshot { counts }
    }

    /// Holdings after every recorded event.
    pub fn holdings(&self) -> HoldingsSnapshot {
        match self.events.iter().map(|e| e.timestamp).max() {
            Some(latest) => self.holdings_at(latest),
            None => HoldingsSnapshot::default(),
        }
    }
}

/// Per-wallet token counts at one instant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HoldingsSnapshot {
    pub counts: BTreeMap<String, u64>,
}

impl HoldingsSnapshot {
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        HoldingsSnapshot {
            counts: counts.into_iter().filter(|&(_, c)| c > 0).collect(),
        }
    }

    pub fn total_tokens(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn wallet_count(&self) -> usize {
        self.counts.len()
    }
}

/// Parses and validates a trades CSV (`game,token_id,seller,buyer,
/// price_usd,timestamp`). Structural problems (unreadable file, missing
/// columns) fail the whole ingestion; per-row violations land in the
/// rejects report.
pub fn ingest<R: Read>(reader: R) -> Result<IngestReport> {
    ingest_with_rates(reader, None)
}

pub fn ingest_file(path: impl AsRef<Path>) -> Result<IngestReport> {
    let file = std::fs::File::open(path)?;
    ingest(file)
}

/// Ingestion with optional price pre-conversion: when a rates table is
/// supplied, the price column is read in token units and multiplied by the
/// day's USD rate; rows whose day has no rate are rejected.
pub fn ingest_with_rates<R: Read>(
    reader: R,
    rates: Option<(&RatesTable, &str)>,
) -> Result<IngestReport> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::domain(format!("trades file is missing column '{name}'")))
    };
    let idx = [
        col("game")?,
        col("token_id")?,
        col("seller")?,
        col("buyer")?,
        col("price_usd")?,
        col("timestamp")?,
    ];

    let mut events = Vec::new();
    let mut rejects = Vec::new();
    for (row_index, record) in csv_reader.records().enumerate() {
        let line = row_index as u64 + 2; // header occupies line 1
        let record = record?;
        let raw = record.iter().collect::<Vec<_>>().join(",");
        let mut reject = |reason: String| {
            rejects.push(RejectedRow {
                line,
                reason,
                raw: raw.clone(),
            });
        };

        let field = |i: usize| record.get(idx[i]).unwrap_or("").trim().to_string();
        let game = field(0);
        let token_id = field(1);
        let seller = field(2);
        let buyer = field(3);
        let price_raw = field(4);
        let ts_raw = field(5);

        if game.is_empty() || token_id.is_empty() || seller.is_empty() || buyer.is_empty() {
            reject("empty identifier field".into());
            continue;
        }
        if seller == buyer {
            reject(format!("seller and buyer are the same wallet '{seller}'"));
            continue;
        }
        let price: f64 = match price_raw.parse() {
            Ok(p) => p,
            Err(_) => {
                reject(format!("unparseable price '{price_raw}'"));
                continue;
            }
        };
        if !price.is_finite() || price < 0.0 {
            reject(format!("negative or non-finite price {price}"));
            continue;
        }
        let timestamp = match DateTime::parse_from_rfc3339(&ts_raw) {
            Ok(ts) => ts.with_timezone(&Utc),
            Err(_) => {
                reject(format!("unparseable timestamp '{ts_raw}'"));
                continue;
            }
        };
        let price_usd = match rates {
            None => price,
            Some((table, symbol)) => {
                match table.usd_rate(timestamp.date_naive(), symbol) {
                    Some(rate) => price * rate,
                    None => {
                        reject(format!(
                            "no {symbol} rate for {}",
                            timestamp.date_naive()
                        ));
                        continue;
                    }
                }
            }
        };

        events.push(TradeEvent {
            game,
            token_id,
            seller,
            buyer,
            price_usd,
            timestamp,
        });
    }

    Ok(IngestReport {
        ledger: TradeLedger::from_events(events),
        rejects,
    })
}

/// Daily USD conversion rates keyed by `(date, token_symbol)`.
#[derive(Debug, Clone, Default)]
pub struct RatesTable {
    rates: HashMap<(NaiveDate, String), f64>,
}

impl RatesTable {
    pub fn usd_rate(&self, date: NaiveDate, symbol: &str) -> Option<f64> {
        self.rates.get(&(date, symbol.to_string())).copied()
    }

    /// Reads a rates CSV with columns `date,token_symbol,usd_per_token`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            date: NaiveDate,
            token_symbol: String,
            usd_per_token: f64,
        }
        let mut rates = HashMap::new();
        let mut csv_reader = csv::Reader::from_reader(reader);
        for row in csv_reader.deserialize() {
            let row: Row = row?;
            rates.insert((row.date, row.token_symbol), row.usd_per_token);
        }
        Ok(RatesTable { rates })
    }
}

/// Ownership dominance index: largest single-wallet holding over the mean
/// holding across wallets that own at least one token. Always ≥ 1.
pub fn odi(snapshot: &HoldingsSnapshot) -> Result<f64> {
    if snapshot.counts.is_empty() {
        return Err(Error::domain("no wallet holds a token"));
    }
    let largest = *snapshot.counts.values().max().expect("non-empty") as f64;
    let mean = snapshot.total_tokens() as f64 / snapshot.wallet_count() as f64;
    Ok(largest / mean)
}

/// Share of total supply held by the `n` largest wallets, in `[0, 1]`.
/// Ties between equal holdings break on the wallet identifier.
pub fn top_concentration(snapshot: &HoldingsSnapshot, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("top-n requires n >= 1"));
    }
    if snapshot.counts.is_empty() {
        return Err(Error::domain("no wallet holds a token"));
    }
    let mut wallets: Vec<(&String, &u64)> = snapshot.counts.iter().collect();
    wallets.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    let top: u64 = wallets.iter().take(n).map(|(_, &c)| c).sum();
    Ok(top as f64 / snapshot.total_tokens() as f64)
}

/// Pooled summary of per-wallet inter-purchase intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalSummary {
    pub count: usize,
    pub mean_days: f64,
    pub median_days: f64,
    pub stdev_days: f64,
    /// Interval CDF sampled at whole percentiles 0..=100.
    pub cdf_percentiles: Vec<f64>,
}

/// Inter-purchase intervals per wallet plus the pooled summary; the
/// summary is absent when no wallet bought twice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalsReport {
    pub per_wallet: BTreeMap<String, Vec<f64>>,
    pub summary: Option<IntervalSummary>,
}

/// Days between consecutive purchases by the same wallet, in fractional
/// days. Wallets with fewer than two purchases contribute nothing.
pub fn inter_purchase_intervals(ledger: &TradeLedger) -> IntervalsReport {
    let mut purchases: BTreeMap<String, Vec<DateTime<Utc>>> = BTreeMap::new();
    for event in ledger.events() {
        purchases
            .entry(event.buyer.clone())
            .or_default()
            .push(event.timestamp);
    }
    let mut per_wallet = BTreeMap::new();
    let mut pooled = Vec::new();
    for (wallet, mut times) in purchases {
        if times.len() < 2 {
            continue;
        }
        times.sort();
        let intervals: Vec<f64> = times
            .windows(2)
            .map(|w| (w[1] - w[0]).num_seconds() as f64 / (HOURS_PER_DAY * 3600.0))
            .collect();
        pooled.extend_from_slice(&intervals);
        per_wallet.insert(wallet, intervals);
    }
    let summary = summarize_intervals(&mut pooled);
    IntervalsReport { per_wallet, summary }
}

fn summarize_intervals(pooled: &mut [f64]) -> Option<IntervalSummary> {
    if pooled.is_empty() {
        return None;
    }
    pooled.sort_by(f64::total_cmp);
    let n = pooled.len();
    let mean = pooled.iter().sum::<f64>() / n as f64;
    let variance = pooled.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    let median = percentile(pooled, 50.0);
    let cdf_percentiles = (0..=100).map(|p| percentile(pooled, p as f64)).collect();
    Some(IntervalSummary {
        count: n,
        mean_days: mean,
        median_days: median,
        stdev_days: variance.sqrt(),
        cdf_percentiles,
    })
}

/// Linear-interpolated percentile over a sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = p / 100.0 * (n - 1) as f64;
    let low = rank.floor() as usize;
    let high = rank.ceil() as usize;
    let frac = rank - low as f64;
    sorted[low] * (1.0 - frac) + sorted[high.min(n - 1)] * frac
}

/// Profit attribution for one trade.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeProfit {
    pub token_id: String,
    pub seller: String,
    pub price_usd: f64,
    /// Cost basis: previous trade price, or 0 for the developer sale.
    pub cost_usd: f64,
    pub profit_usd: f64,
    pub is_developer_sale: bool,
}

/// Per-trade profits plus the pooled player-side summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfitReport {
    pub trades: Vec<TradeProfit>,
    /// Mean profit over player resales.
    pub average: Option<f64>,
    pub median: Option<f64>,
    /// Most frequent profit after rounding to 2 decimals; absent when no
    /// value repeats.
    pub mode: Option<f64>,
    /// Mean developer sale price (cost basis zero).
    pub developer_average: Option<f64>,
    pub traded_nft_count: usize,
    pub player_trade_count: usize,
    /// Resales with strictly positive profit.
    pub wins: usize,
    /// Resales with zero or negative profit (zero counts as a loss: the
    /// seller still paid the transaction fee).
    pub losses: usize,
}

/// Walks per-token chains applying the cost conventions: the developer
/// sale carries cost zero, every resale's cost is the previous price.
pub fn profit_chains(ledger: &TradeLedger) -> ProfitReport {
    let mut trades = Vec::with_capacity(ledger.len());
    let mut player_profits = Vec::new();
    let mut developer_prices = Vec::new();
    for (token, chain) in ledger.chains() {
        let mut prev_price = None;
        for event in chain {
            let (cost, is_dev) = match prev_price {
                None => (0.0, true),
                Some(p) => (p, false),
            };
            let profit = event.price_usd - cost;
            trades.push(TradeProfit {
                token_id: token.to_string(),
                seller: event.seller.clone(),
                price_usd: event.price_usd,
                cost_usd: cost,
                profit_usd: profit,
                is_developer_sale: is_dev,
            });
            if is_dev {
                developer_prices.push(event.price_usd);
            } else {
                player_profits.push(profit);
            }
            prev_price = Some(event.price_usd);
        }
    }

    let average = mean(&player_profits);
    let median = {
        let mut sorted = player_profits.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.is_empty() {
            None
        } else {
            Some(percentile(&sorted, 50.0))
        }
    };
    let mode = profit_mode(&player_profits);
    let developer_average = mean(&developer_prices);
    let wins = player_profits.iter().filter(|&&p| p > 0.0).count();
    let losses = player_profits.len() - wins;

    ProfitReport {
        trades,
        average,
        median,
        mode,
        developer_average,
        traded_nft_count: ledger.traded_token_count(),
        player_trade_count: player_profits.len(),
        wins,
        losses,
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Mode of profits rounded to 2 decimals; absent unless some value
/// repeats. Frequency ties resolve to the smallest value.
fn profit_mode(profits: &[f64]) -> Option<f64> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &p in profits {
        let cents = (p * 100.0).round() as i64;
        *counts.entry(cents).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .filter(|&(_, n)| n >= 2)
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .map(|(cents, _)| cents as f64 / 100.0)
}

/// Player-to-player resale fraction: `(trades − traded tokens) / trades`.
pub fn circulation_rate(ledger: &TradeLedger) -> Result<f64> {
    if ledger.is_empty() {
        return Err(Error::domain("circulation rate of an empty ledger"));
    }
    Ok(circulation_rate_from_counts(
        ledger.len() as u64,
        ledger.traded_token_count() as u64,
    ))
}

/// Count-level form of the circulation rate, usable straight from
/// published aggregate tables.
pub fn circulation_rate_from_counts(trades: u64, traded_tokens: u64) -> f64 {
    (trades - traded_tokens) as f64 / trades as f64
}

/// The calendar day with the most trades.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigDay {
    pub date: NaiveDate,
    pub count: u64,
    pub share_of_total: f64,
}

/// UTC calendar day with the maximum trade count; ties resolve to the
/// earliest day.
pub fn big_day(ledger: &TradeLedger) -> Result<BigDay> {
    if ledger.is_empty() {
        return Err(Error::domain("big day of an empty ledger"));
    }
    let mut per_day: BTreeMap<NaiveDate, u64> = BTreeMap::new();
    for event in ledger.events() {
        *per_day.entry(event.timestamp.date_naive()).or_insert(0) += 1;
    }
    let (&date, &count) = per_day
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .expect("non-empty");
    Ok(BigDay {
        date,
        count,
        share_of_total: count as f64 / ledger.len() as f64,
    })
}

/// Price re-stabilization after a big day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Restable {
    /// `interval` days after the big day the cumulative average trade
    /// price came closest to the big-day average; `rate` is that ratio.
    Defined { interval_days: u32, rate: f64 },
    /// No trades within the horizon after the big day.
    Undefined,
}

/// For `k = 1..=horizon`, computes the cumulative average price over all
/// trades in the `k` days after `day` against the big-day average, and
/// returns the `k` whose ratio lands closest to 1 (smallest `k` on ties).
pub fn price_restable(ledger: &TradeLedger, day: NaiveDate, horizon: u32) -> Result<Restable> {
    if horizon == 0 {
        return Err(Error::domain("horizon must be at least one day"));
    }
    let day_prices: Vec<f64> = ledger
        .events()
        .iter()
        .filter(|e| e.timestamp.date_naive() == day)
        .map(|e| e.price_usd)
        .collect();
    let baseline = mean(&day_prices)
        .ok_or_else(|| Error::domain(format!("no trades on the given big day {day}")))?;
    if baseline == 0.0 {
        return Err(Error::domain("big-day average price is zero"));
    }

    let mut best: Option<(u32, f64)> = None;
    let mut cumulative_sum = 0.0;
    let mut cumulative_count = 0u64;
    for k in 1..=horizon {
        let target_day = day + chrono::Duration::days(k as i64);
        for event in ledger.events() {
            if event.timestamp.date_naive() == target_day {
                cumulative_sum += event.price_usd;
                cumulative_count += 1;
            }
        }
        if cumulative_count == 0 {
            continue;
        }
        let rate = cumulative_sum / cumulative_count as f64 / baseline;
        let distance = (rate - 1.0).abs();
        if best.map_or(true, |(_, best_rate)| distance < (best_rate - 1.0_f64).abs()) {
            best = Some((k, rate));
        }
    }
    Ok(match best {
        Some((interval_days, rate)) => Restable::Defined { interval_days, rate },
        None => Restable::Undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    fn event(token: &str, seller: &str, buyer: &str, price: f64, when: &str) -> TradeEvent {
        TradeEvent {
            game: "G".into(),
            token_id: token.into(),
            seller: seller.into(),
            buyer: buyer.into(),
            price_usd: price,
            timestamp: ts(when),
        }
    }

    #[test]
    fn ingest_empty_file_is_an_empty_ledger() {
        let csv = "game,token_id,seller,buyer,price_usd,timestamp\n";
        let report = ingest(csv.as_bytes()).unwrap();
        assert!(report.ledger.is_empty());
        assert!(report.rejects.is_empty());
    }

    #[test]
    fn ingest_rejects_bad_rows_and_keeps_good_ones() {
        let csv = "game,token_id,seller,buyer,price_usd,timestamp\n\
                   G,t1,dev,a,10.0,2022-03-19T14:07:00Z\n\
                   G,t1,a,b,-5.0,2022-03-20T14:07:00Z\n\
                   G,t2,dev,c,3.0,2022-03-21T00:00:00Z\n\
                   G,t3,dev,d,4.0,2022-03-22T09:30:00Z\n";
        let report = ingest(csv.as_bytes()).unwrap();
        assert_eq!(report.ledger.len(), 3);
        assert_eq!(report.rejects.len(), 1);
        assert_eq!(report.rejects[0].line, 3);
        assert!(report.rejects[0].reason.contains("negative"));
    }

    #[test]
    fn ingest_rejects_self_trades_and_bad_timestamps() {
        let csv = "game,token_id,seller,buyer,price_usd,timestamp\n\
                   G,t1,a,a,10.0,2022-03-19T14:07:00Z\n\
                   G,t2,a,b,10.0,yesterday\n";
        let report = ingest(csv.as_bytes()).unwrap();
        assert!(report.ledger.is_empty());
        assert_eq!(report.rejects.len(), 2);
    }

    #[test]
    fn missing_column_fails_ingestion_outright() {
        let csv = "game,token_id,seller,buyer,price_usd\nG,t,a,b,1.0\n";
        assert!(ingest(csv.as_bytes()).is_err());
    }

    #[test]
    fn odi_examples() {
        let snap = HoldingsSnapshot::from_counts([
            ("A".to_string(), 10),
            ("B".to_string(), 1),
            ("C".to_string(), 1),
        ]);
        assert!((odi(&snap).unwrap() - 2.5).abs() < 1e-12);

        let uniform =
            HoldingsSnapshot::from_counts([("A".to_string(), 3), ("B".to_string(), 3)]);
        assert_eq!(odi(&uniform).unwrap(), 1.0);
        assert!(odi(&HoldingsSnapshot::default()).is_err());
    }

    #[test]
    fn odi_is_scale_invariant() {
        let snap = HoldingsSnapshot::from_counts([
            ("A".to_string(), 10),
            ("B".to_string(), 1),
            ("C".to_string(), 1),
        ]);
        let scaled = HoldingsSnapshot::from_counts([
            ("A".to_string(), 70),
            ("B".to_string(), 7),
            ("C".to_string(), 7),
        ]);
        assert!((odi(&snap).unwrap() - odi(&scaled).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn top_concentration_examples() {
        let snap = HoldingsSnapshot::from_counts([
            ("A".to_string(), 10),
            ("B".to_string(), 1),
            ("C".to_string(), 1),
        ]);
        assert!((top_concentration(&snap, 1).unwrap() - 10.0 / 12.0).abs() < 1e-12);
        assert_eq!(top_concentration(&snap, 5).unwrap(), 1.0);
        assert!(top_concentration(&snap, 0).is_err());
    }

    #[test]
    fn concentration_matches_published_structure() {
        // supply 92,598 across 5,699 holders; largest wallet 66,976 and the
        // next nine at 971 reproduce the published top-1/top-10 shares
        let mut counts: Vec<(String, u64)> = vec![("w0000".into(), 66_976)];
        for i in 1..=9 {
            counts.push((format!("w{i:04}"), 971));
        }
        let mut remaining = 92_598 - 66_976 - 9 * 971;
        let mut i = 10;
        while remaining > 0 {
            let take = remaining.min(3);
            counts.push((format!("w{i:04}"), take));
            remaining -= take;
            i += 1;
        }
        let snap = HoldingsSnapshot::from_counts(counts);
        let top1 = top_concentration(&snap, 1).unwrap();
        let top10 = top_concentration(&snap, 10).unwrap();
        assert!((top1 - 0.7233).abs() < 5e-4, "top1 {top1}");
        assert!((top10 - 0.8177).abs() < 5e-4, "top10 {top10}");
    }

    #[test]
    fn intervals_subtract_consecutive_purchases() {
        let ledger = TradeLedger::from_events(vec![
            event("t1", "dev", "w", 1.0, "2022-01-01T00:00:00Z"),
            event("t2", "dev", "w", 1.0, "2022-02-25T00:00:00Z"),
            event("t3", "dev", "w", 1.0, "2022-06-26T00:00:00Z"),
        ]);
        let report = inter_purchase_intervals(&ledger);
        assert_eq!(report.per_wallet["w"], vec![55.0, 121.0]);
        let summary = report.summary.unwrap();
        assert_eq!(summary.count, 2);
        assert!((summary.mean_days - 88.0).abs() < 1e-9);
    }

    #[test]
    fn intervals_without_repeat_buyers_are_empty() {
        let ledger = TradeLedger::from_events(vec![
            event("t1", "dev", "a", 1.0, "2022-01-01T00:00:00Z"),
            event("t2", "dev", "b", 1.0, "2022-01-02T00:00:00Z"),
        ]);
        let report = inter_purchase_intervals(&ledger);
        assert!(report.summary.is_none());
        assert!(report.per_wallet.is_empty());
    }

    #[test]
    fn profit_chain_conventions() {
        let ledger = TradeLedger::from_events(vec![
            event("t1", "dev", "a", 10.0, "2022-01-01T00:00:00Z"),
            event("t1", "a", "b", 15.0, "2022-01-02T00:00:00Z"),
            event("t1", "b", "c", 15.0, "2022-01-03T00:00:00Z"),
        ]);
        let report = profit_chains(&ledger);
        assert_eq!(report.developer_average, Some(10.0));
        let player: Vec<f64> = report
            .trades
            .iter()
            .filter(|t| !t.is_developer_sale)
            .map(|t| t.profit_usd)
            .collect();
        assert_eq!(player, vec![5.0, 0.0]);
        // the zero-profit resale is a loss
        assert_eq!(report.wins, 1);
        assert_eq!(report.losses, 1);
    }

    #[test]
    fn single_trade_token_has_only_a_developer_profit() {
        let ledger = TradeLedger::from_events(vec![event(
            "t1",
            "dev",
            "a",
            10.0,
            "2022-01-01T00:00:00Z",
        )]);
        let report = profit_chains(&ledger);
        assert_eq!(report.player_trade_count, 0);
        assert_eq!(report.average, None);
        assert_eq!(report.developer_average, Some(10.0));
    }

    #[test]
    fn telescoping_identity() {
        let ledger = TradeLedger::from_events(vec![
            event("t1", "dev", "a", 10.0, "2022-01-01T00:00:00Z"),
            event("t1", "a", "b", 17.5, "2022-01-02T00:00:00Z"),
            event("t1", "b", "c", 4.25, "2022-01-03T00:00:00Z"),
        ]);
        let report = profit_chains(&ledger);
        let total: f64 = report
            .trades
            .iter()
            .filter(|t| t.token_id == "t1")
            .map(|t| t.profit_usd)
            .sum();
        assert!((total - 4.25).abs() < 1e-9);
    }

    #[test]
    fn circulation_rate_examples() {
        assert!((circulation_rate_from_counts(8_298, 5_000) - 0.397445168).abs() < 5e-10);
        assert!((circulation_rate_from_counts(5_250, 4_883) - 0.069904762).abs() < 5e-10);

        let ledger = TradeLedger::from_events(vec![
            event("t1", "dev", "a", 1.0, "2022-01-01T00:00:00Z"),
            event("t2", "dev", "b", 1.0, "2022-01-02T00:00:00Z"),
        ]);
        assert_eq!(circulation_rate(&ledger).unwrap(), 0.0);
        assert!(circulation_rate(&TradeLedger::default()).is_err());
    }

    #[test]
    fn big_day_counts_and_breaks_ties_earliest() {
        let mut events = Vec::new();
        for i in 0..3 {
            events.push(event(&format!("a{i}"), "dev", "w", 1.0, "2022-01-01T10:00:00Z"));
        }
        for i in 0..7 {
            events.push(event(&format!("b{i}"), "dev", "w", 1.0, "2022-01-02T10:00:00Z"));
        }
        for i in 0..7 {
            events.push(event(&format!("c{i}"), "dev", "w", 1.0, "2022-01-03T10:00:00Z"));
        }
        let ledger = TradeLedger::from_events(events);
        let day = big_day(&ledger).unwrap();
        assert_eq!(day.date, NaiveDate::from_ymd_opt(2022, 1, 2).unwrap());
        assert_eq!(day.count, 7);
        assert!((day.share_of_total - 7.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn single_trade_is_its_own_big_day() {
        let ledger = TradeLedger::from_events(vec![event(
            "t",
            "dev",
            "a",
            1.0,
            "2022-01-01T00:00:00Z",
        )]);
        let day = big_day(&ledger).unwrap();
        assert_eq!(day.share_of_total, 1.0);
    }

    #[test]
    fn restable_on_constant_prices_is_immediate() {
        let ledger = TradeLedger::from_events(vec![
            event("t1", "dev", "a", 100.0, "2022-01-01T00:00:00Z"),
            event("t2", "dev", "a", 100.0, "2022-01-02T00:00:00Z"),
            event("t3", "dev", "a", 100.0, "2022-01-03T00:00:00Z"),
        ]);
        let day = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
        let restable = price_restable(&ledger, day, 14).unwrap();
        assert_eq!(
            restable,
            Restable::Defined {
                interval_days: 1,
                rate: 1.0
            }
        );
    }

    #[test]
    fn restable_synthetic_decay() {
        // big-day average 100, then one trade per day at 80, 95, 101:
        // cumulative means 80, 87.5, 92 → closest to 1 at k = 3
        let ledger = TradeLedger::from_events(vec![
            event("t1", "dev", "a", 100.0, "2022-01-01T00:00:00Z"),
            event("t2", "dev", "a", 80.0, "2022-01-02T00:00:00Z"),
            event("t3", "dev", "a", 95.0, "2022-01-03T00:00:00Z"),
            event("t4", "dev", "a", 101.0, "2022-01-04T00:00:00Z"),
        ]);
        let day = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
        let restable = price_restable(&ledger, day, 3).unwrap();
        match restable {
            Restable::Defined { interval_days, rate } => {
                assert_eq!(interval_days, 3);
                assert!((rate - 0.92).abs() < 1e-12);
            }
            Restable::Undefined => panic!("expected a defined interval"),
        }
    }

    #[test]
    fn restable_without_followup_trades_is_undefined() {
        let ledger = TradeLedger::from_events(vec![event(
            "t1",
            "dev",
            "a",
            100.0,
            "2022-01-01T00:00:00Z",
        )]);
        let day = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
        assert_eq!(price_restable(&ledger, day, 14).unwrap(), Restable::Undefined);
    }

    #[test]
    fn holdings_conservation() {
        let ledger = TradeLedger::from_events(vec![
            event("t1", "dev", "a", 1.0, "2022-01-01T00:00:00Z"),
            event("t1", "a", "b", 2.0, "2022-01-05T00:00:00Z"),
            event("t2", "dev", "a", 1.0, "2022-01-02T00:00:00Z"),
        ]);
        let snap = ledger.holdings();
        assert_eq!(snap.total_tokens(), 2);
        assert_eq!(snap.counts["b"], 1);
        assert_eq!(snap.counts["a"], 1);

        // as of Jan 3, token t1 still sits with its first buyer
        let early = ledger.holdings_at(ts("2022-01-03T00:00:00Z"));
        assert_eq!(early.counts["a"], 2);
    }
}
