//! Regenerates the trade-log fixtures under `fixtures/`.
//!
//! The fixtures are deterministic constructions calibrated to published
//! per-game aggregates:
//!
//! - `blnks_trades.csv`: 6,000 trades over 4,870 tokens and 1,417 final
//!   holders; the largest wallet holds 1,224 tokens (ownership dominance
//!   index ≈ 356) and the busiest day carries exactly 27.85% of trades.
//! - `ck_trades.csv`: 5,250 trades over 4,883 tokens (367 resales,
//!   circulation rate 367/5250); resale profits average 78.64 with
//!   median 0.74 and mode −1.26.
//! - `landd_trades.csv`: a small log whose pooled inter-purchase
//!   intervals are {55, 55, 253.99} days (mean 121.33, median 55).
//!
//! Run with `cargo run -p p2e-core --example gen_fixtures` from the
//! workspace root.

use std::fmt::Write as _;
use std::fs;

use chrono::{Duration, TimeZone, Utc};

const HEADER: &str = "game,token_id,seller,buyer,price_usd,timestamp\n";

fn main() {
    fs::create_dir_all("fixtures").expect("create fixtures dir");
    fs::write("fixtures/blnks_trades.csv", blnks()).expect("write blnks");
    fs::write("fixtures/ck_trades.csv", ck()).expect("write ck");
    fs::write("fixtures/landd_trades.csv", landd()).expect("write landd");
    println!("fixtures regenerated");
}

fn blnks() -> String {
    let mut out = String::from(HEADER);
    let day = |y: i32, m: u32, d: u32, secs: u32| {
        Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap() + Duration::seconds(secs as i64)
    };
    let big_day_start = Utc.with_ymd_and_hms(2022, 3, 19, 0, 0, 0).unwrap();

    // Final holder of each 1-based token index.
    let holder = |token: usize| -> String {
        if token <= 1224 {
            "blnks-whale".to_string()
        } else if token <= 3666 {
            format!("blnks-w{:04}", (token - 1225) / 3 + 1)
        } else {
            format!("blnks-w{:04}", (token - 3667) / 2 + 815)
        }
    };
    let dev_price = |token: usize| 250.0 + (token % 100) as f64 * 0.66;

    let mut row = |token: usize, seller: &str, buyer: &str, price: f64, ts: chrono::DateTime<Utc>| {
        writeln!(
            out,
            "BLNKS,blnks-{token:04},{seller},{buyer},{price:.2},{}",
            ts.format("%Y-%m-%dT%H:%M:%SZ")
        )
        .unwrap();
    };

    // Tokens 1..=1130: developer sale before the big day, resale to the
    // final holder on the big day (1,130 big-day trades).
    for token in 1..=1130usize {
        let flip = format!("blnks-flip{:03}", token % 200);
        let d = (token - 1) / 28; // 28 first-hand sales per day
        let ts = day(2022, 2, 1, 0) + Duration::days(d as i64) + Duration::seconds((token % 28) as i64 * 600);
        row(token, "blnks-dev", &flip, dev_price(token), ts);
        let resale_ts = big_day_start + Duration::seconds(30_000 + token as i64 * 40);
        let resale_price = (dev_price(token) - 30.0 + (token % 61) as f64).max(1.0);
        row(token, &flip, &holder(token), resale_price, resale_ts);
    }
    // Tokens 1131..=1671: developer sale on the big day itself
    // (541 trades; big-day total 1,671 of 6,000 = 27.85%).
    for token in 1131..=1671usize {
        let ts = big_day_start + Duration::seconds(token as i64 * 45);
        row(token, "blnks-dev", &holder(token), dev_price(token), ts);
    }
    // Tokens 1672..=4870: developer sales spread after the big day,
    // 28 per day so no day rivals the big one.
    for token in 1672..=4870usize {
        let d = (token - 1672) / 28;
        let ts = day(2022, 3, 20, 0) + Duration::days(d as i64) + Duration::seconds((token % 28) as i64 * 600);
        row(token, "blnks-dev", &holder(token), dev_price(token), ts);
    }
    out
}

fn ck() -> String {
    let mut out = String::from(HEADER);
    let start = Utc.with_ymd_and_hms(2017, 12, 1, 0, 0, 0).unwrap();
    let mut row = |token: usize, seller: String, buyer: String, price: f64, ts: chrono::DateTime<Utc>| {
        writeln!(
            out,
            "CK,ck-{token:04},{seller},{buyer},{price:.2},{}",
            ts.format("%Y-%m-%dT%H:%M:%SZ")
        )
        .unwrap();
    };

    // Resale profit pattern: 183 losses of −1.26, one +0.74 (the median),
    // 182 gains of 158.96 and one 160.00 — mean 78.64, mode −1.26.
    let resale_profit = |token: usize| -> f64 {
        match token {
            1..=183 => -1.26,
            184 => 0.74,
            185..=366 => 158.96,
            _ => 160.00,
        }
    };

    for token in 1..=4883usize {
        let d = (token - 1) / 40; // 40 first-hand sales per day
        let ts = start + Duration::days(d as i64) + Duration::seconds((token % 40) as i64 * 900);
        let buyer = if token <= 367 {
            format!("ck-a{token:04}")
        } else {
            format!("ck-w{:04}", token % 3000)
        };
        row(token, "ck-dev".into(), buyer, 22.93, ts);
        if token <= 367 {
            let resale_ts = ts + Duration::days(30);
            row(
                token,
                format!("ck-a{token:04}"),
                format!("ck-b{token:04}"),
                22.93 + resale_profit(token),
                resale_ts,
            );
        }
    }
    out
}

fn landd() -> String {
    let mut out = String::from(HEADER);
    let t0 = Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap();
    let mut row = |token: &str, buyer: &str, ts: chrono::DateTime<Utc>| {
        writeln!(
            out,
            "LANDD,{token},landd-dev,{buyer},12000.00,{}",
            ts.format("%Y-%m-%dT%H:%M:%SZ")
        )
        .unwrap();
    };
    // wallet a: three purchases 55 days apart → intervals {55, 55}
    row("landd-0001", "landd-a", t0);
    row("landd-0002", "landd-a", t0 + Duration::days(55));
    row("landd-0003", "landd-a", t0 + Duration::days(110));
    // wallet b: second purchase 253.99 days later (253 d + 23 h 45 m 36 s)
    row("landd-0004", "landd-b", t0);
    row(
        "landd-0005",
        "landd-b",
        t0 + Duration::days(253) + Duration::seconds(85_536),
    );
    // a single-purchase wallet contributes no interval
    row("landd-0006", "landd-c", t0 + Duration::days(7));
    out
}
