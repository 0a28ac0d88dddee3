//! Play-to-earn (P2E) market model library.
//!
//! Implements a discrete-time token-game economy: closed-form player and
//! platform accounting, a dynamic-programming trade optimizer with an
//! exhaustive verification oracle, an incentive schedule that makes every
//! slot of a buy/sell span lie on the optimal payoff path, a calibrated
//! Monte-Carlo market simulator, a linear profit-estimation model, and a
//! trade-ledger analytics suite for exported transfer logs.
//!
//! Modules map one-to-one onto the moving parts:
//!
//! - [`econ`] — economy parameters, decision rules, profit accounting
//! - [`profile`] — per-asset price series ("basic profiles") and CSV I/O
//! - [`opt`] — optimal buy/sell slot identification (DP + oracles)
//! - [`mechanism`] — incentive schedules, expected payoffs, equilibrium checks
//! - [`sim`] — scenario-driven market simulation and calibration
//! - [`regress`] — linear profit model evaluation and OLS fitting
//! - [`ledger`] — transfer-log ingestion and empirical market metrics

pub mod econ;
pub mod error;
pub mod ledger;
pub mod mechanism;
pub mod opt;
pub mod profile;
pub mod regress;
pub mod sim;

pub use error::Error;
