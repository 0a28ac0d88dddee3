//! Basic profiles: the externally determined per-asset price series that
//! all agents share as common knowledge.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Price series `v(j, t)` for one asset over slots `1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicProfile {
    pub asset_id: String,
    /// Values for slots 1..=T; `values[i]` is slot `i + 1`.
    pub values: Vec<f64>,
}

impl BasicProfile {
    pub fn new(asset_id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("profile must cover at least one slot"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain("profile values must be finite and non-negative"));
        }
        Ok(BasicProfile {
            asset_id: asset_id.into(),
            values,
        })
    }

    /// Number of slots `T`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at 1-based slot `t`.
    pub fn value(&self, t: usize) -> f64 {
        self.values[t - 1]
    }

    /// True when every value equals the first (no price dispersion).
    pub fn is_flat(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    /// Checks all values lie inside `[floor, cap]`.
    pub fn check_bounds(&self, floor: f64, cap: f64) -> Result<()> {
        for (i, &v) in self.values.iter().enumerate() {
            if v < floor || v > cap {
                return Err(Error::domain(format!(
                    "profile {} slot {} value {} outside [{}, {}]",
                    self.asset_id,
                    i + 1,
                    v,
                    floor,
                    cap
                )));
            }
        }
        Ok(())
    }
}

/// Straight-line profile from a game's average first-hand sale price at
/// slot 1 to its average trade price at slot `T`.
pub fn build_basic_profile(sell_profit: f64, trade_price: f64, t: u32) -> Result<BasicProfile> {
    if t < 2 {
        return Err(Error::domain("interpolated profile needs at least two slots"));
    }
    let step = (trade_price - sell_profit) / (t - 1) as f64;
    let values = (0..t).map(|i| sell_profit + step * i as f64).collect();
    BasicProfile::new("interpolated", values)
}

#[derive(Debug, Deserialize)]
struct ProfileRow {
    asset_id: String,
    t: usize,
    value: f64,
}

/// Reads profiles from CSV with columns `asset_id,t,value` (t is 1-based).
///
/// Rows may arrive in any order; every asset must cover a contiguous slot
/// range starting at 1.
pub fn read_profiles_csv<R: Read>(reader: R) -> Result<Vec<BasicProfile>> {
    let mut by_asset: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    let mut csv_reader = csv::Reader::from_reader(reader);
    for row in csv_reader.deserialize() {
        let row: ProfileRow = row?;
        if row.t == 0 {
            return Err(Error::domain(format!(
                "profile {} has slot 0; slots are 1-based",
                row.asset_id
            )));
        }
        if by_asset
            .entry(row.asset_id.clone())
            .or_default()
            .insert(row.t, row.value)
            .is_some()
        {
            return Err(Error::domain(format!(
                "profile {} slot {} appears twice",
                row.asset_id, row.t
            )));
        }
    }
    let mut profiles = Vec::with_capacity(by_asset.len());
    for (asset_id, slots) in by_asset {
        let t_max = *slots.keys().next_back().expect("non-empty by construction");
        if slots.len() != t_max {
            return Err(Error::domain(format!(
                "profile {} is missing slots (got {} of 1..={})",
                asset_id,
                slots.len(),
                t_max
            )));
        }
        let values = (1..=t_max).map(|t| slots[&t]).collect();
        profiles.push(BasicProfile::new(asset_id, values)?);
    }
    Ok(profiles)
}

/// Reads profiles from a CSV file path.
pub fn read_profiles_file(path: impl AsRef<Path>) -> Result<Vec<BasicProfile>> {
    let file = std::fs::File::open(path)?;
    read_profiles_csv(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_hits_both_endpoints() {
        let p = build_basic_profile(933.46, 1315.28, 12).unwrap();
        assert_eq!(p.len(), 12);
        assert!((p.value(1) - 933.46).abs() < 1e-12);
        assert!((p.value(12) - 1315.28).abs() < 1e-12);
        let step = p.value(2) - p.value(1);
        assert!((step - 34.710909090909).abs() < 1e-9);
    }

    #[test]
    fn flat_profile_when_endpoints_match() {
        let p = build_basic_profile(100.0, 100.0, 5).unwrap();
        assert_eq!(p.values, vec![100.0; 5]);
        assert!(p.is_flat());
    }

    #[test]
    fn exact_unit_step() {
        let p = build_basic_profile(0.0, 11.0, 12).unwrap();
        assert_eq!(p.value(2) - p.value(1), 1.0);
    }

    #[test]
    fn too_short_horizon_is_rejected() {
        assert!(build_basic_profile(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn csv_roundtrip_orders_slots() {
        let csv = "asset_id,t,value\na,2,5.0\na,1,4.0\nb,1,7.0\n";
        let profiles = read_profiles_csv(csv.as_bytes()).unwrap();
        assert_eq!(profiles.len(), 2);
        assert_eq!(profiles[0].asset_id, "a");
        assert_eq!(profiles[0].values, vec![4.0, 5.0]);
        assert_eq!(profiles[1].values, vec![7.0]);
    }

    #[test]
    fn csv_gaps_are_rejected() {
        let csv = "asset_id,t,value\na,1,4.0\na,3,5.0\n";
        assert!(read_profiles_csv(csv.as_bytes()).is_err());
    }
}
