//! Linear profit model: `estimated profit = alpha + beta * avg_trade_price
//! + gamma * circulation_rate`, with OLS fitting over per-game samples.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the affine profit model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitModelParams {
    /// Intercept, in currency units.
    pub alpha: f64,
    /// Price coefficient, dimensionless.
    pub beta: f64,
    /// Circulation coefficient, in currency units.
    pub gamma: f64,
}

/// Per-game (or per-bucket) observables feeding the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameAggregates {
    pub avg_trade_price: f64,
    /// Player-to-player resale fraction, in `[0, 1]`.
    pub circulation_rate: f64,
    /// Observed mean profit (the fit target).
    pub mean_profit: f64,
}

impl GameAggregates {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.circulation_rate) {
            return Err(Error::domain(format!(
                "circulation rate {} outside [0, 1]",
                self.circulation_rate
            )));
        }
        Ok(())
    }
}

/// One row of a model table file, in the canonical column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTableRow {
    pub game: String,
    pub alpha: f64,
    pub avg_trade_price: f64,
    pub beta: f64,
    pub circulation_rate: f64,
    pub gamma: f64,
    pub mean_profit: f64,
    pub estimated_profit: f64,
}

impl ModelTableRow {
    pub fn params(&self) -> ProfitModelParams {
        ProfitModelParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
        }
    }

    pub fn aggregates(&self) -> GameAggregates {
        GameAggregates {
            avg_trade_price: self.avg_trade_price,
            circulation_rate: self.circulation_rate,
            mean_profit: self.mean_profit,
        }
    }
}

/// Affine model evaluation.
pub fn estimate_profit(p: &ProfitModelParams, g: &GameAggregates) -> f64 {
    p.alpha + p.beta * g.avg_trade_price + p.gamma * g.circulation_rate
}

/// OLS fit of the full three-parameter model.
///
/// Solves the normal equations for the design `(1, price, circulation)`;
/// a rank-deficient design is rejected with the collinear column named.
/// Returns the parameters and the per-sample residual vector
/// `observed − estimated`.
pub fn fit_profit_model(samples: &[GameAggregates]) -> Result<(ProfitModelParams, Vec<f64>)> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 samples to fit 3 parameters (got {})",
            samples.len()
        )));
    }
    for s in samples {
        s.validate()?;
    }

    // Normal equations A x = b with A = Xᵀ X (3×3), b = Xᵀ y.
    let mut a = [[0.0_f64; 3]; 3];
    let mut b = [0.0_f64; 3];
    for s in samples {
        let row = [1.0, s.avg_trade_price, s.circulation_rate];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * s.mean_profit;
        }
    }
    let x = solve_3x3(a, b)?;
    let params = ProfitModelParams {
        alpha: x[0],
        beta: x[1],
        gamma: x[2],
    };
    let residuals = samples
        .iter()
        .map(|s| s.mean_profit - estimate_profit(&params, s))
        .collect();
    Ok((params, residuals))
}

/// OLS fit with `gamma` constrained to a grid of candidate values.
///
/// For each candidate, `alpha` and `beta` are fit by OLS against the
/// gamma-adjusted target; the candidate with the least residual sum of
/// squares wins.
pub fn fit_profit_model_gamma_grid(
    samples: &[GameAggregates],
    gamma_grid: &[f64],
) -> Result<(ProfitModelParams, Vec<f64>)> {
    if gamma_grid.is_empty() {
        return Err(Error::Fit("gamma grid is empty".into()));
    }
    if samples.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 samples to fit alpha and beta (got {})",
            samples.len()
        )));
    }
    let mut best: Option<(f64, ProfitModelParams, Vec<f64>)> = None;
    for &gamma in gamma_grid {
        // two-parameter normal equations on (1, price)
        let n = samples.len() as f64;
        let (mut sp, mut spp, mut sy, mut spy) = (0.0, 0.0, 0.0, 0.0);
        for s in samples {
            let y = s.mean_profit - gamma * s.circulation_rate;
            sp += s.avg_trade_price;
            spp += s.avg_trade_price * s.avg_trade_price;
            sy += y;
            spy += s.avg_trade_price * y;
        }
        let det = n * spp - sp * sp;
        if det.abs() <= 1e-12 * n * spp.max(1.0) {
            return Err(Error::Fit(
                "avg_trade_price column is constant; cannot separate it from the intercept".into(),
            ));
        }
        let beta = (n * spy - sp * sy) / det;
        let alpha = (sy - beta * sp) / n;
        let params = ProfitModelParams { alpha, beta, gamma };
        let residuals: Vec<f64> = samples
            .iter()
            .map(|s| s.mean_profit - estimate_profit(&params, s))
            .collect();
        let ssr: f64 = residuals.iter().map(|r| r * r).sum();
        if best.as_ref().map_or(true, |(b, _, _)| ssr < *b) {
            best = Some((ssr, params, residuals));
        }
    }
    let (_, params, residuals) = best.expect("non-empty grid");
    Ok((params, residuals))
}

const DESIGN_COLUMNS: [&str; 3] = ["intercept", "avg_trade_price", "circulation_rate"];

/// Gaussian elimination with partial pivoting; names the column whose
/// pivot collapses when the design is rank-deficient.
fn solve_3x3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    let scale: f64 = a
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()))
        .max(1.0);
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot_row][col].abs() <= 1e-12 * scale {
            return Err(Error::Fit(format!(
                "design is rank-deficient: column '{}' is collinear with the preceding columns",
                DESIGN_COLUMNS[col]
            )));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for j in col..3 {
                a[row][j] -= factor * a[col][j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0_f64; 3];
    for row in (0..3).rev() {
        let mut sum = b[row];
        for j in row + 1..3 {
            sum -= a[row][j] * x[j];
        }
        x[row] = sum / a[row][row];
    }
    Ok(x)
}

/// Reads a model table CSV in the canonical column order.
pub fn read_model_table<R: Read>(reader: R) -> Result<Vec<ModelTableRow>> {
    let mut rows = Vec::new();
    let mut csv_reader = csv::Reader::from_reader(reader);
    for row in csv_reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

pub fn read_model_table_file(path: impl AsRef<Path>) -> Result<Vec<ModelTableRow>> {
    let file = std::fs::File::open(path)?;
    read_model_table(file)
}

/// Writes a model table CSV in the canonical column order.
pub fn write_model_table<W: Write>(writer: W, rows: &[ModelTableRow]) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    for row in rows {
        csv_writer.serialize(row)?;
    }
    csv_writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn agg(price: f64, circ: f64, profit: f64) -> GameAggregates {
        GameAggregates {
            avg_trade_price: price,
            circulation_rate: circ,
            mean_profit: profit,
        }
    }

    #[test]
    fn estimate_matches_published_rows() {
        let blnks = ProfitModelParams {
            alpha: 22.3,
            beta: -0.56,
            gamma: 500.0,
        };
        let e = estimate_profit(&blnks, &agg(361.0, 0.395827901, 19.22));
        assert!((e - 18.0540).abs() < 5e-4, "got {e}");

        let ck = ProfitModelParams {
            alpha: 3.557,
            beta: -0.002,
            gamma: 100.0,
        };
        let e = estimate_profit(&ck, &agg(35.57, 0.069904762, 78.64));
        assert!((e - 10.4763).abs() < 5e-4, "got {e}");
    }

    #[test]
    fn zero_inputs_return_the_intercept() {
        let p = ProfitModelParams {
            alpha: 7.5,
            beta: -1.0,
            gamma: 400.0,
        };
        assert_eq!(estimate_profit(&p, &agg(0.0, 0.0, 0.0)), 7.5);
    }

    #[test]
    fn exact_linear_data_is_recovered() {
        let truth = ProfitModelParams {
            alpha: 12.0,
            beta: -0.4,
            gamma: 250.0,
        };
        let samples: Vec<GameAggregates> = [(10.0, 0.1), (50.0, 0.5), (200.0, 0.3), (75.0, 0.9)]
            .iter()
            .map(|&(p, c)| {
                agg(p, c, estimate_profit(&truth, &agg(p, c, 0.0)))
            })
            .collect();
        let (fitted, residuals) = fit_profit_model(&samples).unwrap();
        assert!((fitted.alpha - truth.alpha).abs() / truth.alpha.abs() < 1e-9);
        assert!((fitted.beta - truth.beta).abs() / truth.beta.abs() < 1e-9);
        assert!((fitted.gamma - truth.gamma).abs() / truth.gamma.abs() < 1e-9);
        assert!(residuals.iter().all(|r| r.abs() < 1e-9));
    }

    #[test]
    fn three_general_samples_interpolate() {
        let samples = vec![agg(10.0, 0.2, 5.0), agg(40.0, 0.8, -3.0), agg(90.0, 0.1, 12.0)];
        let (_, residuals) = fit_profit_model(&samples).unwrap();
        assert!(residuals.iter().all(|r| r.abs() < 1e-8), "{residuals:?}");
    }

    #[test]
    fn collinear_design_names_the_column() {
        // circulation proportional to price
        let samples = vec![
            agg(10.0, 0.1, 1.0),
            agg(20.0, 0.2, 2.0),
            agg(30.0, 0.3, 3.0),
            agg(40.0, 0.4, 4.0),
        ];
        let err = fit_profit_model(&samples).unwrap_err();
        assert!(err.to_string().contains("circulation_rate"), "{err}");
    }

    #[test]
    fn noisy_fit_tightens_with_more_samples() {
        let truth = ProfitModelParams {
            alpha: 5.0,
            beta: -0.2,
            gamma: 120.0,
        };
        let run = |n: usize, seed: u64| -> f64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<GameAggregates> = (0..n)
                .map(|_| {
                    let price = rng.gen_range(1.0..500.0);
                    let circ = rng.gen_range(0.0..1.0);
                    let noise: f64 = rng.sample(rand_distr_standard_normal());
                    agg(price, circ, estimate_profit(&truth, &agg(price, circ, 0.0)) + noise)
                })
                .collect();
            let (fitted, _) = fit_profit_model(&samples).unwrap();
            (fitted.alpha - truth.alpha).abs()
                + (fitted.beta - truth.beta).abs()
                + (fitted.gamma - truth.gamma).abs()
        };
        // averaged over a few seeds to keep the comparison stable
        let small: f64 = (0..5).map(|s| run(100, s)).sum::<f64>() / 5.0;
        let large: f64 = (0..5).map(|s| run(10_000, s)).sum::<f64>() / 5.0;
        assert!(
            large < small,
            "error did not shrink: n=100 → {small}, n=10000 → {large}"
        );
    }

    // Box-Muller standard normal; keeps the dev-dependency surface small.
    fn rand_distr_standard_normal() -> impl rand::distributions::Distribution<f64> {
        struct StdNormal;
        impl rand::distributions::Distribution<f64> for StdNormal {
            fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            }
        }
        StdNormal
    }

    #[test]
    fn gamma_grid_picks_the_true_value() {
        let truth = ProfitModelParams {
            alpha: 3.0,
            beta: -0.1,
            gamma: 300.0,
        };
        let samples: Vec<GameAggregates> = [(10.0, 0.15), (80.0, 0.6), (150.0, 0.35), (40.0, 0.9)]
            .iter()
            .map(|&(p, c)| agg(p, c, estimate_profit(&truth, &agg(p, c, 0.0))))
            .collect();
        let grid: Vec<f64> = (1..=14).map(|i| 100.0 * i as f64).collect();
        let (fitted, residuals) = fit_profit_model_gamma_grid(&samples, &grid).unwrap();
        assert_eq!(fitted.gamma, 300.0);
        assert!(residuals.iter().all(|r| r.abs() < 1e-9));
    }

    #[test]
    fn model_table_roundtrip() {
        let rows = vec![ModelTableRow {
            game: "BLNKS".into(),
            alpha: 22.3,
            avg_trade_price: 361.0,
            beta: -0.56,
            circulation_rate: 0.395827901,
            gamma: 500.0,
            mean_profit: 19.22,
            estimated_profit: 18.0540,
        }];
        let mut buf = Vec::new();
        write_model_table(&mut buf, &rows).unwrap();
        let parsed = read_model_table(buf.as_slice()).unwrap();
        assert_eq!(parsed, rows);
    }
}
