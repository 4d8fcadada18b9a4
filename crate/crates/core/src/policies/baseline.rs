//! Online comparators: a buy-low/sell-high threshold policy with
//! offline calibration, and a uniform-random policy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{effective_rates, run_policy};
use crate::error::CoreError;
use crate::storage::{cash_flow, Action, PriceSeries, StorageParams};
use crate::trace::EpisodeTrace;

/// Charge at or below `theta_buy`, discharge at or above `theta_sell`,
/// hold in between. When a price meets both thresholds, discharging
/// wins: realizing revenue dominates when indifferent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy {
    pub theta_buy: f64,
    pub theta_sell: f64,
}

impl ThresholdPolicy {
    pub fn new(theta_buy: f64, theta_sell: f64) -> Result<Self, CoreError> {
        if !(theta_buy.is_finite() && theta_sell.is_finite() && theta_buy <= theta_sell) {
            return Err(CoreError::InvalidPolicy(format!(
                "thresholds must satisfy buy <= sell, got buy={theta_buy}, sell={theta_sell}"
            )));
        }
        Ok(Self {
            theta_buy,
            theta_sell,
        })
    }

    pub fn decide(&self, price: f64) -> Action {
        if price >= self.theta_sell {
            Action::Discharge
        } else if price <= self.theta_buy {
            Action::Charge
        } else {
            Action::Hold
        }
    }
}

/// Runs the threshold policy over a series; magnitudes come from the
/// state-limited rates and profit from the cash-flow ledger.
pub fn run_threshold(
    prices: &PriceSeries,
    params: &StorageParams,
    policy: &ThresholdPolicy,
    eta_smooth: f64,
    initial_energy: f64,
) -> EpisodeTrace {
    run_policy(prices, params, initial_energy, eta_smooth, |s, _| {
        policy.decide(s.price)
    })
}

/// Profit-only threshold simulation, used by the calibration search.
fn threshold_profit(
    prices: &[f64],
    params: &StorageParams,
    policy: &ThresholdPolicy,
    initial_energy: f64,
) -> f64 {
    let mut energy = initial_energy;
    let mut profit = 0.0;
    for &p in prices {
        let (c_tilde, d_tilde) = effective_rates(energy, params);
        let (c, d) = match policy.decide(p) {
            Action::Charge => (c_tilde, 0.0),
            Action::Hold => (0.0, 0.0),
            Action::Discharge => (0.0, d_tilde),
        };
        profit += cash_flow(c, d, p, params);
        energy = (energy + c - d).clamp(params.e_min, params.e_max);
    }
    profit
}

/// Picks the profit-maximal `(theta_buy, theta_sell)` pair over the
/// training window by exhaustive search across empirical price
/// quantiles (every 5th percentile).
///
/// The search is deterministic: candidate pairs are scanned with the
/// buy level ascending and only a strictly better profit replaces the
/// incumbent, so ties resolve to the lowest thresholds. Calibration is
/// offline by design — the returned policy never adapts afterwards.
pub fn calibrate_threshold(
    prices: &PriceSeries,
    params: &StorageParams,
    initial_energy: f64,
) -> ThresholdPolicy {
    let mut sorted = prices.prices().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite prices"));
    let n = sorted.len();
    // nearest-rank percentiles, deduplicated
    let mut levels: Vec<f64> = (0..=20)
        .map(|k| {
            let rank = ((k as f64 / 20.0) * n as f64).ceil() as usize;
            sorted[rank.max(1).min(n) - 1]
        })
        .collect();
    levels.dedup();

    let mut best = ThresholdPolicy {
        theta_buy: levels[0],
        theta_sell: levels[levels.len() - 1],
    };
    let mut best_profit = f64::NEG_INFINITY;
    for (bi, &buy) in levels.iter().enumerate() {
        for &sell in &levels[bi..] {
            let candidate = ThresholdPolicy {
                theta_buy: buy,
                theta_sell: sell,
            };
            let profit = threshold_profit(prices.prices(), params, &candidate, initial_energy);
            if profit > best_profit {
                best_profit = profit;
                best = candidate;
            }
        }
    }
    best
}

/// Uniform-random dispatch, seeded for reproducibility.
pub fn run_random(
    prices: &PriceSeries,
    params: &StorageParams,
    seed: u64,
    eta_smooth: f64,
    initial_energy: f64,
) -> EpisodeTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_policy(prices, params, initial_energy, eta_smooth, |_, _| {
        Action::from_index(rng.gen_range(0..Action::COUNT))
    })
}
