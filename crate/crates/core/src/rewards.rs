//! Training-reward definitions and the moving-average price tracker.
//!
//! Two reward designs drive the learner. The first pays the instant
//! cash flow of the action; the second scores actions against an
//! exponentially weighted average price, so that buying below the
//! average (and selling above it) earns a positive reward. Neither
//! feeds the profit ledger: cumulative profit always comes from
//! [`crate::storage::cash_flow`].

use std::fmt;
use std::str::FromStr;

use crate::error::CoreError;
use crate::storage::Action;

/// Which training reward a learner optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardKind {
    /// Instant cash flow of the action.
    R1,
    /// Spread against the moving average price.
    R2,
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardKind::R1 => "r1",
            RewardKind::R2 => "r2",
        })
    }
}

impl FromStr for RewardKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r1" | "R1" => Ok(RewardKind::R1),
            "r2" | "R2" => Ok(RewardKind::R2),
            other => Err(CoreError::InvalidAgentConfig(format!(
                "unknown reward kind '{other}' (expected r1 or r2)"
            ))),
        }
    }
}

/// Exponentially weighted moving average of observed prices:
/// `p_bar <- (1 - eta) * p_bar + eta * p`.
///
/// `eta` here is the smoothing weight on the newest price, unrelated to
/// the storage efficiencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvgPriceTracker {
    p_bar: f64,
    eta: f64,
}

impl AvgPriceTracker {
    pub fn new(initial: f64, eta: f64) -> Result<Self, CoreError> {
        if !initial.is_finite() {
            return Err(CoreError::InvalidAgentConfig(format!(
                "average-price seed must be finite, got {initial}"
            )));
        }
        if !(eta.is_finite() && 0.0 < eta && eta <= 1.0) {
            return Err(CoreError::InvalidAgentConfig(format!(
                "smoothing parameter must lie in (0, 1], got {eta}"
            )));
        }
        Ok(Self {
            p_bar: initial,
            eta,
        })
    }

    pub fn update(&mut self, price: f64) {
        self.p_bar = (1.0 - self.eta) * self.p_bar + self.eta * price;
    }

    pub fn value(&self) -> f64 {
        self.p_bar
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Instant-profit reward: `-p*c_tilde` on charge, `p*d_tilde` on
/// discharge, zero on hold. Rates are the state-limited magnitudes, so
/// a saturated no-op earns nothing.
pub fn reward1(action: Action, price: f64, c_tilde: f64, d_tilde: f64) -> f64 {
    match action {
        Action::Charge => -price * c_tilde,
        Action::Hold => 0.0,
        Action::Discharge => price * d_tilde,
    }
}

/// Average-anchored reward: `(p_bar - p)*c_tilde` on charge,
/// `(p - p_bar)*d_tilde` on discharge, zero on hold. Buying below the
/// average is rewarded instead of penalized, which keeps the learner
/// from starving the charge action.
pub fn reward2(action: Action, price: f64, p_bar: f64, c_tilde: f64, d_tilde: f64) -> f64 {
    match action {
        Action::Charge => (p_bar - price) * c_tilde,
        Action::Hold => 0.0,
        Action::Discharge => (price - p_bar) * d_tilde,
    }
}

/// Dispatches on the reward kind; `p_bar` is ignored by `R1`.
pub fn reward(
    kind: RewardKind,
    action: Action,
    price: f64,
    p_bar: f64,
    c_tilde: f64,
    d_tilde: f64,
) -> f64 {
    match kind {
        RewardKind::R1 => reward1(action, price, c_tilde, d_tilde),
        RewardKind::R2 => reward2(action, price, p_bar, c_tilde, d_tilde),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ema_update_examples() {
        let mut t = AvgPriceTracker::new(0.5, 0.1).unwrap();
        t.update(0.7);
        assert!((t.value() - 0.52).abs() < 1e-12);

        // full-weight update forgets the past entirely
        let mut t = AvgPriceTracker::new(123.0, 1.0).unwrap();
        t.update(-4.0);
        assert_eq!(t.value(), -4.0);

        // observing the current average is a fixed point
        for eta in [0.05, 0.3, 1.0] {
            let mut t = AvgPriceTracker::new(7.5, eta).unwrap();
            t.update(7.5);
            assert_eq!(t.value(), 7.5);
        }
    }

    #[test]
    fn ema_rejects_bad_smoothing() {
        assert!(AvgPriceTracker::new(0.0, 0.0).is_err());
        assert!(AvgPriceTracker::new(0.0, 1.1).is_err());
        assert!(AvgPriceTracker::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn reward1_examples() {
        assert_eq!(reward1(Action::Charge, 0.3, 1.0, 0.0), -0.3);
        assert_eq!(reward1(Action::Hold, 0.3, 1.0, 1.0), 0.0);
        assert!((reward1(Action::Discharge, 0.8, 0.0, 0.5) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn reward2_examples() {
        assert!((reward2(Action::Charge, 0.3, 0.5, 1.0, 0.0) - 0.2).abs() < 1e-12);
        assert!((reward2(Action::Discharge, 0.3, 0.5, 0.0, 1.0) + 0.2).abs() < 1e-12);
        for a in Action::ALL {
            assert_eq!(reward2(a, 0.4, 0.4, 1.0, 1.0), 0.0);
        }
    }

    #[test]
    fn saturated_rates_earn_nothing() {
        assert_eq!(reward1(Action::Discharge, 5.0, 0.0, 0.0), 0.0);
        assert_eq!(reward2(Action::Charge, 0.1, 0.9, 0.0, 0.0), 0.0);
    }
}
