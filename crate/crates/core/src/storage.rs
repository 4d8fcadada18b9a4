//! Core domain types: battery parameters, price series, state
//! discretization, and the cash-flow ledger convention.

use std::fmt;
use std::str::FromStr;

use crate::error::CoreError;

/// Physical description of one storage unit.
///
/// Energy bounds are absolute levels in MWh. Rate limits are energy
/// moved per trading period (MWh per step). Efficiencies are applied in
/// the cash flow only; the stored-energy dynamics move the full
/// charged/discharged amount.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageParams {
    /// Minimum energy level (MWh).
    pub e_min: f64,
    /// Maximum energy level (MWh).
    pub e_max: f64,
    /// Maximum charge per step (MWh).
    pub c_max: f64,
    /// Maximum discharge per step (MWh).
    pub d_max: f64,
    /// Charge efficiency in (0, 1].
    pub eta_c: f64,
    /// Discharge efficiency in (0, 1].
    pub eta_d: f64,
}

impl StorageParams {
    pub fn new(
        e_min: f64,
        e_max: f64,
        c_max: f64,
        d_max: f64,
        eta_c: f64,
        eta_d: f64,
    ) -> Result<Self, CoreError> {
        let err = |msg: String| Err(CoreError::InvalidStorage(msg));
        for (name, v) in [
            ("e_min", e_min),
            ("e_max", e_max),
            ("c_max", c_max),
            ("d_max", d_max),
            ("eta_c", eta_c),
            ("eta_d", eta_d),
        ] {
            if !v.is_finite() {
                return err(format!("{name} must be finite, got {v}"));
            }
        }
        if e_min >= e_max {
            return err(format!("e_min ({e_min}) must be below e_max ({e_max})"));
        }
        if c_max <= 0.0 || d_max <= 0.0 {
            return err(format!(
                "rate limits must be positive, got c_max={c_max}, d_max={d_max}"
            ));
        }
        if !(0.0 < eta_c && eta_c <= 1.0) || !(0.0 < eta_d && eta_d <= 1.0) {
            return err(format!(
                "efficiencies must lie in (0, 1], got eta_c={eta_c}, eta_d={eta_d}"
            ));
        }
        Ok(Self {
            e_min,
            e_max,
            c_max,
            d_max,
            eta_c,
            eta_d,
        })
    }

    /// Lossless 1-MWh battery charging or discharging fully in one step.
    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).expect("unit battery is valid")
    }

    /// Usable energy range in MWh.
    pub fn capacity(&self) -> f64 {
        self.e_max - self.e_min
    }
}

/// Time-indexed sequence of market prices.
///
/// Prices may be negative (real-time markets clear negative); they must
/// be finite and the series nonempty.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    prices: Vec<f64>,
    period_hours: f64,
    label: String,
}

impl PriceSeries {
    pub fn new(
        prices: Vec<f64>,
        period_hours: f64,
        label: impl Into<String>,
    ) -> Result<Self, CoreError> {
        if prices.is_empty() {
            return Err(CoreError::InvalidSeries("series is empty".into()));
        }
        if let Some(i) = prices.iter().position(|p| !p.is_finite()) {
            return Err(CoreError::InvalidSeries(format!(
                "price at step {} is not finite: {}",
                i + 1,
                prices[i]
            )));
        }
        if !(period_hours.is_finite() && period_hours > 0.0) {
            return Err(CoreError::InvalidSeries(format!(
                "period must be a positive number of hours, got {period_hours}"
            )));
        }
        Ok(Self {
            prices,
            period_hours,
            label: label.into(),
        })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn period_hours(&self) -> f64 {
        self.period_hours
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn min_price(&self) -> f64 {
        self.prices.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_price(&self) -> f64 {
        self.prices
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// A new series holding steps `start..=end` (1-based, inclusive).
    pub fn window(&self, start: usize, end: usize) -> Result<Self, CoreError> {
        if start < 1 || start > end || end > self.len() {
            return Err(CoreError::InvalidSeries(format!(
                "window {start}..={end} out of range for series of length {}",
                self.len()
            )));
        }
        Self::new(
            self.prices[start - 1..end].to_vec(),
            self.period_hours,
            format!("{}[{}..={}]", self.label, start, end),
        )
    }
}

/// Maps prices and energy levels onto the finite state grid.
///
/// Price bins are equal-width over `[price_low, price_high]` with
/// out-of-range prices clamped into the boundary bins; energy bins are
/// equal-width over `[e_min, e_max]`. Intervals are half-open `[lo, hi)`
/// with the last bin closed, so every value maps to exactly one bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretizer {
    price_bins: usize,
    energy_bins: usize,
    price_low: f64,
    price_high: f64,
}

impl Discretizer {
    pub fn new(
        price_bins: usize,
        energy_bins: usize,
        price_low: f64,
        price_high: f64,
    ) -> Result<Self, CoreError> {
        if price_bins < 2 || energy_bins < 2 {
            return Err(CoreError::InvalidDiscretizer(format!(
                "need at least 2 bins per axis, got {price_bins} price and {energy_bins} energy bins"
            )));
        }
        if !(price_low.is_finite() && price_high.is_finite() && price_low < price_high) {
            return Err(CoreError::InvalidDiscretizer(format!(
                "price bounds must satisfy low < high, got [{price_low}, {price_high}]"
            )));
        }
        Ok(Self {
            price_bins,
            energy_bins,
            price_low,
            price_high,
        })
    }

    /// Fits the price bounds to the min/max of a series. A flat series
    /// is widened by ±0.5 around its single price so the bounds stay
    /// well-ordered.
    pub fn fit(
        price_bins: usize,
        energy_bins: usize,
        series: &PriceSeries,
    ) -> Result<Self, CoreError> {
        let (mut lo, mut hi) = (series.min_price(), series.max_price());
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        Self::new(price_bins, energy_bins, lo, hi)
    }

    pub fn price_bins(&self) -> usize {
        self.price_bins
    }

    pub fn energy_bins(&self) -> usize {
        self.energy_bins
    }

    pub fn price_low(&self) -> f64 {
        self.price_low
    }

    pub fn price_high(&self) -> f64 {
        self.price_high
    }

    /// Total number of states in the grid.
    pub fn num_states(&self) -> usize {
        self.price_bins * self.energy_bins
    }

    /// 1-based price bin; prices outside the fitted range clamp to the
    /// boundary bins.
    pub fn price_bin(&self, price: f64) -> usize {
        if price <= self.price_low {
            return 1;
        }
        if price >= self.price_high {
            return self.price_bins;
        }
        let width = (self.price_high - self.price_low) / self.price_bins as f64;
        let k = ((price - self.price_low) / width).floor() as usize;
        (k + 1).min(self.price_bins)
    }

    /// 1-based energy bin over `[e_min, e_max]`.
    ///
    /// Panics if `e` lies outside the bounds beyond numeric tolerance;
    /// the environment keeps energy inside them by construction, so an
    /// out-of-range level is a dynamics bug.
    pub fn energy_bin(&self, energy: f64, params: &StorageParams) -> usize {
        let tol = 1e-9 * (1.0 + params.e_min.abs().max(params.e_max.abs()));
        assert!(
            energy >= params.e_min - tol && energy <= params.e_max + tol,
            "energy {} outside [{}, {}]",
            energy,
            params.e_min,
            params.e_max
        );
        if energy <= params.e_min {
            return 1;
        }
        if energy >= params.e_max {
            return self.energy_bins;
        }
        let width = (params.e_max - params.e_min) / self.energy_bins as f64;
        let k = ((energy - params.e_min) / width).floor() as usize;
        (k + 1).min(self.energy_bins)
    }

    /// The discretized state for a (price, energy) observation.
    pub fn state(&self, price: f64, energy: f64, params: &StorageParams) -> MarketState {
        MarketState {
            price_bin: self.price_bin(price),
            energy_bin: self.energy_bin(energy, params),
        }
    }
}

/// Discretized (price bin, energy bin) pair; bins are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MarketState {
    pub price_bin: usize,
    pub energy_bin: usize,
}

impl MarketState {
    /// Flat row index into a table with `energy_bins` columns per price
    /// bin.
    pub fn index(&self, energy_bins: usize) -> usize {
        (self.price_bin - 1) * energy_bins + (self.energy_bin - 1)
    }
}

/// The three dispatch decisions. Realized magnitudes are state-limited
/// by [`crate::env::effective_rates`]; a saturated action degrades to a
/// no-op rather than an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Discharge,
    Hold,
    Charge,
}

impl Action {
    pub const COUNT: usize = 3;
    pub const ALL: [Action; 3] = [Action::Discharge, Action::Hold, Action::Charge];

    pub fn index(self) -> usize {
        match self {
            Action::Discharge => 0,
            Action::Hold => 1,
            Action::Charge => 2,
        }
    }

    pub fn from_index(idx: usize) -> Action {
        match idx {
            0 => Action::Discharge,
            1 => Action::Hold,
            2 => Action::Charge,
            _ => panic!("action index {idx} out of range"),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Discharge => "discharge",
            Action::Hold => "hold",
            Action::Charge => "charge",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "discharge" => Ok(Action::Discharge),
            "hold" => Ok(Action::Hold),
            "charge" => Ok(Action::Charge),
            other => Err(CoreError::InvalidPolicy(format!("unknown action '{other}'"))),
        }
    }
}

/// Signed cash received over one step: discharge revenue minus charging
/// cost, with conversion losses priced in: `p * (eta_d*d - c/eta_c)`.
///
/// This is the ground-truth profit ledger for every policy, regardless
/// of which training reward a learner optimizes. At most one of
/// `charge`/`discharge` may be nonzero.
pub fn cash_flow(charge: f64, discharge: f64, price: f64, params: &StorageParams) -> f64 {
    assert!(
        charge == 0.0 || discharge == 0.0,
        "simultaneous charge ({charge}) and discharge ({discharge})"
    );
    price * (params.eta_d * discharge - charge / params.eta_c)
}
