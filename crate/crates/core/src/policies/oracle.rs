//! Offline full-information optimum by backward-induction dynamic
//! programming on a discretized energy grid.
//!
//! Optimal dispatch is bang-bang: a profitable charge or discharge
//! always runs at the state-limited maximum rate, so three actions per
//! step suffice. The DP walks a uniform grid of energy levels; rate
//! limits that are not whole multiples of the grid step are rounded
//! down to whole grid steps, which keeps every transition exactly on
//! the grid and every recorded flow inside the rate bounds. The
//! resulting profit is the exact optimum of that grid-restricted
//! problem and an upper bound (up to grid resolution) for any policy
//! over the same action set.

use crate::error::CoreError;
use crate::rewards::AvgPriceTracker;
use crate::storage::{cash_flow, Action, PriceSeries, StorageParams};
use crate::trace::EpisodeTrace;

/// An optimal dispatch schedule: per-step flows, the energy path
/// (length `T + 1`, starting level first), and the optimal profit.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub charges: Vec<f64>,
    pub discharges: Vec<f64>,
    pub energy_path: Vec<f64>,
    pub profit: f64,
}

impl OracleSolution {
    /// Renders the schedule as an episode trace (reward column zero).
    pub fn to_trace(
        &self,
        prices: &PriceSeries,
        params: &StorageParams,
        eta_smooth: f64,
    ) -> EpisodeTrace {
        let p = prices.prices();
        let mut tracker = AvgPriceTracker::new(p[0], eta_smooth).expect("valid smoothing");
        let mut trace = EpisodeTrace::default();
        for t in 0..p.len() {
            if t > 0 {
                tracker.update(p[t]);
            }
            let (c, d) = (self.charges[t], self.discharges[t]);
            let action = if c > 0.0 {
                Action::Charge
            } else if d > 0.0 {
                Action::Discharge
            } else {
                Action::Hold
            };
            trace.push(
                t + 1,
                p[t],
                tracker.value(),
                action,
                self.energy_path[t + 1],
                0.0,
                cash_flow(c, d, p[t], params),
            );
        }
        trace
    }
}

/// Uniform energy grid with rate limits expressed in whole grid steps.
///
/// Exposed so that an exhaustive search can enumerate action sequences
/// through the identical step arithmetic the DP optimizes over.
#[derive(Debug, Clone, Copy)]
pub struct EnergyGrid {
    e_min: f64,
    e_max: f64,
    delta: f64,
    levels: usize,
    c_units: usize,
    d_units: usize,
}

impl EnergyGrid {
    pub fn new(params: &StorageParams, levels: usize) -> Self {
        let delta = (params.e_max - params.e_min) / (levels - 1) as f64;
        // rates within 1e-6 grid steps of a whole multiple count as
        // exact, everything else rounds down
        let units = |rate: f64| ((rate / delta + 1e-6).floor() as usize).min(levels - 1);
        Self {
            e_min: params.e_min,
            e_max: params.e_max,
            delta,
            levels,
            c_units: units(params.c_max),
            d_units: units(params.d_max),
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn energy(&self, i: usize) -> f64 {
        if i == self.levels - 1 {
            self.e_max
        } else {
            self.e_min + i as f64 * self.delta
        }
    }

    /// Nearest grid index for an arbitrary level in bounds.
    pub fn snap(&self, energy: f64) -> usize {
        let i = ((energy - self.e_min) / self.delta).round();
        (i.max(0.0) as usize).min(self.levels - 1)
    }

    /// Successor index under an action; saturation clips at the grid
    /// ends, so the transition is total.
    pub fn transition(&self, i: usize, action: Action) -> usize {
        match action {
            Action::Charge => (i + self.c_units).min(self.levels - 1),
            Action::Discharge => i.saturating_sub(self.d_units),
            Action::Hold => i,
        }
    }

    /// Realized (charge, discharge) flows for a move from level `i` to
    /// level `j`, taken from the grid energies so the energy path obeys
    /// the dynamics exactly.
    pub fn flows(&self, i: usize, j: usize) -> (f64, f64) {
        if j > i {
            (self.energy(j) - self.energy(i), 0.0)
        } else if j < i {
            (0.0, self.energy(i) - self.energy(j))
        } else {
            (0.0, 0.0)
        }
    }

    /// One grid step: successor level and the cash received.
    pub fn step(
        &self,
        i: usize,
        action: Action,
        price: f64,
        params: &StorageParams,
    ) -> (usize, f64) {
        let j = self.transition(i, action);
        let (c, d) = self.flows(i, j);
        (j, cash_flow(c, d, price, params))
    }
}

/// Maximizes total cash flow over the whole series by dynamic
/// programming on `levels` evenly spaced energy levels, starting from
/// the grid point nearest `initial_energy`.
///
/// Ties between actions resolve Hold > Discharge > Charge, so a
/// zero-spread series yields an all-hold schedule.
pub fn solve_offline(
    prices: &PriceSeries,
    params: &StorageParams,
    levels: usize,
    initial_energy: f64,
) -> Result<OracleSolution, CoreError> {
    if levels < 2 {
        return Err(CoreError::InvalidPolicy(format!(
            "energy grid needs at least 2 levels, got {levels}"
        )));
    }
    if !(initial_energy >= params.e_min && initial_energy <= params.e_max) {
        return Err(CoreError::InvalidStorage(format!(
            "initial energy {initial_energy} outside [{}, {}]",
            params.e_min, params.e_max
        )));
    }
    let grid = EnergyGrid::new(params, levels);
    let p = prices.prices();
    let horizon = p.len();

    // backward pass: value[i] holds the tail value from level i at the
    // step currently being filled; sums associate as cash_t + tail so
    // the optimum matches a right-folded enumeration bit for bit
    const TIE_ORDER: [Action; 3] = [Action::Hold, Action::Discharge, Action::Charge];
    let mut value = vec![0.0f64; levels];
    let mut choice = vec![Action::Hold; horizon * levels];
    for t in (0..horizon).rev() {
        let mut current = vec![f64::NEG_INFINITY; levels];
        for i in 0..levels {
            let mut best_action = Action::Hold;
            let mut best_value = f64::NEG_INFINITY;
            for action in TIE_ORDER {
                let (j, cash) = grid.step(i, action, p[t], params);
                let v = cash + value[j];
                if v > best_value {
                    best_value = v;
                    best_action = action;
                }
            }
            current[i] = best_value;
            choice[t * levels + i] = best_action;
        }
        value = current;
    }

    // forward pass along the argmax choices
    let start = grid.snap(initial_energy);
    let profit = value[start];
    let mut charges = Vec::with_capacity(horizon);
    let mut discharges = Vec::with_capacity(horizon);
    let mut energy_path = Vec::with_capacity(horizon + 1);
    let mut level = start;
    energy_path.push(grid.energy(level));
    for t in 0..horizon {
        let action = choice[t * levels + level];
        let j = grid.transition(level, action);
        let (c, d) = grid.flows(level, j);
        charges.push(c);
        discharges.push(d);
        energy_path.push(grid.energy(j));
        level = j;
    }

    Ok(OracleSolution {
        charges,
        discharges,
        energy_path,
        profit,
    })
}
