//! Storage-plus-market transition dynamics.
//!
//! The environment is a pure transition function over explicit state:
//! saturated actions degrade to no-ops through the state-limited
//! effective rates, so energy can never leave `[e_min, e_max]`.

use crate::rewards::AvgPriceTracker;
use crate::storage::{cash_flow, Action, PriceSeries, StorageParams};
use crate::trace::EpisodeTrace;

/// Snapshot of the environment before an action is taken: the step
/// index, the energy level carried in, and the price the action trades
/// at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState {
    pub t: usize,
    pub energy: f64,
    pub price: f64,
}

/// Result of advancing the environment by one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next: EnvState,
    /// Energy actually charged this step (0 unless the action was
    /// `Charge`); never exceeds `c_max`.
    pub realized_charge: f64,
    /// Energy actually discharged this step; never exceeds `d_max`.
    pub realized_discharge: f64,
    /// Cash received at the current price (negative when buying).
    pub cash_flow: f64,
    /// True when the price series is exhausted.
    pub done: bool,
}

/// State-limited charge/discharge magnitudes:
/// `(min(c_max, e_max - energy), min(d_max, energy - e_min))`.
pub fn effective_rates(energy: f64, params: &StorageParams) -> (f64, f64) {
    let c = params.c_max.min(params.e_max - energy).max(0.0);
    let d = params.d_max.min(energy - params.e_min).max(0.0);
    (c, d)
}

/// Advances the dynamics by one step. The cash flow is priced at the
/// price in `state` (the one the action was taken under); `next_price`
/// seeds the successor state, with `None` marking the end of the
/// series.
pub fn step(
    state: EnvState,
    action: Action,
    next_price: Option<f64>,
    params: &StorageParams,
) -> StepOutcome {
    let (c_tilde, d_tilde) = effective_rates(state.energy, params);
    let (charge, discharge) = match action {
        Action::Charge => (c_tilde, 0.0),
        Action::Hold => (0.0, 0.0),
        Action::Discharge => (0.0, d_tilde),
    };
    // clamp guards the bounds against rounding in energy + c - d
    let energy = (state.energy + charge - discharge).clamp(params.e_min, params.e_max);
    StepOutcome {
        next: EnvState {
            t: state.t + 1,
            energy,
            price: next_price.unwrap_or(state.price),
        },
        realized_charge: charge,
        realized_discharge: discharge,
        cash_flow: cash_flow(charge, discharge, state.price, params),
        done: next_price.is_none(),
    }
}

/// Drives a non-learning policy over a whole price series and collects
/// the per-step trace. The decider sees the pre-action state and the
/// running average price. Learning agents keep their own loop (see
/// [`crate::agent::train`]); their trace carries the training reward,
/// whereas traces produced here record a reward of zero.
pub fn run_policy(
    prices: &PriceSeries,
    params: &StorageParams,
    initial_energy: f64,
    eta_smooth: f64,
    mut decide: impl FnMut(&EnvState, f64) -> Action,
) -> EpisodeTrace {
    assert!(
        initial_energy >= params.e_min && initial_energy <= params.e_max,
        "initial energy {} outside [{}, {}]",
        initial_energy,
        params.e_min,
        params.e_max
    );
    let p = prices.prices();
    let mut tracker = AvgPriceTracker::new(p[0], eta_smooth).expect("valid smoothing");
    let mut trace = EpisodeTrace::default();
    let mut state = EnvState {
        t: 0,
        energy: initial_energy,
        price: p[0],
    };
    for t in 0..p.len() {
        if t > 0 {
            tracker.update(p[t]);
        }
        let action = decide(&state, tracker.value());
        let out = step(state, action, p.get(t + 1).copied(), params);
        trace.push(
            t + 1,
            state.price,
            tracker.value(),
            action,
            out.next.energy,
            0.0,
            out.cash_flow,
        );
        state = out.next;
    }
    trace
}
