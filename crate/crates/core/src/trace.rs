//! Per-step episode records shared by every policy runner.

use crate::storage::Action;

/// What happened at one step of an episode. `t` is 1-based; `energy` is
/// the level after the action settled; `cum_profit` is the running sum
/// of `cash_flow`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub t: usize,
    pub price: f64,
    pub p_bar: f64,
    pub action: Action,
    pub energy: f64,
    /// Training reward received (zero for non-learning policies).
    pub reward: f64,
    pub cash_flow: f64,
    pub cum_profit: f64,
}

/// Ordered step records for one episode. The cumulative-profit column
/// is maintained on push, so it is a prefix sum of `cash_flow` by
/// construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeTrace {
    pub steps: Vec<TraceStep>,
}

impl EpisodeTrace {
    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        t: usize,
        price: f64,
        p_bar: f64,
        action: Action,
        energy: f64,
        reward: f64,
        cash_flow: f64,
    ) {
        let cum_profit = self.final_profit() + cash_flow;
        self.steps.push(TraceStep {
            t,
            price,
            p_bar,
            action,
            energy,
            reward,
            cash_flow,
            cum_profit,
        });
    }

    /// Cumulative cash-flow profit at the end of the episode (zero for
    /// an empty trace).
    pub fn final_profit(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cum_profit)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}
