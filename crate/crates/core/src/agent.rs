//! Tabular Q-learning: the state-action value table, its Bellman
//! update, ε-greedy action selection, greedy policy extraction, and the
//! online training loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{effective_rates, run_policy, step, EnvState};
use crate::error::CoreError;
use crate::rewards::{reward, AvgPriceTracker, RewardKind};
use crate::storage::{Action, Discretizer, MarketState, PriceSeries, StorageParams};
use crate::trace::EpisodeTrace;

/// Exploration schedule for ε-greedy selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Constant(f64),
    /// Linear interpolation from `start` at the first step to `end` at
    /// the last step of the horizon.
    LinearDecay { start: f64, end: f64 },
}

impl Epsilon {
    /// Exploration probability at step `t` (0-based) of a `horizon`-step
    /// run.
    pub fn at(&self, t: usize, horizon: usize) -> f64 {
        match *self {
            Epsilon::Constant(e) => e,
            Epsilon::LinearDecay { start, end } => {
                if horizon <= 1 {
                    return end;
                }
                let frac = t as f64 / (horizon - 1) as f64;
                start + (end - start) * frac
            }
        }
    }

    fn validate(&self) -> Result<(), CoreError> {
        let ok = |e: f64| e.is_finite() && (0.0..=1.0).contains(&e);
        let valid = match *self {
            Epsilon::Constant(e) => ok(e),
            Epsilon::LinearDecay { start, end } => ok(start) && ok(end),
        };
        if valid {
            Ok(())
        } else {
            Err(CoreError::InvalidAgentConfig(format!(
                "exploration probabilities must lie in [0, 1], got {self:?}"
            )))
        }
    }
}

/// Learner hyperparameters. `alpha` weights the new Bellman target
/// against the stored value, `gamma` discounts future value, and the
/// seed pins the exploration stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: Epsilon,
    pub seed: u64,
}

impl AgentConfig {
    pub fn new(alpha: f64, gamma: f64, epsilon: Epsilon, seed: u64) -> Result<Self, CoreError> {
        if !(alpha.is_finite() && 0.0 < alpha && alpha <= 1.0) {
            return Err(CoreError::InvalidAgentConfig(format!(
                "learning rate must lie in (0, 1], got {alpha}"
            )));
        }
        if !(gamma.is_finite() && (0.0..=1.0).contains(&gamma)) {
            return Err(CoreError::InvalidAgentConfig(format!(
                "discount must lie in [0, 1], got {gamma}"
            )));
        }
        epsilon.validate()?;
        Ok(Self {
            alpha,
            gamma,
            epsilon,
            seed,
        })
    }
}

impl Default for AgentConfig {
    /// α = 0.5, γ = 0.9, constant ε = 0.9, seed 0.
    fn default() -> Self {
        Self {
            alpha: 0.5,
            gamma: 0.9,
            epsilon: Epsilon::Constant(0.9),
            seed: 0,
        }
    }
}

/// Dense state-action value matrix, `price_bins * energy_bins` rows by
/// three action columns, zero-initialized.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: Vec<f64>,
    price_bins: usize,
    energy_bins: usize,
}

/// Argmax scan order; earlier entries win ties so an untrained table
/// starts out holding rather than churning.
const TIE_ORDER: [Action; 3] = [Action::Hold, Action::Discharge, Action::Charge];

impl QTable {
    pub fn zeros(disc: &Discretizer) -> Self {
        Self {
            values: vec![0.0; disc.num_states() * Action::COUNT],
            price_bins: disc.price_bins(),
            energy_bins: disc.energy_bins(),
        }
    }

    /// Rebuilds a table from its flat contents (row-major by state
    /// index, then action index). Used when warm-starting from a saved
    /// table.
    pub fn from_values(
        price_bins: usize,
        energy_bins: usize,
        values: Vec<f64>,
    ) -> Result<Self, CoreError> {
        if values.len() != price_bins * energy_bins * Action::COUNT {
            return Err(CoreError::InvalidAgentConfig(format!(
                "expected {} values for a {}x{} table, got {}",
                price_bins * energy_bins * Action::COUNT,
                price_bins,
                energy_bins,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CoreError::InvalidAgentConfig(format!(
                "table values must be finite, got {v}"
            )));
        }
        Ok(Self {
            values,
            price_bins,
            energy_bins,
        })
    }

    pub fn price_bins(&self) -> usize {
        self.price_bins
    }

    pub fn energy_bins(&self) -> usize {
        self.energy_bins
    }

    pub fn num_states(&self) -> usize {
        self.price_bins * self.energy_bins
    }

    /// Flat contents, row-major by state index then action index.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn idx(&self, state: MarketState, action: Action) -> usize {
        assert!(
            state.price_bin >= 1
                && state.price_bin <= self.price_bins
                && state.energy_bin >= 1
                && state.energy_bin <= self.energy_bins,
            "state {state:?} outside {}x{} table",
            self.price_bins,
            self.energy_bins
        );
        state.index(self.energy_bins) * Action::COUNT + action.index()
    }

    pub fn get(&self, state: MarketState, action: Action) -> f64 {
        self.values[self.idx(state, action)]
    }

    pub fn set(&mut self, state: MarketState, action: Action, value: f64) {
        let i = self.idx(state, action);
        self.values[i] = value;
    }

    /// Largest action value available from `state`.
    pub fn max_value(&self, state: MarketState) -> f64 {
        Action::ALL
            .into_iter()
            .map(|a| self.get(state, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// One Bellman update:
    /// `Q(s,a) <- (1-alpha)*Q(s,a) + alpha*(r + gamma*max_a' Q(s',a'))`.
    /// Only the `(state, action)` entry changes.
    pub fn update(
        &mut self,
        state: MarketState,
        action: Action,
        reward: f64,
        next_state: MarketState,
        alpha: f64,
        gamma: f64,
    ) {
        let bootstrap = self.max_value(next_state);
        let i = self.idx(state, action);
        self.values[i] = (1.0 - alpha) * self.values[i] + alpha * (reward + gamma * bootstrap);
    }

    /// Greedy action with the fixed tie order Hold > Discharge >
    /// Charge.
    pub fn greedy_action(&self, state: MarketState) -> Action {
        let mut best = TIE_ORDER[0];
        let mut best_value = f64::NEG_INFINITY;
        for a in TIE_ORDER {
            let v = self.get(state, a);
            if v > best_value {
                best = a;
                best_value = v;
            }
        }
        best
    }

    /// Greedy action for every state, indexed by
    /// `MarketState::index(energy_bins)`.
    pub fn greedy_policy(&self) -> Vec<Action> {
        let mut policy = Vec::with_capacity(self.num_states());
        for price_bin in 1..=self.price_bins {
            for energy_bin in 1..=self.energy_bins {
                policy.push(self.greedy_action(MarketState {
                    price_bin,
                    energy_bin,
                }));
            }
        }
        policy
    }

    /// ε-greedy selection: a uniform random action with probability
    /// `epsilon`, the greedy action otherwise.
    pub fn select_action<R: Rng>(
        &self,
        state: MarketState,
        epsilon: f64,
        rng: &mut R,
    ) -> Action {
        if rng.gen::<f64>() < epsilon {
            Action::from_index(rng.gen_range(0..Action::COUNT))
        } else {
            self.greedy_action(state)
        }
    }
}

/// Runs the online learning loop over a full price series as a single
/// continuous episode (no resets; energy carries over).
///
/// Each step observes the state from the current price and carried-in
/// energy, picks an ε-greedy action, computes the training reward from
/// the state-limited rates, advances the dynamics, and — once the next
/// price is visible — updates the table toward the observed successor
/// state. The final step has no successor and performs no update.
///
/// Returns the learned table and the training trajectory, whose
/// cumulative profit is pure cash flow regardless of `reward_kind`.
#[allow(clippy::too_many_arguments)]
pub fn train(
    prices: &PriceSeries,
    params: &StorageParams,
    disc: &Discretizer,
    cfg: &AgentConfig,
    reward_kind: RewardKind,
    eta_smooth: f64,
    initial_energy: f64,
    warm_start: Option<QTable>,
) -> Result<(QTable, EpisodeTrace), CoreError> {
    if prices.len() < 2 {
        return Err(CoreError::HorizonTooShort {
            need: 2,
            got: prices.len(),
        });
    }
    if !(initial_energy >= params.e_min && initial_energy <= params.e_max) {
        return Err(CoreError::InvalidStorage(format!(
            "initial energy {initial_energy} outside [{}, {}]",
            params.e_min, params.e_max
        )));
    }
    let mut table = match warm_start {
        Some(t) => {
            if t.price_bins() != disc.price_bins() || t.energy_bins() != disc.energy_bins() {
                return Err(CoreError::InvalidAgentConfig(format!(
                    "warm-start table is {}x{}, discretizer wants {}x{}",
                    t.price_bins(),
                    t.energy_bins(),
                    disc.price_bins(),
                    disc.energy_bins()
                )));
            }
            t
        }
        None => QTable::zeros(disc),
    };

    let p = prices.prices();
    let horizon = p.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tracker = AvgPriceTracker::new(p[0], eta_smooth)?;
    let mut trace = EpisodeTrace::default();
    let mut state = EnvState {
        t: 0,
        energy: initial_energy,
        price: p[0],
    };

    for t in 0..horizon {
        if t > 0 {
            tracker.update(p[t]);
        }
        let market = disc.state(state.price, state.energy, params);
        let epsilon = cfg.epsilon.at(t, horizon);
        let action = table.select_action(market, epsilon, &mut rng);
        let (c_tilde, d_tilde) = effective_rates(state.energy, params);
        let r = reward(
            reward_kind,
            action,
            state.price,
            tracker.value(),
            c_tilde,
            d_tilde,
        );
        let next_price = p.get(t + 1).copied();
        let out = step(state, action, next_price, params);
        if next_price.is_some() {
            let next_market = disc.state(out.next.price, out.next.energy, params);
            table.update(market, action, r, next_market, cfg.alpha, cfg.gamma);
        }
        trace.push(
            t + 1,
            state.price,
            tracker.value(),
            action,
            out.next.energy,
            r,
            out.cash_flow,
        );
        state = out.next;
    }
    Ok((table, trace))
}

/// Runs the frozen greedy policy of a trained table over a series (no
/// exploration, no updates).
pub fn evaluate_greedy(
    table: &QTable,
    prices: &PriceSeries,
    params: &StorageParams,
    disc: &Discretizer,
    eta_smooth: f64,
    initial_energy: f64,
) -> EpisodeTrace {
    run_policy(prices, params, initial_energy, eta_smooth, |s, _| {
        table.greedy_action(disc.state(s.price, s.energy, params))
    })
}
