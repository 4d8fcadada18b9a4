//! Backtesting library for battery energy arbitrage in real-time
//! electricity markets.
//!
//! The crate simulates a price-taking storage unit trading against an
//! hourly spot price stream. Three families of dispatch policies share
//! one environment:
//!
//! - [`agent`] — a tabular Q-learning agent with two training-reward
//!   designs (instant cash flow vs. spread against a moving average);
//! - [`policies::oracle`] — the offline full-information optimum, solved
//!   by dynamic programming on a discretized energy grid;
//! - [`policies::baseline`] — an online buy-low/sell-high threshold
//!   policy with offline calibration, plus a uniform-random comparator.
//!
//! Cumulative profit is always accounted with [`storage::cash_flow`],
//! independent of whichever training reward a learner uses.

pub mod agent;
pub mod env;
pub mod error;
pub mod policies;
pub mod rewards;
pub mod storage;
pub mod trace;

pub use agent::{train, AgentConfig, Epsilon, QTable};
pub use env::{effective_rates, run_policy, step, EnvState, StepOutcome};
pub use error::CoreError;
pub use rewards::{reward1, reward2, AvgPriceTracker, RewardKind};
pub use storage::{cash_flow, Action, Discretizer, MarketState, PriceSeries, StorageParams};
pub use trace::{EpisodeTrace, TraceStep};
