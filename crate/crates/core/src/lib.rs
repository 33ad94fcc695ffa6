//! Cost-constrained, list-based dynamic treatment regimes.
//!
//! Q-functions for effectiveness and cost are fitted by backward recursion;
//! at each interval a short decision list is searched greedily so that the
//! plug-in expected cost stays below the remaining budget. A ladder of such
//! regimes over increasing budgets is then compared by incremental
//! cost-effectiveness ratio against a willingness to pay.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use listdtr::{fit_regime, generate_dataset, sim, FeatureSpec, LearnerSpec, RegimeConfig};
//!
//! let cfg = sim::SimConfig::<f64> {
//!     n_units: 400,
//!     level: sim::CorrelationLevel::Low,
//!     seed: 1,
//!     policy: sim::Policy::Observational,
//! };
//! let data = generate_dataset(&cfg, &sim::DgpParams::default()).unwrap();
//! let rc = RegimeConfig::equal_split(30.0, 3, 3, 0.0, LearnerSpec::ols(), FeatureSpec::markov());
//! let fitted = fit_regime(&data, &rc).unwrap();
//! assert_eq!(fitted.regime.n_intervals(), 3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cea;
pub mod data;
pub mod error;
pub mod listsearch;
pub mod qlearn;
pub mod regime;
pub mod regress;
pub mod scalar;
pub mod seeds;
pub mod sim;

pub use cea::{icer, select_cost_effective, Decision, Icer};
pub use data::{assemble_history, binary_actions, Action, FeatureSpec, FeatureTerm};
pub use error::{Error, Result};
pub use listsearch::{enumerate_thresholds, fit_clause, fit_regime, fit_stage_rule, Direction, RegimeConfig};
pub use qlearn::{estimate_regime_value, fit_stage_q, pseudo_outcomes, unconstrained_rule};
pub use regime::{apply_decision_list, regime_distance, Region, SummarySource};
pub use regress::{LearnerKind, LearnerSpec};
pub use scalar::Scalar;
pub use seeds::derive_seed;
pub use sim::{
    generate_dataset, monte_carlo_evaluate, seed_sensitivity, summarize_study, CorrelationLevel, DgpParams, LadderStudy,
};

pub type TrajectoryDataset = data::TrajectoryDataset<f64>;
pub type IntervalRecord = data::IntervalRecord<f64>;
pub type History = data::History<f64>;
pub type Clause = regime::Clause<f64>;
pub type DecisionList = regime::DecisionList<f64>;
pub type Regime = regime::Regime<f64>;
pub type RegimeSummary = regime::RegimeSummary<f64>;
pub type QPair = qlearn::QPair<f64>;
pub type QTable = qlearn::QTable<f64>;
pub type FittedRegime = listsearch::FittedRegime<f64>;
pub type CandidateLadder = cea::CandidateLadder<f64>;
pub type LadderEntry = cea::LadderEntry<f64>;
pub type CeaReport = cea::CeaReport<f64>;
pub type McSummary = sim::McSummary<f64>;
