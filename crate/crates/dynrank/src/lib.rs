//! # dynrank
//!
//! Score-driven Plackett-Luce models for time-varying ranking data.
//!
//! The library models a sequence of (possibly partial) rankings of `N`
//! items. Each item carries a latent log-scale *worth*; a period's ranking
//! follows the Plackett-Luce distribution at the current worths, and the
//! worths evolve through an observation-driven recursion that combines
//! per-item intercepts, exogenous covariates, the lagged score of the
//! ranking log-likelihood (the generalized autoregressive score mechanism)
//! and autoregressive feedback.
//!
//! What's here:
//!
//! - [`plackett_luce`]: log-probability, score, sequential sampling and an
//!   enumeration-based Fisher information oracle, for complete and partial
//!   rankings.
//! - [`filter`]: the deterministic worth recursion over a panel of
//!   rankings, with static, mean-reverting and random-walk variants and two
//!   treatments of absent items.
//! - [`estimate`]: maximum likelihood via quasi-Newton optimization with
//!   finite-difference gradients, Hessian-based standard errors, confidence
//!   intervals, AIC and the ranked-above connectivity diagnostic.
//! - [`simulate`]: panel generation from the model and a Monte Carlo
//!   replication study reporting mean absolute errors and confidence
//!   interval coverage.
//! - [`predict`]: one-step-ahead worths, predicted rankings and exact or
//!   Monte Carlo probabilities of ranking events.
//! - [`io`] and [`cli`]: long-format CSV ingestion, run configuration and
//!   the `fit` / `simulate` / `study` / `predict` subcommands.
//!
//! Start with the runnable examples (`cargo run --example fit_variants`)
//! or the `dynrank` binary for the command-line surface.

pub mod cli;
pub mod data;
pub mod error;
pub mod estimate;
pub mod filter;
pub mod io;
pub mod plackett_luce;
pub mod predict;
pub mod ranking;
pub mod simulate;
pub mod stats;

mod optim;

pub use data::PanelDataset;
pub use error::{Error, Result};
pub use estimate::{
    aic, confidence_interval, connectivity_check, fit, standard_errors, wald_interval,
    ConnectivityDiagnostic, FitResult, Inference,
};
pub use filter::{
    filter_path, filter_path_with_init, unconditional_worth, AbsentMode, FilterOutput, ModelSpec,
    ParameterVector, Variant,
};
pub use optim::OptimizerConfig;
pub use predict::{
    event_probability, predict_worth, predict_worth_with, predicted_ranking,
    winner_probabilities, EventConfig, EventEstimate, EventKind, RankingEvent,
};
pub use io::{load_dataset, RunConfig, VariantChoice};
pub use ranking::Ranking;
pub use simulate::{
    omega_grid, replication_study, simulate_panel, ParameterGroup, SimulatedPanel,
    SimulateOptions, SimulationDesign, StudyCell, StudyReport,
};
