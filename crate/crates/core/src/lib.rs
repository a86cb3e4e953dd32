//! Planning and verification for optically connected few-qubit registers.
//!
//! Registers share raw Bell pairs of fidelity `F` over a lossy optical
//! link. Readout is made robust by majority vote, and the pairs are
//! purified by two-level entanglement pumping: bit errors are pumped out
//! first with raw pairs, then phase errors with the bit-purified pairs.
//! This crate computes what that buys and what it costs:
//!
//! * [`measurement`]: majority-vote error and duration, optimal repetitions;
//! * [`pumping`]: Bell-diagonal pumping recurrences, the two-level and the
//!   alternating standard schedules, and the leading-order infidelity;
//! * [`markov`]: the absorbing chain over raw-pair consumption (failure
//!   probability for a budget, mean consumption, budget solving);
//! * [`planner`]: schedule search and the composed [`PlanResult`]
//!   (budget, clock cycle `t_C`, effective error `gamma`);
//! * [`timing`]: optical readout and entanglement-generation times;
//! * [`oracle`]: an independent 16-dimensional density-matrix simulation of
//!   the pumping circuits and a seeded Monte-Carlo of the protocol;
//! * [`sweep`], [`verify`], [`presets`]: grid evaluation with CSV output,
//!   the cross-check suite, and the reference parameter sets.
//!
//! ```
//! use rnp::presets::Scenario;
//!
//! let plan = Scenario::nv_dephasing().plan().unwrap();
//! assert!(plan.t_c > 100e-6 && plan.t_c < 200e-6);
//! ```

pub mod error;
pub mod markov;
pub mod measurement;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod presets;
pub mod pumping;
pub mod sweep;
pub mod timing;
pub mod verify;

pub use error::{Error, Result};
pub use markov::{
    build_chain, expected_pairs, failure_probability, solve_budget, MarkovChain, MarkovResult,
    RestartMode,
};
pub use measurement::{measurement_error, measurement_time, optimal_m};
pub use model::{
    BellDiagonalState, ErrorParams, MeasurementPlan, NoiseKind, PhysicalTimings, PlanResult,
    PumpSchedule,
};
pub use planner::{optimize_schedule, plan, PlannerOptions, PumpLevels};
pub use pumping::{
    closed_form_infidelity, pump_step, raw_pair, run_standard, run_two_level, PumpKind, PumpTrace,
    StepRecord,
};
