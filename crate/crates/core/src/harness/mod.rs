//! Fault injection, closed-loop runs and suite evaluation.

mod fault;
mod observation;
mod report;
mod run;
mod scenario;
mod suite;

pub use fault::{
    apply_jump, cleared_by, disturbance_of, validate_fault, FaultEffect, FaultKind, FaultSpec, PumpPosition,
    ValvePosition,
};
pub use observation::{ObservationDocument, OBSERVATION_SCHEMA};
pub use report::{pooled_categories, render_pooled, RowTally, SuiteReport, Tally};
pub use run::{inject_fault, run_scenario, RunConfig, RunContext, RunOutcome, RunReport, DWELL_STEPS};
pub use scenario::{Category, Scenario, Suite, DEFAULT_HORIZON, SUITE_SCHEMA};
pub use suite::{
    generate_suite, run_suite, shipped_suite, DEFAULT_SEED, FAULT_TIME, LEVEL_JUMP_RANGE, TEMP_JUMP_RANGE,
};
