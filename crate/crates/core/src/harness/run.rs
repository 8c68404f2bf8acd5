//! Closed-loop execution of one scenario.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::fault::{apply_jump, cleared_by, disturbance_of, FaultKind, FaultSpec};
use super::scenario::{Category, Scenario};
use crate::discretization::{discretize, QualitativeObservation};
use crate::engine::{sat_reconf_with, EngineOptions, ReconfProblem, ReconfResult};
use crate::error::{Error, Result};
use crate::hybrid_model::{BinaryAssignment, Configuration, Disturbance, InputKind, Mode, StateVector, TankSystem};
use crate::system_model::{SystemModel, Validity};

/// Consecutive all-ok steps required at the end of a run.
pub const DWELL_STEPS: usize = 10;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dt: f64,
    pub horizon: f64,
    pub dwell_steps: usize,
    /// Spare components available per run.
    pub spares: usize,
    pub engine: EngineOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dt: crate::hybrid_model::DEFAULT_DT,
            horizon: super::scenario::DEFAULT_HORIZON,
            dwell_steps: DWELL_STEPS,
            spares: 1,
            engine: EngineOptions::default(),
        }
    }
}

/// Mutable state of one run: plant state, commanded inputs, faults.
#[derive(Debug, Clone)]
pub struct RunContext<'s> {
    pub system: &'s TankSystem,
    pub time: f64,
    pub state: StateVector,
    /// Commanded values for all of B (exchange flags included).
    pub inputs: BinaryAssignment,
    /// Inputs pinned by a reconfiguration; the controller leaves them alone.
    pub fixed: BTreeSet<String>,
    /// Continuous faults currently acting on the plant.
    pub active: Vec<FaultSpec>,
    pub exchanges: usize,
    disturbance: Disturbance,
}

impl<'s> RunContext<'s> {
    pub fn new(system: &'s TankSystem) -> Self {
        RunContext {
            system,
            time: 0.0,
            state: system.initial_state(),
            inputs: system.initial_inputs.clone(),
            fixed: BTreeSet::new(),
            active: Vec::new(),
            exchanges: 0,
            disturbance: Disturbance::none(),
        }
    }

    pub fn disturbance(&self) -> &Disturbance {
        &self.disturbance
    }

    pub fn mode(&self) -> Mode {
        self.system.automaton.mode_of(&self.inputs)
    }

    fn refresh(&mut self) -> Result<()> {
        self.disturbance = disturbance_of(self.system, &self.active)?;
        Ok(())
    }

    /// Bang-bang program on every loop whose input is not pinned.
    pub fn control(&mut self) -> Result<()> {
        for l in &self.system.loops {
            if self.fixed.contains(&l.input) {
                continue;
            }
            let spec = self
                .system
                .specs
                .iter()
                .find(|s| s.state == l.state)
                .ok_or_else(|| Error::Config(format!("no interval for `{}`", l.state)))?;
            let x = self.state.get(&l.state).expect("loop state is declared");
            self.inputs.set(&l.input, x < spec.midpoint())?;
        }
        Ok(())
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        let mode = self.mode();
        self.state = self
            .system
            .automaton
            .step_disturbed(&mode, &self.state, dt, &self.disturbance)?;
        self.time += dt;
        Ok(())
    }
}

/// Continuous faults join the active set; discrete faults jump the state once.
pub fn inject_fault(ctx: &mut RunContext, f: &FaultSpec) -> Result<()> {
    super::fault::validate_fault(ctx.system, f)?;
    match f.kind {
        FaultKind::Continuous => {
            ctx.active.push(f.clone());
            ctx.refresh()
        }
        FaultKind::Discrete => apply_jump(ctx.system, f, &mut ctx.state),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunOutcome {
    NotDetected,
    Reconfigured { flips: Vec<String>, bound: usize },
    NoReconfigurationExists,
    /// The engine's answer could not be carried out, e.g. more exchanges than spares.
    Rejected { flips: Vec<String>, reason: String },
}

impl RunOutcome {
    pub fn label(&self) -> String {
        match self {
            RunOutcome::NotDetected => "not detected".into(),
            RunOutcome::Reconfigured { flips, .. } if flips.is_empty() => "no change".into(),
            RunOutcome::Reconfigured { flips, .. } => flips.join("+"),
            RunOutcome::NoReconfigurationExists => "no reconfiguration exists".into(),
            RunOutcome::Rejected { reason, .. } => format!("rejected: {reason}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub system: String,
    pub category: Category,
    pub row: String,
    pub detected_at: Option<f64>,
    /// Qualitative observation at detection.
    pub observation: Option<String>,
    pub outcome: RunOutcome,
    #[serde(skip)]
    pub reconf: Option<ReconfResult>,
    /// The problem handed to the engine, kept for offline re-checking.
    #[serde(skip)]
    pub problem: Option<(QualitativeObservation, BinaryAssignment)>,
    pub recovered: bool,
    /// Start of the final all-ok stretch, when recovered.
    pub ok_since: Option<f64>,
    pub steps: usize,
    pub final_state: BTreeMap<String, f64>,
}

/// Simulate → detect the first non-ok observation → reconfigure once →
/// resume. Recovered iff the last `dwell_steps` observations are all ok and
/// no reconfiguration failed.
pub fn run_scenario(system: &TankSystem, sm: &SystemModel, s: &Scenario, cfg: &RunConfig) -> Result<RunReport> {
    s.validate(system)?;
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(cfg.dt) || !positive(cfg.horizon) {
        return Err(Error::Config("dt and horizon must be positive".into()));
    }
    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let mut ctx = RunContext::new(system);
    let mut pending: Vec<&FaultSpec> = s.faults.iter().collect();
    pending.sort_by(|a, b| a.at.total_cmp(&b.at));
    let mut pending = pending.into_iter().peekable();

    let mut detected_at = None;
    let mut observation = None;
    let mut outcome = RunOutcome::NotDetected;
    let mut reconf = None;
    let mut problem_seen = None;
    let mut ok_streak = 0usize;
    let mut ok_since = None;

    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        while let Some(f) = pending.next_if(|f| f.at <= t + 1e-9) {
            inject_fault(&mut ctx, f)?;
        }
        let q = discretize(&ctx.state, &system.specs)?;
        if detected_at.is_none() && !q.is_all_ok() {
            // inputs stay as commanded at this instant
            detected_at = Some(t);
            observation = Some(q.to_string());
            let problem = ReconfProblem::new(sm, q.clone(), ctx.inputs.clone())?;
            let result = sat_reconf_with(&problem, &cfg.engine, None)?;
            outcome = apply(&mut ctx, sm, &problem, &result, cfg)?;
            reconf = Some(result);
            problem_seen = Some((problem.observation, problem.observed));
        }
        ctx.control()?;
        ctx.step(cfg.dt)?;
        if discretize(&ctx.state, &system.specs)?.is_all_ok() {
            if ok_streak == 0 {
                ok_since = Some(ctx.time);
            }
            ok_streak += 1;
        } else {
            ok_streak = 0;
            ok_since = None;
        }
    }

    let failed = matches!(
        outcome,
        RunOutcome::NoReconfigurationExists | RunOutcome::Rejected { .. }
    );
    let recovered = !failed && ok_streak >= cfg.dwell_steps;
    Ok(RunReport {
        scenario: s.id.clone(),
        system: system.kind.to_string(),
        category: s.category,
        row: s.row.clone(),
        detected_at,
        observation,
        outcome,
        reconf,
        problem: problem_seen,
        recovered,
        ok_since: if recovered { ok_since } else { None },
        steps,
        final_state: ctx.state.to_map(),
    })
}

/// Carries out a reconfiguration: toggles through events, exchanges through
/// the exchange transition (which also removes faults on the swapped module).
fn apply(
    ctx: &mut RunContext,
    sm: &SystemModel,
    problem: &ReconfProblem,
    result: &ReconfResult,
    cfg: &RunConfig,
) -> Result<RunOutcome> {
    let r = match result {
        ReconfResult::NoReconfigurationExists => return Ok(RunOutcome::NoReconfigurationExists),
        ReconfResult::Success(r) => r,
    };
    let automaton = &ctx.system.automaton;
    let is_flag = |id: &str| automaton.inputs().iter().any(|i| i.id == id && i.kind == InputKind::Exchange);
    let mut new_exchanges = 0;
    for id in &r.flips {
        if is_flag(id) {
            if !r.inputs.get(id).unwrap_or(false) {
                return Ok(RunOutcome::Rejected {
                    flips: r.flips.clone(),
                    reason: format!("cannot undo exchange `{id}`"),
                });
            }
            new_exchanges += 1;
        }
    }
    if ctx.exchanges + new_exchanges > cfg.spares {
        return Ok(RunOutcome::Rejected {
            flips: r.flips.clone(),
            reason: format!("{} exchange(s) requested, {} spare(s)", new_exchanges, cfg.spares),
        });
    }

    let mut mode = ctx.mode();
    let mut state = ctx.state.clone();
    for id in &r.flips {
        if is_flag(id) {
            let (m, x) = automaton.apply_exchange(id, &mode, &state, &ctx.system.specs)?;
            mode = m;
            state = x;
            let component = ctx
                .system
                .component_of_flag(id)
                .ok_or_else(|| Error::Model(format!("no component behind `{id}`")))?;
            ctx.active.retain(|f| !cleared_by(f, component));
            ctx.exchanges += 1;
        } else {
            let event = automaton
                .event(id)
                .ok_or_else(|| Error::Model(format!("no event toggles `{id}`")))?
                .clone();
            let (m, x) = automaton.apply_event(&event, &mode, &state)?;
            mode = m;
            state = x;
        }
        ctx.fixed.insert(id.clone());
    }
    ctx.refresh()?;
    ctx.inputs = r.inputs.clone();
    debug_assert_eq!(automaton.mode_of(&ctx.inputs), mode);
    ctx.state = state;

    let config = Configuration {
        states: ctx.state.clone(),
        inputs: ctx.inputs.clone(),
    };
    if sm.check_validity(&config, &problem.observation)? != Validity::Valid {
        return Err(Error::Contract("reconfigured configuration is not valid".into()));
    }
    Ok(RunOutcome::Reconfigured {
        flips: r.flips.clone(),
        bound: r.bound,
    })
}
