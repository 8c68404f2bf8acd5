//! Fault specifications and their effect on a plant.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid_model::{Component, Disturbance, InputKind, StateKind, StateVector, TankSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultKind {
    /// Gradual change: permanently alters the flow function.
    Continuous,
    /// Abrupt change: one-time jump of a state.
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValvePosition {
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PumpPosition {
    Full,
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "kebab-case")]
pub enum FaultEffect {
    /// Extra outflow of `rate` cm/s from a tank.
    Leak { target: String, rate: f64 },
    ValveStuck { target: String, position: ValvePosition },
    PumpStuck { target: String, position: PumpPosition },
    /// Heater or cooler inside the tank stops working.
    ThermalFailure { target: String },
    /// Additive temperature rate in °C/s (negative = loss).
    TempDrift { target: String, rate: f64 },
    /// Level multiplied by `1 + percent / 100`.
    LevelJump { target: String, percent: f64 },
    /// Temperature multiplied by `1 + percent / 100`.
    TempJump { target: String, percent: f64 },
}

impl FaultEffect {
    pub fn kind(&self) -> FaultKind {
        match self {
            FaultEffect::LevelJump { .. } | FaultEffect::TempJump { .. } => FaultKind::Discrete,
            _ => FaultKind::Continuous,
        }
    }

    pub fn target(&self) -> &str {
        match self {
            FaultEffect::Leak { target, .. }
            | FaultEffect::ValveStuck { target, .. }
            | FaultEffect::PumpStuck { target, .. }
            | FaultEffect::ThermalFailure { target }
            | FaultEffect::TempDrift { target, .. }
            | FaultEffect::LevelJump { target, .. }
            | FaultEffect::TempJump { target, .. } => target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub kind: FaultKind,
    /// Injection time, seconds.
    pub at: f64,
    #[serde(flatten)]
    pub effect: FaultEffect,
}

impl FaultSpec {
    pub fn new(at: f64, effect: FaultEffect) -> Self {
        FaultSpec {
            kind: effect.kind(),
            at,
            effect,
        }
    }
}

impl fmt::Display for FaultSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.effect {
            FaultEffect::Leak { target, rate } => write!(f, "leak({target}, {rate} cm/s)"),
            FaultEffect::ValveStuck { target, position } => write!(f, "valve-stuck({target}, {position:?})"),
            FaultEffect::PumpStuck { target, position } => write!(f, "pump-stuck({target}, {position:?})"),
            FaultEffect::ThermalFailure { target } => write!(f, "thermal-failure({target})"),
            FaultEffect::TempDrift { target, rate } => write!(f, "temp-drift({target}, {rate} °C/s)"),
            FaultEffect::LevelJump { target, percent } => write!(f, "level-jump({target}, {percent:+}%)"),
            FaultEffect::TempJump { target, percent } => write!(f, "temp-jump({target}, {percent:+}%)"),
        }?;
        write!(f, " at {}s", self.at)
    }
}

pub(crate) fn tank<'s>(system: &'s TankSystem, name: &str) -> Result<&'s Component> {
    system
        .component(name)
        .ok_or_else(|| Error::Scenario(format!("`{name}` is not a tank of {}", system.kind)))
}

/// The state of `kind` owned by tank `name`.
pub(crate) fn tank_state(system: &TankSystem, name: &str, kind: StateKind) -> Result<String> {
    let c = tank(system, name)?;
    c.states
        .iter()
        .find(|s| system.automaton.states().iter().any(|d| &d.id == *s && d.kind == kind))
        .cloned()
        .ok_or_else(|| Error::Scenario(format!("tank `{name}` has no {kind:?} state")))
}

fn actuator_prefixed(system: &TankSystem, id: &str, prefix: char) -> Result<()> {
    let ok = system
        .automaton
        .inputs()
        .iter()
        .any(|i| i.id == id && i.kind == InputKind::Automaton && id.starts_with(prefix));
    if ok {
        Ok(())
    } else {
        Err(Error::Scenario(format!("`{id}` is not a {} of {}", if prefix == 'v' { "valve" } else { "pump" }, system.kind)))
    }
}

/// Checks that every component the fault names exists and values are finite.
pub fn validate_fault(system: &TankSystem, f: &FaultSpec) -> Result<()> {
    if f.kind != f.effect.kind() {
        return Err(Error::Scenario(format!("{f} declared as {:?}", f.kind)));
    }
    if !(f.at.is_finite() && f.at >= 0.0) {
        return Err(Error::Scenario(format!("{f}: injection time must be >= 0")));
    }
    match &f.effect {
        FaultEffect::Leak { target, rate } => {
            tank_state(system, target, StateKind::Level)?;
            if !(rate.is_finite() && *rate > 0.0) {
                return Err(Error::Scenario(format!("{f}: leak rate must be positive")));
            }
        }
        FaultEffect::ValveStuck { target, .. } => actuator_prefixed(system, target, 'v')?,
        FaultEffect::PumpStuck { target, .. } => actuator_prefixed(system, target, 'p')?,
        FaultEffect::ThermalFailure { target } => {
            if tank(system, target)?.internals.is_empty() {
                return Err(Error::Scenario(format!("tank `{target}` has no heater or cooler")));
            }
        }
        FaultEffect::TempDrift { target, rate } => {
            tank_state(system, target, StateKind::Temperature)?;
            if !rate.is_finite() {
                return Err(Error::Scenario(format!("{f}: drift rate must be finite")));
            }
        }
        FaultEffect::LevelJump { target, percent } => {
            tank_state(system, target, StateKind::Level)?;
            if !(percent.is_finite() && *percent > -100.0) {
                return Err(Error::Scenario(format!("{f}: jump must be above -100%")));
            }
        }
        FaultEffect::TempJump { target, percent } => {
            tank_state(system, target, StateKind::Temperature)?;
            if !(percent.is_finite() && *percent > -100.0) {
                return Err(Error::Scenario(format!("{f}: jump must be above -100%")));
            }
        }
    }
    Ok(())
}

/// Disturbance produced by a set of active continuous faults.
pub fn disturbance_of(system: &TankSystem, faults: &[FaultSpec]) -> Result<Disturbance> {
    let mut d = Disturbance::none();
    for f in faults {
        match &f.effect {
            FaultEffect::Leak { target, rate } => {
                *d.extra_rate.entry(tank_state(system, target, StateKind::Level)?).or_default() -= rate;
            }
            FaultEffect::TempDrift { target, rate } => {
                *d.extra_rate
                    .entry(tank_state(system, target, StateKind::Temperature)?)
                    .or_default() += rate;
            }
            FaultEffect::ValveStuck { target, position } => {
                let a = match position {
                    ValvePosition::Open => 1.0,
                    ValvePosition::Closed => 0.0,
                };
                d.aperture_override.insert(target.clone(), a);
            }
            FaultEffect::PumpStuck { target, position } => {
                let a = match position {
                    PumpPosition::Full => 1.0,
                    PumpPosition::Blocked => 0.0,
                };
                d.aperture_override.insert(target.clone(), a);
            }
            FaultEffect::ThermalFailure { target } => {
                d.disabled.extend(tank(system, target)?.internals.iter().cloned());
            }
            FaultEffect::LevelJump { .. } | FaultEffect::TempJump { .. } => {}
        }
    }
    Ok(d)
}

/// Applies a discrete fault's jump to `state`; continuous faults are a no-op.
pub fn apply_jump(system: &TankSystem, f: &FaultSpec, state: &mut StateVector) -> Result<()> {
    let (id, percent) = match &f.effect {
        FaultEffect::LevelJump { target, percent } => (tank_state(system, target, StateKind::Level)?, *percent),
        FaultEffect::TempJump { target, percent } => {
            (tank_state(system, target, StateKind::Temperature)?, *percent)
        }
        _ => return Ok(()),
    };
    let v = state.get(&id).expect("tank state is declared");
    state.set(&id, v * (1.0 + percent / 100.0))
}

/// Whether swapping `component` removes the fault.
pub fn cleared_by(f: &FaultSpec, component: &Component) -> bool {
    component.owns(f.effect.target())
}
