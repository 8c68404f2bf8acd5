//! Hybrid automata: modes over binary inputs, per-mode continuous flows,
//! toggle events and component exchanges, plus explicit-Euler simulation.

mod tanks;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::IntervalSpec;
use crate::error::{Error, Result};

pub use tanks::{
    build_three_tank, build_three_tank_with, build_two_tank, build_two_tank_with, Component,
    ControlLoop, ModelParameters, SystemKind, TankSystem, ThreeTankParams, TwoTankParams,
    MODEL_PARAMETERS_VERSION,
};

/// Default integration step in seconds.
pub const DEFAULT_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// Clamped at zero after every step.
    Level,
    Temperature,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub id: String,
    pub unit: String,
    pub kind: StateKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// Member of B^H: an automaton input toggled by an event.
    Automaton,
    /// Member of B^EXT: true once the component has been swapped for a spare.
    Exchange,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputDecl {
    pub id: String,
    pub kind: InputKind,
}

/// Real values for every declared state, in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    ids: Arc<[String]>,
    values: Vec<f64>,
}

impl StateVector {
    pub fn new(ids: Arc<[String]>, values: Vec<f64>) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::Model(format!(
                "{} values for {} states",
                values.len(),
                ids.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("state `{}` is {}", ids[i], values[i])));
        }
        Ok(StateVector { ids, values })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.ids.iter().position(|s| s == id).map(|i| self.values[i])
    }

    pub fn set(&mut self, id: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Numeric(format!("state `{id}` set to {value}")));
        }
        let i = self
            .ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::Model(format!("undeclared state `{id}`")))?;
        self.values[i] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.ids.iter().map(String::as_str).zip(self.values.iter().copied())
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Truth values for every input of B = B^H ∪ B^EXT, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryAssignment {
    ids: Arc<[String]>,
    values: Vec<bool>,
}

impl BinaryAssignment {
    pub fn new(ids: Arc<[String]>, values: Vec<bool>) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::Model(format!(
                "{} values for {} inputs",
                values.len(),
                ids.len()
            )));
        }
        Ok(BinaryAssignment { ids, values })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, id: &str) -> Option<bool> {
        self.ids.iter().position(|s| s == id).map(|i| self.values[i])
    }

    pub fn set(&mut self, id: &str, value: bool) -> Result<()> {
        let i = self
            .ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::Model(format!("undeclared input `{id}`")))?;
        self.values[i] = value;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ids whose value differs from `other` (same declaration assumed).
    pub fn diff(&self, other: &BinaryAssignment) -> Vec<String> {
        self.ids
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .filter(|(_, (a, b))| a != b)
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn to_map(&self) -> BTreeMap<String, bool> {
        self.ids.iter().cloned().zip(self.values.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub states: StateVector,
    pub inputs: BinaryAssignment,
}

/// A mode is one combination of the automaton inputs B^H. The id is the bit
/// string in declaration order, so equal discrete values give equal ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mode {
    bits: Vec<bool>,
}

impl Mode {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Mode { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn id(&self) -> String {
        let mut s = String::with_capacity(self.bits.len() + 1);
        s.push('m');
        s.extend(self.bits.iter().map(|&b| if b { '1' } else { '0' }));
        s
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Toggle event on one automaton input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: String,
    pub target: String,
}

/// Deviations from nominal physics, layered on the flow function by the
/// fault-injection harness. The nominal automaton uses [`Disturbance::none`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Disturbance {
    /// Per automaton input: effective aperture regardless of the command.
    pub aperture_override: BTreeMap<String, f64>,
    /// Per state: additive derivative term (leaks negative, drifts either way).
    pub extra_rate: BTreeMap<String, f64>,
    /// Internal components that stopped working (heaters, coolers).
    pub disabled: Vec<String>,
}

impl Disturbance {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_disabled(&self, component: &str) -> bool {
        self.disabled.iter().any(|c| c == component)
    }
}

/// Continuous behaviour: derivative of every state given effective actuator
/// apertures (one per automaton input, 0 = closed/off, 1 = fully open).
pub trait Dynamics: Send + Sync + fmt::Debug {
    fn derivative(&self, apertures: &[f64], state: &[f64], disturbance: &Disturbance, out: &mut [f64]);
}

#[derive(Debug, Clone)]
pub struct HybridAutomaton {
    name: String,
    states: Vec<StateDecl>,
    state_ids: Arc<[String]>,
    inputs: Vec<InputDecl>,
    input_ids: Arc<[String]>,
    events: Vec<Event>,
    /// Exchange flag -> states owned by the exchanged component.
    exchange_states: BTreeMap<String, Vec<String>>,
    /// Aperture of an actuator that is commanded open/on.
    nominal_aperture: f64,
    dynamics: Arc<dyn Dynamics>,
}

impl HybridAutomaton {
    pub fn new(
        name: impl Into<String>,
        states: Vec<StateDecl>,
        inputs: Vec<InputDecl>,
        exchange_states: BTreeMap<String, Vec<String>>,
        nominal_aperture: f64,
        dynamics: Arc<dyn Dynamics>,
    ) -> Result<Self> {
        // automaton inputs first keeps mode bits a prefix of B
        if let Some(pos) = inputs.iter().position(|i| i.kind == InputKind::Exchange) {
            if inputs[pos..].iter().any(|i| i.kind == InputKind::Automaton) {
                return Err(Error::Model("automaton inputs must precede exchange flags".into()));
            }
        }
        for (flag, owned) in &exchange_states {
            if !inputs.iter().any(|i| &i.id == flag && i.kind == InputKind::Exchange) {
                return Err(Error::Model(format!("`{flag}` is not an exchange flag")));
            }
            for s in owned {
                if !states.iter().any(|d| &d.id == s) {
                    return Err(Error::Model(format!("`{flag}` maps undeclared state `{s}`")));
                }
            }
        }
        let events = inputs
            .iter()
            .filter(|i| i.kind == InputKind::Automaton)
            .map(|i| Event {
                id: format!("toggle_{}", i.id),
                target: i.id.clone(),
            })
            .collect();
        let state_ids: Arc<[String]> = states.iter().map(|s| s.id.clone()).collect();
        let input_ids: Arc<[String]> = inputs.iter().map(|i| i.id.clone()).collect();
        Ok(HybridAutomaton {
            name: name.into(),
            states,
            state_ids,
            inputs,
            input_ids,
            events,
            exchange_states,
            nominal_aperture,
            dynamics,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[StateDecl] {
        &self.states
    }

    pub fn state_ids(&self) -> Arc<[String]> {
        self.state_ids.clone()
    }

    pub fn inputs(&self) -> &[InputDecl] {
        &self.inputs
    }

    pub fn input_ids(&self) -> Arc<[String]> {
        self.input_ids.clone()
    }

    pub fn automaton_inputs(&self) -> impl Iterator<Item = &InputDecl> {
        self.inputs.iter().filter(|i| i.kind == InputKind::Automaton)
    }

    pub fn exchange_flags(&self) -> impl Iterator<Item = &InputDecl> {
        self.inputs.iter().filter(|i| i.kind == InputKind::Exchange)
    }

    pub fn num_automaton_inputs(&self) -> usize {
        self.automaton_inputs().count()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, id: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.id == id || e.target == id)
    }

    pub fn exchange_states(&self) -> &BTreeMap<String, Vec<String>> {
        &self.exchange_states
    }

    /// Every declared mode, in binary counting order.
    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        let n = self.num_automaton_inputs();
        (0u64..1 << n).map(move |code| Mode::from_bits((0..n).map(|i| code >> i & 1 == 1).collect()))
    }

    pub fn is_declared(&self, mode: &Mode) -> bool {
        mode.bits.len() == self.num_automaton_inputs()
    }

    fn check_mode(&self, mode: &Mode) -> Result<()> {
        if self.is_declared(mode) {
            Ok(())
        } else {
            Err(Error::Model(format!(
                "mode `{mode}` has {} bits, automaton has {} inputs",
                mode.bits.len(),
                self.num_automaton_inputs()
            )))
        }
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.ids() != &*self.state_ids {
            return Err(Error::Model("state vector belongs to a different automaton".into()));
        }
        Ok(())
    }

    pub fn state_vector(&self, values: Vec<f64>) -> Result<StateVector> {
        StateVector::new(self.state_ids.clone(), values)
    }

    pub fn binary_assignment(&self, values: Vec<bool>) -> Result<BinaryAssignment> {
        BinaryAssignment::new(self.input_ids.clone(), values)
    }

    /// Mode carried by the automaton-input part of `inputs`.
    pub fn mode_of(&self, inputs: &BinaryAssignment) -> Mode {
        Mode::from_bits(inputs.values()[..self.num_automaton_inputs()].to_vec())
    }

    /// Effective apertures for a mode under a disturbance.
    pub fn apertures(&self, mode: &Mode, disturbance: &Disturbance) -> Vec<f64> {
        self.automaton_inputs()
            .zip(&mode.bits)
            .map(|(input, &on)| {
                disturbance
                    .aperture_override
                    .get(&input.id)
                    .copied()
                    .unwrap_or(if on { self.nominal_aperture } else { 0.0 })
            })
            .collect()
    }

    /// Flow function of `mode`: time derivative of every state.
    pub fn flow(&self, mode: &Mode, state: &StateVector, disturbance: &Disturbance) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        self.check_state(state)?;
        let apertures = self.apertures(mode, disturbance);
        let mut out = vec![0.0; self.states.len()];
        self.dynamics
            .derivative(&apertures, state.values(), disturbance, &mut out);
        for (i, decl) in self.states.iter().enumerate() {
            if let Some(extra) = disturbance.extra_rate.get(&decl.id) {
                out[i] += extra;
            }
        }
        if let Some(i) = out.iter().position(|d| !d.is_finite()) {
            return Err(Error::Numeric(format!(
                "derivative of `{}` is {}",
                self.states[i].id, out[i]
            )));
        }
        Ok(out)
    }

    /// One explicit-Euler step of length `dt` in `mode`.
    pub fn step(&self, mode: &Mode, state: &StateVector, dt: f64) -> Result<StateVector> {
        self.step_disturbed(mode, state, dt, &Disturbance::none())
    }

    pub fn step_disturbed(
        &self,
        mode: &Mode,
        state: &StateVector,
        dt: f64,
        disturbance: &Disturbance,
    ) -> Result<StateVector> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Numeric(format!("step size {dt} must be positive")));
        }
        let derivative = self.flow(mode, state, disturbance)?;
        let values = state
            .values()
            .iter()
            .zip(&derivative)
            .zip(&self.states)
            .map(|((x, dx), decl)| {
                let next = x + dt * dx;
                match decl.kind {
                    StateKind::Level => next.max(0.0),
                    StateKind::Temperature => next,
                }
            })
            .collect();
        StateVector::new(self.state_ids.clone(), values)
    }

    /// Transition function for a toggle event: flips the event's input in the
    /// mode and passes the state through.
    pub fn apply_event(&self, event: &Event, mode: &Mode, state: &StateVector) -> Result<(Mode, StateVector)> {
        self.check_mode(mode)?;
        let idx = self
            .automaton_inputs()
            .position(|i| i.id == event.target)
            .filter(|_| self.events.contains(event))
            .ok_or_else(|| Error::Model(format!("undeclared event `{}`", event.id)))?;
        let mut bits = mode.bits.clone();
        bits[idx] = !bits[idx];
        Ok((Mode::from_bits(bits), state.clone()))
    }

    /// Swaps the component behind `flag` for a spare: the mode is unchanged and
    /// each owned state restarts at the midpoint of its ok interval.
    pub fn apply_exchange(
        &self,
        flag: &str,
        mode: &Mode,
        state: &StateVector,
        specs: &[IntervalSpec],
    ) -> Result<(Mode, StateVector)> {
        self.check_mode(mode)?;
        self.check_state(state)?;
        let owned = self
            .exchange_states
            .get(flag)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Model(format!("exchange flag `{flag}` has no mapped states")))?;
        let mut next = state.clone();
        for id in owned {
            let spec = specs
                .iter()
                .find(|s| &s.state == id)
                .ok_or_else(|| Error::Config(format!("no interval spec for `{id}`")))?;
            next.set(id, spec.midpoint())?;
        }
        Ok((mode.clone(), next))
    }
}

#[cfg(test)]
mod tests;
