//! Two-Tank and Three-Tank process plants.
//!
//! Flow laws are linear: a valve conducts `coeff * aperture * head` where head
//! is the level difference above the valve height, a pump moves
//! `rate * aperture` while its source tank is not empty, tank cross-section is
//! 1 so levels and volumes share units. Temperatures follow ideal mixing with
//! heater/cooler power spread over the tank volume.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    BinaryAssignment, Disturbance, Dynamics, HybridAutomaton, InputDecl, InputKind, StateDecl,
    StateKind, StateVector,
};
use crate::discretization::IntervalSpec;
use crate::error::{Error, Result};

pub const MODEL_PARAMETERS_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    TwoTank,
    ThreeTank,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::TwoTank => "two-tank",
            SystemKind::ThreeTank => "three-tank",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-tank" => Ok(SystemKind::TwoTank),
            "three-tank" => Ok(SystemKind::ThreeTank),
            other => Err(Error::Schema(format!("unknown system `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeTankParams {
    /// Fully open valve conductance, 1/s.
    pub valve_coeff: f64,
    /// Full-power pump rate, cm/s.
    pub pump_rate: f64,
    /// Conductance of the always-open consumer outlet at the bottom of T2, 1/s.
    pub outlet_coeff: f64,
    /// Height of v12a / v23a, cm.
    pub upper_valve_height: f64,
    /// Height of v12b / v23b, cm.
    pub lower_valve_height: f64,
    /// Aperture of an actuator commanded open/on (stuck faults use 0 or 1).
    pub nominal_aperture: f64,
    pub level_band: [f64; 2],
}

impl Default for ThreeTankParams {
    fn default() -> Self {
        ThreeTankParams {
            valve_coeff: 0.2,
            pump_rate: 2.0,
            outlet_coeff: 0.03,
            upper_valve_height: 30.0,
            lower_valve_height: 0.0,
            nominal_aperture: 0.5,
            level_band: [10.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoTankParams {
    /// Fully open supply valve flow, cm/s.
    pub inflow_rate: f64,
    /// Fully open product valve conductance, 1/s.
    pub outflow_coeff: f64,
    /// Full-power transfer pump rate, cm/s.
    pub pump_rate: f64,
    /// Supply water temperature, °C.
    pub supply_temp: f64,
    /// Heater in T1, °C·cm/s.
    pub heater_power: f64,
    /// Cooler in T2, °C·cm/s.
    pub cooler_power: f64,
    /// Floor on the mixing volume so near-empty tanks stay finite, cm.
    pub min_mixing_level: f64,
    pub nominal_aperture: f64,
    pub level_band: [f64; 2],
    pub hot_band: [f64; 2],
    pub cold_band: [f64; 2],
}

impl Default for TwoTankParams {
    fn default() -> Self {
        TwoTankParams {
            inflow_rate: 2.0,
            outflow_coeff: 0.04,
            pump_rate: 2.0,
            supply_temp: 30.0,
            heater_power: 28.0,
            cooler_power: 10.5,
            min_mixing_level: 1.0,
            nominal_aperture: 0.5,
            level_band: [30.0, 40.0],
            hot_band: [65.0, 75.0],
            cold_band: [10.0, 20.0],
        }
    }
}

/// Versioned parameter record shipped with the builders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParameters {
    pub version: u32,
    pub two_tank: TwoTankParams,
    pub three_tank: ThreeTankParams,
}

impl Default for ModelParameters {
    fn default() -> Self {
        ModelParameters {
            version: MODEL_PARAMETERS_VERSION,
            two_tank: TwoTankParams::default(),
            three_tank: ThreeTankParams::default(),
        }
    }
}

impl ModelParameters {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("parameter record serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: ModelParameters = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if p.version != MODEL_PARAMETERS_VERSION {
            return Err(Error::Schema(format!(
                "parameter record version {} (expected {MODEL_PARAMETERS_VERSION})",
                p.version
            )));
        }
        Ok(p)
    }
}

/// A physical component that can be swapped for the spare.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub exchange_flag: String,
    pub states: Vec<String>,
    /// Internal parts replaced along with the component (heater, cooler).
    pub internals: Vec<String>,
    /// Valves and pumps mounted on the component and replaced with it.
    pub actuators: Vec<String>,
}

impl Component {
    pub fn owns(&self, part: &str) -> bool {
        self.name == part || self.internals.iter().any(|p| p == part) || self.actuators.iter().any(|p| p == part)
    }
}

/// Bang-bang loop of the nominal program: `input` is on while `state` sits
/// below the midpoint of its ok interval and off above it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlLoop {
    pub state: String,
    pub input: String,
}

/// A built plant: automaton, ok intervals, components and nominal program.
#[derive(Debug, Clone)]
pub struct TankSystem {
    pub kind: SystemKind,
    pub automaton: HybridAutomaton,
    pub specs: Vec<IntervalSpec>,
    pub components: Vec<Component>,
    pub loops: Vec<ControlLoop>,
    /// Commanded inputs at t = 0; exchange flags all false.
    pub initial_inputs: BinaryAssignment,
}

impl TankSystem {
    /// Exchange flag -> owned states.
    pub fn component_states(&self) -> &BTreeMap<String, Vec<String>> {
        self.automaton.exchange_states()
    }

    /// Every state at the midpoint of its interval.
    pub fn initial_state(&self) -> StateVector {
        let values = self
            .automaton
            .states()
            .iter()
            .map(|d| {
                self.specs
                    .iter()
                    .find(|s| s.state == d.id)
                    .map(IntervalSpec::midpoint)
                    .expect("builder declares a spec per state")
            })
            .collect();
        self.automaton.state_vector(values).expect("midpoints are finite")
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn component_of_flag(&self, flag: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.exchange_flag == flag)
    }
}

fn state(id: &str, unit: &str, kind: StateKind) -> StateDecl {
    StateDecl {
        id: id.into(),
        unit: unit.into(),
        kind,
    }
}

fn input(id: &str, kind: InputKind) -> InputDecl {
    InputDecl { id: id.into(), kind }
}

fn spec(id: &str, band: [f64; 2]) -> Result<IntervalSpec> {
    IntervalSpec::new(id, band[0], band[1])
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

#[derive(Debug)]
struct ThreeTankDynamics {
    p: ThreeTankParams,
}

// input order: p1 p2 v12a v12b v23a v23b; state order: x1 x2 x3
impl Dynamics for ThreeTankDynamics {
    fn derivative(&self, a: &[f64], x: &[f64], _d: &Disturbance, out: &mut [f64]) {
        let p = &self.p;
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        let hu = p.upper_valve_height;
        let hl = p.lower_valve_height;
        let head = |from: f64, to: f64, h: f64| pos(from - h) - pos(to - h);
        let q12 = p.valve_coeff * (a[2] * head(x1, x2, hu) + a[3] * head(x1, x2, hl));
        let q32 = p.valve_coeff * (a[4] * head(x3, x2, hu) + a[5] * head(x3, x2, hl));
        let pump1 = p.pump_rate * a[0];
        let pump2 = p.pump_rate * a[1];
        let outlet = p.outlet_coeff * pos(x2);
        out[0] = pump1 - q12;
        out[1] = q12 + q32 - outlet;
        out[2] = pump2 - q32;
    }
}

#[derive(Debug)]
struct TwoTankDynamics {
    p: TwoTankParams,
}

// input order: v01 v10 v02 v20 p12 p21; state order: level1 temp1 level2 temp2
impl Dynamics for TwoTankDynamics {
    fn derivative(&self, a: &[f64], x: &[f64], d: &Disturbance, out: &mut [f64]) {
        let p = &self.p;
        let (l1, t1, l2, t2) = (x[0], x[1], x[2], x[3]);
        let in1 = p.inflow_rate * a[0];
        let out1 = p.outflow_coeff * a[1] * pos(l1);
        let in2 = p.inflow_rate * a[2];
        let out2 = p.outflow_coeff * a[3] * pos(l2);
        let p12 = if l1 > 0.0 { p.pump_rate * a[4] } else { 0.0 };
        let p21 = if l2 > 0.0 { p.pump_rate * a[5] } else { 0.0 };
        let heat = if d.is_disabled("heater1") { 0.0 } else { p.heater_power };
        let cool = if d.is_disabled("cooler2") { 0.0 } else { p.cooler_power };
        let v1 = l1.max(p.min_mixing_level);
        let v2 = l2.max(p.min_mixing_level);
        out[0] = in1 - out1 - p12 + p21;
        out[1] = (in1 * (p.supply_temp - t1) + p21 * (t2 - t1) + heat) / v1;
        out[2] = in2 - out2 + p12 - p21;
        out[3] = (in2 * (p.supply_temp - t2) + p12 * (t1 - t2) - cool) / v2;
    }
}

pub fn build_three_tank() -> TankSystem {
    build_three_tank_with(&ThreeTankParams::default()).expect("default parameters are valid")
}

pub fn build_three_tank_with(params: &ThreeTankParams) -> Result<TankSystem> {
    let states = vec![
        state("x1", "cm", StateKind::Level),
        state("x2", "cm", StateKind::Level),
        state("x3", "cm", StateKind::Level),
    ];
    let inputs = ["p1", "p2", "v12a", "v12b", "v23a", "v23b"]
        .iter()
        .map(|id| input(id, InputKind::Automaton))
        .chain(["ext_T1", "ext_T2", "ext_T3"].iter().map(|id| input(id, InputKind::Exchange)))
        .collect();
    let actuators = [vec!["p1", "v12a", "v12b"], vec![], vec!["p2", "v23a", "v23b"]];
    let components: Vec<Component> = (1..=3)
        .zip(actuators)
        .map(|(i, parts)| Component {
            name: format!("T{i}"),
            exchange_flag: format!("ext_T{i}"),
            states: vec![format!("x{i}")],
            internals: Vec::new(),
            actuators: parts.into_iter().map(String::from).collect(),
        })
        .collect();
    let exchange_states = components
        .iter()
        .map(|c| (c.exchange_flag.clone(), c.states.clone()))
        .collect();
    let automaton = HybridAutomaton::new(
        "three-tank",
        states,
        inputs,
        exchange_states,
        params.nominal_aperture,
        Arc::new(ThreeTankDynamics { p: params.clone() }),
    )?;
    let specs = vec![
        spec("x1", params.level_band)?,
        spec("x2", params.level_band)?,
        spec("x3", params.level_band)?,
    ];
    let loops = vec![
        ControlLoop { state: "x1".into(), input: "p1".into() },
        ControlLoop { state: "x3".into(), input: "p2".into() },
    ];
    // pumps on, lower valves open, upper (overflow) valves closed
    let initial_inputs = automaton.binary_assignment(vec![
        true, true, false, true, false, true, false, false, false,
    ])?;
    Ok(TankSystem {
        kind: SystemKind::ThreeTank,
        automaton,
        specs,
        components,
        loops,
        initial_inputs,
    })
}

pub fn build_two_tank() -> TankSystem {
    build_two_tank_with(&TwoTankParams::default()).expect("default parameters are valid")
}

pub fn build_two_tank_with(params: &TwoTankParams) -> Result<TankSystem> {
    let states = vec![
        state("level1", "cm", StateKind::Level),
        state("temp1", "°C", StateKind::Temperature),
        state("level2", "cm", StateKind::Level),
        state("temp2", "°C", StateKind::Temperature),
    ];
    let inputs = ["v01", "v10", "v02", "v20", "p12", "p21"]
        .iter()
        .map(|id| input(id, InputKind::Automaton))
        .chain(["ext_T1", "ext_T2"].iter().map(|id| input(id, InputKind::Exchange)))
        .collect();
    let components = vec![
        Component {
            name: "T1".into(),
            exchange_flag: "ext_T1".into(),
            states: vec!["level1".into(), "temp1".into()],
            internals: vec!["heater1".into()],
            actuators: ["v01", "v10", "p21"].map(String::from).to_vec(),
        },
        Component {
            name: "T2".into(),
            exchange_flag: "ext_T2".into(),
            states: vec!["level2".into(), "temp2".into()],
            internals: vec!["cooler2".into()],
            actuators: ["v02", "v20", "p12"].map(String::from).to_vec(),
        },
    ];
    let exchange_states = components
        .iter()
        .map(|c| (c.exchange_flag.clone(), c.states.clone()))
        .collect();
    let automaton = HybridAutomaton::new(
        "two-tank",
        states,
        inputs,
        exchange_states,
        params.nominal_aperture,
        Arc::new(TwoTankDynamics { p: params.clone() }),
    )?;
    let specs = vec![
        spec("level1", params.level_band)?,
        spec("temp1", params.hot_band)?,
        spec("level2", params.level_band)?,
        spec("temp2", params.cold_band)?,
    ];
    let loops = vec![
        ControlLoop { state: "level1".into(), input: "v01".into() },
        ControlLoop { state: "level2".into(), input: "v02".into() },
    ];
    // supply valves under control, product valves open, transfer pumps off
    let initial_inputs = automaton.binary_assignment(vec![
        true, true, true, true, false, false, false, false,
    ])?;
    Ok(TankSystem {
        kind: SystemKind::TwoTank,
        automaton,
        specs,
        components,
        loops,
        initial_inputs,
    })
}
