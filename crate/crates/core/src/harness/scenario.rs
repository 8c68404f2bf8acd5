//! Scenarios and suite documents.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::fault::{validate_fault, FaultKind, FaultSpec};
use crate::error::{Error, Result};
use crate::hybrid_model::{SystemKind, TankSystem, DEFAULT_DT};

pub const SUITE_SCHEMA: &str = "satreconf-suite/1";
pub const DEFAULT_HORIZON: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Continuous,
    Discrete,
    MultipleContinuous,
    MultipleContinuousDiscrete,
    MultipleDiscrete,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Continuous,
        Category::Discrete,
        Category::MultipleContinuous,
        Category::MultipleContinuousDiscrete,
        Category::MultipleDiscrete,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Continuous => "continuous",
            Category::Discrete => "discrete",
            Category::MultipleContinuous => "multiple continuous",
            Category::MultipleContinuousDiscrete => "multiple continuous + discrete",
            Category::MultipleDiscrete => "multiple discrete",
        }
    }

    /// Fault kinds a scenario of this category carries, sorted.
    pub fn kinds(self) -> &'static [FaultKind] {
        match self {
            Category::Continuous => &[FaultKind::Continuous],
            Category::Discrete => &[FaultKind::Discrete],
            Category::MultipleContinuous => &[FaultKind::Continuous, FaultKind::Continuous],
            Category::MultipleContinuousDiscrete => &[FaultKind::Continuous, FaultKind::Discrete],
            Category::MultipleDiscrete => &[FaultKind::Discrete, FaultKind::Discrete],
        }
    }

    pub fn is_single(self) -> bool {
        self.kinds().len() == 1
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub category: Category,
    /// Row label within the category, e.g. "leak in one tank".
    pub row: String,
    #[serde(rename = "fault", default)]
    pub faults: Vec<FaultSpec>,
}

impl Scenario {
    /// Category/fault-kind consistency plus per-fault component checks.
    /// A scenario without faults is a nominal run and always valid.
    pub fn validate(&self, system: &TankSystem) -> Result<()> {
        for f in &self.faults {
            validate_fault(system, f)
                .map_err(|e| Error::Scenario(format!("scenario `{}`: {e}", self.id)))?;
        }
        if self.faults.is_empty() {
            return Ok(());
        }
        let mut kinds: Vec<FaultKind> = self.faults.iter().map(|f| f.kind).collect();
        kinds.sort_by_key(|k| *k as u8);
        if kinds != self.category.kinds() {
            return Err(Error::Scenario(format!(
                "scenario `{}`: faults {:?} do not fit category `{}`",
                self.id, kinds, self.category
            )));
        }
        Ok(())
    }
}

/// A suite document: one system, shared horizon and step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub schema: String,
    pub system: SystemKind,
    /// Seed the magnitudes were drawn with.
    pub seed: u64,
    pub horizon: f64,
    pub dt: f64,
    #[serde(rename = "scenario", default)]
    pub scenarios: Vec<Scenario>,
}

impl Suite {
    pub fn new(system: SystemKind, seed: u64) -> Self {
        Suite {
            schema: SUITE_SCHEMA.into(),
            system,
            seed,
            horizon: DEFAULT_HORIZON,
            dt: DEFAULT_DT,
            scenarios: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let suite: Suite = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if suite.schema != SUITE_SCHEMA {
            return Err(Error::Schema(format!(
                "suite schema `{}` (expected `{SUITE_SCHEMA}`)",
                suite.schema
            )));
        }
        if !(suite.dt > 0.0 && suite.dt.is_finite()) || !(suite.horizon > 0.0 && suite.horizon.is_finite()) {
            return Err(Error::Schema("dt and horizon must be positive".into()));
        }
        Ok(suite)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("suite serializes")
    }

    pub fn validate(&self, system: &TankSystem) -> Result<()> {
        if system.kind != self.system {
            return Err(Error::Scenario(format!(
                "suite is for {}, plant is {}",
                self.system, system.kind
            )));
        }
        let mut ids = std::collections::BTreeSet::new();
        for s in &self.scenarios {
            if !ids.insert(&s.id) {
                return Err(Error::Scenario(format!("duplicate scenario id `{}`", s.id)));
            }
            s.validate(system)?;
        }
        Ok(())
    }

    pub fn scenario(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id == id)
    }
}
