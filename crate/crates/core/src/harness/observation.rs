//! One-shot reconfiguration requests read from a document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::discretization::{discretize, Qual, QualitativeObservation};
use crate::error::{Error, Result};
use crate::hybrid_model::{BinaryAssignment, SystemKind, TankSystem};

pub const OBSERVATION_SCHEMA: &str = "satreconf-observation/1";

/// Either qualitative values or real state values (discretized on load),
/// plus the observed inputs. Inputs left out keep their nominal initial value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationDocument {
    pub schema: String,
    pub system: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualitative: Option<BTreeMap<String, Qual>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub inputs: BTreeMap<String, bool>,
}

impl ObservationDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: ObservationDocument = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if doc.schema != OBSERVATION_SCHEMA {
            return Err(Error::Schema(format!(
                "observation schema `{}` (expected `{OBSERVATION_SCHEMA}`)",
                doc.schema
            )));
        }
        if doc.qualitative.is_some() == doc.states.is_some() {
            return Err(Error::Schema("give exactly one of [qualitative] or [states]".into()));
        }
        Ok(doc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("observation serializes")
    }

    /// Observation over every state of `system`, in declaration order.
    pub fn observation(&self, system: &TankSystem) -> Result<QualitativeObservation> {
        self.check_system(system)?;
        let ids: Vec<&str> = system.automaton.states().iter().map(|d| d.id.as_str()).collect();
        let known = |k: &String| -> Result<()> {
            if ids.contains(&k.as_str()) {
                Ok(())
            } else {
                Err(Error::Schema(format!("`{k}` is not a state of {}", system.kind)))
            }
        };
        if let Some(q) = &self.qualitative {
            q.keys().try_for_each(known)?;
            let pairs = ids
                .iter()
                .map(|id| {
                    q.get(*id)
                        .map(|v| (id.to_string(), *v))
                        .ok_or_else(|| Error::Schema(format!("no value for state `{id}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(QualitativeObservation::from_pairs(pairs));
        }
        let x = self.states.as_ref().expect("checked on parse");
        x.keys().try_for_each(known)?;
        let values = ids
            .iter()
            .map(|id| x.get(*id).copied().ok_or_else(|| Error::Schema(format!("no value for state `{id}`"))))
            .collect::<Result<Vec<_>>>()?;
        discretize(&system.automaton.state_vector(values)?, &system.specs)
    }

    pub fn inputs(&self, system: &TankSystem) -> Result<BinaryAssignment> {
        self.check_system(system)?;
        let mut b = system.initial_inputs.clone();
        for (id, v) in &self.inputs {
            b.set(id, *v)
                .map_err(|_| Error::Schema(format!("`{id}` is not an input of {}", system.kind)))?;
        }
        Ok(b)
    }

    fn check_system(&self, system: &TankSystem) -> Result<()> {
        if self.system != system.kind {
            return Err(Error::Schema(format!(
                "observation is for {}, plant is {}",
                self.system, system.kind
            )));
        }
        Ok(())
    }
}
