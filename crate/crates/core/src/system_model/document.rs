//! TOML model documents.
//!
//! ```toml
//! schema = "satreconf-model/1"
//! system = "three-tank"
//! spares = 1
//!
//! [[constraint]]
//! guard = "low(x1)"
//! then = "!v12b | ext_T1"
//! why = "..."
//! ```

use serde::{Deserialize, Serialize};

use super::{ReconfConstraint, SystemModel};
use crate::error::{Error, Result};
use crate::hybrid_model::TankSystem;

pub const MODEL_SCHEMA: &str = "satreconf-model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDoc {
    pub guard: String,
    pub then: String,
    #[serde(default)]
    pub why: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema: String,
    pub system: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spares: Option<usize>,
    #[serde(default, rename = "constraint")]
    pub constraints: Vec<ConstraintDoc>,
}

impl ModelDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: ModelDocument = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if doc.schema != MODEL_SCHEMA {
            return Err(Error::Schema(format!(
                "model schema `{}` (expected `{MODEL_SCHEMA}`)",
                doc.schema
            )));
        }
        Ok(doc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("model document serializes")
    }

    pub fn build(&self, system: &TankSystem) -> Result<SystemModel> {
        if self.system != system.kind.as_str() {
            return Err(Error::Schema(format!(
                "model is for `{}`, plant is `{}`",
                self.system, system.kind
            )));
        }
        let mut sm = SystemModel::for_automaton(&system.automaton, &system.specs)?;
        for c in &self.constraints {
            sm.push(ReconfConstraint::parse(&c.guard, &c.then, c.why.clone())?)?;
        }
        if let Some(k) = self.spares {
            sm.limit_spares(k)?;
        }
        Ok(sm)
    }

    /// Document for the authored part of `sm`.
    pub fn from_model(sm: &SystemModel) -> Self {
        ModelDocument {
            schema: MODEL_SCHEMA.into(),
            system: sm.system().into(),
            spares: sm.spares(),
            constraints: sm
                .authored()
                .map(|c| ConstraintDoc {
                    guard: c.guard_text(),
                    then: c.consequence.to_string(),
                    why: c.rationale.clone(),
                })
                .collect(),
        }
    }
}
