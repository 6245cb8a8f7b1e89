//! t-DCF coefficient sets loaded from TOML.
//!
//! ```toml
//! [coefficients.LA.progress]
//! c0 = 0.1588
//! c1 = 2.1007
//! c2 = 0.8412
//! ```
//!
//! Tables may sit at the top level of a larger file (the service config
//! uses the same layout). Missing entries fall back to the built-in sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::metrics::{MetricsError, TdcfCoefficients};
use crate::trialdata::{Phase, Task};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSets {
    #[serde(default)]
    pub coefficients: BTreeMap<Task, BTreeMap<Phase, CoefficientEntry>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CoeffsConfigError {
    #[error("cannot parse coefficient config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{task}/{phase}: {source}")]
    Invalid {
        task: Task,
        phase: Phase,
        source: MetricsError,
    },
}

impl CoefficientSets {
    pub fn from_toml(text: &str) -> Result<Self, CoeffsConfigError> {
        let sets: Self = toml::from_str(text)?;
        for (&task, phases) in &sets.coefficients {
            for &phase in phases.keys() {
                sets.get(task, phase)
                    .expect("entry exists")
                    .validate()
                    .map_err(|source| CoeffsConfigError::Invalid {
                        task,
                        phase,
                        source,
                    })?;
            }
        }
        Ok(sets)
    }

    /// Configured set for `(task, phase)`, else the built-in default.
    pub fn get(&self, task: Task, phase: Phase) -> Option<TdcfCoefficients> {
        self.coefficients
            .get(&task)
            .and_then(|m| m.get(&phase))
            .map(|e| TdcfCoefficients {
                c0: e.c0,
                c1: e.c1,
                c2: e.c2,
                task: Some(task),
                phase: Some(phase),
            })
            .or_else(|| TdcfCoefficients::default_for(task, phase))
    }
}
