//! JSON interchange formats: state-set files and verification reports.
//!
//! Complex amplitudes are stored as `[re, im]` pairs; serde_json prints
//! binary64 values in shortest round-trip form, so write → read reproduces
//! amplitudes bit-exactly.

use crate::constructions::{ConstructError, FamilyTag, ProductState, StateLabel, StateSet};
use crate::linalg::{CVector, SystemDims, ToleranceConfig, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    BadSchema(u32),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

/// One serialized product state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRecord {
    pub label: StateLabel,
    /// Per-party amplitude lists, complex entries as [re, im].
    pub locals: Vec<Vec<[f64; 2]>>,
}

/// On-disk form of a [`StateSet`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSetFile {
    pub schema_version: u32,
    pub dims: Vec<usize>,
    pub family: FamilyTag,
    pub layer: usize,
    pub states: Vec<StateRecord>,
}

impl From<&StateSet> for StateSetFile {
    fn from(set: &StateSet) -> Self {
        let states = set
            .states
            .iter()
            .map(|s| StateRecord {
                label: s.label.clone(),
                locals: s
                    .locals
                    .iter()
                    .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                    .collect(),
            })
            .collect();
        StateSetFile {
            schema_version: SCHEMA_VERSION,
            dims: set.dims.dims().to_vec(),
            family: set.family,
            layer: set.layer_depth,
            states,
        }
    }
}

impl StateSetFile {
    pub fn into_state_set(self) -> Result<StateSet, IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(IoError::BadSchema(self.schema_version));
        }
        let dims = SystemDims::new(self.dims)?;
        let states = self
            .states
            .into_iter()
            .map(|r| {
                let locals: Vec<CVector> = r
                    .locals
                    .into_iter()
                    .map(|entries| {
                        CVector::from_iterator(
                            entries.len(),
                            entries.into_iter().map(|[re, im]| C64::new(re, im)),
                        )
                    })
                    .collect();
                ProductState::new(locals, r.label)
            })
            .collect();
        Ok(StateSet::new(dims, states, self.layer, self.family)?)
    }
}

pub fn write_state_set(path: &Path, set: &StateSet) -> Result<(), IoError> {
    let file = StateSetFile::from(set);
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn read_state_set(path: &Path) -> Result<StateSet, IoError> {
    let text = std::fs::read_to_string(path)?;
    let file: StateSetFile = serde_json::from_str(&text)?;
    file.into_state_set()
}

/// One named check with its verdict and measured quantities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Measured margins, dimensions, eigenvalues etc. backing the verdict.
    pub details: serde_json::Value,
}

/// Machine-readable run report. Every numeric verdict carries the measured
/// quantity; timings are the only non-deterministic fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub command: String,
    pub tolerances: ToleranceConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    pub checks: Vec<CheckResult>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl ReportFile {
    pub fn new(command: String, tolerances: ToleranceConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            tolerances,
            seed: None,
            restarts: None,
            checks: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Serialized content with timing fields blanked, for determinism
    /// comparisons.
    pub fn deterministic_content(&self) -> String {
        let mut clone = self.clone();
        clone.timings_ms.clear();
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }
}
