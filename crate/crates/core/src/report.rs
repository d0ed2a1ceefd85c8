use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Named scalars and pass flags produced by the verification harnesses.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub scalars: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn set(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.scalars.insert(key.into(), value);
        self
    }

    pub fn flag(&mut self, key: impl Into<String>, ok: bool) -> &mut Self {
        self.flags.insert(key.into(), ok);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.scalars.get(key).copied()
    }

    pub fn is(&self, key: &str) -> bool {
        self.flags.get(key).copied().unwrap_or(false)
    }

    /// All flags true.
    pub fn passed(&self) -> bool {
        self.flags.values().all(|&b| b)
    }
}

/// `a / b`, with `0/0 = 0` so that ratios over zero signals stay finite.
pub fn safe_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        0.0
    } else {
        a / b
    }
}
