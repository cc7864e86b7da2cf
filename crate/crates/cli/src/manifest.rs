use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

/// Provenance record embedded in every file the CLI writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub tool_version: String,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, seed: u64) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            timestamp,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timings: BTreeMap::new(),
        }
    }

    /// Runs `f`, recording its wall time under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(phase.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    /// Single-line form used in CSV headers.
    pub fn to_comment_line(&self) -> String {
        format!("{MANIFEST_PREFIX}{}", serde_json::to_string(self).expect("manifest serializes"))
    }
}

pub(crate) const MANIFEST_PREFIX: &str = "# manifest ";
