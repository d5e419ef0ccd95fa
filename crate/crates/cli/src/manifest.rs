use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::io::LoadedGraph;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run. Contains no timestamps or host
/// details, so identical manifests give byte-identical outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub rng_seed: Option<u64>,
    pub parameters: BTreeMap<String, Value>,
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(command: &str, rng_seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng_seed,
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.parameters.insert(key.to_string(), v);
        self
    }

    pub fn input(mut self, g: &LoadedGraph) -> Self {
        self.inputs.push(InputDigest {
            path: g.path.display().to_string(),
            sha256: g.sha256.clone(),
        });
        self
    }
}
