//! Run manifests embedded in every report.

use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: &'static str,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    /// Only present with `--timing`, since it breaks byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: impl Serialize,
        seed: Option<u64>,
        inputs: Vec<String>,
    ) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool: "msepoly",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: serde_json::to_value(config).expect("config serializes"),
            seed,
            inputs,
            wall_time_ms: None,
        }
    }
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    pub report: &'a T,
}

pub fn to_json<T: Serialize>(manifest: &RunManifest, report: &T) -> String {
    let mut s =
        serde_json::to_string_pretty(&Envelope { manifest, report }).expect("report serializes");
    s.push('\n');
    s
}

/// CSV tables carry the manifest as a leading comment line.
pub fn to_csv(manifest: &RunManifest, table: &str) -> String {
    let m = serde_json::to_string(manifest).expect("manifest serializes");
    format!("# manifest: {m}\n{table}")
}
