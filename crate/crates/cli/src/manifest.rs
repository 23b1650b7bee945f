use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;

use crate::{Command, Outcome};

/// Provenance record written next to the outputs. Timestamps live here only,
/// so the data files themselves are reproducible byte for byte.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: String,
    pub parameters: serde_json::Value,
    pub prec: usize,
    pub jobs: usize,
    pub inputs: &'a [PathBuf],
    pub outputs: &'a [PathBuf],
    pub tool_version: &'static str,
    pub wall_time_seconds: f64,
    pub finished_unix: u64,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write(command: &Command, prec: usize, jobs: usize, outcome: &Outcome, wall: Duration) -> anyhow::Result<()> {
    let Some(first) = outcome.outputs.first() else {
        return Ok(());
    };
    let path = outcome.manifest.clone().unwrap_or_else(|| manifest_path(first));
    let value = serde_json::to_value(command)?;
    let (name, parameters) = match value {
        serde_json::Value::Object(mut m) if m.len() == 1 => m.iter_mut().next().map(|(k, v)| (k.clone(), v.take())).unwrap(),
        other => (String::from("unknown"), other),
    };
    let manifest = RunManifest {
        command: name,
        parameters,
        prec,
        jobs,
        inputs: &outcome.inputs,
        outputs: &outcome.outputs,
        tool_version: strongcoupling::lattice::GENERATOR_VERSION,
        wall_time_seconds: wall.as_secs_f64(),
        finished_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
