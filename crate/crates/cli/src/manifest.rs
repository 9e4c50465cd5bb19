use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{SecondsFormat, Utc};
use serde::Serialize;

/// Provenance record written beside every artifact as
/// `<artifact>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub flags: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub started_at: String,
    pub finished_at: String,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(subcommand: &'static str, flags: &impl Serialize, seeds: Vec<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            flags: serde_json::to_value(flags).unwrap_or(serde_json::Value::Null),
            seeds,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_at: now(),
            finished_at: String::new(),
        }
    }

    /// Stamps the finish time and writes one manifest per output.
    pub fn finish(self, inputs: &[&Path], outputs: &[&Path]) -> anyhow::Result<()> {
        self.finish_beside(inputs, outputs, outputs)
    }

    /// Like [`finish`](Self::finish) but with the manifests placed beside
    /// `anchors`, e.g. an output directory, instead of each output.
    pub fn finish_beside(
        mut self,
        inputs: &[&Path],
        outputs: &[&Path],
        anchors: &[&Path],
    ) -> anyhow::Result<()> {
        self.inputs = inputs.iter().map(|p| p.to_path_buf()).collect();
        self.outputs = outputs.iter().map(|p| p.to_path_buf()).collect();
        self.finished_at = now();
        let text = serde_json::to_string_pretty(&self)?;
        for anchor in anchors {
            let trimmed = anchor.components().as_path();
            let mut name = trimmed.as_os_str().to_owned();
            name.push(".manifest.json");
            fs::write(&name, &text)
                .with_context(|| format!("writing {}", Path::new(&name).display()))?;
        }
        Ok(())
    }
}
