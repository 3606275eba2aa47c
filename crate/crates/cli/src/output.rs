//! CSV and manifest writers. CSV files never carry timestamps, so reruns with
//! the same arguments produce identical bytes; the manifest holds the time.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use daqsim_core::experiments::{format_float, MetricsRecord, CSV_SCHEMA_VERSION};
use daqsim_core::problem::{save_problem, GENERATOR_VERSION};
use daqsim_core::{Schedule, SpinProblem};
use serde::Serialize;
use serde_json::Value;

/// Collects the files written into one output directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator,
        I::Item: IntoIterator,
        <I::Item as IntoIterator>::Item: AsRef<[u8]>,
    {
        let path = self.root.join(name);
        let mut w =
            csv::Writer::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()
            .with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn metrics(&mut self, name: &str, records: &[MetricsRecord]) -> Result<()> {
        self.csv(
            name,
            &MetricsRecord::HEADER,
            records.iter().map(|r| r.fields()),
        )
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(self, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = self.written;
        let path = self.root.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct ScheduleInfo {
    #[serde(rename = "T")]
    pub total_time: f64,
    #[serde(rename = "M")]
    pub steps: usize,
    pub sampling: &'static str,
    pub b_x_init: f64,
}

impl From<&Schedule> for ScheduleInfo {
    fn from(s: &Schedule) -> Self {
        ScheduleInfo {
            total_time: s.total_time,
            steps: s.steps,
            sampling: s.sampling.as_str(),
            b_x_init: s.b_x_init,
        }
    }
}

/// Everything needed to rerun a command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub csv_schema_version: u32,
    pub generator_version: &'static str,
    pub command: String,
    pub arguments: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    /// Full problem document, so the run does not depend on the input file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_base: Option<u64>,
    pub settings: BTreeMap<String, Value>,
    pub outputs: Vec<String>,
    pub created_unix_seconds: u64,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        RunManifest {
            tool: "daqsim",
            version: env!("CARGO_PKG_VERSION"),
            csv_schema_version: CSV_SCHEMA_VERSION,
            generator_version: GENERATOR_VERSION,
            command: command.to_string(),
            arguments: argv.iter().skip(1).cloned().collect(),
            preset: None,
            instance: None,
            problem: None,
            schedule: None,
            seed_base: None,
            settings: BTreeMap::new(),
            outputs: Vec::new(),
            created_unix_seconds: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn with_problem(mut self, id: &str, p: &SpinProblem) -> Result<Self> {
        self.instance = Some(id.to_string());
        self.problem = Some(serde_json::from_str(&save_problem(p, None)?)?);
        Ok(self)
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.settings.insert(
            key.to_string(),
            serde_json::to_value(value).expect("settings are plain data"),
        );
    }
}

pub fn f(x: f64) -> String {
    format_float(x)
}

/// Basis label with qubit 0 as the leftmost character.
pub fn bitstring(index: usize, n: usize) -> String {
    (0..n)
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}
