//! Batch front end: reads JSON documents, runs one command, and returns a
//! report of named checks. The report is deterministic for a fixed
//! configuration and seed apart from the `timings_ms` field.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{de::DeserializeOwned, Serialize};
use serde_json::Value;

mod commands;
mod suites;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Darboux,
    Star,
    Quantize,
    Verify,
    Bundle,
    Orbit,
    Leaf,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Darboux => "darboux",
            Command::Star => "star",
            Command::Quantize => "quantize",
            Command::Verify => "verify",
            Command::Bundle => "bundle",
            Command::Orbit => "orbit",
            Command::Leaf => "leaf",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    /// Replaces the default bound of every check.
    pub tol: Option<f64>,
    /// Size `N` of the finite Weyl model (lattice of `2N` points per axis).
    pub lattice_n: Option<usize>,
    /// Points per axis when sampling generator documents.
    pub lattice_points: Option<usize>,
    pub box_length: Option<f64>,
    pub radius: f64,
    pub count: usize,
    pub include_parity: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            output: None,
            seed: 42,
            tol: None,
            lattice_n: None,
            lattice_points: None,
            box_length: None,
            radius: 1.0,
            count: 24,
            include_parity: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                bail!("`--tol` must be positive, got {t}");
            }
        }
        if self.lattice_n.is_some_and(|n| n < 2) {
            bail!("`--lattice-n` must be at least 2");
        }
        if self.lattice_points.is_some_and(|k| k < 2) {
            bail!("`--lattice-points` must be at least 2");
        }
        if let Some(l) = self.box_length {
            if !(l.is_finite() && l > 0.0) {
                bail!("`--box-length` must be positive, got {l}");
            }
        }
        for p in &self.inputs {
            if !p.is_file() {
                bail!("input file `{}` does not exist", p.display());
            }
        }
        Ok(())
    }

    pub(crate) fn model_n(&self) -> usize {
        self.lattice_n.unwrap_or(3)
    }

    pub(crate) fn bound(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub(crate) fn input(&self, i: usize, what: &str) -> Result<&Path> {
        self.inputs
            .get(i)
            .map(PathBuf::as_path)
            .with_context(|| format!("`{}` needs input {} ({what})", self.command.name(), i + 1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: Command,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    fn new(command: Command, seed: u64) -> Self {
        Self { command, seed, checks: Vec::new(), pass: true, result: None, timings_ms: BTreeMap::new() }
    }

    /// Records `value <= bound`.
    pub(crate) fn check(&mut self, name: &str, value: f64, bound: f64) {
        let pass = value <= bound;
        self.pass &= pass;
        self.checks.push(Check { name: name.to_string(), value, bound, pass });
    }

    pub(crate) fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings_ms.insert(stage.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    /// JSON without the timing field, for comparing runs.
    pub fn deterministic_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut v {
            map.remove("timings_ms");
        }
        v
    }
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {what} from `{}`", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("`{}` is not a valid {what} document", path.display()))
}

/// Runs the configured command. Invalid input is an error; failed checks are
/// reported with `pass = false`.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let mut report = Report::new(config.command, config.seed);
    match config.command {
        Command::Darboux => commands::darboux(config, &mut report)?,
        Command::Star => commands::star_cmd(config, &mut report)?,
        Command::Quantize => commands::quantize(config, &mut report)?,
        Command::Verify => suites::verify(config, &mut report)?,
        Command::Bundle => commands::bundle(config, &mut report)?,
        Command::Orbit => commands::orbit(config, &mut report)?,
        Command::Leaf => commands::leaf(config, &mut report)?,
    }
    Ok(report)
}

/// Writes the report to the configured output, or stdout.
pub fn emit(config: &RunConfig, report: &Report) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match &config.output {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing report to `{}`", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
