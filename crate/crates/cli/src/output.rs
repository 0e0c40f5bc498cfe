use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Real number for CSV output: 17 significant digits, enough to round-trip.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Builds CSV text row by row. Every row ends with `\n`.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: impl IntoIterator<Item = S>) -> Self {
        let mut table = Self {
            text: String::new(),
        };
        table.row(header);
        table
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: impl IntoIterator<Item = S>) {
        for (i, cell) in cells.into_iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(cell.as_ref());
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Wall-clock seconds per named phase, in the order they ran.
#[derive(Debug, Default)]
pub struct Timer {
    phases: Vec<(String, f64)>,
}

impl Timer {
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases
            .push((phase.to_owned(), start.elapsed().as_secs_f64()));
        out
    }

    fn into_map(self) -> BTreeMap<String, f64> {
        self.phases.into_iter().collect()
    }
}

/// Record written as `manifest.json` next to every set of outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Every parameter after defaults were applied, kernel included, so a
    /// run can be repeated from the manifest alone.
    pub inputs: serde_json::Value,
    /// File names relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub version: String,
    /// Seconds per phase.
    pub timing: BTreeMap<String, f64>,
    /// Subcommand-specific summary of what was computed.
    pub results: serde_json::Value,
}

/// Collects files for one output directory and writes the manifest last.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)
            .with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_owned(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, contents)
            .with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(name.to_owned());
        Ok(())
    }

    pub fn finish(
        mut self,
        subcommand: &str,
        inputs: serde_json::Value,
        timer: Timer,
        results: serde_json::Value,
    ) -> Result<Vec<PathBuf>> {
        let mut outputs = self.written.clone();
        outputs.push("manifest.json".to_owned());
        let manifest = RunManifest {
            subcommand: subcommand.to_owned(),
            inputs,
            outputs: outputs.clone(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            timing: timer.into_map(),
            results,
        };
        self.write("manifest.json", &to_json(&manifest)?)?;
        Ok(outputs.iter().map(|n| self.root.join(n)).collect())
    }
}

/// Prints the report in the requested format.
pub fn emit<T: Serialize>(format: Format, report: &T, csv: impl FnOnce() -> String) -> Result<()> {
    let text = match format {
        Format::Json => to_json(report)?,
        Format::Csv => csv(),
    };
    print!("{text}");
    Ok(())
}

/// `key,value` rows for scalar summaries.
pub fn key_values<'a>(pairs: impl IntoIterator<Item = (&'a str, String)>) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}
