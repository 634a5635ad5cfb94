//! Output assembly: provenance headers and file writing.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::Scenario;
use crate::error::CliError;
use crate::commands::Body;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(CliError::Config(format!("--format must be csv, json or svg (got `{s}`)"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

/// Provenance of one run.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub version: &'static str,
    pub scenario_sha256: String,
    pub subcommand: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(scenario: &Scenario) -> Self {
        let digest = Sha256::digest(scenario.canonical_text().as_bytes());
        Self {
            version: VERSION,
            scenario_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            subcommand: scenario.subcommand.clone(),
            seed: scenario.seed,
        }
    }

    fn lines(&self) -> String {
        format!(
            "eqlab {} {}\nscenario sha256 {}\nseed {}",
            self.version, self.subcommand, self.scenario_sha256, self.seed
        )
    }
}

/// Renders a subcommand body with its provenance header.
pub fn render(body: &Body, prov: &Provenance) -> String {
    match body {
        Body::Csv(csv) => {
            let mut out: String = prov.lines().lines().map(|l| format!("# {l}\n")).collect();
            out.push_str(csv);
            out
        }
        Body::Json(report) => {
            let doc = json!({
                "provenance": {
                    "tool": "eqlab",
                    "version": prov.version,
                    "subcommand": prov.subcommand,
                    "scenario_sha256": prov.scenario_sha256,
                    "seed": prov.seed,
                },
                "report": report,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("JSON values are finite");
            s.push('\n');
            s
        }
        Body::Svg(plot) => plot.render(&prov.lines()),
    }
}

/// Writes `<out>/<subcommand>.<ext>` and returns its path.
pub fn write(out_dir: &Path, subcommand: &str, format: Format, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{subcommand}.{}", format.extension()));
    std::fs::write(&path, text)?;
    Ok(path)
}

/// JSON number that stays valid for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
