//! Run reports and their serialized forms. JSON output is byte-stable for a
//! fixed config, seed and tool version, apart from the wall-time field.

use serde::Serialize;

use biharm_core::residuals::ResidualReport;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub checks: Vec<ResidualReport>,
    pub overall_pass: bool,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn new(
        config: serde_json::Value,
        seed: u64,
        checks: Vec<ResidualReport>,
        wall_time_ms: f64,
    ) -> Self {
        let overall_pass = checks.iter().all(|r| r.pass);
        RunReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seed,
            checks,
            overall_pass,
            wall_time_ms,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

/// Serializes a report. CSV carries one row per check with the fixed header
/// `check,max_residual,tolerance,pass`.
pub fn emit(report: &RunReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).expect("report serialization");
            bytes.push(b'\n');
            bytes
        }
        Format::Csv => {
            let mut out = String::from("check,max_residual,tolerance,pass\n");
            for r in &report.checks {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.check, r.max_residual, r.tolerance, r.pass
                ));
            }
            out.into_bytes()
        }
    }
}
