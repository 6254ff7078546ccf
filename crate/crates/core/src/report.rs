//! Serializable result containers with stable JSON and CSV encodings.
//!
//! Reports are pure values: identical inputs produce byte-identical
//! serializations, which the CLI relies on for its determinism guarantee.

use serde::{Deserialize, Serialize};

/// Version tag embedded in every serialized report.
pub const SCHEMA_VERSION: u32 = 1;

/// Serde adapter for `f64` fields that may legitimately be infinite
/// (spacings and gaps): infinities round-trip as the strings
/// `"inf"` / `"-inf"`, finite values as plain numbers.
pub mod maybe_infinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            ser.serialize_f64(*value)
        } else if *value > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Number(v) => Ok(v),
            Raw::Text(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Text(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "expected a number, \"inf\" or \"-inf\", got {s:?}"
            ))),
        }
    }
}

/// Point estimates over a parameter grid with 95% confidence intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    /// Name of the estimated quantity, e.g. `wegner_expected_count`.
    pub quantity: String,
    /// Run metadata (geometry, density, seed layout, command parameters).
    pub params: serde_json::Value,
    /// Grid of interval widths, deltas or energies.
    pub grid: Vec<f64>,
    pub estimate: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// Fitted log-log slope over the grid, when meaningful.
    pub slope: Option<f64>,
    pub n_trials: u64,
    pub seed: u64,
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One grid point per row; metadata as `#` comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema_version={}\n", self.schema_version));
        out.push_str(&format!("# quantity={}\n", self.quantity));
        out.push_str(&format!(
            "# params={}\n",
            serde_json::to_string(&self.params).expect("params serialize")
        ));
        out.push_str(&format!("# n_trials={} seed={}\n", self.n_trials, self.seed));
        if let Some(s) = self.slope {
            out.push_str(&format!("# slope={s:.16e}\n"));
        }
        out.push_str("grid,estimate,ci_low,ci_high\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.grid[i], self.estimate[i], self.ci_low[i], self.ci_high[i]
            ));
        }
        out
    }
}
