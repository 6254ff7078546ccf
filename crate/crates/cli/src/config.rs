//! Run configuration: everything a command needs, serializable so a run can
//! be reproduced from its config alone.

use anderson_core::error::{Error, Result};
use anderson_core::estimators::EnsembleParams;
use anderson_core::lattice::LatticeGeometry;
use anderson_core::operator::BoundaryCondition;
use anderson_core::randomness::Density;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub command: String,
    pub d: usize,
    pub l: usize,
    pub r: usize,
    #[serde(default = "default_bc")]
    pub bc: String,
    #[serde(default = "default_density")]
    pub density: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,

    // command-specific parameters
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub check_analytic: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dump_matrix: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub calibrate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,

    #[serde(default = "default_out_dir")]
    pub out_dir: String,

    /// Worker-thread hint. Execution-only: it never changes numeric results,
    /// so it is not written back into output files.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}
fn default_bc() -> String {
    "simple".into()
}
fn default_density() -> String {
    "uniform".into()
}
fn default_trials() -> usize {
    1000
}
fn default_out_dir() -> String {
    ".".into()
}

impl RunConfig {
    pub fn geometry(&self) -> Result<LatticeGeometry> {
        LatticeGeometry::new(self.d, self.l, self.r)
    }

    pub fn boundary_condition(&self) -> Result<BoundaryCondition> {
        match self.bc.as_str() {
            "simple" => Ok(BoundaryCondition::Simple),
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            _ => Err(Error::OutOfDomain {
                what: "boundary condition",
                range: "simple|dirichlet|neumann",
                value: f64::NAN,
            }),
        }
    }

    pub fn density_kind(&self) -> Result<Density> {
        if self.density == "uniform" {
            return Ok(Density::Uniform);
        }
        if let Some(rest) = self.density.strip_prefix("linear:") {
            let slope: f64 = rest.parse().map_err(|_| Error::OutOfDomain {
                what: "tilt slope",
                range: "(-1, 1)",
                value: f64::NAN,
            })?;
            return Density::linear_tilt(slope);
        }
        Err(Error::OutOfDomain {
            what: "density",
            range: "uniform|linear:<slope>",
            value: f64::NAN,
        })
    }

    pub fn ensemble(&self) -> Result<EnsembleParams> {
        Ok(EnsembleParams {
            geometry: self.geometry()?,
            density: self.density_kind()?,
            bc: self.boundary_condition()?,
            trials: self.trials,
            master_seed: self.seed,
        })
    }
}
