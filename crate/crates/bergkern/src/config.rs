//! Experiment configuration: one JSON document per run, with top-level keys
//! `kind`, `seed`, `params`.  Defaults are materialized so the echoed config
//! in the report is complete.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Profile,
    HessianCheck,
    Rho,
    Dist,
    Moments,
    Kernel,
    BoundFit,
    Spectrum,
    Coercivity,
    Equivalence,
    Discreteness,
    Oscillation,
    Muckenhoupt,
    ClassifyCube,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Kind::Profile => "profile",
            Kind::HessianCheck => "hessian-check",
            Kind::Rho => "rho",
            Kind::Dist => "dist",
            Kind::Moments => "moments",
            Kind::Kernel => "kernel",
            Kind::BoundFit => "bound-fit",
            Kind::Spectrum => "spectrum",
            Kind::Coercivity => "coercivity",
            Kind::Equivalence => "equivalence",
            Kind::Discreteness => "discreteness",
            Kind::Oscillation => "oscillation",
            Kind::Muckenhoupt => "muckenhoupt",
            Kind::ClassifyCube => "classify-cube",
        };
        f.write_str(s)
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Invalid {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_str_checked(&text, &path.display().to_string())
    }

    pub fn from_str_checked(text: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Invalid {
                path: path.to_string(),
                message: e.to_string(),
            })?;
        Ok(cfg)
    }
}

fn default_cutoff() -> u32 {
    12
}
fn default_tol() -> f64 {
    1e-9
}
fn default_count() -> usize {
    20
}
fn default_order() -> usize {
    16
}
fn default_box_half() -> f64 {
    1.8
}
fn default_h() -> f64 {
    0.1
}
fn default_family() -> usize {
    64
}
fn default_k() -> usize {
    4
}
fn default_max_modulus() -> f64 {
    1.3
}
fn default_depth() -> usize {
    12
}
fn default_delta() -> f64 {
    0.1
}
fn default_cfrac() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    0.9
}
fn default_beta() -> f64 {
    0.02
}

/// Exponent set as a list of [α, β] pairs.
pub type GammaSpec = Vec<[u32; 2]>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParams {
    pub gamma: GammaSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HessianCheckParams {
    pub gamma: GammaSpec,
    #[serde(default = "default_count")]
    pub samples: usize,
    /// Log-spaced homogeneous scale bound for the region samples.
    #[serde(default = "default_scale")]
    pub scale_max: f64,
}
fn default_scale() -> f64 {
    1e3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoParams {
    /// "model-laplacian" needs `gamma`; "harmonic" is V = x² on a line.
    pub potential: String,
    #[serde(default)]
    pub gamma: Option<GammaSpec>,
    pub box_min: Vec<f64>,
    pub box_max: Vec<f64>,
    #[serde(default = "default_h")]
    pub h: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistParams {
    /// "max1x" (ρ = max(1,x) on a line) or "const" (ρ ≡ 1).
    pub rho: String,
    pub box_min: Vec<f64>,
    pub box_max: Vec<f64>,
    #[serde(default = "default_h")]
    pub h: f64,
    pub targets: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsParams {
    pub gamma: GammaSpec,
    #[serde(default = "default_cutoff")]
    pub cutoff: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    pub gamma: GammaSpec,
    #[serde(default = "default_cutoff")]
    pub cutoff: u32,
    #[serde(default = "default_count")]
    pub pair_count: usize,
    #[serde(default = "default_max_modulus")]
    pub max_modulus: f64,
    #[serde(default = "default_tol")]
    pub tail_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundFitParams {
    pub gamma: GammaSpec,
    #[serde(default = "default_bf_cutoff")]
    pub cutoff: u32,
    #[serde(default = "default_bf_pairs")]
    pub pair_count: usize,
    #[serde(default = "default_max_modulus")]
    pub max_modulus: f64,
    #[serde(default = "default_grid_h")]
    pub grid_h: f64,
    #[serde(default = "default_tol")]
    pub tail_tol: f64,
}
fn default_bf_cutoff() -> u32 {
    80
}
fn default_bf_pairs() -> usize {
    40
}
fn default_grid_h() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    /// "laplace-1d", "harmonic-1d" or "landau-n1".
    pub problem: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub box_half: Option<f64>,
    #[serde(default)]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoercivityParams {
    pub gamma: GammaSpec,
    #[serde(default = "default_family")]
    pub family: usize,
    #[serde(default = "default_box_half")]
    pub box_half: f64,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Also run the doubled family and report stability.
    #[serde(default)]
    pub check_doubling: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceParams {
    /// "n1-quadratic" for φ = |z|² on ℂ, otherwise `gamma` on ℂ².
    #[serde(default)]
    pub gamma: Option<GammaSpec>,
    #[serde(default = "default_count")]
    pub forms: usize,
    #[serde(default = "default_box_half")]
    pub box_half: f64,
    #[serde(default = "default_eq_order")]
    pub order: usize,
}
fn default_eq_order() -> usize {
    20
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretenessParams {
    /// "v0" or "x2-identity".
    pub potential: String,
    /// Side length as (numerator, denominator).
    #[serde(default = "default_side")]
    pub side: (i64, i64),
    /// Centers as rationals (numerator, denominator) per coordinate.
    pub centers: Vec<Vec<(i64, i64)>>,
}
fn default_side() -> (i64, i64) {
    (1, 1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationParams {
    /// Number of randomized partitions (m ≤ 3) checked against the oracle.
    #[serde(default = "default_count")]
    pub random_partitions: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuckenhouptParams {
    /// "w0", "identity" or "scalar-quadratic".
    pub potential: String,
    pub cubes: Vec<(f64, f64)>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_cfrac")]
    pub c: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyCubeParams {
    /// "x2-identity", "v0" or "diag12".
    pub potential: String,
    pub cube: (f64, f64),
    #[serde(default = "default_depth")]
    pub max_depth: usize,
}
