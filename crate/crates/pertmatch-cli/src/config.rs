//! Serializable experiment configurations.
//!
//! Every CLI invocation first resolves its flags into an
//! [`ExperimentConfig`]; execution consumes only the config. The resolved
//! config is written next to the outputs so that
//! `pertmatch --config <file>` replays the exact run. Replay is
//! byte-identical as long as referenced input files (instances, tabulated
//! perturbation functions) are unchanged; outputs record content hashes so
//! drift is detectable.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pertmatch::algorithms::DEFAULT_STEP;

/// One fully-described experiment. The `subcommand` tag selects the action.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Generate(GenerateConfig),
    Simulate(SimulateConfig),
    VerifyBounds(VerifyBoundsConfig),
    Concentration(ConcentrationConfig),
}

impl ExperimentConfig {
    /// Hex SHA-256 of the compact JSON serialization; embedded in every
    /// output file so artifacts can be traced back to their configuration.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serialization cannot fail");
        let digest = Sha256::digest(compact.as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    pub fn to_pretty_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("config serialization cannot fail");
        text.push('\n');
        text
    }
}

/// Instance generation: which family, with which knobs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub source: FamilySpec,
    /// Output directory; `None` falls back to `$PERTMATCH_OUT`, then `.`.
    #[serde(default)]
    pub out: Option<String>,
    /// Base name for output files; defaults to the family tag.
    #[serde(default)]
    pub name: Option<String>,
}

/// Generator family and parameters. Tag values match the `family` strings
/// the library's generators record in their metadata.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// Layered staircase with a closed-form optimum (vertex-weighted).
    LayeredTriangle {
        alpha: f64,
        beta: f64,
        n: u32,
        m: u32,
        #[serde(default = "default_f")]
        f: String,
    },
    /// One unlimited spender plus unit-budget vertices over two arrival
    /// phases (budgeted, known budgets). An optional second knee `beta`
    /// switches phase-1 bids to the generalized min-of-two-ramps form.
    TwoPhaseSpender {
        alpha: f64,
        n: u32,
        #[serde(default)]
        beta: Option<f64>,
        #[serde(default = "default_f")]
        f: String,
    },
    /// Copy blow-up of an existing instance file; preserves the optimum.
    Duplicated { input: String, copies: u32 },
    /// Staircase matching instance, unit or per-vertex weights.
    UpperTriangle {
        n: u32,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    /// Unit staircase with unit budgets, in a budgeted mode.
    BudgetedTriangle { n: u32, mode: String },
    /// Seeded random block instance.
    Random {
        seed: u64,
        n_offline: u32,
        n_online: u32,
        mode: String,
    },
}

impl FamilySpec {
    /// The tag string, used as the default output base name.
    pub fn tag(&self) -> &'static str {
        match self {
            FamilySpec::LayeredTriangle { .. } => "layered-triangle",
            FamilySpec::TwoPhaseSpender { .. } => "two-phase-spender",
            FamilySpec::Duplicated { .. } => "duplicated",
            FamilySpec::UpperTriangle { .. } => "upper-triangle",
            FamilySpec::BudgetedTriangle { .. } => "budgeted-triangle",
            FamilySpec::Random { .. } => "random",
        }
    }
}

/// One algorithm run (or Monte Carlo estimate) on an instance file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateConfig {
    /// Path to the instance JSON. A `<stem>.meta.json` sidecar, when
    /// present, supplies the closed-form optimum and family tag.
    pub instance: String,
    /// Algorithm id: pr-integral, pb, pr-adwords, msvv or budget-additive.
    #[serde(rename = "algorithm")]
    pub algorithm: String,
    #[serde(default = "default_f")]
    pub f: String,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "one")]
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    /// `random` (seeded) or `grid` (deterministic uniform grid) — only
    /// meaningful for the randomized greedy algorithms.
    #[serde(default = "default_ranks")]
    pub ranks: String,
    /// Replace Monte Carlo over the unlimited spender's rank by a midpoint
    /// grid of this many points (two-phase spender instances only).
    #[serde(default)]
    pub y0_grid: Option<u32>,
    /// Denominator of the ratio: `auto`, `closed-form`, `exact`, or a
    /// numeric literal.
    #[serde(default = "default_opt")]
    pub opt: String,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    /// Results CSV to append to; defaults to `<out>/results.csv`.
    #[serde(default)]
    pub csv: Option<String>,
}

/// Numerical verification of the feasibility constraints and the
/// infeasibility certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyBoundsConfig {
    /// Scan the water-filling feasibility constraint over (α, β).
    #[serde(default)]
    pub eq1: bool,
    /// Measure how far `f` is from a scaled canonical function.
    #[serde(default)]
    pub uniqueness: bool,
    /// Ratio offset γ below the critical ratio: the target is
    /// Γ = 1 − 1/e − γ. Used by `--eq1` and by the certificate.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Certificate slack parameter; providing it requests the
    /// infeasibility certificate for Γ = 1 − 1/e − γ.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Perturbation function for `--eq1` / `--uniqueness`.
    #[serde(default)]
    pub f: Option<String>,
    #[serde(default = "default_grid")]
    pub grid: u32,
    /// Simpson subinterval budget for the certificate quadrature.
    #[serde(default = "default_resolution")]
    pub resolution: u32,
    #[serde(default = "default_uniqueness_tolerance")]
    pub uniqueness_tolerance: f64,
    /// Expected verdicts; the exit code is 0 iff every requested check
    /// matches its expectation.
    #[serde(default)]
    pub expect_violation: bool,
    #[serde(default = "default_true")]
    pub expect_infeasible: bool,
    #[serde(default = "default_true")]
    pub expect_canonical: bool,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
}

/// Order-statistics concentration experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub n: u32,
    pub eps: f64,
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
}

pub fn default_f() -> String {
    "canonical".to_string()
}
fn default_step() -> f64 {
    DEFAULT_STEP
}
fn one() -> u32 {
    1
}
fn default_ranks() -> String {
    "random".to_string()
}
fn default_opt() -> String {
    "auto".to_string()
}
fn default_grid() -> u32 {
    400
}
fn default_resolution() -> u32 {
    1000
}
fn default_uniqueness_tolerance() -> f64 {
    1e-6
}
fn default_true() -> bool {
    true
}
