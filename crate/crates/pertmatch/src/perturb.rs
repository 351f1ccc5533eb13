//! Perturbation functions: non-increasing, right-continuous maps from [0, 1]
//! to [0, 1] used to discount an offline vertex's attractiveness as it fills.
//!
//! Three kinds are supported:
//!
//! * **canonical** — `M * (1 - e^(x-1))` for a positive scale `M` with
//!   `M * (1 - 1/e) <= 1`,
//! * **linear** — `1 - x`,
//! * **tabulated** — piecewise linear between breakpoints, where a repeated
//!   x-coordinate encodes a downward jump (the later entry is the right
//!   limit, and evaluation at the jump point returns the later value).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current on-disk format version for perturbation function files.
pub const PERTURBATION_FORMAT_VERSION: u32 = 1;

/// A validated perturbation function.
///
/// Values are constructed through [`PerturbationFunction::canonical`],
/// [`PerturbationFunction::linear`] or
/// [`PerturbationFunction::from_breakpoints`], all of which enforce
/// admissibility (non-increasing, right-continuous, range within [0, 1]).
#[derive(Clone, Debug, PartialEq)]
pub enum PerturbationFunction {
    /// `x ↦ scale * (1 - e^(x-1))`.
    Canonical { scale: f64 },
    /// `x ↦ 1 - x`.
    Linear,
    /// Piecewise linear between `(x, y)` breakpoints; duplicated
    /// x-coordinates encode jump discontinuities.
    Tabulated { breakpoints: Vec<(f64, f64)> },
}

impl PerturbationFunction {
    /// The canonical exponential shape with scale 1.
    pub fn canonical_unit() -> Self {
        PerturbationFunction::Canonical { scale: 1.0 }
    }

    /// `x ↦ scale * (1 - e^(x-1))`. Requires `scale > 0` and
    /// `scale * (1 - 1/e) <= 1` so the range stays within [0, 1].
    pub fn canonical(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!(
                "canonical scale must be positive and finite, got {scale}"
            )));
        }
        let max_value = scale * (1.0 - (-1.0f64).exp());
        if max_value > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "canonical scale {scale} pushes f(0) = {max_value} above 1"
            )));
        }
        Ok(PerturbationFunction::Canonical { scale })
    }

    /// `x ↦ 1 - x`.
    pub fn linear() -> Self {
        PerturbationFunction::Linear
    }

    /// Builds a tabulated function and checks admissibility: breakpoints must
    /// start at x = 0, end at x = 1, have non-decreasing x and non-increasing
    /// y, and keep every value inside [0, 1].
    pub fn from_breakpoints(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Domain(
                "tabulated function needs at least two breakpoints".into(),
            ));
        }
        for &(x, y) in &breakpoints {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Domain("breakpoints must be finite".into()));
            }
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!("breakpoint x = {x} outside [0, 1]")));
            }
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::Domain(format!("breakpoint value {y} outside [0, 1]")));
            }
        }
        if breakpoints[0].0 != 0.0 {
            return Err(Error::Domain("first breakpoint must sit at x = 0".into()));
        }
        if breakpoints[breakpoints.len() - 1].0 != 1.0 {
            return Err(Error::Domain("last breakpoint must sit at x = 1".into()));
        }
        for w in breakpoints.windows(2) {
            if w[1].0 < w[0].0 {
                return Err(Error::Domain(format!(
                    "breakpoint x-coordinates must be non-decreasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
            if w[1].1 > w[0].1 + 1e-15 {
                return Err(Error::Domain(format!(
                    "breakpoint values must be non-increasing ({} then {})",
                    w[0].1, w[1].1
                )));
            }
        }
        Ok(PerturbationFunction::Tabulated { breakpoints })
    }

    /// Short human-readable descriptor used in reports and CSV rows.
    pub fn descriptor(&self) -> String {
        match self {
            PerturbationFunction::Canonical { scale } => format!("canonical(scale={scale})"),
            PerturbationFunction::Linear => "linear".to_string(),
            PerturbationFunction::Tabulated { breakpoints } => {
                format!("tabulated({} breakpoints)", breakpoints.len())
            }
        }
    }

    /// Kind tag used in serialized files.
    pub fn kind_name(&self) -> &'static str {
        match self {
            PerturbationFunction::Canonical { .. } => "canonical",
            PerturbationFunction::Linear => "linear",
            PerturbationFunction::Tabulated { .. } => "tabulated",
        }
    }

    /// Evaluates the function at `x ∈ [0, 1]`.
    ///
    /// Tabulated functions are right-continuous: at a duplicated breakpoint
    /// x-coordinate the later (lower) value is returned.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!(
                "perturbation function evaluated at {x}, outside [0, 1]"
            )));
        }
        Ok(match self {
            PerturbationFunction::Canonical { scale } => scale * (1.0 - (x - 1.0).exp()),
            PerturbationFunction::Linear => 1.0 - x,
            PerturbationFunction::Tabulated { breakpoints } => eval_tabulated(breakpoints, x),
        })
    }

    /// Exact integral over `[a, b] ⊆ [0, 1]` (closed form for the smooth
    /// kinds, exact trapezoids for tabulated ones).
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
            return Err(Error::Domain(format!(
                "integration bounds [{a}, {b}] must satisfy 0 <= a <= b <= 1"
            )));
        }
        Ok(match self {
            PerturbationFunction::Canonical { scale } => {
                scale * ((b - a) - ((b - 1.0).exp() - (a - 1.0).exp()))
            }
            PerturbationFunction::Linear => (b - a) - (b * b - a * a) / 2.0,
            PerturbationFunction::Tabulated { breakpoints } => {
                integrate_tabulated(breakpoints, a, b)
            }
        })
    }

    /// Distinct x-coordinates where a tabulated function changes slope or
    /// jumps. Empty for the smooth kinds; useful for grid refinement when
    /// scanning inequalities.
    pub fn breakpoint_xs(&self) -> Vec<f64> {
        match self {
            PerturbationFunction::Tabulated { breakpoints } => {
                let mut xs: Vec<f64> = breakpoints.iter().map(|&(x, _)| x).collect();
                xs.dedup();
                xs
            }
            _ => Vec::new(),
        }
    }

    /// Serializes to the JSON file format (includes `format_version`).
    pub fn to_json(&self) -> String {
        let file = PerturbationFile {
            format_version: PERTURBATION_FORMAT_VERSION,
            kind: self.kind_name().to_string(),
            scale: match self {
                PerturbationFunction::Canonical { scale } => Some(*scale),
                _ => None,
            },
            breakpoints: match self {
                PerturbationFunction::Tabulated { breakpoints } => Some(breakpoints.clone()),
                _ => None,
            },
        };
        serde_json::to_string_pretty(&file).expect("perturbation serialization cannot fail")
    }

    /// Parses the JSON file format, rejecting unknown format versions and
    /// re-validating admissibility.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: PerturbationFile =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("bad perturbation file: {e}")))?;
        if file.format_version != PERTURBATION_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported perturbation format version {} (expected {})",
                file.format_version, PERTURBATION_FORMAT_VERSION
            )));
        }
        match file.kind.as_str() {
            "canonical" => PerturbationFunction::canonical(file.scale.unwrap_or(1.0)),
            "linear" => Ok(PerturbationFunction::Linear),
            "tabulated" => {
                let bps = file.breakpoints.ok_or_else(|| {
                    Error::Format("tabulated perturbation file lacks breakpoints".into())
                })?;
                PerturbationFunction::from_breakpoints(bps)
            }
            other => Err(Error::Format(format!("unknown perturbation kind {other:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PerturbationFile {
    format_version: u32,
    kind: String,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakpoints: Option<Vec<(f64, f64)>>,
}

/// Right-continuous piecewise-linear evaluation: pick the last breakpoint
/// with x-coordinate <= x, interpolate towards the next entry.
fn eval_tabulated(bps: &[(f64, f64)], x: f64) -> f64 {
    let mut i = match bps.binary_search_by(|&(bx, _)| bx.partial_cmp(&x).unwrap()) {
        Ok(pos) => pos,
        Err(pos) => pos.saturating_sub(1),
    };
    // Step forward over duplicates so evaluation at a jump returns the right
    // limit (the later table entry).
    while i + 1 < bps.len() && bps[i + 1].0 <= x {
        i += 1;
    }
    if i + 1 == bps.len() {
        return bps[i].1;
    }
    let (x0, y0) = bps[i];
    let (x1, y1) = bps[i + 1];
    if x1 == x0 {
        return y0;
    }
    let t = (x - x0) / (x1 - x0);
    y0 + t * (y1 - y0)
}

/// Exact integral of the piecewise-linear interpolant over [a, b]; jumps have
/// zero width and contribute nothing.
fn integrate_tabulated(bps: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for w in bps.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x1 <= x0 {
            continue; // jump: zero-width segment
        }
        let lo = a.max(x0);
        let hi = b.min(x1);
        if hi <= lo {
            continue;
        }
        let slope = (y1 - y0) / (x1 - x0);
        let y_lo = y0 + slope * (lo - x0);
        let y_hi = y0 + slope * (hi - x0);
        total += 0.5 * (y_lo + y_hi) * (hi - lo);
    }
    total
}
