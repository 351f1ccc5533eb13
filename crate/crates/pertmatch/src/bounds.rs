//! Feasibility constraints on perturbation functions and the numerical
//! infeasibility certificate for ratios above the achievable optimum.
//!
//! Three inequality families are checked:
//!
//! - the water-filling feasibility constraint linking `f(α)` to `∫₀^β f`
//!   ([`check_eq1`]), whose only solutions at the critical ratio are scaled
//!   copies of the canonical function ([`check_uniqueness`]);
//! - the budgeted-rank constraint at a single parameter ([`check_eq5`]) and
//!   its two-parameter refinement with a capped second branch
//!   ([`check_eq6`]);
//! - the certificate machinery ([`beta_star`], [`compute_h`],
//!   [`verify_gamma_infeasible`]) that integrates a pointwise lower bound on
//!   any admissible `f` and contradicts the upper bound implied by the
//!   feasibility constraint, proving that no perturbation function achieves
//!   a ratio of `1 − 1/e − γ` for small positive `γ`.
//!
//! All integrals of `f` itself are exact (closed form or exact trapezoids);
//! the only quadrature is the α-integral inside the certificate, which is
//! composite Simpson with kink-aware splitting and a certified error bound.

use crate::error::{Error, Result};
use crate::perturb::PerturbationFunction;
use serde::{Deserialize, Serialize};

/// The critical competitive ratio 1 − 1/e.
pub fn critical_ratio() -> f64 {
    1.0 - (-1.0f64).exp()
}

/// Pass floor for slack checks with closed-form perturbation functions.
pub const SLACK_FLOOR_SMOOTH: f64 = -1e-9;
/// Pass floor for tabulated perturbation functions (trapezoid arithmetic).
pub const SLACK_FLOOR_TABULATED: f64 = -1e-7;

/// Grid scan outcome for an inequality over (α, β) ∈ [0,1]².
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// Which inequality was scanned.
    pub constraint: String,
    /// Target competitive ratio Γ.
    pub gamma_target: f64,
    pub grid_resolution: u32,
    pub worst_slack: f64,
    /// (α, β) attaining the worst slack.
    pub worst_at: (f64, f64),
    /// Slack floor below which the scan fails.
    pub tolerance: f64,
    pub pass: bool,
}

fn slack_floor(f: &PerturbationFunction) -> f64 {
    match f {
        PerturbationFunction::Tabulated { .. } => SLACK_FLOOR_TABULATED,
        _ => SLACK_FLOOR_SMOOTH,
    }
}

/// Left and right sides of the water-filling feasibility constraint at a
/// point: `(β+1−e^{β−1}−Γ)·f(α)` versus `(1−(1−Γ)e^α)·∫₀^β f`.
pub fn eq1_sides(
    f: &PerturbationFunction,
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    let left = (beta + 1.0 - (beta - 1.0).exp() - gamma) * f.eval(alpha)?;
    let right = (1.0 - (1.0 - gamma) * alpha.exp()) * f.integrate(0.0, beta)?;
    Ok((left, right))
}

/// Slack (left − right) of the water-filling feasibility constraint.
pub fn eq1_slack(f: &PerturbationFunction, gamma: f64, alpha: f64, beta: f64) -> Result<f64> {
    let (left, right) = eq1_sides(f, gamma, alpha, beta)?;
    Ok(left - right)
}

/// Builds one axis of the scan grid: uniform points plus the breakpoints of
/// tabulated functions (violations can hide exactly at jumps).
fn scan_axis(f: &PerturbationFunction, resolution: u32) -> Vec<f64> {
    let mut axis: Vec<f64> = (0..=resolution)
        .map(|i| f64::from(i) / f64::from(resolution))
        .collect();
    axis.extend(f.breakpoint_xs());
    axis.sort_by(f64::total_cmp);
    axis.dedup();
    axis
}

/// Scans the water-filling feasibility constraint over a grid of (α, β).
pub fn check_eq1(
    f: &PerturbationFunction,
    gamma: f64,
    grid_resolution: u32,
) -> Result<ConstraintReport> {
    if grid_resolution < 2 {
        return Err(Error::Argument(
            "grid resolution must be at least 2".into(),
        ));
    }
    let axis = scan_axis(f, grid_resolution);
    // Precompute f(α) and F(β) = ∫₀^β f along the axis; the scan is then a
    // pure outer product evaluated in a fixed order.
    let f_alpha: Vec<f64> = axis.iter().map(|&a| f.eval(a)).collect::<Result<_>>()?;
    let mut f_integral = Vec::with_capacity(axis.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &b in &axis {
        acc += f.integrate(prev, b)?;
        f_integral.push(acc);
        prev = b;
    }
    let mut worst = f64::INFINITY;
    let mut worst_at = (0.0, 0.0);
    for (ai, &alpha) in axis.iter().enumerate() {
        let right_coeff = 1.0 - (1.0 - gamma) * alpha.exp();
        for (bi, &beta) in axis.iter().enumerate() {
            let left = (beta + 1.0 - (beta - 1.0).exp() - gamma) * f_alpha[ai];
            let slack = left - right_coeff * f_integral[bi];
            if slack < worst {
                worst = slack;
                worst_at = (alpha, beta);
            }
        }
    }
    let tolerance = slack_floor(f);
    Ok(ConstraintReport {
        constraint: "water-filling feasibility".into(),
        gamma_target: gamma,
        grid_resolution,
        worst_slack: worst,
        worst_at,
        tolerance,
        pass: worst >= tolerance,
    })
}

/// Uniqueness probe: the best scale `M = inf f(x)/(1−e^{x−1})` and the
/// largest deviation of `f` from `M·(1−e^{x−1})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// Infimum of f(x)/(1−e^{x−1}) over a dense grid.
    pub m: f64,
    /// max |f(x) − M(1−e^{x−1})| over the grid.
    pub max_deviation: f64,
    pub is_canonical: bool,
}

/// Measures how far `f` is from a scaled canonical function.
pub fn check_uniqueness(f: &PerturbationFunction, tolerance: f64) -> Result<UniquenessReport> {
    if !(tolerance >= 0.0) {
        return Err(Error::Argument("tolerance must be non-negative".into()));
    }
    const GRID: u32 = 100_000;
    let mut xs: Vec<f64> = (0..GRID) // exclude x = 1, where the ratio is 0/0
        .map(|i| f64::from(i) / f64::from(GRID))
        .collect();
    xs.extend(f.breakpoint_xs().into_iter().filter(|&x| x < 1.0));
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut m = f64::INFINITY;
    let mut any_positive = false;
    for &x in &xs {
        let fx = f.eval(x)?;
        if fx > 0.0 {
            any_positive = true;
        }
        let denom = 1.0 - (x - 1.0).exp();
        m = m.min(fx / denom);
    }
    if !any_positive && f.eval(1.0)? <= 0.0 {
        return Err(Error::Degenerate(
            "the zero function has no canonical scale".into(),
        ));
    }
    let mut max_deviation = 0.0f64;
    for &x in xs.iter().chain(std::iter::once(&1.0)) {
        let fx = f.eval(x)?;
        let dev = (fx - m * (1.0 - (x - 1.0).exp())).abs();
        max_deviation = max_deviation.max(dev);
    }
    Ok(UniquenessReport {
        m,
        max_deviation,
        is_canonical: max_deviation <= tolerance,
    })
}

/// Slack of the single-parameter budgeted-rank constraint:
/// `(1−Γ)f(α) − [(Γ−α)∫₀^α f + Γ∫_α^1 f]`.
pub fn check_eq5(f: &PerturbationFunction, gamma: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("α = {alpha} outside [0, 1]")));
    }
    let head = f.integrate(0.0, alpha)?;
    let tail = f.integrate(alpha, 1.0)?;
    Ok((1.0 - gamma) * f.eval(alpha)? - ((gamma - alpha) * head + gamma * tail))
}

/// The single-parameter ratio bound `(α∫₀^α f + f(α)) / (∫₀^1 f + f(α))`
/// implied by the two-phase spender family.
pub fn two_phase_ratio_bound(f: &PerturbationFunction, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("α = {alpha} outside [0, 1]")));
    }
    let fa = f.eval(alpha)?;
    let denom = f.integrate(0.0, 1.0)? + fa;
    if denom <= 0.0 {
        return Err(Error::Degenerate(
            "ratio bound undefined for a vanishing denominator".into(),
        ));
    }
    Ok((alpha * f.integrate(0.0, alpha)? + fa) / denom)
}

/// Integrates `min{f(x), c·f(x−α)}` over `[α, 1]` exactly up to crossover
/// location: pieces are split at every breakpoint of either branch, each
/// piece's single crossover is bisected, and both branches integrate in
/// closed form.
fn integrate_min_branches(f: &PerturbationFunction, alpha: f64, c: f64) -> Result<f64> {
    let diff = |x: f64| -> Result<f64> { Ok(f.eval(x)? - c * f.eval(x - alpha)?) };
    // Piece boundaries: α, 1, breakpoints of f(x), breakpoints of f shifted
    // by α. Within a piece both branches are smooth (or linear), so their
    // difference crosses zero at most finitely often and a fine scan plus
    // bisection pins each crossing.
    let mut cuts = vec![alpha, 1.0];
    for x in f.breakpoint_xs() {
        if x > alpha && x < 1.0 {
            cuts.push(x);
        }
        let shifted = x + alpha;
        if shifted > alpha && shifted < 1.0 {
            cuts.push(shifted);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < 1e-15 {
            continue;
        }
        // Locate sign changes of the branch difference on this piece.
        const SCAN: u32 = 64;
        let mut seams = vec![lo];
        let mut prev_x = lo;
        let mut prev_d = diff(lo)?;
        for i in 1..=SCAN {
            let x = lo + (hi - lo) * f64::from(i) / f64::from(SCAN);
            let d = diff(x)?;
            if (prev_d < 0.0) != (d < 0.0) {
                let (mut a, mut b) = (prev_x, x);
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    if (diff(a)? < 0.0) == (diff(mid)? < 0.0) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                seams.push(0.5 * (a + b));
            }
            prev_x = x;
            prev_d = d;
        }
        seams.push(hi);
        for s in seams.windows(2) {
            let (a, b) = (s[0], s[1]);
            if b - a < 1e-15 {
                continue;
            }
            let mid = 0.5 * (a + b);
            if f.eval(mid)? <= c * f.eval(mid - alpha)? {
                total += f.integrate(a, b)?;
            } else {
                total += c * f.integrate(a - alpha, b - alpha)?;
            }
        }
    }
    Ok(total)
}

/// Slack of the two-parameter budgeted-rank constraint:
/// `(1−Γ)f(α) − (Γ−α)∫₀^α f − (Γ−β)∫_α^1 min{f(x), (f(α)/f(β))f(x−α)}`.
pub fn check_eq6(
    f: &PerturbationFunction,
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "(α, β) = ({alpha}, {beta}) outside [0, 1]²"
        )));
    }
    if alpha < beta {
        return Err(Error::Argument(format!(
            "the two-parameter constraint needs α ≥ β, got α = {alpha} < β = {beta}"
        )));
    }
    let f_beta = f.eval(beta)?;
    if f_beta <= 0.0 {
        return Err(Error::Domain(format!(
            "f(β) = {f_beta} must be positive to form the branch cap"
        )));
    }
    let c = f.eval(alpha)? / f_beta;
    let min_integral = integrate_min_branches(f, alpha, c)?;
    Ok((1.0 - gamma) * f.eval(alpha)?
        - (gamma - alpha) * f.integrate(0.0, alpha)?
        - (gamma - beta) * min_integral)
}

/// The certificate's auxiliary convex function
/// `g(β) = (δ + eγ + δeγ)(e^{β−1} − e^{−1}) + γ − βδ`.
pub fn certificate_g(beta: f64, delta: f64, gamma: f64) -> f64 {
    let e = 1.0f64.exp();
    (delta + e * gamma + delta * e * gamma) * ((beta - 1.0).exp() - (-1.0f64).exp()) + gamma
        - beta * delta
}

/// Unique root of [`certificate_g`] on [0, 1], by bisection to 1e−12.
///
/// The certificate needs `g(0) = γ > 0 > g(1)`; if either sign fails, the
/// root assumption behind the certificate does not hold and an error
/// explains which side failed.
pub fn beta_star(delta: f64, gamma: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() || !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::Argument(format!(
            "need δ > 0 and γ ≥ 0, got δ = {delta}, γ = {gamma}"
        )));
    }
    let g0 = certificate_g(0.0, delta, gamma);
    let g1 = certificate_g(1.0, delta, gamma);
    if !(g0 > 0.0) || !(g1 < 0.0) {
        return Err(Error::Domain(format!(
            "root assumption fails: need g(0) > 0 > g(1), got g(0) = {g0}, g(1) = {g1}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if certificate_g(mid, delta, gamma) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `A(x) = 1 − e^x (1−Γ)`: the pointwise lower bound on `f` that defines
/// both the integrand floor and the root `r`.
fn lower_envelope(x: f64, gamma_target: f64) -> f64 {
    1.0 - x.exp() * (1.0 - gamma_target)
}

/// h(α) on the closed interval, used internally by the integrator. The
/// closed-form pieces: with `A(x) = 1 − e^x(1−Γ)` and cap coefficient
/// `c = A(α)/((1+δ)Γ)`, the branches `A(x)` and `c·(1 − e^{x−α}(1−Γ))`
/// cross exactly once at `x* = ln[(1−c) / ((1−Γ)(1−c·e^{−α}))]`; the capped
/// branch is active on [α, x*] and `A` on [x*, r].
fn h_closed(alpha: f64, gamma_target: f64, delta: f64, beta_star: f64, r: f64) -> f64 {
    let one_minus = 1.0 - gamma_target;
    let a_alpha = lower_envelope(alpha, gamma_target);
    let c = a_alpha / ((1.0 + delta) * gamma_target);
    // The derivation-level identity for the cap coefficient, exactly as
    // coded: c must equal (1 − e^α(1−Γ))/((1+δ)Γ).
    assert!(
        c == (1.0 - alpha.exp() * (1.0 - gamma_target)) / ((1.0 + delta) * gamma_target),
        "cap branch coefficient diverged from its defining formula"
    );
    let x_star = if c >= 1.0 {
        r
    } else {
        (((1.0 - c) / (one_minus * (1.0 - c * (-alpha).exp()))).ln()).clamp(alpha, r)
    };
    let i1 = alpha - one_minus * (alpha.exp() - 1.0);
    let i2 = (x_star - alpha) - one_minus * ((x_star - alpha).exp() - 1.0);
    let i3 = (r - x_star) - one_minus * (r.exp() - x_star.exp());
    ((gamma_target - alpha) * i1 + (gamma_target - beta_star) * (c * i2 + i3)) / one_minus
}

/// The certificate's pointwise bound `h(α)` for `α ∈ (0, r)`.
pub fn compute_h(
    alpha: f64,
    gamma_target: f64,
    delta: f64,
    beta_star: f64,
    r: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < r) {
        return Err(Error::Argument(format!(
            "α = {alpha} outside the certificate range (0, {r})"
        )));
    }
    if !(gamma_target > 0.0 && gamma_target < 1.0) || !(delta > 0.0) {
        return Err(Error::Argument(format!(
            "need Γ ∈ (0,1) and δ > 0, got Γ = {gamma_target}, δ = {delta}"
        )));
    }
    Ok(h_closed(alpha, gamma_target, delta, beta_star, r))
}

/// Infeasibility certificate outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub delta: f64,
    /// Γ = 1 − 1/e − γ, the ratio whose feasibility is being refuted.
    pub gamma_target: f64,
    /// Root of 1 − e^r(1−Γ).
    pub r: f64,
    /// Root of the auxiliary function g, when it exists.
    pub beta_star: Option<f64>,
    /// I = ∫₀^r max{h(α), 1 − e^α(1−Γ)} dα.
    pub integral: Option<f64>,
    /// Upper bound r + 1 − e^{r−1} − Γ that I must exceed for a contradiction.
    pub comparison_upper: f64,
    /// Certified bound on the quadrature error of `integral`.
    pub certified_error: Option<f64>,
    /// Kinks of the integrand located by the integrator (crossings of h and
    /// the envelope), for reproducibility.
    pub kinks: Vec<f64>,
    /// True when I − certified_error > comparison_upper.
    pub infeasible: bool,
    /// False when the quadrature error bound swallows the decision gap.
    pub conclusive: bool,
    pub note: String,
}

const R_FORMULA_NOTE: &str = "r is the root of 1 - e^r(1-Gamma), i.e. r = -ln(1-Gamma); \
the source text's formula '-ln(1-gamma)' disagrees with its own numeric value 0.999185, \
which matches -ln(1-Gamma).";

/// Composite Simpson on [a, b] with an even number of subintervals.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, subintervals: u32) -> f64 {
    let n = subintervals.max(2) & !1; // even
    let h = (b - a) / f64::from(n);
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + h * f64::from(i);
        sum += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Crude but safe cap on the fourth derivative by central finite differences
/// over a sample grid, with a 1.5× safety factor.
fn fourth_derivative_cap<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    const SAMPLES: u32 = 160;
    let span = b - a;
    if span <= 0.0 {
        return 0.0;
    }
    let step = (span / 256.0).min(1e-3).max(1e-6);
    if a + 2.0 * step >= b - 2.0 * step {
        // Piece too narrow for finite differences; a generous constant cap
        // still contributes a negligible h⁴-weighted error term.
        return 1e3;
    }
    let mut cap = 0.0f64;
    for i in 0..=SAMPLES {
        let x = a + span * f64::from(i) / f64::from(SAMPLES);
        let x = x.clamp(a + 2.0 * step, b - 2.0 * step);
        let d4 = (f(x - 2.0 * step) - 4.0 * f(x - step) + 6.0 * f(x) - 4.0 * f(x + step)
            + f(x + 2.0 * step))
            / step.powi(4);
        cap = cap.max(d4.abs());
    }
    cap * 1.5
}

/// Verifies that no admissible perturbation function can achieve the ratio
/// `Γ = 1 − 1/e − γ`, by integrating the certificate's pointwise lower bound
/// and comparing it against the feasibility upper bound.
///
/// `resolution` is the total Simpson subinterval budget across the smooth
/// pieces of the integrand (kinks are located first and never straddled).
pub fn verify_gamma_infeasible(gamma: f64, delta: f64, resolution: u32) -> Result<BoundReport> {
    let inv_e = (-1.0f64).exp();
    if !(gamma >= 0.0) || gamma >= 1.0 - inv_e {
        return Err(Error::Argument(format!(
            "γ = {gamma} must satisfy 0 ≤ γ < 1 − 1/e"
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::Argument(format!("δ = {delta} must be positive")));
    }
    if resolution < 100 {
        return Err(Error::Argument(
            "certificate resolution must be at least 100".into(),
        ));
    }
    let gamma_target = 1.0 - inv_e - gamma;
    let r = -(1.0 - gamma_target).ln();
    debug_assert!((1.0 - r.exp() * (1.0 - gamma_target)).abs() <= 1e-12);
    let comparison_upper = r + 1.0 - (r - 1.0).exp() - gamma_target;

    let bstar = match beta_star(delta, gamma) {
        Ok(b) => b,
        Err(err) => {
            return Ok(BoundReport {
                gamma,
                delta,
                gamma_target,
                r,
                beta_star: None,
                integral: None,
                comparison_upper,
                certified_error: None,
                kinks: Vec::new(),
                infeasible: false,
                conclusive: true,
                note: format!(
                    "certificate inapplicable: {err}; nothing refutes feasibility at this γ. {R_FORMULA_NOTE}"
                ),
            })
        }
    };

    let integrand =
        |x: f64| h_closed(x, gamma_target, delta, bstar, r).max(lower_envelope(x, gamma_target));
    let gap = |x: f64| h_closed(x, gamma_target, delta, bstar, r) - lower_envelope(x, gamma_target);

    // Locate the integrand's kinks: sign changes of h − A over a fine scan.
    let mut kinks = Vec::new();
    const SCAN: u32 = 4000;
    let mut prev_x = 0.0f64;
    let mut prev_g = gap(prev_x);
    for i in 1..=SCAN {
        let x = r * f64::from(i) / f64::from(SCAN);
        let g = gap(x);
        if (prev_g < 0.0) != (g < 0.0) {
            let (mut a, mut b) = (prev_x, x);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if (gap(a) < 0.0) == (gap(mid) < 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            kinks.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_g = g;
    }

    let mut cuts = vec![0.0];
    cuts.extend(&kinks);
    cuts.push(r);
    let mut integral = 0.0;
    let mut certified_error = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-14 {
            continue;
        }
        let share = (f64::from(resolution) * (b - a) / r).ceil() as u32;
        let share = share.max(8) & !1;
        integral += simpson(&integrand, a, b, share);
        // Composite Simpson remainder: (b−a) · h⁴ / 180 · max|d⁴|.
        let h = (b - a) / f64::from(share);
        let m4 = fourth_derivative_cap(&integrand, a, b);
        certified_error += (b - a) * h.powi(4) / 180.0 * m4;
        // Kink-location slop: crossings are bisected to ~1e-15·r.
        certified_error += 1e-12;
    }

    let margin = integral - comparison_upper;
    let conclusive = margin.abs() > certified_error;
    let infeasible = conclusive && margin > 0.0;
    let note = if conclusive {
        format!(
            "certificate {} at γ = {gamma}: I {} comparison upper bound by {:.3e} with certified quadrature error {:.3e}. {R_FORMULA_NOTE}",
            if infeasible { "holds" } else { "fails" },
            if margin > 0.0 { "exceeds" } else { "stays below" },
            margin.abs(),
            certified_error,
        )
    } else {
        format!(
            "inconclusive: |I − upper| = {:.3e} is within the certified quadrature error {:.3e}; raise the resolution. {R_FORMULA_NOTE}",
            margin.abs(),
            certified_error,
        )
    };
    Ok(BoundReport {
        gamma,
        delta,
        gamma_target,
        r,
        beta_star: Some(bstar),
        integral: Some(integral),
        comparison_upper,
        certified_error: Some(certified_error),
        kinks,
        infeasible,
        conclusive,
        note,
    })
}
