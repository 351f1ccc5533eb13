//! Ground-truth oracles and estimation harnesses.
//!
//! Three independent optimum routes are kept deliberately separate so they
//! can certify each other: an exact matching oracle for vertex-weighted
//! instances, a fractional LP for budgeted instances, and a brute-force grid
//! search for tiny budgeted instances that was built and frozen first.
//!
//! The harness validates the feasibility of every allocation it produces
//! (mass and budget caps); a global counter exposes how many runs were
//! checked so the test suite can assert that the validator saw everything.

pub mod brute;
pub mod lp;
pub mod matching;

pub use brute::{opt_brute_force, BRUTE_GUARD, DEFAULT_BRUTE_RESOLUTION};
pub use lp::{opt_fractional, LP_GUARD};
pub use matching::{opt_matching, MATCHING_GUARD};

use crate::algorithms::{
    run_budget_additive, run_msvv, run_pb, run_pr_adwords, run_pr_integral, AlgorithmId,
    RankAssignment, RunReport,
};
use crate::error::{Error, Result};
use crate::generators::{decompose_instance, GeneratedInstance};
use crate::instance::{Instance, Mode};
use crate::perturb::PerturbationFunction;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};

/// Internal cap on the number of stages accepted by [`opt_equality_check`];
/// the stage side of a decomposition may exceed the public LP guard while
/// the LP itself stays comfortably solvable.
pub const STAGE_LP_GUARD: u32 = 400;

static RUNS_VALIDATED: AtomicU64 = AtomicU64::new(0);

/// Number of allocations feasibility-validated by this process so far.
pub fn validated_runs() -> u64 {
    RUNS_VALIDATED.load(Ordering::Relaxed)
}

/// Validates a run's allocation against its instance and counts it.
pub fn validate_run(report: &RunReport, instance: &Instance) -> Result<()> {
    report.allocation.validate_against(instance)?;
    RUNS_VALIDATED.fetch_add(1, Ordering::Relaxed);
    Ok(())
}

/// Exact optimum: maximum-weight matching for vertex-weighted instances,
/// fractional LP for budgeted ones. Both are guarded; past the guards, use
/// the generator's closed-form optimum.
pub fn opt_exact(instance: &Instance) -> Result<f64> {
    match instance.mode {
        Mode::VertexWeighted => matching::opt_matching(instance),
        Mode::Adwords | Mode::BudgetAdditiveUnknown => lp::opt_fractional(instance),
    }
}

/// Outcome of comparing an instance's optimum with its stage decomposition's.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EqualityReport {
    pub opt_original: f64,
    pub opt_stages: f64,
    pub stage_count: u32,
    pub tolerance: f64,
    pub equal: bool,
}

/// Checks that stage decomposition preserves the offline optimum: the stage
/// budgets of each offline vertex sum to (at most) its true budget and every
/// optimal routing survives the split, so the two fractional optima coincide.
pub fn opt_equality_check(instance: &Instance) -> Result<EqualityReport> {
    if instance.mode != Mode::BudgetAdditiveUnknown {
        return Err(Error::Mode(
            "the optimum-preservation check expects a budget-additive instance".into(),
        ));
    }
    if instance.n_offline() > LP_GUARD || instance.n_online() > LP_GUARD {
        return Err(Error::Guard(format!(
            "{}×{} exceeds the {LP_GUARD}×{LP_GUARD} LP guard",
            instance.n_offline(),
            instance.n_online()
        )));
    }
    let decomposition = decompose_instance(instance)?;
    let stage_count = decomposition.instance.n_offline();
    if stage_count > STAGE_LP_GUARD {
        return Err(Error::Guard(format!(
            "decomposition produced {stage_count} stages, past the {STAGE_LP_GUARD}-stage LP cap"
        )));
    }
    let opt_original = lp::lp_value(instance)?;
    let opt_stages = lp::lp_value(&decomposition.instance)?;
    let tolerance = 1e-6;
    Ok(EqualityReport {
        opt_original,
        opt_stages,
        stage_count,
        tolerance,
        equal: (opt_original - opt_stages).abs() <= tolerance,
    })
}

/// Where the denominator of a competitive ratio comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptSource {
    /// The generator's closed-form optimum.
    ClosedForm,
    /// [`opt_exact`] on the instance (guards apply).
    Exact,
    /// A caller-supplied value.
    Value(f64),
}

/// A (possibly Monte Carlo) competitive-ratio estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub algorithm: AlgorithmId,
    /// Mean of the per-trial ratios.
    pub mean: f64,
    /// Sample standard error of the mean (0 for a single trial).
    pub stderr: f64,
    pub trials: u32,
    pub per_trial: Vec<f64>,
    /// Master seed for randomized algorithms.
    pub seed: Option<u64>,
    pub opt_value: f64,
    /// Which denominator was used: "closed-form", "exact-oracle", "supplied".
    pub opt_source: String,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn resolve_opt(gi: &GeneratedInstance, source: OptSource) -> Result<(f64, String)> {
    let (value, label) = match source {
        OptSource::ClosedForm => (
            gi.opt_closed_form.ok_or_else(|| {
                Error::Argument(format!(
                    "family '{}' records no closed-form optimum",
                    gi.family
                ))
            })?,
            "closed-form",
        ),
        OptSource::Exact => (opt_exact(&gi.instance)?, "exact-oracle"),
        OptSource::Value(v) => (v, "supplied"),
    };
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Argument(format!(
            "optimum must be positive and finite, got {value}"
        )));
    }
    Ok((value, label.to_string()))
}

/// Runs one algorithm once. Deterministic algorithms use `step`; randomized
/// ones use `ranks`.
pub fn run_algorithm(
    algorithm: AlgorithmId,
    instance: &Instance,
    f: &PerturbationFunction,
    step: f64,
    ranks: &RankAssignment,
) -> Result<RunReport> {
    match algorithm {
        AlgorithmId::PrIntegral => run_pr_integral(instance, f, ranks),
        AlgorithmId::Pb => run_pb(instance, f, step),
        AlgorithmId::PrAdwords => run_pr_adwords(instance, f, ranks),
        AlgorithmId::Msvv => run_msvv(instance, f, step),
        AlgorithmId::BudgetAdditive => run_budget_additive(instance, f, step),
    }
}

/// Estimates the competitive ratio of `algorithm` on a generated instance.
///
/// Deterministic algorithms demand `trials == 1`. Randomized algorithms
/// derive one rank seed per trial from the master `seed` and run trials in
/// parallel; the estimate is reproducible for a fixed seed. Every produced
/// allocation is feasibility-validated before its value is trusted.
pub fn competitive_ratio(
    algorithm: AlgorithmId,
    gi: &GeneratedInstance,
    f: &PerturbationFunction,
    step: f64,
    trials: u32,
    seed: u64,
    opt_source: OptSource,
) -> Result<RatioEstimate> {
    if trials == 0 {
        return Err(Error::Argument("at least one trial is required".into()));
    }
    let (opt_value, opt_label) = resolve_opt(gi, opt_source)?;
    let per_trial: Vec<f64>;
    let seed_field: Option<u64>;
    if algorithm.randomized() {
        let mut seeder = ChaCha8Rng::seed_from_u64(seed);
        let trial_seeds: Vec<u64> = (0..trials).map(|_| seeder.gen()).collect();
        per_trial = trial_seeds
            .into_par_iter()
            .map(|trial_seed| {
                let ranks = RankAssignment::Random { seed: trial_seed };
                let report = run_algorithm(algorithm, &gi.instance, f, step, &ranks)?;
                validate_run(&report, &gi.instance)?;
                Ok(report.value / opt_value)
            })
            .collect::<Result<Vec<f64>>>()?;
        seed_field = Some(seed);
    } else {
        if trials != 1 {
            return Err(Error::Argument(format!(
                "{} is deterministic; run it with trials = 1, not {trials}",
                algorithm.name()
            )));
        }
        let ranks = RankAssignment::Random { seed };
        let report = run_algorithm(algorithm, &gi.instance, f, step, &ranks)?;
        validate_run(&report, &gi.instance)?;
        per_trial = vec![report.value / opt_value];
        seed_field = None;
    }
    let (mean, stderr) = mean_and_stderr(&per_trial);
    Ok(RatioEstimate {
        algorithm,
        mean,
        stderr,
        trials,
        per_trial,
        seed: seed_field,
        opt_value,
        opt_source: opt_label,
    })
}

/// Deterministic expected ratio of the budgeted rank matcher on a two-phase
/// spender instance: the lone unlimited vertex's rank y₀ sweeps a midpoint
/// grid `(k + ½)/grid` while the unit-budget vertices keep uniform-grid
/// ranks `i/n`. Averaging over the grid replaces Monte Carlo sampling of y₀.
pub fn expected_ratio_y0_grid(
    gi: &GeneratedInstance,
    f: &PerturbationFunction,
    grid: u32,
) -> Result<RatioEstimate> {
    let instance = &gi.instance;
    let shape_ok = instance.mode == Mode::Adwords
        && instance.offline_blocks.len() == 2
        && instance.offline_blocks[0].count == 1
        && instance.offline_blocks[0].unlimited
        && !instance.offline_blocks[1].unlimited;
    if !shape_ok {
        return Err(Error::Argument(
            "the y0-grid estimator expects a two-phase spender instance (one unlimited vertex plus unit-budget vertices)".into(),
        ));
    }
    if grid == 0 {
        return Err(Error::Argument("grid must be positive".into()));
    }
    let (opt_value, opt_label) = resolve_opt(gi, OptSource::ClosedForm)?;
    let n = instance.offline_blocks[1].count;
    let unit_ranks: Vec<f64> = (1..=n).map(|i| f64::from(i) / f64::from(n)).collect();
    let per_trial: Vec<f64> = (0..grid)
        .into_par_iter()
        .map(|k| {
            let y0 = (f64::from(k) + 0.5) / f64::from(grid);
            let mut ranks = Vec::with_capacity(n as usize + 1);
            ranks.push(y0);
            ranks.extend_from_slice(&unit_ranks);
            let report = run_pr_adwords(instance, f, &RankAssignment::Deterministic(ranks))?;
            validate_run(&report, instance)?;
            Ok(report.value / opt_value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_and_stderr(&per_trial);
    Ok(RatioEstimate {
        algorithm: AlgorithmId::PrAdwords,
        mean,
        stderr,
        trials: grid,
        per_trial,
        seed: None,
        opt_value,
        opt_source: opt_label,
    })
}

/// Result of the order-statistics concentration experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: u32,
    pub epsilon: f64,
    pub trials: u32,
    pub successes: u64,
    /// Fraction of trials where every order statistic stayed within ε of i/n.
    pub empirical: f64,
    /// The guarantee 1 − 2n·e^{−√n/6}.
    pub bound: f64,
    /// True when the bound is negative and therefore claims nothing.
    pub vacuous: bool,
    pub seed: u64,
}

/// Empirically tests the order-statistics concentration guarantee: draw `n`
/// i.i.d. uniforms, sort them, and check `|y_(i) − i/n| ≤ ε` for all `i`.
///
/// When the guarantee is non-vacuous, ε must satisfy the hypothesis
/// `4n^(−1/4) < ε < 1`. A vacuous bound (negative, claiming nothing) skips
/// the lower hypothesis check so that small-n experiments can still report
/// the vacuity flag. Each trial draws from its own seeded stream.
pub fn concentration_check(
    n: u32,
    epsilon: f64,
    trials: u32,
    seed: u64,
) -> Result<ConcentrationReport> {
    if n == 0 || trials == 0 {
        return Err(Error::Argument("n and trials must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Argument(format!(
            "ε = {epsilon} violates the hypothesis 4n^(-1/4) < ε < 1"
        )));
    }
    let nf = f64::from(n);
    let bound = 1.0 - 2.0 * nf * (-nf.sqrt() / 6.0).exp();
    let vacuous = bound < 0.0;
    let hypothesis_floor = 4.0 * nf.powf(-0.25);
    if !vacuous && epsilon <= hypothesis_floor {
        return Err(Error::Argument(format!(
            "ε = {epsilon} violates the hypothesis 4n^(-1/4) < ε < 1 (here 4n^(-1/4) = {hypothesis_floor})"
        )));
    }
    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::from(trial));
            let mut draws: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            draws.sort_unstable_by(f64::total_cmp);
            let ok = draws
                .iter()
                .enumerate()
                .all(|(idx, &y)| (y - (idx as f64 + 1.0) / nf).abs() <= epsilon);
            u64::from(ok)
        })
        .sum();
    Ok(ConcentrationReport {
        n,
        epsilon,
        trials,
        successes,
        empirical: successes as f64 / f64::from(trials),
        bound,
        vacuous,
        seed,
    })
}
