//! Execution of resolved experiment configurations.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use pertmatch::algorithms::{AlgorithmId, RankAssignment};
use pertmatch::bounds::{self, BoundReport, ConstraintReport, UniquenessReport};
use pertmatch::generators::{
    gen_budgeted_triangle, gen_duplicate, gen_instance1, gen_instance2, gen_instance2_general,
    gen_random, gen_upper_triangle, GeneratedInstance,
};
use pertmatch::instance::{Instance, Mode};
use pertmatch::oracle::{self, OptSource, RatioEstimate};
use pertmatch::perturb::PerturbationFunction;
use pertmatch::{allocation::Allocation, algorithms::RunReport, Error};

use crate::config::{
    ConcentrationConfig, ExperimentConfig, FamilySpec, GenerateConfig, SimulateConfig,
    VerifyBoundsConfig,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Frozen column schema of the simulation results CSV.
pub const RESULTS_CSV_HEADER: &str =
    "instance_hash,algorithm,f_kind,f_param,step,seed,trials,alg_value,opt_value,ratio,stderr";

/// Column schema of the concentration CSV.
pub const CONCENTRATION_CSV_HEADER: &str = "n,eps,empirical,bound";

/// Allocations bigger than this many entries are summarized, not embedded,
/// in simulation reports.
const REPORT_ALLOCATION_CAP: usize = 5_000;

/// CLI failure: either a library error, a conclusive-but-unexpected verdict,
/// or numerics that could not reach a conclusion.
#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Verdict(String),
    Inconclusive(String),
}

impl CliError {
    /// Exit-code contract: 0 success / expected verdict, 1 conclusive but
    /// unexpected verdict, 2 argument error, 3 mode error, 4 inconclusive
    /// numerics (guarded oracle size, degenerate input, or a quadrature
    /// error bound that swallows the decision gap).
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verdict(_) => 1,
            CliError::Inconclusive(_) => 4,
            CliError::Lib(err) => match err {
                Error::Mode(_) => 3,
                Error::Degenerate(_) | Error::Guard(_) => 4,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(err) => write!(out, "{err}"),
            CliError::Verdict(msg) => write!(out, "unexpected verdict: {msg}"),
            CliError::Inconclusive(msg) => write!(out, "inconclusive: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Lib(err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Lib(Error::Io(err))
    }
}

pub type CmdResult = Result<(), CliError>;

/// Runs one resolved configuration.
pub fn execute(config: &ExperimentConfig) -> CmdResult {
    match config {
        ExperimentConfig::Generate(c) => cmd_generate(config, c),
        ExperimentConfig::Simulate(c) => cmd_simulate(config, c),
        ExperimentConfig::VerifyBounds(c) => cmd_verify_bounds(config, c),
        ExperimentConfig::Concentration(c) => cmd_concentration(config, c),
    }
}

/// Output directory: explicit setting, else `$PERTMATCH_OUT`, else `.`.
fn resolve_out(out: &Option<String>) -> PathBuf {
    match out {
        Some(dir) => PathBuf::from(dir),
        None => std::env::var_os("PERTMATCH_OUT")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    }
}

/// Parses a perturbation-function spec: `canonical`, `canonical:<scale>`,
/// `linear`, or a path to a perturbation JSON file.
pub fn parse_f(spec: &str) -> Result<PerturbationFunction, CliError> {
    match spec {
        "canonical" => Ok(PerturbationFunction::canonical_unit()),
        "linear" => Ok(PerturbationFunction::linear()),
        other => {
            if let Some(scale) = other.strip_prefix("canonical:") {
                let scale: f64 = scale.parse().map_err(|_| {
                    Error::Argument(format!("bad canonical scale {scale:?}"))
                })?;
                return Ok(PerturbationFunction::canonical(scale)?);
            }
            let text = fs::read_to_string(other).map_err(|e| {
                Error::Argument(format!("perturbation spec {other:?} is neither a known kind nor a readable file: {e}"))
            })?;
            Ok(PerturbationFunction::from_json(&text)?)
        }
    }
}

fn parse_mode(spec: &str) -> Result<Mode, CliError> {
    match spec {
        "vertex-weighted" => Ok(Mode::VertexWeighted),
        "adwords" => Ok(Mode::Adwords),
        "budget-additive-unknown" => Ok(Mode::BudgetAdditiveUnknown),
        other => Err(CliError::Lib(Error::Argument(format!(
            "unknown mode {other:?}; expected vertex-weighted, adwords or budget-additive-unknown"
        )))),
    }
}

fn parse_algorithm(spec: &str) -> Result<AlgorithmId, CliError> {
    const ALL: [AlgorithmId; 5] = [
        AlgorithmId::PrIntegral,
        AlgorithmId::Pb,
        AlgorithmId::PrAdwords,
        AlgorithmId::Msvv,
        AlgorithmId::BudgetAdditive,
    ];
    ALL.into_iter().find(|a| a.name() == spec).ok_or_else(|| {
        let names: Vec<&str> = ALL.iter().map(|a| a.name()).collect();
        CliError::Lib(Error::Argument(format!(
            "unknown algorithm {spec:?}; expected one of {}",
            names.join(", ")
        )))
    })
}

fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Appends a row to a CSV file. A fresh file gets a version comment and the
/// header; every append also records the writing run's config hash on a
/// `#` comment line, so the file itself carries full provenance while the
/// column schema stays fixed.
fn append_csv(path: &Path, header: &str, config_hash: &str, row: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut text = String::new();
    if fresh {
        text.push_str(&format!("# pertmatch v{TOOL_VERSION}\n{header}\n"));
    }
    text.push_str(&format!("# config={config_hash} v={TOOL_VERSION}\n{row}\n"));
    fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?
        .write_all(text.as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------- generate

/// Sidecar metadata written next to every generated instance.
#[derive(Serialize, serde::Deserialize)]
struct InstanceMeta {
    tool_version: String,
    config_hash: String,
    family: String,
    params: serde_json::Value,
    /// Closed-form optimum, when the family has one.
    opt_closed_form: Option<f64>,
    /// True when `opt_closed_form` is exact for this finite instance.
    opt_exact: bool,
    copies_per_parent: Option<u32>,
    parent_hash: Option<String>,
    instance_hash: String,
    instance_file: String,
}

fn build_instance(source: &FamilySpec) -> Result<GeneratedInstance, CliError> {
    match source {
        FamilySpec::LayeredTriangle { alpha, beta, n, m, f } => {
            Ok(gen_instance1(*alpha, *beta, *n, *m, &parse_f(f)?)?)
        }
        FamilySpec::TwoPhaseSpender { alpha, n, beta, f } => match beta {
            Some(beta) => Ok(gen_instance2_general(*alpha, *beta, *n, &parse_f(f)?)?),
            None => Ok(gen_instance2(*alpha, *n, &parse_f(f)?)?),
        },
        FamilySpec::Duplicated { input, copies } => {
            let parent_text = fs::read_to_string(input)?;
            let parent = Instance::from_json(&parent_text)?;
            let mut gi = gen_duplicate(&parent, *copies)?;
            // The blow-up preserves the optimum, so an exact parent optimum
            // carries over from the parent's sidecar when one is available.
            if let Some(meta) = read_sidecar(Path::new(input))? {
                if meta.opt_exact && meta.instance_hash == parent.content_hash() {
                    gi.opt_closed_form = meta.opt_closed_form;
                    gi.opt_exact = meta.opt_closed_form.is_some();
                }
            }
            Ok(gi)
        }
        FamilySpec::UpperTriangle { n, weights } => {
            Ok(gen_upper_triangle(*n, weights.as_deref())?)
        }
        FamilySpec::BudgetedTriangle { n, mode } => {
            Ok(gen_budgeted_triangle(*n, parse_mode(mode)?)?)
        }
        FamilySpec::Random { seed, n_offline, n_online, mode } => {
            Ok(gen_random(*seed, *n_offline, *n_online, parse_mode(mode)?)?)
        }
    }
}

fn cmd_generate(config: &ExperimentConfig, c: &GenerateConfig) -> CmdResult {
    let gi = build_instance(&c.source)?;
    let out = resolve_out(&c.out);
    fs::create_dir_all(&out)?;
    let name = c.name.clone().unwrap_or_else(|| c.source.tag().to_string());
    let config_hash = config.hash();
    let instance_hash = gi.instance.content_hash();

    let instance_path = out.join(format!("{name}.json"));
    let mut instance_text = gi.instance.to_json();
    if !instance_text.ends_with('\n') {
        instance_text.push('\n');
    }
    fs::write(&instance_path, instance_text)?;

    let meta = InstanceMeta {
        tool_version: TOOL_VERSION.to_string(),
        config_hash: config_hash.clone(),
        family: gi.family.clone(),
        params: gi.params.clone(),
        opt_closed_form: gi.opt_closed_form,
        opt_exact: gi.opt_exact,
        copies_per_parent: gi.copies_per_parent,
        parent_hash: gi.parent_hash.clone(),
        instance_hash: instance_hash.clone(),
        instance_file: format!("{name}.json"),
    };
    write_pretty_json(&out.join(format!("{name}.meta.json")), &meta)?;
    fs::write(out.join(format!("{name}.config.json")), config.to_pretty_json())?;

    let opt_note = match (gi.opt_closed_form, gi.opt_exact) {
        (Some(v), true) => format!("closed-form optimum {v} (exact)"),
        (Some(v), false) => format!("closed-form optimum {v} (limiting value)"),
        (None, _) => "no closed-form optimum".to_string(),
    };
    println!(
        "wrote {} ({} offline x {} online, hash {instance_hash}); {opt_note}",
        instance_path.display(),
        gi.instance.n_offline(),
        gi.instance.n_online(),
    );
    println!(
        "metadata {}; replay with --config {}",
        out.join(format!("{name}.meta.json")).display(),
        out.join(format!("{name}.config.json")).display()
    );
    Ok(())
}

// ---------------------------------------------------------------- simulate

/// Scalar view of one run, embedded in simulation reports. The allocation is
/// included only when it is small enough to be worth reading.
#[derive(Serialize)]
struct RunRecord {
    algorithm: &'static str,
    value: f64,
    virtual_value: Option<f64>,
    step: Option<f64>,
    rank_seed: Option<u64>,
    /// Always true in a written report: the run was feasibility-validated
    /// before being recorded.
    feasible: bool,
    allocation_entries: usize,
    allocation: Option<Allocation>,
}

fn run_record(report: &RunReport) -> RunRecord {
    let entries = report.allocation.entries().count();
    RunRecord {
        algorithm: report.algorithm.name(),
        value: report.value,
        virtual_value: report.virtual_value,
        step: report.step,
        rank_seed: report.seed,
        feasible: true,
        allocation_entries: entries,
        allocation: (entries <= REPORT_ALLOCATION_CAP).then(|| report.allocation.clone()),
    }
}

#[derive(Serialize)]
struct SimulateReport {
    tool_version: String,
    config_hash: String,
    instance_file: String,
    instance_hash: String,
    family: String,
    f: String,
    estimate: RatioEstimate,
    run: Option<RunRecord>,
}

fn read_sidecar(instance_path: &Path) -> Result<Option<InstanceMeta>, CliError> {
    let stem = instance_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let meta_path = instance_path.with_file_name(format!("{stem}.meta.json"));
    if !meta_path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&meta_path)?;
    let meta: InstanceMeta = serde_json::from_str(&text).map_err(|e| {
        Error::Format(format!("bad sidecar {}: {e}", meta_path.display()))
    })?;
    Ok(Some(meta))
}

/// Loads an instance file and reconstructs generation metadata from its
/// sidecar when one is present and matches the instance content.
fn load_instance(path_text: &str) -> Result<GeneratedInstance, CliError> {
    let path = Path::new(path_text);
    let text = fs::read_to_string(path)?;
    let instance = Instance::from_json(&text)?;
    let hash = instance.content_hash();
    let meta = read_sidecar(path)?;
    if let Some(meta) = &meta {
        if meta.instance_hash != hash {
            return Err(CliError::Lib(Error::Format(format!(
                "sidecar {}.meta.json records instance hash {} but the file hashes to {hash}; regenerate or drop the sidecar",
                path.with_extension("").display(),
                meta.instance_hash
            ))));
        }
    }
    Ok(GeneratedInstance {
        instance,
        family: meta.as_ref().map_or_else(|| "file".to_string(), |m| m.family.clone()),
        params: meta.as_ref().map_or_else(|| json!({}), |m| m.params.clone()),
        opt_closed_form: meta.as_ref().and_then(|m| m.opt_closed_form),
        opt_exact: meta.as_ref().is_some_and(|m| m.opt_exact),
        copies_per_parent: meta.as_ref().and_then(|m| m.copies_per_parent),
        parent_hash: meta.as_ref().and_then(|m| m.parent_hash.clone()),
    })
}

fn resolve_opt_source(spec: &str, gi: &GeneratedInstance) -> Result<OptSource, CliError> {
    match spec {
        "auto" => Ok(if gi.opt_closed_form.is_some() {
            OptSource::ClosedForm
        } else {
            OptSource::Exact
        }),
        "closed-form" => Ok(OptSource::ClosedForm),
        "exact" => Ok(OptSource::Exact),
        other => {
            let value: f64 = other.parse().map_err(|_| {
                Error::Argument(format!(
                    "bad --opt {other:?}; expected auto, closed-form, exact, or a number"
                ))
            })?;
            Ok(OptSource::Value(value))
        }
    }
}

fn opt_value_and_label(
    gi: &GeneratedInstance,
    source: OptSource,
) -> Result<(f64, String), CliError> {
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
        OptSource::Exact => (oracle::opt_exact(&gi.instance)?, "exact-oracle"),
        OptSource::Value(v) => (v, "supplied"),
    };
    if !value.is_finite() || value <= 0.0 {
        return Err(CliError::Lib(Error::Argument(format!(
            "optimum must be positive and finite, got {value}"
        ))));
    }
    Ok((value, label.to_string()))
}

fn single_run_estimate(
    algorithm: AlgorithmId,
    ratio: f64,
    opt_value: f64,
    opt_source: String,
) -> RatioEstimate {
    RatioEstimate {
        algorithm,
        mean: ratio,
        stderr: 0.0,
        trials: 1,
        per_trial: vec![ratio],
        seed: None,
        opt_value,
        opt_source,
    }
}

fn cmd_simulate(config: &ExperimentConfig, c: &SimulateConfig) -> CmdResult {
    let algorithm = parse_algorithm(&c.algorithm)?;
    let f = parse_f(&c.f)?;
    let gi = load_instance(&c.instance)?;
    let opt_source = resolve_opt_source(&c.opt, &gi)?;
    if !matches!(c.ranks.as_str(), "random" | "grid") {
        return Err(CliError::Lib(Error::Argument(format!(
            "unknown ranks {:?}; expected random or grid",
            c.ranks
        ))));
    }

    let (estimate, run) = if let Some(grid) = c.y0_grid {
        if algorithm != AlgorithmId::PrAdwords {
            return Err(CliError::Lib(Error::Argument(format!(
                "--y0-grid drives the budgeted rank matcher; got {}",
                algorithm.name()
            ))));
        }
        (oracle::expected_ratio_y0_grid(&gi, &f, grid)?, None)
    } else if algorithm.randomized() && c.ranks == "grid" {
        if c.trials != 1 {
            return Err(CliError::Lib(Error::Argument(
                "grid ranks are deterministic; run with trials = 1".into(),
            )));
        }
        let (opt_value, opt_label) = opt_value_and_label(&gi, opt_source)?;
        let report =
            oracle::run_algorithm(algorithm, &gi.instance, &f, c.step, &RankAssignment::UniformGrid)?;
        oracle::validate_run(&report, &gi.instance)?;
        let ratio = report.value / opt_value;
        (
            single_run_estimate(algorithm, ratio, opt_value, opt_label),
            Some(run_record(&report)),
        )
    } else if algorithm.randomized() {
        let estimate =
            oracle::competitive_ratio(algorithm, &gi, &f, c.step, c.trials, c.seed, opt_source)?;
        (estimate, None)
    } else {
        if c.trials != 1 {
            return Err(CliError::Lib(Error::Argument(format!(
                "{} is deterministic; run it with trials = 1, not {}",
                algorithm.name(),
                c.trials
            ))));
        }
        let (opt_value, opt_label) = opt_value_and_label(&gi, opt_source)?;
        let report = oracle::run_algorithm(
            algorithm,
            &gi.instance,
            &f,
            c.step,
            &RankAssignment::Random { seed: c.seed },
        )?;
        oracle::validate_run(&report, &gi.instance)?;
        let ratio = report.value / opt_value;
        (
            single_run_estimate(algorithm, ratio, opt_value, opt_label),
            Some(run_record(&report)),
        )
    };

    let out = resolve_out(&c.out);
    fs::create_dir_all(&out)?;
    let stem = Path::new(&c.instance)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".to_string());
    let name = c
        .name
        .clone()
        .unwrap_or_else(|| format!("{}-{stem}", algorithm.name()));
    let config_hash = config.hash();
    let instance_hash = gi.instance.content_hash();

    let report_file = SimulateReport {
        tool_version: TOOL_VERSION.to_string(),
        config_hash: config_hash.clone(),
        instance_file: c.instance.clone(),
        instance_hash: instance_hash.clone(),
        family: gi.family.clone(),
        f: f.descriptor(),
        estimate: estimate.clone(),
        run,
    };
    let report_path = out.join(format!("{name}.report.json"));
    write_pretty_json(&report_path, &report_file)?;
    fs::write(out.join(format!("{name}.config.json")), config.to_pretty_json())?;

    let f_param = match &f {
        PerturbationFunction::Canonical { scale } => format!("{scale}"),
        _ => String::new(),
    };
    let step_field = if algorithm.randomized() {
        String::new()
    } else {
        format!("{}", c.step)
    };
    let seed_field = estimate.seed.map(|s| s.to_string()).unwrap_or_default();
    let row = format!(
        "{instance_hash},{},{},{f_param},{step_field},{seed_field},{},{},{},{},{}",
        algorithm.name(),
        f.kind_name(),
        estimate.trials,
        estimate.mean * estimate.opt_value,
        estimate.opt_value,
        estimate.mean,
        estimate.stderr
    );
    let csv_path = c
        .csv
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| out.join("results.csv"));
    append_csv(&csv_path, RESULTS_CSV_HEADER, &config_hash, &row)?;

    println!(
        "{} on {}: ratio {:.9} ± {:.3e} ({} trial{}, opt {} [{}])",
        algorithm.name(),
        c.instance,
        estimate.mean,
        estimate.stderr,
        estimate.trials,
        if estimate.trials == 1 { "" } else { "s" },
        estimate.opt_value,
        estimate.opt_source
    );
    println!(
        "report {}; csv row appended to {}",
        report_path.display(),
        csv_path.display()
    );
    Ok(())
}

// ------------------------------------------------------------ verify-bounds

#[derive(Serialize)]
struct BoundsReportFile {
    tool_version: String,
    config_hash: String,
    /// Γ = 1 − 1/e − γ, the ratio the checks target.
    gamma_target: f64,
    eq1: Option<ConstraintReport>,
    uniqueness: Option<UniquenessReport>,
    certificate: Option<BoundReport>,
    all_expected: bool,
}

fn cmd_verify_bounds(config: &ExperimentConfig, c: &VerifyBoundsConfig) -> CmdResult {
    let gamma = c.gamma.unwrap_or(0.0);
    let gamma_target = bounds::critical_ratio() - gamma;
    let mut requested = false;
    let mut all_expected = true;
    let mut eq1_report = None;
    let mut uniqueness_report = None;
    let mut certificate = None;

    let need_f = || -> Result<PerturbationFunction, CliError> {
        parse_f(c.f.as_deref().ok_or_else(|| {
            CliError::Lib(Error::Argument(
                "--eq1 and --uniqueness need --f <canonical|linear|file>".into(),
            ))
        })?)
    };

    if c.eq1 {
        requested = true;
        let f = need_f()?;
        let report = bounds::check_eq1(&f, gamma_target, c.grid)?;
        let expected = !c.expect_violation;
        let verdict = if report.pass { "PASS" } else { "VIOLATED" };
        println!(
            "eq1 f={} gamma_target={gamma_target:.10}: {verdict} (worst slack {:.6e} at alpha={:.4}, beta={:.4}; floor {:.1e})",
            f.descriptor(),
            report.worst_slack,
            report.worst_at.0,
            report.worst_at.1,
            report.tolerance
        );
        if report.pass != expected {
            all_expected = false;
        }
        eq1_report = Some(report);
    }

    if c.uniqueness {
        requested = true;
        let f = need_f()?;
        let report = bounds::check_uniqueness(&f, c.uniqueness_tolerance)?;
        println!(
            "uniqueness f={}: is_canonical={} (best scale {:.10}, max deviation {:.6e}, tolerance {:.1e})",
            f.descriptor(),
            report.is_canonical,
            report.m,
            report.max_deviation,
            c.uniqueness_tolerance
        );
        if report.is_canonical != c.expect_canonical {
            all_expected = false;
        }
        uniqueness_report = Some(report);
    }

    if let Some(delta) = c.delta {
        requested = true;
        let report = bounds::verify_gamma_infeasible(gamma, delta, c.resolution)?;
        println!(
            "certificate gamma={gamma} delta={delta}: infeasible={} conclusive={} (r={:.9}, beta*={}, I={} ± {}, upper={:.9})",
            report.infeasible,
            report.conclusive,
            report.r,
            report
                .beta_star
                .map(|b| format!("{b:.9}"))
                .unwrap_or_else(|| "none".into()),
            report
                .integral
                .map(|i| format!("{i:.9}"))
                .unwrap_or_else(|| "none".into()),
            report
                .certified_error
                .map(|e| format!("{e:.3e}"))
                .unwrap_or_else(|| "none".into()),
            report.comparison_upper
        );
        if report.conclusive && report.infeasible != c.expect_infeasible {
            all_expected = false;
        }
        certificate = Some(report);
    }

    if !requested {
        return Err(CliError::Lib(Error::Argument(
            "no checks requested; pass --eq1, --uniqueness, or --delta (with --gamma) for the certificate"
                .into(),
        )));
    }

    let inconclusive = certificate
        .as_ref()
        .is_some_and(|report| !report.conclusive);
    let file = BoundsReportFile {
        tool_version: TOOL_VERSION.to_string(),
        config_hash: config.hash(),
        gamma_target,
        eq1: eq1_report,
        uniqueness: uniqueness_report,
        certificate,
        all_expected,
    };
    if let Some(_out) = &c.out {
        let out = resolve_out(&c.out);
        fs::create_dir_all(&out)?;
        let name = c.name.clone().unwrap_or_else(|| "verify-bounds".to_string());
        write_pretty_json(&out.join(format!("{name}.report.json")), &file)?;
        fs::write(out.join(format!("{name}.config.json")), config.to_pretty_json())?;
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&file).map_err(Error::from)?
    );

    if inconclusive {
        return Err(CliError::Inconclusive(
            "the certified quadrature error swallows the decision gap; raise --resolution".into(),
        ));
    }
    if !all_expected {
        return Err(CliError::Verdict(
            "a requested check reached a conclusive verdict contrary to its expectation".into(),
        ));
    }
    Ok(())
}

// ------------------------------------------------------------ concentration

#[derive(Serialize)]
struct ConcentrationReportFile {
    tool_version: String,
    config_hash: String,
    #[serde(flatten)]
    report: pertmatch::oracle::ConcentrationReport,
}

fn cmd_concentration(config: &ExperimentConfig, c: &ConcentrationConfig) -> CmdResult {
    let report = oracle::concentration_check(c.n, c.eps, c.trials, c.seed)?;
    println!(
        "n={} eps={} trials={}: empirical {:.6} vs bound {:.6}{}",
        report.n,
        report.epsilon,
        report.trials,
        report.empirical,
        report.bound,
        if report.vacuous {
            " (bound vacuous: it claims nothing at this n)"
        } else {
            ""
        }
    );
    let config_hash = config.hash();
    if let Some(csv) = &c.csv {
        let row = format!(
            "{},{},{},{}",
            report.n, report.epsilon, report.empirical, report.bound
        );
        append_csv(Path::new(csv), CONCENTRATION_CSV_HEADER, &config_hash, &row)?;
    }
    if c.out.is_some() {
        let out = resolve_out(&c.out);
        fs::create_dir_all(&out)?;
        let name = c.name.clone().unwrap_or_else(|| "concentration".to_string());
        let file = ConcentrationReportFile {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: config_hash.clone(),
            report: report.clone(),
        };
        write_pretty_json(&out.join(format!("{name}.report.json")), &file)?;
        fs::write(out.join(format!("{name}.config.json")), config.to_pretty_json())?;
    }
    if !report.vacuous && report.empirical < report.bound {
        return Err(CliError::Verdict(format!(
            "empirical probability {:.6} fell below the guarantee {:.6}",
            report.empirical, report.bound
        )));
    }
    Ok(())
}
