//! `pertmatch`: reproducible experiments for perturbed online matching.
//!
//! Every invocation resolves its flags into a serializable experiment
//! configuration, writes that configuration next to its outputs, and embeds
//! the configuration hash and tool version in every artifact. Replaying a
//! stored configuration (`pertmatch --config file.json`) reproduces the
//! outputs byte for byte (append-only CSVs receive identical rows).
//!
//! Exit codes: 0 success / expected verdict, 1 conclusive but unexpected
//! verdict, 2 argument error, 3 mode error, 4 inconclusive numerics.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pertmatch_cli::config::{
    ConcentrationConfig, ExperimentConfig, FamilySpec, GenerateConfig, SimulateConfig,
    VerifyBoundsConfig,
};
use pertmatch::algorithms::DEFAULT_STEP;

#[derive(Parser)]
#[command(
    name = "pertmatch",
    version,
    about = "Perturbed online-matching experiments: generate instances, run algorithms, verify bounds",
    after_help = "Output files land in --out, else $PERTMATCH_OUT, else the current directory."
)]
struct Cli {
    /// Replay a stored experiment configuration instead of a subcommand.
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file plus sidecar metadata.
    Generate(GenerateArgs),
    /// Run one algorithm on an instance file; write a report and a CSV row.
    Simulate(SimulateArgs),
    /// Check feasibility constraints and the ratio-infeasibility certificate.
    VerifyBounds(VerifyBoundsArgs),
    /// Order-statistics concentration experiment.
    Concentration(ConcentrationArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    family: FamilyCmd,
    /// Output directory (default: $PERTMATCH_OUT, then `.`).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Base name for the generated files (default: the family name).
    #[arg(long, global = true)]
    name: Option<String>,
}

#[derive(Subcommand)]
enum FamilyCmd {
    /// Layered staircase with a closed-form optimum (vertex-weighted).
    #[command(name = "layered-triangle", alias = "instance1")]
    LayeredTriangle {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        /// Perturbation function: canonical, canonical:<scale>, linear, or a file.
        #[arg(long, default_value = "canonical")]
        f: String,
    },
    /// One unlimited spender plus unit-budget vertices over two phases.
    #[command(name = "two-phase-spender", alias = "instance2")]
    TwoPhaseSpender {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: u32,
        /// Optional second knee in [0, alpha] for the generalized family.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value = "canonical")]
        f: String,
    },
    /// Copy blow-up of an instance file; preserves the optimum.
    #[command(name = "duplicate")]
    Duplicate {
        /// Parent instance JSON file.
        #[arg(long)]
        input: String,
        #[arg(long)]
        copies: u32,
    },
    /// Staircase matching instance, unit or per-vertex weights.
    #[command(name = "triangle")]
    Triangle {
        #[arg(long)]
        n: u32,
        /// Comma-separated offline weights (defaults to all ones).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Unit staircase with unit budgets in a budgeted mode.
    #[command(name = "budgeted-triangle")]
    BudgetedTriangle {
        #[arg(long)]
        n: u32,
        /// adwords or budget-additive-unknown.
        #[arg(long, default_value = "adwords")]
        mode: String,
    },
    /// Seeded random block instance.
    #[command(name = "random")]
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n_offline: u32,
        #[arg(long)]
        n_online: u32,
        /// vertex-weighted, adwords or budget-additive-unknown.
        #[arg(long, default_value = "vertex-weighted")]
        mode: String,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Instance JSON file; a `<stem>.meta.json` sidecar is picked up when present.
    #[arg(long)]
    instance: String,
    /// Algorithm: pr-integral, pb, pr-adwords, msvv or budget-additive.
    #[arg(long)]
    alg: String,
    /// Perturbation function: canonical, canonical:<scale>, linear, or a file.
    #[arg(long, default_value = "canonical")]
    f: String,
    /// Water-filling step (deterministic fractional algorithms).
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    /// Trials for randomized algorithms (deterministic ones demand 1).
    #[arg(long, default_value_t = 1)]
    trials: u32,
    /// Master seed; per-trial seeds derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rank assignment for randomized algorithms: random or grid.
    #[arg(long, default_value = "random")]
    ranks: String,
    /// Average the budgeted rank matcher over a midpoint grid of this many
    /// ranks for the unlimited spender (two-phase instances only).
    #[arg(long)]
    y0_grid: Option<u32>,
    /// Ratio denominator: auto, closed-form, exact, or a number.
    #[arg(long, default_value = "auto")]
    opt: String,
    /// Output directory (default: $PERTMATCH_OUT, then `.`).
    #[arg(long)]
    out: Option<String>,
    /// Base name for report files (default: `<alg>-<instance stem>`).
    #[arg(long)]
    name: Option<String>,
    /// Results CSV to append to (default: `<out>/results.csv`).
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args)]
struct VerifyBoundsArgs {
    /// Scan the water-filling feasibility constraint over (α, β).
    #[arg(long)]
    eq1: bool,
    /// Measure how far --f is from a scaled canonical function.
    #[arg(long)]
    uniqueness: bool,
    /// Ratio offset γ: checks target Γ = 1 − 1/e − γ (default γ = 0).
    #[arg(long)]
    gamma: Option<f64>,
    /// Certificate slack; providing it runs the infeasibility certificate.
    #[arg(long)]
    delta: Option<f64>,
    /// Perturbation function for --eq1 / --uniqueness.
    #[arg(long)]
    f: Option<String>,
    /// Grid resolution for constraint scans.
    #[arg(long, default_value_t = 400)]
    grid: u32,
    /// Simpson subinterval budget for the certificate quadrature.
    #[arg(long, default_value_t = 1000)]
    resolution: u32,
    #[arg(long, default_value_t = 1e-6)]
    uniqueness_tolerance: f64,
    /// Expect --eq1 to find a violation instead of passing.
    #[arg(long)]
    expect_violation: bool,
    /// Expected certificate verdict.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    expect_infeasible: bool,
    /// Expected uniqueness verdict.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    expect_canonical: bool,
    /// Directory for report files (reports print to stdout regardless).
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct ConcentrationArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the report file.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    name: Option<String>,
    /// CSV of (n, eps, empirical, bound) rows to append to.
    #[arg(long)]
    csv: Option<String>,
}

/// Pins the output directory into the stored config: an explicit flag wins,
/// else the current `$PERTMATCH_OUT`, so replays do not depend on the
/// environment at replay time.
fn pin_out(out: Option<String>) -> Option<String> {
    out.or_else(|| std::env::var("PERTMATCH_OUT").ok().filter(|v| !v.is_empty()))
}

fn family_spec(cmd: FamilyCmd) -> FamilySpec {
    match cmd {
        FamilyCmd::LayeredTriangle { alpha, beta, n, m, f } => {
            FamilySpec::LayeredTriangle { alpha, beta, n, m, f }
        }
        FamilyCmd::TwoPhaseSpender { alpha, n, beta, f } => {
            FamilySpec::TwoPhaseSpender { alpha, n, beta, f }
        }
        FamilyCmd::Duplicate { input, copies } => FamilySpec::Duplicated { input, copies },
        FamilyCmd::Triangle { n, weights } => FamilySpec::UpperTriangle { n, weights },
        FamilyCmd::BudgetedTriangle { n, mode } => FamilySpec::BudgetedTriangle { n, mode },
        FamilyCmd::Random { seed, n_offline, n_online, mode } => {
            FamilySpec::Random { seed, n_offline, n_online, mode }
        }
    }
}

fn build_config(command: Command) -> ExperimentConfig {
    match command {
        Command::Generate(args) => ExperimentConfig::Generate(GenerateConfig {
            source: family_spec(args.family),
            out: pin_out(args.out),
            name: args.name,
        }),
        Command::Simulate(args) => ExperimentConfig::Simulate(SimulateConfig {
            instance: args.instance,
            algorithm: args.alg,
            f: args.f,
            step: args.step,
            trials: args.trials,
            seed: args.seed,
            ranks: args.ranks,
            y0_grid: args.y0_grid,
            opt: args.opt,
            out: pin_out(args.out),
            name: args.name,
            csv: args.csv,
        }),
        Command::VerifyBounds(args) => ExperimentConfig::VerifyBounds(VerifyBoundsConfig {
            eq1: args.eq1,
            uniqueness: args.uniqueness,
            gamma: args.gamma,
            delta: args.delta,
            f: args.f,
            grid: args.grid,
            resolution: args.resolution,
            uniqueness_tolerance: args.uniqueness_tolerance,
            expect_violation: args.expect_violation,
            expect_infeasible: args.expect_infeasible,
            expect_canonical: args.expect_canonical,
            out: pin_out(args.out),
            name: args.name,
        }),
        Command::Concentration(args) => ExperimentConfig::Concentration(ConcentrationConfig {
            n: args.n,
            eps: args.eps,
            trials: args.trials,
            seed: args.seed,
            out: pin_out(args.out),
            name: args.name,
            csv: args.csv,
        }),
    }
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (`pertmatch ... | head`) instead of
    // panicking in println!.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let config = match (cli.config, cli.command) {
        (Some(path), None) => {
            let text = match fs::read_to_string(&path) {
                Ok(text) => text,
                Err(err) => {
                    eprintln!("cannot read config {}: {err}", path.display());
                    return ExitCode::from(2);
                }
            };
            match serde_json::from_str::<ExperimentConfig>(&text) {
                Ok(config) => config,
                Err(err) => {
                    eprintln!("bad config {}: {err}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
        (None, Some(command)) => build_config(command),
        (Some(_), Some(_)) => {
            eprintln!("--config replaces the subcommand; pass one or the other");
            return ExitCode::from(2);
        }
        (None, None) => {
            eprintln!("nothing to do: pass a subcommand or --config <file> (see --help)");
            return ExitCode::from(2);
        }
    };
    match pertmatch_cli::commands::execute(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_resolve_into_configs() {
        let cli = Cli::parse_from([
            "pertmatch",
            "generate",
            "instance1",
            "--alpha",
            "0.5",
            "--beta",
            "0.5",
            "--n",
            "200",
            "--m",
            "20",
        ]);
        match build_config(cli.command.unwrap()) {
            ExperimentConfig::Generate(g) => match g.source {
                FamilySpec::LayeredTriangle { alpha, beta, n, m, f } => {
                    assert_eq!((alpha, beta, n, m), (0.5, 0.5, 200, 20));
                    assert_eq!(f, "canonical");
                }
                other => panic!("wrong family: {other:?}"),
            },
            other => panic!("wrong subcommand: {other:?}"),
        }
    }

    #[test]
    fn simulate_flags_cover_the_contract_examples() {
        let cli = Cli::parse_from([
            "pertmatch",
            "simulate",
            "--instance",
            "g.json",
            "--alg",
            "pr-adwords",
            "--ranks",
            "grid",
            "--y0-grid",
            "2000",
        ]);
        match build_config(cli.command.unwrap()) {
            ExperimentConfig::Simulate(s) => {
                assert_eq!(s.algorithm, "pr-adwords");
                assert_eq!(s.ranks, "grid");
                assert_eq!(s.y0_grid, Some(2000));
                assert_eq!(s.step, DEFAULT_STEP);
            }
            other => panic!("wrong subcommand: {other:?}"),
        }
    }
}
