//! Online allocation algorithms driven by a perturbation function.
//!
//! All runners share the same skeleton: online vertices arrive in instance
//! order, each sees its neighbor pieces, and mass is routed to the offline
//! vertex maximizing a perturbed score. Greedy (integral) variants commit
//! whole units; water-filling variants pour micro-quanta of at most `step`.
//! Ties always break towards the lowest offline id, which makes every run
//! deterministic given its inputs.

pub mod apb;
pub mod balance;
pub mod budget_additive;
pub mod msvv;
pub mod ranking;
pub mod ranking_adwords;
pub mod seg;

pub use balance::{run_pb, run_pb_traced};
pub use budget_additive::{run_budget_additive, run_budget_additive_traced};
pub use msvv::{run_msvv, run_msvv_traced};
pub use ranking::{run_pr_integral, run_pr_integral_traced};
pub use ranking_adwords::{run_pr_adwords, run_pr_adwords_traced};

use std::collections::BinaryHeap;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, Trace};
use crate::error::{Error, Result};

/// Largest admissible water-filling step; runs reject anything coarser.
pub const MAX_STEP: f64 = 1e-2;
/// Default water-filling step used by the command-line tool.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Water-filling runs whose estimated quantum count `n_online / step`
/// exceeds this switch the allocation to aggregate recording (accumulators
/// only, no per-edge entries), keeping memory linear in the vertex count.
pub const ENTRY_RECORD_QUANTA_LIMIT: f64 = 1e7;

/// Decides whether a water-filling run should record aggregates only.
/// Tracing forces full entries, since a trace replays per-edge quanta.
pub(crate) fn aggregates_only(n_online: u32, step: f64, capture_trace: bool) -> bool {
    f64::from(n_online) / step > ENTRY_RECORD_QUANTA_LIMIT && !capture_trace
}

/// Identifies an algorithm in reports, traces and CSV rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    /// Greedy integral matching by perturbed rank score (vertex-weighted).
    PrIntegral,
    /// Water-filling by perturbed fill level (vertex-weighted).
    Pb,
    /// Greedy fractional spending by perturbed rank score (adwords).
    PrAdwords,
    /// Water-filling by perturbed spend fraction (adwords).
    Msvv,
    /// Water-filling over online-created budget stages (budgets unknown).
    BudgetAdditive,
}

impl AlgorithmId {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::PrIntegral => "pr-integral",
            AlgorithmId::Pb => "pb",
            AlgorithmId::PrAdwords => "pr-adwords",
            AlgorithmId::Msvv => "msvv",
            AlgorithmId::BudgetAdditive => "budget-additive",
        }
    }

    /// Whether the algorithm consumes random ranks.
    pub fn randomized(self) -> bool {
        matches!(self, AlgorithmId::PrIntegral | AlgorithmId::PrAdwords)
    }
}

impl std::str::FromStr for AlgorithmId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pr-integral" => AlgorithmId::PrIntegral,
            "pb" => AlgorithmId::Pb,
            "pr-adwords" => AlgorithmId::PrAdwords,
            "msvv" => AlgorithmId::Msvv,
            "budget-additive" => AlgorithmId::BudgetAdditive,
            other => {
                return Err(Error::Argument(format!(
                    "unknown algorithm {other:?} (expected pr-integral, pb, pr-adwords, msvv or budget-additive)"
                )))
            }
        })
    }
}

/// How rank-based algorithms obtain their per-offline-vertex ranks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RankAssignment {
    /// Independent uniform ranks drawn from a seeded generator, in id order.
    Random { seed: u64 },
    /// Caller-supplied ranks, one per offline vertex, each in [0, 1].
    Deterministic(Vec<f64>),
    /// Evenly spaced ranks `(i + 1) / n` for id `i`.
    UniformGrid,
}

impl RankAssignment {
    /// Materializes ranks for `n` offline vertices.
    pub fn resolve(&self, n: u32) -> Result<Vec<f64>> {
        match self {
            RankAssignment::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..n).map(|_| rng.gen::<f64>()).collect())
            }
            RankAssignment::Deterministic(ranks) => {
                if ranks.len() != n as usize {
                    return Err(Error::Argument(format!(
                        "{} ranks supplied for {} offline vertices",
                        ranks.len(),
                        n
                    )));
                }
                if ranks.iter().any(|y| !(0.0..=1.0).contains(y)) {
                    return Err(Error::Argument("ranks must lie in [0, 1]".into()));
                }
                Ok(ranks.clone())
            }
            RankAssignment::UniformGrid => {
                Ok((0..n).map(|i| (i + 1) as f64 / n as f64).collect())
            }
        }
    }

    /// Seed recorded in reports, if any.
    pub fn seed(&self) -> Option<u64> {
        match self {
            RankAssignment::Random { seed } => Some(*seed),
            _ => None,
        }
    }
}

/// Outcome of one algorithm run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub algorithm: AlgorithmId,
    /// Objective value on the instance the algorithm ran on.
    pub value: f64,
    /// Budget-additive only: value accumulated across decomposed stages.
    pub virtual_value: Option<f64>,
    /// Water-filling step, where applicable.
    pub step: Option<f64>,
    /// Rank seed, where applicable.
    pub seed: Option<u64>,
    pub allocation: Allocation,
    pub trace: Option<Trace>,
    /// Wall-clock duration; informational only and never serialized, so that
    /// replays of the same configuration produce byte-identical artifacts.
    pub wall: Duration,
}

pub(crate) fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0) || step > MAX_STEP || !step.is_finite() {
        return Err(Error::Argument(format!(
            "step must lie in (0, {MAX_STEP}], got {step}"
        )));
    }
    Ok(())
}

/// Heap entry for the per-arrival best-piece queue: highest score first,
/// ties to the lowest offline id.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PieceHead {
    pub score: f64,
    pub id: u32,
    pub piece: usize,
}

impl PartialEq for PieceHead {
    fn eq(&self, other: &Self) -> bool {
        self.score == other.score && self.id == other.id && self.piece == other.piece
    }
}
impl Eq for PieceHead {}
impl PartialOrd for PieceHead {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PieceHead {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.id.cmp(&self.id))
    }
}

pub(crate) type PieceHeap = BinaryHeap<PieceHead>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for alg in [
            AlgorithmId::PrIntegral,
            AlgorithmId::Pb,
            AlgorithmId::PrAdwords,
            AlgorithmId::Msvv,
            AlgorithmId::BudgetAdditive,
        ] {
            assert_eq!(alg.name().parse::<AlgorithmId>().unwrap(), alg);
        }
        assert!("perturbless".parse::<AlgorithmId>().is_err());
    }

    #[test]
    fn aggregate_switch_trips_on_quantum_count_not_on_traces() {
        assert!(!aggregates_only(7300, 1e-3, false)); // 7.3e6 quanta
        assert!(aggregates_only(7300, 5e-4, false)); // 1.46e7 quanta
        assert!(!aggregates_only(7300, 5e-4, true)); // traced runs keep entries
        assert!(!aggregates_only(10_000, 1e-3, false)); // exactly the limit
    }

    #[test]
    fn rank_assignment_resolution() {
        let random = RankAssignment::Random { seed: 7 };
        let a = random.resolve(100).unwrap();
        let b = random.resolve(100).unwrap();
        assert_eq!(a, b, "same seed must give the same ranks");
        assert!(a.iter().all(|y| (0.0..1.0).contains(y)));
        assert_ne!(a, RankAssignment::Random { seed: 8 }.resolve(100).unwrap());

        let grid = RankAssignment::UniformGrid.resolve(4).unwrap();
        assert_eq!(grid, vec![0.25, 0.5, 0.75, 1.0]);

        assert!(RankAssignment::Deterministic(vec![0.1, 0.2]).resolve(3).is_err());
        assert!(RankAssignment::Deterministic(vec![0.1, 1.2]).resolve(2).is_err());
        assert_eq!(
            RankAssignment::Deterministic(vec![0.1, 0.9]).resolve(2).unwrap(),
            vec![0.1, 0.9]
        );
    }

    #[test]
    fn heap_orders_by_score_then_lowest_id() {
        let mut heap = PieceHeap::new();
        heap.push(PieceHead { score: 0.5, id: 9, piece: 0 });
        heap.push(PieceHead { score: 0.7, id: 4, piece: 1 });
        heap.push(PieceHead { score: 0.7, id: 2, piece: 2 });
        assert_eq!(heap.pop().unwrap().id, 2);
        assert_eq!(heap.pop().unwrap().id, 4);
        assert_eq!(heap.pop().unwrap().id, 9);
    }

    #[test]
    fn step_bounds_enforced() {
        assert!(check_step(1e-3).is_ok());
        assert!(check_step(1e-2).is_ok());
        assert!(check_step(0.011).is_err());
        assert!(check_step(0.0).is_err());
        assert!(check_step(-1e-3).is_err());
    }
}
