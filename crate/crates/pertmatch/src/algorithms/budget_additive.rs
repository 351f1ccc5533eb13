//! Water-filling with unknown budgets, via online stage creation.
//!
//! Budgets are hidden: the algorithm only learns that a vertex's budget is
//! exceeded once the cumulative bids released by its arrived neighbors pass
//! the budget. Each offline parent is decomposed online into *stages*:
//!
//! * while a parent `u` is unrevealed, every arrival bidding `b > 0` on `u`
//!   spawns a bid-sized stage of budget `b`;
//! * at the first arrival where the released total strictly exceeds `B_u`,
//!   the parent is revealed and spawns one correction stage with the leftover
//!   budget (dropped when the leftover is zero) instead of a bid stage;
//! * revealed parents spawn nothing further.
//!
//! A stage is connected to its creating arrival and to all later arrivals
//! that bid on the parent, never to earlier ones. Mass then pours exactly as
//! in spend-fraction water-filling, treating stages as offline vertices with
//! known budgets; ties break to the lowest stage id (creation order).
//!
//! The run reports both the *virtual* value (sum of stage spends) and the
//! *actual* value of the induced allocation on the true instance. Stage
//! budgets of a parent never sum past the true budget, so the two agree here;
//! the actual value can only be larger, never smaller.

use std::time::Instant;

use crate::allocation::{Allocation, Trace, TraceEvent, TraceHeader};
use crate::error::{Error, Result};
use crate::instance::{Instance, Mode};
use crate::perturb::PerturbationFunction;

use super::{check_step, AlgorithmId, RunReport};

const MASS_TOL: f64 = 1e-15;

/// One decomposed stage of an offline parent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stage {
    pub parent: u32,
    pub budget: f64,
    /// Arrival sequence number at which the stage was created; the stage
    /// accepts mass from this arrival onwards.
    pub created_seq: u32,
}

/// Replays the revelation process offline and returns all stages in creation
/// order. The online runner creates exactly this schedule; the static
/// decomposition transform reuses it.
pub fn stage_schedule(instance: &Instance) -> Result<Vec<Stage>> {
    if instance.mode != Mode::BudgetAdditiveUnknown {
        return Err(Error::Mode(
            "stage decomposition applies to budget-additive instances with unknown budgets".into(),
        ));
    }
    instance.validate()?;
    let n = instance.n_offline() as usize;
    let mut budget = vec![0.0f64; n];
    let offsets = instance.offline_offsets();
    for (b, block) in instance.offline_blocks.iter().enumerate() {
        let cap = if block.unlimited {
            instance.total_bid_value() + 1.0
        } else {
            block.weight_or_budget
        };
        for u in offsets[b]..offsets[b + 1] {
            budget[u as usize] = cap;
        }
    }
    let mut released = vec![0.0f64; n];
    let mut revealed = vec![false; n];
    let mut stages = Vec::new();
    for (seq, arrival) in instance.arrivals().into_iter().enumerate() {
        for piece in instance.arrival_pieces(arrival) {
            for u in piece.lo..piece.hi {
                let ui = u as usize;
                if revealed[ui] {
                    continue;
                }
                released[ui] += piece.bid;
                if released[ui] > budget[ui] {
                    revealed[ui] = true;
                    let leftover = budget[ui] - (released[ui] - piece.bid);
                    if leftover > 0.0 {
                        stages.push(Stage {
                            parent: u,
                            budget: leftover,
                            created_seq: seq as u32,
                        });
                    }
                } else {
                    stages.push(Stage {
                        parent: u,
                        budget: piece.bid,
                        created_seq: seq as u32,
                    });
                }
            }
        }
    }
    Ok(stages)
}

/// Runs the unknown-budget water-filler.
pub fn run_budget_additive(
    instance: &Instance,
    f: &PerturbationFunction,
    step: f64,
) -> Result<RunReport> {
    run_budget_additive_impl(instance, f, step, false)
}

/// Same as [`run_budget_additive`] but records a replayable trace (events
/// reference parent offline ids).
pub fn run_budget_additive_traced(
    instance: &Instance,
    f: &PerturbationFunction,
    step: f64,
) -> Result<RunReport> {
    run_budget_additive_impl(instance, f, step, true)
}

fn run_budget_additive_impl(
    instance: &Instance,
    f: &PerturbationFunction,
    step: f64,
    capture_trace: bool,
) -> Result<RunReport> {
    if instance.mode != Mode::BudgetAdditiveUnknown {
        return Err(Error::Mode(
            "the unknown-budget water-filler needs a budget-additive instance".into(),
        ));
    }
    check_step(step)?;
    instance.validate()?;
    let started = Instant::now();
    let n = instance.n_offline() as usize;

    let mut budget = vec![0.0f64; n];
    let offsets = instance.offline_offsets();
    for (b, block) in instance.offline_blocks.iter().enumerate() {
        let cap = if block.unlimited {
            instance.total_bid_value() + 1.0
        } else {
            block.weight_or_budget
        };
        for u in offsets[b]..offsets[b + 1] {
            budget[u as usize] = cap;
        }
    }
    let mut released = vec![0.0f64; n];
    let mut revealed = vec![false; n];
    let mut stages: Vec<Stage> = Vec::new();
    let mut stage_spent: Vec<f64> = Vec::new();
    let mut stages_of: Vec<Vec<usize>> = vec![Vec::new(); n];

    let mut alloc = Allocation::new(instance);
    let mut events = Vec::new();
    for (seq, arrival) in instance.arrivals().into_iter().enumerate() {
        let pieces = instance.arrival_pieces(arrival);
        // Phase 1: release bids and create stages for this arrival.
        for piece in &pieces {
            for u in piece.lo..piece.hi {
                let ui = u as usize;
                if revealed[ui] {
                    continue;
                }
                released[ui] += piece.bid;
                let new_budget = if released[ui] > budget[ui] {
                    revealed[ui] = true;
                    budget[ui] - (released[ui] - piece.bid)
                } else {
                    piece.bid
                };
                if new_budget > 0.0 {
                    stages.push(Stage {
                        parent: u,
                        budget: new_budget,
                        created_seq: seq as u32,
                    });
                    stage_spent.push(0.0);
                    stages_of[ui].push(stages.len() - 1);
                }
            }
        }
        // Phase 2: pour over all live stages of the arrival's neighbors.
        let mut remaining = 1.0f64;
        while remaining > MASS_TOL {
            let mut best: Option<(f64, usize, f64)> = None; // (score, stage, bid)
            for piece in &pieces {
                for u in piece.lo..piece.hi {
                    for &s in &stages_of[u as usize] {
                        if stage_spent[s] >= stages[s].budget {
                            continue;
                        }
                        let score = piece.bid * f.eval(stage_spent[s] / stages[s].budget)?;
                        let better = match best {
                            None => true,
                            Some((bs, bi, _)) => score > bs || (score == bs && s < bi),
                        };
                        if better {
                            best = Some((score, s, piece.bid));
                        }
                    }
                }
            }
            let (_, s, bid) = match best {
                Some(b) => b,
                None => break,
            };
            let q = step.min(remaining);
            let headroom = stages[s].budget - stage_spent[s];
            let mass;
            if headroom <= q * bid {
                mass = headroom / bid;
                stage_spent[s] = stages[s].budget;
            } else {
                mass = q;
                stage_spent[s] += q * bid;
            }
            if mass > 0.0 {
                alloc.add(stages[s].parent, arrival.online_id, mass, bid);
                remaining -= mass;
                if capture_trace {
                    events.push(TraceEvent {
                        arrival_seq: seq as u32,
                        offline_id: stages[s].parent,
                        amount: mass,
                    });
                }
            }
        }
    }

    let virtual_value: f64 = stage_spent.iter().sum();
    let value = alloc.objective(instance);
    debug_assert!(
        value >= virtual_value - 1e-9,
        "actual value {value} fell below virtual value {virtual_value}"
    );
    let trace = capture_trace.then(|| Trace {
        header: TraceHeader {
            algorithm: AlgorithmId::BudgetAdditive.name().into(),
            instance_hash: instance.content_hash(),
            f_descriptor: f.descriptor(),
            step: Some(step),
            seed: None,
        },
        events,
    });
    Ok(RunReport {
        algorithm: AlgorithmId::BudgetAdditive,
        value,
        virtual_value: Some(virtual_value),
        step: Some(step),
        seed: None,
        allocation: alloc,
        trace,
        wall: started.elapsed(),
    })
}
