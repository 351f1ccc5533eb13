//! Perturbed greedy integral matching for vertex-weighted instances.
//!
//! Every offline vertex `u` draws a rank `y_u`; an arriving online vertex is
//! matched to the unmatched neighbor maximizing `w_u * f(y_u)`, ties to the
//! lowest id, and stays unmatched only when all neighbors are taken.

use std::time::Instant;

use crate::allocation::{Allocation, Trace, TraceEvent, TraceHeader};
use crate::error::{Error, Result};
use crate::instance::{Instance, Mode};
use crate::perturb::PerturbationFunction;

use super::seg::{MaxSegTree, EXHAUSTED};
use super::{AlgorithmId, RankAssignment, RunReport};

/// Runs the integral perturbed-rank matcher.
pub fn run_pr_integral(
    instance: &Instance,
    f: &PerturbationFunction,
    ranks: &RankAssignment,
) -> Result<RunReport> {
    run_pr_integral_impl(instance, f, ranks, false)
}

/// Same as [`run_pr_integral`] but records a replayable trace.
pub fn run_pr_integral_traced(
    instance: &Instance,
    f: &PerturbationFunction,
    ranks: &RankAssignment,
) -> Result<RunReport> {
    run_pr_integral_impl(instance, f, ranks, true)
}

fn run_pr_integral_impl(
    instance: &Instance,
    f: &PerturbationFunction,
    ranks: &RankAssignment,
    capture_trace: bool,
) -> Result<RunReport> {
    if instance.mode != Mode::VertexWeighted {
        return Err(Error::Mode(
            "integral perturbed-rank matching needs a vertex-weighted instance".into(),
        ));
    }
    instance.validate()?;
    let started = Instant::now();
    let n = instance.n_offline() as usize;
    let rank_values = ranks.resolve(n as u32)?;

    // Static key: w_u * f(y_u). Weights are block-constant, so expand them.
    let offsets = instance.offline_offsets();
    let mut weight = vec![0.0f64; n];
    for (b, block) in instance.offline_blocks.iter().enumerate() {
        for u in offsets[b]..offsets[b + 1] {
            weight[u as usize] = block.weight_or_budget;
        }
    }
    let mut keys = Vec::with_capacity(n);
    for u in 0..n {
        keys.push(weight[u] * f.eval(rank_values[u])?);
    }
    let mut tree = MaxSegTree::build(&keys);

    let mut alloc = Allocation::new(instance);
    let mut events = Vec::new();
    for (seq, arrival) in instance.arrivals().into_iter().enumerate() {
        let mut best: Option<(f64, u32)> = None;
        for piece in instance.arrival_pieces(arrival) {
            if let Some((key, id)) = tree.max_in(piece.lo as usize, piece.hi as usize) {
                best = match best {
                    None => Some((key, id)),
                    Some((bk, bi)) => {
                        if key > bk || (key == bk && id < bi) {
                            Some((key, id))
                        } else {
                            Some((bk, bi))
                        }
                    }
                };
            }
        }
        if let Some((_, u)) = best {
            tree.set(u as usize, EXHAUSTED);
            alloc.add(u, arrival.online_id, 1.0, weight[u as usize]);
            if capture_trace {
                events.push(TraceEvent {
                    arrival_seq: seq as u32,
                    offline_id: u,
                    amount: 1.0,
                });
            }
        }
    }

    let value = alloc.objective(instance);
    let trace = capture_trace.then(|| Trace {
        header: TraceHeader {
            algorithm: AlgorithmId::PrIntegral.name().into(),
            instance_hash: instance.content_hash(),
            f_descriptor: f.descriptor(),
            step: None,
            seed: ranks.seed(),
        },
        events,
    });
    Ok(RunReport {
        algorithm: AlgorithmId::PrIntegral,
        value,
        virtual_value: None,
        step: None,
        seed: ranks.seed(),
        allocation: alloc,
        trace,
        wall: started.elapsed(),
    })
}
