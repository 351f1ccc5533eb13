//! Water-filling by perturbed spend fraction for adwords instances.
//!
//! Each offline vertex tracks its spend fraction `spent_u / B_u`. An arrival
//! pours its unit of mass in micro-quanta of at most `step`, each quantum
//! going to the neighbor maximizing `bid_{uv} * f(spent_u / B_u)` (ties to
//! the lowest id). A quantum of mass `q` adds `q * bid` to the spend, clipped
//! so budgets absorb exactly and are never overshot.

use std::time::Instant;

use crate::allocation::{Allocation, Trace, TraceEvent, TraceHeader};
use crate::error::{Error, Result};
use crate::instance::{Instance, Mode};
use crate::perturb::PerturbationFunction;

use super::seg::{MaxSegTree, EXHAUSTED};
use super::{aggregates_only, check_step, AlgorithmId, PieceHead, PieceHeap, RunReport};

const MASS_TOL: f64 = 1e-15;

/// Runs spend-fraction water-filling with the given micro-step.
pub fn run_msvv(instance: &Instance, f: &PerturbationFunction, step: f64) -> Result<RunReport> {
    run_msvv_impl(instance, f, step, false)
}

/// Same as [`run_msvv`] but records a replayable trace.
pub fn run_msvv_traced(
    instance: &Instance,
    f: &PerturbationFunction,
    step: f64,
) -> Result<RunReport> {
    run_msvv_impl(instance, f, step, true)
}

fn run_msvv_impl(
    instance: &Instance,
    f: &PerturbationFunction,
    step: f64,
    capture_trace: bool,
) -> Result<RunReport> {
    if instance.mode != Mode::Adwords {
        return Err(Error::Mode(
            "spend-fraction water-filling needs an adwords instance".into(),
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
    let mut spent = vec![0.0f64; n];
    let f0 = f.eval(0.0)?;
    let mut tree = MaxSegTree::build(&vec![f0; n]);

    let mut alloc = Allocation::new(instance);
    if aggregates_only(instance.n_online(), step, capture_trace) {
        alloc.record_aggregates_only();
    }
    let mut events = Vec::new();
    for (seq, arrival) in instance.arrivals().into_iter().enumerate() {
        let pieces = instance.arrival_pieces(arrival);
        if pieces.is_empty() {
            continue;
        }
        let mut heap = PieceHeap::new();
        for (p, piece) in pieces.iter().enumerate() {
            if let Some((fac, id)) = tree.max_in(piece.lo as usize, piece.hi as usize) {
                heap.push(PieceHead { score: piece.bid * fac, id, piece: p });
            }
        }
        let mut remaining = 1.0f64;
        while remaining > MASS_TOL {
            let head = match heap.pop() {
                Some(h) => h,
                None => break,
            };
            let piece = pieces[head.piece];
            let bid = piece.bid;
            let u = head.id as usize;
            let q = step.min(remaining);
            let headroom = budget[u] - spent[u];
            let mass;
            if headroom <= q * bid {
                // The budget absorbs exactly and the vertex retires.
                mass = headroom / bid;
                spent[u] = budget[u];
                tree.set(u, EXHAUSTED);
            } else {
                mass = q;
                spent[u] += q * bid;
                tree.set(u, f.eval(spent[u] / budget[u])?);
            }
            if mass > 0.0 {
                alloc.add(head.id, arrival.online_id, mass, bid);
                remaining -= mass;
                if capture_trace {
                    events.push(TraceEvent {
                        arrival_seq: seq as u32,
                        offline_id: head.id,
                        amount: mass,
                    });
                }
            }
            if let Some((fac, id)) = tree.max_in(piece.lo as usize, piece.hi as usize) {
                heap.push(PieceHead { score: piece.bid * fac, id, piece: head.piece });
            }
        }
    }

    let value = alloc.objective(instance);
    let trace = capture_trace.then(|| Trace {
        header: TraceHeader {
            algorithm: AlgorithmId::Msvv.name().into(),
            instance_hash: instance.content_hash(),
            f_descriptor: f.descriptor(),
            step: Some(step),
            seed: None,
        },
        events,
    });
    Ok(RunReport {
        algorithm: AlgorithmId::Msvv,
        value,
        virtual_value: None,
        step: Some(step),
        seed: None,
        allocation: alloc,
        trace,
        wall: started.elapsed(),
    })
}
