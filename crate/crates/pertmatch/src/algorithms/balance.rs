//! Perturbed water-filling for vertex-weighted instances.
//!
//! Each offline vertex `u` has a fill level `x_u ∈ [0, 1]`. An arriving
//! online vertex pours its unit of mass in micro-quanta of at most `step`;
//! every quantum goes to the neighbor maximizing `w_u * f(x_u)` (ties to the
//! lowest id), clipped so fills never exceed one. Repeated argmax pours level
//! tied vertices against each other, so equal-key neighbors fill in
//! round-robin fashion at quantum granularity.

use std::time::Instant;

use crate::allocation::{Allocation, Trace, TraceEvent, TraceHeader};
use crate::error::{Error, Result};
use crate::instance::{Instance, Mode};
use crate::perturb::PerturbationFunction;

use super::seg::{MaxSegTree, EXHAUSTED};
use super::{aggregates_only, check_step, AlgorithmId, PieceHead, PieceHeap, RunReport};

/// Fill levels this close to 1 count as saturated.
const FULL_TOL: f64 = 1e-12;

/// Runs perturbed water-filling with the given micro-step.
pub fn run_pb(instance: &Instance, f: &PerturbationFunction, step: f64) -> Result<RunReport> {
    run_pb_impl(instance, f, step, false)
}

/// Same as [`run_pb`] but records a replayable trace (one event per quantum;
/// intended for small instances).
pub fn run_pb_traced(
    instance: &Instance,
    f: &PerturbationFunction,
    step: f64,
) -> Result<RunReport> {
    run_pb_impl(instance, f, step, true)
}

fn run_pb_impl(
    instance: &Instance,
    f: &PerturbationFunction,
    step: f64,
    capture_trace: bool,
) -> Result<RunReport> {
    if instance.mode != Mode::VertexWeighted {
        return Err(Error::Mode(
            "perturbed water-filling needs a vertex-weighted instance".into(),
        ));
    }
    check_step(step)?;
    instance.validate()?;
    let started = Instant::now();
    let n = instance.n_offline() as usize;

    let offsets = instance.offline_offsets();
    let mut weight = vec![0.0f64; n];
    for (b, block) in instance.offline_blocks.iter().enumerate() {
        for u in offsets[b]..offsets[b + 1] {
            weight[u as usize] = block.weight_or_budget;
        }
    }
    let mut fill = vec![0.0f64; n];
    let f0 = f.eval(0.0)?;
    let keys: Vec<f64> = weight.iter().map(|w| w * f0).collect();
    let mut tree = MaxSegTree::build(&keys);

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
        // One heap entry per piece holding that piece's current best vertex.
        // Pieces are disjoint, so pouring only invalidates the popped entry.
        let mut heap = PieceHeap::new();
        for (p, piece) in pieces.iter().enumerate() {
            if let Some((key, id)) = tree.max_in(piece.lo as usize, piece.hi as usize) {
                heap.push(PieceHead { score: key, id, piece: p });
            }
        }
        let mut remaining = 1.0f64;
        while remaining > FULL_TOL {
            let head = match heap.pop() {
                Some(h) => h,
                None => break,
            };
            let u = head.id as usize;
            let q = step.min(remaining).min(1.0 - fill[u]);
            if q > 0.0 {
                fill[u] += q;
                remaining -= q;
                alloc.add(head.id, arrival.online_id, q, weight[u]);
                if capture_trace {
                    events.push(TraceEvent {
                        arrival_seq: seq as u32,
                        offline_id: head.id,
                        amount: q,
                    });
                }
            }
            if fill[u] >= 1.0 - FULL_TOL {
                tree.set(u, EXHAUSTED);
            } else {
                tree.set(u, weight[u] * f.eval(fill[u])?);
            }
            let piece = pieces[head.piece];
            if let Some((key, id)) = tree.max_in(piece.lo as usize, piece.hi as usize) {
                heap.push(PieceHead { score: key, id, piece: head.piece });
            }
        }
    }

    let value = alloc.objective(instance);
    let trace = capture_trace.then(|| Trace {
        header: TraceHeader {
            algorithm: AlgorithmId::Pb.name().into(),
            instance_hash: instance.content_hash(),
            f_descriptor: f.descriptor(),
            step: Some(step),
            seed: None,
        },
        events,
    });
    Ok(RunReport {
        algorithm: AlgorithmId::Pb,
        value,
        virtual_value: None,
        step: Some(step),
        seed: None,
        allocation: alloc,
        trace,
        wall: started.elapsed(),
    })
}
