//! Approximate water-filling checker.
//!
//! A pour trace on a vertex-weighted instance satisfies the ε-relaxed
//! water-filling property when every pour into `u` happens while
//! `w_u * f⁺(x_u - ε) >= w_a * f⁺(x_a + ε)` for all unsaturated neighbors
//! `a` of the arriving vertex, where fills are taken just before the pour and
//! `f⁺` extends the perturbation function by `+∞` below 0 and `0` above 1.
//! Exact water-filling traces pass for any ε >= 0; integral greedy runs on an
//! instance with duplicated offline vertices pass after projection for ε of
//! order the rank spacing.

use serde::Serialize;

use crate::allocation::{Trace, TraceEvent};
use crate::error::{Error, Result};
use crate::instance::{Instance, Mode};
use crate::perturb::PerturbationFunction;

/// One failed comparison: at `event`, the neighbor `witness` had a strictly
/// better relaxed score than the vertex receiving the pour.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ApbViolation {
    pub event: usize,
    pub poured_into: u32,
    pub witness: u32,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of an ε-water-filling check.
#[derive(Clone, Debug, Serialize)]
pub struct ApbReport {
    pub epsilon: f64,
    pub checked_events: usize,
    pub violations: Vec<ApbViolation>,
    pub valid: bool,
}

/// Relaxed perturbed score: `w * f(x)` with `f` extended by +∞ below zero
/// and 0 above one.
fn extended_score(f: &PerturbationFunction, w: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        Ok(f64::INFINITY)
    } else if x > 1.0 {
        Ok(0.0)
    } else {
        Ok(w * f.eval(x)?)
    }
}

/// Replays `trace` on `instance` and checks the ε-relaxed water-filling
/// condition before every pour. Also validates that pours follow existing
/// edges and never overfill a vertex.
pub fn check_apb_trace(
    instance: &Instance,
    f: &PerturbationFunction,
    trace: &Trace,
    epsilon: f64,
) -> Result<ApbReport> {
    if instance.mode != Mode::VertexWeighted {
        return Err(Error::Mode(
            "the water-filling checker applies to vertex-weighted instances".into(),
        ));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Argument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    instance.validate()?;
    let n = instance.n_offline() as usize;
    let offsets = instance.offline_offsets();
    let mut weight = vec![0.0f64; n];
    for (b, block) in instance.offline_blocks.iter().enumerate() {
        for u in offsets[b]..offsets[b + 1] {
            weight[u as usize] = block.weight_or_budget;
        }
    }
    let arrivals = instance.arrivals();
    let mut fill = vec![0.0f64; n];
    let mut violations = Vec::new();
    let mut last_seq = 0u32;
    for (idx, event) in trace.events.iter().enumerate() {
        let TraceEvent { arrival_seq, offline_id, amount } = *event;
        if arrival_seq < last_seq {
            return Err(Error::Format(format!(
                "trace event {idx} goes back in arrival order"
            )));
        }
        last_seq = arrival_seq;
        let arrival = *arrivals.get(arrival_seq as usize).ok_or_else(|| {
            Error::Format(format!("trace event {idx} references arrival {arrival_seq}"))
        })?;
        if !(amount >= 0.0) || amount > 1.0 + 1e-12 {
            return Err(Error::Format(format!(
                "trace event {idx} pours invalid amount {amount}"
            )));
        }
        let pieces = instance.arrival_pieces(arrival);
        let mut on_edge = false;
        for piece in &pieces {
            if (piece.lo..piece.hi).contains(&offline_id) {
                on_edge = true;
                break;
            }
        }
        if !on_edge {
            return Err(Error::Format(format!(
                "trace event {idx} pours along missing edge ({offline_id}, arrival {arrival_seq})"
            )));
        }
        let ui = offline_id as usize;
        if fill[ui] + amount > 1.0 + 1e-9 {
            return Err(Error::Format(format!(
                "trace event {idx} overfills vertex {offline_id}"
            )));
        }
        // The relaxed optimality condition, evaluated before the pour.
        let lhs = extended_score(f, weight[ui], fill[ui] - epsilon)?;
        for piece in &pieces {
            for a in piece.lo..piece.hi {
                let ai = a as usize;
                if fill[ai] >= 1.0 - 1e-12 {
                    continue; // saturated neighbors are out of the race
                }
                let rhs = extended_score(f, weight[ai], fill[ai] + epsilon)?;
                if lhs < rhs {
                    violations.push(ApbViolation {
                        event: idx,
                        poured_into: offline_id,
                        witness: a,
                        lhs,
                        rhs,
                    });
                }
            }
        }
        fill[ui] += amount;
    }
    Ok(ApbReport {
        epsilon,
        checked_events: trace.events.len(),
        valid: violations.is_empty(),
        violations,
    })
}

/// Projects a trace recorded on an instance whose offline vertices were
/// duplicated `copies` times (copy ids laid out parent-major, so parent `u`
/// owns ids `u * copies .. (u + 1) * copies`) back onto the parent instance:
/// each unit pour into a copy becomes a `1 / copies` pour into its parent.
pub fn project_duplicate_trace(trace: &Trace, copies: u32, parent_hash: &str) -> Result<Trace> {
    if copies == 0 {
        return Err(Error::Argument("copies must be positive".into()));
    }
    let mut projected = trace.clone();
    projected.header.instance_hash = parent_hash.to_string();
    for event in &mut projected.events {
        event.offline_id /= copies;
        event.amount /= copies as f64;
    }
    Ok(projected)
}

/// Largest deviation between the sorted ranks of each parent's copies and the
/// uniform grid `i / copies`; the duplicate-projection argument needs this to
/// be at most ε / 2.
pub fn copy_rank_deviation(ranks: &[f64], copies: u32) -> Result<f64> {
    let c = copies as usize;
    if c == 0 || ranks.len() % c != 0 {
        return Err(Error::Argument(format!(
            "{} ranks do not split into groups of {copies}",
            ranks.len()
        )));
    }
    let mut worst = 0.0f64;
    for parent in ranks.chunks(c) {
        let mut sorted = parent.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, y) in sorted.iter().enumerate() {
            let target = (i + 1) as f64 / c as f64;
            worst = worst.max((y - target).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::balance::run_pb_traced;
    use crate::algorithms::RankAssignment;
    use crate::instance::{Bids, EdgeBlock, OfflineBlock, OnlineBlock, Pattern};

    fn complete_vw(n_off: u32, n_on: u32) -> Instance {
        Instance {
            mode: Mode::VertexWeighted,
            offline_blocks: vec![OfflineBlock {
                count: n_off,
                weight_or_budget: 1.0,
                budget_known: true,
                unlimited: false,
            }],
            online_blocks: vec![OnlineBlock { count: n_on, arrival_rank: 0 }],
            edges: vec![EdgeBlock {
                offline_block: 0,
                online_block: 0,
                pattern: Pattern::Complete,
                bid: Bids::Uniform(1.0),
            }],
        }
    }

    #[test]
    fn exact_water_filling_passes_at_epsilon_zero() {
        let inst = complete_vw(3, 4);
        let f = PerturbationFunction::canonical_unit();
        let report = run_pb_traced(&inst, &f, 1e-2).unwrap();
        let check = check_apb_trace(&inst, &f, report.trace.as_ref().unwrap(), 0.0).unwrap();
        assert!(check.valid, "violations: {:?}", check.violations);
        assert!(check.checked_events > 0);
        // A fortiori for positive epsilon.
        let check = check_apb_trace(&inst, &f, report.trace.as_ref().unwrap(), 0.05).unwrap();
        assert!(check.valid);
    }

    #[test]
    fn wrong_order_pours_are_flagged() {
        let inst = complete_vw(2, 1);
        let f = PerturbationFunction::canonical_unit();
        // Pour everything into vertex 1 while vertex 0 sits empty: after the
        // first quantum the condition fails for small epsilon.
        let trace = Trace {
            header: crate::allocation::TraceHeader {
                algorithm: "pb".into(),
                instance_hash: inst.content_hash(),
                f_descriptor: f.descriptor(),
                step: Some(1e-2),
                seed: None,
            },
            events: (0..100)
                .map(|_| TraceEvent { arrival_seq: 0, offline_id: 1, amount: 0.01 })
                .collect(),
        };
        let check = check_apb_trace(&inst, &f, &trace, 1e-6).unwrap();
        assert!(!check.valid);
        assert!(check.violations.iter().all(|v| v.witness == 0));
        // A generous epsilon forgives a bounded imbalance.
        let check = check_apb_trace(&inst, &f, &trace, 0.99).unwrap();
        assert!(check.valid);
    }

    #[test]
    fn structural_errors_are_rejected_not_flagged() {
        let inst = complete_vw(2, 1);
        let f = PerturbationFunction::canonical_unit();
        let mk = |events: Vec<TraceEvent>| Trace {
            header: crate::allocation::TraceHeader {
                algorithm: "pb".into(),
                instance_hash: inst.content_hash(),
                f_descriptor: f.descriptor(),
                step: None,
                seed: None,
            },
            events,
        };
        // Missing edge (offline id out of range of the arrival's pieces).
        let t = mk(vec![TraceEvent { arrival_seq: 0, offline_id: 7, amount: 0.1 }]);
        assert!(check_apb_trace(&inst, &f, &t, 0.0).is_err());
        // Overfill.
        let t = mk(vec![
            TraceEvent { arrival_seq: 0, offline_id: 0, amount: 0.9 },
            TraceEvent { arrival_seq: 0, offline_id: 0, amount: 0.9 },
        ]);
        assert!(check_apb_trace(&inst, &f, &t, 0.0).is_err());
        // Negative epsilon.
        let t = mk(vec![]);
        assert!(check_apb_trace(&inst, &f, &t, -0.1).is_err());
    }

    #[test]
    fn projection_scales_ids_and_amounts() {
        let trace = Trace {
            header: crate::allocation::TraceHeader {
                algorithm: "pr-integral".into(),
                instance_hash: "copyhash".into(),
                f_descriptor: "linear".into(),
                step: None,
                seed: Some(3),
            },
            events: vec![
                TraceEvent { arrival_seq: 0, offline_id: 7, amount: 1.0 },
                TraceEvent { arrival_seq: 1, offline_id: 2, amount: 1.0 },
            ],
        };
        let projected = project_duplicate_trace(&trace, 4, "parenthash").unwrap();
        assert_eq!(projected.header.instance_hash, "parenthash");
        assert_eq!(projected.events[0].offline_id, 1); // 7 / 4
        assert_eq!(projected.events[1].offline_id, 0); // 2 / 4
        assert!((projected.events[0].amount - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rank_deviation_measures_distance_to_grid() {
        // Two parents, two copies each; perfect grid is [0.5, 1.0] sorted.
        let ranks = vec![1.0, 0.5, 0.52, 0.98];
        let dev = copy_rank_deviation(&ranks, 2).unwrap();
        assert!((dev - 0.02).abs() < 1e-12);
        assert!(copy_rank_deviation(&ranks, 3).is_err());
    }
}
