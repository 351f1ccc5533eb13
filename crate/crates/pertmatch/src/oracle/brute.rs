//! Brute-force grid optimum for tiny budgeted instances.
//!
//! Every online vertex distributes its unit of mass over its neighbors in
//! integer multiples of `1/resolution`. The oracle enumerates all such
//! allocations arrival by arrival, keeping the set of reachable
//! budget-capped spend vectors. Two reductions keep the state space small
//! without affecting the exact grid optimum:
//!
//! - spends are capped at the budget as they accumulate (`min(B_u, ·)` is
//!   monotone, so two states with equal capped vectors have identical
//!   futures), and
//! - capped vectors that are coordinate-wise dominated are dropped (the
//!   objective and every transition are monotone in the spend vector).
//!
//! Leaving mass unallocated is never better than placing it somewhere, so
//! only full-mass distributions are enumerated.
//!
//! States are quantized to a fixed 1e−7 grid for deduplication; the induced
//! objective error is below 1e−6, far inside the 1e−2 tolerance at which
//! this oracle certifies the LP solver.

use crate::error::{Error, Result};
use crate::instance::{Instance, Mode};
use rayon::prelude::*;

/// Maximum instance side for the brute-force oracle.
pub const BRUTE_GUARD: u32 = 3;
/// Default mass resolution (mass quantum 1/200).
pub const DEFAULT_BRUTE_RESOLUTION: u32 = 200;
const MAX_RESOLUTION: u32 = 400;
/// Dedup quantum for spend coordinates.
const QUANT: f64 = 1e7;
const COORD_BITS: u32 = 42;
/// Hard cap on the pruned frontier size between arrivals.
const FRONTIER_LIMIT: usize = 6_000_000;

fn pack(s: [f64; 3]) -> u128 {
    let q = |x: f64| (x * QUANT).round() as u128;
    (q(s[0]) << (2 * COORD_BITS)) | (q(s[1]) << COORD_BITS) | q(s[2])
}

fn unpack(k: u128) -> [f64; 3] {
    let mask = (1u128 << COORD_BITS) - 1;
    [
        ((k >> (2 * COORD_BITS)) & mask) as f64 / QUANT,
        ((k >> COORD_BITS) & mask) as f64 / QUANT,
        (k & mask) as f64 / QUANT,
    ]
}

fn coords12(k: u128) -> (u64, u64) {
    let mask = (1u128 << COORD_BITS) - 1;
    (((k >> COORD_BITS) & mask) as u64, (k & mask) as u64)
}

/// Sort descending, dedup, and drop coordinate-wise dominated states.
fn prune(mut states: Vec<u128>) -> Vec<u128> {
    states.sort_unstable_by(|a, b| b.cmp(a));
    states.dedup();
    let mut kept = Vec::with_capacity(states.len().min(1024));
    // 2D Pareto staircase over (s1, s2) of the kept states; s0 is handled by
    // the descending lexicographic order (potential dominators come first).
    let mut stair: Vec<(u64, u64)> = Vec::new();
    for &k in &states {
        let (q1, q2) = coords12(k);
        let p = stair.partition_point(|&(s1, _)| s1 >= q1);
        if p > 0 && stair[p - 1].1 >= q2 {
            continue; // dominated
        }
        kept.push(k);
        let r = stair[p..].partition_point(|&(_, s2)| s2 <= q2) + p;
        stair.splice(p..r, [(q1, q2)]);
    }
    kept
}

/// All ways to split `resolution` quanta over `slots` (1..=3) neighbors.
fn compositions(slots: usize, resolution: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    match slots {
        1 => out.push([resolution, 0, 0]),
        2 => {
            for k in 0..=resolution {
                out.push([k, resolution - k, 0]);
            }
        }
        3 => {
            for k1 in 0..=resolution {
                for k2 in 0..=(resolution - k1) {
                    out.push([k1, k2, resolution - k1 - k2]);
                }
            }
        }
        _ => unreachable!("neighbor count is bounded by the 3-offline guard"),
    }
    out
}

fn child(
    parent: [f64; 3],
    comp: &[u32; 3],
    nbrs: &[(usize, f64)],
    caps: &[f64; 3],
    inv_res: f64,
) -> [f64; 3] {
    let mut s = parent;
    for (slot, &(u, bid)) in nbrs.iter().enumerate() {
        if comp[slot] > 0 {
            s[u] = (s[u] + bid * f64::from(comp[slot]) * inv_res).min(caps[u]);
        }
    }
    s
}

/// Exact optimum over grid allocations at the given mass resolution.
pub fn opt_brute_force(instance: &Instance, resolution: u32) -> Result<f64> {
    match instance.mode {
        Mode::Adwords | Mode::BudgetAdditiveUnknown => {}
        Mode::VertexWeighted => {
            return Err(Error::Mode(
                "the brute-force grid oracle expects a budgeted instance".into(),
            ))
        }
    }
    instance.validate()?;
    if instance.n_offline() > BRUTE_GUARD || instance.n_online() > BRUTE_GUARD {
        return Err(Error::Guard(format!(
            "{}×{} exceeds the {BRUTE_GUARD}×{BRUTE_GUARD} brute-force guard",
            instance.n_offline(),
            instance.n_online()
        )));
    }
    if resolution == 0 || resolution > MAX_RESOLUTION {
        return Err(Error::Argument(format!(
            "brute-force resolution must be in 1..={MAX_RESOLUTION}, got {resolution}"
        )));
    }

    let mut caps = [0.0f64; 3];
    for u in 0..instance.n_offline() {
        let cap = instance.effective_budget(u);
        if cap * QUANT >= f64::from(2u32).powi(COORD_BITS as i32) {
            return Err(Error::Guard(format!("budget {cap} too large to quantize")));
        }
        caps[u as usize] = cap;
    }
    let per_arrival: Vec<Vec<(usize, f64)>> = instance
        .arrivals()
        .into_iter()
        .map(|arrival| {
            instance
                .arrival_pieces(arrival)
                .into_iter()
                .flat_map(|p| (p.lo..p.hi).map(move |u| (u as usize, p.bid)))
                .collect()
        })
        .collect();
    let inv_res = 1.0 / f64::from(resolution);

    let last_active = per_arrival.iter().rposition(|n| !n.is_empty());
    let Some(last_active) = last_active else {
        return Ok(0.0); // no edges at all
    };

    let mut frontier: Vec<u128> = vec![pack([0.0; 3])];
    for nbrs in per_arrival.iter().take(last_active) {
        if nbrs.is_empty() {
            continue;
        }
        let comps = compositions(nbrs.len(), resolution);
        let chunk = (2_000_000 / comps.len()).max(1);
        frontier = frontier
            .par_chunks(chunk)
            .map(|parents| {
                let mut children = Vec::with_capacity(parents.len() * comps.len());
                for &p in parents {
                    let s = unpack(p);
                    for comp in &comps {
                        children.push(pack(child(s, comp, nbrs, &caps, inv_res)));
                    }
                }
                prune(children)
            })
            .reduce(Vec::new, |mut a, mut b| {
                if a.is_empty() {
                    return b;
                }
                if b.is_empty() {
                    return a;
                }
                a.append(&mut b);
                prune(a)
            });
        if frontier.len() > FRONTIER_LIMIT {
            return Err(Error::Guard(format!(
                "brute-force frontier exploded to {} states; lower the resolution",
                frontier.len()
            )));
        }
    }

    // Final arrival: evaluate the objective directly instead of storing states.
    let nbrs = &per_arrival[last_active];
    let comps = compositions(nbrs.len(), resolution);
    let best = frontier
        .par_chunks(1024)
        .map(|parents| {
            let mut local = 0.0f64;
            for &p in parents {
                let s = unpack(p);
                for comp in &comps {
                    let c = child(s, comp, nbrs, &caps, inv_res);
                    local = local.max(c[0] + c[1] + c[2]);
                }
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}
