//! Exact maximum-weight bipartite matching for vertex-weighted instances.
//!
//! Offline weights make this a transversal-matroid optimization: greedily
//! trying to match offline vertices in decreasing weight order (augmenting
//! paths decide feasibility) is exact, because matchable offline sets form a
//! matroid and greedy maximizes weight over matroid independent sets.

use crate::error::{Error, Result};
use crate::instance::{Instance, Mode};

/// Total-vertex guard for the exact matcher.
pub const MATCHING_GUARD: u32 = 500;

/// Exact maximum-weight matching value.
pub fn opt_matching(instance: &Instance) -> Result<f64> {
    if instance.mode != Mode::VertexWeighted {
        return Err(Error::Mode(
            "the matching oracle needs a vertex-weighted instance".into(),
        ));
    }
    instance.validate()?;
    let n_off = instance.n_offline();
    let n_on = instance.n_online();
    if n_off + n_on > MATCHING_GUARD {
        return Err(Error::Guard(format!(
            "{} vertices exceed the {MATCHING_GUARD}-vertex matching guard; use the generator's closed-form optimum instead",
            n_off + n_on
        )));
    }

    // Offline -> online adjacency.
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n_off as usize];
    for arrival in instance.arrivals() {
        for piece in instance.arrival_pieces(arrival) {
            for u in piece.lo..piece.hi {
                adj[u as usize].push(arrival.online_id);
            }
        }
    }
    let offsets = instance.offline_offsets();
    let mut weight = vec![0.0f64; n_off as usize];
    for (b, block) in instance.offline_blocks.iter().enumerate() {
        for u in offsets[b]..offsets[b + 1] {
            weight[u as usize] = block.weight_or_budget;
        }
    }

    let mut order: Vec<u32> = (0..n_off).collect();
    order.sort_by(|&a, &b| {
        weight[b as usize]
            .total_cmp(&weight[a as usize])
            .then(a.cmp(&b))
    });

    let mut matched_offline_of: Vec<Option<u32>> = vec![None; n_on as usize];
    let mut total = 0.0;
    for &u in &order {
        let mut visited = vec![false; n_on as usize];
        if augment(u, &adj, &mut matched_offline_of, &mut visited) {
            total += weight[u as usize];
        }
    }
    Ok(total)
}

fn augment(
    u: u32,
    adj: &[Vec<u32>],
    matched_offline_of: &mut Vec<Option<u32>>,
    visited: &mut [bool],
) -> bool {
    for &v in &adj[u as usize] {
        let vi = v as usize;
        if visited[vi] {
            continue;
        }
        visited[vi] = true;
        let reassignable = match matched_offline_of[vi] {
            None => true,
            Some(w) => augment(w, adj, matched_offline_of, visited),
        };
        if reassignable {
            matched_offline_of[vi] = Some(u);
            return true;
        }
    }
    false
}
