//! Fractional offline optimum for budgeted instances, via a dense simplex.
//!
//! The budget cap `min(B_u, Σ bid·x)` is linearized with one revenue variable
//! per offline vertex:
//!
//! ```text
//! max Σ_u r_u
//! s.t. r_u ≤ B_u                    (cap rows)
//!      r_u − Σ_v bid_uv·x_uv ≤ 0    (linking rows)
//!      Σ_u x_uv ≤ 1                 (online mass rows)
//!      x, r ≥ 0
//! ```
//!
//! Every right-hand side is non-negative, so the all-slack basis is feasible
//! and no phase-1 is needed. Bland's rule (smallest eligible index entering,
//! smallest basis index leaving on ratio ties) guarantees termination.

use crate::error::{Error, Result};
use crate::instance::{Instance, Mode};

/// Per-side guard for the public entry point.
pub const LP_GUARD: u32 = 100;
const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

/// Fractional optimum of a budgeted instance (guarded at 100×100).
pub fn opt_fractional(instance: &Instance) -> Result<f64> {
    if instance.n_offline() > LP_GUARD || instance.n_online() > LP_GUARD {
        return Err(Error::Guard(format!(
            "{}×{} exceeds the {LP_GUARD}×{LP_GUARD} LP guard; use the generator's closed-form optimum instead",
            instance.n_offline(),
            instance.n_online()
        )));
    }
    lp_value(instance)
}

/// Unguarded LP used internally (e.g. on stage decompositions whose offline
/// side can exceed the public guard while staying small in practice).
pub(crate) fn lp_value(instance: &Instance) -> Result<f64> {
    match instance.mode {
        Mode::Adwords | Mode::BudgetAdditiveUnknown => {}
        Mode::VertexWeighted => {
            return Err(Error::Mode(
                "the fractional LP oracle expects a budgeted instance; use the matching oracle for vertex-weighted ones".into(),
            ))
        }
    }
    instance.validate()?;

    let n_off = instance.n_offline() as usize;
    let n_on = instance.n_online() as usize;
    let edges = instance.dense_edges();
    let n_x = edges.len();
    let n_vars = n_x + n_off;
    let n_rows = n_off + n_off + n_on;

    // Structural (non-slack) constraint matrix and right-hand sides.
    let mut rows = vec![vec![0.0f64; n_vars]; n_rows];
    let mut rhs = vec![0.0f64; n_rows];
    for u in 0..n_off {
        rows[u][n_x + u] = 1.0; // cap row: r_u ≤ B_u
        rhs[u] = instance.effective_budget(u as u32);
        rows[n_off + u][n_x + u] = 1.0; // linking row: r_u − Σ bid·x ≤ 0
    }
    for (j, &(u, v, bid)) in edges.iter().enumerate() {
        rows[n_off + u as usize][j] = -bid;
        rows[2 * n_off + v as usize][j] = 1.0;
    }
    for v in 0..n_on {
        rhs[2 * n_off + v] = 1.0;
    }
    let mut objective = vec![0.0f64; n_vars];
    for u in 0..n_off {
        objective[n_x + u] = 1.0;
    }
    simplex_max(rows, rhs, objective)
}

/// Dense tableau simplex for `max c·x, A x ≤ b, x ≥ 0` with `b ≥ 0`.
fn simplex_max(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<f64> {
    let n_rows = a.len();
    let n_struct = c.len();
    let width = n_struct + n_rows + 1; // structural + slacks + rhs
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(n_rows);
    for i in 0..n_rows {
        let mut row = vec![0.0f64; width];
        row[..n_struct].copy_from_slice(&a[i]);
        row[n_struct + i] = 1.0;
        row[width - 1] = b[i];
        t.push(row);
    }
    // Reduced-cost row: z_j = −c_j under the all-slack basis; rhs cell holds
    // the running objective value.
    let mut z = vec![0.0f64; width];
    for j in 0..n_struct {
        z[j] = -c[j];
    }
    let mut basis: Vec<usize> = (n_struct..n_struct + n_rows).collect();

    let iteration_cap = 200 * (n_rows + n_struct).max(64);
    for _ in 0..iteration_cap {
        // Bland entering rule: smallest index with a negative reduced cost.
        let Some(enter) = (0..width - 1).find(|&j| z[j] < -REDUCED_COST_TOL) else {
            return Ok(z[width - 1]);
        };
        // Ratio test; ties broken toward the smallest basis variable.
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for (i, row) in t.iter().enumerate() {
            if row[enter] > PIVOT_TOL {
                let ratio = row[width - 1] / row[enter];
                let better = match leave {
                    None => true,
                    Some(current) => {
                        ratio < best_ratio - PIVOT_TOL
                            || (ratio < best_ratio + PIVOT_TOL && basis[i] < basis[current])
                    }
                };
                if better {
                    best_ratio = ratio.min(best_ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(Error::Guard(
                "simplex reported an unbounded direction on a bounded program; instance data is numerically degenerate".into(),
            ));
        };

        // Pivot.
        let pivot = t[leave][enter];
        for x in t[leave].iter_mut() {
            *x /= pivot;
        }
        let pivot_row = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == leave {
                continue;
            }
            let factor = row[enter];
            if factor != 0.0 {
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        let factor = z[enter];
        if factor != 0.0 {
            for (x, &p) in z.iter_mut().zip(&pivot_row) {
                *x -= factor * p;
            }
        }
        basis[leave] = enter;
    }
    Err(Error::Guard(
        "simplex iteration cap exceeded; the program is numerically degenerate".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_random;
    use crate::instance::{Bids, EdgeBlock, OfflineBlock, OnlineBlock, Pattern};

    fn tiny(mode: Mode, budgets: &[f64], bids: Vec<Vec<f64>>) -> Instance {
        let n_on = bids[0].len() as u32;
        Instance {
            mode,
            offline_blocks: budgets
                .iter()
                .map(|&b| OfflineBlock {
                    count: 1,
                    weight_or_budget: b,
                    budget_known: mode != Mode::BudgetAdditiveUnknown,
                    unlimited: false,
                })
                .collect(),
            online_blocks: vec![OnlineBlock { count: n_on, arrival_rank: 0 }],
            edges: budgets
                .iter()
                .enumerate()
                .map(|(u, _)| EdgeBlock {
                    offline_block: u,
                    online_block: 0,
                    pattern: Pattern::PerPairBidTable,
                    // Table rows are indexed by online arrival, columns by
                    // offline vertex; each offline block here is a singleton.
                    bid: Bids::Table(bids[u].iter().map(|&b| vec![b]).collect()),
                })
                .collect(),
        }
    }

    #[test]
    fn single_vertex_budget_binds() {
        // One bidder with budget 1.5 sees three unit bids: revenue caps at 1.5.
        let g = tiny(Mode::Adwords, &[1.5], vec![vec![1.0, 1.0, 1.0]]);
        let opt = opt_fractional(&g).unwrap();
        assert!((opt - 1.5).abs() < 1e-9, "{opt}");
    }

    #[test]
    fn mass_constraint_binds() {
        // Two bidders, one arrival: at most one unit of mass leaves the arrival.
        let g = tiny(Mode::Adwords, &[5.0, 5.0], vec![vec![0.8], vec![0.6]]);
        let opt = opt_fractional(&g).unwrap();
        assert!((opt - 0.8).abs() < 1e-9, "{opt}");
    }

    #[test]
    fn fractional_split_beats_integral() {
        // Budgets 0.5/0.5, both bid 1.0 on each of two arrivals: fractional
        // routing fills both budgets.
        let g = tiny(
            Mode::Adwords,
            &[0.5, 0.5],
            vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        );
        let opt = opt_fractional(&g).unwrap();
        assert!((opt - 1.0).abs() < 1e-9, "{opt}");
    }

    #[test]
    fn rejects_vertex_weighted_and_oversize() {
        let gi = gen_random(3, 4, 4, Mode::VertexWeighted).unwrap();
        assert!(matches!(opt_fractional(&gi.instance), Err(Error::Mode(_))));
        let big = gen_random(5, 6, 120, Mode::Adwords).unwrap();
        assert!(matches!(opt_fractional(&big.instance), Err(Error::Guard(_))));
    }

    #[test]
    fn random_instances_respect_simple_envelopes() {
        for seed in 0..20u64 {
            let gi = gen_random(seed, 3, 5, Mode::Adwords).unwrap();
            let opt = opt_fractional(&gi.instance).unwrap();
            let budget_sum: f64 = (0..gi.instance.n_offline())
                .map(|u| gi.instance.effective_budget(u))
                .sum();
            // Per-arrival mass ≤ 1 bounds revenue by the largest bid per arrival.
            let mut best_bid = vec![0.0f64; gi.instance.n_online() as usize];
            for (_, v, bid) in gi.instance.dense_edges() {
                let e = &mut best_bid[v as usize];
                *e = e.max(bid);
            }
            let envelope = budget_sum.min(best_bid.iter().sum());
            assert!(opt <= envelope + 1e-9, "seed {seed}: {opt} > {envelope}");
            assert!(opt > 0.0, "seed {seed}: optimum should be positive");
        }
    }
}
