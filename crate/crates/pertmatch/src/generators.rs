//! Instance families: adversarial constructions with known optima, random
//! instances for oracle cross-checks, offline-side duplication, and the
//! budget-stage decomposition transform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::algorithms::budget_additive::stage_schedule;
use crate::error::{Error, Result};
use crate::instance::{Bids, EdgeBlock, Instance, Mode, OfflineBlock, OnlineBlock, Pattern};
use crate::perturb::PerturbationFunction;

/// An instance plus generation metadata (closed-form optimum, rounded block
/// sizes, duplication bookkeeping).
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub instance: Instance,
    /// Family tag for reports.
    pub family: String,
    /// Generation parameters, including any rounded counts.
    pub params: serde_json::Value,
    /// Closed-form optimum of the generated instance, when known.
    pub opt_closed_form: Option<f64>,
    /// True when `opt_closed_form` is the exact optimum of this finite
    /// instance (as opposed to a limiting value).
    pub opt_exact: bool,
    /// Set by [`gen_duplicate`]: copies per parent vertex.
    pub copies_per_parent: Option<u32>,
    /// Set by [`gen_duplicate`]: content hash of the parent instance.
    pub parent_hash: Option<String>,
}

/// Staircase matching instance: online `j` connects to offline `k >= j`, so
/// the identity assignment is a perfect matching and the optimum is the sum
/// of the weights (`n` for the default unit weights).
pub fn gen_upper_triangle(n: u32, weights: Option<&[f64]>) -> Result<GeneratedInstance> {
    if n == 0 {
        return Err(Error::Argument("triangle size must be positive".into()));
    }
    let (offline_blocks, edges, opt) = match weights {
        None => (
            vec![OfflineBlock {
                count: n,
                weight_or_budget: 1.0,
                budget_known: true,
                unlimited: false,
            }],
            vec![EdgeBlock {
                offline_block: 0,
                online_block: 0,
                pattern: Pattern::UpperTriangle { offset: 0 },
                bid: Bids::Uniform(1.0),
            }],
            n as f64,
        ),
        Some(ws) => {
            if ws.len() != n as usize {
                return Err(Error::Argument(format!(
                    "{} weights supplied for {n} offline vertices",
                    ws.len()
                )));
            }
            if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::Argument("weights must be finite and non-negative".into()));
            }
            // One singleton block per vertex; vertex k accepts arrivals
            // j <= k, which an upper triangle with offset -k expresses.
            let blocks = ws
                .iter()
                .map(|&w| OfflineBlock {
                    count: 1,
                    weight_or_budget: w,
                    budget_known: true,
                    unlimited: false,
                })
                .collect();
            let edges = ws
                .iter()
                .enumerate()
                .map(|(k, &w)| EdgeBlock {
                    offline_block: k,
                    online_block: 0,
                    pattern: Pattern::UpperTriangle { offset: -(k as i64) },
                    bid: Bids::Uniform(w),
                })
                .collect();
            (blocks, edges, ws.iter().sum())
        }
    };
    let instance = Instance {
        mode: Mode::VertexWeighted,
        offline_blocks,
        online_blocks: vec![OnlineBlock { count: n, arrival_rank: 0 }],
        edges,
    };
    instance.validate()?;
    Ok(GeneratedInstance {
        instance,
        family: "upper-triangle".into(),
        params: json!({ "n": n, "weights": weights }),
        opt_closed_form: Some(opt),
        opt_exact: true,
        copies_per_parent: None,
        parent_hash: None,
    })
}

/// Budgeted staircase: the upper-triangle adjacency with unit budgets and
/// unit bids, in either budgeted mode. The identity assignment fills every
/// budget, so the optimum is `n`. In the unknown-budget mode each vertex's
/// stage schedule is a single unit stage created at its first arrival, so
/// the stage-decomposed instance coincides with the original — the simplest
/// member of the decomposed adversarial family.
pub fn gen_budgeted_triangle(n: u32, mode: Mode) -> Result<GeneratedInstance> {
    if n == 0 {
        return Err(Error::Argument("triangle size must be positive".into()));
    }
    if mode == Mode::VertexWeighted {
        return Err(Error::Mode(
            "budgeted triangle needs a budgeted mode; use the weighted staircase instead".into(),
        ));
    }
    let instance = Instance {
        mode,
        offline_blocks: vec![OfflineBlock {
            count: n,
            weight_or_budget: 1.0,
            budget_known: mode != Mode::BudgetAdditiveUnknown,
            unlimited: false,
        }],
        online_blocks: vec![OnlineBlock { count: n, arrival_rank: 0 }],
        edges: vec![EdgeBlock {
            offline_block: 0,
            online_block: 0,
            pattern: Pattern::UpperTriangle { offset: 0 },
            bid: Bids::Uniform(1.0),
        }],
    };
    instance.validate()?;
    Ok(GeneratedInstance {
        instance,
        family: "budgeted-triangle".into(),
        params: json!({ "n": n, "mode": mode }),
        opt_closed_form: Some(n as f64),
        opt_exact: true,
        copies_per_parent: None,
        parent_hash: None,
    })
}

/// Layered adversarial family for the vertex-weighted water-filler.
///
/// `m` groups, each holding a heavy ladder block `U1_i` (weight `f(i β / m)`)
/// and a plain block `U2_i` of `n` vertices (weight `f(α)`). Arrivals come in
/// three waves:
///
/// 1. `V1_i` (⌈β(e^α − 1)n⌉ per group) sees `U1_i` through a staircase,
/// 2. `V2_i` (⌈βn⌉ per group) sees the last ⌈βn⌉ vertices of `U1_i` plus all
///    of `U2`,
/// 3. `V3` (`n` per group) sees `U2` through a global staircase.
///
/// `U2` blocks take the lowest ids so that score ties favor them. The
/// closed-form optimum `n m f(α) + Σ_i (|V1_i| + |V2_i|) f(i β / m)` is exact
/// for every finite size: waves 1–2 saturate their group ladder and wave 3
/// matches `U2` along the diagonal.
pub fn gen_instance1(
    alpha: f64,
    beta: f64,
    n: u32,
    m: u32,
    f: &PerturbationFunction,
) -> Result<GeneratedInstance> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Argument(format!("beta must lie in (0, 1], got {beta}")));
    }
    if n == 0 || m == 0 {
        return Err(Error::Argument("n and m must be positive".into()));
    }
    let nf = n as f64;
    let u1_count = (beta * alpha.exp() * nf).ceil() as u32 + 1;
    let v1_count = (beta * (alpha.exp() - 1.0) * nf).ceil() as u32;
    let v2_count = (beta * nf).ceil() as u32;
    let tail = v2_count;
    let head = u1_count - tail; // >= 1 since e^alpha > 1
    let f_alpha = f.eval(alpha)?;

    let mut offline_blocks = Vec::new();
    // U2 blocks first (ids 0 .. n*m) so equal scores resolve towards U2.
    for _ in 0..m {
        offline_blocks.push(OfflineBlock {
            count: n,
            weight_or_budget: f_alpha,
            budget_known: true,
            unlimited: false,
        });
    }
    let mut group_weights = Vec::with_capacity(m as usize);
    for i in 1..=m {
        let w = f.eval(i as f64 * beta / m as f64)?;
        group_weights.push(w);
        offline_blocks.push(OfflineBlock {
            count: head,
            weight_or_budget: w,
            budget_known: true,
            unlimited: false,
        });
        offline_blocks.push(OfflineBlock {
            count: tail,
            weight_or_budget: w,
            budget_known: true,
            unlimited: false,
        });
    }
    let u1_head_block = |i: u32| (m + 2 * (i - 1)) as usize;
    let u1_tail_block = |i: u32| (m + 2 * (i - 1) + 1) as usize;

    let mut online_blocks = Vec::new();
    for i in 0..m {
        online_blocks.push(OnlineBlock { count: v1_count, arrival_rank: i as i64 });
    }
    for i in 0..m {
        online_blocks.push(OnlineBlock { count: v2_count, arrival_rank: (m + i) as i64 });
    }
    for i in 0..m {
        online_blocks.push(OnlineBlock { count: n, arrival_rank: (2 * m + i) as i64 });
    }
    let v1_block = |i: u32| (i - 1) as usize;
    let v2_block = |i: u32| (m + i - 1) as usize;
    let v3_block = |a: u32| (2 * m + a) as usize; // a is 0-based

    let mut edges = Vec::new();
    for i in 1..=m {
        let w = group_weights[(i - 1) as usize];
        // Wave 1: staircase over the full U1 ladder, split head/tail.
        edges.push(EdgeBlock {
            offline_block: u1_head_block(i),
            online_block: v1_block(i),
            pattern: Pattern::UpperTriangle { offset: 0 },
            bid: Bids::Uniform(w),
        });
        edges.push(EdgeBlock {
            offline_block: u1_tail_block(i),
            online_block: v1_block(i),
            pattern: Pattern::UpperTriangle { offset: -(head as i64) },
            bid: Bids::Uniform(w),
        });
        // Wave 2: complete to the group tail and to every U2 block.
        edges.push(EdgeBlock {
            offline_block: u1_tail_block(i),
            online_block: v2_block(i),
            pattern: Pattern::Complete,
            bid: Bids::Uniform(w),
        });
        for b in 0..m {
            edges.push(EdgeBlock {
                offline_block: b as usize,
                online_block: v2_block(i),
                pattern: Pattern::Complete,
                bid: Bids::Uniform(f_alpha),
            });
        }
    }
    // Wave 3: global staircase over the concatenated U2 blocks, expressed per
    // block pair through offsets.
    for a in 0..m {
        for b in a..m {
            edges.push(EdgeBlock {
                offline_block: b as usize,
                online_block: v3_block(a),
                pattern: Pattern::UpperTriangle {
                    offset: (a as i64 - b as i64) * n as i64,
                },
                bid: Bids::Uniform(f_alpha),
            });
        }
    }

    let instance = Instance { mode: Mode::VertexWeighted, offline_blocks, online_blocks, edges };
    instance.validate()?;
    let opt: f64 = nf * m as f64 * f_alpha
        + group_weights
            .iter()
            .map(|w| (v1_count + v2_count) as f64 * w)
            .sum::<f64>();
    Ok(GeneratedInstance {
        instance,
        family: "layered-triangle".into(),
        params: json!({
            "alpha": alpha,
            "beta": beta,
            "n": n,
            "m": m,
            "f": f.descriptor(),
            "u1_per_group": u1_count,
            "u1_head": head,
            "u1_tail": tail,
            "v1_per_group": v1_count,
            "v2_per_group": v2_count,
        }),
        opt_closed_form: Some(opt),
        opt_exact: true,
        copies_per_parent: None,
        parent_hash: None,
    })
}

/// Two-phase adversarial family for rank-based spending, canonical bids.
///
/// Offline: one unlimited vertex `u_0` plus `n` unit-budget vertices. Every
/// online vertex is connected to every unit-budget vertex with bid 1. On top
/// of that, phase 1 sends `n` arrivals that also bid `f(i / n) / f(α)` on
/// `u_0`; phase 2 sends `2n` further unit-bid arrivals. Routing all of phase
/// 1 to `u_0` and filling the unit budgets from phase 2 is optimal, so the
/// exact optimum is `n + Σ_i f(i / n) / f(α)`; the algorithm under test can
/// instead waste unit budgets on phase 1 when `u_0`'s rank draws badly.
pub fn gen_instance2(alpha: f64, n: u32, f: &PerturbationFunction) -> Result<GeneratedInstance> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    let f_alpha = f.eval(alpha)?;
    if f_alpha <= 0.0 {
        return Err(Error::Degenerate(format!(
            "f({alpha}) = {f_alpha}; phase-1 bids need a positive denominator"
        )));
    }
    let bids: Vec<f64> = (1..=n)
        .map(|i| f.eval(i as f64 / n as f64).map(|v| v / f_alpha))
        .collect::<Result<_>>()?;
    build_instance2(alpha, None, n, f, bids)
}

/// Generalized two-phase family with a second knee at `β <= α`: phase-1 bids
/// are `f(i/n) / f(α)` early and `min{f(i/n) / f(α), f(i/n − α) / f(β)}` once
/// `i >= α n`.
pub fn gen_instance2_general(
    alpha: f64,
    beta: f64,
    n: u32,
    f: &PerturbationFunction,
) -> Result<GeneratedInstance> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(0.0..=alpha).contains(&beta) {
        return Err(Error::Argument(format!(
            "beta must lie in [0, alpha], got {beta}"
        )));
    }
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    let f_alpha = f.eval(alpha)?;
    let f_beta = f.eval(beta)?;
    if f_alpha <= 0.0 || f_beta <= 0.0 {
        return Err(Error::Degenerate(
            "phase-1 bids need positive f(alpha) and f(beta)".into(),
        ));
    }
    let nf = n as f64;
    let bids: Vec<f64> = (1..=n)
        .map(|i| -> Result<f64> {
            let x = i as f64 / nf;
            let first = f.eval(x)? / f_alpha;
            if (i as f64) < alpha * nf {
                Ok(first)
            } else {
                Ok(first.min(f.eval(x - alpha)? / f_beta))
            }
        })
        .collect::<Result<_>>()?;
    build_instance2(alpha, Some(beta), n, f, bids)
}

fn build_instance2(
    alpha: f64,
    beta: Option<f64>,
    n: u32,
    f: &PerturbationFunction,
    bids: Vec<f64>,
) -> Result<GeneratedInstance> {
    let opt = n as f64 + bids.iter().sum::<f64>();
    let instance = Instance {
        mode: Mode::Adwords,
        offline_blocks: vec![
            OfflineBlock { count: 1, weight_or_budget: 1.0, budget_known: true, unlimited: true },
            OfflineBlock { count: n, weight_or_budget: 1.0, budget_known: true, unlimited: false },
        ],
        online_blocks: vec![
            OnlineBlock { count: n, arrival_rank: 0 },
            OnlineBlock { count: 2 * n, arrival_rank: 1 },
        ],
        edges: vec![
            EdgeBlock {
                offline_block: 0,
                online_block: 0,
                pattern: Pattern::Complete,
                bid: Bids::PerOnline(bids),
            },
            EdgeBlock {
                offline_block: 1,
                online_block: 0,
                pattern: Pattern::Complete,
                bid: Bids::Uniform(1.0),
            },
            EdgeBlock {
                offline_block: 1,
                online_block: 1,
                pattern: Pattern::Complete,
                bid: Bids::Uniform(1.0),
            },
        ],
    };
    instance.validate()?;
    Ok(GeneratedInstance {
        instance,
        family: "two-phase-spender".into(),
        params: json!({
            "alpha": alpha,
            "beta": beta,
            "n": n,
            "f": f.descriptor(),
        }),
        opt_closed_form: Some(opt),
        opt_exact: true,
        copies_per_parent: None,
        parent_hash: None,
    })
}

/// Copy blow-up of a vertex-weighted instance: every offline vertex `u`
/// becomes `copies` vertices of weight `w_u / copies`, every online vertex
/// becomes `copies` consecutive arrivals, and the copy groups of each parent
/// edge are completely connected. The optimum is preserved exactly (route
/// each parent assignment through the copy groups).
///
/// Copy ids are parent-major on both sides: parent offline `u` owns ids
/// `u*copies .. (u+1)*copies`, and the copies of the parent's `s`-th arrival
/// are the arrivals `s*copies .. (s+1)*copies`.
pub fn gen_duplicate(parent: &Instance, copies: u32) -> Result<GeneratedInstance> {
    if parent.mode != Mode::VertexWeighted {
        return Err(Error::Mode("duplication applies to vertex-weighted instances".into()));
    }
    if copies == 0 {
        return Err(Error::Argument("copies must be positive".into()));
    }
    parent.validate()?;
    let dense = parent.dense_edges();
    if dense.len() > 100_000 {
        return Err(Error::Guard(format!(
            "duplication would materialize {} edge blocks (limit 100000)",
            dense.len()
        )));
    }
    let vertices =
        u64::from(parent.n_offline() + parent.n_online()).saturating_mul(u64::from(copies));
    if vertices > 2_000_000 {
        return Err(Error::Guard(format!(
            "duplication would create {vertices} vertices (limit 2000000)"
        )));
    }
    let offsets = parent.offline_offsets();
    let mut weight = vec![0.0f64; parent.n_offline() as usize];
    for (b, block) in parent.offline_blocks.iter().enumerate() {
        for u in offsets[b]..offsets[b + 1] {
            weight[u as usize] = block.weight_or_budget;
        }
    }
    let offline_blocks: Vec<OfflineBlock> = weight
        .iter()
        .map(|&w| OfflineBlock {
            count: copies,
            weight_or_budget: w / f64::from(copies),
            budget_known: true,
            unlimited: false,
        })
        .collect();
    let arrivals = parent.arrivals();
    let online_blocks: Vec<OnlineBlock> = (0..arrivals.len())
        .map(|seq| OnlineBlock { count: copies, arrival_rank: seq as i64 })
        .collect();
    let mut seq_of_online = vec![usize::MAX; parent.n_online() as usize];
    for (seq, a) in arrivals.iter().enumerate() {
        seq_of_online[a.online_id as usize] = seq;
    }
    // One complete block per parent edge; the vertex-weighted bid is the
    // copy weight by definition.
    let edges: Vec<EdgeBlock> = dense
        .iter()
        .map(|&(u, v, _)| EdgeBlock {
            offline_block: u as usize,
            online_block: seq_of_online[v as usize],
            pattern: Pattern::Complete,
            bid: Bids::Uniform(weight[u as usize] / f64::from(copies)),
        })
        .collect();
    let instance = Instance {
        mode: Mode::VertexWeighted,
        offline_blocks,
        online_blocks,
        edges,
    };
    instance.validate()?;
    Ok(GeneratedInstance {
        instance,
        family: "duplicated".into(),
        params: json!({ "copies": copies }),
        opt_closed_form: None,
        opt_exact: false,
        copies_per_parent: Some(copies),
        parent_hash: Some(parent.content_hash()),
    })
}

/// Random dense-ish instance for oracle cross-checks. Weights are uniform in
/// [0.1, 1], budgets in [0.2, 1.2], bids in [0.1, 1]; each potential edge is
/// present with probability 0.6 and empty online vertices get one forced
/// edge. All draws come from one seeded generator in a fixed order (weights
/// or budgets by id, then edges offline-major, then forced fixes by online
/// id), so a seed pins the instance exactly.
pub fn gen_random(seed: u64, n_offline: u32, n_online: u32, mode: Mode) -> Result<GeneratedInstance> {
    if n_offline == 0 || n_online == 0 {
        return Err(Error::Argument("sizes must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let caps: Vec<f64> = (0..n_offline)
        .map(|_| match mode {
            Mode::VertexWeighted => rng.gen_range(0.1..=1.0),
            _ => rng.gen_range(0.2..=1.2),
        })
        .collect();
    let mut tables: Vec<Vec<Vec<f64>>> = (0..n_offline)
        .map(|_| vec![vec![0.0]; n_online as usize])
        .collect();
    for (u, table) in tables.iter_mut().enumerate() {
        for row in table.iter_mut() {
            if rng.gen_bool(0.6) {
                row[0] = match mode {
                    Mode::VertexWeighted => caps[u],
                    _ => rng.gen_range(0.1..=1.0),
                };
            }
        }
    }
    for v in 0..n_online as usize {
        if (0..n_offline as usize).all(|u| tables[u][v][0] == 0.0) {
            let u = rng.gen_range(0..n_offline) as usize;
            tables[u][v][0] = match mode {
                Mode::VertexWeighted => caps[u],
                _ => rng.gen_range(0.1..=1.0),
            };
        }
    }
    let offline_blocks: Vec<OfflineBlock> = caps
        .iter()
        .map(|&c| OfflineBlock {
            count: 1,
            weight_or_budget: c,
            budget_known: mode != Mode::BudgetAdditiveUnknown,
            unlimited: false,
        })
        .collect();
    let edges: Vec<EdgeBlock> = tables
        .into_iter()
        .enumerate()
        .map(|(u, table)| EdgeBlock {
            offline_block: u,
            online_block: 0,
            pattern: Pattern::PerPairBidTable,
            bid: Bids::Table(table),
        })
        .collect();
    let instance = Instance {
        mode,
        offline_blocks,
        online_blocks: vec![OnlineBlock { count: n_online, arrival_rank: 0 }],
        edges,
    };
    instance.validate()?;
    Ok(GeneratedInstance {
        instance,
        family: "random".into(),
        params: json!({ "seed": seed, "n_offline": n_offline, "n_online": n_online }),
        opt_closed_form: None,
        opt_exact: false,
        copies_per_parent: None,
        parent_hash: None,
    })
}

/// Result of the budget-stage decomposition transform.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// The decomposed instance: one known-budget offline vertex per stage.
    pub instance: Instance,
    /// Parent offline id of each stage (stage index = decomposed offline id).
    pub stage_parent: Vec<u32>,
    /// Arrival sequence number that created each stage.
    pub stage_created_seq: Vec<u32>,
}

/// Statically decomposes a budget-additive instance into its stage instance:
/// stages become unit offline blocks with known budgets, connected to their
/// creating arrival and all later arrivals that bid on the parent. Running
/// the known-budget water-filler on the result reproduces the unknown-budget
/// run exactly, and the fractional optima of the two instances coincide.
pub fn decompose_instance(instance: &Instance) -> Result<Decomposition> {
    let stages = stage_schedule(instance)?;
    // Arrival sequence number and bid lookup per online id.
    let arrivals = instance.arrivals();
    let mut seq_of_online = vec![0u32; instance.n_online() as usize];
    let mut bid_of: Vec<std::collections::BTreeMap<u32, f64>> =
        vec![std::collections::BTreeMap::new(); instance.n_online() as usize];
    for (seq, arrival) in arrivals.iter().enumerate() {
        seq_of_online[arrival.online_id as usize] = seq as u32;
        for piece in instance.arrival_pieces(*arrival) {
            for u in piece.lo..piece.hi {
                bid_of[arrival.online_id as usize].insert(u, piece.bid);
            }
        }
    }
    let on_offsets = instance.online_offsets();
    let mut offline_blocks = Vec::with_capacity(stages.len());
    let mut edges = Vec::new();
    for (s, stage) in stages.iter().enumerate() {
        offline_blocks.push(OfflineBlock {
            count: 1,
            weight_or_budget: stage.budget,
            budget_known: true,
            unlimited: false,
        });
        for (ob, block) in instance.online_blocks.iter().enumerate() {
            let mut bids = vec![0.0; block.count as usize];
            let mut any = false;
            for j in 0..block.count {
                let online_id = on_offsets[ob] + j;
                if seq_of_online[online_id as usize] < stage.created_seq {
                    continue;
                }
                if let Some(&b) = bid_of[online_id as usize].get(&stage.parent) {
                    bids[j as usize] = b;
                    any = true;
                }
            }
            if any {
                edges.push(EdgeBlock {
                    offline_block: s,
                    online_block: ob,
                    pattern: Pattern::Complete,
                    bid: Bids::PerOnline(bids),
                });
            }
        }
    }
    let decomposed = Instance {
        mode: Mode::Adwords,
        offline_blocks,
        online_blocks: instance.online_blocks.clone(),
        edges,
    };
    decomposed.validate()?;
    Ok(Decomposition {
        instance: decomposed,
        stage_parent: stages.iter().map(|s| s.parent).collect(),
        stage_created_seq: stages.iter().map(|s| s.created_seq).collect(),
    })
}
