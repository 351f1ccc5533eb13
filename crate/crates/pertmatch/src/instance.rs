//! Block-structured online bipartite allocation instances.
//!
//! Vertices are grouped into blocks so that adversarial families with many
//! thousands of vertices stay compact: an edge block connects one offline
//! block to one online block through a structural pattern (complete,
//! upper-triangle with offset, identity, or an explicit bid table).
//!
//! Offline vertices carry a weight (vertex-weighted mode) or a budget
//! (adwords and budget-additive modes). Online vertices arrive in blocks
//! ordered by `arrival_rank`, ties broken by block index; within a block they
//! arrive in index order.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Current on-disk format version for instance files.
pub const INSTANCE_FORMAT_VERSION: u32 = 1;

/// Allocation mode of an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Offline vertices have weights; each side is matched at most once.
    #[serde(rename = "vertex-weighted")]
    VertexWeighted,
    /// Offline vertices have known budgets; edges have bids; online vertices
    /// spend at most their full unit of mass.
    #[serde(rename = "adwords")]
    Adwords,
    /// Budgets exist but are not revealed to the algorithm until the
    /// cumulative released bids of a vertex exceed its budget.
    #[serde(rename = "budget-additive-unknown")]
    BudgetAdditiveUnknown,
}

/// A group of identical offline vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfflineBlock {
    pub count: u32,
    /// Weight (vertex-weighted) or budget (adwords / budget-additive).
    pub weight_or_budget: f64,
    /// Whether the budget is visible to the algorithm. Always true outside
    /// budget-additive mode.
    #[serde(default = "default_true")]
    pub budget_known: bool,
    /// Effectively infinite budget; the value used in computations is the sum
    /// of all bids in the instance plus one.
    #[serde(default)]
    pub unlimited: bool,
}

fn default_true() -> bool {
    true
}

/// A group of online vertices arriving consecutively.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineBlock {
    pub count: u32,
    /// Blocks arrive in increasing `arrival_rank`, ties broken by block index.
    pub arrival_rank: i64,
}

/// Structural pattern of an edge block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "kebab-case")]
pub enum Pattern {
    /// Every online vertex of the block connects to every offline vertex.
    Complete,
    /// Online index `j` connects to offline index `k` iff `k >= j + offset`
    /// (indices 0-based within their blocks). `offset = 0` is the plain
    /// staircase; negative offsets widen it, positive offsets narrow it.
    UpperTriangle {
        #[serde(default)]
        offset: i64,
    },
    /// Online index `j` connects to offline index `j` only.
    Identity,
    /// Adjacency and bids are read from an explicit table; a zero entry means
    /// no edge.
    PerPairBidTable,
}

/// Bid attached to the edges of an edge block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bids {
    /// Same bid on every edge of the block.
    Uniform(f64),
    /// Bid depends on the online index within the block.
    PerOnline(Vec<f64>),
    /// `table[j][k]` is the bid between online index `j` and offline index
    /// `k`; only meaningful with [`Pattern::PerPairBidTable`].
    Table(Vec<Vec<f64>>),
}

/// Connects one offline block to one online block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeBlock {
    pub offline_block: usize,
    pub online_block: usize,
    #[serde(flatten)]
    pub pattern: Pattern,
    pub bid: Bids,
}

/// A complete instance description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub mode: Mode,
    pub offline_blocks: Vec<OfflineBlock>,
    pub online_blocks: Vec<OnlineBlock>,
    pub edges: Vec<EdgeBlock>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format_version: u32,
    #[serde(flatten)]
    instance: Instance,
}

/// One contiguous run of offline vertices reachable from an online arrival,
/// all holding the same bid (except for table pieces, which are exploded into
/// singletons by [`Instance::arrival_pieces`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    /// First offline vertex id (global, inclusive).
    pub lo: u32,
    /// Last offline vertex id (global, exclusive).
    pub hi: u32,
    pub bid: f64,
}

/// An online arrival: global id plus position within its block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arrival {
    pub online_id: u32,
    pub block: usize,
    pub index_in_block: u32,
}

impl Instance {
    /// Total number of offline vertices.
    pub fn n_offline(&self) -> u32 {
        self.offline_blocks.iter().map(|b| b.count).sum()
    }

    /// Total number of online vertices.
    pub fn n_online(&self) -> u32 {
        self.online_blocks.iter().map(|b| b.count).sum()
    }

    /// Global id of the first vertex of each offline block (plus a final
    /// total), so `offsets[b] .. offsets[b + 1]` spans block `b`.
    pub fn offline_offsets(&self) -> Vec<u32> {
        let mut offsets = Vec::with_capacity(self.offline_blocks.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for b in &self.offline_blocks {
            acc += b.count;
            offsets.push(acc);
        }
        offsets
    }

    /// Same for online blocks. Global online ids follow block order, not
    /// arrival order.
    pub fn online_offsets(&self) -> Vec<u32> {
        let mut offsets = Vec::with_capacity(self.online_blocks.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for b in &self.online_blocks {
            acc += b.count;
            offsets.push(acc);
        }
        offsets
    }

    /// Offline block containing a global offline id.
    pub fn offline_block_of(&self, offline_id: u32) -> usize {
        let offsets = self.offline_offsets();
        match offsets.binary_search(&offline_id) {
            Ok(pos) => pos.min(self.offline_blocks.len() - 1),
            Err(pos) => pos - 1,
        }
    }

    /// Weight (vertex-weighted) or budget of a global offline id, resolving
    /// unlimited budgets to "sum of all bids plus one".
    pub fn effective_budget(&self, offline_id: u32) -> f64 {
        let block = &self.offline_blocks[self.offline_block_of(offline_id)];
        if block.unlimited {
            self.total_bid_value() + 1.0
        } else {
            block.weight_or_budget
        }
    }

    /// Sum of all bids over all edges; used to size unlimited budgets.
    pub fn total_bid_value(&self) -> f64 {
        let off_offsets = self.offline_offsets();
        let on_offsets = self.online_offsets();
        let mut total = 0.0;
        for e in &self.edges {
            let n_off = (off_offsets[e.offline_block + 1] - off_offsets[e.offline_block]) as i64;
            let n_on = (on_offsets[e.online_block + 1] - on_offsets[e.online_block]) as i64;
            match &e.pattern {
                Pattern::Complete => match &e.bid {
                    Bids::Uniform(b) => total += b * (n_off * n_on) as f64,
                    Bids::PerOnline(v) => total += v.iter().sum::<f64>() * n_off as f64,
                    Bids::Table(_) => {}
                },
                Pattern::UpperTriangle { offset } => {
                    for j in 0..n_on {
                        let lo = (j + offset).max(0);
                        if lo >= n_off {
                            continue;
                        }
                        let degree = (n_off - lo) as f64;
                        match &e.bid {
                            Bids::Uniform(b) => total += b * degree,
                            Bids::PerOnline(v) => total += v[j as usize] * degree,
                            Bids::Table(_) => {}
                        }
                    }
                }
                Pattern::Identity => {
                    let d = n_off.min(n_on);
                    match &e.bid {
                        Bids::Uniform(b) => total += b * d as f64,
                        Bids::PerOnline(v) => {
                            total += v.iter().take(d as usize).sum::<f64>();
                        }
                        Bids::Table(_) => {}
                    }
                }
                Pattern::PerPairBidTable => {
                    if let Bids::Table(t) = &e.bid {
                        total += t.iter().flatten().sum::<f64>();
                    }
                }
            }
        }
        total
    }

    /// Online arrivals in arrival order: blocks sorted by
    /// (`arrival_rank`, block index), vertices in index order within a block.
    pub fn arrivals(&self) -> Vec<Arrival> {
        let offsets = self.online_offsets();
        let mut block_order: Vec<usize> = (0..self.online_blocks.len()).collect();
        block_order.sort_by_key(|&b| (self.online_blocks[b].arrival_rank, b));
        let mut out = Vec::with_capacity(self.n_online() as usize);
        for b in block_order {
            for j in 0..self.online_blocks[b].count {
                out.push(Arrival {
                    online_id: offsets[b] + j,
                    block: b,
                    index_in_block: j,
                });
            }
        }
        out
    }

    /// Neighbor pieces of one arrival. Pieces are disjoint offline ranges
    /// with a uniform bid each; table edges are exploded into singleton
    /// pieces. Zero bids never produce a piece.
    pub fn arrival_pieces(&self, arrival: Arrival) -> Vec<Piece> {
        let off_offsets = self.offline_offsets();
        let mut pieces = Vec::new();
        for e in &self.edges {
            if e.online_block != arrival.block {
                continue;
            }
            let base = off_offsets[e.offline_block];
            let n_off = off_offsets[e.offline_block + 1] - base;
            let j = arrival.index_in_block as i64;
            let bid_for_block = |bid: &Bids| -> Option<f64> {
                match bid {
                    Bids::Uniform(b) => Some(*b),
                    Bids::PerOnline(v) => Some(v[arrival.index_in_block as usize]),
                    Bids::Table(_) => None,
                }
            };
            match &e.pattern {
                Pattern::Complete => {
                    if let Some(b) = bid_for_block(&e.bid) {
                        if b > 0.0 && n_off > 0 {
                            pieces.push(Piece { lo: base, hi: base + n_off, bid: b });
                        }
                    }
                }
                Pattern::UpperTriangle { offset } => {
                    let lo = (j + offset).max(0);
                    if lo < n_off as i64 {
                        if let Some(b) = bid_for_block(&e.bid) {
                            if b > 0.0 {
                                pieces.push(Piece {
                                    lo: base + lo as u32,
                                    hi: base + n_off,
                                    bid: b,
                                });
                            }
                        }
                    }
                }
                Pattern::Identity => {
                    if j < n_off as i64 {
                        if let Some(b) = bid_for_block(&e.bid) {
                            if b > 0.0 {
                                pieces.push(Piece {
                                    lo: base + j as u32,
                                    hi: base + j as u32 + 1,
                                    bid: b,
                                });
                            }
                        }
                    }
                }
                Pattern::PerPairBidTable => {
                    if let Bids::Table(t) = &e.bid {
                        for (k, &b) in t[arrival.index_in_block as usize].iter().enumerate() {
                            if b > 0.0 {
                                pieces.push(Piece {
                                    lo: base + k as u32,
                                    hi: base + k as u32 + 1,
                                    bid: b,
                                });
                            }
                        }
                    }
                }
            }
        }
        pieces
    }

    /// Checks structural consistency. Called by readers and before runs.
    pub fn validate(&self) -> Result<()> {
        if self.offline_blocks.is_empty() || self.online_blocks.is_empty() {
            return Err(Error::Argument("instance needs offline and online blocks".into()));
        }
        for (i, b) in self.offline_blocks.iter().enumerate() {
            if b.count == 0 {
                return Err(Error::Argument(format!("offline block {i} has count 0")));
            }
            if !b.weight_or_budget.is_finite() || b.weight_or_budget < 0.0 {
                return Err(Error::Argument(format!(
                    "offline block {i} has invalid weight/budget {}",
                    b.weight_or_budget
                )));
            }
            // Zero weights are allowed (a weight-zero vertex is matchable but
            // worthless); budgets must be positive unless unlimited.
            if self.mode != Mode::VertexWeighted
                && !b.unlimited
                && b.weight_or_budget <= 0.0
            {
                return Err(Error::Argument(format!(
                    "offline block {i} needs a positive budget"
                )));
            }
            match self.mode {
                Mode::VertexWeighted => {
                    if b.unlimited {
                        return Err(Error::Mode(
                            "unlimited offline vertices require a budgeted mode".into(),
                        ));
                    }
                    if !b.budget_known {
                        return Err(Error::Mode(
                            "vertex-weighted instances cannot hide budgets".into(),
                        ));
                    }
                }
                Mode::Adwords => {
                    if !b.budget_known {
                        return Err(Error::Mode(
                            "adwords instances reveal all budgets; use budget-additive-unknown"
                                .into(),
                        ));
                    }
                }
                Mode::BudgetAdditiveUnknown => {
                    if !b.unlimited && b.budget_known {
                        return Err(Error::Mode(
                            "budget-additive-unknown instances must mark budgets unknown".into(),
                        ));
                    }
                }
            }
        }
        for (i, b) in self.online_blocks.iter().enumerate() {
            if b.count == 0 {
                return Err(Error::Argument(format!("online block {i} has count 0")));
            }
        }
        let mut seen_pairs = std::collections::HashSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.offline_block >= self.offline_blocks.len() {
                return Err(Error::Argument(format!(
                    "edge block {i} references missing offline block {}",
                    e.offline_block
                )));
            }
            if e.online_block >= self.online_blocks.len() {
                return Err(Error::Argument(format!(
                    "edge block {i} references missing online block {}",
                    e.online_block
                )));
            }
            // Disjointness of neighbor pieces relies on each (offline, online)
            // block pair appearing at most once.
            if !seen_pairs.insert((e.offline_block, e.online_block)) {
                return Err(Error::Argument(format!(
                    "edge block {i} duplicates the pair ({}, {})",
                    e.offline_block, e.online_block
                )));
            }
            let n_on = self.online_blocks[e.online_block].count as usize;
            let n_off = self.offline_blocks[e.offline_block].count as usize;
            match (&e.pattern, &e.bid) {
                (Pattern::PerPairBidTable, Bids::Table(t)) => {
                    if t.len() != n_on || t.iter().any(|row| row.len() != n_off) {
                        return Err(Error::Argument(format!(
                            "edge block {i} bid table must be {n_on} x {n_off}"
                        )));
                    }
                }
                (Pattern::PerPairBidTable, _) => {
                    return Err(Error::Argument(format!(
                        "edge block {i} uses a table pattern and needs a bid table"
                    )));
                }
                (_, Bids::Table(_)) => {
                    return Err(Error::Argument(format!(
                        "edge block {i} provides a bid table without the table pattern"
                    )));
                }
                (_, Bids::PerOnline(v)) => {
                    if v.len() != n_on {
                        return Err(Error::Argument(format!(
                            "edge block {i} per-online bids must have length {n_on}"
                        )));
                    }
                }
                (_, Bids::Uniform(_)) => {}
            }
            let bids_ok = match &e.bid {
                Bids::Uniform(b) => b.is_finite() && *b >= 0.0,
                Bids::PerOnline(v) => v.iter().all(|b| b.is_finite() && *b >= 0.0),
                Bids::Table(t) => t.iter().flatten().all(|b| b.is_finite() && *b >= 0.0),
            };
            if !bids_ok {
                return Err(Error::Argument(format!(
                    "edge block {i} has negative or non-finite bids"
                )));
            }
            if self.mode == Mode::VertexWeighted {
                let w = self.offline_blocks[e.offline_block].weight_or_budget;
                let matches_weight = match &e.bid {
                    Bids::Uniform(b) => *b == w,
                    Bids::PerOnline(v) => v.iter().all(|b| *b == w),
                    Bids::Table(t) => t.iter().flatten().all(|b| *b == 0.0 || *b == w),
                };
                if !matches_weight {
                    return Err(Error::Mode(format!(
                        "edge block {i}: vertex-weighted bids must equal the offline weight {w}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Serializes to the JSON file format (includes `format_version`).
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            format_version: INSTANCE_FORMAT_VERSION,
            instance: self.clone(),
        };
        serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
    }

    /// Parses and validates the JSON file format.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("bad instance file: {e}")))?;
        if file.format_version != INSTANCE_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported instance format version {} (expected {})",
                file.format_version, INSTANCE_FORMAT_VERSION
            )));
        }
        file.instance.validate()?;
        Ok(file.instance)
    }

    /// Short content hash (hex) of the serialized instance; stable across
    /// runs and platforms because serialization order is fixed.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_json().as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    /// Materializes all edges as (offline id, online id, bid) triples.
    /// Intended for small instances (oracles, tests); guarded by the caller.
    pub fn dense_edges(&self) -> Vec<(u32, u32, f64)> {
        let mut out = Vec::new();
        for arrival in self.arrivals() {
            for piece in self.arrival_pieces(arrival) {
                for u in piece.lo..piece.hi {
                    out.push((u, arrival.online_id, piece.bid));
                }
            }
        }
        out
    }
}
