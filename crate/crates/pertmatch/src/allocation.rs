//! Fractional allocations produced by runs, their feasibility validator, and
//! the replayable pour trace format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, Mode};

/// Absolute slack allowed when validating feasibility; pours are clipped at
/// capacities so violations beyond accumulated rounding indicate a bug.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// A (fractional) assignment of online mass to offline vertices.
///
/// `entries` maps `(offline_id, online_id)` to the mass fraction of the
/// online vertex routed along that edge; `spent` tracks per-offline value
/// (bid times mass), `offline_mass` per-offline total mass, and
/// `matched_mass` per-online total mass.
///
/// Very large water-filling runs switch to aggregate recording
/// ([`Allocation::record_aggregates_only`]): the per-edge map stays empty,
/// `entries_complete` is false, and only the accumulator vectors are
/// maintained. Feasibility (per-online mass and per-offline caps) is always
/// checkable from the accumulators alone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Allocation {
    pub n_offline: u32,
    pub n_online: u32,
    #[serde(with = "entries_as_triples")]
    entries: BTreeMap<(u32, u32), f64>,
    /// False when per-edge entries were not recorded (aggregate mode).
    #[serde(default = "default_true")]
    pub entries_complete: bool,
    pub spent: Vec<f64>,
    pub offline_mass: Vec<f64>,
    pub matched_mass: Vec<f64>,
}

fn default_true() -> bool {
    true
}

/// JSON stores entries as `[offline, online, mass]` triples (tuple map keys
/// do not serialize to JSON objects).
mod entries_as_triples {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(u32, u32), f64>,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let triples: Vec<(u32, u32, f64)> =
            map.iter().map(|(&(u, v), &m)| (u, v, m)).collect();
        serde::Serialize::serialize(&triples, ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<BTreeMap<(u32, u32), f64>, D::Error> {
        let triples: Vec<(u32, u32, f64)> = serde::Deserialize::deserialize(de)?;
        Ok(triples.into_iter().map(|(u, v, m)| ((u, v), m)).collect())
    }
}

impl Allocation {
    pub fn new(instance: &Instance) -> Self {
        Allocation {
            n_offline: instance.n_offline(),
            n_online: instance.n_online(),
            entries: BTreeMap::new(),
            entries_complete: true,
            spent: vec![0.0; instance.n_offline() as usize],
            offline_mass: vec![0.0; instance.n_offline() as usize],
            matched_mass: vec![0.0; instance.n_online() as usize],
        }
    }

    /// Stops recording per-edge entries; only the accumulator vectors are
    /// maintained from here on. Meant to be called on a fresh allocation
    /// before any mass is routed.
    pub fn record_aggregates_only(&mut self) {
        self.entries_complete = false;
        self.entries.clear();
    }

    /// Routes `mass` of online vertex `v` to offline vertex `u` at the given
    /// bid. Accumulates across calls on the same edge.
    pub fn add(&mut self, u: u32, v: u32, mass: f64, bid: f64) {
        debug_assert!(mass >= 0.0 && bid >= 0.0);
        if mass == 0.0 {
            return;
        }
        if self.entries_complete {
            *self.entries.entry((u, v)).or_insert(0.0) += mass;
        }
        self.spent[u as usize] += mass * bid;
        self.offline_mass[u as usize] += mass;
        self.matched_mass[v as usize] += mass;
    }

    /// Iterates `(offline_id, online_id, mass)` in deterministic order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.entries.iter().map(|(&(u, v), &m)| (u, v, m))
    }

    pub fn mass_on_edge(&self, u: u32, v: u32) -> f64 {
        self.entries.get(&(u, v)).copied().unwrap_or(0.0)
    }

    /// Objective value: per-offline spent value, capped at the weight or
    /// (effective) budget. For vertex-weighted instances spent equals weight
    /// times matched mass, so the cap is redundant but harmless.
    pub fn objective(&self, instance: &Instance) -> f64 {
        let offsets = instance.offline_offsets();
        let mut total = 0.0;
        for (b, block) in instance.offline_blocks.iter().enumerate() {
            let cap = if block.unlimited {
                f64::INFINITY
            } else {
                block.weight_or_budget
            };
            for u in offsets[b]..offsets[b + 1] {
                total += self.spent[u as usize].min(cap);
            }
        }
        total
    }

    /// Feasibility validator: online mass at most one and offline capacity
    /// respected (unit mass for vertex-weighted, budget for budgeted modes),
    /// always checked from the accumulator vectors. When per-edge entries
    /// were recorded, additionally checks that masses are non-negative, live
    /// only on existing edges, and reproduce all three accumulators.
    pub fn validate_against(&self, instance: &Instance) -> Result<()> {
        if self.n_offline != instance.n_offline() || self.n_online != instance.n_online() {
            return Err(Error::Argument(format!(
                "allocation sized {}x{} does not fit instance {}x{}",
                self.n_offline,
                self.n_online,
                instance.n_offline(),
                instance.n_online()
            )));
        }
        if self.entries_complete {
            self.check_entries(instance)?;
        }
        for v in 0..self.n_online as usize {
            if self.matched_mass[v] > 1.0 + FEASIBILITY_TOL {
                return Err(Error::Argument(format!(
                    "online vertex {v} over-allocated: mass {}",
                    self.matched_mass[v]
                )));
            }
        }
        let offsets = instance.offline_offsets();
        for (b, block) in instance.offline_blocks.iter().enumerate() {
            for u in offsets[b]..offsets[b + 1] {
                let ui = u as usize;
                match instance.mode {
                    Mode::VertexWeighted => {
                        if self.offline_mass[ui] > 1.0 + FEASIBILITY_TOL {
                            return Err(Error::Argument(format!(
                                "offline vertex {u} matched mass {} exceeds 1",
                                self.offline_mass[ui]
                            )));
                        }
                    }
                    Mode::Adwords | Mode::BudgetAdditiveUnknown => {
                        if !block.unlimited
                            && self.spent[ui] > block.weight_or_budget + FEASIBILITY_TOL
                        {
                            return Err(Error::Argument(format!(
                                "offline vertex {u} spent {} exceeds budget {}",
                                self.spent[ui], block.weight_or_budget
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Recomputes the accumulators from the per-edge entries, resolving each
    /// entry's bid through the arrival's neighbor pieces (binary search on
    /// the piece ranges; never materializes a dense edge set).
    fn check_entries(&self, instance: &Instance) -> Result<()> {
        let mut pieces_by_online: Vec<Vec<crate::instance::Piece>> =
            vec![Vec::new(); self.n_online as usize];
        for arrival in instance.arrivals() {
            let mut pieces = instance.arrival_pieces(arrival);
            pieces.sort_by_key(|p| p.lo);
            pieces_by_online[arrival.online_id as usize] = pieces;
        }
        let mut spent_check = vec![0.0; self.n_offline as usize];
        let mut mass_check = vec![0.0; self.n_online as usize];
        let mut offline_mass_check = vec![0.0; self.n_offline as usize];
        for (&(u, v), &mass) in &self.entries {
            if u >= self.n_offline || v >= self.n_online {
                return Err(Error::Argument(format!(
                    "allocation entry ({u}, {v}) out of range"
                )));
            }
            if !(mass >= 0.0) || !mass.is_finite() {
                return Err(Error::Argument(format!(
                    "allocation entry ({u}, {v}) has invalid mass {mass}"
                )));
            }
            let pieces = &pieces_by_online[v as usize];
            let idx = pieces.partition_point(|p| p.hi <= u);
            let bid = match pieces.get(idx) {
                Some(p) if p.lo <= u => p.bid,
                _ => {
                    return Err(Error::Argument(format!(
                        "allocation routes mass along missing edge ({u}, {v})"
                    )))
                }
            };
            spent_check[u as usize] += mass * bid;
            mass_check[v as usize] += mass;
            offline_mass_check[u as usize] += mass;
        }
        for v in 0..self.n_online as usize {
            if (mass_check[v] - self.matched_mass[v]).abs() > FEASIBILITY_TOL {
                return Err(Error::Argument(format!(
                    "online vertex {v}: matched_mass accumulator {} disagrees with entries {}",
                    self.matched_mass[v], mass_check[v]
                )));
            }
        }
        for u in 0..self.n_offline as usize {
            if (spent_check[u] - self.spent[u]).abs() > FEASIBILITY_TOL {
                return Err(Error::Argument(format!(
                    "offline vertex {u}: spent accumulator {} disagrees with entries {}",
                    self.spent[u], spent_check[u]
                )));
            }
            if (offline_mass_check[u] - self.offline_mass[u]).abs() > FEASIBILITY_TOL {
                return Err(Error::Argument(format!(
                    "offline vertex {u}: offline_mass accumulator {} disagrees with entries {}",
                    self.offline_mass[u], offline_mass_check[u]
                )));
            }
        }
        Ok(())
    }
}

/// Header of a replayable trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub algorithm: String,
    pub instance_hash: String,
    pub f_descriptor: String,
    pub step: Option<f64>,
    pub seed: Option<u64>,
}

/// One pour: `amount` mass of the `arrival_seq`-th arrival (in arrival
/// order) routed to `offline_id`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub arrival_seq: u32,
    pub offline_id: u32,
    pub amount: f64,
}

/// Ordered pour events plus enough header context to replay them.
/// Intermediate fill snapshots are not stored; checkers reconstruct state by
/// replaying the events in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    /// Plain-text serialization: `# key: value` header lines, then one
    /// whitespace-separated event per line. Floats print in shortest
    /// round-trip form, so replay is bit-exact.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# algorithm: {}\n", self.header.algorithm));
        out.push_str(&format!("# instance_hash: {}\n", self.header.instance_hash));
        out.push_str(&format!("# f: {}\n", self.header.f_descriptor));
        if let Some(step) = self.header.step {
            out.push_str(&format!("# step: {step}\n"));
        }
        if let Some(seed) = self.header.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        for e in &self.events {
            out.push_str(&format!("{} {} {}\n", e.arrival_seq, e.offline_id, e.amount));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header = TraceHeader {
            algorithm: String::new(),
            instance_hash: String::new(),
            f_descriptor: String::new(),
            step: None,
            seed: None,
        };
        let mut events = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some((key, value)) = rest.split_once(':') {
                    let value = value.trim();
                    match key.trim() {
                        "algorithm" => header.algorithm = value.to_string(),
                        "instance_hash" => header.instance_hash = value.to_string(),
                        "f" => header.f_descriptor = value.to_string(),
                        "step" => {
                            header.step = Some(value.parse().map_err(|_| {
                                Error::Format(format!("bad step on line {}", lineno + 1))
                            })?)
                        }
                        "seed" => {
                            header.seed = Some(value.parse().map_err(|_| {
                                Error::Format(format!("bad seed on line {}", lineno + 1))
                            })?)
                        }
                        _ => {}
                    }
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let (a, u, m) = (parts.next(), parts.next(), parts.next());
            match (a, u, m) {
                (Some(a), Some(u), Some(m)) if parts.next().is_none() => {
                    events.push(TraceEvent {
                        arrival_seq: a.parse().map_err(|_| {
                            Error::Format(format!("bad arrival index on line {}", lineno + 1))
                        })?,
                        offline_id: u.parse().map_err(|_| {
                            Error::Format(format!("bad offline id on line {}", lineno + 1))
                        })?,
                        amount: m.parse().map_err(|_| {
                            Error::Format(format!("bad amount on line {}", lineno + 1))
                        })?,
                    });
                }
                _ => {
                    return Err(Error::Format(format!(
                        "trace line {} is not `arrival offline amount`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(Trace { header, events })
    }
}
