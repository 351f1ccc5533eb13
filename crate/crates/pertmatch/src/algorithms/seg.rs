//! Max segment tree over offline vertices.
//!
//! Stores one key per offline vertex and answers "vertex with the maximum
//! key, ties to the lowest id" over any contiguous id range in logarithmic
//! time. Exhausted vertices are parked at negative infinity, which range
//! queries treat as absent.

/// Sentinel key for vertices that can no longer receive mass.
pub const EXHAUSTED: f64 = f64::NEG_INFINITY;

#[derive(Clone, Copy, Debug)]
struct Node {
    key: f64,
    pos: u32,
}

/// Combine favours the higher key; ties keep the left (lower id) node.
fn combine(left: Node, right: Node) -> Node {
    if right.key > left.key {
        right
    } else {
        left
    }
}

pub struct MaxSegTree {
    size: usize,
    nodes: Vec<Node>,
}

impl MaxSegTree {
    /// Builds a tree from initial keys (one per offline vertex).
    pub fn build(keys: &[f64]) -> Self {
        let n = keys.len().max(1);
        let size = n.next_power_of_two();
        let mut nodes = vec![Node { key: EXHAUSTED, pos: u32::MAX }; 2 * size];
        for (i, &k) in keys.iter().enumerate() {
            nodes[size + i] = Node { key: k, pos: i as u32 };
        }
        for i in (1..size).rev() {
            nodes[i] = combine(nodes[2 * i], nodes[2 * i + 1]);
        }
        MaxSegTree { size, nodes }
    }

    /// Current key of vertex `i`.
    pub fn key(&self, i: usize) -> f64 {
        self.nodes[self.size + i].key
    }

    /// Sets the key of vertex `i` (use [`EXHAUSTED`] to retire it).
    pub fn set(&mut self, i: usize, key: f64) {
        let mut idx = self.size + i;
        self.nodes[idx].key = key;
        idx /= 2;
        while idx >= 1 {
            self.nodes[idx] = combine(self.nodes[2 * idx], self.nodes[2 * idx + 1]);
            if idx == 1 {
                break;
            }
            idx /= 2;
        }
    }

    /// Maximum-key vertex in `[lo, hi)`, ties to the lowest id; `None` when
    /// the range is empty or fully exhausted.
    pub fn max_in(&self, lo: usize, hi: usize) -> Option<(f64, u32)> {
        if lo >= hi {
            return None;
        }
        let mut l = self.size + lo;
        let mut r = self.size + hi;
        let mut left_acc: Option<Node> = None;
        let mut right_acc: Option<Node> = None;
        while l < r {
            if l & 1 == 1 {
                let node = self.nodes[l];
                left_acc = Some(match left_acc {
                    Some(acc) => combine(acc, node),
                    None => node,
                });
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                let node = self.nodes[r];
                right_acc = Some(match right_acc {
                    Some(acc) => combine(node, acc),
                    None => node,
                });
            }
            l /= 2;
            r /= 2;
        }
        let best = match (left_acc, right_acc) {
            (Some(a), Some(b)) => combine(a, b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => return None,
        };
        if best.key == EXHAUSTED {
            None
        } else {
            Some((best.key, best.pos))
        }
    }
}
