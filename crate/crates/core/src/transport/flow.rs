//! Successive-shortest-path min-cost flow with node potentials.
//!
//! Dijkstra stops as soon as the sink is settled; unsettled nodes have their
//! potential advanced by the sink distance, which keeps every residual
//! reduced cost nonnegative.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::error::{Error, Result};

/// Reduced-cost slack accepted by the optimality check.
pub const SLACK_TOL: f64 = 1e-9;


#[derive(Clone, Copy, PartialEq)]
struct Key(f64, u32);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Clone, Debug)]
pub struct MinCostFlow {
    adj: Vec<Vec<u32>>,
    to: Vec<u32>,
    cap: Vec<i64>,
    cost: Vec<f64>,
    potential: Vec<f64>,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        MinCostFlow {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
            potential: vec![0.0; nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.adj.len()
    }

    /// Adds `u → v` with capacity `cap` and nonnegative `cost`; returns the
    /// edge id. The residual twin is `id ^ 1`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64, cost: f64) -> usize {
        debug_assert!(cost >= 0.0);
        let id = self.to.len();
        self.to.extend([v as u32, u as u32]);
        self.cap.extend([cap, 0]);
        self.cost.extend([cost, -cost]);
        self.adj[u].push(id as u32);
        self.adj[v].push(id as u32 + 1);
        id
    }

    /// Flow currently on forward edge `id`.
    pub fn flow(&self, id: usize) -> i64 {
        self.cap[id ^ 1]
    }

    pub fn potential(&self, node: usize) -> f64 {
        self.potential[node]
    }

    pub fn set_potential(&mut self, node: usize, value: f64) {
        self.potential[node] = value;
    }

    /// Reduced cost of edge `id` under the current potentials.
    pub fn reduced_cost(&self, id: usize) -> f64 {
        self.cost[id] + self.potential[self.to[id ^ 1] as usize] - self.potential[self.to[id] as usize]
    }

    /// Pushes `amount` units onto edge `id` regardless of its reduced cost.
    pub fn force_flow(&mut self, id: usize, amount: i64) {
        self.cap[id] -= amount;
        self.cap[id ^ 1] += amount;
    }

    /// Removes edge `id` and its twin from the residual graph.
    pub fn disable(&mut self, id: usize) {
        self.cap[id] = 0;
        self.cap[id ^ 1] = 0;
    }

    /// Sends `required` units from `s` to `t` at minimum cost. Every edge
    /// leaving `s` must end up saturated, i.e. `required` equals the total
    /// capacity out of `s`.
    ///
    /// Units are routed one source at a time: each search starts at a single
    /// successor of `s` with spare capacity and never re-enters `s`, so it
    /// only explores the neighborhood needed to reach `t`. Only settled nodes
    /// have their potential moved.
    pub fn solve(&mut self, s: usize, t: usize, required: i64) -> Result<f64> {
        let n = self.nodes();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut parent = vec![u32::MAX; n];
        let mut touched: Vec<u32> = Vec::new();
        let mut heap = BinaryHeap::new();
        let mut sent = 0i64;
        let mut total = 0.0;
        let mut arc = 0;
        let mut stalled = 0;
        let starved = |sent: i64| Error::Solver(alloc::format!("only {sent} of {required} units can be routed"));
        while sent < required {
            if arc == self.adj[s].len() {
                arc = 0;
            }
            let first = self.adj[s][arc] as usize;
            if self.cap[first] <= 0 {
                arc += 1;
                stalled += 1;
                if stalled > self.adj[s].len() {
                    return Err(starved(sent));
                }
                continue;
            }
            let u = self.to[first] as usize;
            for &v in &touched {
                dist[v as usize] = f64::INFINITY;
                done[v as usize] = false;
            }
            touched.clear();
            heap.clear();
            dist[u] = 0.0;
            touched.push(u as u32);
            heap.push(Reverse(Key(0.0, u as u32)));
            while let Some(Reverse(Key(d, x))) = heap.pop() {
                let x = x as usize;
                if done[x] {
                    continue;
                }
                done[x] = true;
                if x == t {
                    break;
                }
                let px = self.potential[x];
                for &e in &self.adj[x] {
                    let e = e as usize;
                    if self.cap[e] <= 0 {
                        continue;
                    }
                    let v = self.to[e] as usize;
                    if done[v] || v == s {
                        continue;
                    }
                    let nd = d + (self.cost[e] + px - self.potential[v]).max(0.0);
                    if nd < dist[v] {
                        if dist[v] == f64::INFINITY {
                            touched.push(v as u32);
                        }
                        dist[v] = nd;
                        parent[v] = e as u32;
                        heap.push(Reverse(Key(nd, v as u32)));
                    }
                }
            }
            if !done[t] {
                // this source is cut off for now; others may open a route
                arc += 1;
                stalled += 1;
                if stalled > self.adj[s].len() {
                    return Err(starved(sent));
                }
                continue;
            }
            stalled = 0;
            let dt = dist[t];
            for &v in &touched {
                let v = v as usize;
                if done[v] {
                    self.potential[v] += dist[v] - dt;
                }
            }
            let mut push = (required - sent).min(self.cap[first]);
            let mut v = t;
            while v != u {
                let e = parent[v] as usize;
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1] as usize;
            }
            let mut v = t;
            while v != u {
                let e = parent[v] as usize;
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                total += push as f64 * self.cost[e];
                v = self.to[e ^ 1] as usize;
            }
            self.cap[first] -= push;
            self.cap[first ^ 1] += push;
            total += push as f64 * self.cost[first];
            sent += push;
        }
        // `s` sat outside every search; give it the largest potential that
        // keeps the residual edges back into it nonnegative.
        let mut ps = f64::INFINITY;
        for &e in &self.adj[s] {
            let e = e as usize;
            if self.cap[e ^ 1] > 0 {
                ps = ps.min(self.potential[self.to[e] as usize] - self.cost[e]);
            }
        }
        if ps.is_finite() {
            self.potential[s] = ps;
        }
        Ok(total)
    }

    /// Largest violation of reduced-cost nonnegativity over residual edges
    /// (0 when the potentials certify optimality).
    pub fn max_slack_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (u, edges) in self.adj.iter().enumerate() {
            for &e in edges {
                let e = e as usize;
                if self.cap[e] > 0 {
                    let rc = self.cost[e] + self.potential[u] - self.potential[self.to[e] as usize];
                    worst = worst.max(-rc);
                }
            }
        }
        worst
    }
}
