//! Exact filling volumes of 0-cycles by min-cost flow.
//!
//! The cube problem sends every + point either to a − point (Euclidean
//! cost) or to a boundary reservoir (cost = distance to `∂[0,1]^d`), and
//! every − point is fed by a + point or by the reservoir. The sphere problem
//! is a perfect matching under geodesic cost.
//!
//! Both solve on a sparse candidate set (nearest neighbors in each
//! direction) and then certify the result against every omitted pair with
//! the final potentials. A violating pair is added already saturated, and
//! the resulting imbalance is routed back with a few shortest paths between
//! two auxiliary nodes, until no omitted pair has negative reduced cost. In the cube,
//! pairs with `|p − m| ≥ b(p) + b(m)` are dominated by two boundary moves
//! and never enter the graph.

use alloc::vec;
use alloc::vec::Vec;

use super::flow::{MinCostFlow, SLACK_TOL};
use super::TransportPlan;
use crate::chains::{Ambient, Sign, ZeroCycle};
use crate::error::{invalid, Error, Result};

/// Nearest-neighbor candidates per point in each direction (cube).
pub const CANDIDATE_NEIGHBORS: usize = 10;
/// Sphere matchings reach further, so they start from a larger set.
pub const SPHERE_NEIGHBORS: usize = 32;
/// Problems with at most this many + × − pairs use every admissible pair.
const DENSE_PAIRS: usize = 4096;
const MAX_ROUNDS: usize = 500;

/// Euclidean distance from `p` to the boundary of the unit cube.
pub fn boundary_distance(p: &[f64]) -> f64 {
    p.iter().map(|&x| x.min(1.0 - x)).fold(f64::INFINITY, f64::min).max(0.0)
}

struct Split {
    pos: Vec<usize>,
    neg: Vec<usize>,
}

fn split(z: &ZeroCycle) -> Split {
    let mut s = Split { pos: Vec::new(), neg: Vec::new() };
    for (i, p) in z.points().iter().enumerate() {
        match p.sign {
            Sign::Pos => s.pos.push(i),
            Sign::Neg => s.neg.push(i),
        }
    }
    s
}

/// Candidate sets `cand[i]` (sorted indices into the − list) built from the
/// `k` cheapest admissible partners of each + point and of each − point.
fn candidates<C>(a: usize, b: usize, k: usize, cost: C) -> Vec<Vec<u32>>
where
    C: Fn(usize, usize) -> Option<f64>,
{
    let mut cand: Vec<Vec<u32>> = vec![Vec::new(); a];
    if a * b <= DENSE_PAIRS {
        for (i, c) in cand.iter_mut().enumerate() {
            c.extend((0..b).filter(|&j| cost(i, j).is_some()).map(|j| j as u32));
        }
        return cand;
    }
    let mut scratch: Vec<(f64, u32)> = Vec::with_capacity(a.max(b));
    let pick = |scratch: &mut Vec<(f64, u32)>| {
        if scratch.len() > k {
            scratch.select_nth_unstable_by(k, |x, y| x.0.total_cmp(&y.0));
            scratch.truncate(k);
        }
    };
    for (i, c) in cand.iter_mut().enumerate() {
        scratch.clear();
        scratch.extend((0..b).filter_map(|j| cost(i, j).map(|d| (d, j as u32))));
        pick(&mut scratch);
        c.extend(scratch.iter().map(|x| x.1));
    }
    for j in 0..b {
        scratch.clear();
        scratch.extend((0..a).filter_map(|i| cost(i, j).map(|d| (d, i as u32))));
        pick(&mut scratch);
        for &(_, i) in scratch.iter() {
            cand[i as usize].push(j as u32);
        }
    }
    for c in cand.iter_mut() {
        c.sort_unstable();
        c.dedup();
    }
    cand
}

fn flat_coords(z: &ZeroCycle, idx: &[usize]) -> Vec<f64> {
    idx.iter().flat_map(|&i| z.points()[i].pos.iter().copied()).collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::sqrt(s)
}

/// Node layout shared by both problems: `+` point `i` is node `p0 + i`, `−`
/// point `j` is node `m0 + j`, and the last two nodes are auxiliary.
struct Layout {
    p0: usize,
    m0: usize,
    aux: usize,
}

/// Adds every omitted pair flagged by `violating` (which receives
/// `π(p) − π(m)` and returns the pair cost when its reduced cost is
/// negative), saturating it and repairing the imbalance, until none is left.
fn certify<F>(
    g: &mut MinCostFlow,
    at: &Layout,
    cand: &mut [Vec<u32>],
    b: usize,
    pair_edges: &mut Vec<(usize, usize, usize)>,
    violating: F,
) -> Result<()>
where
    F: Fn(usize, usize, f64) -> Option<f64>,
{
    for _ in 0..MAX_ROUNDS {
        let mut new_edges = Vec::new();
        let pm: Vec<f64> = (0..b).map(|j| g.potential(at.m0 + j)).collect();
        for (i, c) in cand.iter_mut().enumerate() {
            let pi = g.potential(at.p0 + i);
            // only the most violated pair of each row enters per round
            let mut worst: Option<(usize, f64, f64)> = None;
            for (j, &q) in pm.iter().enumerate() {
                // costs are nonnegative, so only a − point with a higher
                // potential can price out this row
                let sh = pi - q;
                if sh >= -SLACK_TOL {
                    continue;
                }
                let Some(cost) = violating(i, j, sh) else { continue };
                if c.binary_search(&(j as u32)).is_ok() {
                    continue;
                }
                if worst.is_none_or(|w| cost + sh < w.1) {
                    worst = Some((j, cost + sh, cost));
                }
            }
            if let Some((j, _, cost)) = worst {
                let at = c.partition_point(|&x| (x as usize) < j);
                c.insert(at, j as u32);
                new_edges.push((i, j, cost));
            }
        }
        if new_edges.is_empty() {
            let slack = g.max_slack_violation();
            if slack > SLACK_TOL {
                return Err(Error::Solver(alloc::format!("complementary slackness violated by {slack:e}")));
            }
            return Ok(());
        }
        let mut excess = vec![0i64; g.nodes()];
        for &(i, j, cost) in &new_edges {
            let e = g.add_edge(at.p0 + i, at.m0 + j, 1, cost);
            g.force_flow(e, 1);
            excess[at.p0 + i] -= 1;
            excess[at.m0 + j] += 1;
            pair_edges.push((i, j, e));
        }
        let (src, snk) = (at.aux, at.aux + 1);
        let hi = (0..excess.len()).filter(|&v| excess[v] > 0).map(|v| g.potential(v)).fold(f64::MIN, f64::max);
        let lo = (0..excess.len()).filter(|&v| excess[v] < 0).map(|v| g.potential(v)).fold(f64::MAX, f64::min);
        g.set_potential(src, hi);
        g.set_potential(snk, lo);
        let mut aux_edges = Vec::new();
        let mut units = 0;
        for (v, &x) in excess.iter().enumerate() {
            if x > 0 {
                aux_edges.push(g.add_edge(src, v, x, 0.0));
                units += x;
            } else if x < 0 {
                aux_edges.push(g.add_edge(v, snk, -x, 0.0));
            }
        }
        g.solve(src, snk, units)?;
        for e in aux_edges {
            g.disable(e);
        }
    }
    Err(Error::Solver("candidate set did not stabilize".into()))
}

/// Exact relative filling volume of a 0-cycle in `[0,1]^d`.
pub fn fv_cube(z: &ZeroCycle) -> Result<(f64, TransportPlan)> {
    let Ambient::Cube(d) = z.ambient() else {
        return Err(invalid!("fv_cube needs a cube 0-cycle, got {:?}", z.ambient()));
    };
    let sp = split(z);
    let (a, b) = (sp.pos.len(), sp.neg.len());
    let pc = flat_coords(z, &sp.pos);
    let mc = flat_coords(z, &sp.neg);
    let bp: Vec<f64> = pc.chunks(d).map(boundary_distance).collect();
    let bm: Vec<f64> = mc.chunks(d).map(boundary_distance).collect();
    let pair_cost = |i: usize, j: usize| euclid(&pc[i * d..(i + 1) * d], &mc[j * d..(j + 1) * d]);
    let admissible = |i: usize, j: usize| {
        let c = pair_cost(i, j);
        (c < bp[i] + bm[j]).then_some(c)
    };
    let mut cand = candidates(a, b, CANDIDATE_NEIGHBORS, admissible);

    let (s, t, r) = (0usize, 1usize, 2usize);
    let at = Layout { p0: 3, m0: 3 + a, aux: 3 + a + b };
    let mut g = MinCostFlow::new(at.aux + 2);
    g.add_edge(s, r, b as i64, 0.0);
    g.add_edge(r, t, a as i64, 0.0);
    let mut to_res = Vec::with_capacity(a);
    let mut from_res = Vec::with_capacity(b);
    for i in 0..a {
        g.add_edge(s, at.p0 + i, 1, 0.0);
        to_res.push(g.add_edge(at.p0 + i, r, 1, bp[i]));
    }
    for j in 0..b {
        g.add_edge(at.m0 + j, t, 1, 0.0);
        from_res.push(g.add_edge(r, at.m0 + j, 1, bm[j]));
    }
    let mut pair_edges = Vec::new();
    for (i, c) in cand.iter().enumerate() {
        for &j in c {
            let j = j as usize;
            pair_edges.push((i, j, g.add_edge(at.p0 + i, at.m0 + j, 1, pair_cost(i, j))));
        }
    }
    g.solve(s, t, (a + b) as i64)?;
    certify(&mut g, &at, &mut cand, b, &mut pair_edges, |i, j, shift| {
        admissible(i, j).filter(|&c| c + shift < -SLACK_TOL)
    })?;

    let mut plan = TransportPlan::default();
    for &(i, j, e) in &pair_edges {
        if g.flow(e) > 0 {
            plan.pairings.push((sp.pos[i], sp.neg[j], pair_cost(i, j)));
        }
    }
    for (i, &e) in to_res.iter().enumerate() {
        if g.flow(e) > 0 {
            plan.boundary_assignments.push((sp.pos[i], bp[i]));
        }
    }
    for (j, &e) in from_res.iter().enumerate() {
        if g.flow(e) > 0 {
            plan.boundary_assignments.push((sp.neg[j], bm[j]));
        }
    }
    plan.total_cost = plan.pairings.iter().map(|p| p.2).sum::<f64>()
        + plan.boundary_assignments.iter().map(|p| p.1).sum::<f64>();
    Ok((plan.total_cost, plan))
}

/// Geodesic distance on the unit sphere.
pub fn geodesic(x: &[f64], y: &[f64]) -> f64 {
    libm::acos(crate::linalg::dot(x, y).clamp(-1.0, 1.0))
}

/// Exact filling volume of a balanced 0-cycle on a sphere: min-cost perfect
/// matching of + to − points under geodesic distance.
pub fn fv_sphere(z: &ZeroCycle) -> Result<(f64, TransportPlan)> {
    let Ambient::Sphere(d) = z.ambient() else {
        return Err(invalid!("fv_sphere needs a sphere 0-cycle, got {:?}", z.ambient()));
    };
    if !z.is_balanced() {
        return Err(invalid!("sphere 0-cycle is unbalanced (net sign {})", z.net_sign()));
    }
    let len = d + 1;
    let sp = split(z);
    let a = sp.pos.len();
    let pc = flat_coords(z, &sp.pos);
    let mc = flat_coords(z, &sp.neg);
    let pp = |i: usize| &pc[i * len..(i + 1) * len];
    let mp = |j: usize| &mc[j * len..(j + 1) * len];
    // Chord length is monotone in geodesic distance, so it ranks candidates.
    let mut cand = candidates(a, a, SPHERE_NEIGHBORS, |i, j| Some(euclid(pp(i), mp(j))));

    let (s, t) = (0usize, 1usize);
    let at = Layout { p0: 2, m0: 2 + a, aux: 2 + 2 * a };
    // The candidate graph need not contain a perfect matching. When it does
    // not, the + points left unmatched get every partner and the solve restarts.
    let (mut g, mut pair_edges) = loop {
        let mut g = MinCostFlow::new(at.aux + 2);
        let mut feed = Vec::with_capacity(a);
        for i in 0..a {
            feed.push(g.add_edge(s, at.p0 + i, 1, 0.0));
            g.add_edge(at.m0 + i, t, 1, 0.0);
        }
        let mut pair_edges = Vec::new();
        for (i, c) in cand.iter().enumerate() {
            for &j in c {
                let j = j as usize;
                pair_edges.push((i, j, g.add_edge(at.p0 + i, at.m0 + j, 1, geodesic(pp(i), mp(j)))));
            }
        }
        match g.solve(s, t, a as i64) {
            Ok(_) => break (g, pair_edges),
            Err(Error::Solver(_)) => {
                for (i, &e) in feed.iter().enumerate() {
                    if g.flow(e) == 0 {
                        cand[i] = (0..a as u32).collect();
                    }
                }
            }
            Err(e) => return Err(e),
        }
    };
    certify(&mut g, &at, &mut cand, a, &mut pair_edges, |i, j, shift| {
        // geodesic ≥ chord, so the chord screens out most pairs cheaply
        if euclid(pp(i), mp(j)) + shift >= -SLACK_TOL {
            return None;
        }
        let c = geodesic(pp(i), mp(j));
        (c + shift < -SLACK_TOL).then_some(c)
    })?;

    let mut plan = TransportPlan::default();
    for &(i, j, e) in &pair_edges {
        if g.flow(e) > 0 {
            plan.pairings.push((sp.pos[i], sp.neg[j], geodesic(pp(i), mp(j))));
        }
    }
    plan.total_cost = plan.pairings.iter().map(|p| p.2).sum();
    Ok((plan.total_cost, plan))
}
