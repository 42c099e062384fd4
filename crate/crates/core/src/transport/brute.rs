//! Exhaustive oracle for tiny 0-cycles.

use alloc::vec::Vec;

use super::exact::{boundary_distance, geodesic};
use crate::chains::{Ambient, SignedPoint, ZeroCycle};
use crate::error::{invalid, Result};
use crate::linalg::dist;

pub const BRUTE_FORCE_MAX_POINTS: usize = 8;

fn cube_rec(pts: &[SignedPoint], remaining: &mut Vec<usize>) -> f64 {
    let Some(i) = remaining.pop() else {
        return 0.0;
    };
    let mut best = boundary_distance(&pts[i].pos) + cube_rec(pts, remaining);
    for k in 0..remaining.len() {
        let j = remaining[k];
        if pts[j].sign == pts[i].sign {
            continue;
        }
        remaining.swap_remove(k);
        best = best.min(dist(&pts[i].pos, &pts[j].pos) + cube_rec(pts, remaining));
        remaining.push(j);
        let last = remaining.len() - 1;
        remaining.swap(k, last);
    }
    remaining.push(i);
    best
}

fn sphere_rec(pos: &[&SignedPoint], neg: &mut Vec<&SignedPoint>, at: usize) -> f64 {
    if at == pos.len() {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for k in 0..neg.len() {
        let m = neg.swap_remove(k);
        best = best.min(geodesic(&pos[at].pos, &m.pos) + sphere_rec(pos, neg, at + 1));
        neg.push(m);
        let last = neg.len() - 1;
        neg.swap(k, last);
    }
    best
}

/// Minimum over every partial pairing plus boundary assignment (cube) or
/// every perfect matching (sphere). At most 8 points.
pub fn fv_bruteforce(z: &ZeroCycle) -> Result<f64> {
    if z.len() > BRUTE_FORCE_MAX_POINTS {
        return Err(invalid!("brute force is capped at {BRUTE_FORCE_MAX_POINTS} points, got {}", z.len()));
    }
    let pts = z.points();
    match z.ambient() {
        Ambient::Cube(_) => {
            let mut remaining: Vec<usize> = (0..pts.len()).collect();
            Ok(cube_rec(pts, &mut remaining))
        }
        Ambient::Sphere(_) => {
            if !z.is_balanced() {
                return Err(invalid!("sphere 0-cycle is unbalanced"));
            }
            let pos: Vec<&SignedPoint> = pts.iter().filter(|p| p.sign == crate::Sign::Pos).collect();
            let mut neg: Vec<&SignedPoint> = pts.iter().filter(|p| p.sign == crate::Sign::Neg).collect();
            Ok(sphere_rec(&pos, &mut neg, 0))
        }
    }
}
