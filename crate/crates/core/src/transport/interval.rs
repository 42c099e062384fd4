//! Closed forms on `[0,1]`. With `G(x) = Σ sign_i · 1{pos_i ≤ x}`, every
//! filling relative to `{0,1}` has density `G + c` for a constant `c`.

use alloc::vec::Vec;

use crate::chains::{Ambient, ZeroCycle};
use crate::error::{invalid, Result};

/// `(value of G, length)` for the pieces of `[0,1]` where `G` is constant.
fn level_pieces(z: &ZeroCycle) -> Result<Vec<(i64, f64)>> {
    if z.ambient() != Ambient::Cube(1) {
        return Err(invalid!("interval formulas need a 0-cycle on [0,1], got {:?}", z.ambient()));
    }
    let mut pts: Vec<(f64, i64)> = z.points().iter().map(|p| (p.pos[0], p.sign.value() as i64)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pieces = Vec::with_capacity(pts.len() + 1);
    let (mut x, mut g) = (0.0, 0i64);
    for (p, s) in pts {
        if p > x {
            pieces.push((g, p - x));
            x = p;
        }
        g += s;
    }
    if x < 1.0 {
        pieces.push((g, 1.0 - x));
    }
    Ok(pieces)
}

/// Filling volume on the interval: `min_c ∫ |G + c|`, attained at an integer
/// `c` (minus a weighted median of the levels of `G`).
pub fn fv_interval(z: &ZeroCycle) -> Result<f64> {
    let mut pieces = level_pieces(z)?;
    if pieces.is_empty() {
        return Ok(0.0);
    }
    pieces.sort_by_key(|p| p.0);
    let total: f64 = pieces.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    let mut median = pieces[0].0;
    for &(g, len) in &pieces {
        acc += len;
        median = g;
        if acc >= total / 2.0 {
            break;
        }
    }
    Ok(pieces.iter().map(|&(g, len)| len * (g - median).abs() as f64).sum())
}

/// Mass of the filling with `c = 0`, i.e. `∫ |G|`.
pub fn mass_f0(z: &ZeroCycle) -> Result<f64> {
    Ok(level_pieces(z)?.iter().map(|&(g, len)| len * g.abs() as f64).sum())
}
