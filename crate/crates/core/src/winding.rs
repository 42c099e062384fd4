//! Filling of polygonal 1-cycles in the unit square by their winding number.
//!
//! A 1-cycle `Z` in `([0,1]², ∂[0,1]²)` bounds `w + c` for the integer
//! winding function `w` and any constant `c`, so its filling volume is
//! `min_c ∫|w + c|`. The integral is taken on a raster of side `h`.

use alloc::vec;
use alloc::vec::Vec;

use crate::chains::PolyCycle;
use crate::error::{invalid, Error, Result};

/// Largest raster cell side.
pub const MAX_H: f64 = 1.0 / 16.0;
const MAX_JITTERS: usize = 100;
/// Rays closer than this to a vertex ordinate are moved.
const VERTEX_CLEARANCE: f64 = 1e-12;

/// Winding numbers at the cell centers of an `m × m` raster, row-major with
/// rows along `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindingGrid {
    pub m: usize,
    pub values: Vec<i64>,
}

impl WindingGrid {
    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Winding number of the cell with column `i` (x) and row `j` (y).
    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.values[j * self.m + i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingFill {
    pub value: f64,
    /// Bound on the raster error: `√2·h·perimeter + 2h²·segments`.
    pub error_bound: f64,
    /// The minimizing integer shift `c`.
    pub shift: i64,
}

fn raster_size(h: f64) -> Result<usize> {
    if !(h > 0.0 && h <= MAX_H) {
        return Err(invalid!("raster side must lie in (0, 1/16], got {h}"));
    }
    let m = libm::round(1.0 / h);
    if (m * h - 1.0).abs() > 1e-9 {
        return Err(invalid!("1/h must be an integer, got h = {h}"));
    }
    Ok(m as usize)
}

/// Oriented segments of a planar 1-cycle.
fn segments(z: &PolyCycle) -> Result<Vec<([f64; 2], [f64; 2])>> {
    if z.n() != 2 || z.k() != 1 {
        return Err(invalid!("winding needs a 1-cycle in the square, got n = {}, k = {}", z.n(), z.k()));
    }
    if !z.is_closed() {
        return Err(Error::Structural("1-chain has boundary in the open square".into()));
    }
    Ok(z.cells()
        .iter()
        .map(|c| {
            let (a, b) = ([c.verts[0][0], c.verts[0][1]], [c.verts[1][0], c.verts[1][1]]);
            if c.coef.value() > 0 { (a, b) } else { (b, a) }
        })
        .collect())
}

/// Deterministic jitter sequence in `(−1/2, 1/2)`.
fn jitter(attempt: usize) -> f64 {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    let t = attempt as f64 * GOLDEN;
    t - libm::floor(t) - 0.5
}

/// Moves `base` off every listed coordinate by a small deterministic jitter.
fn clear_of(base: f64, h: f64, coords: &[f64]) -> Result<f64> {
    let mut v = base;
    let mut attempt = 0;
    while coords.iter().any(|&c| (c - v).abs() < VERTEX_CLEARANCE) {
        attempt += 1;
        if attempt > MAX_JITTERS {
            return Err(Error::DegenerateSlice(alloc::format!("raster line near {base} keeps meeting vertices")));
        }
        v = base + 1e-6 * h * jitter(attempt);
    }
    Ok(v)
}

/// Intersection numbers of `Z` with paths from the center of the corner
/// cell: up the first column of centers, then right along the row. A path
/// moving right across a downward segment, or up across a rightward one,
/// counts +1, so counterclockwise loops wind +1. Since `Z` is a cycle
/// relative to the boundary, the count only depends on the endpoints.
pub fn winding_function(z: &PolyCycle, h: f64) -> Result<WindingGrid> {
    let m = raster_size(h)?;
    let segs = segments(z)?;
    let xs: Vec<f64> = segs.iter().flat_map(|(a, b)| [a[0], b[0]]).collect();
    let ys: Vec<f64> = segs.iter().flat_map(|(a, b)| [a[1], b[1]]).collect();
    let x0 = clear_of(0.5 * h, h, &xs)?;
    let rows: Vec<f64> = (0..m).map(|j| clear_of((j as f64 + 0.5) * h, h, &ys)).collect::<Result<_>>()?;

    // crossings of the vertical line x = x0
    let mut vertical: Vec<(f64, i64)> = Vec::new();
    for (a, b) in &segs {
        if (a[0] < x0) != (b[0] < x0) {
            let t = (x0 - a[0]) / (b[0] - a[0]);
            vertical.push((a[1] + t * (b[1] - a[1]), if b[0] > a[0] { 1 } else { -1 }));
        }
    }
    let lift = |y: f64| -> i64 {
        let (lo, hi, s) = if y >= rows[0] { (rows[0], y, 1) } else { (y, rows[0], -1) };
        s * vertical.iter().filter(|v| v.0 > lo && v.0 < hi).map(|v| v.1).sum::<i64>()
    };

    let mut values = vec![0i64; m * m];
    let mut hits: Vec<(f64, i64)> = Vec::new();
    for (j, &y) in rows.iter().enumerate() {
        hits.clear();
        for (a, b) in &segs {
            if (a[1] < y) != (b[1] < y) {
                let t = (y - a[1]) / (b[1] - a[1]);
                let x = a[0] + t * (b[0] - a[0]);
                if x > x0 {
                    hits.push((x, if b[1] > a[1] { -1 } else { 1 }));
                }
            }
        }
        hits.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut w = lift(y);
        let mut next = 0;
        for i in 0..m {
            let x = if i == 0 { x0 } else { (i as f64 + 0.5) * h };
            while next < hits.len() && hits[next].0 < x {
                w += hits[next].1;
                next += 1;
            }
            values[j * m + i] = w;
        }
    }
    Ok(WindingGrid { m, values })
}

/// `min_c h² Σ |w + c|` over integer `c ∈ [−max w, −min w]`.
pub fn fill_from_grid(grid: &WindingGrid) -> (f64, i64) {
    let (lo, hi) = grid.values.iter().fold((0i64, 0i64), |(l, u), &v| (l.min(v), u.max(v)));
    let mut count = vec![0u64; (hi - lo + 1) as usize];
    for &v in &grid.values {
        count[(v - lo) as usize] += 1;
    }
    let area = grid.h() * grid.h();
    let mut best = (f64::INFINITY, 0i64);
    for c in -hi..=-lo {
        let s: u64 = count.iter().enumerate().map(|(k, &n)| n * (k as i64 + lo + c).unsigned_abs()).sum();
        let v = s as f64 * area;
        // ties go to the shift closest to zero
        if v < best.0 || (v == best.0 && c.abs() < best.1.abs()) {
            best = (v, c);
        }
    }
    best
}

pub fn fv_winding(z: &PolyCycle, h: f64) -> Result<WindingFill> {
    let grid = winding_function(z, h)?;
    let (value, shift) = fill_from_grid(&grid);
    let h = grid.h();
    let error_bound = core::f64::consts::SQRT_2 * h * z.mass() + 2.0 * h * h * z.cells().len() as f64;
    Ok(WindingFill { value, error_bound, shift })
}
