//! Lipschitz dual witnesses for filling volumes in the cube.
//!
//! A witness is a finite sum of pyramid functions over axis-aligned cubes
//! inside `[0,1]^d`. It vanishes on the boundary, so for any 0-cycle `Z`
//! the ratio `∫_Z f / Lip f` is a lower bound for the relative filling
//! volume of `Z`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::chains::{Ambient, Pseudomanifold, ZeroCycle};
use crate::error::{invalid, Error, Result};
use crate::slicing::{dependency_graph, greedy_coloring, SliceAtom};

/// Finest dyadic grid (per side, as a power of two) on which the exact
/// Lipschitz constant of a planar witness is computed.
const EXACT_LIP_MAX_LEVEL: u32 = 10;

/// `coef · max(0, 1 − (2/ℓ)‖x − center‖_∞)` on the cube `corner + [0, ℓ]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PyramidAtom {
    pub corner: Vec<f64>,
    pub side: f64,
    pub coef: f64,
}

impl PyramidAtom {
    pub fn new(corner: Vec<f64>, side: f64, coef: f64) -> Result<Self> {
        if !(side > 0.0) {
            return Err(invalid!("pyramid side must be positive, got {side}"));
        }
        if corner.iter().any(|&c| c < -1e-12 || c + side > 1.0 + 1e-12) {
            return Err(invalid!("pyramid cube leaves the unit cube"));
        }
        Ok(PyramidAtom { corner, side, coef })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let half = 0.5 * self.side;
        let mut r = 0.0f64;
        for (xi, ci) in x.iter().zip(&self.corner) {
            r = r.max((xi - ci - half).abs());
            if r >= half {
                return 0.0;
            }
        }
        self.coef * (1.0 - r / half)
    }

    /// Lipschitz constant of this atom alone.
    pub fn lip(&self) -> f64 {
        2.0 * self.coef.abs() / self.side
    }
}

pub fn pyramid_eval(atom: &PyramidAtom, x: &[f64]) -> f64 {
    atom.eval(x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessFunction {
    d: usize,
    atoms: Vec<PyramidAtom>,
    scale_tags: Vec<u32>,
    certified_lip: f64,
}

impl WitnessFunction {
    /// A witness from arbitrary atoms; `certified_lip` must bound the
    /// Lipschitz constant of the sum.
    pub fn from_atoms(d: usize, atoms: Vec<PyramidAtom>, scale_tags: Vec<u32>, certified_lip: f64) -> Result<Self> {
        if scale_tags.len() != atoms.len() {
            return Err(invalid!("{} scale tags for {} atoms", scale_tags.len(), atoms.len()));
        }
        if atoms.iter().any(|a| a.corner.len() != d) {
            return Err(invalid!("atom dimension differs from {d}"));
        }
        if !(certified_lip >= 0.0) {
            return Err(invalid!("Lipschitz bound must be nonnegative"));
        }
        Ok(WitnessFunction { d, atoms, scale_tags, certified_lip })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn atoms(&self) -> &[PyramidAtom] {
        &self.atoms
    }

    pub fn scale_tags(&self) -> &[u32] {
        &self.scale_tags
    }

    pub fn certified_lip(&self) -> f64 {
        self.certified_lip
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.atoms.iter().map(|a| a.eval(x)).sum()
    }

    /// Multiplies every coefficient (and the certified bound) by `lambda ≥ 0`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut w = self.clone();
        w.atoms.iter_mut().for_each(|a| a.coef *= lambda);
        w.certified_lip *= lambda.abs();
        w
    }

    /// Exact Lipschitz constant for planar witnesses whose atoms all sit on
    /// one dyadic grid family: on the finest grid, each cell split by its
    /// two diagonals into four triangles carries a linear piece.
    pub fn exact_lip(&self) -> Option<f64> {
        match self.d {
            1 => Some(self.exact_lip_1d()),
            2 => self.exact_lip_2d(),
            _ => None,
        }
    }

    fn exact_lip_1d(&self) -> f64 {
        // breakpoints: every corner, center, and far end
        let mut xs: Vec<f64> = vec![0.0, 1.0];
        for a in &self.atoms {
            xs.extend([a.corner[0], a.corner[0] + 0.5 * a.side, a.corner[0] + a.side]);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let vals: Vec<f64> = xs.iter().map(|&x| self.eval(&[x])).collect();
        let mut best = 0.0f64;
        for i in 1..xs.len() {
            let dx = xs[i] - xs[i - 1];
            if dx > 0.0 {
                best = best.max((vals[i] - vals[i - 1]).abs() / dx);
            }
        }
        best
    }

    fn exact_lip_2d(&self) -> Option<f64> {
        let mut level = 0u32;
        for a in &self.atoms {
            let l = dyadic_level(a.side)?;
            for &c in &a.corner {
                let scaled = c * (1u64 << l) as f64;
                if (scaled - libm::round(scaled)).abs() > 1e-9 {
                    return None;
                }
            }
            level = level.max(l);
        }
        if level > EXACT_LIP_MAX_LEVEL {
            return None;
        }
        let m = 1usize << level;
        let h = 1.0 / m as f64;
        let corner_vals: Vec<f64> =
            (0..=m).flat_map(|i| (0..=m).map(move |j| (i, j))).map(|(i, j)| self.eval(&[i as f64 * h, j as f64 * h])).collect();
        let cv = |i: usize, j: usize| corner_vals[i * (m + 1) + j];
        let mut best = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let center = self.eval(&[(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
                let (a, b, c, d) = (cv(i, j), cv(i + 1, j), cv(i + 1, j + 1), cv(i, j + 1));
                // triangles (corner, corner, center); gradients in closed form
                let half = 0.5 * h;
                for (p, q, gx_sign, axis) in [(a, b, 1.0, 0), (b, c, 1.0, 1), (d, c, -1.0, 0), (a, d, -1.0, 1)] {
                    let along = (q - p) / h;
                    let across = (center - 0.5 * (p + q)) / half;
                    let (gx, gy) = if axis == 0 { (along, across * gx_sign) } else { (-across * gx_sign, along) };
                    best = best.max(libm::sqrt(gx * gx + gy * gy));
                }
            }
        }
        Some(best)
    }

    /// The smaller of the certified bound and, when available, the exact
    /// Lipschitz constant.
    pub fn lip_bound(&self) -> f64 {
        match self.exact_lip() {
            Some(e) => e.min(self.certified_lip),
            None => self.certified_lip,
        }
    }

    /// `Σ sign · W(point)` over the points of `z`.
    pub fn integrate(&self, z: &ZeroCycle) -> Result<f64> {
        self.check(z)?;
        Ok(z.points().iter().map(|p| p.sign.as_f64() * self.eval(&p.pos)).sum())
    }

    /// `∫_Z W / Lip W`, clamped at 0.
    pub fn lower_bound(&self, z: &ZeroCycle) -> Result<f64> {
        let integral = self.integrate(z)?;
        let lip = self.lip_bound();
        if lip == 0.0 {
            if integral.abs() > 1e-12 {
                return Err(Error::Internal(alloc::format!("witness has Lipschitz bound 0 but integral {integral}")));
            }
            return Ok(0.0);
        }
        Ok((integral / lip).max(0.0))
    }

    fn check(&self, z: &ZeroCycle) -> Result<()> {
        match z.ambient() {
            Ambient::Cube(d) if d == self.d => Ok(()),
            other => Err(invalid!("witness on [0,1]^{} cannot integrate a cycle in {other:?}", self.d)),
        }
    }
}

fn dyadic_level(side: f64) -> Option<u32> {
    let l = libm::round(-libm::log2(side));
    if l < 0.0 || l > 62.0 || (libm::ldexp(1.0, -(l as i32)) - side).abs() > 1e-12 * side {
        return None;
    }
    Some(l as u32)
}

pub fn integrate_witness(w: &WitnessFunction, z: &ZeroCycle) -> Result<f64> {
    w.integrate(z)
}

pub fn lip_bound(w: &WitnessFunction) -> f64 {
    w.lip_bound()
}

pub fn witness_lower_bound(w: &WitnessFunction, z: &ZeroCycle) -> Result<f64> {
    w.lower_bound(z)
}

fn cube_dim(z: &ZeroCycle) -> Result<usize> {
    match z.ambient() {
        Ambient::Cube(d) => Ok(d),
        other => Err(invalid!("witnesses live in the cube, got {other:?}")),
    }
}

/// Half-open cell index `[k/m, (k+1)/m)`, with 1 in the last cell.
fn cell_of(x: f64, m: usize) -> usize {
    ((x * m as f64) as usize).min(m - 1)
}

/// Cells per side for the default grid side `≈ N^{−1/d}`.
pub fn default_grid_cells(n_points: usize, d: usize) -> usize {
    let side = libm::pow(n_points.max(1) as f64, -1.0 / d as f64);
    (libm::round(1.0 / side) as usize).max(1)
}

/// One atom of coefficient `r · sign(net count)` per cell of the grid of
/// side `r = 1 / cells`.
pub fn build_grid_witness(z: &ZeroCycle, cells: usize) -> Result<WitnessFunction> {
    let d = cube_dim(z)?;
    if cells == 0 {
        return Err(invalid!("grid needs at least one cell per side"));
    }
    let r = 1.0 / cells as f64;
    let mut net: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for p in z.points() {
        let key = p.pos.iter().map(|&x| cell_of(x, cells)).collect();
        *net.entry(key).or_default() += i64::from(p.sign.value());
    }
    let atoms: Vec<PyramidAtom> = net
        .into_iter()
        .filter(|&(_, c)| c != 0)
        .map(|(key, c)| PyramidAtom {
            corner: key.iter().map(|&k| k as f64 * r).collect(),
            side: r,
            coef: r * c.signum() as f64,
        })
        .collect();
    let lip = if atoms.is_empty() { 0.0 } else { 2.0 };
    let tags = vec![0; atoms.len()];
    WitnessFunction::from_atoms(d, atoms, tags, lip)
}

/// `max(1, ⌊0.1 · log₂ N⌋)`.
pub fn default_max_scale(n_points: usize) -> u32 {
    (libm::floor(0.1 * libm::log2(n_points.max(1) as f64)) as u32).max(1)
}

/// Dyadic squares of side `2^{−r}`, `r = 1..=max_scale`, each weighted by
/// its own integral against `z`, capped at `κ √N 2^{−r}`.
pub fn build_multiscale_witness(z: &ZeroCycle, max_scale: u32, kappa: f64) -> Result<WitnessFunction> {
    let d = cube_dim(z)?;
    if d != 2 {
        return Err(invalid!("the multiscale witness is planar, got d = {d}"));
    }
    if max_scale == 0 || max_scale > 30 {
        return Err(invalid!("max_scale must be in 1..=30, got {max_scale}"));
    }
    if !(kappa >= 0.0) {
        return Err(invalid!("cap must be nonnegative, got {kappa}"));
    }
    let sqrt_n = libm::sqrt(z.len() as f64);
    let mut atoms = Vec::new();
    let mut tags = Vec::new();
    let mut lip = 0.0;
    for r in 1..=max_scale {
        let m = 1usize << r;
        let side = 1.0 / m as f64;
        let cap = kappa * sqrt_n * side;
        let mut raw: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for p in z.points() {
            let key = (cell_of(p.pos[0], m), cell_of(p.pos[1], m));
            let probe = PyramidAtom { corner: vec![key.0 as f64 * side, key.1 as f64 * side], side, coef: 1.0 };
            *raw.entry(key).or_default() += p.sign.as_f64() * probe.eval(&p.pos);
        }
        let mut top = 0.0f64;
        for ((s, t), c) in raw {
            let stored = c.signum() * c.abs().min(cap);
            if stored == 0.0 {
                continue;
            }
            top = top.max(stored.abs());
            atoms.push(PyramidAtom { corner: vec![s as f64 * side, t as f64 * side], side, coef: stored });
            tags.push(r);
        }
        lip += 2.0 * m as f64 * top;
    }
    WitnessFunction::from_atoms(2, atoms, tags, lip)
}

/// Default interval count for the one-dimensional witness.
pub const DEFAULT_INTERVALS: usize = 16;

/// `intervals` equal intervals, each weighted by its signed point count
/// capped at `C √(N / R)`.
pub fn build_interval_witness(z: &ZeroCycle, intervals: usize, cap: f64) -> Result<WitnessFunction> {
    let d = cube_dim(z)?;
    if d != 1 {
        return Err(invalid!("the interval witness is one-dimensional, got d = {d}"));
    }
    if intervals == 0 {
        return Err(invalid!("need at least one interval"));
    }
    if !(cap >= 0.0) {
        return Err(invalid!("cap must be nonnegative, got {cap}"));
    }
    let mut count = vec![0i64; intervals];
    for p in z.points() {
        count[cell_of(p.pos[0], intervals)] += i64::from(p.sign.value());
    }
    let limit = cap * libm::sqrt(z.len() as f64 / intervals as f64);
    let side = 1.0 / intervals as f64;
    let mut atoms = Vec::new();
    let mut top = 0.0f64;
    for (s, &c) in count.iter().enumerate() {
        let coef = (c.signum() as f64) * (c.unsigned_abs() as f64).min(limit);
        if coef != 0.0 {
            top = top.max(coef.abs());
            atoms.push(PyramidAtom { corner: vec![s as f64 * side], side, coef });
        }
    }
    let tags = vec![0; atoms.len()];
    WitnessFunction::from_atoms(1, atoms, tags, 2.0 * intervals as f64 * top)
}

/// Construction parameters; `None` picks the defaults for the cycle size.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessParams {
    pub grid_cells: Option<usize>,
    pub max_scale: Option<u32>,
    pub kappa: f64,
    pub intervals: usize,
    pub interval_cap: f64,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams { grid_cells: None, max_scale: None, kappa: 1.0, intervals: DEFAULT_INTERVALS, interval_cap: 1.0 }
    }
}

/// The construction matching the dimension of `z`: intervals for `d = 1`,
/// multiscale dyadic squares for `d = 2`, a single grid for `d ≥ 3`.
pub fn build_witness(z: &ZeroCycle, params: &WitnessParams) -> Result<WitnessFunction> {
    let d = cube_dim(z)?;
    let n = z.len();
    match d {
        0 => Err(invalid!("no witness in dimension 0")),
        1 => build_interval_witness(z, params.intervals, params.interval_cap),
        2 => build_multiscale_witness(z, params.max_scale.unwrap_or_else(|| default_max_scale(n)), params.kappa),
        _ => build_grid_witness(z, params.grid_cells.unwrap_or_else(|| default_grid_cells(n, d))),
    }
}

/// Lower bound for the filling volume of a knot slice. The dependency graph
/// of `m` is colored; the color class holding the most slice points gives
/// an independent sub-cycle `Z₁`, the witness is built from `Z₁` alone and
/// then evaluated against the full slice.
pub fn knot_slice_lower_bound(atoms: &[SliceAtom], m: &Pseudomanifold, d: usize, params: &WitnessParams) -> Result<f64> {
    let full: Vec<_> = atoms.iter().filter_map(|a| a.point.clone()).collect();
    let z = ZeroCycle::new(Ambient::Cube(d), full)?;
    let classes = greedy_coloring(&dependency_graph(m));
    let mut color = vec![usize::MAX; m.simplices().len()];
    for (c, cl) in classes.iter().enumerate() {
        for &s in cl {
            color[s] = c;
        }
    }
    let mut present = vec![0usize; classes.len()];
    for a in atoms {
        if a.source >= color.len() {
            return Err(invalid!("slice atom refers to simplex {} of {}", a.source, color.len()));
        }
        if a.point.is_some() {
            present[color[a.source]] += 1;
        }
    }
    let Some(best) = (0..present.len()).max_by(|&a, &b| present[a].cmp(&present[b]).then(b.cmp(&a))) else {
        return Ok(0.0);
    };
    if present[best] == 0 {
        return Ok(0.0);
    }
    let z1_points = atoms.iter().filter(|a| color[a.source] == best).filter_map(|a| a.point.clone()).collect();
    let z1 = ZeroCycle::new(Ambient::Cube(d), z1_points)?;
    build_witness(&z1, params)?.lower_bound(&z)
}
