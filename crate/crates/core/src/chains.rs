//! Chain types: abstract oriented pseudomanifolds, their linear embeddings in
//! the unit cube, and signed 0-cycles (the output of every slice).
//!
//! Faces are identified as sorted vertex tuples. The incidence sign of face
//! `i` in simplex `(v0..vk)` is `(-1)^i` times the parity of the permutation
//! that sorts the remaining vertices.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::{Mul, Neg};

use crate::error::{invalid, Error, Result};

/// Tolerance for points that should lie in `[0,1]` but drifted by rounding.
pub const COORD_TOL: f64 = 1e-12;
/// Unit-norm tolerance for points on the sphere.
pub const SPHERE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn from_i64(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Pos),
            -1 => Some(Sign::Neg),
            _ => None,
        }
    }

    /// Sign of a nonzero real; `None` for zero or NaN.
    pub fn of(x: f64) -> Option<Sign> {
        if x > 0.0 {
            Some(Sign::Pos)
        } else if x < 0.0 {
            Some(Sign::Neg)
        } else {
            None
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignedPoint {
    pub pos: Vec<f64>,
    pub sign: Sign,
}

impl SignedPoint {
    pub fn new(pos: Vec<f64>, sign: Sign) -> Self {
        SignedPoint { pos, sign }
    }

    pub fn pos(pos: Vec<f64>) -> Self {
        SignedPoint { pos, sign: Sign::Pos }
    }

    pub fn neg(pos: Vec<f64>) -> Self {
        SignedPoint { pos, sign: Sign::Neg }
    }
}

/// Where a 0-cycle lives: the cube `[0,1]^d` (filled relative to its
/// boundary) or the unit sphere `S^d ⊂ R^{d+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ambient {
    Cube(usize),
    Sphere(usize),
}

impl Ambient {
    /// Length of a position vector in this ambient.
    pub fn coord_len(self) -> usize {
        match self {
            Ambient::Cube(d) => d,
            Ambient::Sphere(d) => d + 1,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Ambient::Cube(d) | Ambient::Sphere(d) => d,
        }
    }
}

/// A finite signed sum of points.
///
/// Cube coordinates are clamped into `[0,1]` when they overshoot by less
/// than [`COORD_TOL`]. Sign balance is not enforced here: cube cycles may be
/// unbalanced, and sphere consumers check it themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCycle {
    ambient: Ambient,
    points: Vec<SignedPoint>,
}

impl ZeroCycle {
    pub fn new(ambient: Ambient, mut points: Vec<SignedPoint>) -> Result<Self> {
        if ambient.dim() == 0 {
            return Err(invalid!("ambient dimension must be positive"));
        }
        let len = ambient.coord_len();
        for (i, p) in points.iter_mut().enumerate() {
            if p.pos.len() != len {
                return Err(invalid!(
                    "point {i} has {} coordinates, ambient needs {len}",
                    p.pos.len()
                ));
            }
            match ambient {
                Ambient::Cube(_) => {
                    for x in p.pos.iter_mut() {
                        if !(*x >= -COORD_TOL && *x <= 1.0 + COORD_TOL) {
                            return Err(invalid!("point {i} coordinate {x} outside [0,1]"));
                        }
                        *x = x.clamp(0.0, 1.0);
                    }
                }
                Ambient::Sphere(_) => {
                    let r = crate::linalg::norm(&p.pos);
                    if !((r - 1.0).abs() <= SPHERE_TOL) {
                        return Err(invalid!("point {i} has norm {r}, expected 1"));
                    }
                }
            }
        }
        Ok(ZeroCycle { ambient, points })
    }

    pub fn empty(ambient: Ambient) -> Self {
        ZeroCycle { ambient, points: Vec::new() }
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn points(&self) -> &[SignedPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sum of the signs.
    pub fn net_sign(&self) -> i64 {
        self.points.iter().map(|p| p.sign.value() as i64).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.net_sign() == 0
    }

    pub fn negated(&self) -> ZeroCycle {
        ZeroCycle {
            ambient: self.ambient,
            points: self
                .points
                .iter()
                .map(|p| SignedPoint::new(p.pos.clone(), -p.sign))
                .collect(),
        }
    }

    /// The sub-cycle on the points with the given indices.
    pub fn select(&self, indices: &[usize]) -> ZeroCycle {
        ZeroCycle {
            ambient: self.ambient,
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }
}

/// Parity of the permutation sorting `v` (true = odd). `v` must be short.
fn sort_parity<T: Ord>(v: &[T]) -> bool {
    let mut inv = 0usize;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 1
}

/// Accumulates the boundary of `simplex` with coefficient `coef` into `acc`.
fn add_boundary<T: Ord + Clone>(acc: &mut BTreeMap<Vec<T>, i64>, simplex: &[T], coef: i64) {
    for i in 0..simplex.len() {
        let face: Vec<T> = simplex
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.clone())
            .collect();
        let mut s = if i % 2 == 0 { coef } else { -coef };
        if sort_parity(&face) {
            s = -s;
        }
        let mut sorted = face;
        sorted.sort();
        *acc.entry(sorted).or_insert(0) += s;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub is_cycle: bool,
    /// Maximum over simplices of the number of other simplices sharing a vertex.
    pub geometry_bound: usize,
}

/// An abstract oriented k-pseudomanifold: top simplices with ±1 coefficients
/// over vertices `0..num_vertices`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pseudomanifold {
    num_vertices: usize,
    k: usize,
    simplices: Vec<(Vec<usize>, Sign)>,
}

impl Pseudomanifold {
    /// Checks the structural preconditions: tuples of length `k+1` with
    /// distinct, in-range vertex indices.
    pub fn new(num_vertices: usize, k: usize, simplices: Vec<(Vec<usize>, Sign)>) -> Result<Self> {
        for (i, (verts, _)) in simplices.iter().enumerate() {
            if verts.len() != k + 1 {
                return Err(Error::Structural(alloc::format!(
                    "simplex {i} has {} vertices, expected {}",
                    verts.len(),
                    k + 1
                )));
            }
            if let Some(v) = verts.iter().find(|&&v| v >= num_vertices) {
                return Err(Error::Structural(alloc::format!(
                    "simplex {i} uses vertex {v} >= {num_vertices}"
                )));
            }
            let mut s = verts.clone();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Structural(alloc::format!("simplex {i} repeats a vertex")));
            }
        }
        Ok(Pseudomanifold { num_vertices, k, simplices })
    }

    /// The cycle graph `C_N`: edges `(i, i+1 mod N)`, all coefficients +1.
    pub fn cycle_graph(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid!("cycle graph needs at least 3 vertices, got {n}"));
        }
        let simplices = (0..n).map(|i| (alloc::vec![i, (i + 1) % n], Sign::Pos)).collect();
        Pseudomanifold::new(n, 1, simplices)
    }

    /// Boundary of the octahedron with vertices `±e_i` (indices `2i` for
    /// `+e_i`, `2i+1` for `-e_i`), oriented by the outward normal.
    pub fn octahedron_boundary() -> Self {
        let mut simplices = Vec::new();
        for sx in [1i32, -1] {
            for sy in [1i32, -1] {
                for sz in [1i32, -1] {
                    let idx = |axis: usize, s: i32| 2 * axis + usize::from(s < 0);
                    let verts = alloc::vec![idx(0, sx), idx(1, sy), idx(2, sz)];
                    let coef = if sx * sy * sz > 0 { Sign::Pos } else { Sign::Neg };
                    simplices.push((verts, coef));
                }
            }
        }
        Pseudomanifold { num_vertices: 6, k: 2, simplices }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn simplices(&self) -> &[(Vec<usize>, Sign)] {
        &self.simplices
    }

    /// For each vertex, the indices of the simplices containing it.
    pub fn vertex_incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = alloc::vec![Vec::new(); self.num_vertices];
        for (s, (verts, _)) in self.simplices.iter().enumerate() {
            for &v in verts {
                inc[v].push(s);
            }
        }
        inc
    }

    /// Neighbors of each simplex: the other simplices sharing at least one
    /// vertex, sorted.
    pub fn simplex_neighbors(&self) -> Vec<Vec<usize>> {
        let inc = self.vertex_incidence();
        self.simplices
            .iter()
            .enumerate()
            .map(|(s, (verts, _))| {
                let mut nb: Vec<usize> = verts
                    .iter()
                    .flat_map(|&v| inc[v].iter().copied())
                    .filter(|&t| t != s)
                    .collect();
                nb.sort_unstable();
                nb.dedup();
                nb
            })
            .collect()
    }

    /// Signed boundary coefficients of every (k−1)-face (zero entries kept).
    pub fn boundary(&self) -> BTreeMap<Vec<usize>, i64> {
        let mut acc = BTreeMap::new();
        for (verts, coef) in &self.simplices {
            add_boundary(&mut acc, verts, coef.value() as i64);
        }
        acc
    }

    pub fn validate(&self) -> ValidationReport {
        let is_cycle = self.boundary().values().all(|&c| c == 0);
        let geometry_bound = self.simplex_neighbors().iter().map(Vec::len).max().unwrap_or(0);
        ValidationReport { is_cycle, geometry_bound }
    }
}

/// One oriented linear simplex of an embedded cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub verts: Vec<Vec<f64>>,
    pub coef: Sign,
}

/// k-volume of the linear simplex with the given vertices (Gram determinant).
/// Affinely dependent vertices give 0.
pub fn simplex_volume(verts: &[Vec<f64>]) -> f64 {
    let k = verts.len().saturating_sub(1);
    if k == 0 {
        return if verts.is_empty() { 0.0 } else { 1.0 };
    }
    let edges: Vec<Vec<f64>> = verts[1..]
        .iter()
        .map(|v| v.iter().zip(&verts[0]).map(|(a, b)| a - b).collect())
        .collect();
    let mut gram = alloc::vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = crate::linalg::dot(&edges[i], &edges[j]);
        }
    }
    let g = crate::linalg::det(&gram, k).max(0.0);
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    libm::sqrt(g) / fact
}

fn coord_key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|&x| (x + 0.0).to_bits()).collect()
}

/// A Lipschitz k-cycle in `[0,1]^n` made of oriented linear k-simplices.
#[derive(Clone, Debug)]
pub struct PolyCycle {
    n: usize,
    k: usize,
    cells: Vec<Cell>,
    relative: bool,
    provenance: Option<Arc<Pseudomanifold>>,
}

impl PolyCycle {
    /// Validates shapes and that every coordinate lies in `[0,1]`. Closedness
    /// is checked separately by [`PolyCycle::is_closed`].
    pub fn new(n: usize, k: usize, cells: Vec<Cell>) -> Result<Self> {
        if k >= n && !cells.is_empty() {
            return Err(invalid!("cycle dimension {k} must be below ambient dimension {n}"));
        }
        for (i, c) in cells.iter().enumerate() {
            if c.verts.len() != k + 1 {
                return Err(invalid!("cell {i} has {} vertices, expected {}", c.verts.len(), k + 1));
            }
            for v in &c.verts {
                if v.len() != n {
                    return Err(invalid!("cell {i} vertex has {} coordinates, expected {n}", v.len()));
                }
                if let Some(x) = v.iter().find(|x| !(**x >= 0.0 && **x <= 1.0)) {
                    return Err(invalid!("cell {i} coordinate {x} outside [0,1]"));
                }
            }
        }
        Ok(PolyCycle { n, k, cells, relative: false, provenance: None })
    }

    /// Embeds `m` linearly with vertex `v` sent to `positions[v]`. Cell `i`
    /// is simplex `i` of `m`.
    pub fn from_embedding(m: Arc<Pseudomanifold>, n: usize, positions: &[Vec<f64>]) -> Result<Self> {
        if positions.len() != m.num_vertices() {
            return Err(invalid!(
                "{} positions for {} vertices",
                positions.len(),
                m.num_vertices()
            ));
        }
        let cells = m
            .simplices()
            .iter()
            .map(|(verts, coef)| Cell {
                verts: verts.iter().map(|&v| positions[v].clone()).collect(),
                coef: *coef,
            })
            .collect();
        let mut z = PolyCycle::new(n, m.k(), cells)?;
        z.provenance = Some(m);
        Ok(z)
    }

    /// Marks the cycle as relative to `∂[0,1]^n`: boundary faces lying in a
    /// face of the cube are ignored by [`PolyCycle::is_closed`].
    pub fn relative_to_boundary(mut self) -> Self {
        self.relative = true;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_relative(&self) -> bool {
        self.relative
    }

    pub fn provenance(&self) -> Option<&Arc<Pseudomanifold>> {
        self.provenance.as_ref()
    }

    pub fn mass(&self) -> f64 {
        self.cells.iter().map(|c| simplex_volume(&c.verts)).sum()
    }

    pub fn negated(&self) -> PolyCycle {
        let mut z = self.clone();
        for c in &mut z.cells {
            c.coef = -c.coef;
        }
        z
    }

    /// Nonzero boundary faces of the chain over its listed vertex positions.
    pub fn boundary_chain(&self) -> Vec<(Vec<Vec<f64>>, i64)> {
        let mut acc: BTreeMap<Vec<Vec<u64>>, i64> = BTreeMap::new();
        let mut coords: BTreeMap<Vec<u64>, Vec<f64>> = BTreeMap::new();
        for c in &self.cells {
            let keys: Vec<Vec<u64>> = c.verts.iter().map(|v| coord_key(v)).collect();
            for (k, v) in keys.iter().zip(&c.verts) {
                coords.entry(k.clone()).or_insert_with(|| v.clone());
            }
            add_boundary(&mut acc, &keys, c.coef.value() as i64);
        }
        acc.into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(face, c)| (face.iter().map(|k| coords[k].clone()).collect::<Vec<_>>(), c))
            .filter(|(face, _)| {
                !(self.relative
                    && self.n > 0
                    && (0..self.n).any(|axis| {
                        face.iter().all(|v| v[axis] == 0.0) || face.iter().all(|v| v[axis] == 1.0)
                    }))
            })
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_chain().is_empty()
    }
}
