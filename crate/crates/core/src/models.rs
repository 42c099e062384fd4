//! Seeded generators for the three random cycle models: random-jump
//! embeddings of pseudomanifolds, uniformly random affine k-planes meeting
//! the cube, and uniformly random oriented great k-spheres. Also the i.i.d.
//! signed point cloud used to exercise the transport solver directly.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::chains::{Ambient, PolyCycle, Pseudomanifold, Sign, SignedPoint, ZeroCycle};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, dot};
use crate::rng::RngStream;

const ORTHO_TOL: f64 = 1e-9;

/// Default cap on rejection attempts per plane offset.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

fn check_orthonormal(cols: &[Vec<f64>], len: usize) -> Result<()> {
    for (i, c) in cols.iter().enumerate() {
        if c.len() != len {
            return Err(invalid!("basis column {i} has length {}, expected {len}", c.len()));
        }
        for (j, d) in cols.iter().enumerate().take(i + 1) {
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot(c, d) - want).abs() > ORTHO_TOL {
                return Err(invalid!("basis columns {j},{i} are not orthonormal"));
            }
        }
    }
    Ok(())
}

/// An oriented affine k-plane `{offset + basis·t}` in `R^n`. The offset is
/// the point of the plane closest to the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineKPlane {
    basis: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl AffineKPlane {
    pub fn new(basis: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let n = offset.len();
        check_orthonormal(&basis, n)?;
        if basis.iter().any(|b| dot(b, &offset).abs() > ORTHO_TOL) {
            return Err(invalid!("offset is not orthogonal to the direction"));
        }
        Ok(AffineKPlane { basis, offset })
    }

    /// Plane with direction `basis` through the point `p` (any point).
    pub fn through(basis: Vec<Vec<f64>>, p: &[f64]) -> Result<Self> {
        let mut offset = p.to_vec();
        for b in &basis {
            let c = dot(b, p);
            for (o, bi) in offset.iter_mut().zip(b) {
                *o -= c * bi;
            }
        }
        AffineKPlane::new(basis, offset)
    }

    pub fn n(&self) -> usize {
        self.offset.len()
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    /// Direction columns, in orientation order.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Same plane with the opposite orientation.
    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        if let Some(c) = p.basis.first_mut() {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        p
    }

    pub fn point_at(&self, t: &[f64]) -> Vec<f64> {
        let mut p = self.offset.clone();
        for (b, ti) in self.basis.iter().zip(t) {
            for (pi, bi) in p.iter_mut().zip(b) {
                *pi += ti * bi;
            }
        }
        p
    }

    /// Whether the plane meets `[0,1]^n` (exact feasibility test).
    pub fn intersects_cube(&self) -> bool {
        plane_meets_cube(&self.basis, &self.offset)
    }
}

/// Fourier–Motzkin feasibility of `{t : a·t ≤ b}` over `vars` variables.
fn fm_feasible(mut rows: Vec<(Vec<f64>, f64)>, vars: usize) -> bool {
    const EPS: f64 = 1e-12;
    for v in (0..vars).rev() {
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for (a, b) in rows {
            if a[v] > EPS {
                pos.push((a, b));
            } else if a[v] < -EPS {
                neg.push((a, b));
            } else {
                zero.push((a, b));
            }
        }
        for (ap, bp) in &pos {
            for (an, bn) in &neg {
                let (sp, sn) = (1.0 / ap[v], -1.0 / an[v]);
                let a: Vec<f64> = (0..vars).map(|j| ap[j] * sp + an[j] * sn).collect();
                zero.push((a, bp * sp + bn * sn));
            }
        }
        rows = zero;
        for r in rows.iter_mut() {
            r.0[v] = 0.0;
        }
    }
    rows.iter().all(|(_, b)| *b >= -EPS)
}

fn plane_meets_cube(basis: &[Vec<f64>], p: &[f64]) -> bool {
    let k = basis.len();
    let mut rows = Vec::with_capacity(2 * p.len());
    for i in 0..p.len() {
        let a: Vec<f64> = basis.iter().map(|b| b[i]).collect();
        // p_i + a·t ≤ 1  and  -(p_i + a·t) ≤ 0
        rows.push((a.clone(), 1.0 - p[i]));
        rows.push((a.iter().map(|x| -x).collect(), p[i]));
    }
    fm_feasible(rows, k)
}

/// An oriented linear subspace of `R^{n+1}` given by orthonormal columns;
/// its unit sphere is an oriented great sphere of `S^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientedSubspace {
    basis: Vec<Vec<f64>>,
}

impl OrientedSubspace {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let len = basis.first().map_or(0, Vec::len);
        if basis.is_empty() || basis.len() > len {
            return Err(invalid!("subspace needs between 1 and {len} columns"));
        }
        check_orthonormal(&basis, len)?;
        Ok(OrientedSubspace { basis })
    }

    /// Dimension of the ambient `R^{n+1}`.
    pub fn ambient_dim(&self) -> usize {
        self.basis[0].len()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Applies the linear map with matrix columns `rot` (rows of the result
    /// are `rot · column`).
    pub fn transformed(&self, rot: &[Vec<f64>]) -> Self {
        OrientedSubspace { basis: self.basis.iter().map(|c| apply(rot, c)).collect() }
    }

    /// Coordinates of `x` in this basis.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| dot(b, x)).collect()
    }
}

/// `m · x` where `m` is given by its columns.
pub fn apply(cols: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; cols[0].len()];
    for (c, xi) in cols.iter().zip(x) {
        for (yi, ci) in y.iter_mut().zip(c) {
            *yi += xi * ci;
        }
    }
    y
}

/// `cols` standard-Gaussian columns of length `rows`.
pub fn gaussian_columns<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..cols)
        .map(|_| (0..rows).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

/// Haar-uniform oriented orthonormal k-frame in `R^n`: Gram–Schmidt (QR with
/// positive diagonal) of a Gaussian matrix.
pub fn haar_frame<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        if let Some(q) = linalg::orthonormalize(&gaussian_columns(n, k, rng)) {
            return q;
        }
    }
}

/// Haar-random rotation of `R^n` (determinant +1), as columns.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut q = haar_frame(n, n, rng);
    let flat: Vec<f64> = (0..n).flat_map(|i| q.iter().map(move |c| c[i])).collect::<Vec<_>>();
    if linalg::det(&flat, n) < 0.0 {
        q[0].iter_mut().for_each(|x| *x = -*x);
    }
    q
}

pub fn uniform_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Embeds a pseudomanifold with one i.i.d. uniform point of `[0,1]^n` per
/// vertex (drawn in vertex order).
pub fn embed_pseudomanifold(m: Arc<Pseudomanifold>, n: usize, stream: RngStream) -> Result<PolyCycle> {
    if !m.validate().is_cycle {
        return Err(invalid!("pseudomanifold is not a cycle"));
    }
    if m.k() >= n {
        return Err(invalid!("k = {} must be below n = {n}", m.k()));
    }
    let mut rng = stream.rng();
    let positions: Vec<Vec<f64>> = (0..m.num_vertices()).map(|_| uniform_point(n, &mut rng)).collect();
    PolyCycle::from_embedding(m, n, &positions)
}

/// The random-jump polygon: a closed polygon through `vertices` i.i.d.
/// uniform points of `[0,1]^n`.
pub fn sample_random_jump(vertices: usize, n: usize, stream: RngStream) -> Result<PolyCycle> {
    if n < 2 {
        return Err(invalid!("ambient dimension must be at least 2, got {n}"));
    }
    embed_pseudomanifold(Arc::new(Pseudomanifold::cycle_graph(vertices)?), n, stream)
}

/// Samples the offset of a plane with the given direction uniformly on the
/// shadow of `[0,1]^n` in the orthogonal complement, by rejection from its
/// bounding box. Returns the plane and the number of attempts used.
pub fn sample_offset<R: Rng + ?Sized>(
    basis: Vec<Vec<f64>>,
    rng: &mut R,
    cap: u64,
) -> Result<(AffineKPlane, u64)> {
    let n = basis[0].len();
    let comp = linalg::complement(&basis, n);
    let bounds: Vec<(f64, f64)> = comp
        .iter()
        .map(|w| {
            let lo: f64 = w.iter().map(|x| x.min(0.0)).sum();
            let hi: f64 = w.iter().map(|x| x.max(0.0)).sum();
            (lo, hi)
        })
        .collect();
    for attempt in 1..=cap {
        let y: Vec<f64> = bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect();
        let p = apply(&comp, &y);
        if plane_meets_cube(&basis, &p) {
            return Ok((AffineKPlane { basis, offset: p }, attempt));
        }
    }
    Err(Error::Sampling { attempts: cap, rate: 0.0 })
}

/// `count` i.i.d. oriented affine k-planes meeting `[0,1]^n`: Haar-uniform
/// direction, offset uniform on the shadow polytope.
pub fn sample_cube_planes(count: usize, n: usize, k: usize, stream: RngStream) -> Result<Vec<AffineKPlane>> {
    sample_cube_planes_capped(count, n, k, stream, DEFAULT_REJECTION_CAP)
}

pub fn sample_cube_planes_capped(
    count: usize,
    n: usize,
    k: usize,
    stream: RngStream,
    cap: u64,
) -> Result<Vec<AffineKPlane>> {
    if !(1 <= k && k < n) {
        return Err(invalid!("need 1 <= k < n, got k = {k}, n = {n}"));
    }
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity(count);
    let (mut attempts, mut accepted) = (0u64, 0u64);
    for _ in 0..count {
        let dir = haar_frame(n, k, &mut rng);
        match sample_offset(dir, &mut rng, cap) {
            Ok((plane, used)) => {
                attempts += used;
                accepted += 1;
                out.push(plane);
            }
            Err(_) => {
                attempts += cap;
                return Err(Error::Sampling { attempts, rate: accepted as f64 / attempts as f64 });
            }
        }
    }
    Ok(out)
}

/// `count` i.i.d. oriented (k+1)-dimensional subspaces of `R^{n+1}`
/// (oriented great k-spheres of `S^n`), Haar-uniform.
pub fn sample_great_spheres(count: usize, n: usize, k: usize, stream: RngStream) -> Result<Vec<OrientedSubspace>> {
    if k >= n {
        return Err(invalid!("need 0 <= k < n, got k = {k}, n = {n}"));
    }
    let mut rng = stream.rng();
    Ok((0..count)
        .map(|_| OrientedSubspace { basis: haar_frame(n + 1, k + 1, &mut rng) })
        .collect())
}

/// `count` i.i.d. uniform points of `[0,1]^d` with i.i.d. fair signs.
pub fn sample_iid_zero_cycle(count: usize, d: usize, stream: RngStream) -> Result<ZeroCycle> {
    let mut rng = stream.rng();
    let points = (0..count)
        .map(|_| {
            let pos = uniform_point(d, &mut rng);
            let sign = if rng.random::<bool>() { Sign::Pos } else { Sign::Neg };
            SignedPoint::new(pos, sign)
        })
        .collect();
    ZeroCycle::new(Ambient::Cube(d), points)
}
