//! Slicing k-cycles into signed 0-cycles.
//!
//! Cube models are cut by coordinate planes `P_x = {x} × [0,1]^{n-k}` (the
//! `fixed_axes` take the values `x`, the remaining axes in increasing order
//! give the slice coordinates). The sphere model is cut by a single great
//! sphere. Slices are taken at generic parameters: a degenerate hit returns
//! [`Error::DegenerateSlice`] and [`with_retries`] redraws the parameter.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::chains::{Ambient, PolyCycle, Pseudomanifold, Sign, SignedPoint, ZeroCycle, COORD_TOL};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::models::{AffineKPlane, OrientedSubspace};

/// Barycentric inside/outside tolerance.
pub const LAMBDA_TOL: f64 = 1e-12;
/// Projected simplices with `|det|` below this are treated as degenerate.
pub const DET_TOL: f64 = 1e-12;
/// Linear systems with a condition estimate above this are degenerate.
pub const COND_LIMIT: f64 = 1e12;
/// Width of the window a degenerate slice parameter is redrawn from.
pub const RETRY_WINDOW: f64 = 1e-9;
pub const MAX_RETRIES: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub enum SliceSpec {
    Cube { fixed_axes: Vec<usize>, values: Vec<f64> },
    Sphere { subspace: OrientedSubspace },
}

impl SliceSpec {
    pub fn cube(fixed_axes: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if fixed_axes.len() != values.len() {
            return Err(invalid!("{} axes but {} values", fixed_axes.len(), values.len()));
        }
        let mut sorted = fixed_axes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid!("fixed axes must be distinct"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(invalid!("slice value {v} outside [0,1]"));
        }
        Ok(SliceSpec::Cube { fixed_axes, values })
    }
}

/// One slice contribution, tagged with the cell/plane/subspace it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceAtom {
    pub source: usize,
    pub point: Option<SignedPoint>,
}

fn degenerate(what: &str) -> Error {
    Error::DegenerateSlice(what.into())
}

/// Intersects segment `a → b` with `{x_axis = c}`. The axis coordinate is
/// dropped from the returned point; its sign is the direction of travel
/// along `axis`.
pub fn slice_segment(a: &[f64], b: &[f64], axis: usize, c: f64) -> Result<Option<SignedPoint>> {
    let (da, db) = (a[axis] - c, b[axis] - c);
    if da == 0.0 || db == 0.0 {
        return Err(degenerate("slice value equals an endpoint coordinate"));
    }
    if (da > 0.0) == (db > 0.0) {
        return Ok(None);
    }
    let t = da / (da - db);
    let pos = a
        .iter()
        .zip(b)
        .enumerate()
        .filter(|&(j, _)| j != axis)
        .map(|(_, (x, y))| (x + t * (y - x)).clamp(0.0, 1.0))
        .collect();
    let sign = if db > da { Sign::Pos } else { Sign::Neg };
    Ok(Some(SignedPoint::new(pos, sign)))
}

/// Intersects a linear k-simplex with `{first k coordinates = x}`.
///
/// Vertices must already be permuted so the fixed axes come first. The sign
/// is `coef` times the sign of the determinant of the projected edge matrix.
pub fn slice_simplex(verts: &[Vec<f64>], coef: Sign, x: &[f64]) -> Result<Option<SignedPoint>> {
    let k = x.len();
    if verts.len() != k + 1 {
        return Err(invalid!("simplex has {} vertices, slice fixes {k} axes", verts.len()));
    }
    let mut edges = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            edges[i * k + j] = verts[j + 1][i] - verts[0][i];
        }
    }
    let d = linalg::det(&edges, k);
    if d.abs() < DET_TOL {
        // x misses the projection unless it lies on the affine hull of the
        // projected vertices.
        let mut span: Vec<Vec<f64>> = Vec::new();
        for v in &verts[1..] {
            let mut e: Vec<f64> = (0..k).map(|i| v[i] - verts[0][i]).collect();
            for b in &span {
                let c = linalg::dot(b, &e);
                e.iter_mut().zip(b).for_each(|(ei, bi)| *ei -= c * bi);
            }
            let r = linalg::norm(&e);
            if r > 1e-9 {
                e.iter_mut().for_each(|ei| *ei /= r);
                span.push(e);
            }
        }
        let mut off: Vec<f64> = (0..k).map(|i| x[i] - verts[0][i]).collect();
        for b in &span {
            let c = linalg::dot(b, &off);
            off.iter_mut().zip(b).for_each(|(oi, bi)| *oi -= c * bi);
        }
        let on_hull = linalg::norm(&off) <= 1e-9;
        return if on_hull { Err(degenerate("projected simplex is degenerate")) } else { Ok(None) };
    }
    let m = k + 1;
    let mut a = vec![0.0; m * m];
    for i in 0..k {
        for j in 0..m {
            a[i * m + j] = verts[j][i];
        }
    }
    for j in 0..m {
        a[k * m + j] = 1.0;
    }
    let mut rhs = x.to_vec();
    rhs.push(1.0);
    let lambda = linalg::solve(&a, &rhs, m).ok_or_else(|| degenerate("barycentric system is singular"))?;
    if lambda.iter().any(|&l| l < -LAMBDA_TOL) {
        return Ok(None);
    }
    if lambda.iter().any(|&l| l <= LAMBDA_TOL) {
        return Err(degenerate("slice passes through a face of the simplex"));
    }
    let n = verts[0].len();
    let pos = (k..n)
        .map(|c| verts.iter().zip(&lambda).map(|(v, l)| l * v[c]).sum::<f64>().clamp(0.0, 1.0))
        .collect();
    let sign = if d > 0.0 { coef } else { -coef };
    Ok(Some(SignedPoint::new(pos, sign)))
}

/// Fixed axes first, then the remaining axes in increasing order.
fn axis_order(n: usize, fixed: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; n];
    for &a in fixed {
        if a >= n || seen[a] {
            return Err(invalid!("bad fixed axis {a} for n = {n}"));
        }
        seen[a] = true;
    }
    let mut order = fixed.to_vec();
    order.extend((0..n).filter(|&a| !seen[a]));
    Ok(order)
}

/// Slices every cell of `z` by the coordinate plane fixing `axes` at
/// `values`. The atom list keeps one entry per cell in cell order.
pub fn slice_polycycle(z: &PolyCycle, axes: &[usize], values: &[f64]) -> Result<(ZeroCycle, Vec<SliceAtom>)> {
    let (n, k) = (z.n(), z.k());
    if axes.len() != k || values.len() != k {
        return Err(invalid!("slicing a {k}-cycle needs {k} axes and values"));
    }
    if k == 0 {
        return Err(invalid!("cannot slice a 0-cycle"));
    }
    let order = axis_order(n, axes)?;
    let mut atoms = Vec::with_capacity(z.cells().len());
    for (i, cell) in z.cells().iter().enumerate() {
        let point = if k == 1 {
            slice_segment(&cell.verts[0], &cell.verts[1], axes[0], values[0])?
                .map(|p| SignedPoint::new(p.pos, p.sign * cell.coef))
        } else {
            let permuted: Vec<Vec<f64>> =
                cell.verts.iter().map(|v| order.iter().map(|&a| v[a]).collect()).collect();
            slice_simplex(&permuted, cell.coef, values)?
        };
        atoms.push(SliceAtom { source: i, point });
    }
    let points = atoms.iter().filter_map(|a| a.point.clone()).collect();
    Ok((ZeroCycle::new(Ambient::Cube(n - k), points)?, atoms))
}

/// Runs `f` at `values`; on a degenerate slice, redraws each value uniformly
/// from a window of width [`RETRY_WINDOW`] around the original (clamped to
/// `[0,1]`) up to [`MAX_RETRIES`] times. Returns the result and the values used.
pub fn with_retries<T, R, F>(values: &[f64], rng: &mut R, mut f: F) -> Result<(T, Vec<f64>)>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<T>,
{
    let mut current = values.to_vec();
    let mut last = None;
    for _ in 0..=MAX_RETRIES {
        match f(&current) {
            Ok(v) => return Ok((v, current)),
            Err(e @ Error::DegenerateSlice(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
        current = values
            .iter()
            .map(|v| (v + RETRY_WINDOW * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0))
            .collect();
    }
    Err(last.unwrap_or_else(|| degenerate("retries exhausted")))
}

/// Intersection of an oriented affine k-plane with the coordinate plane
/// fixing `axes` at `values`. Sign is `det[plane basis | free axes]`.
pub fn slice_plane(p: &AffineKPlane, axes: &[usize], values: &[f64]) -> Result<Option<SignedPoint>> {
    let (n, k) = (p.n(), p.k());
    if axes.len() != k || values.len() != k {
        return Err(invalid!("slicing a {k}-plane needs {k} axes and values"));
    }
    let order = axis_order(n, axes)?;
    let basis = p.basis();
    let mut a = vec![0.0; k * k];
    for (i, &ax) in axes.iter().enumerate() {
        for j in 0..k {
            a[i * k + j] = basis[j][ax];
        }
    }
    if linalg::cond1(&a, k) > COND_LIMIT {
        return Err(degenerate("plane is (nearly) parallel to the slice"));
    }
    let rhs: Vec<f64> = axes.iter().zip(values).map(|(&ax, v)| v - p.offset()[ax]).collect();
    let t = linalg::solve(&a, &rhs, k).ok_or_else(|| degenerate("singular plane system"))?;
    let x = p.point_at(&t);
    if x.iter().any(|&c| !(c >= -COORD_TOL && c <= 1.0 + COORD_TOL)) {
        return Ok(None);
    }
    let mut full = vec![0.0; n * n];
    for r in 0..n {
        for j in 0..k {
            full[r * n + j] = basis[j][r];
        }
    }
    for (j, &ax) in order[k..].iter().enumerate() {
        full[ax * n + k + j] = 1.0;
    }
    let sign = Sign::of(linalg::det(&full, n)).ok_or_else(|| degenerate("zero orientation determinant"))?;
    let pos = order[k..].iter().map(|&ax| x[ax].clamp(0.0, 1.0)).collect();
    Ok(Some(SignedPoint::new(pos, sign)))
}

/// Slices a list of planes; atom `i` comes from plane `i`.
pub fn slice_planes(planes: &[AffineKPlane], axes: &[usize], values: &[f64]) -> Result<(ZeroCycle, Vec<SliceAtom>)> {
    let n = planes.first().map_or(axes.len() + 1, AffineKPlane::n);
    let mut atoms = Vec::with_capacity(planes.len());
    for (i, p) in planes.iter().enumerate() {
        atoms.push(SliceAtom { source: i, point: slice_plane(p, axes, values)? });
    }
    let points = atoms.iter().filter_map(|a| a.point.clone()).collect();
    Ok((ZeroCycle::new(Ambient::Cube(n - axes.len()), points)?, atoms))
}

/// Intersects two oriented great spheres of complementary dimension
/// (`dim U + dim V = ambient + 1`). Returns the antipodal pair `+[u], −[−u]`
/// in ambient coordinates, with `u` oriented so that `det[u | B_U' | B_V'] > 0`
/// for oriented completions `B_U'`, `B_V'` of `u` in `U` and `V`.
pub fn slice_great_sphere(u_sub: &OrientedSubspace, v_sub: &OrientedSubspace) -> Result<[SignedPoint; 2]> {
    let amb = u_sub.ambient_dim();
    if v_sub.ambient_dim() != amb {
        return Err(invalid!("subspaces live in different ambient spaces"));
    }
    let (du, dv) = (u_sub.dim(), v_sub.dim());
    if du + dv != amb + 1 {
        return Err(invalid!("dimensions {du} + {dv} must equal {}", amb + 1));
    }
    let cols = du + dv;
    let mut m = vec![0.0; amb * cols];
    for r in 0..amb {
        for (j, c) in u_sub.basis().iter().enumerate() {
            m[r * cols + j] = c[r];
        }
        for (j, c) in v_sub.basis().iter().enumerate() {
            m[r * cols + du + j] = -c[r];
        }
    }
    let (_, null) = linalg::null_vector(&m, amb, cols, 1e-9);
    let null = null.ok_or_else(|| degenerate("great spheres do not meet in a single antipodal pair"))?;
    let mut u = crate::models::apply(u_sub.basis(), &null[..du]);
    let nu = linalg::norm(&u);
    u.iter_mut().for_each(|x| *x /= nu);

    // Oriented completion of u inside a subspace: drop the basis column with
    // the largest coefficient of u, and record whether [u | rest] keeps the
    // subspace orientation.
    let completion = |s: &OrientedSubspace| -> (Vec<Vec<f64>>, f64) {
        let a = s.coords(&u);
        let d = a.len();
        let drop = (0..d).fold(0, |b, j| if a[j].abs() > a[b].abs() { j } else { b });
        let rest: Vec<usize> = (0..d).filter(|&j| j != drop).collect();
        let mut mat = vec![0.0; d * d];
        for r in 0..d {
            mat[r * d] = a[r];
            for (c, &j) in rest.iter().enumerate() {
                mat[r * d + c + 1] = if r == j { 1.0 } else { 0.0 };
            }
        }
        let sigma = linalg::det(&mat, d).signum();
        (rest.iter().map(|&j| s.basis()[j].clone()).collect(), sigma)
    };
    let (bu, su) = completion(u_sub);
    let (bv, sv) = completion(v_sub);
    let mut full = vec![0.0; amb * amb];
    let all: Vec<&Vec<f64>> = core::iter::once(&u).chain(bu.iter()).chain(bv.iter()).collect();
    for r in 0..amb {
        for (c, col) in all.iter().enumerate() {
            full[r * amb + c] = col[r];
        }
    }
    let orient = linalg::det(&full, amb) * su * sv;
    if orient == 0.0 || !orient.is_finite() {
        return Err(degenerate("orientation determinant vanished"));
    }
    if orient < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    let anti: Vec<f64> = u.iter().map(|x| -x).collect();
    Ok([SignedPoint::pos(u), SignedPoint::neg(anti)])
}

/// Slices great k-spheres by the great sphere of `v`, expressing the
/// resulting points in `v`'s coordinates (a 0-cycle on `S^{dim v - 1}`).
/// Atoms `2i` and `2i+1` come from subspace `i`.
pub fn slice_great_spheres(
    spheres: &[OrientedSubspace],
    v: &OrientedSubspace,
) -> Result<(ZeroCycle, Vec<SliceAtom>)> {
    let mut atoms = Vec::with_capacity(2 * spheres.len());
    for (i, u) in spheres.iter().enumerate() {
        for p in slice_great_sphere(u, v)? {
            let mut c = v.coords(&p.pos);
            let r = linalg::norm(&c);
            c.iter_mut().for_each(|x| *x /= r);
            atoms.push(SliceAtom { source: i, point: Some(SignedPoint::new(c, p.sign)) });
        }
    }
    let points = atoms.iter().filter_map(|a| a.point.clone()).collect();
    Ok((ZeroCycle::new(Ambient::Sphere(v.dim() - 1), points)?, atoms))
}

/// Slice dependency graph: one node per top simplex, edges between simplices
/// sharing a vertex.
pub fn dependency_graph(m: &Pseudomanifold) -> Vec<Vec<usize>> {
    m.simplex_neighbors()
}

/// Greedy coloring in order of decreasing degree (ties by index). Uses at
/// most `max degree + 1` colors. Classes are returned largest first.
pub fn greedy_coloring(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..adj.len()).collect();
    order.sort_by(|&a, &b| adj[b].len().cmp(&adj[a].len()).then(a.cmp(&b)));
    let mut color = vec![usize::MAX; adj.len()];
    let mut used = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        used.clear();
        used.extend(adj[v].iter().map(|&w| color[w]).filter(|&c| c != usize::MAX));
        used.sort_unstable();
        used.dedup();
        let c = (0..).find(|c| used.binary_search(c).is_err()).unwrap_or(0);
        color[v] = c;
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push(v);
    }
    for cl in classes.iter_mut() {
        cl.sort_unstable();
    }
    classes.sort_by(|a, b| b.len().cmp(&a.len()));
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::Cell;
    use crate::models::{self, random_rotation};
    use crate::rng::RngStream;
    use alloc::sync::Arc;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn segment_examples() {
        let (a, b) = ([0.2, 0.5, 0.5], [0.8, 0.1, 0.9]);
        let p = slice_segment(&a, &b, 0, 0.5).unwrap().unwrap();
        assert!(close(&p.pos, &[0.3, 0.7]) && p.sign == Sign::Pos);
        let q = slice_segment(&b, &a, 0, 0.5).unwrap().unwrap();
        assert!(close(&q.pos, &[0.3, 0.7]) && q.sign == Sign::Neg);
        assert_eq!(slice_segment(&a, &b, 0, 0.9).unwrap(), None);
        assert!(matches!(slice_segment(&a, &b, 0, 0.2), Err(Error::DegenerateSlice(_))));
    }

    #[test]
    fn simplex_examples() {
        let v = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let p = slice_simplex(&v, Sign::Pos, &[0.25, 0.25]).unwrap().unwrap();
        assert!(close(&p.pos, &[0.0]) && p.sign == Sign::Pos);
        let w = vec![v[1].clone(), v[0].clone(), v[2].clone()];
        assert_eq!(slice_simplex(&w, Sign::Pos, &[0.25, 0.25]).unwrap().unwrap().sign, Sign::Neg);
        assert_eq!(slice_simplex(&v, Sign::Pos, &[0.7, 0.7]).unwrap(), None);
        // through an edge: degenerate
        assert!(slice_simplex(&v, Sign::Pos, &[0.5, 0.0]).is_err());
        // flat projection containing x
        let flat = vec![vec![0.0, 0.0, 0.2], vec![1.0, 1.0, 0.4], vec![0.5, 0.5, 0.9]];
        assert!(slice_simplex(&flat, Sign::Pos, &[0.3, 0.3]).is_err());
        assert_eq!(slice_simplex(&flat, Sign::Pos, &[0.3, 0.9]).unwrap(), None);
    }

    #[test]
    fn simplex_slice_agrees_with_segment_slice() {
        let mut rng = RngStream::new(1, 1).rng();
        for _ in 0..500 {
            let a = models::uniform_point(3, &mut rng);
            let b = models::uniform_point(3, &mut rng);
            let c: f64 = rng.random();
            let s = slice_segment(&a, &b, 0, c).unwrap();
            let t = slice_simplex(&[a.clone(), b.clone()], Sign::Pos, &[c]).unwrap();
            match (s, t) {
                (None, None) => {}
                (Some(p), Some(q)) => {
                    assert_eq!(p.sign, q.sign);
                    assert!(p.pos.iter().zip(&q.pos).all(|(x, y)| (x - y).abs() < 1e-9));
                }
                other => panic!("disagreement {other:?}"),
            }
        }
    }

    #[test]
    fn random_jump_slices_cancel() {
        for seed in 0..50 {
            let z = models::sample_random_jump(50, 3, RngStream::new(seed, 0)).unwrap();
            let mut rng = RngStream::new(seed, 1).rng();
            let c: f64 = rng.random();
            let ((zc, atoms), _) = with_retries(&[c], &mut rng, |v| slice_polycycle(&z, &[0], v)).unwrap();
            assert_eq!(zc.net_sign(), 0);
            assert_eq!(atoms.len(), 50);
            assert!(zc.len() <= 50);
            assert_eq!(zc.ambient(), Ambient::Cube(2));
        }
    }

    #[test]
    fn surface_slices_cancel() {
        let oct = Arc::new(crate::chains::Pseudomanifold::octahedron_boundary());
        for seed in 0..100 {
            let z = models::embed_pseudomanifold(oct.clone(), 4, RngStream::new(seed, 0)).unwrap();
            let mut rng = RngStream::new(seed, 1).rng();
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let ((zc, _), _) = with_retries(&x, &mut rng, |v| slice_polycycle(&z, &[3, 1], v)).unwrap();
            assert_eq!(zc.net_sign(), 0, "seed {seed}");
        }
    }

    #[test]
    fn empty_slice_when_nothing_crosses() {
        let cells = vec![
            Cell { verts: vec![vec![0.1, 0.1], vec![0.2, 0.1]], coef: Sign::Pos },
            Cell { verts: vec![vec![0.2, 0.1], vec![0.1, 0.1]], coef: Sign::Pos },
        ];
        let z = PolyCycle::new(2, 1, cells).unwrap();
        let (zc, atoms) = slice_polycycle(&z, &[0], &[0.7]).unwrap();
        assert!(zc.is_empty());
        assert!(atoms.iter().all(|a| a.point.is_none()));
    }

    #[test]
    fn retries_give_up_on_persistent_degeneracy() {
        let mut rng = RngStream::new(0, 0).rng();
        let r: Result<((), Vec<f64>)> = with_retries(&[0.5], &mut rng, |_| Err(degenerate("always")));
        assert!(matches!(r, Err(Error::DegenerateSlice(_))));
        let mut calls = 0;
        let (_, used) = with_retries(&[0.5], &mut rng, |v| {
            calls += 1;
            if calls < 3 { Err(degenerate("x")) } else { Ok(v[0]) }
        })
        .unwrap();
        assert!((used[0] - 0.5).abs() <= RETRY_WINDOW / 2.0);
    }

    #[test]
    fn plane_slices() {
        let line = AffineKPlane::new(vec![vec![1.0, 0.0]], vec![0.0, 0.3]).unwrap();
        let p = slice_plane(&line, &[0], &[0.4]).unwrap().unwrap();
        assert!(close(&p.pos, &[0.3]));
        let q = slice_plane(&line.reversed(), &[0], &[0.4]).unwrap().unwrap();
        assert!(close(&q.pos, &[0.3]) && q.sign == -p.sign);
        assert!(matches!(slice_plane(&line, &[1], &[0.4]), Err(Error::DegenerateSlice(_))));
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let diag = AffineKPlane::through(vec![vec![h, h]], &[0.8, 0.2]).unwrap();
        assert_eq!(slice_plane(&diag, &[0], &[0.1]).unwrap(), None);
        assert!(slice_plane(&diag, &[0], &[0.9]).unwrap().is_some());
    }

    #[test]
    fn random_plane_slice_lies_on_both_planes() {
        let planes = models::sample_cube_planes(300, 4, 2, RngStream::new(5, 5)).unwrap();
        let mut rng = RngStream::new(5, 6).rng();
        for p in &planes {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let Ok(Some(pt)) = slice_plane(p, &[2, 0], &x) else { continue };
            let full = [x[1], pt.pos[0], x[0], pt.pos[1]];
            // residual of full − offset against the plane's direction span
            let mut r: Vec<f64> = full.iter().zip(p.offset()).map(|(a, b)| a - b).collect();
            for b in p.basis() {
                let c = linalg::dot(b, &r);
                r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
            }
            assert!(linalg::norm(&r) < 1e-9);
        }
    }

    #[test]
    fn great_sphere_example_and_residuals() {
        let e = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        let u = OrientedSubspace::new(vec![e(0), e(1)]).unwrap();
        let v = OrientedSubspace::new(vec![e(0), e(2)]).unwrap();
        let [p, q] = slice_great_sphere(&u, &v).unwrap();
        assert!((p.pos[0].abs() - 1.0).abs() < 1e-12 && p.pos[1].abs() < 1e-12);
        assert!(close(&q.pos, &p.pos.iter().map(|x| -x).collect::<Vec<_>>()));
        assert_eq!((p.sign, q.sign), (Sign::Pos, Sign::Neg));
        assert!(matches!(slice_great_sphere(&u, &u), Err(Error::DegenerateSlice(_))));
        assert!(matches!(slice_great_sphere(&u, &OrientedSubspace::new(vec![e(2)]).unwrap()), Err(Error::InvalidArgument(_))));

        let us = models::sample_great_spheres(500, 4, 2, RngStream::new(1, 0)).unwrap();
        let vs = models::sample_great_spheres(500, 4, 2, RngStream::new(1, 1)).unwrap();
        let mut rng = RngStream::new(1, 2).rng();
        for (u, v) in us.iter().zip(&vs) {
            let [p, q] = slice_great_sphere(u, v).unwrap();
            for s in [u, v] {
                let c = s.coords(&p.pos);
                let back = models::apply(s.basis(), &c);
                assert!(linalg::dist(&back, &p.pos) < 1e-9);
            }
            assert!((linalg::dot(&p.pos, &q.pos) + 1.0).abs() < 1e-9);
            let r = random_rotation(5, &mut rng);
            let [rp, _] = slice_great_sphere(&u.transformed(&r), &v.transformed(&r)).unwrap();
            assert!(linalg::dist(&rp.pos, &models::apply(&r, &p.pos)) < 1e-9);
        }
    }

    #[test]
    fn coloring_bounds() {
        let c5 = crate::chains::Pseudomanifold::cycle_graph(5).unwrap();
        let adj = dependency_graph(&c5);
        assert!(adj.iter().all(|nb| nb.len() == 2));
        let classes = greedy_coloring(&adj);
        assert!(classes.len() <= 3);
        assert_eq!(classes.iter().map(Vec::len).sum::<usize>(), 5);
        assert!(classes.windows(2).all(|w| w[0].len() >= w[1].len()));
        for cl in &classes {
            for &a in cl {
                assert!(cl.iter().all(|b| !adj[a].contains(b)));
            }
        }
        let disjoint = crate::chains::Pseudomanifold::new(
            6,
            1,
            vec![(vec![0, 1], Sign::Pos), (vec![2, 3], Sign::Pos), (vec![4, 5], Sign::Pos)],
        )
        .unwrap();
        assert_eq!(greedy_coloring(&dependency_graph(&disjoint)).len(), 1);
        let oct = crate::chains::Pseudomanifold::octahedron_boundary();
        let l = oct.validate().geometry_bound;
        assert!(greedy_coloring(&dependency_graph(&oct)).len() <= l + 1);
    }
}
