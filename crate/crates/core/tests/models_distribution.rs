mod common;

use common::{chi2_independence, ks_two_sample, ks_uniform};
use fillvol_core::linalg::dot;
use fillvol_core::models::{haar_frame, random_rotation, sample_great_spheres, sample_offset, sample_random_jump};
use fillvol_core::RngStream;
use rand::Rng;
use rand_distr::StandardNormal;

const ALPHA: f64 = 1e-3;

#[test]
fn jump_vertices_are_uniform_per_coordinate() {
    let n = 3;
    let mut coords = vec![Vec::new(); n];
    for t in 0..100 {
        let z = sample_random_jump(1000, n, RngStream::for_trial(41, 0, t)).unwrap();
        // each vertex starts exactly one edge
        for c in z.cells() {
            for (i, x) in c.verts[0].iter().enumerate() {
                coords[i].push(*x);
            }
        }
    }
    for (i, xs) in coords.iter().enumerate() {
        assert_eq!(xs.len(), 100_000);
        let p = ks_uniform(xs);
        assert!(p > ALPHA, "coordinate {i}: p = {p}");
    }
}

/// Gram–Schmidt on Gaussian columns, written independently of the library.
fn gaussian_frame<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for u in &out {
            let c = dot(u, &v);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
        let r = dot(&v, &v).sqrt();
        if r > 1e-8 {
            out.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    out
}

/// Unit vectors completing `basis` to an orthonormal basis of `R^n`.
fn complete(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for u in &all {
            let c = dot(u, &v);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
        let r = dot(&v, &v).sqrt();
        if r > 1e-6 {
            all.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    all.split_off(basis.len())
}

#[test]
fn line_offsets_in_the_square_are_uniform_on_the_shadow() {
    let mut rng = RngStream::new(42, 0).rng();
    let mut us = Vec::new();
    for _ in 0..20_000 {
        let dir = gaussian_frame(2, 1, &mut rng);
        let w = complete(&dir, 2).remove(0);
        let lo: f64 = w.iter().map(|x| x.min(0.0)).sum();
        let hi: f64 = w.iter().map(|x| x.max(0.0)).sum();
        let (plane, _) = sample_offset(dir, &mut rng, 1_000_000).unwrap();
        let y = dot(&w, plane.offset());
        us.push((y - lo) / (hi - lo));
    }
    let p = ks_uniform(&us);
    assert!(p > ALPHA, "p = {p}");
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Uniform point of a convex polygon through an area-weighted fan.
fn sample_polygon<R: Rng>(hull: &[[f64; 2]], rng: &mut R) -> [f64; 2] {
    let areas: Vec<f64> = (1..hull.len() - 1).map(|i| cross(hull[0], hull[i], hull[i + 1]).abs()).collect();
    let total: f64 = areas.iter().sum();
    let mut r = rng.random::<f64>() * total;
    let mut i = 0;
    while i + 1 < areas.len() && r > areas[i] {
        r -= areas[i];
        i += 1;
    }
    let (mut s, mut t) = (rng.random::<f64>(), rng.random::<f64>());
    if s + t > 1.0 {
        (s, t) = (1.0 - s, 1.0 - t);
    }
    let (a, b, c) = (hull[0], hull[i + 1], hull[i + 2]);
    [a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]), a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1])]
}

#[test]
fn line_offsets_in_the_cube_match_the_hexagon_oracle() {
    let mut rng = RngStream::new(43, 0).rng();
    let bins = 6;
    for _ in 0..3 {
        let dir = gaussian_frame(3, 1, &mut rng);
        let comp = complete(&dir, 3);
        let corners: Vec<[f64; 2]> = (0..8)
            .map(|m| {
                let v: Vec<f64> = (0..3).map(|i| ((m >> i) & 1) as f64).collect();
                [dot(&comp[0], &v), dot(&comp[1], &v)]
            })
            .collect();
        let hull = convex_hull(corners);
        let (x0, x1) = hull.iter().fold((f64::MAX, f64::MIN), |(l, u), p| (l.min(p[0]), u.max(p[0])));
        let (y0, y1) = hull.iter().fold((f64::MAX, f64::MIN), |(l, u), p| (l.min(p[1]), u.max(p[1])));
        let cell = |p: [f64; 2]| {
            let i = (((p[0] - x0) / (x1 - x0) * bins as f64) as usize).min(bins - 1);
            let j = (((p[1] - y0) / (y1 - y0) * bins as f64) as usize).min(bins - 1);
            i * bins + j
        };
        let mut table = vec![vec![0u64; bins * bins]; 2];
        for _ in 0..20_000 {
            let (plane, _) = sample_offset(dir.clone(), &mut rng, 1_000_000).unwrap();
            table[0][cell([dot(&comp[0], plane.offset()), dot(&comp[1], plane.offset())])] += 1;
            table[1][cell(sample_polygon(&hull, &mut rng))] += 1;
        }
        // drop bins that both samples leave empty (outside the hexagon)
        let keep: Vec<usize> = (0..bins * bins).filter(|&c| table[0][c] + table[1][c] > 0).collect();
        let table: Vec<Vec<u64>> = table.iter().map(|r| keep.iter().map(|&c| r[c]).collect()).collect();
        let p = chi2_independence(&table);
        assert!(p > ALPHA, "p = {p}");
    }
}

/// Largest cosine of a principal angle between span(e1, e2) and `u`.
fn top_cosine(u: &[Vec<f64>]) -> f64 {
    let m = [[u[0][0], u[1][0]], [u[0][1], u[1][1]]];
    let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let c = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let top = 0.5 * (a + c) + (0.25 * (a - c) * (a - c) + b * b).sqrt();
    top.sqrt()
}

#[test]
fn great_spheres_are_rotation_invariant() {
    let spheres = sample_great_spheres(8000, 3, 1, RngStream::new(44, 0)).unwrap();
    let rot = random_rotation(4, &mut RngStream::new(44, 1).rng());
    let (first, second) = spheres.split_at(4000);
    let plain: Vec<f64> = first.iter().map(|u| top_cosine(u.basis())).collect();
    let rotated: Vec<f64> = second.iter().map(|u| top_cosine(u.transformed(&rot).basis())).collect();
    let p = ks_two_sample(&plain, &rotated);
    assert!(p > ALPHA, "rotated: p = {p}");

    let mut rng = RngStream::new(44, 2).rng();
    let oracle: Vec<f64> = (0..4000).map(|_| top_cosine(&gaussian_frame(4, 2, &mut rng))).collect();
    let p = ks_two_sample(&plain, &oracle);
    assert!(p > ALPHA, "oracle: p = {p}");

    let frames: Vec<f64> = (0..4000).map(|_| top_cosine(&haar_frame(4, 2, &mut rng))).collect();
    let p = ks_two_sample(&frames, &oracle);
    assert!(p > ALPHA, "frames: p = {p}");
}
