#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

fn ks_p(d: f64, n: f64) -> f64 {
    let s = n.sqrt();
    kolmogorov_tail((s + 0.12 + 0.11 / s) * d)
}

/// p-value of the one-sample KS test against U(0,1).
pub fn ks_uniform(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    ks_p(d, n)
}

/// p-value of the two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    ks_p(d, na * nb / (na + nb))
}

/// p-value of Pearson's χ² test of independence on a contingency table.
pub fn chi2_independence(table: &[Vec<u64>]) -> f64 {
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let cols: Vec<f64> = (0..table[0].len()).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    let total: f64 = rows.iter().sum();
    let mut stat = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &o) in r.iter().enumerate() {
            let e = rows[i] * cols[j] / total;
            if e > 0.0 {
                stat += (o as f64 - e).powi(2) / e;
            }
        }
    }
    let live = |v: &[f64]| v.iter().filter(|&&x| x > 0.0).count() - 1;
    let dof = (live(&rows) * live(&cols)).max(1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Minimum-cost perfect assignment of a square cost matrix (Hungarian
/// method with potentials, O(n³)).
pub fn hungarian(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn face_dist(p: &[f64]) -> f64 {
    p.iter().map(|&x| x.min(1.0 - x)).fold(f64::INFINITY, f64::min)
}

/// Cube filling volume as a square assignment: rows are the + points and
/// one boundary slot per − point, columns the − points and one boundary
/// slot per + point.
pub fn cube_fv_by_assignment(plus: &[Vec<f64>], minus: &[Vec<f64>]) -> f64 {
    let (a, b) = (plus.len(), minus.len());
    let n = a + b;
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            c[i][j] = match (i < a, j < b) {
                (true, true) => dist(&plus[i], &minus[j]),
                (true, false) => face_dist(&plus[i]),
                (false, true) => face_dist(&minus[j]),
                (false, false) => 0.0,
            };
        }
    }
    hungarian(&c)
}

/// Perfect matching on the sphere under the geodesic metric.
pub fn sphere_fv_by_assignment(plus: &[Vec<f64>], minus: &[Vec<f64>]) -> f64 {
    let c: Vec<Vec<f64>> = plus
        .iter()
        .map(|p| minus.iter().map(|m| p.iter().zip(m).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0).acos()).collect())
        .collect();
    hungarian(&c)
}
