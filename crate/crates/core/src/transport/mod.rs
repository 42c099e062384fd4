//! Filling volumes of signed 0-cycles.
//!
//! On the cube, a 0-cycle is filled relative to the boundary, so points may
//! be matched to `∂[0,1]^d`; on the sphere it must be balanced and is filled
//! by a perfect matching.

mod brute;
mod exact;
pub mod flow;
mod interval;

use alloc::vec::Vec;

pub use brute::{fv_bruteforce, BRUTE_FORCE_MAX_POINTS};
pub use exact::{boundary_distance, fv_cube, fv_sphere, geodesic, CANDIDATE_NEIGHBORS, SPHERE_NEIGHBORS};
pub use interval::{fv_interval, mass_f0};

use crate::chains::{Ambient, ZeroCycle};
use crate::error::{invalid, Result};

/// An optimal transport plan, indexed by point position in the 0-cycle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransportPlan {
    /// `(positive index, negative index, cost)`.
    pub pairings: Vec<(usize, usize, f64)>,
    /// `(point index, boundary distance)`.
    pub boundary_assignments: Vec<(usize, f64)>,
    pub total_cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FvMethod {
    /// Interval formula on `[0,1]`, flow on higher cubes, matching on spheres.
    Auto,
    Interval,
    Flow,
    Brute,
}

/// Filling volume by the requested method. Only the flow-based methods
/// produce a plan.
pub fn fv(z: &ZeroCycle, method: FvMethod) -> Result<(f64, Option<TransportPlan>)> {
    match (method, z.ambient()) {
        (FvMethod::Auto, Ambient::Cube(1)) | (FvMethod::Interval, _) => Ok((fv_interval(z)?, None)),
        (FvMethod::Auto | FvMethod::Flow, Ambient::Cube(_)) => fv_cube(z).map(|(v, p)| (v, Some(p))),
        (FvMethod::Auto | FvMethod::Flow, Ambient::Sphere(_)) => fv_sphere(z).map(|(v, p)| (v, Some(p))),
        (FvMethod::Brute, _) => Ok((fv_bruteforce(z)?, None)),
    }
}

/// Filling volume without a plan: the interval formula when `d = 1`,
/// otherwise the flow solver.
pub fn filling_volume(z: &ZeroCycle) -> Result<f64> {
    match z.ambient() {
        Ambient::Cube(0) | Ambient::Sphere(0) => Err(invalid!("zero-dimensional ambient")),
        _ => fv(z, FvMethod::Auto).map(|r| r.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{Sign, SignedPoint};
    use crate::models;
    use crate::rng::RngStream;
    use alloc::vec;
    use rand::Rng;

    fn cube(d: usize, pts: Vec<SignedPoint>) -> ZeroCycle {
        ZeroCycle::new(Ambient::Cube(d), pts).unwrap()
    }

    fn random_cube_cycle<R: Rng>(rng: &mut R, d: usize, n: usize) -> ZeroCycle {
        let pts = (0..n)
            .map(|_| {
                let s = if rng.random::<bool>() { Sign::Pos } else { Sign::Neg };
                SignedPoint::new(models::uniform_point(d, rng), s)
            })
            .collect();
        cube(d, pts)
    }

    fn plan_is_consistent(z: &ZeroCycle, plan: &TransportPlan) {
        let mut seen = vec![0; z.len()];
        for &(i, j, c) in &plan.pairings {
            assert_eq!(z.points()[i].sign, Sign::Pos);
            assert_eq!(z.points()[j].sign, Sign::Neg);
            assert!(c >= 0.0);
            seen[i] += 1;
            seen[j] += 1;
        }
        for &(i, c) in &plan.boundary_assignments {
            assert!(c >= 0.0);
            seen[i] += 1;
        }
        if matches!(z.ambient(), Ambient::Cube(_)) {
            assert!(seen.iter().all(|&s| s == 1));
        }
        let sum: f64 = plan.pairings.iter().map(|p| p.2).sum::<f64>()
            + plan.boundary_assignments.iter().map(|p| p.1).sum::<f64>();
        assert!((sum - plan.total_cost).abs() < 1e-9);
    }

    #[test]
    fn cube_examples() {
        let z = cube(2, vec![SignedPoint::pos(vec![0.5, 0.5])]);
        assert!((fv_cube(&z).unwrap().0 - 0.5).abs() < 1e-15);
        let z = cube(2, vec![SignedPoint::pos(vec![0.2, 0.2]), SignedPoint::neg(vec![0.2, 0.3])]);
        let (v, plan) = fv_cube(&z).unwrap();
        assert!((v - 0.1).abs() < 1e-12);
        assert_eq!(plan.pairings.len(), 1);
        let z = cube(3, vec![SignedPoint::pos(vec![0.5, 0.5, 0.5])]);
        assert!((fv_bruteforce(&z).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(fv_bruteforce(&ZeroCycle::empty(Ambient::Cube(2))).unwrap(), 0.0);
        assert_eq!(fv_cube(&ZeroCycle::empty(Ambient::Cube(2))).unwrap().0, 0.0);
    }

    #[test]
    fn cube_matches_bruteforce_on_small_instances() {
        let mut rng = RngStream::new(10, 0).rng();
        for d in 1..=3 {
            for _ in 0..150 {
                let n = rng.random_range(0..=6);
                let z = random_cube_cycle(&mut rng, d, n);
                let (v, plan) = fv_cube(&z).unwrap();
                plan_is_consistent(&z, &plan);
                assert!((v - fv_bruteforce(&z).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cube_agrees_with_interval_formula() {
        let mut rng = RngStream::new(11, 0).rng();
        for _ in 0..100 {
            let n = rng.random_range(0..=200);
            let z = random_cube_cycle(&mut rng, 1, n);
            let (v, plan) = fv_cube(&z).unwrap();
            plan_is_consistent(&z, &plan);
            assert!((v - fv_interval(&z).unwrap()).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn sparse_candidates_are_certified_exact() {
        // Larger than the dense threshold: the sparse path with certification
        // must agree with an all-pairs solve.
        let mut rng = RngStream::new(12, 0).rng();
        for d in [2, 3] {
            let z = random_cube_cycle(&mut rng, d, 300);
            let (v, plan) = fv_cube(&z).unwrap();
            plan_is_consistent(&z, &plan);
            let dense = dense_cube(&z);
            assert!((v - dense).abs() < 1e-9 * dense.max(1.0));
        }
    }

    fn dense_cube(z: &ZeroCycle) -> f64 {
        use flow::MinCostFlow;
        let pts = z.points();
        let pos: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].sign == Sign::Pos).collect();
        let neg: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].sign == Sign::Neg).collect();
        let (a, b) = (pos.len(), neg.len());
        let mut g = MinCostFlow::new(3 + a + b);
        g.add_edge(0, 2, b as i64, 0.0);
        g.add_edge(2, 1, a as i64, 0.0);
        for (i, &p) in pos.iter().enumerate() {
            g.add_edge(0, 3 + i, 1, 0.0);
            g.add_edge(3 + i, 2, 1, boundary_distance(&pts[p].pos));
            for (j, &m) in neg.iter().enumerate() {
                g.add_edge(3 + i, 3 + a + j, 1, crate::linalg::dist(&pts[p].pos, &pts[m].pos));
            }
        }
        for (j, &m) in neg.iter().enumerate() {
            g.add_edge(3 + a + j, 1, 1, 0.0);
            g.add_edge(2, 3 + a + j, 1, boundary_distance(&pts[m].pos));
        }
        g.solve(0, 1, (a + b) as i64).unwrap()
    }

    #[test]
    fn zero_iff_cancelling() {
        let p = vec![0.3, 0.6];
        let z = cube(2, vec![SignedPoint::pos(p.clone()), SignedPoint::neg(p.clone())]);
        assert_eq!(fv_cube(&z).unwrap().0, 0.0);
        let z = cube(2, vec![SignedPoint::pos(p.clone()), SignedPoint::neg(vec![0.3, 0.61])]);
        assert!(fv_cube(&z).unwrap().0 > 0.0);
    }

    fn circle(theta: f64) -> Vec<f64> {
        vec![libm::cos(theta), libm::sin(theta)]
    }

    #[test]
    fn sphere_examples() {
        let x = circle(0.3);
        let z = ZeroCycle::new(
            Ambient::Sphere(1),
            vec![SignedPoint::pos(x.clone()), SignedPoint::neg(x.iter().map(|v| -v).collect())],
        )
        .unwrap();
        assert!((fv_sphere(&z).unwrap().0 - core::f64::consts::PI).abs() < 1e-12);

        // Two antipodal pairs from directions θ apart: matching each + to the
        // other pair's − costs π − θ twice, versus π twice.
        for theta in [0.2, 1.0, 2.5] {
            let (u, w) = (circle(0.1), circle(0.1 + theta));
            let neg = |v: &Vec<f64>| v.iter().map(|x| -x).collect::<Vec<_>>();
            let z = ZeroCycle::new(
                Ambient::Sphere(1),
                vec![
                    SignedPoint::pos(u.clone()),
                    SignedPoint::neg(neg(&u)),
                    SignedPoint::pos(w.clone()),
                    SignedPoint::neg(neg(&w)),
                ],
            )
            .unwrap();
            let (v, plan) = fv_sphere(&z).unwrap();
            plan_is_consistent(&z, &plan);
            let want = 2.0 * (core::f64::consts::PI - theta);
            assert!((v - want).abs() < 1e-12, "theta {theta}: {v} vs {want}");
            assert!((fv_bruteforce(&z).unwrap() - want).abs() < 1e-12);
        }
        let bad = ZeroCycle::new(Ambient::Sphere(1), vec![SignedPoint::pos(circle(0.0))]).unwrap();
        assert!(fv_sphere(&bad).is_err());
    }

    #[test]
    fn sphere_matches_bruteforce() {
        let mut rng = RngStream::new(13, 0).rng();
        for d in [1, 2, 3] {
            for _ in 0..60 {
                let pairs = rng.random_range(0..=4);
                let mut pts = Vec::new();
                for _ in 0..pairs {
                    for s in [Sign::Pos, Sign::Neg] {
                        let g = models::gaussian_columns(d + 1, 1, &mut rng).remove(0);
                        let r = crate::linalg::norm(&g);
                        pts.push(SignedPoint::new(g.iter().map(|x| x / r).collect(), s));
                    }
                }
                let z = ZeroCycle::new(Ambient::Sphere(d), pts).unwrap();
                let (v, _) = fv_sphere(&z).unwrap();
                assert!((v - fv_bruteforce(&z).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn brute_force_cap_and_dispatch() {
        let mut rng = RngStream::new(14, 0).rng();
        let z = random_cube_cycle(&mut rng, 2, 9);
        assert!(fv_bruteforce(&z).is_err());
        let z1 = random_cube_cycle(&mut rng, 1, 5);
        let a = fv(&z1, FvMethod::Auto).unwrap().0;
        let b = fv(&z1, FvMethod::Flow).unwrap().0;
        let c = fv(&z1, FvMethod::Brute).unwrap().0;
        assert!((a - b).abs() < 1e-9 && (a - c).abs() < 1e-9);
        assert!(fv(&random_cube_cycle(&mut rng, 2, 3), FvMethod::Interval).is_err());
    }

    #[test]
    fn single_point_moves_change_fv_by_at_most_the_distance() {
        let mut rng = RngStream::new(15, 0).rng();
        for _ in 0..100 {
            let z = random_cube_cycle(&mut rng, 2, 40);
            let base = fv_cube(&z).unwrap().0;
            for eps in [1e-3, 1e-2] {
                let mut pts = z.points().to_vec();
                let i = rng.random_range(0..pts.len());
                let dir = models::gaussian_columns(2, 1, &mut rng).remove(0);
                let r = crate::linalg::norm(&dir);
                let old = pts[i].pos.clone();
                for (x, dx) in pts[i].pos.iter_mut().zip(&dir) {
                    *x = (*x + eps * dx / r).clamp(0.0, 1.0);
                }
                let moved = crate::linalg::dist(&old, &pts[i].pos);
                let v = fv_cube(&cube(2, pts)).unwrap().0;
                assert!((v - base).abs() <= moved + 1e-9);
            }
        }
    }
}
