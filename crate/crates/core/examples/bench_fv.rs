//! Times the exact solvers on i.i.d. cube 0-cycles and random sphere pairs.

use fillvol_core::{linalg, models, transport, Ambient, RngStream, Sign, SignedPoint, ZeroCycle};
use std::time::Instant;

fn main() {
    for (d, n) in [(2, 1024), (2, 4096), (3, 4096)] {
        let z = models::sample_iid_zero_cycle(n, d, RngStream::new(1, d as u64)).unwrap();
        let t = Instant::now();
        let (v, _) = transport::fv_cube(&z).unwrap();
        println!("cube d={d} N={n}: fv={v:.4} in {:?}", t.elapsed());
    }
    for pairs in [1024usize, 2048] {
        let mut rng = RngStream::new(3, 3).rng();
        let mut pts = Vec::new();
        for _ in 0..pairs {
            for s in [Sign::Pos, Sign::Neg] {
                let g = models::gaussian_columns(3, 1, &mut rng).remove(0);
                let r = linalg::norm(&g);
                pts.push(SignedPoint::new(g.iter().map(|x| x / r).collect(), s));
            }
        }
        let z = ZeroCycle::new(Ambient::Sphere(2), pts).unwrap();
        let t = Instant::now();
        let (v, _) = transport::fv_sphere(&z).unwrap();
        println!("sphere S^2 pairs={pairs}: fv={v:.4} in {:?}", t.elapsed());
    }
}
