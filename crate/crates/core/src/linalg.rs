//! Small dense linear algebra for the handful of k×k and n×k systems the
//! slicing and sampling code needs. Matrices are row-major `&[f64]`.

use alloc::vec;
use alloc::vec::Vec;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::sqrt(s)
}

/// LU factorization with partial pivoting, in place. Returns the row
/// permutation and its parity, or `None` when a pivot is exactly zero.
fn lu_in_place(a: &mut [f64], n: usize) -> Option<(Vec<usize>, bool)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut odd = false;
    for col in 0..n {
        let (piv, best) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            perm.swap(piv, col);
            odd = !odd;
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            a[r * n + col] = f;
            for j in col + 1..n {
                a[r * n + j] -= f * a[col * n + j];
            }
        }
    }
    Some((perm, odd))
}

fn lu_solve(lu: &[f64], perm: &[usize], b: &[f64], n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            x[i] -= lu[i * n + j] * x[j];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            x[i] -= lu[i * n + j] * x[j];
        }
        x[i] /= lu[i * n + i];
    }
    x
}

pub fn det(a: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut m = a.to_vec();
    match lu_in_place(&mut m, n) {
        None => 0.0,
        Some((_, odd)) => {
            let d: f64 = (0..n).map(|i| m[i * n + i]).product();
            if odd {
                -d
            } else {
                d
            }
        }
    }
}

/// Solves `a x = b` by partial-pivot elimination followed by one step of
/// residual refinement. `None` if the matrix is exactly singular.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut lu = a.to_vec();
    let (perm, _) = lu_in_place(&mut lu, n)?;
    let mut x = lu_solve(&lu, &perm, b, n);
    let r: Vec<f64> = (0..n)
        .map(|i| b[i] - dot(&a[i * n..(i + 1) * n], &x))
        .collect();
    let dx = lu_solve(&lu, &perm, &r, n);
    for (xi, di) in x.iter_mut().zip(dx) {
        *xi += di;
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// 1-norm condition number estimate `‖A‖₁‖A⁻¹‖₁` (exact for the small
/// systems used here). Infinite for singular input.
pub fn cond1(a: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut lu = a.to_vec();
    let Some((perm, _)) = lu_in_place(&mut lu, n) else {
        return f64::INFINITY;
    };
    let col_norm = |m: &dyn Fn(usize, usize) -> f64| {
        (0..n)
            .map(|j| (0..n).map(|i| m(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mut inv = vec![0.0; n * n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let c = lu_solve(&lu, &perm, &e, n);
        for i in 0..n {
            inv[i * n + j] = c[i];
        }
    }
    let an = col_norm(&|i, j| a[i * n + j]);
    let bn = col_norm(&|i, j| inv[i * n + j]);
    let c = an * bn;
    if c.is_finite() {
        c
    } else {
        f64::INFINITY
    }
}

/// Modified Gram–Schmidt with one reorthogonalization pass. The implied R
/// factor has a positive diagonal. Returns `None` if a column is dependent
/// on its predecessors (relative residual below `1e-12`).
pub fn orthonormalize(cols: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for c in cols {
        let scale = norm(c);
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &out {
                let p = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let nv = norm(&v);
        if !(nv > 1e-12 * scale.max(1e-300)) {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        out.push(v);
    }
    Some(out)
}

/// Completes orthonormal columns `basis` (each of length `dim`) with the
/// orthogonal complement, obtained by orthogonalizing the standard basis.
pub fn complement(basis: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut all = basis.to_vec();
    let mut extra = Vec::new();
    for j in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut v = vec![0.0; dim];
        v[j] = 1.0;
        for _ in 0..2 {
            for q in &all {
                let p = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            v.iter_mut().for_each(|x| *x /= nv);
            all.push(v.clone());
            extra.push(v);
        }
    }
    extra
}

/// Numerical rank and (when the nullity is exactly one) a unit null vector
/// of the `rows × cols` matrix `m`, using full-pivot elimination with a
/// relative pivot tolerance `tol`.
pub fn null_vector(m: &[f64], rows: usize, cols: usize, tol: f64) -> (usize, Option<Vec<f64>>) {
    let mut a = m.to_vec();
    let scale = a.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    let mut col_of: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (rank, rank, 0.0f64);
        for r in rank..rows {
            for c in rank..cols {
                let v = a[r * cols + c].abs();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= tol * scale {
            break;
        }
        let (pr, pc, _) = best;
        for c in 0..cols {
            a.swap(pr * cols + c, rank * cols + c);
        }
        for r in 0..rows {
            a.swap(r * cols + pc, r * cols + rank);
        }
        col_of.swap(pc, rank);
        let p = a[rank * cols + rank];
        for c in 0..cols {
            a[rank * cols + c] /= p;
        }
        for r in 0..rows {
            if r != rank {
                let f = a[r * cols + rank];
                if f != 0.0 {
                    for c in 0..cols {
                        a[r * cols + c] -= f * a[rank * cols + c];
                    }
                }
            }
        }
        rank += 1;
    }
    if cols - rank != 1 {
        return (rank, None);
    }
    // Reduced form: x_pivot_i = -a[i][free] * x_free.
    let free = rank;
    let mut x = vec![0.0; cols];
    x[col_of[free]] = 1.0;
    for i in 0..rank {
        x[col_of[i]] = -a[i * cols + free];
    }
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    (rank, Some(x))
}
