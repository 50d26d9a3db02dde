//! Dense linear algebra on top of faer.

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;

use crate::error::{Error, Result};

pub use faer::c64;
pub use faer::Mat;

/// Eigenvalues and right eigenvectors (as columns) of a real square matrix.
pub fn eigen(a: &Mat<f64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let e = a.eigen().map_err(|e| Error::LinAlg(format!("eigendecomposition: {:?}", e)))?;
    let s = e.S();
    let values: Vec<c64> = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((values, e.U().to_owned()))
}

pub fn eigenvalues(a: &Mat<f64>) -> Result<Vec<c64>> {
    a.eigenvalues().map_err(|e| Error::LinAlg(format!("eigenvalues: {:?}", e)))
}

pub fn inverse_complex(a: &Mat<c64>) -> Mat<c64> {
    a.partial_piv_lu().inverse()
}

pub fn inverse(a: &Mat<f64>) -> Mat<f64> {
    a.partial_piv_lu().inverse()
}

pub fn solve(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = a.partial_piv_lu().solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

/// 2-norm condition number of a complex matrix.
pub fn cond2(a: &Mat<c64>) -> Result<f64> {
    let s = a
        .singular_values()
        .map_err(|e| Error::LinAlg(format!("singular values: {:?}", e)))?;
    let max = s.first().copied().unwrap_or(0.0);
    let min = s.last().copied().unwrap_or(0.0);
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

pub fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut y = vec![0.0; n];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        let col = a.col(j);
        for i in 0..n {
            y[i] += col[i] * xj;
        }
    }
    y
}

pub fn matvec_c(a: &Mat<c64>, x: &[c64]) -> Vec<c64> {
    let n = a.nrows();
    let mut y = vec![c64::new(0.0, 0.0); n];
    for j in 0..a.ncols() {
        let xj = x[j];
        let col = a.col(j);
        for i in 0..n {
            y[i] += col[i] * xj;
        }
    }
    y
}

fn one_norm(a: &Mat<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with the degree-13 Pade
/// approximant.
pub fn expm(a: &Mat<f64>) -> Mat<f64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let id = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let inner_u = Mat::from_fn(n, n, |i, j| B[13] * a6[(i, j)] + B[11] * a4[(i, j)] + B[9] * a2[(i, j)]);
    let tail_u = Mat::from_fn(n, n, |i, j| {
        B[7] * a6[(i, j)] + B[5] * a4[(i, j)] + B[3] * a2[(i, j)] + B[1] * id(i, j)
    });
    let u = &a * &(&(&a6 * &inner_u) + &tail_u);
    let inner_v = Mat::from_fn(n, n, |i, j| B[12] * a6[(i, j)] + B[10] * a4[(i, j)] + B[8] * a2[(i, j)]);
    let tail_v = Mat::from_fn(n, n, |i, j| {
        B[6] * a6[(i, j)] + B[4] * a4[(i, j)] + B[2] * a2[(i, j)] + B[0] * id(i, j)
    });
    let v = &(&a6 * &inner_v) + &tail_v;
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_rotation() {
        let t = 2.5;
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => -t,
            (1, 0) => t,
            _ => 0.0,
        });
        let e = expm(&a);
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-13);
        assert!((e[(1, 0)] - t.sin()).abs() < 1e-13);
    }

    #[test]
    fn expm_matches_eigen_path() {
        let n = 6;
        let a = Mat::from_fn(n, n, |i, j| {
            if i == j {
                -((i + 1) as f64).powi(2)
            } else {
                0.3 * ((i * 7 + j * 3) % 5) as f64 - 0.6
            }
        });
        let e = expm(&a);
        let (vals, vecs) = eigen(&a).unwrap();
        let inv = inverse_complex(&vecs);
        for i in 0..n {
            for j in 0..n {
                let mut s = c64::new(0.0, 0.0);
                for k in 0..n {
                    s += vecs[(i, k)] * vals[k].exp() * inv[(k, j)];
                }
                assert!((s.re - e[(i, j)]).abs() < 1e-11, "{} {}", s, e[(i, j)]);
            }
        }
    }
}
