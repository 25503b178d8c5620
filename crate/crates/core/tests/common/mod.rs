//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's linear algebra.

#![allow(dead_code)]

use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn jacobi_min(a: &Mat) -> f64 {
    jacobi_eigenvalues(a)[0]
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Mat = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(*bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

pub fn from_dmatrix(m: &nalgebra::DMatrix<f64>) -> Mat {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Random symmetric positive definite matrix `B B^T + shift I`.
pub fn random_spd<R: Rng>(rng: &mut R, n: usize, shift: f64) -> Mat {
    let b: Mat = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut a = matmul(&b, &transpose(&b));
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += shift;
    }
    a
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    (0..rows).map(|_| (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let a = random_matrix(rng, n, n);
    (0..n).map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect()).collect()
}

/// `[[A, B], [B^T, C]]`.
pub fn block2(a: &Mat, b: &Mat, c: &Mat) -> Mat {
    let bt = transpose(b);
    let mut out: Mat = a.iter().zip(b).map(|(ra, rb)| ra.iter().chain(rb).copied().collect()).collect();
    out.extend(bt.iter().zip(c).map(|(rb, rc)| rb.iter().chain(rc).copied().collect()));
    out
}

pub fn to_dmatrix(a: &Mat) -> nalgebra::DMatrix<f64> {
    let r = a.len();
    let c = if r == 0 { 0 } else { a[0].len() };
    nalgebra::DMatrix::from_fn(r, c, |i, j| a[i][j])
}

pub fn reference_q() -> Mat {
    vec![
        vec![4.0, 2.0, 1.0, 1.0, 0.0, 2.0],
        vec![2.0, 5.0, 2.0, 0.0, 2.0, 1.0],
        vec![1.0, 2.0, 6.0, 3.0, 1.0, 0.0],
        vec![1.0, 0.0, 3.0, 4.0, 2.0, 1.0],
        vec![0.0, 2.0, 1.0, 2.0, 5.0, 2.0],
        vec![2.0, 1.0, 0.0, 1.0, 2.0, 4.0],
    ]
}

pub fn reference_q_vector() -> Vec<f64> {
    vec![-9.0, -15.0, -22.0, -12.0, -10.0, -5.0]
}
