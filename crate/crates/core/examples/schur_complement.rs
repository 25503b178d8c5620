//! Schur-complement rates on a random block matrix, checked by eigenvalues.

use nalgebra::DMatrix;
use poisson_gradflow::linalg::min_eigenvalue;
use poisson_gradflow::stability::{schur_rate_lambda_d, schur_rate_lambda_s};

fn with_rate(m11: &DMatrix<f64>, m12: &DMatrix<f64>, r: &DMatrix<f64>, lam: f64) -> DMatrix<f64> {
    let (d, e) = (m11.nrows(), r.nrows());
    let mut m = DMatrix::zeros(d + e, d + e);
    m.view_mut((0, 0), (d, d)).copy_from(m11);
    m.view_mut((0, d), (d, e)).copy_from(m12);
    m.view_mut((d, 0), (e, d)).copy_from(&m12.transpose());
    m.view_mut((d, d), (e, e)).copy_from(&(r + DMatrix::identity(e, e) * lam));
    m
}

fn main() -> poisson_gradflow::Result<()> {
    let m11 = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
    let m12 = DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 0.0, 1.0, 1.5]);
    let r = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, -1.0, 0.5, 0.3, 0.0, 0.3, -0.2]);
    let ls = schur_rate_lambda_s(&m11, &m12, &r)?;
    println!("lambda_s = {ls:.6}");
    for lam in [ls - 0.01, ls + 1e-6, ls + 1.0] {
        println!("  lambda = {lam:.6}: lambda_min(M) = {:+.3e}", min_eigenvalue(&with_rate(&m11, &m12, &r, lam)));
    }
    let mu = 0.5;
    let ld = schur_rate_lambda_d(&m11, &m12, &r, mu)?;
    println!("lambda_d(mu = {mu}) = {ld:.6}: lambda_min(M) = {:.6}", min_eigenvalue(&with_rate(&m11, &m12, &r, ld)));
    Ok(())
}
