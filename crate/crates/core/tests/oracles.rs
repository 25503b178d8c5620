mod common;

use std::sync::Arc;

use nalgebra::DMatrix;
use poisson_gradflow::channel::DriftSchedule;
use poisson_gradflow::linalg;
use poisson_gradflow::network::{assemble_distributed_system, uniform_channels};
use poisson_gradflow::problem::{reference_problem, QuadraticProblem};
use poisson_gradflow::stability::assemble_m;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

#[test]
fn jacobi_oracle_on_known_spectra() {
    let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
    let ev = jacobi_eigenvalues(&a);
    assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    let d = vec![vec![5.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 2.0]];
    assert_eq!(jacobi_eigenvalues(&d), vec![-1.0, 2.0, 5.0]);
}

#[test]
fn gauss_oracle_on_small_system() {
    let a = vec![vec![0.0, 2.0], vec![3.0, 1.0]];
    let x = gauss_solve(&a, &[4.0, 5.0]);
    assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
}

#[test]
fn reference_min_eigenvalue_matches_oracle() {
    let lib = reference_problem().min_eigenvalue();
    let oracle = jacobi_min(&reference_q());
    assert!((lib - oracle).abs() < 1e-10, "{lib} vs {oracle}");
    assert!((lib - 0.31).abs() < 0.01);
}

#[test]
fn reference_optimum_matches_gauss() {
    let y = reference_problem().optimal_solution().unwrap();
    let neg_q: Vec<f64> = reference_q_vector().iter().map(|v| -v).collect();
    let oracle = gauss_solve(&reference_q(), &neg_q);
    for (a, b) in y.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
    let expected = [1.0, 1.0, 3.0, 0.0, 1.0, 0.0];
    for (a, b) in y.iter().zip(expected) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn random_spd_eigen_and_norm_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..7 {
        let a = random_spd(&mut rng, n, 0.1);
        let lib_min = linalg::min_eigenvalue(&to_dmatrix(&a));
        assert!((lib_min - jacobi_min(&a)).abs() < 1e-10);
        let b = random_matrix(&mut rng, n, n + 2);
        let gram = matmul(&transpose(&b), &b);
        let oracle_norm = jacobi_eigenvalues(&gram).last().unwrap().sqrt();
        assert!((linalg::spectral_norm(&to_dmatrix(&b)) - oracle_norm).abs() < 1e-9);
        let rhs: Vec<f64> = (0..n).map(|k| k as f64 - 1.0).collect();
        let x = linalg::spd_solve_vec(&to_dmatrix(&a), &nalgebra::DVector::from_vec(rhs.clone())).unwrap();
        for (u, v) in x.iter().zip(gauss_solve(&a, &rhs)) {
            assert!((u - v).abs() < 1e-9);
        }
    }
}

#[test]
fn hand_computed_two_agent_m() {
    // Q = [[2,1],[1,2]], one coordinate per agent, rates 5, a = 0.
    // Order (x0, x1, e01, e10): M11 = 2Q, M21 = 2I, R couples e01/e10 by -2.
    let p = QuadraticProblem::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]], &[0.0, 0.0], vec![1, 1]).unwrap();
    let ch = uniform_channels(2, 5.0, DriftSchedule::Constant(0.0)).unwrap();
    let sys = assemble_distributed_system(Arc::new(p), &ch).unwrap();
    let m = assemble_m(&sys, &[1.0, 1.0], 0.0).unwrap().full();
    let hand = DMatrix::from_row_slice(
        4,
        4,
        &[
            4.0, 2.0, 2.0, 0.0, //
            2.0, 4.0, 0.0, 2.0, //
            2.0, 0.0, 5.0, -2.0, //
            0.0, 2.0, -2.0, 5.0,
        ],
    );
    assert_eq!(m, hand);
    let min = jacobi_min(&from_dmatrix(&m));
    assert!((linalg::min_eigenvalue(&m) - min).abs() < 1e-12);
}
