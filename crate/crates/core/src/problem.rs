//! Partitioned quadratic objective `J(y) = 1/2 y^T Q y + q^T y`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e12;

/// Objective data with its block partition across agents.
///
/// Construction checks symmetry, positive definiteness and that the block
/// sizes sum to the problem dimension; diagonal dominance is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    q_matrix: DMatrix<f64>,
    q_vector: DVector<f64>,
    partition: Vec<usize>,
    offsets: Vec<usize>,
    eigenvalues: DVector<f64>,
}

impl QuadraticProblem {
    pub fn new(q_matrix: DMatrix<f64>, q_vector: DVector<f64>, partition: Vec<usize>) -> Result<Self> {
        let d = q_matrix.nrows();
        if d == 0 || q_matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "Q must be square and non-empty, got {}x{}",
                q_matrix.nrows(),
                q_matrix.ncols()
            )));
        }
        if q_vector.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "q has length {}, Q is {d}x{d}",
                q_vector.len()
            )));
        }
        if partition.is_empty() || partition.contains(&0) {
            return Err(Error::invalid("partition blocks must be positive"));
        }
        if partition.iter().sum::<usize>() != d {
            return Err(Error::DimensionMismatch(format!(
                "partition {:?} does not sum to {d}",
                partition
            )));
        }
        if q_matrix.iter().chain(q_vector.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("Q and q must be finite"));
        }
        let asym = linalg::asymmetry(&q_matrix);
        if asym > SYMMETRY_TOL {
            return Err(Error::invalid(format!("Q is not symmetric (relative asymmetry {asym:.3e})")));
        }
        let eigenvalues = q_matrix.clone().symmetric_eigenvalues();
        let min = eigenvalues.min();
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!("lambda_min(Q) = {min}")));
        }
        let mut offsets = Vec::with_capacity(partition.len() + 1);
        offsets.push(0);
        for b in &partition {
            offsets.push(offsets.last().unwrap() + b);
        }
        Ok(Self {
            q_matrix,
            q_vector,
            partition,
            offsets,
            eigenvalues,
        })
    }

    /// Builds from row-major nested rows.
    pub fn from_rows(rows: &[Vec<f64>], q: &[f64], partition: Vec<usize>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch("Q rows must all have length d".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(
            DMatrix::from_row_slice(d, d, &flat),
            DVector::from_column_slice(q),
            partition,
        )
    }

    pub fn q_matrix(&self) -> &DMatrix<f64> {
        &self.q_matrix
    }

    pub fn q_vector(&self) -> &DVector<f64> {
        &self.q_vector
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    /// Offset of agent `i`'s block in the stacked vector.
    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn dim(&self) -> usize {
        self.q_matrix.nrows()
    }

    pub fn agent_count(&self) -> usize {
        self.partition.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.max()
    }

    pub fn condition_number(&self) -> f64 {
        self.max_eigenvalue() / self.min_eigenvalue()
    }

    /// `y* = -Q^{-1} q`.
    pub fn optimal_solution(&self) -> Result<DVector<f64>> {
        let condition = self.condition_number();
        if condition > MAX_CONDITION {
            return Err(Error::IllConditioned { condition });
        }
        linalg::spd_solve_vec(&self.q_matrix, &(-&self.q_vector))
    }

    pub fn objective(&self, y: &DVector<f64>) -> f64 {
        0.5 * y.dot(&(&self.q_matrix * y)) + self.q_vector.dot(y)
    }

    pub fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.q_matrix * y + &self.q_vector
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.agent_count() {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.agent_count(),
            })
        } else {
            Ok(())
        }
    }

    /// Block `Q_ij` of shape `d_i x d_j`.
    pub fn block(&self, i: usize, j: usize) -> Result<DMatrix<f64>> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self
            .q_matrix
            .view((self.offsets[i], self.offsets[j]), (self.partition[i], self.partition[j]))
            .into_owned())
    }

    /// Sub-vector `q_i`.
    pub fn block_vector(&self, i: usize) -> Result<DVector<f64>> {
        self.check_index(i)?;
        Ok(self.q_vector.rows(self.offsets[i], self.partition[i]).into_owned())
    }

    /// Slice of agent `i`'s coordinates in a stacked vector.
    pub fn agent_slice<'a>(&self, y: &'a [f64], i: usize) -> &'a [f64] {
        &y[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Directed communication graph over `n` agents. An edge `(j, i)` is the
/// channel carrying agent `j`'s state to agent `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Topology {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (j, i) in edges {
            if j == i {
                return Err(Error::invalid(format!("self-loop ({j}, {i})")));
            }
            if j >= n || i >= n {
                return Err(Error::IndexOutOfRange {
                    index: j.max(i),
                    len: n,
                });
            }
            set.insert((j, i));
        }
        Ok(Self { n, edges: set })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i)))
            .collect();
        Self { n, edges }
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    /// Edges in ascending `(sender, receiver)` order; this is the channel order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * self.n.saturating_sub(1)
    }

    /// In-neighbours of agent `i`.
    pub fn in_neighbours(&self, i: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.1 == i).map(|e| e.0).collect()
    }
}

/// The problem used in the reference simulations: a 6x6 symmetric positive
/// definite, not diagonally dominant `Q`, split over three agents as (3, 2, 1).
pub fn reference_problem() -> QuadraticProblem {
    let rows = vec![
        vec![4.0, 2.0, 1.0, 1.0, 0.0, 2.0],
        vec![2.0, 5.0, 2.0, 0.0, 2.0, 1.0],
        vec![1.0, 2.0, 6.0, 3.0, 1.0, 0.0],
        vec![1.0, 0.0, 3.0, 4.0, 2.0, 1.0],
        vec![0.0, 2.0, 1.0, 2.0, 5.0, 2.0],
        vec![2.0, 1.0, 0.0, 1.0, 2.0, 4.0],
    ];
    let q = [-9.0, -15.0, -22.0, -12.0, -10.0, -5.0];
    QuadraticProblem::from_rows(&rows, &q, vec![3, 2, 1]).expect("reference problem is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> QuadraticProblem {
        let n = values.len();
        QuadraticProblem::new(
            DMatrix::from_diagonal(&DVector::from_column_slice(values)),
            DVector::zeros(n),
            vec![n],
        )
        .unwrap()
    }

    #[test]
    fn identity_system() {
        let p = QuadraticProblem::new(
            DMatrix::identity(2, 2),
            DVector::from_column_slice(&[-1.0, 0.0]),
            vec![1, 1],
        )
        .unwrap();
        let y = p.optimal_solution().unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && y[1].abs() < 1e-15);
    }

    #[test]
    fn zero_offset() {
        let p = QuadraticProblem::new(DMatrix::identity(3, 3) * 2.0, DVector::zeros(3), vec![3]).unwrap();
        assert_eq!(p.optimal_solution().unwrap(), DVector::zeros(3));
    }

    #[test]
    fn min_eigen_of_diagonal() {
        assert!((diag(&[4.0, 9.0]).min_eigenvalue() - 4.0).abs() < 1e-14);
        assert!((diag(&[1.0, 1.0, 1.0]).min_eigenvalue() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_invalid_input() {
        let q = DVector::zeros(2);
        let asym = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        assert!(QuadraticProblem::new(asym, q.clone(), vec![2]).is_err());
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            QuadraticProblem::new(indef, q.clone(), vec![2]),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(QuadraticProblem::new(DMatrix::identity(2, 2), q.clone(), vec![1]).is_err());
        assert!(QuadraticProblem::new(DMatrix::identity(2, 2), q, vec![2, 0]).is_err());
    }

    #[test]
    fn ill_conditioned_is_reported() {
        let p = diag(&[1.0, 1e-13]);
        assert!(matches!(p.optimal_solution(), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn reference_blocks() {
        let p = reference_problem();
        let b11 = p.block(0, 0).unwrap();
        assert_eq!(b11, p.q_matrix().view((0, 0), (3, 3)).into_owned());
        assert_eq!(p.block(0, 2).unwrap().shape(), (3, 1));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(p.block(i, j).unwrap(), p.block(j, i).unwrap().transpose());
            }
        }
        assert!(matches!(p.block(3, 0), Err(Error::IndexOutOfRange { .. })));
        assert_eq!(p.block_vector(1).unwrap().as_slice(), &[-12.0, -10.0]);
    }

    #[test]
    fn single_block_is_whole_matrix() {
        let p = reference_problem();
        let single = QuadraticProblem::new(p.q_matrix().clone(), p.q_vector().clone(), vec![6]).unwrap();
        assert_eq!(&single.block(0, 0).unwrap(), p.q_matrix());
    }

    #[test]
    fn topology_rules() {
        assert!(Topology::new(3, [(1, 1)]).is_err());
        assert!(Topology::new(3, [(0, 3)]).is_err());
        let t = Topology::complete(3);
        assert_eq!(t.edge_count(), 6);
        assert!(t.is_complete());
        assert_eq!(t.in_neighbours(0), vec![1, 2]);
        assert!(!Topology::new(3, [(0, 1)]).unwrap().is_complete());
        assert_eq!(Topology::complete(1).edge_count(), 0);
    }
}
