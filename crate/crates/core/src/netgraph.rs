//! Communication digraph among `N` follower inverters and two leaders.
//!
//! Followers are numbered `1..=N`; the two leaders are nodes `N+1` (upper
//! reference) and `N+2` (lower reference). `a_ij > 0` means follower `i`
//! receives from follower `j`; `g_ik > 0` means follower `i` observes leader `k`.

use std::collections::VecDeque;

use thiserror::Error;

use crate::linalg::{LinalgError, Lu, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no followers")]
    Empty,
    #[error("adjacency must be square: {0}")]
    NotSquare(String),
    #[error("pinning vector for leader {leader} has length {actual}, expected {expected}")]
    PinningLength { leader: usize, expected: usize, actual: usize },
    #[error("negative weight {value} at adjacency entry ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, value: f64 },
    #[error("negative pinning gain {value} from leader {leader} to follower {follower}")]
    NegativePinning { leader: usize, follower: usize, value: f64 },
    #[error("non-finite weight at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("nonzero diagonal at adjacency entry ({index}, {index}): self-loops are not allowed")]
    NonzeroDiagonal { index: usize },
    #[error("invalid leader index {index}: leaders are {first} and {second}")]
    InvalidLeader { index: usize, first: usize, second: usize },
    #[error("followers {0:?} have no directed path from any leader")]
    Unreachable(Vec<usize>),
    #[error("sum of Phi matrices is singular: {0}")]
    Singular(LinalgError),
}

/// One of the two reference nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Leader {
    /// Node `N+1`.
    Upper,
    /// Node `N+2`.
    Lower,
}

impl Leader {
    pub const BOTH: [Leader; 2] = [Leader::Upper, Leader::Lower];

    pub fn slot(self) -> usize {
        match self {
            Leader::Upper => 0,
            Leader::Lower => 1,
        }
    }

    /// Global 1-based node number in a graph with `n` followers.
    pub fn node(self, n: usize) -> usize {
        n + 1 + self.slot()
    }

    pub fn from_node(node: usize, n: usize) -> Result<Leader, GraphError> {
        match node.checked_sub(n) {
            Some(1) => Ok(Leader::Upper),
            Some(2) => Ok(Leader::Lower),
            _ => Err(GraphError::InvalidLeader { index: node, first: n + 1, second: n + 2 }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    n: usize,
    adjacency: Matrix,
    pinning: [Vec<f64>; 2],
    in_neighbors: Vec<Vec<(usize, f64)>>,
}

impl CommGraph {
    /// Validates the adjacency and pinning data and builds the graph.
    pub fn new(adjacency: Matrix, pinning: [Vec<f64>; 2]) -> Result<Self, GraphError> {
        if !adjacency.is_square() {
            return Err(GraphError::NotSquare(format!(
                "{}x{}",
                adjacency.rows(),
                adjacency.cols()
            )));
        }
        let n = adjacency.rows();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for (slot, g) in pinning.iter().enumerate() {
            if g.len() != n {
                return Err(GraphError::PinningLength {
                    leader: n + 1 + slot,
                    expected: n,
                    actual: g.len(),
                });
            }
            for (i, &v) in g.iter().enumerate() {
                if !v.is_finite() {
                    return Err(GraphError::NonFinite { row: i + 1, col: n + 1 + slot });
                }
                if v < 0.0 {
                    return Err(GraphError::NegativePinning {
                        leader: n + 1 + slot,
                        follower: i + 1,
                        value: v,
                    });
                }
            }
        }
        let mut in_neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                let a = adjacency[(i, j)];
                if !a.is_finite() {
                    return Err(GraphError::NonFinite { row: i + 1, col: j + 1 });
                }
                if i == j && a != 0.0 {
                    return Err(GraphError::NonzeroDiagonal { index: i + 1 });
                }
                if a < 0.0 {
                    return Err(GraphError::NegativeWeight { row: i + 1, col: j + 1, value: a });
                }
                if a > 0.0 {
                    in_neighbors[i].push((j, a));
                }
            }
        }
        Ok(Self { n, adjacency, pinning, in_neighbors })
    }

    pub fn from_rows(adjacency: &[Vec<f64>], pinning: [Vec<f64>; 2]) -> Result<Self, GraphError> {
        let a = Matrix::from_rows(adjacency).map_err(|e| GraphError::NotSquare(e.to_string()))?;
        Self::new(a, pinning)
    }

    pub fn n_followers(&self) -> usize {
        self.n
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    pub fn pinning(&self, leader: Leader) -> &[f64] {
        &self.pinning[leader.slot()]
    }

    /// `(j, a_ij)` for every follower `j` that follower `i` listens to (0-based).
    pub fn in_neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.in_neighbors[i]
    }

    /// `ℒ = 𝒟 − 𝒜` with in-degree diagonal.
    pub fn laplacian(&self) -> Matrix {
        let mut l = self.adjacency.scale(-1.0);
        for i in 0..self.n {
            let degree: f64 = self.adjacency.row(i).iter().sum();
            l[(i, i)] = degree;
        }
        l
    }

    pub fn pinning_matrix(&self, leader: Leader) -> Matrix {
        Matrix::from_diagonal(self.pinning(leader))
    }

    /// `Φ_k = ½ℒ + 𝒢_k` for leader node `N+1` or `N+2`.
    pub fn phi(&self, leader_node: usize) -> Result<Matrix, GraphError> {
        let leader = Leader::from_node(leader_node, self.n)?;
        Ok(self.phi_for(leader))
    }

    pub fn phi_for(&self, leader: Leader) -> Matrix {
        self.laplacian()
            .scale(0.5)
            .add(&self.pinning_matrix(leader))
            .expect("pinning matrix matches laplacian shape")
    }

    /// Every follower reachable from at least one leader.
    pub fn check_reachability(&self) -> bool {
        self.unreachable_followers().is_empty()
    }

    /// BFS from a virtual source feeding both leaders. Returns 1-based indices.
    pub fn unreachable_followers(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        for i in 0..self.n {
            if self.pinning.iter().any(|g| g[i] > 0.0) {
                seen[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(j) = queue.pop_front() {
            // Edge j -> i exists when a_ij > 0.
            for i in 0..self.n {
                if !seen[i] && self.adjacency[(i, j)] > 0.0 {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        seen.iter().enumerate().filter(|(_, s)| !**s).map(|(i, _)| i + 1).collect()
    }

    pub fn algebra(&self) -> Result<ContainmentAlgebra, GraphError> {
        ContainmentAlgebra::new(self)
    }

    /// Containment point `(ΣΦ_k)⁻¹ Σ Φ_k (1_N x_k)` for scalar leader values
    /// `[x_{N+1}, x_{N+2}]`.
    pub fn containment_reference(&self, leader_values: [f64; 2]) -> Result<Vec<f64>, GraphError> {
        let algebra = self.algebra()?;
        Ok(algebra.containment_reference(leader_values, &vec![0.0; self.n]))
    }
}

/// Eigenvalue summary of `ΣΦ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub symmetric: bool,
    pub nonsingular: bool,
    pub min_real_eigenvalue: f64,
    /// Smallest eigenvalue of `½(M + Mᵀ)`; only meaningful for symmetric `M`.
    pub min_symmetric_eigenvalue: Option<f64>,
}

impl PositivityReport {
    /// Symmetric case: positive definite. Directed case: nonsingular with
    /// every eigenvalue in the open right half-plane.
    pub fn holds(&self) -> bool {
        match self.min_symmetric_eigenvalue {
            Some(min) => self.nonsingular && min > 0.0,
            None => self.nonsingular && self.min_real_eigenvalue > 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContainmentAlgebra {
    laplacian: Matrix,
    pinning: [Vec<f64>; 2],
    phi: [Matrix; 2],
    phi_sum: Matrix,
    phi_sum_inverse: Matrix,
    lu: Lu,
}

impl ContainmentAlgebra {
    pub fn new(graph: &CommGraph) -> Result<Self, GraphError> {
        let laplacian = graph.laplacian();
        let phi = [graph.phi_for(Leader::Upper), graph.phi_for(Leader::Lower)];
        let phi_sum = phi[0].add(&phi[1]).expect("same shape");
        let lu = Lu::factor(&phi_sum).map_err(GraphError::Singular)?;
        let phi_sum_inverse = lu.inverse();
        Ok(Self {
            laplacian,
            pinning: [graph.pinning(Leader::Upper).to_vec(), graph.pinning(Leader::Lower).to_vec()],
            phi,
            phi_sum,
            phi_sum_inverse,
            lu,
        })
    }

    pub fn dim(&self) -> usize {
        self.laplacian.rows()
    }

    pub fn laplacian(&self) -> &Matrix {
        &self.laplacian
    }

    pub fn phi(&self, leader: Leader) -> &Matrix {
        &self.phi[leader.slot()]
    }

    pub fn pinning(&self, leader: Leader) -> &[f64] {
        &self.pinning[leader.slot()]
    }

    pub fn phi_sum(&self) -> &Matrix {
        &self.phi_sum
    }

    pub fn phi_sum_inverse(&self) -> &Matrix {
        &self.phi_sum_inverse
    }

    pub fn solve_phi_sum(&self, rhs: &[f64]) -> Vec<f64> {
        self.lu.solve(rhs).expect("rhs has graph dimension")
    }

    /// `Φ_k (1_N ⊗ x_nk)` where follower `i` perceives leader `k` as
    /// `value + droop[i]`.
    ///
    /// The ½ℒ half acts on the broadcast leader value (`ℒ1 = 0`); the
    /// pinning half sees each pinned follower's own augmented reference.
    /// This keeps `ξ = −diag(c)·ΣΦ_k·e` an identity for arbitrary droop terms.
    pub fn leader_drive(&self, leader: Leader, value: f64, droop: &[f64]) -> Vec<f64> {
        let broadcast = vec![value; self.dim()];
        let mut drive = self.laplacian.mul_vec(&broadcast).expect("dimension");
        for (i, d) in drive.iter_mut().enumerate() {
            *d = 0.5 * *d + self.pinning[leader.slot()][i] * (value + droop[i]);
        }
        drive
    }

    /// `(ΣΦ_k)⁻¹ Σ_k Φ_k(1_N ⊗ x_nk)` with per-follower droop augmentation.
    pub fn containment_reference(&self, leader_values: [f64; 2], droop: &[f64]) -> Vec<f64> {
        let mut rhs = self.leader_drive(Leader::Upper, leader_values[0], droop);
        for (r, d) in rhs.iter_mut().zip(self.leader_drive(Leader::Lower, leader_values[1], droop)) {
            *r += d;
        }
        self.solve_phi_sum(&rhs)
    }

    /// Positivity check on `ΣΦ_k`.
    pub fn positivity(&self) -> PositivityReport {
        let m = self.phi_sum.to_nalgebra();
        let min_real_eigenvalue = m
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min);
        let symmetric = self.phi_sum.is_symmetric(1e-12);
        let min_symmetric_eigenvalue = symmetric.then(|| {
            self.phi_sum
                .symmetric_part()
                .to_nalgebra()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        });
        PositivityReport { symmetric, nonsingular: true, min_real_eigenvalue, min_symmetric_eigenvalue }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench_graph() -> CommGraph {
        let a = vec![
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
        ];
        CommGraph::from_rows(&a, [vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]]).unwrap()
    }

    fn zero_graph(n: usize, g5: Vec<f64>, g6: Vec<f64>) -> CommGraph {
        CommGraph::new(Matrix::zeros(n, n), [g5, g6]).unwrap()
    }

    #[test]
    fn bench_laplacian() {
        let l = bench_graph().laplacian();
        let expected = [
            [2.0, -1.0, 0.0, -1.0],
            [-1.0, 2.0, -1.0, 0.0],
            [0.0, -1.0, 2.0, -1.0],
            [-1.0, 0.0, -1.0, 2.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(l[(i, j)], expected[i][j]);
            }
            assert!(l.row(i).iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn two_node_laplacian() {
        let g = CommGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], [vec![0.0; 2], vec![0.0; 2]])
            .unwrap();
        assert_eq!(g.laplacian().to_rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn zero_graph_laplacian_is_zero() {
        let g = zero_graph(3, vec![0.0; 3], vec![0.0; 3]);
        assert_eq!(g.laplacian().max_abs(), 0.0);
    }

    #[test]
    fn phi_upper_leader_on_bench_graph() {
        let g = bench_graph();
        let phi5 = g.phi(5).unwrap();
        let l = g.laplacian();
        for i in 0..4 {
            for j in 0..4 {
                let pin = if i == j && i == 0 { 1.0 } else { 0.0 };
                assert_eq!(phi5[(i, j)], 0.5 * l[(i, j)] + pin);
            }
        }
    }

    #[test]
    fn phi_on_zero_graph_is_pinning_diagonal() {
        let g = zero_graph(3, vec![1.0; 3], vec![0.0; 3]);
        assert_eq!(g.phi(4).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn phi_rejects_out_of_range_leader() {
        let g = bench_graph();
        assert!(matches!(g.phi(7), Err(GraphError::InvalidLeader { index: 7, .. })));
        assert!(matches!(g.phi(4), Err(GraphError::InvalidLeader { .. })));
    }

    #[test]
    fn self_loop_rejected_with_index() {
        let mut a = Matrix::zeros(3, 3);
        a[(0, 0)] = 1.0;
        let err = CommGraph::new(a, [vec![0.0; 3], vec![0.0; 3]]).unwrap_err();
        assert_eq!(err, GraphError::NonzeroDiagonal { index: 1 });
        assert!(err.to_string().contains("nonzero diagonal"));
    }

    #[test]
    fn negative_and_mismatched_inputs_rejected() {
        let mut a = Matrix::zeros(2, 2);
        a[(1, 0)] = -0.5;
        assert!(matches!(
            CommGraph::new(a, [vec![0.0; 2], vec![0.0; 2]]),
            Err(GraphError::NegativeWeight { row: 2, col: 1, .. })
        ));
        assert!(matches!(
            CommGraph::new(Matrix::zeros(2, 2), [vec![0.0; 3], vec![0.0; 2]]),
            Err(GraphError::PinningLength { leader: 3, .. })
        ));
        assert!(matches!(
            CommGraph::new(Matrix::zeros(2, 3), [vec![0.0; 2], vec![0.0; 2]]),
            Err(GraphError::NotSquare(_))
        ));
        assert!(matches!(
            CommGraph::new(Matrix::zeros(2, 2), [vec![0.0, -1.0], vec![0.0; 2]]),
            Err(GraphError::NegativePinning { follower: 2, .. })
        ));
    }

    #[test]
    fn reachability_cases() {
        assert!(bench_graph().check_reachability());
        assert!(!zero_graph(4, vec![0.0; 4], vec![0.0; 4]).check_reachability());
        let lone = zero_graph(4, vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]);
        assert_eq!(lone.unreachable_followers(), vec![2, 3, 4]);
    }

    #[test]
    fn chain_reachable_from_single_pin() {
        // 1 -> 2 -> 3 -> 4: a_{i+1,i} = 1.
        let mut a = Matrix::zeros(4, 4);
        for i in 0..3 {
            a[(i + 1, i)] = 1.0;
        }
        let g = CommGraph::new(a.clone(), [vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]]).unwrap();
        assert!(g.check_reachability());
        // Reversed direction leaves 2..4 cut off.
        let g = CommGraph::new(a.transpose(), [vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]]).unwrap();
        assert_eq!(g.unreachable_followers(), vec![2, 3, 4]);
    }

    #[test]
    fn equal_leaders_give_flat_reference() {
        let r = bench_graph().containment_reference([60.0, 60.0]).unwrap();
        for v in r {
            assert!((v - 60.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unpinned_graph_is_singular() {
        let g = CommGraph::from_rows(
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            [vec![0.0; 2], vec![0.0; 2]],
        )
        .unwrap();
        assert!(matches!(g.containment_reference([1.0, 2.0]), Err(GraphError::Singular(_))));
    }

    #[test]
    fn bench_phi_sum_positive_definite() {
        let report = bench_graph().algebra().unwrap().positivity();
        assert!(report.symmetric);
        assert!(report.holds());
        assert!(report.min_real_eigenvalue > 0.0);
    }

    #[test]
    fn directed_graph_uses_eigenvalue_criterion() {
        let mut a = Matrix::zeros(3, 3);
        a[(1, 0)] = 1.0;
        a[(2, 1)] = 2.0;
        let g = CommGraph::new(a, [vec![1.0, 0.0, 0.0], vec![0.0; 3]]).unwrap();
        let report = g.algebra().unwrap().positivity();
        assert!(!report.symmetric);
        assert!(report.min_symmetric_eigenvalue.is_none());
        assert!(report.holds());
    }
}
