//! Undirected graphs on nodes `0..n` and random generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GbsError, Result};
use crate::gaussian::AdjacencyKernel;
use crate::linalg::RMat;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: AdjacencyKernel,
}

impl Graph {
    /// Requires a zero diagonal and non-negative weights.
    pub fn new(adjacency: AdjacencyKernel) -> Result<Self> {
        let a = adjacency.entries();
        for i in 0..a.nrows() {
            if a[(i, i)] != 0.0 {
                return Err(GbsError::validation(format!("self-loop on node {i}")));
            }
        }
        if let Some(w) = a.iter().find(|&&w| w < 0.0) {
            return Err(GbsError::validation(format!("negative edge weight {w}")));
        }
        Ok(Graph { adjacency })
    }

    pub fn from_matrix(m: RMat) -> Result<Self> {
        Graph::new(AdjacencyKernel::new(m)?)
    }

    /// Undirected weighted edge list; repeated edges keep the last weight.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = RMat::zeros(n, n);
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(GbsError::validation(format!("edge ({u}, {v}) outside {n} nodes")));
            }
            m[(u, v)] = w;
            m[(v, u)] = w;
        }
        Graph::from_matrix(m)
    }

    pub fn kernel(&self) -> &AdjacencyKernel {
        &self.adjacency
    }

    pub fn adjacency(&self) -> &RMat {
        self.adjacency.entries()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.size()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.adjacency()[(u, v)] > 0.0
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.adjacency()[(u, v)]
    }

    pub fn is_weighted(&self) -> bool {
        self.adjacency().iter().any(|&w| w != 0.0 && w != 1.0)
    }

    /// Weighted degree in the whole graph.
    pub fn degree(&self, u: usize) -> f64 {
        self.adjacency().row(u).sum()
    }

    /// Weighted number of edges from `u` into `nodes`.
    pub fn degree_into(&self, u: usize, nodes: &[usize]) -> f64 {
        nodes.iter().filter(|&&v| v != u).map(|&v| self.weight(u, v)).sum()
    }

    /// Number of edges inside `nodes`, ignoring weights.
    pub fn edge_count(&self, nodes: &[usize]) -> usize {
        let mut count = 0;
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i + 1..] {
                if self.has_edge(u, v) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn total_edges(&self) -> usize {
        let all: Vec<usize> = (0..self.node_count()).collect();
        self.edge_count(&all)
    }

    pub fn neighbours(&self, u: usize) -> Vec<usize> {
        (0..self.node_count()).filter(|&v| self.has_edge(u, v)).collect()
    }

    pub(crate) fn check_nodes(&self, nodes: &[usize]) -> Result<()> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        for &u in nodes {
            if u >= n {
                return Err(GbsError::validation(format!("node {u} not in a graph of {n} nodes")));
            }
            if seen[u] {
                return Err(GbsError::validation(format!("node {u} listed twice")));
            }
            seen[u] = true;
        }
        Ok(())
    }
}

/// `G(n, p)` with unit weights.
pub fn erdos_renyi(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut m = RMat::zeros(n, n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                m[(u, v)] = 1.0;
                m[(v, u)] = 1.0;
            }
        }
    }
    Graph::from_matrix(m).expect("generated matrix is a valid graph")
}

/// A `G(20, 0.5)` graph on nodes 0..19 and a planted `G(10, 0.875)` on
/// nodes 20..29, joined by edges between 8 random nodes of each side.
pub fn generate_planted(seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = erdos_renyi(20, 0.5, &mut rng);
    let inner = erdos_renyi(10, 0.875, &mut rng);
    let mut m = RMat::zeros(30, 30);
    m.view_mut((0, 0), (20, 20)).copy_from(outer.adjacency());
    m.view_mut((20, 20), (10, 10)).copy_from(inner.adjacency());
    let mut left: Vec<usize> = (0..20).collect();
    let mut right: Vec<usize> = (20..30).collect();
    left.shuffle(&mut rng);
    right.shuffle(&mut rng);
    for (&u, &v) in left.iter().zip(&right).take(8) {
        m[(u, v)] = 1.0;
        m[(v, u)] = 1.0;
    }
    Graph::from_matrix(m).expect("generated matrix is a valid graph")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Graph::from_matrix(RMat::identity(2, 2)).is_err());
        let neg = RMat::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(Graph::from_matrix(neg).is_err());
        assert!(Graph::from_edges(2, &[(0, 2, 1.0)]).is_err());
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        assert!(g.is_weighted());
        assert_eq!(g.degree(1), 3.0);
        assert_eq!(g.degree_into(1, &[0, 1]), 1.0);
        assert_eq!(g.edge_count(&[0, 1, 2]), 2);
        assert_eq!(g.neighbours(1), vec![0, 2]);
        assert!(g.check_nodes(&[0, 0]).is_err());
        assert!(g.check_nodes(&[3]).is_err());
    }

    #[test]
    fn planted_structure() {
        let mut inner_edges = Vec::new();
        for seed in 0..100 {
            let g = generate_planted(seed);
            assert_eq!(g.node_count(), 30);
            assert!(!g.is_weighted());
            let mut cross = 0;
            for u in 0..20 {
                for v in 20..30 {
                    cross += g.has_edge(u, v) as usize;
                }
            }
            assert_eq!(cross, 8);
            let planted: Vec<usize> = (20..30).collect();
            inner_edges.push(g.edge_count(&planted) as f64);
        }
        let mean = inner_edges.iter().sum::<f64>() / 100.0;
        // Bin(45, 0.875): mean 39.375, sd of the mean sqrt(45 * 0.875 * 0.125 / 100)
        let sd = (45.0 * 0.875 * 0.125 / 100.0f64).sqrt();
        assert!((mean - 39.375).abs() < 3.0 * sd, "{mean}");
    }
}
