//! Systems `T_j - T_i ≤ w(i, j)` solved as shortest paths.

use num_traits::Zero;

use crate::market::Matrix;
use crate::rational::Rational;

/// Complete digraph on `n` nodes; edge `i → j` carries `weight[i][j]`.
/// Diagonal entries are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceConstraintGraph {
    weight: Matrix,
}

impl DifferenceConstraintGraph {
    pub fn new(weight: Matrix) -> Self {
        assert!(
            weight.iter().all(|row| row.len() == weight.len()),
            "weights must be square"
        );
        Self { weight }
    }

    pub fn n(&self) -> usize {
        self.weight.len()
    }

    pub fn weight(&self, from: usize, to: usize) -> &Rational {
        &self.weight[from][to]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DifferenceSolution {
    Feasible(Vec<Rational>),
    /// Nodes of a simple cycle `c0 → c1 → … → c0` with negative total weight.
    NegativeCycle(Vec<usize>),
}

/// Bellman–Ford from a virtual source joined to every node by a zero edge.
pub fn difference_constraints_solve(graph: &DifferenceConstraintGraph) -> DifferenceSolution {
    let n = graph.n();
    let mut dist = vec![Rational::zero(); n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut last_relaxed = None;
    for _ in 0..n {
        last_relaxed = None;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let candidate = &dist[i] + graph.weight(i, j);
                if candidate < dist[j] {
                    dist[j] = candidate;
                    pred[j] = Some(i);
                    last_relaxed = Some(j);
                }
            }
        }
        if last_relaxed.is_none() {
            return DifferenceSolution::Feasible(dist);
        }
    }
    let Some(mut node) = last_relaxed else {
        return DifferenceSolution::Feasible(dist);
    };
    // n more steps back along predecessors lands inside the cycle.
    for _ in 0..n {
        node = pred[node].expect("relaxed nodes have predecessors");
    }
    let start = node;
    let mut cycle = vec![start];
    let mut cur = pred[start].expect("cycle node");
    while cur != start {
        cycle.push(cur);
        cur = pred[cur].expect("cycle node");
    }
    cycle.reverse();
    DifferenceSolution::NegativeCycle(cycle)
}

pub fn cycle_weight(graph: &DifferenceConstraintGraph, cycle: &[usize]) -> Rational {
    (0..cycle.len())
        .map(|k| graph.weight(cycle[k], cycle[(k + 1) % cycle.len()]).clone())
        .sum()
}
