//! Maximum clique by local search from seed subgraphs, and the rescaled
//! adjacency matrix used to bias sampling towards heavy nodes.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GbsError, Result};
use crate::gaussian::AdjacencyKernel;
use crate::graph::Graph;
use crate::linalg::RMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeSelect {
    Uniform,
    #[default]
    Degree,
}

pub fn is_clique(g: &Graph, nodes: &[usize]) -> bool {
    nodes.iter().enumerate().all(|(i, &u)| nodes[i + 1..].iter().all(|&v| g.has_edge(u, v)))
}

fn require_clique(g: &Graph, clique: &[usize]) -> Result<()> {
    g.check_nodes(clique)?;
    if !is_clique(g, clique) {
        return Err(GbsError::validation(format!("{clique:?} is not a clique")));
    }
    Ok(())
}

fn pick<T: Copy>(items: &[T], rng: &mut ChaCha8Rng) -> T {
    *items.choose(rng).expect("non-empty candidate list")
}

/// Removes lowest-degree nodes (degree within the current set, uniform
/// tie-break) until the set is a clique.
pub fn shrink(nodes: &[usize], g: &Graph, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shrink_with(nodes, g, &mut rng)
}

fn shrink_with(nodes: &[usize], g: &Graph, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if nodes.is_empty() {
        return Err(GbsError::validation("cannot shrink an empty set"));
    }
    g.check_nodes(nodes)?;
    let mut current = nodes.to_vec();
    current.sort_unstable();
    while !is_clique(g, &current) {
        let degrees: Vec<usize> =
            current.iter().map(|&u| current.iter().filter(|&&v| g.has_edge(u, v)).count()).collect();
        let low = *degrees.iter().min().unwrap();
        let ties: Vec<usize> = (0..current.len()).filter(|&i| degrees[i] == low).collect();
        current.remove(pick(&ties, rng));
    }
    Ok(current)
}

/// Nodes outside the clique adjacent to every clique member.
pub fn c0(g: &Graph, clique: &[usize]) -> Result<Vec<usize>> {
    require_clique(g, clique)?;
    Ok((0..g.node_count())
        .filter(|u| !clique.contains(u) && clique.iter().all(|&v| g.has_edge(*u, v)))
        .collect())
}

/// Nodes outside the clique adjacent to all but one member, paired with
/// the member they miss.
pub fn c1(g: &Graph, clique: &[usize]) -> Result<Vec<(usize, usize)>> {
    require_clique(g, clique)?;
    let mut out = Vec::new();
    for u in (0..g.node_count()).filter(|u| !clique.contains(u)) {
        let missing: Vec<usize> = clique.iter().copied().filter(|&v| !g.has_edge(u, v)).collect();
        if missing.len() == 1 {
            out.push((u, missing[0]));
        }
    }
    Ok(out)
}

fn select(candidates: &[usize], g: &Graph, how: NodeSelect, rng: &mut ChaCha8Rng) -> usize {
    match how {
        NodeSelect::Uniform => pick(candidates, rng),
        NodeSelect::Degree => {
            let best = candidates.iter().map(|&u| g.degree(u)).fold(f64::NEG_INFINITY, f64::max);
            let ties: Vec<usize> = candidates.iter().copied().filter(|&u| g.degree(u) == best).collect();
            pick(&ties, rng)
        }
    }
}

fn grow(clique: &mut Vec<usize>, g: &Graph, how: NodeSelect, rng: &mut ChaCha8Rng) {
    loop {
        let cands = c0(g, clique).expect("growth keeps a clique");
        if cands.is_empty() {
            return;
        }
        let u = select(&cands, g, how, rng);
        let pos = clique.binary_search(&u).unwrap_err();
        clique.insert(pos, u);
    }
}

/// Alternates growth from `c0` with one swap from `c1` until both are
/// empty, a clique repeats, or `max_iters` swaps have been made; ends with
/// a final growth.
pub fn local_search(clique: &[usize], g: &Graph, max_iters: usize, node_select: NodeSelect, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    local_search_with(clique, g, max_iters, node_select, &mut rng)
}

fn local_search_with(
    clique: &[usize],
    g: &Graph,
    max_iters: usize,
    how: NodeSelect,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    require_clique(g, clique)?;
    let mut current = clique.to_vec();
    current.sort_unstable();
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    visited.insert(current.clone());
    for _ in 0..max_iters {
        grow(&mut current, g, how, rng);
        visited.insert(current.clone());
        let swaps = c1(g, &current)?;
        if swaps.is_empty() {
            break;
        }
        let incoming: Vec<usize> = swaps.iter().map(|s| s.0).collect();
        let u = select(&incoming, g, how, rng);
        let partner = swaps.iter().find(|s| s.0 == u).unwrap().1;
        let mut next: Vec<usize> = current.iter().copied().filter(|&v| v != partner).collect();
        let pos = next.binary_search(&u).unwrap_err();
        next.insert(pos, u);
        debug_assert!(is_clique(g, &next));
        if !visited.insert(next.clone()) {
            break;
        }
        current = next;
    }
    grow(&mut current, g, how, rng);
    Ok(current)
}

/// Shrinks every seed to a clique and runs local search from it. Seed `i`
/// uses stream `i` of `seed`. Results are sorted by size descending, then
/// lexicographically, without duplicates.
pub fn search(
    seeds: &[Vec<usize>],
    g: &Graph,
    max_iters: usize,
    node_select: NodeSelect,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    use rayon::prelude::*;
    let found: Vec<Vec<usize>> = seeds
        .par_iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(i, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let c = shrink_with(s, g, &mut rng)?;
            local_search_with(&c, g, max_iters, node_select, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut unique: Vec<Vec<usize>> = found.into_iter().collect::<HashSet<_>>().into_iter().collect();
    unique.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    Ok(unique)
}

/// `Omega (D - A) Omega` with `Omega_ii = 1 + alpha w_i`.
pub fn weighted_rescale(g: &Graph, node_weights: &[f64], alpha: f64) -> Result<AdjacencyKernel> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(GbsError::validation(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    if node_weights.len() != g.node_count() {
        return Err(GbsError::validation(format!(
            "{} node weights for {} nodes",
            node_weights.len(),
            g.node_count()
        )));
    }
    if let Some(w) = node_weights.iter().find(|w| !w.is_finite()) {
        return Err(GbsError::validation(format!("non-finite node weight {w}")));
    }
    let omega: Vec<f64> = node_weights.iter().map(|w| 1.0 + alpha * w).collect();
    AdjacencyKernel::new(rescaled(g, &omega))?.with_node_weights(node_weights.to_vec())
}

/// `D^(-1/2) (D - A) D^(-1/2)`, the normalised Laplacian; isolated nodes
/// get `Omega_ii = 0`.
pub fn normalized_laplacian(g: &Graph) -> Result<AdjacencyKernel> {
    let omega: Vec<f64> = (0..g.node_count())
        .map(|u| {
            let d = g.degree(u);
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    AdjacencyKernel::new(rescaled(g, &omega))
}

fn rescaled(g: &Graph, omega: &[f64]) -> RMat {
    let a = g.adjacency();
    let n = g.node_count();
    RMat::from_fn(n, n, |i, j| {
        let lap = if i == j { g.degree(i) } else { -a[(i, j)] };
        omega[i] * lap * omega[j]
    })
}
