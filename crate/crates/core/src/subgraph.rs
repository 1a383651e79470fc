//! Dense subgraph identification by degree-based resizing of seed
//! subgraphs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GbsError, Result};
use crate::graph::Graph;

/// `2|E| / (k (k - 1))` for the induced subgraph, counting edges without
/// weights.
pub fn density(g: &Graph, nodes: &[usize]) -> Result<f64> {
    g.check_nodes(nodes)?;
    let k = nodes.len();
    if k < 2 {
        return Err(GbsError::validation("density needs at least two nodes"));
    }
    Ok(2.0 * g.edge_count(nodes) as f64 / (k * (k - 1)) as f64)
}

/// Picks uniformly among the indices whose score is extremal.
fn pick_extremal(scores: &[f64], lowest: bool, rng: &mut ChaCha8Rng) -> usize {
    let best = if lowest {
        scores.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        scores.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let ties: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == best).collect();
    *ties.choose(rng).expect("non-empty candidate list")
}

fn resize_with(
    nodes: &[usize],
    g: &Graph,
    min_size: usize,
    max_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BTreeMap<usize, Vec<usize>>> {
    let n = g.node_count();
    if nodes.is_empty() {
        return Err(GbsError::validation("cannot resize an empty subgraph"));
    }
    if min_size < 1 || min_size > max_size || max_size > n {
        return Err(GbsError::validation(format!(
            "size range [{min_size}, {max_size}] invalid for {n} nodes"
        )));
    }
    g.check_nodes(nodes)?;
    let mut start: Vec<usize> = nodes.to_vec();
    start.sort_unstable();
    let mut out = BTreeMap::new();
    let record = |set: &[usize], out: &mut BTreeMap<usize, Vec<usize>>| {
        if (min_size..=max_size).contains(&set.len()) {
            let mut s = set.to_vec();
            s.sort_unstable();
            out.insert(s.len(), s);
        }
    };
    record(&start, &mut out);

    let mut current = start.clone();
    while current.len() > min_size {
        let scores: Vec<f64> = current.iter().map(|&u| g.degree_into(u, &current)).collect();
        let drop = pick_extremal(&scores, true, rng);
        current.remove(drop);
        record(&current, &mut out);
    }

    let mut current = start;
    while current.len() < max_size {
        let outside: Vec<usize> = (0..n).filter(|u| current.binary_search(u).is_err()).collect();
        let scores: Vec<f64> = outside.iter().map(|&u| g.degree_into(u, &current)).collect();
        let add = outside[pick_extremal(&scores, false, rng)];
        let pos = current.binary_search(&add).unwrap_err();
        current.insert(pos, add);
        record(&current, &mut out);
    }
    Ok(out)
}

/// Shrinks the seed by removing lowest-degree nodes down to `min_size`
/// and grows it by adding highest-degree nodes up to `max_size`, degrees
/// taken relative to the current subgraph. Returns the set reached at
/// every size in the range.
pub fn resize(nodes: &[usize], g: &Graph, min_size: usize, max_size: usize, seed: u64) -> Result<BTreeMap<usize, Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    resize_with(nodes, g, min_size, max_size, &mut rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    pub density: f64,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DenseSubgraphResult {
    pub by_size: BTreeMap<usize, Vec<Ranked>>,
}

impl DenseSubgraphResult {
    pub fn best(&self, size: usize) -> Option<&Ranked> {
        self.by_size.get(&size).and_then(|v| v.first())
    }
}

/// Resizes every seed over `[k_min, k_max]` and keeps the `max_results`
/// densest distinct subgraphs of each size. Seed `i` uses tie-break stream
/// `i` of `seed`. Empty seeds are skipped.
pub fn search(
    subgraphs: &[Vec<usize>],
    g: &Graph,
    k_min: usize,
    k_max: usize,
    max_results: usize,
    seed: u64,
) -> Result<DenseSubgraphResult> {
    let seeds: Vec<(usize, &Vec<usize>)> = subgraphs.iter().enumerate().filter(|(_, s)| !s.is_empty()).collect();
    if seeds.is_empty() {
        return Err(GbsError::validation("search needs at least one non-empty seed subgraph"));
    }
    let resized: Vec<BTreeMap<usize, Vec<usize>>> = seeds
        .par_iter()
        .map(|&(i, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            resize_with(s, g, k_min, k_max, &mut rng)
        })
        .collect::<Result<_>>()?;

    let mut found: BTreeMap<usize, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for map in resized {
        for (size, nodes) in map {
            found.entry(size).or_default().insert(nodes);
        }
    }
    let mut result = DenseSubgraphResult::default();
    for (size, sets) in found {
        let mut ranked: Vec<Ranked> = sets
            .into_iter()
            .map(|nodes| Ranked { density: if size < 2 { 0.0 } else { density(g, &nodes).unwrap() }, nodes })
            .collect();
        ranked.sort_by(|a, b| b.density.total_cmp(&a.density).then_with(|| a.nodes.cmp(&b.nodes)));
        ranked.truncate(max_results);
        result.by_size.insert(size, ranked);
    }
    Ok(result)
}
