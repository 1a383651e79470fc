//! Coarse-grained photon statistics as graph features: orbits, events,
//! and their probabilities estimated from samples, computed exactly, or
//! estimated by Monte Carlo over uniformly drawn event members.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GbsError, Result};
use crate::gaussian::{self, AdjacencyKernel};
use crate::matfuncs::PhotonPattern;
use crate::sampler::{PatternProbability, SampleBatch};

const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Sorted non-increasing photon counts with zeros removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Orbit {
    pub parts: Vec<usize>,
}

impl Orbit {
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Orbit { parts }
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }
}

pub fn sample_to_orbit(s: &PhotonPattern) -> Orbit {
    Orbit::new(s.counts.clone())
}

/// `E_{k,n}`: patterns over `modes` modes with `k` photons and at most
/// `n_max` in any mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub k: usize,
    pub n_max: usize,
    pub modes: usize,
}

impl Event {
    pub fn new(k: usize, n_max: usize, modes: usize) -> Result<Self> {
        if n_max < 1 || modes < 1 {
            return Err(GbsError::validation("events need n_max >= 1 and at least one mode"));
        }
        Ok(Event { k, n_max, modes })
    }
}

pub fn in_event(s: &PhotonPattern, e: &Event) -> bool {
    s.total() == e.k && s.max_count() <= e.n_max
}

/// `ways[i][t]`: number of ways modes `i..m` can hold `t` photons.
fn ways_table<T: Clone + Zero + One + for<'a> std::ops::AddAssign<&'a T>>(e: &Event) -> Vec<Vec<T>> {
    let mut ways = vec![vec![T::zero(); e.k + 1]; e.modes + 1];
    ways[e.modes][0] = T::one();
    for i in (0..e.modes).rev() {
        for t in 0..=e.k {
            let mut acc = T::zero();
            for s in 0..=e.n_max.min(t) {
                acc += &ways[i + 1][t - s];
            }
            ways[i][t] = acc;
        }
    }
    ways
}

pub fn event_cardinality(e: &Event) -> BigUint {
    ways_table::<BigUint>(e)[0][e.k].clone()
}

/// Number of distinct patterns over `modes` modes in the orbit.
pub fn orbit_cardinality(o: &Orbit, modes: usize) -> BigUint {
    let len = o.parts.len();
    if len > modes {
        return BigUint::zero();
    }
    let mut out: BigUint = ((modes - len + 1)..=modes).map(BigUint::from).product();
    let mut i = 0;
    while i < len {
        let mut j = i;
        while j < len && o.parts[j] == o.parts[i] {
            j += 1;
        }
        let fact: BigUint = (1..=(j - i)).map(BigUint::from).product();
        out /= fact;
        i = j;
    }
    out
}

/// Uniform draws from an event by sequential choice weighted with the
/// number of completions.
pub struct EventSampler {
    event: Event,
    ways: Vec<Vec<f64>>,
}

impl EventSampler {
    pub fn new(event: Event) -> Result<Self> {
        let ways = ways_table::<F64Count>(&event).into_iter().map(|r| r.into_iter().map(|c| c.0).collect()).collect();
        let s = EventSampler { event, ways };
        if s.ways[0][event.k] == 0.0 {
            return Err(GbsError::validation(format!("event E_{{{},{}}} over {} modes is empty", event.k, event.n_max, event.modes)));
        }
        Ok(s)
    }

    pub fn draw(&self, rng: &mut impl Rng) -> PhotonPattern {
        let e = &self.event;
        let mut left = e.k;
        let mut counts = vec![0; e.modes];
        for i in 0..e.modes {
            let options = e.n_max.min(left);
            let total = self.ways[i][left];
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = options;
            for s in 0..=options {
                let w = self.ways[i + 1][left - s];
                if u < w {
                    chosen = s;
                    break;
                }
                u -= w;
            }
            while self.ways[i + 1][left - chosen] == 0.0 {
                chosen -= 1;
            }
            counts[i] = chosen;
            left -= chosen;
        }
        PhotonPattern::new(counts)
    }
}

#[derive(Clone)]
struct F64Count(f64);

impl Zero for F64Count {
    fn zero() -> Self {
        F64Count(0.0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
}

impl One for F64Count {
    fn one() -> Self {
        F64Count(1.0)
    }
}

impl std::ops::Add for F64Count {
    type Output = F64Count;
    fn add(self, o: F64Count) -> F64Count {
        F64Count(self.0 + o.0)
    }
}

impl std::ops::Mul for F64Count {
    type Output = F64Count;
    fn mul(self, o: F64Count) -> F64Count {
        F64Count(self.0 * o.0)
    }
}

impl<'a> std::ops::AddAssign<&'a F64Count> for F64Count {
    fn add_assign(&mut self, o: &'a F64Count) {
        self.0 += o.0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub ks: Vec<usize>,
    pub n_max: usize,
    pub values: Vec<f64>,
    /// Samples (or Monte Carlo draws per event) behind the estimate; zero
    /// for exact values.
    pub n_samples: usize,
}

impl FeatureVector {
    pub fn normalized(&self) -> FeatureVector {
        let norm = self.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let values = if norm > 0.0 { self.values.iter().map(|v| v / norm).collect() } else { self.values.clone() };
        FeatureVector { values, ..self.clone() }
    }
}

pub fn inner_product(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    check_compatible(a, b)?;
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum())
}

pub fn euclidean_distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    check_compatible(a, b)?;
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
}

fn check_compatible(a: &FeatureVector, b: &FeatureVector) -> Result<()> {
    if a.ks != b.ks || a.n_max != b.n_max {
        return Err(GbsError::validation("feature vectors are built from different events"));
    }
    Ok(())
}

/// `N_i / N` for each event `E_{k_i, n_max}`.
pub fn feature_vector_sampling(batch: &SampleBatch, ks: &[usize], n_max: usize) -> Result<FeatureVector> {
    if batch.samples.is_empty() {
        return Err(GbsError::validation("feature vector of an empty batch"));
    }
    let mut counts = vec![0usize; ks.len()];
    for s in &batch.samples {
        if s.max_count() > n_max {
            continue;
        }
        let k = s.total();
        for (c, _) in counts.iter_mut().zip(ks).filter(|(_, &ki)| ki == k) {
            *c += 1;
        }
    }
    let n = batch.samples.len();
    Ok(FeatureVector {
        ks: ks.to_vec(),
        n_max,
        values: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        n_samples: n,
    })
}

fn state_probability(a: &AdjacencyKernel, n_mean: f64) -> Result<PatternProbability> {
    PatternProbability::new(&gaussian::state_from_device(&gaussian::encode(a, n_mean)?))
}

fn event_members(e: &Event) -> Vec<PhotonPattern> {
    fn rec(prefix: &mut Vec<usize>, e: &Event, left: usize, out: &mut Vec<PhotonPattern>) {
        if prefix.len() == e.modes {
            if left == 0 {
                out.push(PhotonPattern::new(prefix.clone()));
            }
            return;
        }
        let rest = e.modes - prefix.len() - 1;
        for s in 0..=e.n_max.min(left) {
            if left - s <= rest * e.n_max {
                prefix.push(s);
                rec(prefix, e, left - s, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(e.modes), e, e.k, &mut out);
    out
}

fn guard(count: &BigUint) -> Result<()> {
    if count.to_u64().map_or(true, |c| c > ENUMERATION_LIMIT) {
        return Err(GbsError::Resource(format!("{count} patterns exceed the enumeration limit of {ENUMERATION_LIMIT}")));
    }
    Ok(())
}

/// Exact event probability by summing every member's probability.
pub fn event_probability_exact(a: &AdjacencyKernel, n_mean: f64, e: &Event) -> Result<f64> {
    check_event_modes(a, e)?;
    guard(&event_cardinality(e))?;
    let prob = state_probability(a, n_mean)?;
    event_members(e).par_iter().map(|p| prob.probability(p)).collect::<Result<Vec<f64>>>().map(|v| v.iter().sum())
}

fn check_event_modes(a: &AdjacencyKernel, e: &Event) -> Result<()> {
    if e.modes != a.size() {
        return Err(GbsError::validation(format!("event over {} modes for a {}-node graph", e.modes, a.size())));
    }
    Ok(())
}

/// `|E| * mean_i Pr(S_i)` with `S_i` uniform over the event. Draw `j` of
/// event `i` uses stream `(i << 32) | j` of `seed`.
pub fn feature_vector_mc(
    a: &AdjacencyKernel,
    n_mean: f64,
    ks: &[usize],
    n_max: usize,
    n_mc: usize,
    seed: u64,
) -> Result<FeatureVector> {
    if n_mc == 0 {
        return Err(GbsError::validation("n_mc must be at least 1"));
    }
    let prob = state_probability(a, n_mean)?;
    let mut values = Vec::with_capacity(ks.len());
    for (ei, &k) in ks.iter().enumerate() {
        let e = Event::new(k, n_max, a.size())?;
        let size = event_cardinality(&e).to_f64().unwrap_or(f64::INFINITY);
        if size == 0.0 {
            values.push(0.0);
            continue;
        }
        let sampler = EventSampler::new(e)?;
        let sum: f64 = (0..n_mc as u64)
            .into_par_iter()
            .map(|j| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((ei as u64) << 32) | j);
                prob.probability(&sampler.draw(&mut rng))
            })
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum();
        values.push(size * sum / n_mc as f64);
    }
    Ok(FeatureVector { ks: ks.to_vec(), n_max, values, n_samples: n_mc })
}

fn orbit_members(o: &Orbit, modes: usize) -> Vec<PhotonPattern> {
    let mut padded = o.parts.clone();
    padded.resize(modes, 0);
    padded.sort_unstable();
    let mut out = vec![PhotonPattern::new(padded.clone())];
    while next_permutation(&mut padded) {
        out.push(PhotonPattern::new(padded.clone()));
    }
    out
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn orbit_probability_exact(a: &AdjacencyKernel, n_mean: f64, o: &Orbit) -> Result<f64> {
    let m = a.size();
    if o.parts.len() > m {
        return Ok(0.0);
    }
    guard(&orbit_cardinality(o, m))?;
    let prob = state_probability(a, n_mean)?;
    orbit_members(o, m).par_iter().map(|p| prob.probability(p)).collect::<Result<Vec<f64>>>().map(|v| v.iter().sum())
}

/// Monte Carlo orbit probability; members are uniform random placements
/// of the orbit's parts.
pub fn orbit_probability_mc(a: &AdjacencyKernel, n_mean: f64, o: &Orbit, n_mc: usize, seed: u64) -> Result<f64> {
    if n_mc == 0 {
        return Err(GbsError::validation("n_mc must be at least 1"));
    }
    let m = a.size();
    if o.parts.len() > m {
        return Ok(0.0);
    }
    let size = orbit_cardinality(o, m).to_f64().unwrap_or(f64::INFINITY);
    let prob = state_probability(a, n_mean)?;
    let mut padded = o.parts.clone();
    padded.resize(m, 0);
    let sum: f64 = (0..n_mc as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j);
            let mut p = padded.clone();
            p.shuffle(&mut rng);
            prob.probability(&PhotonPattern::new(p))
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    Ok(size * sum / n_mc as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::erdos_renyi;
    use crate::linalg::RMat;
    use crate::sampler::{BatchMeta, Detector};
    use proptest::prelude::*;

    fn pat(v: &[usize]) -> PhotonPattern {
        PhotonPattern::new(v.to_vec())
    }

    fn batch(samples: Vec<PhotonPattern>) -> SampleBatch {
        let modes = samples[0].modes();
        SampleBatch {
            detector: Detector::Pnr,
            meta: BatchMeta {
                modes,
                seed: 0,
                n_mean: 0.0,
                loss: 0.0,
                cutoff: 8,
                truncations: 0,
                rejections: 0,
                max_photons: None,
            },
            samples,
        }
    }

    fn fig6_samples() -> Vec<PhotonPattern> {
        vec![
            pat(&[1, 1, 1, 1, 0, 0]),
            pat(&[0, 1, 1, 1, 1, 0]),
            pat(&[1, 0, 1, 0, 1, 1]),
            pat(&[0, 1, 0, 1, 1, 1]),
            pat(&[2, 1, 1, 0, 0, 0]),
            pat(&[0, 0, 1, 2, 0, 1]),
            pat(&[0, 2, 0, 0, 2, 0]),
            pat(&[0, 0, 0, 3, 0, 1]),
        ]
    }

    #[test]
    fn orbits() {
        assert_eq!(sample_to_orbit(&pat(&[0, 2, 3, 0, 0, 0, 1, 2, 0])).parts, vec![3, 2, 2, 1]);
        assert!(sample_to_orbit(&pat(&[0, 0])).parts.is_empty());
        assert_eq!(sample_to_orbit(&pat(&[1, 1, 2])).parts, vec![2, 1, 1]);
        let orbits: std::collections::BTreeSet<Orbit> = fig6_samples().iter().map(sample_to_orbit).collect();
        assert_eq!(orbits.len(), 4);
    }

    #[test]
    fn events() {
        let s = pat(&[0, 2, 3, 0, 0, 0, 1, 2, 0]);
        assert!(in_event(&s, &Event::new(8, 3, 9).unwrap()));
        assert!(!in_event(&s, &Event::new(8, 2, 9).unwrap()));
        assert!(in_event(&pat(&[0, 0, 0]), &Event::new(0, 1, 3).unwrap()));
        let e42 = Event::new(4, 2, 6).unwrap();
        assert_eq!(fig6_samples().iter().filter(|s| in_event(s, &e42)).count(), 7);
        assert!(Event::new(2, 0, 3).is_err());
    }

    #[test]
    fn cardinalities() {
        assert_eq!(event_cardinality(&Event::new(2, 1, 2).unwrap()), BigUint::from(1u32));
        assert_eq!(event_cardinality(&Event::new(2, 2, 3).unwrap()), BigUint::from(6u32));
        // stars and bars: C(10 + 5 - 1, 4) = 1001
        assert_eq!(event_cardinality(&Event::new(10, 10, 5).unwrap()), BigUint::from(1001u32));
        let huge = event_cardinality(&Event::new(200, 200, 100).unwrap());
        assert!(huge.bits() > 64);
        assert_eq!(orbit_cardinality(&Orbit::new(vec![2, 1, 1]), 4), BigUint::from(12u32));
        assert_eq!(orbit_cardinality(&Orbit::new(vec![1, 1, 1, 1, 1]), 4), BigUint::zero());
        let e = Event::new(5, 2, 4).unwrap();
        assert_eq!(event_members(&e).len() as u64, event_cardinality(&e).to_u64().unwrap());
        assert_eq!(orbit_members(&Orbit::new(vec![2, 1, 1]), 4).len(), 12);
    }

    #[test]
    fn sampled_features() {
        let fv = feature_vector_sampling(&batch(fig6_samples()), &[4], 2).unwrap();
        assert_eq!(fv.values, vec![7.0 / 8.0]);
        let all_in = batch(vec![pat(&[1, 1, 2]), pat(&[2, 2, 0])]);
        assert_eq!(feature_vector_sampling(&all_in, &[4], 2).unwrap().values, vec![1.0]);
        let mixed = batch(vec![pat(&[0, 0, 0]), pat(&[1, 1, 0]), pat(&[5, 0, 1]), pat(&[2, 0, 0])]);
        let fv = feature_vector_sampling(&mixed, &(0..=6).collect::<Vec<_>>(), usize::MAX).unwrap();
        assert!((fv.values.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let mut empty = mixed.clone();
        empty.samples.clear();
        assert!(feature_vector_sampling(&empty, &[2], 2).is_err());
    }

    #[test]
    fn kernels() {
        let a = FeatureVector { ks: vec![2, 4], n_max: 2, values: vec![3.0, 4.0], n_samples: 1 };
        let b = FeatureVector { ks: vec![2, 4], n_max: 2, values: vec![0.0, 1.0], n_samples: 1 };
        assert_eq!(inner_product(&a, &b).unwrap(), 4.0);
        assert!((euclidean_distance(&a, &b).unwrap() - 18f64.sqrt()).abs() < 1e-15);
        assert_eq!(a.normalized().values, vec![0.6, 0.8]);
        let c = FeatureVector { ks: vec![2], ..b };
        assert!(inner_product(&a, &c).is_err());
    }

    fn kernel_of(seed: u64, n: usize) -> AdjacencyKernel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        erdos_renyi(n, 0.5, &mut rng).kernel().clone()
    }

    #[test]
    fn exact_event_probabilities() {
        let a = kernel_of(1, 5);
        let st = gaussian::state_from_device(&gaussian::encode(&a, 1.0).unwrap());
        let vac = 1.0 / crate::linalg::det(&st.q_matrix()).re.sqrt();
        let e0 = event_probability_exact(&a, 1.0, &Event::new(0, 2, 5).unwrap()).unwrap();
        assert!((e0 - vac).abs() < 1e-12);
        assert!(event_probability_exact(&a, 1.0, &Event::new(3, 2, 5).unwrap()).unwrap().abs() < 1e-14);
        assert!(event_probability_exact(&a, 1.0, &Event::new(2, 2, 4).unwrap()).is_err());
        let big = Event::new(30, 30, 30).unwrap();
        assert!(matches!(event_probability_exact(&kernel_of(1, 30), 1.0, &big), Err(GbsError::Resource(_))));
    }

    #[test]
    fn isomorphic_graphs_have_equal_event_probabilities() {
        let a = kernel_of(2, 6);
        let perm = [3, 0, 5, 1, 4, 2];
        let b = AdjacencyKernel::new(RMat::from_fn(6, 6, |i, j| a.entries()[(perm[i], perm[j])])).unwrap();
        for e in [Event::new(2, 1, 6).unwrap(), Event::new(4, 2, 6).unwrap(), Event::new(6, 2, 6).unwrap()] {
            let pa = event_probability_exact(&a, 2.0, &e).unwrap();
            let pb = event_probability_exact(&b, 2.0, &e).unwrap();
            assert!((pa - pb).abs() < 1e-10);
        }
        let o = Orbit::new(vec![2, 1, 1]);
        let oa = orbit_probability_exact(&a, 2.0, &o).unwrap();
        assert!((oa - orbit_probability_exact(&b, 2.0, &o).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn single_member_event_is_exact() {
        let a = AdjacencyKernel::new(RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let e = Event::new(2, 1, 2).unwrap();
        let exact = event_probability_exact(&a, 1.0, &e).unwrap();
        let mc = feature_vector_mc(&a, 1.0, &[2], 1, 3, 0).unwrap();
        assert!((mc.values[0] - exact).abs() < 1e-15);
    }

    #[test]
    fn event_sampler_is_uniform() {
        let e = Event::new(4, 2, 4).unwrap();
        let members = event_members(&e);
        assert!(members.len() <= 50);
        let sampler = EventSampler::new(e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            *counts.entry(sampler.draw(&mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), members.len());
        let expected = n as f64 / members.len() as f64;
        let chi2: f64 = members.iter().map(|m| (counts[m] as f64 - expected).powi(2) / expected).sum();
        let dof = (members.len() - 1) as f64;
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let crit = ChiSquared::new(dof).unwrap().inverse_cdf(0.99);
        assert!(chi2 < crit, "chi2 {chi2} crit {crit}");
    }

    #[test]
    fn orbit_mc_tracks_exact() {
        let a = kernel_of(5, 5);
        let o = Orbit::new(vec![2, 1, 1]);
        let exact = orbit_probability_exact(&a, 2.0, &o).unwrap();
        let mc = orbit_probability_mc(&a, 2.0, &o, 20_000, 1).unwrap();
        assert!((mc - exact).abs() < 0.05 * exact);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn classification_is_permutation_invariant(counts in proptest::collection::vec(0usize..4, 1..8), seed in 0u64..100, k in 0usize..12, n in 1usize..4) {
            let s = PhotonPattern::new(counts.clone());
            let mut shuffled = counts;
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let t = PhotonPattern::new(shuffled);
            prop_assert_eq!(sample_to_orbit(&s), sample_to_orbit(&t));
            let e = Event::new(k, n, s.modes()).unwrap();
            prop_assert_eq!(in_event(&s, &e), in_event(&t, &e));
        }

        #[test]
        fn dp_matches_enumeration(k in 0usize..9, n in 1usize..4, m in 1usize..6) {
            let e = Event::new(k, n, m).unwrap();
            prop_assert_eq!(event_cardinality(&e).to_u64().unwrap(), event_members(&e).len() as u64);
        }
    }
}
