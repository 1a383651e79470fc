//! Exact output probabilities and sampling of photon patterns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GbsError, Result};
use crate::gaussian::{self, AdjacencyKernel, GaussianState};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, C64};
use crate::matfuncs::{self, PhotonPattern};

/// Output distribution of one state, with the pattern-independent work
/// done once.
pub struct PatternProbability {
    a: CMat,
    loops: Option<CVec>,
    prefactor: f64,
    /// Pure states have block-diagonal `A`, so every loop hafnian splits
    /// into one per block.
    pure: bool,
}

fn prepare(state: &GaussianState) -> Result<PatternProbability> {
    let q = state.q_matrix();
    let qinv = linalg::inverse(&q).map_err(|_| {
        GbsError::numerical(format!("Q is singular (condition ~ {:e})", linalg::condition_estimate(&q)))
    })?;
    let root = matfuncs::positive_sqrt(linalg::det(&q), "det(Q)")?;
    let dim = q.nrows();
    let a = gaussian::x_matrix(dim / 2) * (CMat::identity(dim, dim) - &qinv);
    let m = dim / 2;
    let pure = linalg::max_abs(&a.view((0, m), (m, m)).into_owned()) <= 1e-13 * (1.0 + linalg::max_abs(&a));
    if !state.has_mean() {
        return Ok(PatternProbability { a, loops: None, prefactor: 1.0 / root, pure });
    }
    let mean = state.mean();
    let gamma = (&qinv * mean).map(|z| z.conj());
    let quad = (mean.adjoint() * &qinv * mean)[(0, 0)];
    let prefactor = (-0.5 * quad.re).exp() / root;
    Ok(PatternProbability { a, loops: Some(gamma), prefactor, pure })
}

impl PatternProbability {
    pub fn new(state: &GaussianState) -> Result<Self> {
        prepare(state)
    }

    pub fn modes(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn probability(&self, pattern: &PhotonPattern) -> Result<f64> {
        let idx = matfuncs::doubled_indices(self.a.nrows(), pattern)?;
        let val = if self.pure {
            let m = self.modes();
            let top: Vec<usize> = idx.iter().copied().filter(|&i| i < m).collect();
            let bottom: Vec<usize> = idx.iter().copied().filter(|&i| i >= m).collect();
            self.block_hafnian(&top, pattern, 0) * self.block_hafnian(&bottom, pattern, m)
        } else {
            let repeated_terms: f64 = pattern.counts.iter().map(|&s| ((s + 1) * (s + 1)) as f64).product();
            if repeated_terms <= 2f64.powi(pattern.total() as i32) {
                let reps: Vec<usize> = pattern.counts.iter().chain(pattern.counts.iter()).copied().collect();
                let loops = self.loops.as_ref().map(|g| g.as_slice());
                matfuncs::loop_hafnian_repeated(&self.a, loops, &reps)
            } else {
                self.subset_hafnian(&idx)
            }
        };
        matfuncs::real_part_checked(val * (self.prefactor / pattern.factorial_product()), "pattern probability")
    }

    /// Loop hafnian of one diagonal block, rows `offset..offset + m`.
    fn block_hafnian(&self, idx: &[usize], pattern: &PhotonPattern, offset: usize) -> C64 {
        let repeated_terms: f64 = pattern.counts.iter().map(|&s| (s + 1) as f64).product();
        if repeated_terms > 2f64.powf(pattern.total() as f64 / 2.0) {
            return self.subset_hafnian(idx);
        }
        let m = self.modes();
        let block = self.a.view((offset, offset), (m, m)).into_owned();
        let loops: Option<Vec<C64>> = self.loops.as_ref().map(|g| g.rows(offset, m).iter().copied().collect());
        matfuncs::loop_hafnian_repeated(&block, loops.as_deref(), &pattern.counts)
    }

    fn subset_hafnian(&self, idx: &[usize]) -> C64 {
        let sub = CMat::from_fn(idx.len(), idx.len(), |r, s| self.a[(idx[r], idx[s])]);
        match &self.loops {
            None => matfuncs::hafnian(&sub),
            Some(g) => {
                let loops: Vec<C64> = idx.iter().map(|&i| g[i]).collect();
                matfuncs::loop_hafnian_with(&sub, &loops)
            }
        }
    }
}

/// Probability of a photon-number pattern.
pub fn probability(state: &GaussianState, pattern: &PhotonPattern) -> Result<f64> {
    check_modes(state, pattern)?;
    prepare(state)?.probability(pattern)
}

/// Pure zero-mean states: `|Haf(B_S)|^2 / (S! sqrt(det Q))`.
pub fn probability_pure(state: &GaussianState, pattern: &PhotonPattern) -> Result<f64> {
    check_modes(state, pattern)?;
    if state.has_mean() {
        return Err(GbsError::Unsupported("pure fast path needs a zero-mean state".into()));
    }
    let (b, _) = state.pure_amplitudes()?;
    let root = matfuncs::positive_sqrt(linalg::det(&state.q_matrix()), "det(Q)")?;
    let sub = matfuncs::reduce_single(&b, pattern)?;
    Ok(matfuncs::hafnian(&sub).norm_sqr() / (pattern.factorial_product() * root))
}

/// Click-pattern probability for threshold detectors.
pub fn probability_threshold(state: &GaussianState, clicks: &PhotonPattern) -> Result<f64> {
    check_modes(state, clicks)?;
    if state.has_mean() {
        return Err(GbsError::Unsupported("threshold probabilities of displaced states".into()));
    }
    if !clicks.is_binary() {
        return Err(GbsError::validation("click pattern must contain only 0 and 1"));
    }
    let q = state.q_matrix();
    let dim = q.nrows();
    let o = CMat::identity(dim, dim) - linalg::inverse(&q)?;
    let tor = matfuncs::torontonian(&matfuncs::reduce_doubled(&o, clicks)?)?;
    let root = matfuncs::positive_sqrt(linalg::det(&q), "det(Q)")?;
    matfuncs::real_part_checked(tor, "torontonian").map(|t| t / root)
}

fn check_modes(state: &GaussianState, pattern: &PhotonPattern) -> Result<()> {
    if pattern.modes() != state.modes() {
        return Err(GbsError::validation(format!(
            "pattern has {} modes, state has {}",
            pattern.modes(),
            state.modes()
        )));
    }
    Ok(())
}

/// Every pattern with at most `max_total` photons in total, in
/// lexicographic order.
pub fn patterns_up_to(modes: usize, max_total: usize) -> Vec<PhotonPattern> {
    fn rec(prefix: &mut Vec<usize>, modes: usize, left: usize, out: &mut Vec<PhotonPattern>) {
        if prefix.len() == modes {
            out.push(PhotonPattern::new(prefix.clone()));
            return;
        }
        for s in 0..=left {
            prefix.push(s);
            rec(prefix, modes, left - s, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(modes), modes, max_total, &mut out);
    out
}

/// Exact probabilities of every pattern with at most `max_total` photons.
pub fn enumerate_distribution(state: &GaussianState, max_total: usize) -> Result<Vec<(PhotonPattern, f64)>> {
    let prep = prepare(state)?;
    patterns_up_to(state.modes(), max_total)
        .into_iter()
        .map(|p| prep.probability(&p).map(|v| (p, v)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Pnr,
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta {
    pub modes: usize,
    pub seed: u64,
    pub n_mean: f64,
    pub loss: f64,
    /// Largest per-mode cutoff the sampler was allowed to use.
    pub cutoff: usize,
    /// Conditionals whose mass beyond `cutoff` exceeded the tail tolerance.
    pub truncations: usize,
    /// Draws discarded for exceeding `max_photons`.
    pub rejections: usize,
    pub max_photons: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub detector: Detector,
    pub meta: BatchMeta,
    pub samples: Vec<PhotonPattern>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Default per-mode cutoff.
    pub cutoff: usize,
    /// Cutoff used when the conditional tail beyond `cutoff` is too heavy.
    pub max_cutoff: usize,
    pub tail_tol: f64,
    /// Draws with more photons are rejected and redrawn, which samples
    /// the distribution conditioned on at most this many photons.
    pub max_photons: Option<usize>,
    /// Redraw budget per sample before giving up.
    pub max_attempts: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { cutoff: 5, max_cutoff: 8, tail_tol: 1e-3, max_photons: None, max_attempts: 100_000 }
    }
}

/// Mode-by-mode sampler.
///
/// The state is written as a classical Gaussian mixture of displaced pure
/// states (Williamson decomposition `V = S diag(nu) S^T`, pure part
/// `S S^T`, noise `S (diag(nu) - I) S^T`). For one pure component every
/// mode is first given a heterodyne outcome `beta`, drawn from the
/// Husimi distribution. Mode `j` is then resolved in photon number
/// conditioned on the photon counts of modes `< j` and the heterodyne
/// outcomes of modes `> j`; conditioning on a heterodyne outcome leaves the
/// earlier modes in a pure state with a shifted loop vector, so each step
/// needs one loop hafnian of the photons detected so far.
pub struct ChainSampler {
    modes: usize,
    b: CMat,
    mean_xp: RVec,
    noise: Option<RMat>,
    het: RMat,
    config: SamplerConfig,
}

struct Draw {
    pattern: Vec<usize>,
    truncations: usize,
    rejected: bool,
}

impl ChainSampler {
    pub fn new(state: &GaussianState, config: SamplerConfig) -> Result<Self> {
        if config.cutoff == 0 || config.max_cutoff < config.cutoff {
            return Err(GbsError::validation("cutoffs must satisfy 1 <= cutoff <= max_cutoff"));
        }
        let m = state.modes();
        let (v, r) = state.to_xp();
        let (pure_cov, noise) = if state.is_pure() {
            (v, None)
        } else {
            let (s, nu) = linalg::williamson(&v)?;
            let excess = RMat::from_diagonal(&RVec::from_iterator(2 * m, (0..2 * m).map(|k| (nu[k % m] - 1.0).max(0.0))));
            let w = &s * excess * s.transpose();
            (&s * s.transpose(), Some(linalg::psd_factor(&w)))
        };
        let pure = GaussianState::from_xp(&pure_cov, &RVec::zeros(2 * m))?;
        let a = pure.a_matrix()?;
        let b = a.view((m, m), (m, m)).into_owned();
        let het = linalg::psd_factor(&(&pure_cov + RMat::identity(2 * m, 2 * m)));
        Ok(ChainSampler { modes: m, b, mean_xp: r, noise, het, config })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> RVec {
        RVec::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw> {
        let m = self.modes;
        let mut centre = self.mean_xp.clone();
        if let Some(f) = &self.noise {
            centre += f * Self::gaussian_vec(rng, 2 * m);
        }
        let amp = |v: &RVec, i: usize| C64::new(v[i], v[i + m]) * 0.5;
        let alpha = CVec::from_iterator(m, (0..m).map(|i| amp(&centre, i)));
        let gamma = &alpha - &self.b * alpha.map(|z| z.conj());
        let het = &centre + &self.het * Self::gaussian_vec(rng, 2 * m);
        let beta_conj = CVec::from_iterator(m, (0..m).map(|i| amp(&het, i).conj()));
        let mut d = gamma + &self.b * &beta_conj;

        let kmax = self.config.max_cutoff;
        let mut pattern = vec![0usize; m];
        let mut detected: Vec<usize> = Vec::new();
        let mut truncations = 0;
        for j in 0..m {
            for i in 0..m {
                d[i] -= self.b[(i, j)] * beta_conj[j];
            }
            let k = detected.len();
            let edges = CMat::from_fn(k, k, |r, s| self.b[(detected[r], detected[s])]);
            let loops: Vec<C64> = detected.iter().map(|&i| d[i]).collect();
            let slope: Vec<C64> = detected.iter().map(|&i| self.b[(i, j)]).collect();
            let series = matfuncs::loop_hafnian_series(&edges, &loops, &slope, kmax);
            let own = exp_quadratic(d[j], self.b[(j, j)] * 0.5, kmax);
            let mut weights = vec![0.0; kmax + 1];
            for n in 0..=kmax {
                let cn: C64 = (0..=n).map(|i| own[i] * series[n - i]).sum();
                weights[n] = cn.norm_sqr() * matfuncs::factorial(n);
            }
            let total: f64 = weights.iter().sum();
            if !(total.is_finite() && total > 0.0) {
                return Err(GbsError::numerical(format!("conditional weights at mode {j} sum to {total}")));
            }
            let tail: f64 = weights[self.config.cutoff + 1..].iter().sum::<f64>() / total;
            let used = if tail > self.config.tail_tol { kmax } else { self.config.cutoff };
            if weights[kmax] / total > self.config.tail_tol {
                truncations += 1;
            }
            let s = draw_index(&weights[..=used], rng.gen::<f64>());
            pattern[j] = s;
            detected.extend(std::iter::repeat(j).take(s));
            if let Some(limit) = self.config.max_photons {
                if detected.len() > limit {
                    return Ok(Draw { pattern, truncations, rejected: true });
                }
            }
        }
        Ok(Draw { pattern, truncations, rejected: false })
    }

    /// One sample from the stream `index` of `seed`; also returns the
    /// number of truncated conditionals and rejected draws.
    pub fn sample_one(&self, seed: u64, index: u64) -> Result<(PhotonPattern, usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut truncations = 0;
        for attempt in 0..self.config.max_attempts {
            let draw = self.draw(&mut rng)?;
            truncations += draw.truncations;
            if !draw.rejected {
                return Ok((PhotonPattern::new(draw.pattern), truncations, attempt));
            }
        }
        Err(GbsError::Resource(format!(
            "no draw within {} photons after {} attempts",
            self.config.max_photons.unwrap_or(0),
            self.config.max_attempts
        )))
    }

    /// `n` samples, parallel over sample index; the result does not depend
    /// on the number of worker threads.
    pub fn sample_many(&self, n: usize, seed: u64) -> Result<(Vec<PhotonPattern>, usize, usize)> {
        let draws: Vec<(PhotonPattern, usize, usize)> =
            (0..n as u64).into_par_iter().map(|i| self.sample_one(seed, i)).collect::<Result<_>>()?;
        let truncations = draws.iter().map(|d| d.1).sum();
        let rejections = draws.iter().map(|d| d.2).sum();
        Ok((draws.into_iter().map(|d| d.0).collect(), truncations, rejections))
    }
}

/// Taylor coefficients of `exp(g1 y + g2 y^2)` up to `y^k`.
fn exp_quadratic(g1: C64, g2: C64, k: usize) -> Vec<C64> {
    let mut e = vec![c(0.0); k + 1];
    e[0] = c(1.0);
    for n in 1..=k {
        let mut acc = g1 * e[n - 1];
        if n >= 2 {
            acc += g2 * e[n - 2] * 2.0;
        }
        e[n] = acc / n as f64;
    }
    e
}

/// Inverse-CDF draw from unnormalised weights with one uniform.
fn draw_index(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Samples a Gaussian state directly.
pub fn sample_state(
    state: &GaussianState,
    n_samples: usize,
    detector: Detector,
    config: SamplerConfig,
    seed: u64,
) -> Result<SampleBatch> {
    if n_samples == 0 {
        return Err(GbsError::validation("n_samples must be at least 1"));
    }
    let sampler = ChainSampler::new(state, config)?;
    let (mut samples, truncations, rejections) = sampler.sample_many(n_samples, seed)?;
    if detector == Detector::Threshold {
        samples = samples.iter().map(PhotonPattern::clipped).collect();
    }
    Ok(SampleBatch {
        detector,
        meta: BatchMeta {
            modes: state.modes(),
            seed,
            n_mean: state.mean_photon(),
            loss: 0.0,
            cutoff: sampler.config.max_cutoff,
            truncations,
            rejections,
            max_photons: sampler.config.max_photons,
        },
        samples,
    })
}

/// Encodes `a` at mean photon number `n_mean`, applies uniform loss and
/// samples.
pub fn sample(
    a: &AdjacencyKernel,
    n_mean: f64,
    n_samples: usize,
    threshold: bool,
    loss: f64,
    seed: u64,
    config: SamplerConfig,
) -> Result<SampleBatch> {
    let dev = gaussian::encode(a, n_mean)?;
    let state = gaussian::state_from_device(&dev).apply_loss(loss)?;
    let detector = if threshold { Detector::Threshold } else { Detector::Pnr };
    let mut batch = sample_state(&state, n_samples, detector, config, seed)?;
    batch.meta.n_mean = n_mean;
    batch.meta.loss = loss;
    Ok(batch)
}

/// Keeps samples with `n_min <= total <= n_max`, preserving order.
pub fn postselect(batch: &SampleBatch, n_min: usize, n_max: usize) -> Result<SampleBatch> {
    if n_min > n_max {
        return Err(GbsError::validation(format!("empty photon range [{n_min}, {n_max}]")));
    }
    let samples = batch
        .samples
        .iter()
        .filter(|s| (n_min..=n_max).contains(&s.total()))
        .cloned()
        .collect();
    Ok(SampleBatch { detector: batch.detector, meta: batch.meta.clone(), samples })
}

/// Node sets of the samples: the modes with at least one photon.
pub fn to_subgraphs(batch: &SampleBatch, node_count: usize) -> Result<Vec<Vec<usize>>> {
    if batch.meta.modes != node_count {
        return Err(GbsError::validation(format!(
            "samples have {} modes, graph has {} nodes",
            batch.meta.modes, node_count
        )));
    }
    Ok(batch.samples.iter().map(support).collect())
}

pub fn support(p: &PhotonPattern) -> Vec<usize> {
    p.counts.iter().enumerate().filter(|(_, &s)| s > 0).map(|(i, _)| i).collect()
}
