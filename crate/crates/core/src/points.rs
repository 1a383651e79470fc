//! Point processes over a set of points in space: RBF kernels, the hafnian
//! process through the boson sampler and a classical permanental sampler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GbsError, Result};
use crate::gaussian::AdjacencyKernel;
use crate::linalg::{self, RMat};
use crate::matfuncs::PhotonPattern;
use crate::sampler::{self, BatchMeta, Detector, SampleBatch, SamplerConfig};

/// Points in `R^n`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    coords: RMat,
}

impl StateSpace {
    pub fn new(coords: RMat) -> Result<Self> {
        if coords.nrows() == 0 {
            return Err(GbsError::validation("state space needs at least one point"));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(GbsError::validation("coordinates must be finite"));
        }
        Ok(StateSpace { coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(GbsError::validation("all points need the same dimension"));
        }
        Self::new(RMat::from_fn(rows.len(), dim, |i, j| rows[i][j]))
    }

    pub fn coords(&self) -> &RMat {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.coords.row(i).iter().copied().collect()
    }

    pub fn distance_sqr(&self, i: usize, j: usize) -> f64 {
        (self.coords.row(i) - self.coords.row(j)).norm_squared()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Rbf,
    RescaledRbf,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    entries: RMat,
    kind: KernelKind,
}

impl KernelMatrix {
    /// A user-supplied symmetric kernel.
    pub fn new(entries: RMat) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n || n == 0 {
            return Err(GbsError::validation(format!("kernel is {}x{}, not square", n, entries.ncols())));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(GbsError::validation("kernel entries must be finite"));
        }
        let scale = linalg::max_abs_real(&entries).max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-8 * scale {
                    return Err(GbsError::validation(format!("kernel is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(KernelMatrix { entries, kind: KernelKind::Custom })
    }

    pub fn entries(&self) -> &RMat {
        &self.entries
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn to_adjacency(&self) -> Result<AdjacencyKernel> {
        AdjacencyKernel::new(self.entries.clone())
    }
}

/// `K_ij = exp(-|r_i - r_j|^2 / 2 sigma^2)`.
pub fn rbf_kernel(space: &StateSpace, sigma: f64) -> Result<KernelMatrix> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(GbsError::validation(format!("sigma must be positive, got {sigma}")));
    }
    let m = space.len();
    let mut k = RMat::identity(m, m);
    for i in 0..m {
        for j in 0..i {
            let v = (-space.distance_sqr(i, j) / (2.0 * sigma * sigma)).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(KernelMatrix { entries: k, kind: KernelKind::Rbf })
}

/// RBF kernel with per-point weights, `K_ij = w_i w_j exp(...)`.
pub fn rescaled_kernel(space: &StateSpace, sigma: f64, weights: &[f64]) -> Result<KernelMatrix> {
    if weights.len() != space.len() {
        return Err(GbsError::validation(format!("{} weights for {} points", weights.len(), space.len())));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(GbsError::validation("weights must be finite and non-negative"));
    }
    let base = rbf_kernel(space, sigma)?;
    let m = space.len();
    let k = RMat::from_fn(m, m, |i, j| weights[i] * weights[j] * base.entries[(i, j)]);
    Ok(KernelMatrix { entries: k, kind: KernelKind::RescaledRbf })
}

/// Centres of the two clusters made by [`clustered_space`].
pub const CLUSTER_CENTRES: [[f64; 2]; 2] = [[2.0, 2.0], [4.0, 4.0]];

/// Two Gaussian clusters (standard deviation 0.3) of `per_cluster` points
/// around [`CLUSTER_CENTRES`], then `background` points uniform on
/// `[0, 6]^2`.
pub fn clustered_space(seed: u64, per_cluster: usize, background: usize) -> Result<StateSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for c in CLUSTER_CENTRES {
        for _ in 0..per_cluster {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            rows.push(vec![c[0] + 0.3 * x, c[1] + 0.3 * y]);
        }
    }
    for _ in 0..background {
        rows.push(vec![6.0 * rng.gen::<f64>(), 6.0 * rng.gen::<f64>()]);
    }
    StateSpace::from_rows(&rows)
}

/// A `rows x cols` square lattice with the given spacing.
pub fn lattice(rows: usize, cols: usize, spacing: f64) -> Result<StateSpace> {
    let pts: Vec<Vec<f64>> =
        (0..rows).flat_map(|i| (0..cols).map(move |j| vec![j as f64 * spacing, i as f64 * spacing])).collect();
    StateSpace::from_rows(&pts)
}

/// Hafnian point process: boson sampling with `K` as the adjacency matrix.
pub fn hafnian_sample(
    k: &KernelMatrix,
    n_mean: f64,
    n_samples: usize,
    seed: u64,
    config: SamplerConfig,
) -> Result<SampleBatch> {
    sampler::sample(&k.to_adjacency()?, n_mean, n_samples, false, 0.0, seed, config)
}

/// Classical sampler for the permanental point process
/// `P(S) = det(I - cK) c^k Per(K_S) / S!`, as a Poisson process whose
/// intensities come from a thermal state.
#[derive(Debug, Clone)]
pub struct PermanentalSampler {
    vecs: RMat,
    eigenvalues: Vec<f64>,
    /// Per-mode thermal occupation `c mu / (1 - c mu)`.
    occupations: Vec<f64>,
    c: f64,
    n_mean: f64,
}

fn occupation_sum(mu: &[f64], c: f64) -> f64 {
    mu.iter().map(|&u| c * u / (1.0 - c * u)).sum()
}

impl PermanentalSampler {
    pub fn new(k: &KernelMatrix, n_mean: f64) -> Result<Self> {
        if !(n_mean >= 0.0) || !n_mean.is_finite() {
            return Err(GbsError::validation(format!("mean photon number must be finite and >= 0, got {n_mean}")));
        }
        let (mut mu, vecs) = linalg::sym_eigen_desc(&k.entries);
        for u in mu.iter_mut() {
            if *u < -1e-8 {
                return Err(GbsError::validation(format!("kernel is not positive semidefinite (eigenvalue {u:e})")));
            }
            *u = u.max(0.0);
        }
        let top = mu[0];
        let c = if n_mean == 0.0 {
            0.0
        } else if top == 0.0 {
            return Err(GbsError::NoSolution("kernel is zero; no mean photon number is reachable".into()));
        } else {
            let (mut lo, mut hi) = (0.0, 1.0 / top);
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break lo;
                }
                if occupation_sum(&mu, mid) < n_mean {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        };
        let occupations = mu.iter().map(|&u| c * u / (1.0 - c * u)).collect();
        Ok(PermanentalSampler { vecs, eigenvalues: mu, occupations, c, n_mean })
    }

    pub fn modes(&self) -> usize {
        self.vecs.nrows()
    }

    pub fn rescale(&self) -> f64 {
        self.c
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_mean(&self) -> f64 {
        self.n_mean
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> PhotonPattern {
        let m = self.modes();
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        for j in 0..m {
            let s = (0.5 * self.occupations[j]).sqrt();
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            if s == 0.0 {
                continue;
            }
            for i in 0..m {
                let u = self.vecs[(i, j)];
                re[i] += u * s * x;
                im[i] += u * s * y;
            }
        }
        let counts = (0..m)
            .map(|i| {
                let rate = re[i] * re[i] + im[i] * im[i];
                if rate > 0.0 {
                    Poisson::new(rate).expect("positive finite rate").sample(rng) as usize
                } else {
                    0
                }
            })
            .collect();
        PhotonPattern::new(counts)
    }

    /// Sample `index` of the stream identified by `seed`.
    pub fn sample_one(&self, seed: u64, index: u64) -> PhotonPattern {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        self.draw(&mut rng)
    }

    /// A draw conditioned on exactly `size` points, by rejection. Returns
    /// the pattern and the number of rejected draws.
    pub fn sample_fixed(&self, size: usize, seed: u64, index: u64, max_attempts: usize) -> Result<(PhotonPattern, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        for attempt in 0..max_attempts {
            let p = self.draw(&mut rng);
            if p.total() == size {
                return Ok((p, attempt));
            }
        }
        Err(GbsError::Resource(format!("no draw with {size} points after {max_attempts} attempts")))
    }

    fn meta(&self, seed: u64, rejections: usize) -> BatchMeta {
        BatchMeta {
            modes: self.modes(),
            seed,
            n_mean: self.n_mean,
            loss: 0.0,
            cutoff: 0,
            truncations: 0,
            rejections,
            max_photons: None,
        }
    }

    pub fn sample_many(&self, n: usize, seed: u64) -> SampleBatch {
        let samples = (0..n as u64).into_par_iter().map(|i| self.sample_one(seed, i)).collect();
        SampleBatch { detector: Detector::Pnr, meta: self.meta(seed, 0), samples }
    }

    pub fn sample_many_fixed(&self, n: usize, size: usize, seed: u64, max_attempts: usize) -> Result<SampleBatch> {
        let draws: Vec<(PhotonPattern, usize)> = (0..n as u64)
            .into_par_iter()
            .map(|i| self.sample_fixed(size, seed, i, max_attempts))
            .collect::<Result<_>>()?;
        let rejections = draws.iter().map(|d| d.1).sum();
        Ok(SampleBatch {
            detector: Detector::Pnr,
            meta: self.meta(seed, rejections),
            samples: draws.into_iter().map(|d| d.0).collect(),
        })
    }
}

pub fn permanental_sample(k: &KernelMatrix, n_mean: f64, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    Ok(PermanentalSampler::new(k, n_mean)?.sample_many(n_samples, seed))
}
