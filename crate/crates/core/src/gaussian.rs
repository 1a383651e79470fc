//! Gaussian states in the complex-amplitude picture and the programming of
//! a device from a symmetric matrix.
//!
//! Amplitudes are ordered `xi = (a_1..a_m, a_1^dag..a_m^dag)`. The stored
//! covariance is `Sigma = <{dxi, dxi^dag}>/2`, so the vacuum has
//! `Sigma = I/2` and `Q = Sigma + I/2 = I`. Quadratures use `x = a + a^dag`,
//! `p = -i(a - a^dag)`, giving the vacuum covariance `V = I`.

use crate::error::{GbsError, Result};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, I};

const PHYSICAL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: usize,
    sigma: CMat,
    mean: CVec,
}

impl GaussianState {
    pub fn vacuum(modes: usize) -> Self {
        GaussianState {
            modes,
            sigma: CMat::identity(2 * modes, 2 * modes) * c(0.5),
            mean: CVec::zeros(2 * modes),
        }
    }

    /// Builds a state after checking Hermiticity, the conjugate-pair
    /// structure of the mean and positive definiteness of `Q` with
    /// `det(Q) >= 1`.
    pub fn new(sigma: CMat, mean: CVec) -> Result<Self> {
        let dim = sigma.nrows();
        if dim % 2 != 0 || sigma.ncols() != dim || mean.len() != dim {
            return Err(GbsError::validation(format!(
                "covariance {}x{} and mean of length {} do not describe a 2m-mode state",
                dim,
                sigma.ncols(),
                mean.len()
            )));
        }
        let modes = dim / 2;
        let scale = linalg::max_abs(&sigma).max(1.0);
        let herm = linalg::max_abs(&(&sigma - sigma.adjoint()));
        if herm > 1e-10 * scale {
            return Err(GbsError::validation(format!("covariance is not Hermitian ({herm:e})")));
        }
        for i in 0..modes {
            if (mean[i + modes] - mean[i].conj()).norm() > 1e-10 * mean[i].norm().max(1.0) {
                return Err(GbsError::validation(format!("mean entry {} is not the conjugate of entry {i}", i + modes)));
            }
        }
        let sigma = (&sigma + sigma.adjoint()) * c(0.5);
        let state = GaussianState { modes, sigma, mean };
        let q = state.q_matrix();
        if q.clone().cholesky().is_none() {
            return Err(GbsError::validation("Q = Sigma + I/2 is not positive definite"));
        }
        let d = linalg::det(&q);
        if d.re < 1.0 - PHYSICAL_EPS {
            return Err(GbsError::validation(format!("det(Q) = {:.6} < 1: state is unphysical", d.re)));
        }
        Ok(state)
    }

    /// From a quadrature covariance and mean in `(x_1..x_m, p_1..p_m)`
    /// ordering with vacuum covariance `I`.
    pub fn from_xp(v: &RMat, r: &RVec) -> Result<Self> {
        let dim = v.nrows();
        let w = w_matrix(dim / 2);
        let sigma = &w * linalg::to_complex(v) * w.adjoint() * c(0.25);
        let mean = &w * r.map(c) * c(0.5);
        GaussianState::new(sigma, mean)
    }

    /// Quadrature covariance and mean, vacuum covariance `I`.
    pub fn to_xp(&self) -> (RMat, RVec) {
        let w = w_matrix(self.modes);
        let v = w.adjoint() * &self.sigma * &w;
        let r = w.adjoint() * &self.mean;
        (v.map(|z| z.re), r.map(|z| z.re))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn sigma(&self) -> &CMat {
        &self.sigma
    }

    pub fn mean(&self) -> &CVec {
        &self.mean
    }

    /// Amplitude means `alpha_i = <a_i>`.
    pub fn alpha(&self) -> CVec {
        self.mean.rows(0, self.modes).into_owned()
    }

    pub fn has_mean(&self) -> bool {
        self.mean.iter().any(|z| z.norm() > 1e-14)
    }

    pub fn q_matrix(&self) -> CMat {
        &self.sigma + CMat::identity(2 * self.modes, 2 * self.modes) * c(0.5)
    }

    /// `X (I - Q^-1)`.
    pub fn a_matrix(&self) -> Result<CMat> {
        let q = self.q_matrix();
        let qinv = linalg::inverse(&q).map_err(|_| {
            GbsError::numerical(format!("Q is singular (condition ~ {:e})", linalg::condition_estimate(&q)))
        })?;
        let dim = 2 * self.modes;
        Ok(x_matrix(self.modes) * (CMat::identity(dim, dim) - qinv))
    }

    pub fn mean_photon_per_mode(&self) -> Vec<f64> {
        (0..self.modes)
            .map(|i| self.sigma[(i, i)].re - 0.5 + self.mean[i].norm_sqr())
            .collect()
    }

    pub fn mean_photon(&self) -> f64 {
        self.mean_photon_per_mode().iter().sum()
    }

    /// `1/sqrt(det V)`; one for pure states.
    pub fn purity(&self) -> f64 {
        let (v, _) = self.to_xp();
        1.0 / v.determinant().sqrt()
    }

    pub fn is_pure(&self) -> bool {
        (self.purity() - 1.0).abs() < 1e-8
    }

    /// Uniform loss of strength `loss` on every mode.
    pub fn apply_loss(&self, loss: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&loss) {
            return Err(GbsError::validation(format!("loss {loss} outside [0, 1]")));
        }
        let t = 1.0 - loss;
        let dim = 2 * self.modes;
        Ok(GaussianState {
            modes: self.modes,
            sigma: &self.sigma * c(t) + CMat::identity(dim, dim) * c(0.5 * loss),
            mean: &self.mean * c(t.sqrt()),
        })
    }

    /// Marginal state of the listed modes, in the listed order.
    pub fn reduced(&self, keep: &[usize]) -> GaussianState {
        let m = self.modes;
        let idx: Vec<usize> = keep.iter().copied().chain(keep.iter().map(|i| i + m)).collect();
        GaussianState {
            modes: keep.len(),
            sigma: CMat::from_fn(idx.len(), idx.len(), |r, s| self.sigma[(idx[r], idx[s])]),
            mean: CVec::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i])),
        }
    }

    /// Linear Bogoliubov transformation `a -> alpha a + beta a^dag`
    /// (Heisenberg picture), then displacement `a -> a + d`.
    pub fn transform(&self, alpha: &CMat, beta: &CMat, d: Option<&CVec>) -> Self {
        let m = self.modes;
        let mut s = CMat::zeros(2 * m, 2 * m);
        s.view_mut((0, 0), (m, m)).copy_from(alpha);
        s.view_mut((0, m), (m, m)).copy_from(beta);
        s.view_mut((m, 0), (m, m)).copy_from(&beta.map(|z| z.conj()));
        s.view_mut((m, m), (m, m)).copy_from(&alpha.map(|z| z.conj()));
        let sigma = &s * &self.sigma * s.adjoint();
        let mut mean = &s * &self.mean;
        if let Some(d) = d {
            for i in 0..m {
                mean[i] += d[i];
                mean[i + m] += d[i].conj();
            }
        }
        GaussianState { modes: m, sigma, mean }
    }

    /// Interferometer `a -> U a` on the listed modes.
    pub fn interferometer(&self, u: &CMat, on: &[usize]) -> Self {
        let mut alpha = CMat::identity(self.modes, self.modes);
        for (r, &i) in on.iter().enumerate() {
            for (s, &j) in on.iter().enumerate() {
                alpha[(i, j)] = u[(r, s)];
            }
        }
        self.transform(&alpha, &CMat::zeros(self.modes, self.modes), None)
    }

    /// Single-mode squeezing `exp[r (a^dag^2 - a^2)/2]`.
    pub fn squeeze(&self, mode: usize, r: f64) -> Self {
        let mut alpha = CMat::identity(self.modes, self.modes);
        let mut beta = CMat::zeros(self.modes, self.modes);
        alpha[(mode, mode)] = c(r.cosh());
        beta[(mode, mode)] = c(r.sinh());
        self.transform(&alpha, &beta, None)
    }

    /// Two-mode squeezing `exp[r (a^dag b^dag - a b)]`.
    pub fn two_mode_squeeze(&self, a: usize, b: usize, r: f64) -> Self {
        let mut alpha = CMat::identity(self.modes, self.modes);
        let mut beta = CMat::zeros(self.modes, self.modes);
        alpha[(a, a)] = c(r.cosh());
        alpha[(b, b)] = c(r.cosh());
        beta[(a, b)] = c(r.sinh());
        beta[(b, a)] = c(r.sinh());
        self.transform(&alpha, &beta, None)
    }

    /// Displacement `a_i -> a_i + d_i` on every mode.
    pub fn displace(&self, d: &CVec) -> Self {
        let id = CMat::identity(self.modes, self.modes);
        self.transform(&id, &CMat::zeros(self.modes, self.modes), Some(d))
    }

    /// For a pure state `|psi> ∝ exp(a^dag B a^dag / 2 + gamma . a^dag)|0>`,
    /// returns `(B, gamma)`.
    pub fn pure_amplitudes(&self) -> Result<(CMat, CVec)> {
        if !self.is_pure() {
            return Err(GbsError::Unsupported("amplitudes requested for a mixed state".into()));
        }
        let m = self.modes;
        let a = self.a_matrix()?;
        let b = a.view((m, m), (m, m)).into_owned();
        let alpha = self.alpha();
        let gamma = &alpha - &b * alpha.map(|z| z.conj());
        Ok((b, gamma))
    }
}

/// Block swap `[[0, I], [I, 0]]`.
pub fn x_matrix(modes: usize) -> CMat {
    let mut x = CMat::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        x[(i, i + modes)] = c(1.0);
        x[(i + modes, i)] = c(1.0);
    }
    x
}

/// `xi = W r / 2` with `W = [[I, iI], [I, -iI]]`.
fn w_matrix(modes: usize) -> CMat {
    let mut w = CMat::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        w[(i, i)] = c(1.0);
        w[(i, i + modes)] = I;
        w[(i + modes, i)] = c(1.0);
        w[(i + modes, i + modes)] = -I;
    }
    w
}

/// Real symmetric matrix with optional node weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyKernel {
    entries: RMat,
    node_weights: Option<Vec<f64>>,
}

const ASYMMETRY_TOL: f64 = 1e-8;

impl AdjacencyKernel {
    /// Symmetrises `(M + M^T)/2`, failing when `M` was more than `1e-8`
    /// away from symmetric.
    pub fn new(m: RMat) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(GbsError::validation(format!("matrix is {}x{}, not square", n, m.ncols())));
        }
        if let Some(bad) = m.iter().find(|v| !v.is_finite()) {
            return Err(GbsError::validation(format!("non-finite matrix entry {bad}")));
        }
        let diff = &m - m.transpose();
        let (mut worst, mut at) = (0.0, (0, 0));
        for i in 0..n {
            for j in 0..i {
                if diff[(i, j)].abs() > worst {
                    worst = diff[(i, j)].abs();
                    at = (i, j);
                }
            }
        }
        if worst >= ASYMMETRY_TOL {
            return Err(GbsError::validation(format!(
                "matrix asymmetry {worst:e} at ({}, {}) exceeds 1e-8",
                at.0, at.1
            )));
        }
        let entries = (&m + m.transpose()) * 0.5;
        Ok(AdjacencyKernel { entries, node_weights: None })
    }

    pub fn with_node_weights(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.size() {
            return Err(GbsError::validation(format!("{} node weights for {} nodes", w.len(), self.size())));
        }
        self.node_weights = Some(w);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &RMat {
        &self.entries
    }

    pub fn node_weights(&self) -> Option<&[f64]> {
        self.node_weights.as_deref()
    }
}

/// Interferometer and squeezers programmed from a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDevice {
    pub unitary: CMat,
    pub takagi_values: Vec<f64>,
    pub rescale_c: f64,
    pub squeezing: Vec<f64>,
    pub mean_photon: f64,
}

impl EncodedDevice {
    pub fn modes(&self) -> usize {
        self.takagi_values.len()
    }
}

/// `sum_i (c l_i)^2 / (1 - (c l_i)^2)`.
pub fn mean_photon_for(values: &[f64], rescale: f64) -> f64 {
    values
        .iter()
        .map(|&l| {
            let t = (rescale * l).powi(2);
            t / (1.0 - t)
        })
        .sum()
}

/// Programs a device whose output mean photon number is `n_mean`.
pub fn encode(a: &AdjacencyKernel, n_mean: f64) -> Result<EncodedDevice> {
    if !(n_mean >= 0.0) || !n_mean.is_finite() {
        return Err(GbsError::validation(format!("mean photon number {n_mean} must be finite and >= 0")));
    }
    let tk = linalg::takagi(&linalg::to_complex(a.entries()))?;
    let lmax = tk.values.first().copied().unwrap_or(0.0);
    let rescale = if n_mean == 0.0 {
        0.0
    } else {
        if lmax <= 0.0 {
            return Err(GbsError::NoSolution(format!(
                "mean photon number {n_mean} requested from an all-zero matrix"
            )));
        }
        solve_rescale(&tk.values, n_mean)
    };
    let squeezing = tk.values.iter().map(|&l| (rescale * l).atanh()).collect();
    Ok(EncodedDevice {
        unitary: tk.unitary,
        mean_photon: mean_photon_for(&tk.values, rescale),
        takagi_values: tk.values,
        rescale_c: rescale,
        squeezing,
    })
}

/// Bisection on `(0, 1/lambda_max)`; the mean photon number is increasing
/// in `c` and diverges at the upper end.
fn solve_rescale(values: &[f64], n_mean: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0 / values[0];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_photon_for(values, mid) < n_mean {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * 1e-4 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Squeezers followed by the interferometer; the pure state has amplitude
/// matrix `U diag(c lambda) U^T`.
pub fn state_from_device(dev: &EncodedDevice) -> GaussianState {
    let m = dev.modes();
    let mut alpha = CMat::zeros(m, m);
    let mut beta = CMat::zeros(m, m);
    for i in 0..m {
        alpha[(i, i)] = c(dev.squeezing[i].cosh());
        beta[(i, i)] = c(dev.squeezing[i].sinh());
    }
    let alpha = &dev.unitary * alpha;
    let beta = &dev.unitary * beta;
    GaussianState::vacuum(m).transform(&alpha, &beta, None)
}
