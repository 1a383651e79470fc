//! Vibronic spectra: molecular data to a Gaussian circuit, transition
//! energies of samples and the broadened spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{GbsError, Result};
use crate::gaussian::GaussianState;
use crate::linalg::{self, c, CVec, RMat};
use crate::matfuncs::PhotonPattern;
use crate::sampler::{self, Detector, SampleBatch, SamplerConfig};

/// Second radiation constant `h c / k_B` in cm K.
pub const C2: f64 = 1.438_776_877;

/// Molecular data: frequencies in cm^-1, Duschinsky matrix, dimensionless
/// displacement and temperature in kelvin.
#[derive(Debug, Clone, PartialEq)]
pub struct VibronicInput {
    pub w: Vec<f64>,
    pub wp: Vec<f64>,
    pub ud: RMat,
    pub delta: Vec<f64>,
    pub temperature: f64,
}

impl VibronicInput {
    pub fn new(w: Vec<f64>, wp: Vec<f64>, ud: RMat, delta: Vec<f64>, temperature: f64) -> Result<Self> {
        let m = w.len();
        if m == 0 {
            return Err(GbsError::validation("molecule needs at least one mode"));
        }
        if wp.len() != m || delta.len() != m || ud.nrows() != m || ud.ncols() != m {
            return Err(GbsError::validation(format!(
                "inconsistent sizes: {} ground, {} excited frequencies, {} displacements, {}x{} Duschinsky",
                m,
                wp.len(),
                delta.len(),
                ud.nrows(),
                ud.ncols()
            )));
        }
        if w.iter().chain(&wp).any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(GbsError::validation("frequencies must be positive and finite"));
        }
        if delta.iter().any(|x| !x.is_finite()) || ud.iter().any(|x| !x.is_finite()) {
            return Err(GbsError::validation("displacement and Duschinsky entries must be finite"));
        }
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(GbsError::validation(format!("temperature must be >= 0, got {temperature}")));
        }
        let err = linalg::max_abs_real(&(ud.transpose() * &ud - RMat::identity(m, m)));
        if err > 1e-6 {
            return Err(GbsError::validation(format!("Duschinsky matrix is not orthogonal (error {err:e})")));
        }
        Ok(VibronicInput { w, wp, ud, delta, temperature })
    }

    pub fn modes(&self) -> usize {
        self.w.len()
    }
}

/// Dimensionless displacement from mass-weighted Cartesian displacements
/// `d` in amu^(1/2) Angstrom and excited-state frequencies in cm^-1.
pub fn delta_from_displacement(wp: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    if wp.len() != d.len() {
        return Err(GbsError::validation("one displacement per frequency is required"));
    }
    const HBAR: f64 = 1.054_571_817e-34;
    const C_CM: f64 = 2.997_924_58e10;
    const AMU: f64 = 1.660_539_066_60e-27;
    let scale = (2.0 * std::f64::consts::PI * C_CM / HBAR).sqrt() * AMU.sqrt() * 1e-10;
    Ok(wp.iter().zip(d).map(|(w, x)| scale * w.sqrt() * x).collect())
}

/// Circuit parameters: two-mode squeezing `t`, interferometers `u1`
/// (applied last) and `u2` (applied first), squeezing `r` and displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct VibronicParams {
    pub t: Vec<f64>,
    pub u1: RMat,
    pub r: Vec<f64>,
    pub u2: RMat,
    pub alpha: Vec<f64>,
}

impl VibronicParams {
    pub fn modes(&self) -> usize {
        self.r.len()
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.t.iter().all(|&t| t == 0.0)
    }
}

/// `artanh(exp(-c2 w / 2T))`; zero at `T = 0`.
pub fn thermal_squeezing(w: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    (-C2 * w / (2.0 * temperature)).exp().atanh()
}

pub fn gbs_params(input: &VibronicInput) -> Result<VibronicParams> {
    let m = input.modes();
    let j = RMat::from_fn(m, m, |a, b| input.wp[a].sqrt() * input.ud[(a, b)] / input.w[b].sqrt());
    let svd = j.svd(true, true);
    let (u1, u2) = match (svd.u, svd.v_t) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(GbsError::numerical("singular value decomposition failed")),
    };
    if svd.singular_values.iter().any(|s| !(*s > 0.0)) {
        return Err(GbsError::numerical("J has a zero singular value"));
    }
    Ok(VibronicParams {
        t: input.w.iter().map(|&w| thermal_squeezing(w, input.temperature)).collect(),
        u1,
        r: svd.singular_values.iter().map(|s| s.ln()).collect(),
        u2,
        alpha: input.delta.iter().map(|d| d / 2f64.sqrt()).collect(),
    })
}

/// The circuit's output state: `M` modes at zero temperature, otherwise
/// `2M` modes with the thermal partners in the second half.
pub fn build_state(p: &VibronicParams) -> GaussianState {
    let m = p.modes();
    let zero_t = p.is_zero_temperature();
    let total = if zero_t { m } else { 2 * m };
    let first: Vec<usize> = (0..m).collect();
    let mut state = GaussianState::vacuum(total);
    if !zero_t {
        for (i, &t) in p.t.iter().enumerate() {
            state = state.two_mode_squeeze(i, i + m, t);
        }
        state = state.interferometer(&linalg::to_complex(&p.u2), &first);
    }
    for (i, &r) in p.r.iter().enumerate() {
        state = state.squeeze(i, r);
    }
    state = state.interferometer(&linalg::to_complex(&p.u1), &first);
    if p.alpha.iter().any(|&a| a != 0.0) {
        let mut d = CVec::zeros(total);
        for (i, &a) in p.alpha.iter().enumerate() {
            d[i] = c(a);
        }
        state = state.displace(&d);
    }
    state
}

pub fn sample_vibronic(p: &VibronicParams, n_samples: usize, seed: u64, config: SamplerConfig) -> Result<SampleBatch> {
    sampler::sample_state(&build_state(p), n_samples, Detector::Pnr, config, seed)
}

/// `E = sum w'_k m_k - sum w_k n_k` for a pattern `(m; n)`, or `(m)` alone.
pub fn energy(pattern: &PhotonPattern, w: &[f64], wp: &[f64]) -> Result<f64> {
    let m = wp.len();
    let s = &pattern.counts;
    if w.len() != m || (s.len() != m && s.len() != 2 * m) {
        return Err(GbsError::validation(format!("pattern of {} modes does not fit a {m}-mode molecule", s.len())));
    }
    let excited: f64 = (0..m).map(|k| wp[k] * s[k] as f64).sum();
    let ground: f64 = if s.len() == 2 * m { (0..m).map(|k| w[k] * s[m + k] as f64).sum() } else { 0.0 };
    Ok(excited - ground)
}

pub fn energies(batch: &SampleBatch, w: &[f64], wp: &[f64]) -> Result<Vec<f64>> {
    batch.samples.iter().map(|p| energy(p, w, wp)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    /// `counts.len() + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Energies that fell outside the histogram range.
    pub outside: usize,
    pub grid: Vec<f64>,
    pub broadened: Vec<f64>,
    pub gamma: f64,
}

impl Spectrum {
    pub fn broadened_at(&self, x: f64) -> f64 {
        let g = self.gamma;
        self.energies.iter().map(|&e| g / ((x - e).powi(2) + g * g)).sum::<f64>() / std::f64::consts::PI
    }

    pub fn bin_centres(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }
}

pub const DEFAULT_GAMMA: f64 = 25.0;

/// Histogram with bins of `bin_width` and a Lorentzian-broadened curve of
/// half-width `gamma`. Without a range the histogram covers every energy
/// with `5 gamma` of padding, on edges aligned to multiples of the width.
pub fn spectrum(energies: &[f64], bin_width: f64, gamma: f64, range: Option<(f64, f64)>) -> Result<Spectrum> {
    if energies.is_empty() {
        return Err(GbsError::validation("no energies to histogram"));
    }
    if !(bin_width > 0.0) || !(gamma > 0.0) || !bin_width.is_finite() || !gamma.is_finite() {
        return Err(GbsError::validation("bin width and gamma must be positive"));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(GbsError::validation("energies must be finite"));
    }
    let (lo, hi) = match range {
        Some((lo, hi)) if lo < hi && lo.is_finite() && hi.is_finite() => (lo, hi),
        Some(_) => return Err(GbsError::validation("range must satisfy lo < hi")),
        None => {
            let min = energies.iter().copied().fold(f64::INFINITY, f64::min) - 5.0 * gamma;
            let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 5.0 * gamma;
            ((min / bin_width).floor() * bin_width, (max / bin_width).ceil() * bin_width)
        }
    };
    let nbins = (((hi - lo) / bin_width).ceil() as usize).max(1);
    if nbins > 10_000_000 {
        return Err(GbsError::Resource(format!("{nbins} histogram bins requested")));
    }
    let edges: Vec<f64> = (0..=nbins).map(|k| lo + k as f64 * bin_width).collect();
    let mut counts = vec![0; nbins];
    let mut outside = 0;
    for &e in energies {
        if e < lo || e > hi {
            outside += 1;
            continue;
        }
        let k = (((e - lo) / bin_width).floor() as usize).min(nbins - 1);
        counts[k] += 1;
    }

    let points = ((((hi - lo) / (0.1 * gamma)).ceil() as usize) + 1).clamp(2, 200_001);
    let step = (hi - lo) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|k| lo + k as f64 * step).collect();
    let mut s = Spectrum { energies: energies.to_vec(), edges, counts, outside, grid, broadened: Vec::new(), gamma };
    s.broadened = s.grid.iter().map(|&x| s.broadened_at(x)).collect();
    Ok(s)
}
