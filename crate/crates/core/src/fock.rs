//! Truncated Fock-space simulator for a handful of modes.
//!
//! Gates are applied as dense matrix exponentials of their generators, so
//! results are exact up to truncation at `cutoff` photons per mode. Only
//! useful as a reference for the Gaussian formulas at tiny sizes.

use nalgebra::SymmetricEigen;

use crate::linalg::{c, CMat, CVec, C64, I};

#[derive(Debug, Clone)]
pub struct FockState {
    modes: usize,
    cutoff: usize,
    amps: CVec,
}

impl FockState {
    /// `|n_1 .. n_m>` with each `n_i < cutoff`.
    pub fn basis(counts: &[usize], cutoff: usize) -> Self {
        let modes = counts.len();
        let dim = cutoff.pow(modes as u32);
        let mut amps = CVec::zeros(dim);
        amps[index(counts, cutoff)] = c(1.0);
        FockState { modes, cutoff, amps }
    }

    pub fn vacuum(modes: usize, cutoff: usize) -> Self {
        FockState::basis(&vec![0; modes], cutoff)
    }

    pub fn amplitude(&self, counts: &[usize]) -> C64 {
        if counts.iter().any(|&n| n >= self.cutoff) {
            return c(0.0);
        }
        self.amps[index(counts, self.cutoff)]
    }

    pub fn probability(&self, counts: &[usize]) -> f64 {
        self.amplitude(counts).norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    fn lower(&self, mode: usize) -> CMat {
        let dim = self.amps.len();
        let stride = self.cutoff.pow((self.modes - 1 - mode) as u32);
        let mut a = CMat::zeros(dim, dim);
        for col in 0..dim {
            let n = (col / stride) % self.cutoff;
            if n > 0 {
                a[(col - stride, col)] = c((n as f64).sqrt());
            }
        }
        a
    }

    /// `|psi> <- exp(-i H) |psi>` for Hermitian `H`.
    fn evolve(&mut self, h: CMat) {
        let h = (&h + h.adjoint()) * c(0.5);
        let eig = SymmetricEigen::new(h);
        let v = eig.eigenvectors;
        let phases = CVec::from_iterator(v.ncols(), eig.eigenvalues.iter().map(|&l| (-I * l).exp()));
        let coeffs = v.adjoint() * &self.amps;
        self.amps = v * coeffs.component_mul(&phases);
    }

    /// `exp[r (a^dag^2 - a^2)/2]`.
    pub fn squeeze(&mut self, mode: usize, r: f64) {
        let a = self.lower(mode);
        let ad = a.adjoint();
        let gen = (&ad * &ad - &a * &a) * c(0.5 * r);
        self.evolve(gen * I);
    }

    /// `exp[r (a^dag b^dag - a b)]`.
    pub fn two_mode_squeeze(&mut self, m1: usize, m2: usize, r: f64) {
        let a = self.lower(m1);
        let b = self.lower(m2);
        let gen = (a.adjoint() * b.adjoint() - &a * &b) * c(r);
        self.evolve(gen * I);
    }

    /// `exp(alpha a^dag - alpha^* a)`.
    pub fn displace(&mut self, mode: usize, alpha: C64) {
        let a = self.lower(mode);
        let gen = a.adjoint() * alpha - &a * alpha.conj();
        self.evolve(gen * I);
    }

    /// `exp(i sum h_ij a_i^dag a_j)`, which maps `a -> exp(i h) a`.
    pub fn passive(&mut self, h: &CMat) {
        let lowers: Vec<CMat> = (0..self.modes).map(|k| self.lower(k)).collect();
        let dim = self.amps.len();
        let mut gen = CMat::zeros(dim, dim);
        for i in 0..self.modes {
            for j in 0..self.modes {
                if h[(i, j)] != c(0.0) {
                    gen += lowers[i].adjoint() * &lowers[j] * h[(i, j)];
                }
            }
        }
        self.evolve(-gen);
    }
}

/// `exp(i h)` for Hermitian `h`.
pub fn unitary_from_hermitian(h: &CMat) -> CMat {
    let eig = SymmetricEigen::new((h + h.adjoint()) * c(0.5));
    let v = &eig.eigenvectors;
    let d = CMat::from_diagonal(&CVec::from_iterator(v.ncols(), eig.eigenvalues.iter().map(|&l| (I * l).exp())));
    v * d * v.adjoint()
}

fn index(counts: &[usize], cutoff: usize) -> usize {
    counts.iter().fold(0, |acc, &n| acc * cutoff + n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squeezed_vacuum_amplitudes() {
        let r: f64 = 0.4;
        let mut s = FockState::vacuum(1, 60);
        s.squeeze(0, r);
        let t = r.tanh();
        // <2n|S(r)|0> = (tanh r)^n sqrt((2n)!) / (2^n n! sqrt(cosh r))
        let expect = [1.0, t / 2f64.sqrt(), t * t * 24f64.sqrt() / 8.0];
        for (n, e) in expect.iter().enumerate() {
            let amp = s.amplitude(&[2 * n]);
            assert!((amp - c(e / r.cosh().sqrt())).norm() < 1e-10, "n={n} {amp}");
        }
        assert!(s.amplitude(&[1]).norm() < 1e-12);
    }

    #[test]
    fn coherent_state() {
        let alpha = C64::new(0.3, -0.5);
        let mut s = FockState::vacuum(1, 40);
        s.displace(0, alpha);
        let p0 = (-alpha.norm_sqr()).exp();
        assert!((s.probability(&[0]) - p0).abs() < 1e-12);
        assert!((s.amplitude(&[1]) - alpha * p0.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn passive_moves_a_photon() {
        let h = CMat::from_row_slice(2, 2, &[c(0.0), C64::new(0.3, 0.2), C64::new(0.3, -0.2), c(0.0)]);
        let u = unitary_from_hermitian(&h);
        let mut s = FockState::basis(&[1, 0], 4);
        s.passive(&h);
        // a_0^dag -> sum_i U_i0 a_i^dag
        assert!((s.amplitude(&[1, 0]) - u[(0, 0)]).norm() < 1e-12);
        assert!((s.amplitude(&[0, 1]) - u[(1, 0)]).norm() < 1e-12);
    }
}
