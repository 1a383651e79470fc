//! Dense linear-algebra helpers shared by the simulation modules.

use nalgebra::{DMatrix, DVector, Hessenberg, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{GbsError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.abs()))
}

/// Position and magnitude of the largest `|M_ij - M_ji|`.
pub fn asymmetry(m: &CMat) -> (usize, usize, f64) {
    let n = m.nrows();
    let mut worst = (0, 0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (m[(i, j)] - m[(j, i)]).norm();
            if d > worst.2 {
                worst = (i, j, d);
            }
        }
    }
    worst
}

pub fn unitarity_error(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs(&(u * u.adjoint() - CMat::identity(n, n)))
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(c)
}

/// Takagi-Autonne factorisation `A = U diag(lambda) U^T` of a complex
/// symmetric matrix, with `lambda` non-negative and sorted descending.
#[derive(Debug, Clone)]
pub struct Takagi {
    pub unitary: CMat,
    pub values: Vec<f64>,
}

impl Takagi {
    pub fn reconstruct(&self) -> CMat {
        let d = CMat::from_diagonal(&CVec::from_iterator(
            self.values.len(),
            self.values.iter().map(|&v| c(v)),
        ));
        &self.unitary * d * self.unitary.transpose()
    }
}

const SYMMETRY_TOL: f64 = 1e-8;

/// Takagi vectors `z` satisfy `A conj(z) = lambda z`. Writing `A = X + iY`
/// and `z = p + iq` turns this into the real symmetric eigenproblem
/// `[[X, Y], [Y, -X]] (p, q) = lambda (p, q)`, whose spectrum is `±lambda`.
pub fn takagi(a: &CMat) -> Result<Takagi> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(GbsError::validation(format!(
            "takagi needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let (i, j, asym) = asymmetry(a);
    if asym > SYMMETRY_TOL {
        return Err(GbsError::validation(format!(
            "matrix is not symmetric: |A[{i},{j}] - A[{j},{i}]| = {asym:e}"
        )));
    }
    if n == 0 {
        return Ok(Takagi { unitary: CMat::zeros(0, 0), values: vec![] });
    }
    let sym = (a + a.transpose()) * c(0.5);
    let mut embed = RMat::zeros(2 * n, 2 * n);
    for r in 0..n {
        for s in 0..n {
            let z = sym[(r, s)];
            embed[(r, s)] = z.re;
            embed[(r, s + n)] = z.im;
            embed[(r + n, s)] = z.im;
            embed[(r + n, s + n)] = -z.re;
        }
    }
    let eig = SymmetricEigen::new(embed);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));

    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut values = Vec::with_capacity(n);
    let mut columns: Vec<CVec> = Vec::with_capacity(n);
    for &k in order.iter().take(n) {
        let v = eig.eigenvectors.column(k);
        let z = CVec::from_iterator(n, (0..n).map(|r| C64::new(v[r], v[r + n])));
        let lam = eig.eigenvalues[k].max(0.0);
        values.push(if lam < 1e-14 * scale { 0.0 } else { lam });
        columns.push(z);
    }
    orthonormalize(&mut columns);
    let unitary = CMat::from_columns(&columns);
    Ok(Takagi { unitary, values })
}

/// Modified Gram-Schmidt in place. Columns that collapse (degenerate
/// eigenvectors picked twice from the same `±lambda` pair) are replaced by
/// basis vectors orthogonal to everything before them.
pub fn orthonormalize(cols: &mut [CVec]) {
    let n = cols.first().map_or(0, |v| v.len());
    for k in 0..cols.len() {
        let mut v = cols[k].clone();
        for prev in cols[..k].iter() {
            let proj = prev.dotc(&v);
            v -= prev * proj;
        }
        let mut norm = v.norm();
        if norm < 1e-6 {
            for t in 0..n {
                let mut e = CVec::zeros(n);
                e[t] = c(1.0);
                for prev in cols[..k].iter() {
                    let proj = prev.dotc(&e);
                    e -= prev * proj;
                }
                if e.norm() > 0.5 {
                    v = e;
                    norm = v.norm();
                    break;
                }
            }
        }
        cols[k] = v / c(norm);
    }
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues descending.
pub fn sym_eigen_desc(m: &RMat) -> (Vec<f64>, RMat) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = RMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vecs)
}

/// `F` with `F F^T = M` for a symmetric positive semidefinite `M`;
/// eigenvalues below zero (numerical noise) are clipped.
pub fn psd_factor(m: &RMat) -> RMat {
    let (vals, vecs) = sym_eigen_desc(m);
    let n = m.nrows();
    RMat::from_fn(n, n, |r, col| vecs[(r, col)] * vals[col].max(0.0).sqrt())
}

/// Williamson normal form `V = S diag(nu, nu) S^T` of a real positive
/// definite covariance in `(x_1..x_n, p_1..p_n)` ordering; `S` is
/// symplectic for `Omega = [[0, I], [-I, 0]]`.
pub fn williamson(v: &RMat) -> Result<(RMat, Vec<f64>)> {
    let dim = v.nrows();
    if dim % 2 != 0 || v.ncols() != dim {
        return Err(GbsError::validation("covariance must be 2n x 2n"));
    }
    let n = dim / 2;
    let (vals, vecs) = sym_eigen_desc(v);
    if vals.last().copied().unwrap_or(1.0) <= 0.0 {
        return Err(GbsError::numerical("covariance is not positive definite"));
    }
    let sqrt = &vecs * RMat::from_diagonal(&RVec::from_iterator(dim, vals.iter().map(|x| x.sqrt()))) * vecs.transpose();
    let inv_sqrt =
        &vecs * RMat::from_diagonal(&RVec::from_iterator(dim, vals.iter().map(|x| 1.0 / x.sqrt()))) * vecs.transpose();
    let mut omega = RMat::zeros(dim, dim);
    for k in 0..n {
        omega[(k, k + n)] = 1.0;
        omega[(k + n, k)] = -1.0;
    }
    let m = &inv_sqrt * omega * &inv_sqrt;
    // i*M is Hermitian with spectrum ±d_k; eigenvectors of +d_k give the
    // canonical pairs through M x = d y, M y = -d x.
    let herm = m.map(|x| C64::new(0.0, x));
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut o = RMat::zeros(dim, dim);
    let mut d = vec![0.0; n];
    for (slot, &k) in order.iter().take(n).enumerate() {
        let dk = eig.eigenvalues[k];
        if dk <= 0.0 {
            return Err(GbsError::numerical("degenerate symplectic spectrum"));
        }
        let col = eig.eigenvectors.column(k);
        for r in 0..dim {
            o[(r, slot)] = std::f64::consts::SQRT_2 * col[r].im;
            o[(r, slot + n)] = std::f64::consts::SQRT_2 * col[r].re;
        }
        d[slot] = dk;
    }
    let scale = RMat::from_diagonal(&RVec::from_iterator(dim, (0..dim).map(|r| d[r % n].sqrt())));
    let s = sqrt * o * scale;
    let nu = d.iter().map(|x| 1.0 / x).collect();
    Ok((s, nu))
}

/// Power traces `tr(M^k)` for `k = 1..=kmax` from the characteristic
/// polynomial (Hessenberg reduction followed by La Budde's recurrence) and
/// Newton's identities. O(n^3) regardless of `kmax`.
pub fn power_traces(m: &CMat, kmax: usize) -> Vec<C64> {
    let n = m.nrows();
    let mut traces = vec![C64::new(0.0, 0.0); kmax];
    if n == 0 || kmax == 0 {
        return traces;
    }
    let coeffs = charpoly(m);
    // coeffs[k] multiplies lambda^(n-k); coeffs[0] = 1.
    for k in 1..=kmax {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..k.min(n + 1) {
            acc += coeffs[i] * traces[k - i - 1];
        }
        if k <= n {
            acc += coeffs[k] * (k as f64);
        }
        traces[k - 1] = -acc;
    }
    traces
}

/// Coefficients `[1, c_1, .., c_n]` of `det(lambda I - M) = sum c_k lambda^(n-k)`.
pub fn charpoly(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    let h = if n > 2 { Hessenberg::new(m.clone()).h() } else { m.clone() };
    // polys[i] holds det(lambda I - H_i) for the leading i x i block, in
    // ascending powers of lambda.
    let mut polys: Vec<Vec<C64>> = Vec::with_capacity(n + 1);
    polys.push(vec![c(1.0)]);
    for i in 1..=n {
        let mut p = vec![C64::new(0.0, 0.0); i + 1];
        let prev = &polys[i - 1];
        let diag = h[(i - 1, i - 1)];
        for (k, &a) in prev.iter().enumerate() {
            p[k + 1] += a;
            p[k] -= diag * a;
        }
        let mut beta_prod = c(1.0);
        for mm in 1..i {
            beta_prod *= h[(i - mm, i - mm - 1)];
            let coef = h[(i - mm - 1, i - 1)] * beta_prod;
            if coef == C64::new(0.0, 0.0) {
                continue;
            }
            for (k, &a) in polys[i - mm - 1].iter().enumerate() {
                p[k] -= coef * a;
            }
        }
        polys.push(p);
    }
    let top = &polys[n];
    (0..=n).map(|k| top[n - k]).collect()
}

/// Determinant via LU.
pub fn det(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return c(1.0);
    }
    m.clone().lu().determinant()
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| GbsError::numerical("singular matrix"))
}

/// Rough 1-norm condition estimate used only for diagnostics.
pub fn condition_estimate(m: &CMat) -> f64 {
    let norm1 = |x: &CMat| {
        (0..x.ncols())
            .map(|j| x.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match m.clone().try_inverse() {
        Some(inv) => norm1(m) * norm1(&inv),
        None => f64::INFINITY,
    }
}
