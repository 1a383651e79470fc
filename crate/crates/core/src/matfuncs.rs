//! Hafnian, loop hafnian, permanent and Torontonian, plus the
//! pattern-indexed submatrices that feed them.
//!
//! Two independent hafnian paths are provided: a subset-sum formula over
//! vertex pairs driven by power traces (`hafnian`, `loop_hafnian`), which is
//! the production path, and direct matching enumeration
//! (`hafnian_matchings`, `loop_hafnian_matchings`) which serves as the
//! oracle for small sizes.

use serde::{Deserialize, Serialize};

use crate::error::{GbsError, Result};
use crate::linalg::{self, c, CMat, C64};

/// Photon counts per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhotonPattern {
    pub counts: Vec<usize>,
}

impl PhotonPattern {
    pub fn new(counts: Vec<usize>) -> Self {
        PhotonPattern { counts }
    }

    pub fn zeros(modes: usize) -> Self {
        PhotonPattern { counts: vec![0; modes] }
    }

    pub fn modes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_binary(&self) -> bool {
        self.counts.iter().all(|&s| s <= 1)
    }

    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Each mode index repeated as many times as it was detected.
    pub fn repeated_indices(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| std::iter::repeat(i).take(s))
            .collect()
    }

    /// `prod_i s_i!`
    pub fn factorial_product(&self) -> f64 {
        self.counts.iter().map(|&s| factorial(s)).product()
    }

    /// Clicks: every non-zero count becomes one.
    pub fn clipped(&self) -> Self {
        PhotonPattern { counts: self.counts.iter().map(|&s| s.min(1)).collect() }
    }
}

impl From<Vec<usize>> for PhotonPattern {
    fn from(v: Vec<usize>) -> Self {
        PhotonPattern::new(v)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn submatrix(m: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(idx.len(), idx.len(), |r, s| m[(idx[r], idx[s])])
}

/// Rows and columns `(i, i+m)` of a `2m x 2m` matrix, dropped when
/// `s_i = 0` and repeated `s_i` times otherwise; result is `2k x 2k`.
pub fn reduce_doubled(m: &CMat, pattern: &PhotonPattern) -> Result<CMat> {
    Ok(submatrix(m, &doubled_indices(m.nrows(), pattern)?))
}

pub(crate) fn doubled_indices(dim: usize, pattern: &PhotonPattern) -> Result<Vec<usize>> {
    let modes = pattern.modes();
    if dim != 2 * modes {
        return Err(GbsError::validation(format!(
            "pattern has {modes} modes but matrix is {dim}x{dim}"
        )));
    }
    let top = pattern.repeated_indices();
    let mut idx = top.clone();
    idx.extend(top.iter().map(|i| i + modes));
    Ok(idx)
}

/// Rows and columns `i` repeated `s_i` times; result is `k x k`.
pub fn reduce_single(m: &CMat, pattern: &PhotonPattern) -> Result<CMat> {
    if m.nrows() != pattern.modes() || m.ncols() != pattern.modes() {
        return Err(GbsError::validation(format!(
            "pattern has {} modes but matrix is {}x{}",
            pattern.modes(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(submatrix(m, &pattern.repeated_indices()))
}

/// Hafnian of a symmetric matrix; the diagonal is ignored and odd sizes
/// give exactly zero.
pub fn hafnian(m: &CMat) -> C64 {
    let n = m.nrows();
    if n % 2 == 1 {
        return c(0.0);
    }
    let zeros = vec![c(0.0); n];
    loop_hafnian_series(m, &zeros, &zeros, 0)[0]
}

/// Loop hafnian: matchings of the complete graph with self-loops, an
/// unmatched vertex `i` contributing `M_ii`.
pub fn loop_hafnian(m: &CMat) -> C64 {
    let loops: Vec<C64> = (0..m.nrows()).map(|i| m[(i, i)]).collect();
    loop_hafnian_with(m, &loops)
}

/// Loop hafnian with the loop weights supplied separately; the diagonal of
/// `edges` is ignored.
pub fn loop_hafnian_with(edges: &CMat, loops: &[C64]) -> C64 {
    let zeros = vec![c(0.0); loops.len()];
    loop_hafnian_series(edges, loops, &zeros, 0)[0]
}

/// Taylor coefficients `[y^0 .. y^degree]` of the loop hafnian of `edges`
/// with loop weights `loops + y * slope`.
///
/// Pairs vertices `(2i, 2i+1)` and sums over subsets `Z` of pairs with
/// alternating sign. For each subset, closed alternating walks contribute
/// `tr((XA_Z)^k) / 2k` and loop-terminated paths contribute
/// `D^T (XA_Z)^(k-1) X D / 2` to the exponent of a generating series in the
/// number of pairs covered.
pub fn loop_hafnian_series(edges: &CMat, loops: &[C64], slope: &[C64], degree: usize) -> Vec<C64> {
    let n0 = edges.nrows();
    assert_eq!(loops.len(), n0);
    assert_eq!(slope.len(), n0);
    if n0 == 0 {
        let mut out = vec![c(0.0); degree + 1];
        out[0] = c(1.0);
        return out;
    }
    // Pad odd sizes with an isolated vertex carrying a unit loop.
    let n = n0 + n0 % 2;
    let h = n / 2;
    let edge = |a: usize, b: usize| -> C64 {
        if a == b || a >= n0 || b >= n0 {
            c(0.0)
        } else {
            edges[(a, b)]
        }
    };
    let loop_at = |a: usize| if a < n0 { loops[a] } else { c(1.0) };
    let slope_at = |a: usize| if a < n0 { slope[a] } else { c(0.0) };
    let has_slope = slope.iter().any(|z| z.norm() > 0.0);
    let has_loops = has_slope || (0..n).any(|a| loop_at(a).norm() > 0.0);

    let mut total = vec![c(0.0); degree + 1];
    let mut idx: Vec<usize> = Vec::with_capacity(n);
    for mask in 0u64..(1u64 << h) {
        idx.clear();
        for p in 0..h {
            if mask >> p & 1 == 1 {
                idx.push(2 * p);
                idx.push(2 * p + 1);
            }
        }
        let nz = idx.len();
        let xa = CMat::from_fn(nz, nz, |r, s| edge(idx[r ^ 1], idx[s]));
        let traces = linalg::power_traces(&xa, h);

        // g[k-1] is the y-polynomial multiplying lambda^k in the exponent.
        let mut g = vec![vec![c(0.0); degree + 1]; h];
        for k in 1..=h {
            g[k - 1][0] = traces[k - 1] / c(2.0 * k as f64);
        }
        if has_loops && nz > 0 {
            let d0: Vec<C64> = idx.iter().map(|&a| loop_at(a)).collect();
            let d1: Vec<C64> = idx.iter().map(|&a| slope_at(a)).collect();
            let mut s0: Vec<C64> = (0..nz).map(|r| d0[r ^ 1]).collect();
            let mut s1: Vec<C64> = (0..nz).map(|r| d1[r ^ 1]).collect();
            for k in 1..=h {
                let dot = |u: &[C64], v: &[C64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<C64>();
                g[k - 1][0] += dot(&d0, &s0) * 0.5;
                if degree >= 1 && has_slope {
                    g[k - 1][1] += (dot(&d0, &s1) + dot(&d1, &s0)) * 0.5;
                    if degree >= 2 {
                        g[k - 1][2] += dot(&d1, &s1) * 0.5;
                    }
                }
                if k < h {
                    s0 = matvec(&xa, &s0);
                    if has_slope {
                        s1 = matvec(&xa, &s1);
                    }
                }
            }
        }
        let f = exp_series_top(&g, h, degree);
        let sign = if (h - nz / 2) % 2 == 0 { 1.0 } else { -1.0 };
        for (t, v) in total.iter_mut().zip(f) {
            *t += v * sign;
        }
    }
    total
}

fn matvec(m: &CMat, v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n).map(|r| (0..n).map(|s| m[(r, s)] * v[s]).sum()).collect()
}

/// Coefficient of `lambda^h` in `exp(sum_k g_k(y) lambda^k)`, each
/// coefficient a polynomial in `y` truncated at `degree`.
fn exp_series_top(g: &[Vec<C64>], h: usize, degree: usize) -> Vec<C64> {
    let mut f: Vec<Vec<C64>> = Vec::with_capacity(h + 1);
    let mut one = vec![c(0.0); degree + 1];
    one[0] = c(1.0);
    f.push(one);
    for nn in 1..=h {
        let mut acc = vec![c(0.0); degree + 1];
        for k in 1..=nn {
            let gk = &g[k - 1];
            let prev = &f[nn - k];
            for (a, &ga) in gk.iter().enumerate() {
                if ga == c(0.0) {
                    continue;
                }
                for b in 0..=(degree - a) {
                    acc[a + b] += ga * prev[b] * (k as f64);
                }
            }
        }
        for v in acc.iter_mut() {
            *v /= nn as f64;
        }
        f.push(acc);
    }
    f.pop().unwrap()
}

/// Loop hafnian of the matrix in which index `i` is repeated `reps[i]`
/// times (copies of `i` joined by edge weight `a_ii`, loops `loops[i]`).
///
/// Finite-difference form: with `h = reps/2 - v` and `K = sum reps`,
/// `sum_v (-1)^|v| prod_i C(reps_i, v_i) [t^K] exp(t^2 h.A.h/2 + t loops.h)`.
/// Costs `prod (reps_i + 1)` terms, so it beats the subset sum when
/// indices are heavily repeated.
pub fn loop_hafnian_repeated(a: &CMat, loops: Option<&[C64]>, reps: &[usize]) -> C64 {
    let active: Vec<usize> = (0..reps.len()).filter(|&i| reps[i] > 0).collect();
    let k: usize = reps.iter().sum();
    if k == 0 {
        return c(1.0);
    }
    if loops.is_none() && k % 2 == 1 {
        return c(0.0);
    }
    let n = active.len();
    let s: Vec<usize> = active.iter().map(|&i| reps[i]).collect();
    let sub = CMat::from_fn(n, n, |r, q| a[(active[r], active[q])]);
    let gam: Vec<C64> = match loops {
        Some(l) => active.iter().map(|&i| l[i]).collect(),
        None => vec![c(0.0); n],
    };
    let binom = |nn: usize, kk: usize| -> f64 {
        (0..kk).fold(1.0, |acc, t| acc * (nn - t) as f64 / (t + 1) as f64)
    };
    let mut v = vec![0usize; n];
    let mut total = c(0.0);
    loop {
        let h: Vec<f64> = (0..n).map(|i| s[i] as f64 / 2.0 - v[i] as f64).collect();
        let mut quad = c(0.0);
        for r in 0..n {
            let row: C64 = (0..n).map(|q| sub[(r, q)] * h[q]).sum();
            quad += row * h[r];
        }
        let lin: C64 = (0..n).map(|i| gam[i] * h[i]).sum();
        let weight: f64 = (0..n).map(|i| binom(s[i], v[i])).product();
        let sign = if v.iter().sum::<usize>() % 2 == 0 { 1.0 } else { -1.0 };
        total += top_coefficient(quad * 0.5, lin, k) * (sign * weight);

        let mut pos = 0;
        loop {
            if pos == n {
                return total;
            }
            if v[pos] < s[pos] {
                v[pos] += 1;
                break;
            }
            v[pos] = 0;
            pos += 1;
        }
    }
}

/// `[t^k] exp(a t^2 + b t)`.
fn top_coefficient(a: C64, b: C64, k: usize) -> C64 {
    let mut e = vec![c(0.0); k + 1];
    e[0] = c(1.0);
    for n in 1..=k {
        let mut acc = b * e[n - 1];
        if n >= 2 {
            acc += a * e[n - 2] * 2.0;
        }
        e[n] = acc / n as f64;
    }
    e[k]
}

/// Hafnian by recursive perfect-matching enumeration, `O((n-1)!!)`.
pub fn hafnian_matchings(m: &CMat) -> C64 {
    let n = m.nrows();
    if n % 2 == 1 {
        return c(0.0);
    }
    let verts: Vec<usize> = (0..n).collect();
    matchings_rec(m, &verts, false)
}

/// Loop hafnian by enumeration of matchings with self-loops.
pub fn loop_hafnian_matchings(m: &CMat) -> C64 {
    let verts: Vec<usize> = (0..m.nrows()).collect();
    matchings_rec(m, &verts, true)
}

fn matchings_rec(m: &CMat, verts: &[usize], loops: bool) -> C64 {
    let Some((&v, rest)) = verts.split_first() else {
        return c(1.0);
    };
    let mut acc = c(0.0);
    if loops {
        acc += m[(v, v)] * matchings_rec(m, rest, true);
    }
    for (pos, &u) in rest.iter().enumerate() {
        let w = m[(v, u)];
        if w == c(0.0) {
            continue;
        }
        let mut remaining = rest.to_vec();
        remaining.remove(pos);
        acc += w * matchings_rec(m, &remaining, loops);
    }
    acc
}

/// Permanent by Ryser's formula with Gray-code row sums, `O(2^n n)`.
pub fn permanent(m: &CMat) -> C64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "permanent needs a square matrix");
    if n == 0 {
        return c(1.0);
    }
    let mut row_sums = vec![c(0.0); n];
    let mut total = c(0.0);
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        let next = gray ^ (1 << bit);
        let add = next >> bit & 1 == 1;
        for (r, sum) in row_sums.iter_mut().enumerate() {
            if add {
                *sum += m[(r, bit)];
            } else {
                *sum -= m[(r, bit)];
            }
        }
        gray = next;
        let prod: C64 = row_sums.iter().product();
        let size = gray.count_ones() as usize;
        if (n - size) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// `Tor(O) = sum_{Z subset [m]} (-1)^(m-|Z|) / sqrt(det(I - O_Z))` for a
/// `2m x 2m` matrix, `O_Z` keeping rows and columns `(i, i+m)` for `i` in Z.
pub fn torontonian(o: &CMat) -> Result<C64> {
    let dim = o.nrows();
    if dim % 2 != 0 || o.ncols() != dim {
        return Err(GbsError::validation(format!(
            "torontonian needs a 2m x 2m matrix, got {}x{}",
            dim,
            o.ncols()
        )));
    }
    let m = dim / 2;
    if m > 30 {
        return Err(GbsError::Resource(format!("torontonian over {m} modes")));
    }
    let mut total = c(0.0);
    let mut idx = Vec::with_capacity(dim);
    for mask in 0u64..(1u64 << m) {
        idx.clear();
        let kept: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        idx.extend(kept.iter().copied());
        idx.extend(kept.iter().map(|i| i + m));
        let sub = submatrix(o, &idx);
        let id = CMat::identity(idx.len(), idx.len());
        let d = linalg::det(&(id - sub));
        let root = positive_sqrt(d, "det(I - O_Z)")?;
        let sign = if (m - kept.len()) % 2 == 0 { 1.0 } else { -1.0 };
        total += c(sign / root);
    }
    Ok(total)
}

/// Square root of a determinant that must be real and positive.
pub(crate) fn positive_sqrt(d: C64, what: &str) -> Result<f64> {
    if d.re <= 0.0 || d.im.abs() > 1e-8 * d.re.max(1.0) {
        return Err(GbsError::numerical(format!("{what} = {d} is not real-positive")));
    }
    Ok(d.re.sqrt())
}

/// Collapse a complex result to a real one, rejecting a non-negligible
/// imaginary residue.
pub fn real_part_checked(z: C64, what: &str) -> Result<f64> {
    if z.im.abs() > 1e-9 * z.re.abs().max(1e-300) && z.im.abs() > 1e-12 {
        return Err(GbsError::numerical(format!("{what} has imaginary residue {:e}", z.im)));
    }
    Ok(z.re)
}

/// Hafnian of a real symmetric matrix as a real number.
pub fn hafnian_real(m: &linalg::RMat) -> Result<f64> {
    real_part_checked(hafnian(&linalg::to_complex(m)), "hafnian")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMat;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng, complex: bool) -> CMat {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), if complex { rng.gen_range(-1.0..1.0) } else { 0.0 });
                m[(i, j)] = z;
                m[(j, i)] = z;
            }
        }
        m
    }

    fn close(a: C64, b: C64, rel: f64) -> bool {
        (a - b).norm() <= rel * a.norm().max(b.norm()).max(1e-12)
    }

    #[test]
    fn hafnian_small_cases() {
        assert_eq!(hafnian(&CMat::zeros(0, 0)), c(1.0));
        let pair = linalg::to_complex(&RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert!(close(hafnian(&pair), c(1.0), 1e-12));
        let k4 = linalg::to_complex(&RMat::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 }));
        assert!(close(hafnian(&k4), c(3.0), 1e-12));
        assert_eq!(hafnian(&CMat::from_element(3, 3, c(1.0))), c(0.0));
    }

    #[test]
    fn six_cycle_with_chord_has_three_perfect_matchings() {
        let mut a = RMat::zeros(6, 6);
        for i in 0..6 {
            a[(i, (i + 1) % 6)] = 1.0;
            a[((i + 1) % 6, i)] = 1.0;
        }
        a[(0, 3)] = 1.0;
        a[(3, 0)] = 1.0;
        assert!((hafnian_real(&a).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hafnian_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in (2..=10).step_by(2) {
            for complex in [false, true] {
                let m = random_sym(n, &mut rng, complex);
                assert!(close(hafnian(&m), hafnian_matchings(&m), 1e-9), "n={n}");
            }
        }
    }

    #[test]
    fn loop_hafnian_small_cases() {
        let g = CMat::from_element(1, 1, c(2.5));
        assert!(close(loop_hafnian(&g), c(2.5), 1e-12));
        // [[a, c], [c, b]] -> c + ab
        let m = CMat::from_row_slice(2, 2, &[c(2.0), c(3.0), c(3.0), c(5.0)]);
        assert!(close(loop_hafnian(&m), c(13.0), 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut z = random_sym(6, &mut rng, true);
        z.fill_diagonal(c(0.0));
        assert!(close(loop_hafnian(&z), hafnian(&z), 1e-10));
    }

    #[test]
    fn loop_hafnian_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=8 {
            let m = random_sym(n, &mut rng, true);
            assert!(close(loop_hafnian(&m), loop_hafnian_matchings(&m), 1e-9), "n={n}");
        }
    }

    #[test]
    fn loop_hafnian_series_matches_pointwise_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 5;
        let m = random_sym(n, &mut rng, true);
        let d0: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let d1: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.2)).collect();
        // lhaf with loops d0 + y d1 is a polynomial of degree n in y
        let series = loop_hafnian_series(&m, &d0, &d1, n);
        for y in [0.0, 0.3, -1.1, 2.0] {
            let loops: Vec<C64> = d0.iter().zip(&d1).map(|(a, b)| a + b * y).collect();
            let direct = loop_hafnian_with(&m, &loops);
            let poly: C64 = series.iter().enumerate().map(|(k, a)| a * y.powi(k as i32)).sum();
            assert!(close(direct, poly, 1e-9), "y={y}");
        }
    }

    #[test]
    fn repeated_form_matches_expanded_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for reps in [vec![2usize, 0, 1, 3], vec![1, 1, 1, 1], vec![4, 2, 0, 0], vec![0, 0, 0, 0], vec![3, 0, 0, 0]] {
            let m = random_sym(4, &mut rng, true);
            let loops: Vec<C64> = (0..4).map(|i| m[(i, i)] * 0.7 + c(0.1)).collect();
            let pattern = PhotonPattern::new(reps.clone());
            let idx = pattern.repeated_indices();
            let big = reduce_single(&m, &pattern).unwrap();
            let big_loops: Vec<C64> = idx.iter().map(|&i| loops[i]).collect();
            let expect = loop_hafnian_with(&big, &big_loops);
            assert!(close(loop_hafnian_repeated(&m, Some(&loops), &reps), expect, 1e-9), "{reps:?}");
            let expect = hafnian(&big);
            assert!(close(loop_hafnian_repeated(&m, None, &reps), expect, 1e-9), "{reps:?}");
        }
    }

    #[test]
    fn permanent_small_cases() {
        assert!(close(permanent(&CMat::identity(3, 3)), c(1.0), 1e-12));
        assert!(close(permanent(&CMat::from_element(3, 3, c(1.0))), c(6.0), 1e-12));
    }

    #[test]
    fn hafnian_of_bipartite_block_is_permanent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let cm = CMat::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let mut big = CMat::zeros(8, 8);
            big.view_mut((0, 4), (4, 4)).copy_from(&cm);
            big.view_mut((4, 0), (4, 4)).copy_from(&cm.transpose());
            assert!(close(hafnian(&big), permanent(&cm), 1e-9));
        }
    }

    #[test]
    fn reductions() {
        let m = CMat::from_fn(4, 4, |r, s| c((10 * r + s) as f64));
        assert_eq!(reduce_doubled(&m, &PhotonPattern::zeros(2)).unwrap().nrows(), 0);
        let r = reduce_doubled(&m, &PhotonPattern::new(vec![1, 0])).unwrap();
        assert_eq!(r, CMat::from_row_slice(2, 2, &[c(0.0), c(2.0), c(20.0), c(22.0)]));
        let r = reduce_doubled(&m, &PhotonPattern::new(vec![2, 0])).unwrap();
        let idx = [0usize, 0, 2, 2];
        assert_eq!(r, CMat::from_fn(4, 4, |a, b| m[(idx[a], idx[b])]));
        assert!(reduce_doubled(&m, &PhotonPattern::zeros(3)).is_err());

        let m3 = CMat::from_fn(3, 3, |r, s| c((10 * r + s) as f64));
        assert_eq!(reduce_single(&m3, &PhotonPattern::new(vec![1, 1, 1])).unwrap(), m3);
        assert_eq!(reduce_single(&m3, &PhotonPattern::zeros(3)).unwrap().nrows(), 0);
        let idx = [0usize, 0, 2];
        let r = reduce_single(&m3, &PhotonPattern::new(vec![2, 0, 1])).unwrap();
        assert_eq!(r, CMat::from_fn(3, 3, |a, b| m3[(idx[a], idx[b])]));
    }

    #[test]
    fn torontonian_trivial_cases() {
        assert_eq!(torontonian(&CMat::zeros(0, 0)).unwrap(), c(1.0));
        // vacuum: O = 0, any click pattern with clicks sums to zero
        assert!(torontonian(&CMat::zeros(4, 4)).unwrap().norm() < 1e-14);
        // single mode: Tor(O) = -1 + 1/sqrt(det(I - O))
        let o = CMat::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.1), c(0.5)]);
        let expect = -1.0 + 1.0 / (0.25f64 - 0.01).sqrt();
        assert!((torontonian(&o).unwrap().re - expect).abs() < 1e-12);
        assert!(torontonian(&CMat::zeros(3, 3)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn hafnian_scales_linearly_per_vertex(seed in 0u64..1000, t in -2.0f64..2.0, half in 1usize..5) {
            let n = 2 * half;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_sym(n, &mut rng, true);
            let i = seed as usize % n;
            let mut scaled = m.clone();
            for j in 0..n {
                scaled[(i, j)] *= t;
                scaled[(j, i)] *= t;
            }
            prop_assert!(close(hafnian(&scaled), hafnian(&m) * t, 1e-9));
        }
    }
}
