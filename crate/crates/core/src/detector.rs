//! Exhaustive max-log MIMO detection and the rank-one incremental LLR update.
//!
//! For each coded bit `i` carried by channel use `t`,
//!
//! ```text
//! L_i = ( min_{x in Q1} |y_t - H x|^2 - min_{x in Q0} |y_t - H x|^2 ) / (2 sigma^2)
//! ```
//!
//! Bit `i = t * k * N_t + p` where `p` is the bit position inside the channel
//! use (antenna-major), matching [`crate::modem::modulate`].

use crate::channel::ChannelMatrix;
use crate::modem::VectorAlphabet;
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DetectorError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

fn check_dims(
    y_d: &DMatrix<Complex64>,
    h: &ChannelMatrix,
    alphabet: &VectorAlphabet,
) -> Result<(), DetectorError> {
    if h.n_tx() != alphabet.n_tx() {
        return Err(DetectorError::Dimension(format!(
            "channel has {} inputs, alphabet has {} antennas",
            h.n_tx(),
            alphabet.n_tx()
        )));
    }
    if y_d.nrows() != h.n_rx() {
        return Err(DetectorError::Dimension(format!(
            "received grid has {} rows, channel has {} outputs",
            y_d.nrows(),
            h.n_rx()
        )));
    }
    Ok(())
}

/// `argmin` over a subset; the lowest vector index wins ties.
#[inline]
fn argmin(dist: &[f64], subset: &[usize]) -> (usize, f64) {
    let mut best = (subset[0], dist[subset[0]]);
    for &v in &subset[1..] {
        if dist[v] < best.1 {
            best = (v, dist[v]);
        }
    }
    best
}

/// Stored argmin vectors and residuals behind the incremental update.
#[derive(Debug, Clone)]
pub struct DetectionCache {
    n_rx: usize,
    n_tx: usize,
    bits_per_use: usize,
    noise_var: f64,
    /// Channel the residuals refer to (`H~ + dH`).
    channel: ChannelMatrix,
    /// Argmin vector index over `Q0` / `Q1` for every bit.
    x0: Vec<usize>,
    x1: Vec<usize>,
    /// Symbols of those vectors, `N x N_t` row-major.
    x0_sym: Vec<Complex64>,
    x1_sym: Vec<Complex64>,
    /// Residuals `y_t - H x0`, `y_t - H x1`, `N x N_r` row-major.
    p: Vec<Complex64>,
    q: Vec<Complex64>,
    base_llrs: Vec<f64>,
}

impl DetectionCache {
    pub fn len(&self) -> usize {
        self.base_llrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base_llrs.is_empty()
    }

    pub fn base_llrs(&self) -> &[f64] {
        &self.base_llrs
    }

    pub fn channel(&self) -> &ChannelMatrix {
        &self.channel
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn argmins(&self, i: usize) -> (usize, usize) {
        (self.x0[i], self.x1[i])
    }

    /// Residuals `(p_i, q_i)` of bit `i`.
    pub fn residuals(&self, i: usize) -> (&[Complex64], &[Complex64]) {
        let r = i * self.n_rx..(i + 1) * self.n_rx;
        (&self.p[r.clone()], &self.q[r])
    }

    /// Channel use carrying bit `i`.
    pub fn channel_use(&self, i: usize) -> usize {
        i / self.bits_per_use
    }

    /// Writes the LLRs obtained when entry `(r, c)` of the cached channel is
    /// offset by `h`, keeping the cached argmin vectors.
    ///
    /// `L_i' = L_i + Re(h (conj(p_ir) x0_ic - conj(q_ir) x1_ic)) / sigma^2
    ///        - |h|^2 (|x0_ic|^2 - |x1_ic|^2) / (2 sigma^2)`
    pub fn approx_llrs_into(&self, h: Complex64, r: usize, c: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        let inv = 1.0 / self.noise_var;
        let h2 = h.norm_sqr();
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.x0_sym[i * self.n_tx + c];
            let b = self.x1_sym[i * self.n_tx + c];
            let pr = self.p[i * self.n_rx + r];
            let qr = self.q[i * self.n_rx + r];
            let lin = (h * (pr.conj() * a - qr.conj() * b)).re;
            *o = self.base_llrs[i] + 2.0 * inv * lin - h2 * inv * (a.norm_sqr() - b.norm_sqr());
        }
    }

    pub fn approx_llrs(&self, h: Complex64, r: usize, c: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.approx_llrs_into(h, r, c, &mut out);
        out
    }

    /// Commits offset `h` on entry `(r, c)`: only row `r` of each residual
    /// changes.
    pub fn advance(&mut self, h: Complex64, r: usize, c: usize) {
        if h == Complex64::new(0.0, 0.0) {
            return;
        }
        let mut llrs = vec![0.0; self.len()];
        self.approx_llrs_into(h, r, c, &mut llrs);
        self.base_llrs = llrs;
        for i in 0..self.len() {
            self.p[i * self.n_rx + r] -= h * self.x0_sym[i * self.n_tx + c];
            self.q[i * self.n_rx + r] -= h * self.x1_sym[i * self.n_tx + c];
        }
        self.channel[(r, c)] += h;
    }

    /// Number of bits whose cached argmins differ from a fresh exhaustive
    /// search under the cached channel.
    pub fn argmin_drift(&self, y_d: &DMatrix<Complex64>, alphabet: &VectorAlphabet) -> usize {
        let mut dist = vec![0.0; alphabet.len()];
        let k = self.bits_per_use;
        let mut drift = 0;
        for t in 0..y_d.ncols() {
            distances(y_d, t, &self.channel, alphabet, &mut dist);
            for p in 0..k {
                let i = t * k + p;
                let (v0, _) = argmin(&dist, alphabet.zeros(p));
                let (v1, _) = argmin(&dist, alphabet.ones(p));
                if v0 != self.x0[i] || v1 != self.x1[i] {
                    drift += 1;
                }
            }
        }
        drift
    }
}

/// LLRs after offsetting entry `(r, c)` of the cached channel by `h`, with
/// the cached argmins held fixed.
pub fn approx_llrs(cache: &DetectionCache, h: Complex64, r: usize, c: usize) -> Vec<f64> {
    cache.approx_llrs(h, r, c)
}

/// Commits offset `h` on entry `(r, c)` to the cache.
pub fn advance_cache(cache: &mut DetectionCache, h: Complex64, r: usize, c: usize) {
    cache.advance(h, r, c);
}

/// Squared distances `|y_t - H x_v|^2` for every vector `v`.
fn distances(
    y_d: &DMatrix<Complex64>,
    t: usize,
    h: &ChannelMatrix,
    alphabet: &VectorAlphabet,
    dist: &mut [f64],
) {
    let (n_rx, n_tx) = (h.n_rx(), h.n_tx());
    for (v, d) in dist.iter_mut().enumerate() {
        let x = alphabet.vector(v);
        let mut acc = 0.0;
        for r in 0..n_rx {
            let mut e = y_d[(r, t)];
            for c in 0..n_tx {
                e -= h[(r, c)] * x[c];
            }
            acc += e.norm_sqr();
        }
        *d = acc;
    }
}

/// Max-log LLRs for every coded bit together with the detection cache.
pub fn max_log_detect(
    y_d: &DMatrix<Complex64>,
    h: &ChannelMatrix,
    noise_var: f64,
    alphabet: &VectorAlphabet,
) -> Result<(Vec<f64>, DetectionCache), DetectorError> {
    check_dims(y_d, h, alphabet)?;
    let (n_rx, n_tx) = (h.n_rx(), h.n_tx());
    let k = alphabet.bits_per_use();
    let n = y_d.ncols() * k;
    let mut cache = DetectionCache {
        n_rx,
        n_tx,
        bits_per_use: k,
        noise_var,
        channel: h.clone(),
        x0: Vec::with_capacity(n),
        x1: Vec::with_capacity(n),
        x0_sym: Vec::with_capacity(n * n_tx),
        x1_sym: Vec::with_capacity(n * n_tx),
        p: Vec::with_capacity(n * n_rx),
        q: Vec::with_capacity(n * n_rx),
        base_llrs: Vec::with_capacity(n),
    };
    let mut dist = vec![0.0; alphabet.len()];
    let residual = |t: usize, v: usize, out: &mut Vec<Complex64>| {
        let x = alphabet.vector(v);
        for r in 0..n_rx {
            let mut e = y_d[(r, t)];
            for c in 0..n_tx {
                e -= h[(r, c)] * x[c];
            }
            out.push(e);
        }
    };
    for t in 0..y_d.ncols() {
        distances(y_d, t, h, alphabet, &mut dist);
        for p in 0..k {
            let (v0, d0) = argmin(&dist, alphabet.zeros(p));
            let (v1, d1) = argmin(&dist, alphabet.ones(p));
            cache.x0.push(v0);
            cache.x1.push(v1);
            cache.x0_sym.extend_from_slice(alphabet.vector(v0));
            cache.x1_sym.extend_from_slice(alphabet.vector(v1));
            residual(t, v0, &mut cache.p);
            residual(t, v1, &mut cache.q);
            cache.base_llrs.push((d1 - d0) / noise_var);
        }
    }
    Ok((cache.base_llrs.clone(), cache))
}

/// Exhaustive detector state that re-evaluates every vector distance under a
/// rank-one channel change in `O(n_d |X|^N_t)`, without pinning argmins.
#[derive(Debug, Clone)]
pub struct ExhaustiveDetector<'a> {
    alphabet: &'a VectorAlphabet,
    noise_var: f64,
    n_rx: usize,
    n_uses: usize,
    channel: ChannelMatrix,
    /// `y_t - H x_v`, indexed `(t * |X| + v) * N_r + r`.
    residual: Vec<Complex64>,
    /// `|y_t - H x_v|^2`, indexed `t * |X| + v`.
    dist: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> ExhaustiveDetector<'a> {
    pub fn new(
        y_d: &DMatrix<Complex64>,
        h: &ChannelMatrix,
        noise_var: f64,
        alphabet: &'a VectorAlphabet,
    ) -> Result<Self, DetectorError> {
        check_dims(y_d, h, alphabet)?;
        let (n_rx, n_tx) = (h.n_rx(), h.n_tx());
        let nv = alphabet.len();
        let n_uses = y_d.ncols();
        let mut residual = Vec::with_capacity(n_uses * nv * n_rx);
        let mut dist = Vec::with_capacity(n_uses * nv);
        for t in 0..n_uses {
            for v in 0..nv {
                let x = alphabet.vector(v);
                let mut acc = 0.0;
                for r in 0..n_rx {
                    let mut e = y_d[(r, t)];
                    for c in 0..n_tx {
                        e -= h[(r, c)] * x[c];
                    }
                    acc += e.norm_sqr();
                    residual.push(e);
                }
                dist.push(acc);
            }
        }
        Ok(Self {
            alphabet,
            noise_var,
            n_rx,
            n_uses,
            channel: h.clone(),
            residual,
            dist,
            scratch: vec![0.0; n_uses * nv],
        })
    }

    pub fn channel(&self) -> &ChannelMatrix {
        &self.channel
    }

    pub fn n_bits(&self) -> usize {
        self.n_uses * self.alphabet.bits_per_use()
    }

    fn llrs_from(&self, dist: &[f64], out: &mut [f64]) {
        let nv = self.alphabet.len();
        let k = self.alphabet.bits_per_use();
        for t in 0..self.n_uses {
            let d = &dist[t * nv..(t + 1) * nv];
            for p in 0..k {
                let (_, d0) = argmin(d, self.alphabet.zeros(p));
                let (_, d1) = argmin(d, self.alphabet.ones(p));
                out[t * k + p] = (d1 - d0) / self.noise_var;
            }
        }
    }

    /// LLRs under the current channel.
    pub fn llrs_into(&self, out: &mut [f64]) {
        self.llrs_from(&self.dist, out);
    }

    fn shifted_distances(&mut self, h: Complex64, r: usize, c: usize) {
        let nv = self.alphabet.len();
        let h2 = h.norm_sqr();
        for t in 0..self.n_uses {
            for v in 0..nv {
                let xc = self.alphabet.vector(v)[c];
                let idx = t * nv + v;
                let e = self.residual[idx * self.n_rx + r];
                self.scratch[idx] =
                    self.dist[idx] - 2.0 * (e.conj() * h * xc).re + h2 * xc.norm_sqr();
            }
        }
    }

    /// Full max-log LLRs with entry `(r, c)` of the current channel offset by `h`.
    pub fn llrs_with_offset_into(&mut self, h: Complex64, r: usize, c: usize, out: &mut [f64]) {
        self.shifted_distances(h, r, c);
        let scratch = std::mem::take(&mut self.scratch);
        self.llrs_from(&scratch, out);
        self.scratch = scratch;
    }

    /// Commits offset `h` on entry `(r, c)`.
    pub fn advance(&mut self, h: Complex64, r: usize, c: usize) {
        if h == Complex64::new(0.0, 0.0) {
            return;
        }
        let nv = self.alphabet.len();
        for t in 0..self.n_uses {
            for v in 0..nv {
                let xc = self.alphabet.vector(v)[c];
                let idx = t * nv + v;
                let e = &mut self.residual[idx * self.n_rx + r];
                let before = e.norm_sqr();
                *e -= h * xc;
                self.dist[idx] += e.norm_sqr() - before;
            }
        }
        self.channel[(r, c)] += h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, sample_channel};
    use crate::modem::{build_vector_alphabet, Modulation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Straight evaluation of the max-log rule from the alphabet definition.
    fn brute_force(
        y_d: &DMatrix<Complex64>,
        h: &ChannelMatrix,
        noise_var: f64,
        alphabet: &VectorAlphabet,
    ) -> Vec<f64> {
        let k = alphabet.bits_per_use();
        let mut out = Vec::new();
        for t in 0..y_d.ncols() {
            for p in 0..k {
                let mut best = [f64::INFINITY; 2];
                for v in 0..alphabet.len() {
                    let x = nalgebra::DVector::from_column_slice(alphabet.vector(v));
                    let d = (y_d.column(t) - &h.0 * x).norm_squared();
                    let b = alphabet.bit(v, p) as usize;
                    best[b] = best[b].min(d);
                }
                out.push((best[1] - best[0]) / noise_var);
            }
        }
        out
    }

    fn random_instance(
        rng: &mut ChaCha8Rng,
        m: Modulation,
        n_d: usize,
    ) -> (DMatrix<Complex64>, ChannelMatrix, f64, VectorAlphabet) {
        let alphabet = build_vector_alphabet(m, 2).unwrap();
        let h = sample_channel(rng, 2, 2);
        let nv = rng.random_range(0.02..1.0);
        let bits: Vec<u8> = (0..n_d * alphabet.bits_per_use()).map(|_| rng.random_range(0..2)).collect();
        let x = crate::modem::modulate(&bits, m, 2).unwrap();
        let y = crate::channel::transmit(&x, &h, nv, rng).unwrap();
        (y, h, nv, alphabet)
    }

    #[test]
    fn scalar_qpsk_example() {
        let a = build_vector_alphabet(Modulation::Qpsk, 1).unwrap();
        let h = ChannelMatrix::from_row_slice(1, 1, &[c(1.0, 0.0)]);
        let y = DMatrix::from_element(1, 1, c(0.5, 0.0));
        let (llrs, _) = max_log_detect(&y, &h, 1.0, &a).unwrap();
        assert!((llrs[0] - 1.414_213_56).abs() < 1e-8);
        assert_eq!(llrs[1], 0.0);
        let (llrs, _) = max_log_detect(&DMatrix::zeros(1, 1), &h, 1.0, &a).unwrap();
        assert!(llrs.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for m in [Modulation::Qpsk, Modulation::Qam16] {
            for _ in 0..20 {
                let (y, h, nv, a) = random_instance(&mut rng, m, 6);
                let (llrs, cache) = max_log_detect(&y, &h, nv, &a).unwrap();
                let oracle = brute_force(&y, &h, nv, &a);
                for (x, o) in llrs.iter().zip(&oracle) {
                    assert!((x - o).abs() < 1e-9);
                }
                let ex = ExhaustiveDetector::new(&y, &h, nv, &a).unwrap();
                let mut out = vec![0.0; llrs.len()];
                ex.llrs_into(&mut out);
                assert_eq!(out, llrs);
                assert_eq!(cache.base_llrs(), &llrs[..]);
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let a = build_vector_alphabet(Modulation::Qpsk, 2).unwrap();
        let h = ChannelMatrix::zeros(2, 1);
        assert!(max_log_detect(&DMatrix::zeros(2, 3), &h, 1.0, &a).is_err());
        let h = ChannelMatrix::zeros(2, 2);
        assert!(max_log_detect(&DMatrix::zeros(3, 3), &h, 1.0, &a).is_err());
    }

    fn assert_cache_consistent(cache: &DetectionCache, y: &DMatrix<Complex64>, a: &VectorAlphabet) {
        let n_rx = cache.channel().n_rx();
        for i in 0..cache.len() {
            let t = cache.channel_use(i);
            let (v0, v1) = cache.argmins(i);
            let (p, q) = cache.residuals(i);
            let x0 = nalgebra::DVector::from_column_slice(a.vector(v0));
            let x1 = nalgebra::DVector::from_column_slice(a.vector(v1));
            let rp = y.column(t) - &cache.channel().0 * x0;
            let rq = y.column(t) - &cache.channel().0 * x1;
            for r in 0..n_rx {
                assert!((rp[r] - p[r]).norm() < 1e-12);
                assert!((rq[r] - q[r]).norm() < 1e-12);
            }
            let l = (rq.norm_squared() - rp.norm_squared()) / cache.noise_var();
            assert!((l - cache.base_llrs()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn approx_at_zero_is_identity_and_constant_modulus_drops_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (y, h, nv, a) = random_instance(&mut rng, Modulation::Qpsk, 8);
        let (_, cache) = max_log_detect(&y, &h, nv, &a).unwrap();
        assert_eq!(cache.approx_llrs(c(0.0, 0.0), 1, 0), cache.base_llrs());
        // For QPSK the update is linear in h.
        let g = c(0.03, -0.02);
        let l1 = cache.approx_llrs(g, 0, 1);
        let l2 = cache.approx_llrs(g * 2.0, 0, 1);
        for i in 0..cache.len() {
            let b = cache.base_llrs()[i];
            assert!(((l2[i] - b) - 2.0 * (l1[i] - b)).abs() < 1e-9);
        }
    }

    #[test]
    fn advance_keeps_residuals_consistent_and_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (y, h, nv, a) = random_instance(&mut rng, Modulation::Qam16, 5);
        let (_, mut cache) = max_log_detect(&y, &h, nv, &a).unwrap();
        let before = cache.clone();
        cache.advance(c(0.0, 0.0), 0, 0);
        assert_eq!(cache.base_llrs(), before.base_llrs());
        let (h1, h2) = (complex_gaussian(&mut rng, 0.01), complex_gaussian(&mut rng, 0.01));
        cache.advance(h1, 1, 0);
        assert_cache_consistent(&cache, &y, &a);
        cache.advance(h2, 1, 0);
        assert_cache_consistent(&cache, &y, &a);
        let mut once = before.clone();
        once.advance(h1 + h2, 1, 0);
        for (x, z) in cache.base_llrs().iter().zip(once.base_llrs()) {
            assert!((x - z).abs() < 1e-9);
        }
    }

    #[test]
    fn exhaustive_offset_matches_fresh_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (y, h, nv, a) = random_instance(&mut rng, Modulation::Qpsk, 10);
        let mut ex = ExhaustiveDetector::new(&y, &h, nv, &a).unwrap();
        let mut got = vec![0.0; ex.n_bits()];
        for _ in 0..10 {
            let g = complex_gaussian(&mut rng, 0.05);
            let (r, cc) = (rng.random_range(0..2), rng.random_range(0..2));
            ex.llrs_with_offset_into(g, r, cc, &mut got);
            let mut moved = ex.channel().clone();
            moved[(r, cc)] += g;
            let want = brute_force(&y, &moved, nv, &a);
            for (x, w) in got.iter().zip(&want) {
                assert!((x - w).abs() < 1e-9);
            }
            ex.advance(g, r, cc);
            ex.llrs_into(&mut got);
            let want = brute_force(&y, ex.channel(), nv, &a);
            for (x, w) in got.iter().zip(&want) {
                assert!((x - w).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn symmetry_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let (y, h, nv, a) = random_instance(&mut rng, Modulation::Qam16, 4);
        let (base, _) = max_log_detect(&y, &h, nv, &a).unwrap();
        let neg_h = ChannelMatrix(-h.0.clone());
        let (neg, _) = max_log_detect(&(-y.clone()), &neg_h, nv, &a).unwrap();
        let u = Complex64::from_polar(1.0, 0.7);
        let (rot, _) = max_log_detect(&(y.clone() * u), &ChannelMatrix(h.0.clone() * u), nv, &a).unwrap();
        for i in 0..base.len() {
            assert!((base[i] - neg[i]).abs() < 1e-9);
            assert!((base[i] - rot[i]).abs() < 1e-9);
        }
    }
}
