//! Rayleigh block fading, AWGN and pilot construction.

use crate::modem::Modulation;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::ops::{Deref, DerefMut};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChannelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("need at least {n_tx} pilot symbols, got {n_p}")]
    TooFewPilots { n_p: usize, n_tx: usize },
}

/// Complex `N_r x N_t` channel matrix (true, estimated or perturbation).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(pub DMatrix<Complex64>);

impl ChannelMatrix {
    pub fn zeros(n_rx: usize, n_tx: usize) -> Self {
        Self(DMatrix::zeros(n_rx, n_tx))
    }

    pub fn from_row_slice(n_rx: usize, n_tx: usize, data: &[Complex64]) -> Self {
        Self(DMatrix::from_row_slice(n_rx, n_tx, data))
    }

    pub fn n_rx(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.0.ncols()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Deref for ChannelMatrix {
    type Target = DMatrix<Complex64>;
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl DerefMut for ChannelMatrix {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.0
    }
}

/// Link dimensions shared by every frame of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_pilot: usize,
    pub n_data: usize,
    /// Total complex noise variance `2 sigma^2`.
    pub noise_var: f64,
    /// Per-symbol energy; 1 for the unit-energy alphabets used here.
    pub es: f64,
}

impl SystemConfig {
    /// Channel uses per frame.
    pub fn block_len(&self) -> usize {
        self.n_pilot + self.n_data
    }

    /// Coded bits carried by the data part.
    pub fn coded_bits(&self, scheme: Modulation) -> usize {
        self.n_data * self.n_tx * scheme.bits_per_symbol()
    }
}

/// `2 sigma^2` for an SNR defined as `E_s N_t / (2 sigma^2 N_r)`.
pub fn snr_db_to_noise_var(snr_db: f64, n_tx: usize, n_rx: usize, es: f64) -> f64 {
    es * n_tx as f64 / (n_rx as f64 * 10f64.powf(snr_db / 10.0))
}

/// Circularly-symmetric complex Gaussian sample with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// I.i.d. `CN(0, 1)` channel matrix.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, n_rx: usize, n_tx: usize) -> ChannelMatrix {
    ChannelMatrix(DMatrix::from_fn(n_rx, n_tx, |_, _| complex_gaussian(rng, 1.0)))
}

/// `Y = H X + Z` with `Z` i.i.d. `CN(0, noise_var)`. A zero `noise_var`
/// yields the noiseless output and draws nothing from `rng`.
pub fn transmit<R: Rng + ?Sized>(
    x: &DMatrix<Complex64>,
    h: &ChannelMatrix,
    noise_var: f64,
    rng: &mut R,
) -> Result<DMatrix<Complex64>, ChannelError> {
    if h.n_tx() != x.nrows() {
        return Err(ChannelError::Dimension(format!(
            "channel has {} inputs but symbol grid has {} rows",
            h.n_tx(),
            x.nrows()
        )));
    }
    let mut y = &h.0 * x;
    if noise_var > 0.0 {
        // Column-major traversal: channel use by channel use.
        for z in y.iter_mut() {
            *z += complex_gaussian(rng, noise_var);
        }
    }
    Ok(y)
}

/// Sign-tiled orthogonal pilots.
///
/// Entry `(a, t)` is `s * (-1)^popcount(a & (t mod m))`, with `m` the smallest
/// power of two `>= n_tx` and `s` a unit-energy alphabet point. Whenever
/// `n_p` is a multiple of `m` the rows are orthogonal and `X_p X_p^H = n_p I`.
pub fn make_pilots(
    n_p: usize,
    n_tx: usize,
    scheme: Modulation,
) -> Result<DMatrix<Complex64>, ChannelError> {
    if n_p < n_tx {
        return Err(ChannelError::TooFewPilots { n_p, n_tx });
    }
    let base = match scheme {
        Modulation::Qpsk => scheme.map_bits(&[0, 0]),
        // (3 + j) / sqrt(10): a 16-QAM point with unit energy.
        Modulation::Qam16 => scheme.map_bits(&[1, 0, 1, 1]),
    };
    let m = n_tx.next_power_of_two();
    Ok(DMatrix::from_fn(n_tx, n_p, |a, t| {
        if (a & (t % m)).count_ones() % 2 == 0 {
            base
        } else {
            -base
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn snr_conversion() {
        assert!((snr_db_to_noise_var(0.0, 2, 2, 1.0) - 1.0).abs() < 1e-15);
        assert!((snr_db_to_noise_var(10.0, 2, 2, 1.0) - 0.1).abs() < 1e-15);
        assert!((snr_db_to_noise_var(0.0, 2, 1, 1.0) - 2.0).abs() < 1e-15);
    }

    fn moments(samples: &[f64]) -> (f64, f64) {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn channel_entry_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws: Vec<ChannelMatrix> = (0..100_000).map(|_| sample_channel(&mut rng, 2, 2)).collect();
        let n = draws.len() as f64;
        let pw: Vec<f64> = draws.iter().map(|h| h[(0, 1)].norm_sqr()).collect();
        let (m, v) = moments(&pw);
        assert!((m - 1.0).abs() <= 3.0 * (v / n).sqrt(), "variance {m}");
        let re: Vec<f64> = draws.iter().map(|h| h[(1, 0)].re).collect();
        let (m, v) = moments(&re);
        assert!(m.abs() <= 3.0 * (v / n).sqrt());
        assert!((v - 0.5).abs() < 0.01);
        // Cross-entry correlation E[h00 conj(h11)].
        let corr: Vec<f64> = draws.iter().map(|h| (h[(0, 0)] * h[(1, 1)].conj()).re).collect();
        let (m, v) = moments(&corr);
        assert!(m.abs() <= 3.0 * (v / n).sqrt());
    }

    #[test]
    fn noiseless_transmit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = ChannelMatrix::from_row_slice(1, 1, &[Complex64::new(2.0, 0.0)]);
        let x = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let y = transmit(&x, &h, 0.0, &mut rng).unwrap();
        assert_eq!(y[(0, 0)], Complex64::new(2.0, 0.0));
        let bad = DMatrix::from_element(2, 1, Complex64::new(1.0, 0.0));
        assert!(transmit(&bad, &h, 0.0, &mut rng).is_err());
    }

    #[test]
    fn noise_only_output_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = sample_channel(&mut rng, 2, 2);
        let x = DMatrix::zeros(2, 50_000);
        let y = transmit(&x, &h, 0.3, &mut rng).unwrap();
        let p: Vec<f64> = y.iter().map(|z| z.norm_sqr()).collect();
        let (m, v) = moments(&p);
        assert!((m - 0.3).abs() <= 3.0 * (v / p.len() as f64).sqrt());
    }

    #[test]
    fn transmit_is_linear_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = sample_channel(&mut rng, 2, 2);
        let x1 = DMatrix::from_fn(2, 3, |_, _| complex_gaussian(&mut rng, 1.0));
        let x2 = DMatrix::from_fn(2, 3, |_, _| complex_gaussian(&mut rng, 1.0));
        let (a, b) = (Complex64::new(0.5, -1.0), Complex64::new(2.0, 0.25));
        let lhs = transmit(&(&x1 * a + &x2 * b), &h, 0.0, &mut rng).unwrap();
        let rhs = transmit(&x1, &h, 0.0, &mut rng).unwrap() * a + transmit(&x2, &h, 0.0, &mut rng).unwrap() * b;
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = sample_channel(&mut ChaCha8Rng::seed_from_u64(9), 2, 2);
        let b = sample_channel(&mut ChaCha8Rng::seed_from_u64(9), 2, 2);
        assert_eq!(a, b);
    }

    #[test]
    fn pilot_gram_matrices() {
        let xp = make_pilots(2, 2, Modulation::Qpsk).unwrap();
        let g = &xp * xp.adjoint();
        assert!((g[(0, 0)].re - 2.0).abs() < 1e-12 && (g[(1, 1)].re - 2.0).abs() < 1e-12);
        assert!(g[(0, 1)].norm() < 1e-12);

        let xp = make_pilots(15, 2, Modulation::Qpsk).unwrap();
        let g = &xp * xp.adjoint();
        assert!((g[(0, 0)].re - 15.0).abs() < 1e-12 && (g[(1, 1)].re - 15.0).abs() < 1e-12);
        assert!(g[(0, 1)].norm() <= 1.0 + 1e-12);
        assert!(xp.iter().all(|x| (x.norm_sqr() - 1.0).abs() < 1e-12));

        let xp = make_pilots(8, 4, Modulation::Qam16).unwrap();
        let g = &xp * xp.adjoint();
        assert!((g - DMatrix::identity(4, 4) * Complex64::new(8.0, 0.0)).iter().all(|z| z.norm() < 1e-12));

        assert!(matches!(
            make_pilots(1, 2, Modulation::Qpsk),
            Err(ChannelError::TooFewPilots { n_p: 1, n_tx: 2 })
        ));
    }
}
