//! Gray-labeled QPSK / 16-QAM mapping, bit interleaving and the enumerated
//! transmit-vector alphabet used by exhaustive MIMO detection.
//!
//! Label tables (bit order as transmitted, first bit leftmost):
//!
//! * QPSK: `(b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`
//! * 16-QAM: `(b0, b1)` selects the in-phase level and `(b2, b3)` the
//!   quadrature level via `00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3`, scaled by
//!   `1 / sqrt(10)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Default cap on `|alphabet|^n_tx`.
pub const DEFAULT_VECTOR_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModemError {
    #[error("bit vector length {len} is not a multiple of {group} (bits per symbol x antennas)")]
    Length { len: usize, group: usize },
    #[error("vector alphabet of {size} entries exceeds the cap of {cap}")]
    AlphabetTooLarge { size: usize, cap: usize },
    #[error("unknown modulation {0:?} (expected qpsk or qam16)")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Qam16,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    /// Constellation point for an integer label whose most significant bit is
    /// the first transmitted bit.
    pub fn point(self, label: usize) -> Complex64 {
        match self {
            Modulation::Qpsk => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let bi = (label >> 1) & 1;
                let bq = label & 1;
                Complex64::new(s * (1.0 - 2.0 * bi as f64), s * (1.0 - 2.0 * bq as f64))
            }
            Modulation::Qam16 => {
                const LEVEL: [f64; 4] = [-3.0, -1.0, 3.0, 1.0]; // indexed by 2-bit Gray pair
                let s = 1.0 / 10f64.sqrt();
                Complex64::new(s * LEVEL[(label >> 2) & 3], s * LEVEL[label & 3])
            }
        }
    }

    /// All points, indexed by label.
    pub fn alphabet(self) -> Vec<Complex64> {
        (0..self.order()).map(|l| self.point(l)).collect()
    }

    /// Maps `bits_per_symbol` bits (first bit most significant) to a point.
    pub fn map_bits(self, bits: &[u8]) -> Complex64 {
        let label = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        self.point(label)
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "qam16",
        })
    }
}

impl FromStr for Modulation {
    type Err = ModemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            "qam16" | "16qam" | "16-qam" => Ok(Modulation::Qam16),
            _ => Err(ModemError::Unknown(s.to_string())),
        }
    }
}

/// Maps bits onto an `n_tx x n_d` symbol grid. Channel use `t`, antenna `a`
/// carries bits `[(t * n_tx + a) * k, (t * n_tx + a + 1) * k)`.
pub fn modulate(
    bits: &[u8],
    scheme: Modulation,
    n_tx: usize,
) -> Result<DMatrix<Complex64>, ModemError> {
    let k = scheme.bits_per_symbol();
    let group = k * n_tx;
    if n_tx == 0 || bits.len() % group != 0 {
        return Err(ModemError::Length {
            len: bits.len(),
            group,
        });
    }
    let n_d = bits.len() / group;
    Ok(DMatrix::from_fn(n_tx, n_d, |a, t| {
        let start = (t * n_tx + a) * k;
        scheme.map_bits(&bits[start..start + k])
    }))
}

/// Seeded bit interleaver: `apply(v)[i] = v[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    permutation: Vec<usize>,
    seed: u64,
}

impl Interleaver {
    pub fn new(seed: u64, n: usize) -> Self {
        let mut permutation: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        permutation.shuffle(&mut rng);
        Self { permutation, seed }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            permutation: (0..n).collect(),
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Position in the interleaved sequence of each original index.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.len()];
        for (i, &p) in self.permutation.iter().enumerate() {
            pos[p] = i;
        }
        pos
    }

    pub fn apply<T: Copy>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.len(), "interleaver length mismatch");
        self.permutation.iter().map(|&p| v[p]).collect()
    }

    pub fn invert<T: Copy + Default>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.len(), "interleaver length mismatch");
        let mut out = vec![T::default(); v.len()];
        for (i, &p) in self.permutation.iter().enumerate() {
            out[p] = v[i];
        }
        out
    }
}

pub fn make_interleaver(seed: u64, n: usize) -> Interleaver {
    Interleaver::new(seed, n)
}

/// Every transmit vector in `X^n_tx`, with per-bit index partitions.
///
/// Vector `v` puts label digit `a` (base `|X|`, most significant first) on
/// antenna `a`, so bit position `p` within a channel use is bit
/// `k * n_tx - 1 - p` of `v`.
#[derive(Debug, Clone)]
pub struct VectorAlphabet {
    scheme: Modulation,
    n_tx: usize,
    /// Row-major `len x n_tx` symbols.
    symbols: Vec<Complex64>,
    zeros: Vec<Vec<usize>>,
    ones: Vec<Vec<usize>>,
}

impl VectorAlphabet {
    pub fn new(scheme: Modulation, n_tx: usize) -> Result<Self, ModemError> {
        Self::with_cap(scheme, n_tx, DEFAULT_VECTOR_CAP)
    }

    pub fn with_cap(scheme: Modulation, n_tx: usize, cap: usize) -> Result<Self, ModemError> {
        let k = scheme.bits_per_symbol();
        let total_bits = k * n_tx;
        let size = if total_bits >= usize::BITS as usize {
            usize::MAX
        } else {
            1usize << total_bits
        };
        if size > cap {
            return Err(ModemError::AlphabetTooLarge { size, cap });
        }
        let mask = scheme.order() - 1;
        let mut symbols = Vec::with_capacity(size * n_tx);
        for v in 0..size {
            for a in 0..n_tx {
                let shift = k * (n_tx - 1 - a);
                symbols.push(scheme.point((v >> shift) & mask));
            }
        }
        let mut zeros = vec![Vec::with_capacity(size / 2); total_bits];
        let mut ones = vec![Vec::with_capacity(size / 2); total_bits];
        for v in 0..size {
            for p in 0..total_bits {
                if (v >> (total_bits - 1 - p)) & 1 == 0 {
                    zeros[p].push(v);
                } else {
                    ones[p].push(v);
                }
            }
        }
        Ok(Self {
            scheme,
            n_tx,
            symbols,
            zeros,
            ones,
        })
    }

    pub fn scheme(&self) -> Modulation {
        self.scheme
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn len(&self) -> usize {
        self.symbols.len() / self.n_tx.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Bits carried per channel use (`k * n_tx`).
    pub fn bits_per_use(&self) -> usize {
        self.zeros.len()
    }

    pub fn vector(&self, v: usize) -> &[Complex64] {
        &self.symbols[v * self.n_tx..(v + 1) * self.n_tx]
    }

    /// Indices of vectors whose bit `p` is 0.
    pub fn zeros(&self, p: usize) -> &[usize] {
        &self.zeros[p]
    }

    pub fn ones(&self, p: usize) -> &[usize] {
        &self.ones[p]
    }

    /// Bit `p` of vector `v`.
    pub fn bit(&self, v: usize, p: usize) -> u8 {
        ((v >> (self.bits_per_use() - 1 - p)) & 1) as u8
    }
}

pub fn build_vector_alphabet(scheme: Modulation, n_tx: usize) -> Result<VectorAlphabet, ModemError> {
    VectorAlphabet::new(scheme, n_tx)
}
