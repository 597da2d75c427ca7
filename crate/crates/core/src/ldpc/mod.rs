//! Sparse binary parity-check matrices, alist I/O, GF(2) systematic encoding
//! and flooding belief-propagation decoding.

mod alist;
mod bp;
mod encoder;
pub mod wimax;

pub use alist::{load_parity_alist, AlistError};
pub use bp::{check_node_messages, BpConfig, BpDecoder, BpOutput};
pub use encoder::{build_encoder, SystematicEncoder};

use thiserror::Error;

/// Errors raised by parity-check matrix construction, encoding and decoding.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LdpcError {
    #[error("vector length {got} does not match code length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("row {row}: column index {col} out of range for {n_cols} columns")]
    IndexOutOfRange { row: usize, col: usize, n_cols: usize },
    #[error("row {row}: duplicate column index {col}")]
    DuplicateIndex { row: usize, col: usize },
    #[error("parity-check matrix is rank deficient: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },
    #[error("invalid BP configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Sparse binary `M x N` parity-check matrix stored as row and column adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n_cols: usize,
    row_supports: Vec<Vec<usize>>,
    col_supports: Vec<Vec<usize>>,
    max_row_weight: usize,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-row column indices (0-based). Each row is
    /// sorted; duplicates and out-of-range indices are rejected.
    pub fn from_row_supports(
        n_cols: usize,
        rows: Vec<Vec<usize>>,
    ) -> Result<Self, LdpcError> {
        let mut row_supports = rows;
        let mut col_supports = vec![Vec::new(); n_cols];
        for (i, row) in row_supports.iter_mut().enumerate() {
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(LdpcError::DuplicateIndex { row: i, col: w[0] });
                }
            }
            for &j in row.iter() {
                if j >= n_cols {
                    return Err(LdpcError::IndexOutOfRange { row: i, col: j, n_cols });
                }
                col_supports[j].push(i);
            }
        }
        let max_row_weight = row_supports.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            n_cols,
            row_supports,
            col_supports,
            max_row_weight,
        })
    }

    /// Builds a matrix from a dense 0/1 row-major description.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self, LdpcError> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let supports = rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(j, _)| j).collect())
            .collect();
        Self::from_row_supports(n_cols, supports)
    }

    /// Code length `N`.
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of checks `M`.
    pub fn n_rows(&self) -> usize {
        self.row_supports.len()
    }

    /// Maximum row weight `W`.
    pub fn max_row_weight(&self) -> usize {
        self.max_row_weight
    }

    pub fn max_col_weight(&self) -> usize {
        self.col_supports.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.row_supports[i]
    }

    pub fn col(&self, j: usize) -> &[usize] {
        &self.col_supports[j]
    }

    pub fn row_supports(&self) -> &[Vec<usize>] {
        &self.row_supports
    }

    pub fn col_supports(&self) -> &[Vec<usize>] {
        &self.col_supports
    }

    /// Total number of ones.
    pub fn n_edges(&self) -> usize {
        self.row_supports.iter().map(Vec::len).sum()
    }

    /// Returns `true` iff every row XOR of `bits` is zero.
    pub fn syndrome_ok(&self, bits: &[u8]) -> Result<bool, LdpcError> {
        if bits.len() != self.n_cols {
            return Err(LdpcError::LengthMismatch {
                expected: self.n_cols,
                got: bits.len(),
            });
        }
        Ok(self.syndrome_ok_unchecked(bits))
    }

    pub(crate) fn syndrome_ok_unchecked(&self, bits: &[u8]) -> bool {
        self.row_supports
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &j| acc ^ (bits[j] & 1)) == 0)
    }

    /// Relabels columns so that codeword bit `j` lands at column `new_pos[j]`.
    ///
    /// Used to express the checks directly on interleaved (channel-order) bits.
    pub fn permute_columns(&self, new_pos: &[usize]) -> Result<Self, LdpcError> {
        if new_pos.len() != self.n_cols {
            return Err(LdpcError::LengthMismatch {
                expected: self.n_cols,
                got: new_pos.len(),
            });
        }
        let rows = self
            .row_supports
            .iter()
            .map(|row| row.iter().map(|&j| new_pos[j]).collect())
            .collect();
        Self::from_row_supports(self.n_cols, rows)
    }
}

/// Free-function form of [`ParityCheckMatrix::syndrome_ok`].
pub fn syndrome_ok(pcm: &ParityCheckMatrix, bits: &[u8]) -> Result<bool, LdpcError> {
    pcm.syndrome_ok(bits)
}
