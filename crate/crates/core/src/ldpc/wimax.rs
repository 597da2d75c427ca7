//! IEEE 802.16e rate-1/2 quasi-cyclic LDPC codes.
//!
//! The 12x24 base matrix is defined for the largest lifting factor 96; other
//! lifting factors scale each shift as `floor(p * z / 96)`.

use super::ParityCheckMatrix;

pub const BASE_ROWS: usize = 12;
pub const BASE_COLS: usize = 24;
pub const BASE_LIFTING: usize = 96;

/// Rate-1/2 base matrix; `-1` marks an all-zero block.
#[rustfmt::skip]
pub const RATE_HALF_BASE: [[i16; BASE_COLS]; BASE_ROWS] = [
    [-1, 94, 73, -1, -1, -1, -1, -1, 55, 83, -1, -1,  7,  0, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [-1, 27, -1, -1, -1, 22, 79,  9, -1, -1, -1, 12, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [-1, -1, -1, 24, 22, 81, -1, 33, -1, -1, -1,  0, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1, -1],
    [61, -1, 47, -1, -1, -1, -1, -1, 65, 25, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1],
    [-1, -1, 39, -1, -1, -1, 84, -1, -1, 41, 72, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1],
    [-1, -1, -1, -1, 46, 40, -1, 82, -1, -1, -1, 79,  0, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1],
    [-1, -1, 95, 53, -1, -1, -1, -1, -1, 14, 18, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1],
    [-1, 11, 73, -1, -1, -1,  2, -1, -1, 47, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1],
    [12, -1, -1, -1, 83, 24, -1, 43, -1, -1, -1, 51, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1],
    [-1, -1, -1, -1, -1, 94, -1, 59, -1, -1, 70, 72, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1],
    [-1, -1,  7, 65, -1, -1, -1, -1, 39, 49, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0],
    [43, -1, -1, -1, -1, 66, -1, 41, -1, -1, -1, 26,  7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0],
];

/// Expands a base matrix of cyclic shifts into a binary parity-check matrix.
///
/// Block `(i, j)` with shift `s` places ones at `(i*z + r, j*z + (r + s) % z)`.
pub fn expand(base: &[[i16; BASE_COLS]], z: usize) -> ParityCheckMatrix {
    let mut rows = vec![Vec::new(); base.len() * z];
    for (bi, brow) in base.iter().enumerate() {
        for (bj, &p) in brow.iter().enumerate() {
            if p < 0 {
                continue;
            }
            let s = p as usize * z / BASE_LIFTING;
            for r in 0..z {
                rows[bi * z + r].push(bj * z + (r + s) % z);
            }
        }
    }
    ParityCheckMatrix::from_row_supports(BASE_COLS * z, rows)
        .expect("expanded base matrix is well formed")
}

/// Rate-1/2 code of length `24 * z`.
pub fn rate_half_code(z: usize) -> ParityCheckMatrix {
    expand(&RATE_HALF_BASE, z)
}

/// The (192, 96) code.
pub fn n192() -> ParityCheckMatrix {
    rate_half_code(192 / BASE_COLS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n192_dimensions() {
        let h = n192();
        assert_eq!(h.n_cols(), 192);
        assert_eq!(h.n_rows(), 96);
        // Row weights 6 and 7 in the rate-1/2 base matrix.
        assert_eq!(h.max_row_weight(), 7);
        assert!(h.row_supports().iter().all(|r| r.len() == 6 || r.len() == 7));
    }

    #[test]
    fn every_block_is_a_permutation() {
        let z = 8;
        let h = rate_half_code(z);
        for (bi, brow) in RATE_HALF_BASE.iter().enumerate() {
            for (bj, &p) in brow.iter().enumerate() {
                let count: usize = (0..z)
                    .map(|r| h.row(bi * z + r).iter().filter(|&&c| c / z == bj).count())
                    .sum();
                assert_eq!(count, if p < 0 { 0 } else { z }, "block ({bi},{bj})");
            }
        }
    }

    #[test]
    fn full_lifting_is_full_rank() {
        let h = rate_half_code(BASE_LIFTING);
        assert_eq!(h.n_cols(), 2304);
        let enc = crate::ldpc::build_encoder(&h).unwrap();
        assert_eq!(enc.k(), 1152);
    }
}
