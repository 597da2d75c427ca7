//! Systematic encoding via one-time GF(2) Gaussian elimination.

use super::{LdpcError, ParityCheckMatrix};

/// Dense bit-packed GF(2) row.
#[derive(Clone)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }
    #[inline]
    fn get(&self, j: usize) -> bool {
        (self.0[j / 64] >> (j % 64)) & 1 == 1
    }
    #[inline]
    fn set(&mut self, j: usize) {
        self.0[j / 64] |= 1 << (j % 64);
    }
    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

/// Encoder mapping `K` information bits to a codeword of length `N`.
///
/// Information bits occupy the non-pivot columns of the reduced matrix (in
/// ascending order); each parity bit is the XOR of a fixed subset of them.
#[derive(Debug, Clone)]
pub struct SystematicEncoder {
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// For parity bit `r`, the indices (into the info vector) it depends on.
    parity_taps: Vec<Vec<usize>>,
}

/// Builds a systematic encoder. Fails if `pcm` is not of full row rank.
pub fn build_encoder(pcm: &ParityCheckMatrix) -> Result<SystematicEncoder, LdpcError> {
    let n = pcm.n_cols();
    let m = pcm.n_rows();
    let mut rows: Vec<BitRow> = pcm
        .row_supports()
        .iter()
        .map(|sup| {
            let mut r = BitRow::zeros(n);
            sup.iter().for_each(|&j| r.set(j));
            r
        })
        .collect();

    // Reduced row echelon form, scanning columns from the right so that a
    // code whose parity part sits on the right keeps its info bits in front.
    let mut pivot_cols = Vec::with_capacity(m);
    let mut rank = 0;
    for col in (0..n).rev() {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    if rank < m {
        return Err(LdpcError::RankDeficient { rank, rows: m });
    }

    let mut is_pivot = vec![false; n];
    pivot_cols.iter().for_each(|&c| is_pivot[c] = true);
    let info_positions: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
    let parity_taps = rows
        .iter()
        .map(|row| {
            info_positions
                .iter()
                .enumerate()
                .filter(|(_, &j)| row.get(j))
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    Ok(SystematicEncoder {
        n,
        info_positions,
        parity_positions: pivot_cols,
        parity_taps,
    })
}

impl SystematicEncoder {
    /// Code length `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Message length `K`.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    /// Codeword columns carrying the information bits, in message order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, LdpcError> {
        if info.len() != self.k() {
            return Err(LdpcError::LengthMismatch {
                expected: self.k(),
                got: info.len(),
            });
        }
        let mut cw = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            cw[pos] = b & 1;
        }
        for (&pos, taps) in self.parity_positions.iter().zip(&self.parity_taps) {
            cw[pos] = taps.iter().fold(0, |acc, &k| acc ^ (info[k] & 1));
        }
        Ok(cw)
    }

    /// Extracts the information bits from a (decoded) codeword.
    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tiny_code_codebook_matches_enumeration() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let enc = build_encoder(&h).unwrap();
        assert_eq!(enc.k(), 1);
        // Oracle: every length-3 vector with zero syndrome.
        let oracle: Vec<Vec<u8>> = (0u8..8)
            .map(|v| vec![(v >> 2) & 1, (v >> 1) & 1, v & 1])
            .filter(|c| h.syndrome_ok(c).unwrap())
            .collect();
        let book: Vec<Vec<u8>> = vec![enc.encode(&[0]).unwrap(), enc.encode(&[1]).unwrap()];
        assert_eq!(oracle, vec![vec![0, 0, 0], vec![1, 1, 1]]);
        assert_eq!(book, oracle);
    }

    #[test]
    fn zero_message_gives_zero_codeword() {
        let h = crate::ldpc::wimax::rate_half_code(8);
        let enc = build_encoder(&h).unwrap();
        assert!(enc.encode(&vec![0; enc.k()]).unwrap().iter().all(|&b| b == 0));
    }

    #[test]
    fn wimax_encoder_satisfies_all_checks() {
        let h = crate::ldpc::wimax::rate_half_code(8);
        let enc = build_encoder(&h).unwrap();
        assert_eq!((enc.n(), enc.k()), (192, 96));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u: Vec<u8> = (0..96).map(|_| rng.random_range(0..2)).collect();
            let c = enc.encode(&u).unwrap();
            assert!(h.syndrome_ok(&c).unwrap());
            assert_eq!(enc.extract_info(&c), u);
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![1, 1, 0]]).unwrap();
        assert_eq!(
            build_encoder(&h).unwrap_err(),
            LdpcError::RankDeficient { rank: 1, rows: 2 }
        );
    }

    #[test]
    fn message_length_checked() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let enc = build_encoder(&h).unwrap();
        assert!(enc.encode(&[0, 1]).is_err());
    }
}
