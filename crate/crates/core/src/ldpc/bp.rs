//! Flooding sum-product decoder with the tanh-product check rule.

use super::{LdpcError, ParityCheckMatrix};
use crate::llr::{clamp, hard_bit, two_atanh, DEFAULT_CLAMP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConfig {
    /// Maximum number of message-passing rounds.
    pub max_iters: usize,
    /// Magnitude bound on every message.
    pub llr_clamp: f64,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            max_iters: 15,
            llr_clamp: DEFAULT_CLAMP,
        }
    }
}

impl BpConfig {
    pub fn new(max_iters: usize) -> Self {
        Self {
            max_iters,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LdpcError> {
        if self.max_iters == 0 {
            return Err(LdpcError::InvalidConfig("max_iters must be at least 1"));
        }
        if !(self.llr_clamp > 0.0) {
            return Err(LdpcError::InvalidConfig("llr_clamp must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpOutput {
    pub hard_bits: Vec<u8>,
    pub converged: bool,
    /// Message rounds performed; 0 when the channel hard decision already
    /// satisfies every check.
    pub iters_used: usize,
}

/// Tanner-graph view of a parity-check matrix. Immutable and shareable;
/// each call to [`BpDecoder::decode`] uses its own message buffers.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    pcm: ParityCheckMatrix,
    /// Edge range of each row.
    row_start: Vec<usize>,
    /// Variable node of each edge.
    edge_var: Vec<usize>,
    /// Edges of each variable node.
    var_edges: Vec<Vec<usize>>,
}

impl BpDecoder {
    pub fn new(pcm: &ParityCheckMatrix) -> Self {
        let mut row_start = Vec::with_capacity(pcm.n_rows() + 1);
        let mut edge_var = Vec::with_capacity(pcm.n_edges());
        let mut var_edges = vec![Vec::new(); pcm.n_cols()];
        row_start.push(0);
        for row in pcm.row_supports() {
            for &j in row {
                var_edges[j].push(edge_var.len());
                edge_var.push(j);
            }
            row_start.push(edge_var.len());
        }
        Self {
            pcm: pcm.clone(),
            row_start,
            edge_var,
            var_edges,
        }
    }

    pub fn pcm(&self) -> &ParityCheckMatrix {
        &self.pcm
    }

    pub fn decode(&self, llrs: &[f64], cfg: &BpConfig) -> Result<BpOutput, LdpcError> {
        let n = self.pcm.n_cols();
        if llrs.len() != n {
            return Err(LdpcError::LengthMismatch {
                expected: n,
                got: llrs.len(),
            });
        }
        cfg.validate()?;
        let bound = cfg.llr_clamp;
        let channel: Vec<f64> = llrs.iter().map(|&l| clamp(l, bound)).collect();
        let mut hard: Vec<u8> = channel.iter().map(|&l| hard_bit(l)).collect();
        if self.pcm.syndrome_ok_unchecked(&hard) {
            return Ok(BpOutput {
                hard_bits: hard,
                converged: true,
                iters_used: 0,
            });
        }

        let n_edges = self.edge_var.len();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&j| channel[j]).collect();
        let mut c2v = vec![0.0; n_edges];
        let mut t = vec![0.0; n_edges];
        let mut suffix = vec![0.0; self.pcm.max_row_weight() + 1];

        for iter in 1..=cfg.max_iters {
            for w in self.row_start.windows(2) {
                let (s, e) = (w[0], w[1]);
                for k in s..e {
                    t[k] = (0.5 * v2c[k]).tanh();
                }
                let deg = e - s;
                suffix[deg] = 1.0;
                for k in (0..deg).rev() {
                    suffix[k] = suffix[k + 1] * t[s + k];
                }
                let mut prefix = 1.0;
                for k in 0..deg {
                    c2v[s + k] = two_atanh(prefix * suffix[k + 1], bound);
                    prefix *= t[s + k];
                }
            }
            for (j, edges) in self.var_edges.iter().enumerate() {
                let total = channel[j] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
                for &e in edges {
                    v2c[e] = clamp(total - c2v[e], bound);
                }
                hard[j] = hard_bit(total);
            }
            if self.pcm.syndrome_ok_unchecked(&hard) {
                return Ok(BpOutput {
                    hard_bits: hard,
                    converged: true,
                    iters_used: iter,
                });
            }
        }
        Ok(BpOutput {
            hard_bits: hard,
            converged: false,
            iters_used: cfg.max_iters,
        })
    }
}

/// Extrinsic check-node outputs for one check: `2 atanh(prod_{m != k} tanh(L_m / 2))`.
pub fn check_node_messages(inputs: &[f64], bound: f64) -> Vec<f64> {
    (0..inputs.len())
        .map(|k| {
            let p: f64 = inputs
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != k)
                .map(|(_, &l)| (0.5 * l).tanh())
                .product();
            two_atanh(p, bound)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llr::boxplus;
    use proptest::prelude::*;

    fn small() -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap()
    }

    #[test]
    fn confident_input_converges_immediately() {
        let dec = BpDecoder::new(&small());
        let out = dec.decode(&[30.0, 30.0, 30.0], &BpConfig::default()).unwrap();
        assert_eq!(out.hard_bits, vec![0, 0, 0]);
        assert!(out.converged);
        assert_eq!(out.iters_used, 0);
    }

    #[test]
    fn weak_error_is_corrected() {
        let dec = BpDecoder::new(&small());
        let out = dec.decode(&[5.0, 5.0, -1.0], &BpConfig::default()).unwrap();
        assert_eq!(out.hard_bits, vec![0, 0, 0]);
        assert!(out.converged);
        assert!(out.iters_used >= 1);
    }

    #[test]
    fn single_round_failure_is_flagged() {
        // Hand trace: round 1 totals are (0.79, -0.57, 0.79), still 010.
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 1]]).unwrap();
        let dec = BpDecoder::new(&h);
        let out = dec.decode(&[1.0, -1.0, 1.0], &BpConfig::new(1)).unwrap();
        assert_eq!(out.hard_bits, vec![0, 1, 0]);
        assert!(!out.converged);
        assert_eq!(out.iters_used, 1);
        assert_eq!(out.converged, h.syndrome_ok(&out.hard_bits).unwrap());
    }

    #[test]
    fn length_and_config_errors() {
        let dec = BpDecoder::new(&small());
        assert!(dec.decode(&[1.0, 1.0], &BpConfig::default()).is_err());
        assert!(dec.decode(&[1.0; 3], &BpConfig::new(0)).is_err());
    }

    #[test]
    fn check_rule_matches_boxplus_on_three_inputs() {
        let cases = [[1.3, -0.7, 2.2], [0.1, 4.0, -3.5], [-2.0, -2.0, 0.5]];
        for c in cases {
            let msgs = check_node_messages(&c, 30.0);
            assert!((msgs[0] - boxplus(c[1], c[2])).abs() < 1e-12);
            assert!((msgs[1] - boxplus(c[0], c[2])).abs() < 1e-12);
            assert!((msgs[2] - boxplus(c[0], c[1])).abs() < 1e-12);
            let all = boxplus(boxplus(c[0], c[1]), c[2]);
            let direct = 2.0 * c.iter().map(|l| (l / 2.0f64).tanh()).product::<f64>().atanh();
            assert!((all - direct).abs() < 1e-12);
        }
    }

    fn wimax() -> (ParityCheckMatrix, crate::ldpc::SystematicEncoder) {
        let h = crate::ldpc::wimax::n192();
        let enc = crate::ldpc::build_encoder(&h).unwrap();
        (h, enc)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn noiseless_codeword_decodes_in_zero_rounds(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let (h, enc) = wimax();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let u: Vec<u8> = (0..enc.k()).map(|_| rng.random_range(0..2)).collect();
            let c = enc.encode(&u).unwrap();
            let llrs: Vec<f64> = c.iter().map(|&b| if b == 0 { 30.0 } else { -30.0 }).collect();
            let out = BpDecoder::new(&h).decode(&llrs, &BpConfig::default()).unwrap();
            prop_assert!(out.converged);
            prop_assert_eq!(out.iters_used, 0);
            prop_assert_eq!(out.hard_bits, c);
        }

        #[test]
        fn decoding_commutes_with_codeword_sign_flips(
            seed in any::<u64>(),
            noise in proptest::collection::vec(-2.5f64..2.5, 192),
        ) {
            use rand::{Rng, SeedableRng};
            let (h, enc) = wimax();
            let dec = BpDecoder::new(&h);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let u: Vec<u8> = (0..enc.k()).map(|_| rng.random_range(0..2)).collect();
            let c = enc.encode(&u).unwrap();
            let base: Vec<f64> = noise.iter().map(|x| 1.0 + x).collect();
            let flipped: Vec<f64> = base
                .iter()
                .zip(&c)
                .map(|(&l, &b)| if b == 1 { -l } else { l })
                .collect();
            let cfg = BpConfig::new(10);
            let a = dec.decode(&base, &cfg).unwrap();
            let b = dec.decode(&flipped, &cfg).unwrap();
            let mapped: Vec<u8> = a.hard_bits.iter().zip(&c).map(|(x, y)| x ^ y).collect();
            // An exact-zero LLR breaks the symmetry of the tie rule.
            prop_assume!(base.iter().all(|&l| l != 0.0));
            prop_assert_eq!(mapped, b.hard_bits);
            prop_assert_eq!(a.converged, b.converged);
            prop_assert_eq!(a.iters_used, b.iters_used);
        }
    }
}
