//! Parity-check satisfaction metric: the LLR that every check of the code is
//! satisfied, accumulated row by row from bit LLRs.

use crate::ldpc::ParityCheckMatrix;
use crate::llr::{clamp, combine_and, ln_abs_half_tanh, two_atanh_from_log};

/// Whether conditional bit LLRs are refined after each processed row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricVariant {
    /// Every row uses the detector LLRs unchanged.
    NoUpdate,
    /// After row `i`, each bit in the row absorbs the row's extrinsic
    /// message, so later rows see LLRs conditioned on rows `1..=i`.
    Update,
}

/// Per-evaluation working state.
#[derive(Debug, Clone, Default)]
pub struct MetricState {
    /// Conditional bit LLRs `L_{C_j | Pi_i}`.
    pub cond_llrs: Vec<f64>,
    /// `ln|tanh(L / 2)|` of `cond_llrs`; the tanh rule runs on sums of these
    /// so large LLRs keep their resolution.
    log_mag: Vec<f64>,
    /// Running chain LLR `L_{Pi_i}`.
    pub chain_llr: f64,
}

/// Reusable evaluator bound to one parity-check matrix.
#[derive(Debug, Clone)]
pub struct CheckMetric<'a> {
    pcm: &'a ParityCheckMatrix,
    variant: MetricVariant,
    clamp: f64,
    state: MetricState,
    suffix: Vec<(f64, bool)>,
}

impl<'a> CheckMetric<'a> {
    pub fn new(pcm: &'a ParityCheckMatrix, variant: MetricVariant, clamp: f64) -> Self {
        Self {
            pcm,
            variant,
            clamp,
            state: MetricState {
                cond_llrs: vec![0.0; pcm.n_cols()],
                log_mag: vec![0.0; pcm.n_cols()],
                chain_llr: 0.0,
            },
            suffix: vec![(0.0, false); pcm.max_row_weight() + 1],
        }
    }

    pub fn variant(&self) -> MetricVariant {
        self.variant
    }

    /// State left by the last evaluation.
    pub fn state(&self) -> &MetricState {
        &self.state
    }

    /// `L_{Pi_M}` for the given bit LLRs.
    pub fn evaluate(&mut self, llrs: &[f64]) -> f64 {
        self.run(llrs, |_, _| {})
    }

    /// Per-row `(L_{Z_i | Pi_{i-1}}, L_{Pi_i})` pairs.
    pub fn trace(&mut self, llrs: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.pcm.n_rows());
        self.run(llrs, |lz, lp| out.push((lz, lp)));
        out
    }

    fn run(&mut self, llrs: &[f64], mut visit: impl FnMut(f64, f64)) -> f64 {
        assert_eq!(llrs.len(), self.pcm.n_cols(), "LLR length must equal code length");
        let bound = self.clamp;
        let st = &mut self.state;
        for ((c, g), &l) in st.cond_llrs.iter_mut().zip(st.log_mag.iter_mut()).zip(llrs) {
            *c = clamp(l, bound);
            *g = ln_abs_half_tanh(*c);
        }
        let mut chain = 0.0;
        for (i, row) in self.pcm.row_supports().iter().enumerate() {
            let deg = row.len();
            let lz = match self.variant {
                MetricVariant::NoUpdate => {
                    let (g, neg) = row.iter().fold((0.0, false), |(g, n), &j| {
                        (g + st.log_mag[j], n ^ (st.cond_llrs[j] < 0.0))
                    });
                    two_atanh_from_log(neg, g, bound)
                }
                MetricVariant::Update => {
                    self.suffix[deg] = (0.0, false);
                    for k in (0..deg).rev() {
                        let j = row[k];
                        let (g, n) = self.suffix[k + 1];
                        self.suffix[k] = (g + st.log_mag[j], n ^ (st.cond_llrs[j] < 0.0));
                    }
                    let lz = two_atanh_from_log(self.suffix[0].1, self.suffix[0].0, bound);
                    let mut prefix = (0.0, false);
                    for (k, &j) in row.iter().enumerate() {
                        let (sg, sn) = self.suffix[k + 1];
                        let ext = two_atanh_from_log(prefix.1 ^ sn, prefix.0 + sg, bound);
                        prefix = (prefix.0 + st.log_mag[j], prefix.1 ^ (st.cond_llrs[j] < 0.0));
                        let updated = clamp(st.cond_llrs[j] + ext, bound);
                        st.cond_llrs[j] = updated;
                        st.log_mag[j] = ln_abs_half_tanh(updated);
                    }
                    lz
                }
            };
            chain = if i == 0 { lz } else { combine_and(lz, chain) };
            visit(lz, chain);
        }
        st.chain_llr = chain;
        chain
    }
}

/// One-shot wrapper around [`CheckMetric`].
pub fn check_metric(llrs: &[f64], pcm: &ParityCheckMatrix, variant: MetricVariant, clamp: f64) -> f64 {
    CheckMetric::new(pcm, variant, clamp).evaluate(llrs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llr::{logit, prob_one, DEFAULT_CLAMP};
    use proptest::prelude::*;

    /// `ln(P/(1-P))` of "all checks satisfied" by enumeration of all `2^N`
    /// bit patterns with independent bit probabilities.
    fn brute_force(llrs: &[f64], pcm: &ParityCheckMatrix) -> f64 {
        let n = llrs.len();
        let p1: Vec<f64> = llrs.iter().map(|&l| prob_one(l)).collect();
        let mut p_sat = 0.0;
        for pattern in 0..(1u32 << n) {
            let bits: Vec<u8> = (0..n).map(|j| ((pattern >> j) & 1) as u8).collect();
            if pcm.syndrome_ok(&bits).unwrap() {
                p_sat += bits
                    .iter()
                    .zip(&p1)
                    .map(|(&b, &p)| if b == 1 { p } else { 1.0 - p })
                    .product::<f64>();
            }
        }
        logit(p_sat)
    }

    #[test]
    fn single_check_spot_value() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1]]).unwrap();
        let l = check_metric(&[2.0, 2.0], &h, MetricVariant::Update, DEFAULT_CLAMP);
        // 0.8808^2 + 0.1192^2 = 0.7900 -> ln(0.79 / 0.21)
        assert!((l - brute_force(&[2.0, 2.0], &h)).abs() < 1e-12);
        assert!((l - 1.325_002_75).abs() < 1e-8);
        assert!((l - 2.0 * (1.0f64.tanh().powi(2)).atanh()).abs() < 1e-12);
    }

    #[test]
    fn zero_llr_annihilates_check() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 1]]).unwrap();
        for v in [MetricVariant::NoUpdate, MetricVariant::Update] {
            assert_eq!(check_metric(&[3.0, 0.0, -1.0], &h, v, DEFAULT_CLAMP), 0.0);
        }
    }

    #[test]
    fn two_disjoint_checks() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0, 0], vec![0, 0, 1, 1]]).unwrap();
        let llrs = [2.0; 4];
        let l = check_metric(&llrs, &h, MetricVariant::Update, DEFAULT_CLAMP);
        let oracle = brute_force(&llrs, &h);
        assert!((l - oracle).abs() < 1e-12);
        // Independent checks: P = 0.7900^2 = 0.62410.
        assert!((l - 0.507_15).abs() < 1e-4, "{l}");
        let a = 1.325_002_747_357_864;
        assert!((l - (2.0 * a - (1.0 + 2.0 * f64::exp(a)).ln())).abs() < 1e-6);
    }

    #[test]
    fn update_is_exact_on_a_tree() {
        // Two checks sharing a single bit form a tree; conditioning is exact.
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 1, 0, 0], vec![0, 0, 1, 1, 1]]).unwrap();
        let llrs = [1.2, -0.4, 0.9, 2.5, -1.7];
        let l = check_metric(&llrs, &h, MetricVariant::Update, DEFAULT_CLAMP);
        assert!((l - brute_force(&llrs, &h)).abs() < 1e-9);
        let no = check_metric(&llrs, &h, MetricVariant::NoUpdate, DEFAULT_CLAMP);
        assert!((no - brute_force(&llrs, &h)).abs() > 1e-6);
    }

    /// Random codes on up to 16 bits whose rows share no column.
    fn disjoint_code() -> impl Strategy<Value = ParityCheckMatrix> {
        (2usize..=16)
            .prop_flat_map(|n| (Just(n), proptest::collection::vec(0usize..4, n)))
            .prop_map(|(n, label)| {
                // label 0 leaves the bit unchecked, others pick one of 3 rows.
                let mut rows = vec![Vec::new(); 3];
                for (j, &l) in label.iter().enumerate() {
                    if l > 0 {
                        rows[l - 1].push(j);
                    }
                }
                rows.retain(|r| !r.is_empty());
                if rows.is_empty() {
                    rows.push(vec![0]);
                }
                ParityCheckMatrix::from_row_supports(n, rows).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn disjoint_rows_are_exact(
            h in disjoint_code(),
            seed in proptest::collection::vec(-6.0f64..6.0, 16),
        ) {
            let llrs = &seed[..h.n_cols()];
            let l = check_metric(llrs, &h, MetricVariant::Update, DEFAULT_CLAMP);
            prop_assert!((l - brute_force(llrs, &h)).abs() < 1e-9);
            // Row order does not matter for disjoint rows.
            let mut rev = h.row_supports().to_vec();
            rev.reverse();
            let hr = ParityCheckMatrix::from_row_supports(h.n_cols(), rev).unwrap();
            let lr = check_metric(llrs, &hr, MetricVariant::Update, DEFAULT_CLAMP);
            prop_assert!((l - lr).abs() < 1e-9);
        }

        #[test]
        fn chain_probability_never_exceeds_its_factors(
            llrs in proptest::collection::vec(-8.0f64..8.0, 192),
            update in any::<bool>(),
        ) {
            let h = crate::ldpc::wimax::n192();
            let variant = if update { MetricVariant::Update } else { MetricVariant::NoUpdate };
            let trace = CheckMetric::new(&h, variant, DEFAULT_CLAMP).trace(&llrs);
            let p = |l: f64| 1.0 - prob_one(l);
            for w in trace.windows(2) {
                let (lz, lp) = w[1];
                let prev = w[0].1;
                prop_assert!(lp.is_finite());
                prop_assert!(p(lp) <= p(lz).min(p(prev)) + 1e-15);
            }
        }
    }
}
