//! Binomial confidence intervals and FER-curve helpers.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `a <= b` is not contradicted: the lower bound of `a` does not exceed the
/// upper bound of `b`.
pub fn ordered_within_ci(a: (u64, u64), b: (u64, u64)) -> bool {
    let (lo_a, _) = wilson_interval(a.0, a.1, Z95);
    let (_, hi_b) = wilson_interval(b.0, b.1, Z95);
    lo_a <= hi_b
}

/// `a < b` with non-overlapping 95% intervals.
pub fn separated_below(a: (u64, u64), b: (u64, u64)) -> bool {
    let (_, hi_a) = wilson_interval(a.0, a.1, Z95);
    let (lo_b, _) = wilson_interval(b.0, b.1, Z95);
    hi_a < lo_b
}

/// Whether two rates are consistent: `|p_a - p_b|` within the 95% normal
/// interval of the difference.
pub fn rates_agree(a: (u64, u64), b: (u64, u64)) -> bool {
    let pa = a.0 as f64 / a.1 as f64;
    let pb = b.0 as f64 / b.1 as f64;
    let var = pa * (1.0 - pa) / a.1 as f64 + pb * (1.0 - pb) / b.1 as f64;
    (pa - pb).abs() <= Z95 * var.sqrt()
}

/// SNR at which a FER curve crosses `target`, by linear interpolation of
/// `log10(FER)` between the first bracketing pair of points.
pub fn snr_at_fer(snr_db: &[f64], fer: &[f64], target: f64) -> Option<f64> {
    let lt = target.log10();
    for i in 1..snr_db.len().min(fer.len()) {
        let (f0, f1) = (fer[i - 1], fer[i]);
        if f0 <= 0.0 || f1 <= 0.0 {
            continue;
        }
        let (l0, l1) = (f0.log10(), f1.log10());
        if (l0 - lt) * (l1 - lt) <= 0.0 && l0 != l1 {
            let frac = (lt - l0) / (l1 - l0);
            return Some(snr_db[i - 1] + frac * (snr_db[i] - snr_db[i - 1]));
        }
    }
    None
}
