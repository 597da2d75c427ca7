//! Scalar LLR arithmetic. Convention: `L = ln(P(bit = 0) / P(bit = 1))`.

/// Default magnitude bound applied to LLR messages.
pub const DEFAULT_CLAMP: f64 = 30.0;

#[inline]
pub fn clamp(x: f64, bound: f64) -> f64 {
    x.clamp(-bound, bound)
}

/// Hard decision; an LLR of exactly zero decides 0.
#[inline]
pub fn hard_bit(l: f64) -> u8 {
    u8::from(l < 0.0)
}

/// `2 atanh(p)`, saturating at `±bound`.
#[inline]
pub fn two_atanh(p: f64, bound: f64) -> f64 {
    if p >= 1.0 {
        bound
    } else if p <= -1.0 {
        -bound
    } else {
        // Evaluated on |p| so the map is exactly odd.
        let a = p.abs();
        clamp(((1.0 + a) / (1.0 - a)).ln(), bound).copysign(p)
    }
}

/// `ln|tanh(L / 2)|`, accurate for any magnitude; `-inf` at `L = 0`.
#[inline]
pub fn ln_abs_half_tanh(l: f64) -> f64 {
    let e = (-l.abs()).exp();
    (-e).ln_1p() - e.ln_1p()
}

/// `2 atanh(s * exp(g))` for sign `s` and `g = ln|product| <= 0`,
/// saturating at `±bound`.
#[inline]
pub fn two_atanh_from_log(negative: bool, g: f64, bound: f64) -> f64 {
    let m = if g >= 0.0 {
        bound
    } else {
        clamp(g.exp().ln_1p() - (-g.exp_m1()).ln(), bound)
    };
    if negative {
        -m
    } else {
        m
    }
}

/// LLR of the XOR of two independent bits, via log-sum-exp.
///
/// `ln((1 + e^(a+b)) / (e^a + e^b))`; equals `2 atanh(tanh(a/2) tanh(b/2))`.
pub fn boxplus(a: f64, b: f64) -> f64 {
    let num = log_sum_exp(&[0.0, a + b]);
    let den = log_sum_exp(&[a, b]);
    num - den
}

/// `ln(sum(exp(x)))` with max shift.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// LLR of the conjunction of two independent "satisfied" events:
/// `a + b - ln(1 + e^a + e^b)`.
#[inline]
pub fn combine_and(a: f64, b: f64) -> f64 {
    let m = a.max(b).max(0.0);
    a + b - (m + ((-m).exp() + (a - m).exp() + (b - m).exp()).ln())
}

/// `ln(P / (1 - P))`.
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `P(bit = 1)` for an LLR.
pub fn prob_one(l: f64) -> f64 {
    1.0 / (1.0 + l.exp())
}
