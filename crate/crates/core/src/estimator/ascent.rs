//! Coordinate-ascent refinement of a channel estimate against the
//! parity-check satisfaction metric.

use super::metric::{CheckMetric, MetricVariant};
use crate::channel::ChannelMatrix;
use crate::detector::{max_log_detect, DetectionCache, DetectorError, ExhaustiveDetector};
use crate::ldpc::ParityCheckMatrix;
use crate::llr::DEFAULT_CLAMP;
use crate::modem::VectorAlphabet;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AscentError {
    #[error("invalid ascent parameter: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("metric matrix has {pcm} columns but the frame carries {frame} bits")]
    Length { pcm: usize, frame: usize },
}

/// Candidate-evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AscentVariant {
    /// Full detection per candidate, metric without LLR updates (LCT).
    NoUpdate,
    /// Full detection per candidate, metric with LLR updates (LCT-U).
    Update,
    /// Incremental LLRs from the detection cache, metric with updates (LCT-UA).
    UpdateApprox,
}

impl AscentVariant {
    pub fn metric_variant(self) -> MetricVariant {
        match self {
            AscentVariant::NoUpdate => MetricVariant::NoUpdate,
            AscentVariant::Update | AscentVariant::UpdateApprox => MetricVariant::Update,
        }
    }
}

impl fmt::Display for AscentVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AscentVariant::NoUpdate => "no_update",
            AscentVariant::Update => "update",
            AscentVariant::UpdateApprox => "update_approx",
        })
    }
}

impl FromStr for AscentVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no_update" => Ok(AscentVariant::NoUpdate),
            "update" => Ok(AscentVariant::Update),
            "update_approx" => Ok(AscentVariant::UpdateApprox),
            _ => Err(format!("unknown ascent variant {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentParams {
    /// Step size multiplier `b`; the grid step is `b * sigma^2 / n_p`.
    pub step_scale: f64,
    /// Grid points on each side of the incumbent per axis.
    pub grid_halfwidth: usize,
    /// Stop once `|dH|_F <= eps` for an outer iteration.
    pub eps: f64,
    /// Additional stopping threshold in grid steps: stop once
    /// `|dH|_F <= eps_steps * step`. Zero disables it.
    pub eps_steps: f64,
    pub max_outer: usize,
    pub variant: AscentVariant,
    pub clamp: f64,
    /// Count pinned-argmin drift after each accepted incremental step.
    pub track_drift: bool,
}

impl Default for AscentParams {
    fn default() -> Self {
        Self {
            step_scale: 1.0,
            grid_halfwidth: 4,
            eps: 1e-9,
            eps_steps: 0.0,
            max_outer: 10,
            variant: AscentVariant::UpdateApprox,
            clamp: DEFAULT_CLAMP,
            track_drift: false,
        }
    }
}

impl AscentParams {
    pub fn with_variant(variant: AscentVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AscentError> {
        if !(self.step_scale > 0.0) {
            return Err(AscentError::InvalidParams("step scale b must be positive"));
        }
        if self.grid_halfwidth == 0 {
            return Err(AscentError::InvalidParams("grid half-width must be at least 1"));
        }
        if !(self.eps >= 0.0) {
            return Err(AscentError::InvalidParams("eps must be non-negative"));
        }
        if !(self.eps_steps >= 0.0) {
            return Err(AscentError::InvalidParams("eps_steps must be non-negative"));
        }
        if self.max_outer == 0 {
            return Err(AscentError::InvalidParams("max_outer must be at least 1"));
        }
        if !(self.clamp > 0.0) {
            return Err(AscentError::InvalidParams("clamp must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOutcome {
    /// Refined estimate.
    pub channel: ChannelMatrix,
    /// Outer iterations performed (`N_1`).
    pub outer_iters: usize,
    /// Metric evaluations performed (`N_2`), including the one at the start
    /// of every outer iteration.
    pub metric_evals: usize,
    /// Per outer iteration: the metric at its start followed by the incumbent
    /// metric after each channel entry.
    pub trace: Vec<Vec<f64>>,
    /// `|dH|_F` of each outer iteration.
    pub step_norms: Vec<f64>,
    /// Accepted non-zero incremental steps and the bits whose pinned argmins
    /// disagreed with fresh detection after them (only with `track_drift`).
    pub accepted_steps: usize,
    pub drifted_bits: usize,
}

impl AscentOutcome {
    /// Whether the last iteration met the step threshold (rather than the cap).
    pub fn converged(&self, eps: f64) -> bool {
        self.step_norms.last().is_some_and(|&s| s <= eps)
    }
}

/// Candidate LLR source for one outer iteration.
enum Evaluator<'a> {
    Exact(ExhaustiveDetector<'a>),
    Incremental(DetectionCache),
}

impl Evaluator<'_> {
    fn llrs_at(&mut self, h: Complex64, r: usize, c: usize, out: &mut [f64]) {
        match self {
            Evaluator::Exact(d) => d.llrs_with_offset_into(h, r, c, out),
            Evaluator::Incremental(cache) => cache.approx_llrs_into(h, r, c, out),
        }
    }

    fn advance(&mut self, h: Complex64, r: usize, c: usize) {
        match self {
            Evaluator::Exact(d) => d.advance(h, r, c),
            Evaluator::Incremental(cache) => cache.advance(h, r, c),
        }
    }
}

/// Non-zero grid offsets `+1, -1, +2, -2, ...` scaled by `step`.
fn grid_offsets(half: usize, step: f64) -> Vec<f64> {
    (1..=half as i64)
        .flat_map(|k| [k, -k])
        .map(|k| k as f64 * step)
        .collect()
}

/// Refines `h_hat` by coordinate ascent on the parity-check metric.
///
/// `pcm` must index bits in detector output order (interleaving folded in).
/// Entries are visited row-major; for each, the real part is grid-searched
/// first and then the imaginary part around the chosen real offset. A
/// candidate replaces the incumbent only if it strictly improves the metric,
/// so zero offset wins ties and the smaller offset wins among equals.
pub fn coordinate_ascent(
    y_d: &DMatrix<Complex64>,
    h_hat: &ChannelMatrix,
    pcm: &ParityCheckMatrix,
    alphabet: &VectorAlphabet,
    noise_var: f64,
    n_pilot: usize,
    params: &AscentParams,
) -> Result<AscentOutcome, AscentError> {
    params.validate()?;
    let n_bits = y_d.ncols() * alphabet.bits_per_use();
    if pcm.n_cols() != n_bits {
        return Err(AscentError::Length {
            pcm: pcm.n_cols(),
            frame: n_bits,
        });
    }
    let (n_rx, n_tx) = (h_hat.n_rx(), h_hat.n_tx());
    let step = params.step_scale * 0.5 * noise_var / n_pilot.max(1) as f64;
    let offsets = grid_offsets(params.grid_halfwidth, step);
    let threshold = params.eps.max(params.eps_steps * step);
    let mut metric = CheckMetric::new(pcm, params.variant.metric_variant(), params.clamp);
    let mut llrs = vec![0.0; n_bits];

    let mut out = AscentOutcome {
        channel: h_hat.clone(),
        outer_iters: 0,
        metric_evals: 0,
        trace: Vec::new(),
        step_norms: Vec::new(),
        accepted_steps: 0,
        drifted_bits: 0,
    };

    loop {
        let mut evaluator = match params.variant {
            AscentVariant::UpdateApprox => {
                let (l, cache) = max_log_detect(y_d, &out.channel, noise_var, alphabet)?;
                llrs.copy_from_slice(&l);
                Evaluator::Incremental(cache)
            }
            _ => {
                let det = ExhaustiveDetector::new(y_d, &out.channel, noise_var, alphabet)?;
                det.llrs_into(&mut llrs);
                Evaluator::Exact(det)
            }
        };
        let mut incumbent = metric.evaluate(&llrs);
        out.metric_evals += 1;
        let mut trace = vec![incumbent];
        let mut delta = ChannelMatrix::zeros(n_rx, n_tx);

        for r in 0..n_rx {
            for c in 0..n_tx {
                let mut best = Complex64::new(0.0, 0.0);
                for &re in &offsets {
                    let h = Complex64::new(re, 0.0);
                    evaluator.llrs_at(h, r, c, &mut llrs);
                    let m = metric.evaluate(&llrs);
                    out.metric_evals += 1;
                    if m > incumbent {
                        incumbent = m;
                        best = h;
                    }
                }
                let centre = best.re;
                for &im in &offsets {
                    let h = Complex64::new(centre, im);
                    evaluator.llrs_at(h, r, c, &mut llrs);
                    let m = metric.evaluate(&llrs);
                    out.metric_evals += 1;
                    if m > incumbent {
                        incumbent = m;
                        best = h;
                    }
                }
                if best != Complex64::new(0.0, 0.0) {
                    evaluator.advance(best, r, c);
                    delta[(r, c)] += best;
                    if params.track_drift {
                        if let Evaluator::Incremental(cache) = &evaluator {
                            out.accepted_steps += 1;
                            out.drifted_bits += cache.argmin_drift(y_d, alphabet);
                        }
                    }
                }
                trace.push(incumbent);
            }
        }

        out.channel.0 += &delta.0;
        out.outer_iters += 1;
        let norm = delta.frobenius();
        out.step_norms.push(norm);
        out.trace.push(trace);
        if norm <= threshold || out.outer_iters >= params.max_outer {
            break;
        }
    }
    Ok(out)
}
