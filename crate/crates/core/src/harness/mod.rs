//! Seeded Monte Carlo FER experiments comparing perfect CSI, pilot-only
//! estimation and code-aided refinement on a common set of frames.

mod output;
pub mod stats;

pub use output::{fmt_sig6, parse_csv, render_manifest, write_csv, write_manifest, CSV_HEADER};

use crate::channel::{make_pilots, sample_channel, snr_db_to_noise_var, transmit, ChannelError, ChannelMatrix};
use crate::detector::{max_log_detect, DetectorError};
use crate::estimator::{coordinate_ascent, lmmse, AscentError, AscentParams, AscentVariant, LmmseError};
use crate::ldpc::{self, build_encoder, AlistError, BpConfig, BpDecoder, LdpcError, ParityCheckMatrix, SystematicEncoder};
use crate::modem::{modulate, Interleaver, ModemError, Modulation, VectorAlphabet};
use crate::par::{map_range, Execution};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Trials evaluated per parallel batch. Results do not depend on it.
const BATCH: u64 = 64;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read code file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Alist(#[from] AlistError),
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Lmmse(#[from] LmmseError),
    #[error(transparent)]
    Ascent(#[from] AscentError),
    #[error("cannot write {path}: {msg}")]
    Output { path: PathBuf, msg: String },
}

/// Receiver under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Coherent receiver with the true channel.
    Perfect,
    /// Pilot-only LMMSE estimate.
    Pat,
    /// Code-aided refinement, metric without LLR updates.
    Lct,
    /// Code-aided refinement with LLR updates, full detection per candidate.
    LctU,
    /// Code-aided refinement with LLR updates and incremental LLRs.
    LctUa,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Perfect, Scheme::Pat, Scheme::Lct, Scheme::LctU, Scheme::LctUa];

    pub fn ascent_variant(self) -> Option<AscentVariant> {
        match self {
            Scheme::Lct => Some(AscentVariant::NoUpdate),
            Scheme::LctU => Some(AscentVariant::Update),
            Scheme::LctUa => Some(AscentVariant::UpdateApprox),
            Scheme::Perfect | Scheme::Pat => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Perfect => "perfect",
            Scheme::Pat => "pat",
            Scheme::Lct => "lct",
            Scheme::LctU => "lct_u",
            Scheme::LctUa => "lct_ua",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown scheme {s:?} (expected perfect, pat, lct, lct_u or lct_ua)"))
    }
}

/// Parses a comma-separated scheme list.
pub fn parse_schemes(s: &str) -> Result<Vec<Scheme>, String> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let sc: Scheme = tok.parse()?;
        if !out.contains(&sc) {
            out.push(sc);
        }
    }
    if out.is_empty() {
        return Err("scheme list is empty".into());
    }
    Ok(out)
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list of SNRs in dB.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid SNR value {t:?}"))
            .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("SNR {t:?} is not finite")) })
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("SNR range {s:?} must be start:step:stop"));
        }
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step <= 0.0 || stop < start {
            return Err(format!("SNR range {s:?} needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + i as f64 * step).collect())
    } else {
        let v = s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err("SNR list is empty".into());
        }
        Ok(v)
    }
}

/// Where the parity-check matrix comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSource {
    /// Built-in (192, 96) rate-1/2 WiMAX code.
    Wimax192,
    Alist(PathBuf),
}

impl CodeSource {
    pub fn load(&self) -> Result<ParityCheckMatrix, HarnessError> {
        match self {
            CodeSource::Wimax192 => Ok(ldpc::wimax::n192()),
            CodeSource::Alist(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(ldpc::load_parity_alist(&text)?)
            }
        }
    }
}

impl fmt::Display for CodeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSource::Wimax192 => f.write_str("builtin:wimax-192-96"),
            CodeSource::Alist(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub code: CodeSource,
    pub modulation: Modulation,
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_pilot: usize,
    pub snr_db: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// BP iteration cap `R`.
    pub bp_iters: usize,
    /// Grid and stopping parameters shared by the code-aided schemes; the
    /// variant field is overridden per scheme.
    pub ascent: AscentParams,
    pub max_frames: u64,
    /// Frame errors on the stopping arm that end an SNR point.
    pub target_errors: u64,
    pub seed: u64,
    /// Debug: transmit without noise (detection still uses the SNR's noise variance).
    pub noise_off: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            code: CodeSource::Wimax192,
            modulation: Modulation::Qpsk,
            n_tx: 2,
            n_rx: 2,
            n_pilot: 15,
            snr_db: vec![10.0, 13.0, 16.0, 19.0],
            schemes: vec![Scheme::Perfect, Scheme::Pat, Scheme::LctUa],
            bp_iters: 15,
            ascent: AscentParams::default(),
            max_frames: 1_000_000,
            target_errors: 200,
            seed: 1,
            noise_off: false,
        }
    }
}

impl ExperimentConfig {
    /// Scheme whose error count drives the stopping rule.
    pub fn stopping_scheme(&self) -> Option<Scheme> {
        if self.schemes.contains(&Scheme::Perfect) {
            Some(Scheme::Perfect)
        } else {
            self.schemes.first().copied()
        }
    }
}

/// Everything fixed for a run: code, encoder, decoder, alphabet, interleaver
/// and pilots.
#[derive(Debug, Clone)]
pub struct Link {
    pub cfg: ExperimentConfig,
    pub pcm: ParityCheckMatrix,
    /// `pcm` with columns relabelled to interleaved (detector) order.
    pub channel_pcm: ParityCheckMatrix,
    pub encoder: SystematicEncoder,
    pub decoder: BpDecoder,
    pub alphabet: VectorAlphabet,
    pub interleaver: Interleaver,
    pub pilots: DMatrix<Complex64>,
    pub n_data: usize,
}

/// Seed of the per-run interleaver, derived from the master seed.
fn interleaver_seed(master: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(u64::MAX);
    rng.random()
}

/// Per-trial generator: stream `(snr_index << 40) | trial` of the master seed.
pub fn trial_rng(master: u64, snr_index: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((snr_index as u64) << 40) | trial);
    rng
}

impl Link {
    pub fn new(cfg: ExperimentConfig) -> Result<Self, HarnessError> {
        let conf = |m: String| HarnessError::Config(m);
        if cfg.schemes.is_empty() {
            return Err(conf("at least one scheme is required".into()));
        }
        if cfg.snr_db.is_empty() {
            return Err(conf("at least one SNR point is required".into()));
        }
        if cfg.n_tx == 0 || cfg.n_rx == 0 {
            return Err(conf("antenna counts must be positive".into()));
        }
        if cfg.max_frames == 0 {
            return Err(conf("max_frames must be positive".into()));
        }
        let bp = BpConfig::new(cfg.bp_iters);
        bp.validate()?;
        cfg.ascent.validate()?;
        let pcm = cfg.code.load()?;
        let group = cfg.n_tx * cfg.modulation.bits_per_symbol();
        if pcm.n_cols() % group != 0 {
            return Err(conf(format!(
                "code length {} is not a multiple of n_tx * bits_per_symbol = {group}",
                pcm.n_cols()
            )));
        }
        let n_data = pcm.n_cols() / group;
        let encoder = build_encoder(&pcm)?;
        let alphabet = VectorAlphabet::new(cfg.modulation, cfg.n_tx)?;
        let pilots = make_pilots(cfg.n_pilot, cfg.n_tx, cfg.modulation)?;
        let interleaver = Interleaver::new(interleaver_seed(cfg.seed), pcm.n_cols());
        let channel_pcm = pcm.permute_columns(&interleaver.positions())?;
        let decoder = BpDecoder::new(&pcm);
        Ok(Self {
            cfg,
            pcm,
            channel_pcm,
            encoder,
            decoder,
            alphabet,
            interleaver,
            pilots,
            n_data,
        })
    }

    pub fn bp_config(&self) -> BpConfig {
        BpConfig::new(self.cfg.bp_iters)
    }

    /// Noise variance `2 sigma^2` at an SNR point.
    pub fn noise_var(&self, snr_db: f64) -> f64 {
        snr_db_to_noise_var(snr_db, self.cfg.n_tx, self.cfg.n_rx, 1.0)
    }
}

/// One frame's random draw and what the receiver observes.
#[derive(Debug, Clone)]
pub struct Frame {
    pub info: Vec<u8>,
    pub codeword: Vec<u8>,
    pub channel: ChannelMatrix,
    pub y_p: DMatrix<Complex64>,
    pub y_d: DMatrix<Complex64>,
}

/// Draws a frame: message bits, channel and noise, in that order.
pub fn draw_frame<R: Rng>(link: &Link, noise_var: f64, rng: &mut R) -> Result<Frame, HarnessError> {
    let info: Vec<u8> = (0..link.encoder.k()).map(|_| rng.random_range(0..2u8)).collect();
    let codeword = link.encoder.encode(&info)?;
    let x_d = modulate(&link.interleaver.apply(&codeword), link.cfg.modulation, link.cfg.n_tx)?;
    let n_p = link.cfg.n_pilot;
    let mut x = DMatrix::zeros(link.cfg.n_tx, n_p + link.n_data);
    x.columns_mut(0, n_p).copy_from(&link.pilots);
    x.columns_mut(n_p, link.n_data).copy_from(&x_d);
    let channel = sample_channel(rng, link.cfg.n_rx, link.cfg.n_tx);
    let z_var = if link.cfg.noise_off { 0.0 } else { noise_var };
    let y = transmit(&x, &channel, z_var, rng)?;
    Ok(Frame {
        info,
        codeword,
        channel,
        y_p: y.columns(0, n_p).into_owned(),
        y_d: y.columns(n_p, link.n_data).into_owned(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub success: bool,
    pub outer_iters: usize,
    pub metric_evals: usize,
    pub bp_iters: usize,
    pub elapsed: Duration,
    /// Channel estimate used for the final detection.
    pub estimate: ChannelMatrix,
}

impl SchemeOutcome {
    /// Outcome fields that must repeat exactly for a fixed seed.
    pub fn key(&self) -> (Scheme, bool, usize, usize, usize) {
        (self.scheme, self.success, self.outer_iters, self.metric_evals, self.bp_iters)
    }
}

/// Detects under `estimate`, deinterleaves, decodes and compares to the message.
fn decode_with(
    link: &Link,
    frame: &Frame,
    estimate: &ChannelMatrix,
    noise_var: f64,
) -> Result<(bool, usize), HarnessError> {
    let (llrs, _) = max_log_detect(&frame.y_d, estimate, noise_var, &link.alphabet)?;
    let llrs = link.interleaver.invert(&llrs);
    let out = link.decoder.decode(&llrs, &link.bp_config())?;
    let success = link.encoder.extract_info(&out.hard_bits) == frame.info;
    Ok((success, out.iters_used))
}

/// Runs every configured scheme on one shared frame.
pub fn run_trial(link: &Link, snr_index: usize, trial: u64) -> Result<Vec<SchemeOutcome>, HarnessError> {
    let snr_db = *link
        .cfg
        .snr_db
        .get(snr_index)
        .ok_or_else(|| HarnessError::Config(format!("SNR index {snr_index} out of range")))?;
    let noise_var = link.noise_var(snr_db);
    let mut rng = trial_rng(link.cfg.seed, snr_index, trial);
    let frame = draw_frame(link, noise_var, &mut rng)?;
    run_schemes(link, &frame, noise_var)
}

/// Runs every configured scheme on a given frame.
pub fn run_schemes(link: &Link, frame: &Frame, noise_var: f64) -> Result<Vec<SchemeOutcome>, HarnessError> {
    let mut h_hat: Option<ChannelMatrix> = None;
    let mut out = Vec::with_capacity(link.cfg.schemes.len());
    for &scheme in &link.cfg.schemes {
        let start = Instant::now();
        let (estimate, outer_iters, metric_evals) = match scheme {
            Scheme::Perfect => (frame.channel.clone(), 0, 0),
            _ => {
                let base = match &h_hat {
                    Some(h) => h.clone(),
                    None => {
                        let h = lmmse(&frame.y_p, &link.pilots, noise_var)?;
                        h_hat = Some(h.clone());
                        h
                    }
                };
                match scheme.ascent_variant() {
                    None => (base, 0, 0),
                    Some(variant) => {
                        let params = AscentParams {
                            variant,
                            ..link.cfg.ascent
                        };
                        let res = coordinate_ascent(
                            &frame.y_d,
                            &base,
                            &link.channel_pcm,
                            &link.alphabet,
                            noise_var,
                            link.cfg.n_pilot,
                            &params,
                        )?;
                        (res.channel, res.outer_iters, res.metric_evals)
                    }
                }
            }
        };
        let (success, bp_iters) = decode_with(link, frame, &estimate, noise_var)?;
        out.push(SchemeOutcome {
            scheme,
            success,
            outer_iters,
            metric_evals,
            bp_iters,
            elapsed: start.elapsed(),
            estimate,
        });
    }
    Ok(out)
}

/// Aggregated results for one scheme at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    /// Mean outer iterations `N_1` (0 for schemes without refinement).
    pub avg_n1: f64,
    /// Mean metric evaluations `N_2`.
    pub avg_n2: f64,
    pub avg_bp_iters: f64,
    pub wall_s: f64,
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    frames: u64,
    errors: u64,
    n1: u64,
    n2: u64,
    bp: u64,
    elapsed: Duration,
}

impl Accumulator {
    fn add(&mut self, o: &SchemeOutcome) {
        self.frames += 1;
        self.errors += u64::from(!o.success);
        self.n1 += o.outer_iters as u64;
        self.n2 += o.metric_evals as u64;
        self.bp += o.bp_iters as u64;
        self.elapsed += o.elapsed;
    }

    fn record(&self, snr_db: f64, scheme: Scheme) -> SweepRecord {
        let n = self.frames.max(1) as f64;
        SweepRecord {
            snr_db,
            scheme,
            frames: self.frames,
            frame_errors: self.errors,
            fer: self.errors as f64 / n,
            avg_n1: self.n1 as f64 / n,
            avg_n2: self.n2 as f64 / n,
            avg_bp_iters: self.bp as f64 / n,
            wall_s: self.elapsed.as_secs_f64(),
        }
    }
}

/// Runs the sweep on Rayon's current pool.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>, HarnessError> {
    run_sweep_with(cfg, Execution::Parallel, |_| {})
}

/// Runs the sweep. Trials are consumed in index order, so the records do not
/// depend on `exec` or the thread count. `on_point` sees each SNR point's
/// records as soon as they are final.
pub fn run_sweep_with(
    cfg: &ExperimentConfig,
    exec: Execution,
    mut on_point: impl FnMut(&[SweepRecord]),
) -> Result<Vec<SweepRecord>, HarnessError> {
    let link = Link::new(cfg.clone())?;
    let stop_idx = cfg
        .stopping_scheme()
        .and_then(|s| cfg.schemes.iter().position(|&x| x == s))
        .unwrap_or(0);
    let mut records = Vec::with_capacity(cfg.snr_db.len() * cfg.schemes.len());
    for (si, &snr_db) in cfg.snr_db.iter().enumerate() {
        let mut acc = vec![Accumulator::default(); cfg.schemes.len()];
        let mut next = 0u64;
        'point: while next < cfg.max_frames {
            let end = (next + BATCH).min(cfg.max_frames);
            let batch = map_range(exec, next..end, |t| run_trial(&link, si, t));
            for outcome in batch {
                let outcome = outcome?;
                for (a, o) in acc.iter_mut().zip(&outcome) {
                    a.add(o);
                }
                if acc[stop_idx].errors >= cfg.target_errors {
                    break 'point;
                }
            }
            next = end;
        }
        let point: Vec<SweepRecord> = cfg
            .schemes
            .iter()
            .zip(&acc)
            .map(|(&s, a)| a.record(snr_db, s))
            .collect();
        on_point(&point);
        records.extend(point);
    }
    Ok(records)
}
