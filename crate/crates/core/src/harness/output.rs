//! CSV results and run manifest.

use super::{ExperimentConfig, HarnessError, Scheme, SweepRecord};
use std::io::Write;
use std::path::Path;

pub const CSV_HEADER: [&str; 9] = [
    "snr_db",
    "scheme",
    "frames",
    "frame_errors",
    "fer",
    "avg_n1",
    "avg_n2",
    "avg_bp_iters",
    "wall_s",
];

/// Formats like C's `%g`: six significant digits, trailing zeros removed,
/// scientific notation when the exponent is below -4 or at least 6.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn record_fields(r: &SweepRecord) -> [String; 9] {
    [
        fmt_sig6(r.snr_db),
        r.scheme.to_string(),
        r.frames.to_string(),
        r.frame_errors.to_string(),
        fmt_sig6(r.fer),
        fmt_sig6(r.avg_n1),
        fmt_sig6(r.avg_n2),
        fmt_sig6(r.avg_bp_iters),
        fmt_sig6(r.wall_s),
    ]
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Output {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

/// Writes one row per record after the header; an empty slice yields the
/// header alone.
pub fn write_csv(path: &Path, records: &[SweepRecord]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| output_err(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| output_err(path, e))?;
    for r in records {
        w.write_record(record_fields(r)).map_err(|e| output_err(path, e))?;
    }
    w.flush().map_err(|e| output_err(path, e))
}

/// Reads a results file written by [`write_csv`].
pub fn parse_csv(path: &Path) -> Result<Vec<SweepRecord>, HarnessError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| output_err(path, e))?;
    let header = rd.headers().map_err(|e| output_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(output_err(path, "unexpected header"));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row.map_err(|e| output_err(path, e))?;
        let f = |i: usize| row[i].parse::<f64>().map_err(|e| output_err(path, e));
        let u = |i: usize| row[i].parse::<u64>().map_err(|e| output_err(path, e));
        out.push(SweepRecord {
            snr_db: f(0)?,
            scheme: row[1].parse::<Scheme>().map_err(|e| output_err(path, e))?,
            frames: u(2)?,
            frame_errors: u(3)?,
            fer: f(4)?,
            avg_n1: f(5)?,
            avg_n2: f(6)?,
            avg_bp_iters: f(7)?,
            wall_s: f(8)?,
        });
    }
    Ok(out)
}

/// `key = value` lines describing a run, sufficient to reproduce it.
pub fn render_manifest(cfg: &ExperimentConfig, threads: Option<usize>) -> String {
    let a = &cfg.ascent;
    let snr: Vec<String> = cfg.snr_db.iter().map(|&s| fmt_sig6(s)).collect();
    let schemes: Vec<&str> = cfg.schemes.iter().map(|s| s.name()).collect();
    let lines = [
        ("crate_version", env!("CARGO_PKG_VERSION").to_string()),
        ("code", cfg.code.to_string()),
        ("modulation", cfg.modulation.to_string()),
        ("n_tx", cfg.n_tx.to_string()),
        ("n_rx", cfg.n_rx.to_string()),
        ("n_pilot", cfg.n_pilot.to_string()),
        ("snr_db", snr.join(",")),
        ("schemes", schemes.join(",")),
        ("bp_iters", cfg.bp_iters.to_string()),
        ("step_scale", fmt_sig6(a.step_scale)),
        ("grid_halfwidth", a.grid_halfwidth.to_string()),
        ("eps", fmt_sig6(a.eps)),
        ("eps_steps", fmt_sig6(a.eps_steps)),
        ("max_outer", a.max_outer.to_string()),
        ("llr_clamp", fmt_sig6(a.clamp)),
        ("max_frames", cfg.max_frames.to_string()),
        ("target_errors", cfg.target_errors.to_string()),
        ("seed", cfg.seed.to_string()),
        ("noise_off", cfg.noise_off.to_string()),
        ("threads", threads.map_or("auto".into(), |t| t.to_string())),
    ];
    lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

pub fn write_manifest(path: &Path, cfg: &ExperimentConfig, threads: Option<usize>) -> Result<(), HarnessError> {
    let mut f = std::fs::File::create(path).map_err(|e| output_err(path, e))?;
    f.write_all(render_manifest(cfg, threads).as_bytes())
        .map_err(|e| output_err(path, e))
}
