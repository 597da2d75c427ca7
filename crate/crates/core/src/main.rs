use clap::Parser;
use lct_core::harness::{
    parse_schemes, parse_snr_grid, run_sweep_with, write_csv, write_manifest, CodeSource, ExperimentConfig,
    HarnessError,
};
use lct_core::par::with_threads;
use lct_core::{AscentParams, Modulation};
use std::path::PathBuf;
use std::process::ExitCode;

/// Monte Carlo FER sweeps for pilot-based and code-aided MIMO channel estimation.
#[derive(Debug, Parser)]
#[command(name = "lct-sim", version)]
struct Cli {
    /// Parity-check matrix in alist format (default: built-in (192, 96) WiMAX code).
    #[arg(long)]
    code: Option<PathBuf>,
    /// Constellation: qpsk or qam16.
    #[arg(long = "mod", default_value = "qpsk")]
    modulation: Modulation,
    #[arg(long, default_value_t = 2)]
    nt: usize,
    #[arg(long, default_value_t = 2)]
    nr: usize,
    /// Pilot channel uses.
    #[arg(long, default_value_t = 15)]
    np: usize,
    /// SNR grid in dB: start:step:stop (inclusive) or a comma list.
    #[arg(long, default_value = "10:3:19")]
    snr: String,
    /// Comma list of perfect, pat, lct, lct_u, lct_ua.
    #[arg(long, default_value = "perfect,pat,lct_ua")]
    scheme: String,
    #[arg(long = "bp-iters", default_value_t = 15)]
    bp_iters: usize,
    /// Grid step multiplier.
    #[arg(long)]
    b: Option<f64>,
    /// Grid points per side.
    #[arg(long)]
    grid: Option<usize>,
    /// Outer-iteration stopping threshold on the Frobenius norm of the update.
    #[arg(long)]
    eps: Option<f64>,
    /// Stopping threshold in grid steps (0 disables).
    #[arg(long = "eps-steps")]
    eps_steps: Option<f64>,
    #[arg(long = "max-outer")]
    max_outer: Option<usize>,
    /// LLR magnitude bound inside the parity-check metric.
    #[arg(long = "metric-clamp")]
    metric_clamp: Option<f64>,
    #[arg(long = "max-frames", default_value_t = 1_000_000)]
    max_frames: u64,
    /// Frame errors on the perfect-CSI arm (or the first scheme) that end an SNR point.
    #[arg(long = "target-errors", default_value_t = 200)]
    target_errors: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores; 1 runs sequentially).
    #[arg(long)]
    threads: Option<usize>,
    /// Output CSV; the manifest is written next to it with a `.manifest` suffix.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Debug: transmit without noise.
    #[arg(long = "noise-off")]
    noise_off: bool,
}

impl Cli {
    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let conf = HarnessError::Config;
        let defaults = AscentParams::default();
        let ascent = AscentParams {
            step_scale: self.b.unwrap_or(defaults.step_scale),
            grid_halfwidth: self.grid.unwrap_or(defaults.grid_halfwidth),
            eps: self.eps.unwrap_or(defaults.eps),
            eps_steps: self.eps_steps.unwrap_or(defaults.eps_steps),
            max_outer: self.max_outer.unwrap_or(defaults.max_outer),
            clamp: self.metric_clamp.unwrap_or(defaults.clamp),
            ..defaults
        };
        Ok(ExperimentConfig {
            code: self.code.clone().map_or(CodeSource::Wimax192, CodeSource::Alist),
            modulation: self.modulation,
            n_tx: self.nt,
            n_rx: self.nr,
            n_pilot: self.np,
            snr_db: parse_snr_grid(&self.snr).map_err(conf)?,
            schemes: parse_schemes(&self.scheme).map_err(conf)?,
            bp_iters: self.bp_iters,
            ascent,
            max_frames: self.max_frames,
            target_errors: self.target_errors,
            seed: self.seed,
            noise_off: self.noise_off,
        })
    }
}

fn manifest_path(out: &std::path::Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let cfg = cli.config()?;
    if cli.threads == Some(0) {
        return Err(HarnessError::Config("--threads must be positive".into()));
    }
    write_manifest(&manifest_path(&cli.out), &cfg, cli.threads)?;
    let records = with_threads(cli.threads, |exec| {
        run_sweep_with(&cfg, exec, |point| {
            for r in point {
                eprintln!(
                    "snr {:>6.2} dB  {:<8} frames {:>8}  errors {:>6}  fer {:.3e}  n1 {:.2}",
                    r.snr_db, r.scheme, r.frames, r.frame_errors, r.fer, r.avg_n1
                );
            }
        })
    })?;
    write_csv(&cli.out, &records)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, HarnessError::Config(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
