//! Channel estimation error and gain of the ascent estimate as a function of
//! the outer-iteration cap, starting from the pilot-only LMMSE estimate.
//!
//! `cargo run --release --example estimate_drift -- --snr 10 --b 1`

use clap::Parser;
use lct_core::channel::{make_pilots, sample_channel, snr_db_to_noise_var, transmit, ChannelMatrix};
use lct_core::ldpc::{build_encoder, wimax};
use lct_core::modem::modulate;
use lct_core::{coordinate_ascent, lmmse, AscentParams, Modulation, VectorAlphabet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
struct Args {
    #[arg(long, default_value_t = 10.0)]
    snr: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 30.0)]
    metric_clamp: f64,
    #[arg(long, default_value_t = 100)]
    frames: usize,
    #[arg(long, default_value_t = 9)]
    seed: u64,
}

fn main() {
    let args = Args::parse();
    let pcm = wimax::n192();
    let enc = build_encoder(&pcm).unwrap();
    let alphabet = VectorAlphabet::new(Modulation::Qpsk, 2).unwrap();
    let xp = make_pilots(15, 2, Modulation::Qpsk).unwrap();
    let nv = snr_db_to_noise_var(args.snr, 2, 2, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let caps = [0usize, 1, 2, 3, 5, 10, 20];
    let mut sq_err = vec![0.0; caps.len()];
    let mut gain = vec![0.0; caps.len()];
    for _ in 0..args.frames {
        let u: Vec<u8> = (0..enc.k()).map(|_| rng.random_range(0..2)).collect();
        let x = modulate(&enc.encode(&u).unwrap(), Modulation::Qpsk, 2).unwrap();
        let h = sample_channel(&mut rng, 2, 2);
        let yp = transmit(&xp, &h, nv, &mut rng).unwrap();
        let yd = transmit(&x, &h, nv, &mut rng).unwrap();
        let h_hat = lmmse(&yp, &xp, nv).unwrap();
        for (k, &cap) in caps.iter().enumerate() {
            // A cap of zero reports the LMMSE starting point.
            let est = if cap == 0 {
                h_hat.clone()
            } else {
                let p = AscentParams {
                    step_scale: args.b,
                    clamp: args.metric_clamp,
                    max_outer: cap,
                    ..AscentParams::default()
                };
                coordinate_ascent(&yd, &h_hat, &pcm, &alphabet, nv, 15, &p).unwrap().channel
            };
            sq_err[k] += ChannelMatrix(&est.0 - &h.0).frobenius().powi(2);
            gain[k] += est.frobenius().powi(2) / h.frobenius().powi(2);
        }
    }
    let n = args.frames as f64;
    println!("max_outer  mse       |H~|^2/|H|^2");
    for (k, &cap) in caps.iter().enumerate() {
        println!("{cap:>9}  {:.5}  {:.4}", sq_err[k] / n, gain[k] / n);
    }
}
