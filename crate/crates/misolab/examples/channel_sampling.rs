//! Channel and CSIT sampling: Jakes/UCA correlation, COST231 user gains,
//! and the distortion mix between the true and estimated channels.
//!
//! Run with: cargo run --release --example channel_sampling

use misolab::channel::{
    substream, CorrelationSpec, PathLossSpec, StreamTag, SystemConfig,
};
use num_complex::Complex64;

fn main() -> misolab::Result<()> {
    let cfg = SystemConfig::new(
        8,
        4,
        10.0,
        1.0,
        0.3,
        CorrelationSpec::JakesUca { d_over_lambda: 0.5 },
        PathLossSpec::Cost231Disk {
            cell_radius_m: 500.0,
            min_distance_m: 35.0,
        },
    )?;
    println!(
        "system: M={} K={} beta={} rho={} sigma2={:.4}",
        cfg.m,
        cfg.k,
        cfg.beta(),
        cfg.rho(),
        cfg.sigma2
    );

    let model = cfg.resolve(&mut substream(42, StreamTag::PathLoss));
    println!("\ncorrelation eigenvalues (Jakes UCA, d/lambda = 0.5):");
    for (i, l) in model.theta.eigenvalues().iter().enumerate() {
        println!("  lambda_{i} = {l:.6}");
    }
    println!("\nnormalized user gains (sorted, unit mean):");
    for (k, g) in model.gains.iter().enumerate() {
        println!("  l_{k} = {g:.6}");
    }

    // Empirical estimate correlation across distortion levels.
    println!("\nestimate-to-channel correlation vs distortion:");
    for &tau in &[0.0, 0.3, 0.7, 1.0] {
        let cfg = SystemConfig::new(8, 4, 10.0, 1.0, tau, CorrelationSpec::Identity, PathLossSpec::Equal)?;
        let model = cfg.resolve(&mut substream(42, StreamTag::PathLoss));
        let mut acc = Complex64::new(0.0, 0.0);
        let (mut n1, mut n2) = (0.0, 0.0);
        for trial in 0..400 {
            let mut rng = substream(42, StreamTag::Trial { snr_index: 0, trial });
            let r = model.sample(&mut rng);
            for (a, b) in r.h.iter().zip(r.h_hat.iter()) {
                acc += a * b.conj();
                n1 += a.norm_sqr();
                n2 += b.norm_sqr();
            }
        }
        println!(
            "  tau = {tau:.1}: corr = {:.4} (sqrt(1 - tau^2) = {:.4})",
            acc.norm() / (n1 * n2).sqrt(),
            (1.0 - tau * tau).sqrt()
        );
    }
    Ok(())
}
