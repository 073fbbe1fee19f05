//! Exact ZF and RZF precoding on a single channel realization: power
//! normalization, interference nulling and per-user SINR.
//!
//! Run with: cargo run --release --example precoding_basics

use misolab::channel::{substream, CorrelationSpec, PathLossSpec, StreamTag, SystemConfig};
use misolab::precoding::{exact_sinr, rzf_precoder, sum_rate, transmit_power, zf_precoder};

fn main() -> misolab::Result<()> {
    let cfg = SystemConfig::new(
        16,
        8,
        15.0,
        1.0,
        0.2,
        CorrelationSpec::Identity,
        PathLossSpec::Equal,
    )?;
    let model = cfg.resolve(&mut substream(7, StreamTag::PathLoss));
    let real = model.sample(&mut substream(7, StreamTag::Trial { snr_index: 0, trial: 0 }));

    let zf = zf_precoder(&real.h_hat, cfg.power)?;
    println!("zf:  tr(G G^H) = {:.12} (power budget {})", transmit_power(&zf.g), cfg.power);
    println!("     xi^2      = {:.6}", zf.xi2);
    let gammas = exact_sinr(&real.h, &zf.g, cfg.sigma2, cfg.m);
    println!("     sum rate  = {:.4} bits/s/Hz", sum_rate(&gammas));

    // Residual interference on the *estimated* channel is numerically zero;
    // on the true channel it is limited by the CSIT distortion.
    let est = &real.h_hat * &zf.g;
    let worst = (0..cfg.k)
        .flat_map(|i| (0..cfg.k).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| est[(i, j)].norm())
        .fold(0.0f64, f64::max);
    println!("     worst estimated-channel leakage |h_hat_k^H g_j| = {worst:.3e}");

    println!("\nrzf ridge sweep (same realization):");
    println!("{:>10} {:>14} {:>14}", "alpha", "sum rate", "tr(G G^H)");
    for &alpha in &[1e-4, 1e-2, 0.1, 1.0, 10.0] {
        let p = rzf_precoder(&real.h_hat, alpha, cfg.power)?;
        let g = exact_sinr(&real.h, &p.g, cfg.sigma2, cfg.m);
        println!("{alpha:>10.4} {:>14.4} {:>14.10}", sum_rate(&g), transmit_power(&p.g));
    }
    Ok(())
}
