//! How many users should a ZF transmitter serve? The closed-form optimal
//! load through the Lambert-W function against the integer search on the
//! deterministic equivalent.
//!
//! Run with: cargo run --release --example user_count

use misolab::channel::{draw_pathloss_gains, substream, Correlation, PathLossSpec, StreamTag};
use misolab::optimize::{load_stationarity_residual, optimal_load_iid, optimal_user_count};
use misolab::rmt::lambert_w0;

fn main() -> misolab::Result<()> {
    // The load formula runs through w e^w = x.
    let w = lambert_w0(1.0)?;
    println!("lambert_w0(1) = {w:.15} (roundtrip w e^w = {:.15})", w * w.exp());

    let m = 16;
    let identity = Correlation::identity(m);
    let jakes = Correlation::jakes_uca(m, 0.5);
    let mut rng = substream(5, StreamTag::GainSamples);
    let samples: Vec<f64> = draw_pathloss_gains(
        10_000,
        &PathLossSpec::Cost231Disk {
            cell_radius_m: 500.0,
            min_distance_m: 35.0,
        },
        &mut rng,
    )
    .iter()
    .cloned()
    .collect();

    println!("\nM = {m}, tau^2 = 0.1:");
    println!(
        "{:>8} {:>10} {:>12} {:>10} {:>16}",
        "snr_db", "beta*", "M/beta*", "K*(iid)", "K*(jakes+cost)"
    );
    let tau2 = 0.1;
    for snr_db in (-10..=30).step_by(5) {
        let rho = 10f64.powf(snr_db as f64 / 10.0);
        let beta = optimal_load_iid(rho, tau2)?;
        let k_iid = optimal_user_count(m, rho, tau2, &identity, &[1.0])?;
        let k_corr = optimal_user_count(m, rho, tau2, &jakes, &samples)?;
        println!(
            "{snr_db:>8} {beta:>10.4} {:>12.3} {k_iid:>10} {k_corr:>16}",
            m as f64 / beta
        );
    }
    println!("(with distortion the optimal count saturates at high SNR)");

    let a = (1.0 - tau2) / (tau2 + 0.1);
    let beta = optimal_load_iid(10.0, tau2)?;
    println!(
        "\nstationarity residual of beta* at rho = 10: {:.2e}",
        load_stationarity_residual(a, beta)
    );
    println!(
        "limit check: beta* -> e as a -> 1: {:.12} vs e = {:.12}",
        optimal_load_iid(1.0, 0.0)?,
        std::f64::consts::E
    );
    Ok(())
}
