//! The sum-rate maximizing RZF ridge: closed form, line search, and what
//! happens to the equivalent sum rate around the optimum.
//!
//! Run with: cargo run --release --example optimal_regularization

use misolab::channel::Correlation;
use misolab::det_equiv::{rzf_sinr_general, sum_rate_de};
use misolab::optimize::{alpha_star, alpha_star_search, default_alpha_bracket};

fn main() -> misolab::Result<()> {
    let (rho, tau2, beta) = (100.0, 0.1, 1.0);
    let closed = alpha_star(rho, tau2, beta)?;
    println!("iid case, rho = {rho}, tau^2 = {tau2}, beta = {beta}");
    println!("  closed form alpha* = {closed:.12}");

    let k = 16;
    let theta = Correlation::identity(16);
    let gains = vec![1.0; k];
    let tau = vec![tau2.sqrt(); k];
    let search = alpha_star_search(
        &theta,
        &gains,
        &tau,
        rho,
        beta,
        default_alpha_bracket(rho, beta),
        1e-8,
    )?;
    println!("  line search alpha* = {:.12}", search.alpha);
    println!(
        "  relative disagreement = {:.2e}",
        (search.alpha - closed).abs() / closed
    );

    println!("\nequivalent sum rate around the optimum:");
    println!("{:>14} {:>14}", "alpha/alpha*", "sum rate");
    for &scale in &[0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let de = rzf_sinr_general(&theta, &gains, &tau, closed * scale, rho, beta)?;
        println!("{scale:>14.3} {:>14.6}", sum_rate_de(&de.gamma));
    }

    // Correlated antennas and unequal gains: the ridge comes from the
    // search; the high-SNR distortion floor keeps it away from zero.
    let theta = Correlation::jakes_uca(16, 0.5);
    let gains = vec![0.4, 0.6, 0.8, 0.9, 1.0, 1.1, 1.4, 1.8];
    let tau = vec![tau2.sqrt(); 8];
    println!("\njakes correlation + unequal gains, beta = 2:");
    println!("{:>8} {:>16} {:>14}", "snr_db", "alpha*", "sum rate");
    for &snr_db in &[0.0, 10.0, 20.0, 30.0] {
        let rho = 10f64.powf(snr_db / 10.0);
        let s = alpha_star_search(
            &theta,
            &gains,
            &tau,
            rho,
            2.0,
            default_alpha_bracket(rho, 2.0),
            1e-8,
        )?;
        println!("{snr_db:>8.1} {:>16.8} {:>14.4}", s.alpha, s.de_sum_rate);
    }
    Ok(())
}
