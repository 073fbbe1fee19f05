//! Limited-feedback scaling laws: how many quantization bits per user hold
//! a fixed rate offset against perfect CSIT, and how the three precoder
//! designs compare at high SNR.
//!
//! Run with: cargo run --release --example feedback_scaling

use misolab::optimize::{
    distortion_for_rate_offset, feedback_bits, phi, rate_gap, RateGapSpec, Scheme,
};

fn main() -> misolab::Result<()> {
    let (m, b) = (10usize, 2.0f64);
    println!("bits per user holding a log2({b}) = {} bit offset (M = {m})", b.log2());
    println!(
        "{:>8} {:>12} {:>12} {:>12}",
        "snr_db", "orzf", "rzf_cdu", "zf(beta=2)"
    );
    for snr_db in (5..=30).step_by(5) {
        let rho = 10f64.powf(snr_db as f64 / 10.0);
        let orzf = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::Orzf)?, m)?;
        let cdu = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::RzfCdu)?, m)?;
        let zf = feedback_bits(&RateGapSpec::new(b, rho, 2.0, Scheme::Zf)?, m)?;
        println!(
            "{snr_db:>8} {:>12} {:>12} {:>12}",
            orzf.bits, cdu.bits, zf.bits
        );
    }

    // The inversion is exact: plugging the distortion back into the rate
    // gap reproduces log2(b).
    let spec = RateGapSpec::new(b, 100.0, 1.0, Scheme::Orzf)?;
    let tau2 = distortion_for_rate_offset(&spec)?;
    println!("\nat 20 dB the offset-holding distortion is tau^2 = {tau2:.6}");
    println!(
        "rate gap at that distortion = {:.12} bits/s/Hz (target {})",
        rate_gap(Scheme::Orzf, 100.0, tau2, 1.0),
        b.log2()
    );

    println!("\nphi(rho, b) against its high-SNR limits at 60 dB:");
    let rho = 1e6;
    let rows = [
        ("orzf, beta = 1", phi(Scheme::Orzf, rho, b, 1.0)?, b * b - 1.0),
        ("orzf, beta = 2", phi(Scheme::Orzf, rho, b, 2.0)?, b - 1.0),
        ("rzf_cdu, beta = 1", phi(Scheme::RzfCdu, rho, b, 1.0)?, 2.0 * (b - 1.0)),
        ("zf, beta = 2", phi(Scheme::Zf, rho, b, 2.0)?, b - 1.0),
    ];
    for (label, value, limit) in rows {
        println!("  {label:<18} phi = {value:.6}, limit = {limit} ({:+.3}%)", (value / limit - 1.0) * 100.0);
    }

    let m1 = m as f64 - 1.0;
    let orzf = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::Orzf)?, m)?.real;
    let cdu = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::RzfCdu)?, m)?.real;
    let zf = feedback_bits(&RateGapSpec::new(b, rho, 2.0, Scheme::Zf)?, m)?.real;
    println!("\nbit gaps at 60 dB:");
    println!(
        "  zf - orzf  = {:.3} bits (asymptote (M-1) log2(b+1) = {:.3})",
        zf - orzf,
        m1 * (b + 1.0).log2()
    );
    println!(
        "  cdu - orzf = {:.3} bits (asymptote (M-1) log2((b+1)/2) = {:.3})",
        cdu - orzf,
        m1 * ((b + 1.0) / 2.0).log2()
    );
    Ok(())
}
