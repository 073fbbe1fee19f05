//! Splitting a TDD coherence block between uplink training and downlink
//! data: the optimal training length, its limits, and the joint
//! (training, user count) optimization.
//!
//! Run with: cargo run --release --example tdd_training

use misolab::optimize::{
    joint_training_user_opt, normalized_tdd_rate, optimal_training_length, TddConfig, TddScheme,
};

fn main() -> misolab::Result<()> {
    let make = |scheme, t| TddConfig::new(t, 16, 32, 0.1, 1.0, scheme);

    println!("optimal training fraction T_t*/T (M = 32, K = 16, rho_ul = 0.1 rho_dl):");
    println!(
        "{:>10} {:>12} {:>12} {:>12} {:>12}",
        "rho_dl_db", "zf T=100", "zf T=1000", "orzf T=100", "orzf T=1000"
    );
    for db in (-20..=40).step_by(10) {
        let rho_dl = 10f64.powf(db as f64 / 10.0);
        let mut row = format!("{db:>10}");
        for scheme in [TddScheme::Zf, TddScheme::Orzf] {
            for t in [100.0, 1000.0] {
                let opt = optimal_training_length(&make(scheme, t)?, rho_dl)?;
                row += &format!(" {:>12.4}", opt.t_t / t);
            }
        }
        println!("{row}");
    }

    println!("\nlimits:");
    let low = optimal_training_length(&make(TddScheme::Zf, 1000.0)?, 1e-4)?;
    println!("  -40 dB: T_t* = {:.2} (half the block)", low.t_t);
    let high = optimal_training_length(&make(TddScheme::Zf, 100.0)?, 1e6)?;
    println!("  +60 dB, T = 100: T_t* = {} (the minimum K)", high.t_t);

    // The objective is concave in the training length.
    let cfg = make(TddScheme::Zf, 1000.0)?;
    let rho_dl = 10.0;
    println!("\nnormalized rate across the training interval at 10 dB (T = 1000):");
    for t_t in [16.0, 100.0, 250.0, 500.0, 750.0, 1000.0] {
        println!("  T_t = {t_t:>6.0}: {:.4}", normalized_tdd_rate(&cfg, rho_dl, t_t));
    }

    println!("\njoint (T_t, K) optimization against fixed K = 16 (zf, T = 1000):");
    println!("{:>10} {:>14} {:>14} {:>8} {:>10}", "rho_dl_db", "fixed rate", "joint rate", "K*", "T_t*");
    for db in (0..=40).step_by(10) {
        let rho_dl = 10f64.powf(db as f64 / 10.0);
        let fixed = optimal_training_length(&cfg, rho_dl)?;
        let joint = joint_training_user_opt(&cfg, rho_dl)?;
        println!(
            "{db:>10} {:>14.4} {:>14.4} {:>8} {:>10.2}",
            fixed.rate, joint.rate, joint.k, joint.t_t
        );
    }
    println!("(the gain from adapting K grows with SNR)");
    Ok(())
}
