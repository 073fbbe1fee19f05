//! The scalar fixed point behind every deterministic equivalent.
//!
//! Solves the implicit equation for a general weighted-resolvent model,
//! cross-checks the sample-covariance special case against the closed-form
//! Marcenko-Pastur transform, and differentiates the equivalent numerically.
//!
//! Run with: cargo run --release --example fixed_point

use misolab::rmt::{
    marchenko_pastur_stieltjes, resolvent_derivative, GeneralDeModel, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use nalgebra::{DMatrix, DVector};

fn main() -> misolab::Result<()> {
    // Sample-covariance case: R = Q = I, S = 0, T = I.
    println!("Marcenko-Pastur cross-check (solver vs closed form)");
    println!("{:>8} {:>6} {:>22} {:>22} {:>6}", "alpha", "beta", "fixed point", "closed form", "iters");
    for &(alpha, beta) in &[(1.0, 1.0), (0.1, 1.0), (0.5, 2.0), (2.0, 4.0)] {
        let n = 8;
        let t_len = (n as f64 / beta).round() as usize;
        let model = GeneralDeModel::new(
            DMatrix::identity(n, n),
            DMatrix::zeros(n, n),
            DMatrix::identity(n, n),
            DVector::from_element(t_len, 1.0),
            beta,
            -alpha,
        )?;
        let sol = model.solve(DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let mp = marchenko_pastur_stieltjes(alpha, beta);
        println!(
            "{alpha:>8.3} {beta:>6.2} {:>22.15} {mp:>22.15} {:>6}",
            sol.e, sol.iterations
        );
    }

    // A correlated model with inhomogeneous diagonal weights.
    let n = 6;
    let mut r = DMatrix::identity(n, n);
    r[(0, 0)] = 3.0;
    r[(1, 1)] = 2.0;
    let model = GeneralDeModel::new(
        r,
        DMatrix::identity(n, n) * 0.2,
        DMatrix::identity(n, n),
        DVector::from_fn(n, |i, _| 0.5 + 0.3 * i as f64),
        1.5,
        -0.8,
    )?;
    let sol = model.solve(1e-12, 10_000)?;
    println!("\ngeneral model at z = -0.8:");
    println!("  e        = {:.15}", sol.e);
    println!("  c        = {:.15}", sol.c);
    println!("  m        = {:.15}", sol.m);
    println!("  residual = {:.3e} after {} iterations", sol.residual, sol.iterations);

    let d = resolvent_derivative(&model, &sol, 1e-4 * 0.8)?;
    println!("  dm/dz    = {d:.12} (central difference, h = 1e-4 |z|)");
    Ok(())
}
