//! Deterministic equivalents of the per-user SINR and sum rate for ZF and
//! RZF precoding.
//!
//! For large `(M, K)` with fixed `beta = M/K`, the random per-user SINR
//! concentrates around a deterministic value that depends only on the
//! correlation spectrum, the user gains, the distortions `tau_k`, the ridge
//! `alpha` and the SNR. The general forms are implicit (a scalar fixed
//! point); for uncorrelated antennas and equal gains they collapse to closed
//! expressions.
//!
//! All weighted traces reduce to averages over the correlation eigenvalues
//! and the gain vector, so no matrix algebra happens here.

use nalgebra::DVector;

use crate::channel::Correlation;
use crate::error::{Error, Result};
use crate::rmt::marchenko_pastur_stieltjes;

/// Fixed-point tolerance for the implicit equations.
const TOL: f64 = 1e-12;
/// Iteration budget. The map contracts slowly for tiny ridges at
/// `beta = 1` (rate `1 - O(sqrt(alpha))`), so the budget is generous;
/// each step is only O(M + K) scalar work.
const MAX_ITER: usize = 400_000;
/// Smallest admissible SINR denominator before the evaluation is treated
/// as divergent.
const DENOM_FLOOR: f64 = 1e-300;

/// Solved RZF deterministic equivalent.
#[derive(Debug, Clone)]
pub struct DetEquivRzf {
    /// Weighted resolvent trace `m` at the operating point.
    pub m0: f64,
    /// Companion fixed-point value.
    pub c: f64,
    /// Power-normalization equivalent `Psi(alpha)`.
    pub psi0: f64,
    /// Interference equivalent `Upsilon`.
    pub upsilon0: f64,
    /// Per-user SINR approximations.
    pub gamma: DVector<f64>,
    /// Ridge the equivalent was evaluated at.
    pub alpha: f64,
    /// Defining-equation residual of the companion fixed point.
    pub residual: f64,
    /// Iterations consumed by the fixed point.
    pub iterations: usize,
}

/// Solved ZF deterministic equivalent.
#[derive(Debug, Clone)]
pub struct DetEquivZf {
    /// Correlation fixed-point value.
    pub cbar: f64,
    /// Second-order correlation trace.
    pub c2: f64,
    /// Power-normalization equivalent.
    pub psibar0: f64,
    /// Interference equivalent.
    pub upsbar0: f64,
    /// Per-user SINR approximations.
    pub gamma: DVector<f64>,
    /// Defining-equation residual of the fixed point.
    pub residual: f64,
    /// Iterations consumed.
    pub iterations: usize,
}

fn check_tau(tau: &[f64]) -> Result<()> {
    if tau.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::InvalidInput(
            "every tau_k must lie in [0, 1]".into(),
        ));
    }
    Ok(())
}

fn check_gains(gains: &[f64]) -> Result<()> {
    if gains.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidInput(
            "every channel gain must be positive and finite".into(),
        ));
    }
    Ok(())
}

/// Mean of `f` over a slice; the normalized traces of diagonal matrices.
fn mean(xs: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    xs.iter().map(|&x| f(x)).sum::<f64>() / xs.len() as f64
}

/// RZF deterministic equivalent for general correlation, gains and per-user
/// distortion at ridge `alpha` and SNR `rho`.
///
/// `beta` is passed explicitly (the exact `M/K` of the system under study)
/// so that gain samples of any length can stand in for the gain vector.
pub fn rzf_sinr_general(
    theta: &Correlation,
    gains: &[f64],
    tau: &[f64],
    alpha: f64,
    rho: f64,
    beta: f64,
) -> Result<DetEquivRzf> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidInput("rho must be positive".into()));
    }
    if !(beta >= 1.0 - 1e-12) {
        return Err(Error::InvalidInput(format!(
            "rzf equivalents need beta >= 1, got {beta}"
        )));
    }
    if tau.len() != gains.len() {
        return Err(Error::InvalidInput(
            "tau and gains must have matching length".into(),
        ));
    }
    check_tau(tau)?;
    check_gains(gains)?;

    let eigs = theta.eigenvalues().as_slice();

    // Companion fixed point: c_k from m_{k-1}, m_k from c_k, seeded m_0 = 1/alpha.
    let m_of_c = |c: f64| mean(eigs, |l| l / (alpha + c * l));
    let c_of_m = |m: f64| mean(gains, |l| l / (1.0 + m * l)) / beta;

    let mut m = 1.0 / alpha;
    let mut c = c_of_m(m);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let m_next = m_of_c(c);
        let c_next = c_of_m(m_next);
        let dm = (m_next - m).abs();
        let dc = (c_next - c).abs();
        m = m_next;
        c = c_next;
        if dc <= TOL && dm <= TOL * m.abs().max(1.0) {
            break;
        }
        if iterations >= MAX_ITER {
            return Err(Error::NonConvergence {
                iterations,
                residual: dc,
            });
        }
    }
    // One composed step measures the defining-equation residual.
    let residual = (c - c_of_m(m_of_c(c))).abs();
    let m0 = m_of_c(c);

    let t1 = mean(eigs, |l| l / ((alpha + c * l) * (alpha + c * l)));
    let t2 = mean(eigs, |l| l * l / ((alpha + c * l) * (alpha + c * l)));
    let sl = mean(gains, |l| {
        let d = 1.0 + m0 * l;
        l * l / (d * d)
    }) / beta;
    let denom = 1.0 - sl * t2;
    if denom <= 0.0 {
        return Err(Error::NonConvergence {
            iterations,
            residual: denom,
        });
    }
    let psi0 = c * t1 - alpha * sl * t1 * t1 / denom;
    let upsilon0 = m0 - alpha * t1 / denom;

    let mut gamma = DVector::zeros(gains.len());
    for k in 0..gains.len() {
        let l = gains[k];
        let t2k = tau[k] * tau[k];
        let lift = 1.0 + l * m0;
        let num = l * l * (1.0 - t2k) * m0 * m0;
        let den = l * upsilon0 * (1.0 - t2k * (1.0 - lift * lift)) + psi0 / rho * lift * lift;
        if den.abs() < DENOM_FLOOR || !den.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                residual: den,
            });
        }
        gamma[k] = num / den;
    }

    Ok(DetEquivRzf {
        m0,
        c,
        psi0,
        upsilon0,
        gamma,
        alpha,
        residual,
        iterations,
    })
}

/// Closed-form RZF equivalent for uncorrelated antennas, equal gains and
/// equal distortion, evaluated at the sum-rate-maximizing ridge:
///
/// `gamma = (omega/2) rho (beta - 1) + chi/2 - 1/2` with
/// `omega = (1 - tau^2)/(1 + tau^2 rho)` and
/// `chi = sqrt((beta-1)^2 omega^2 rho^2 + 2 (1+beta) omega rho + 1)`.
pub fn rzf_sinr_iid(rho: f64, tau2: f64, beta: f64) -> f64 {
    assert!(rho > 0.0 && (0.0..1.0).contains(&tau2) && beta >= 1.0);
    let omega = (1.0 - tau2) / (1.0 + tau2 * rho);
    if beta == 1.0 {
        return -0.5 + (omega * rho + 0.25).sqrt();
    }
    let or = omega * rho;
    let chi = ((beta - 1.0) * (beta - 1.0) * or * or + 2.0 * (1.0 + beta) * or + 1.0).sqrt();
    0.5 * or * (beta - 1.0) + 0.5 * chi - 0.5
}

/// Closed-form RZF equivalent at an arbitrary ridge `alpha` (uncorrelated
/// antennas, equal gains); the distortion-unaware and MMSE filters are
/// evaluated through this.
pub fn rzf_sinr_iid_at_alpha(rho: f64, tau2: f64, beta: f64, alpha: f64) -> f64 {
    assert!(rho > 0.0 && (0.0..=1.0).contains(&tau2) && beta >= 1.0 && alpha > 0.0);
    let m0 = marchenko_pastur_stieltjes(alpha, beta);
    let p = (1.0 + m0) * (1.0 + m0);
    let q = m0 * m0;
    let psi = m0 - alpha * q / (1.0 - q / (beta * p));
    (1.0 - tau2) * q / (psi * (1.0 + tau2 * (p - 1.0) + p / rho))
}

/// High-SNR saturation value of the optimally regularized closed form.
pub fn rzf_sinr_iid_high_snr(tau2: f64, beta: f64) -> f64 {
    assert!((0.0..1.0).contains(&tau2) && tau2 > 0.0 && beta >= 1.0);
    let s = (1.0 - tau2) / tau2;
    if beta == 1.0 {
        return -0.5 + (1.0 / tau2 - 0.75).sqrt();
    }
    let chi = ((beta - 1.0) * (beta - 1.0) * s * s + 2.0 * (1.0 + beta) * s + 1.0).sqrt();
    0.5 * s * (beta - 1.0) + 0.5 * chi - 0.5
}

/// ZF deterministic equivalent for general correlation, gains and per-user
/// distortion; requires `beta > 1`.
pub fn zf_sinr_general(
    theta: &Correlation,
    gains: &[f64],
    tau: &[f64],
    rho: f64,
    beta: f64,
) -> Result<DetEquivZf> {
    if !(beta > 1.0) {
        return Err(Error::InvalidInput(format!(
            "zf equivalents need beta > 1, got {beta}"
        )));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidInput("rho must be positive".into()));
    }
    if tau.len() != gains.len() {
        return Err(Error::InvalidInput(
            "tau and gains must have matching length".into(),
        ));
    }
    check_tau(tau)?;
    check_gains(gains)?;

    let eigs = theta.eigenvalues().as_slice();
    let step = |c: f64| mean(eigs, |l| l / (1.0 + l / (c * beta)));

    // This map contracts geometrically, so push well past the 1e-12
    // residual target; the second-order trace below amplifies c errors.
    // Stop early if the steps stall at rounding level.
    let step_tol = 1e-15;
    let mut cbar = 1.0;
    let mut iterations = 0;
    let mut prev_dc = f64::INFINITY;
    loop {
        iterations += 1;
        let next = step(cbar);
        let dc = (next - cbar).abs();
        cbar = next;
        if dc <= step_tol || (dc <= TOL && dc >= prev_dc) {
            break;
        }
        prev_dc = dc;
        if iterations >= MAX_ITER {
            return Err(Error::NonConvergence {
                iterations,
                residual: dc,
            });
        }
    }
    let residual = (cbar - step(cbar)).abs();

    let c2 = mean(eigs, |l| {
        let d = 1.0 + l / (cbar * beta);
        l * l / (d * d)
    });
    let inv_gain_mean = mean(gains, |l| 1.0 / l);
    let ratio = c2 / (cbar * cbar);
    if beta - ratio <= 0.0 {
        return Err(Error::NonConvergence {
            iterations,
            residual: beta - ratio,
        });
    }
    let psibar0 = inv_gain_mean / (beta * cbar);
    let upsbar0 = ratio / (beta - ratio) * inv_gain_mean;

    let mut gamma = DVector::zeros(gains.len());
    for k in 0..gains.len() {
        let t2k = tau[k] * tau[k];
        let den = gains[k] * t2k * upsbar0 + psibar0 / rho;
        if den < DENOM_FLOOR {
            return Err(Error::NonConvergence {
                iterations,
                residual: den,
            });
        }
        gamma[k] = (1.0 - t2k) / den;
    }

    Ok(DetEquivZf {
        cbar,
        c2,
        psibar0,
        upsbar0,
        gamma,
        residual,
        iterations,
    })
}

/// Closed-form ZF equivalent for uncorrelated antennas and equal gains:
/// `gamma = (1 - tau^2) (beta - 1) / (tau^2 + 1/rho)`.
pub fn zf_sinr_iid(rho: f64, tau2: f64, beta: f64) -> f64 {
    assert!(rho > 0.0 && (0.0..=1.0).contains(&tau2) && beta > 1.0);
    (1.0 - tau2) / (tau2 + 1.0 / rho) * (beta - 1.0)
}

/// SINR gap between optimally regularized ZF and plain ZF in the
/// uncorrelated equal-gain case:
/// `-(omega/2) rho (beta-1) + chi/2 - 1/2`; always the exact difference of
/// [`rzf_sinr_iid`] and [`zf_sinr_iid`].
pub fn orzf_zf_sinr_gap(rho: f64, tau2: f64, beta: f64) -> f64 {
    assert!(rho > 0.0 && (0.0..1.0).contains(&tau2) && beta > 1.0);
    let omega = (1.0 - tau2) / (1.0 + tau2 * rho);
    let or = omega * rho;
    let chi = ((beta - 1.0) * (beta - 1.0) * or * or + 2.0 * (1.0 + beta) * or + 1.0).sqrt();
    -0.5 * or * (beta - 1.0) + 0.5 * chi - 0.5
}

/// High-SNR limit of [`orzf_zf_sinr_gap`]: `1/(beta-1)` under perfect CSIT,
/// else the saturated gap expressed through `s = (1 - tau^2)/tau^2`.
pub fn orzf_zf_sinr_gap_high_snr(tau2: f64, beta: f64) -> f64 {
    assert!((0.0..1.0).contains(&tau2) && beta > 1.0);
    if tau2 == 0.0 {
        return 1.0 / (beta - 1.0);
    }
    let s = (1.0 - tau2) / tau2;
    let chi = ((beta - 1.0) * (beta - 1.0) * s * s + 2.0 * (1.0 + beta) * s + 1.0).sqrt();
    -0.5 * s * (beta - 1.0) + 0.5 * chi - 0.5
}

/// Sum rate `sum_k log2(1 + gamma_k)` of a deterministic-equivalent SINR
/// vector, in bits/s/Hz.
pub fn sum_rate_de(gammas: &DVector<f64>) -> f64 {
    crate::precoding::sum_rate(gammas)
}
