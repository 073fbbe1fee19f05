//! Exact per-realization precoders and SINR evaluation.
//!
//! These are the Monte-Carlo ground truth: given one estimated channel
//! `H_hat`, build the ZF or RZF precoding matrix with the power constraint
//! met exactly, then score it on the true channel `H` through the per-user
//! SINR and the sum rate.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition-number limit beyond which a channel Gram matrix is treated as
/// singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Precoder family. `alpha` is the ridge weight of the regularized inverse;
/// the distortion-unaware and MMSE variants resolve it from the operating
/// point, the optimal variant from the deterministic-equivalent optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrecoderKind {
    /// Plain channel inversion (requires an invertible `H_hat H_hat^H`).
    Zf,
    /// Regularized inversion with an explicit ridge `alpha > 0`.
    Rzf { alpha: f64 },
    /// RZF designed as if CSIT were perfect: `alpha = 1/(beta rho)`.
    RzfCdu,
    /// RZF with the sum-rate-maximizing ridge.
    Orzf,
    /// The MMSE transmit filter: `alpha = tau^2/beta + 1/(beta rho)`.
    MmseFilter,
}

impl PrecoderKind {
    /// Short tag used in CSV output and summaries.
    pub fn tag(&self) -> String {
        match self {
            PrecoderKind::Zf => "zf".into(),
            PrecoderKind::Rzf { alpha } => format!("rzf:{alpha}"),
            PrecoderKind::RzfCdu => "rzf_cdu".into(),
            PrecoderKind::Orzf => "orzf".into(),
            PrecoderKind::MmseFilter => "mmse".into(),
        }
    }

    /// The ridge for kinds whose `alpha` is a closed function of the
    /// operating point; `None` for ZF and for ORZF (resolved by the
    /// optimizer against the channel statistics).
    pub fn closed_form_alpha(&self, rho: f64, tau2: f64, beta: f64) -> Option<f64> {
        match *self {
            PrecoderKind::Rzf { alpha } => Some(alpha),
            PrecoderKind::RzfCdu => Some(1.0 / (beta * rho)),
            PrecoderKind::MmseFilter => Some(tau2 / beta + 1.0 / (beta * rho)),
            PrecoderKind::Zf | PrecoderKind::Orzf => None,
        }
    }
}

/// A precoding matrix with its power normalization.
#[derive(Debug, Clone)]
pub struct Precoder {
    /// `M x K` precoding matrix; `tr(G G^H) = P` holds exactly.
    pub g: DMatrix<Complex64>,
    /// Squared normalization scalar.
    pub xi2: f64,
}

/// Fully evaluated precoder output for one realization.
#[derive(Debug, Clone)]
pub struct PrecodeResult {
    pub g: DMatrix<Complex64>,
    pub xi2: f64,
    pub per_user_sinr: DVector<f64>,
    pub sum_rate: f64,
}

/// Regularized zero-forcing precoder
/// `G = (xi/sqrt(M)) (H_hat^H H_hat + alpha I)^{-1} H_hat^H` with `xi` set so
/// the total power constraint is met with equality.
pub fn rzf_precoder(h_hat: &DMatrix<Complex64>, alpha: f64, power: f64) -> Result<Precoder> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!(
            "rzf needs alpha > 0, got {alpha}"
        )));
    }
    if !(power > 0.0) {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    let m = h_hat.ncols();
    // Work on the K x K Gram matrix: (H^H H + aI)^{-1} H^H = H^H (H H^H + aI)^{-1}.
    let gram = h_hat * h_hat.adjoint();
    let mut shifted = gram.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += Complex64::new(alpha, 0.0);
    }
    let chol = Cholesky::new(shifted).ok_or(Error::SingularChannel {
        cond: f64::INFINITY,
        limit: CONDITION_LIMIT,
    })?;
    let inv = chol.inverse();

    // xi^2 = P / [(1/M) tr( Gram (Gram + aI)^{-2} )].
    let ga = &inv * &gram;
    let trace: f64 = (&ga * &inv).diagonal().iter().map(|z| z.re).sum();
    let psi_hat = trace / m as f64;
    if !(psi_hat > 1e-300) || !psi_hat.is_finite() {
        return Err(Error::SingularNormalization { trace: psi_hat });
    }
    let xi2 = power / psi_hat;
    let scale = Complex64::new((xi2 / m as f64).sqrt(), 0.0);
    let g = h_hat.adjoint() * inv * scale;
    Ok(Precoder { g, xi2 })
}

/// Zero-forcing precoder `G = (xi/sqrt(M)) H_hat^H (H_hat H_hat^H)^{-1}`.
///
/// Needs `K <= M` and a Gram matrix with condition number below
/// [`CONDITION_LIMIT`].
pub fn zf_precoder(h_hat: &DMatrix<Complex64>, power: f64) -> Result<Precoder> {
    if h_hat.nrows() > h_hat.ncols() {
        return Err(Error::InvalidInput(format!(
            "zf needs K <= M, got K={} M={}",
            h_hat.nrows(),
            h_hat.ncols()
        )));
    }
    if !(power > 0.0) {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    let m = h_hat.ncols();
    let gram = h_hat * h_hat.adjoint();
    let eig = gram.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.max();
    let min_ev = eig.eigenvalues.min();
    let cond = if min_ev > 0.0 {
        max_ev / min_ev
    } else {
        f64::INFINITY
    };
    if !(cond < CONDITION_LIMIT) {
        return Err(Error::SingularChannel {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    let inv = Cholesky::new(gram)
        .ok_or(Error::SingularChannel {
            cond,
            limit: CONDITION_LIMIT,
        })?
        .inverse();
    let trace: f64 = inv.diagonal().iter().map(|z| z.re).sum();
    let psi_hat = trace / m as f64;
    if !(psi_hat > 1e-300) {
        return Err(Error::SingularNormalization { trace: psi_hat });
    }
    let xi2 = power / psi_hat;
    let scale = Complex64::new((xi2 / m as f64).sqrt(), 0.0);
    let g = h_hat.adjoint() * inv * scale;
    Ok(Precoder { g, xi2 })
}

/// Per-user SINR on the true channel:
/// `gamma_k = |h_k^H g_k|^2 / (sum_{j != k} |h_k^H g_j|^2 + sigma^2 / M)`.
///
/// The interference sum runs over the other `K - 1` users.
pub fn exact_sinr(
    h: &DMatrix<Complex64>,
    g: &DMatrix<Complex64>,
    sigma2: f64,
    m: usize,
) -> DVector<f64> {
    assert!(sigma2 > 0.0, "noise variance must be positive");
    assert_eq!(h.ncols(), g.nrows(), "H and G dimensions are inconsistent");
    let k = h.nrows();
    let cross = h * g; // entry (k, j) = h_k^H g_j
    let noise = sigma2 / m as f64;
    DVector::from_fn(k, |i, _| {
        let signal = cross[(i, i)].norm_sqr();
        let mut interference = 0.0;
        for j in 0..k {
            if j != i {
                interference += cross[(i, j)].norm_sqr();
            }
        }
        signal / (interference + noise)
    })
}

/// Sum rate `sum_k log2(1 + gamma_k)` in bits/s/Hz.
pub fn sum_rate(gammas: &DVector<f64>) -> f64 {
    gammas.iter().map(|&g| (1.0 + g).log2()).sum()
}

/// Builds the precoder for an already-resolved ridge (`None` means ZF) and
/// evaluates it on the true channel.
pub fn precode_and_evaluate(
    h: &DMatrix<Complex64>,
    h_hat: &DMatrix<Complex64>,
    alpha: Option<f64>,
    power: f64,
    sigma2: f64,
) -> Result<PrecodeResult> {
    let m = h_hat.ncols();
    let precoder = match alpha {
        Some(a) => rzf_precoder(h_hat, a, power)?,
        None => zf_precoder(h_hat, power)?,
    };
    let per_user_sinr = exact_sinr(h, &precoder.g, sigma2, m);
    let sum = sum_rate(&per_user_sinr);
    Ok(PrecodeResult {
        g: precoder.g,
        xi2: precoder.xi2,
        per_user_sinr,
        sum_rate: sum,
    })
}

/// `tr(G G^H)`, the transmit power actually spent.
pub fn transmit_power(g: &DMatrix<Complex64>) -> f64 {
    g.iter().map(|z| z.norm_sqr()).sum()
}
