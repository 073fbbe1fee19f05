//! Optimizers built on top of the deterministic equivalents: the sum-rate
//! maximizing ridge, distortion/feedback-bit scaling laws for a target rate
//! offset, the optimal number of active users, and the TDD training split.

use nalgebra::DVector;

use crate::channel::{mmse_training_distortion, Correlation};
use crate::det_equiv::{
    rzf_sinr_general, rzf_sinr_iid, rzf_sinr_iid_at_alpha, sum_rate_de, zf_sinr_general,
    zf_sinr_iid,
};
use crate::error::{Error, Result};
use crate::rmt::{lambert_w0, marchenko_pastur_stieltjes};

/// Precoding scheme a scaling law refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// RZF with the distortion-aware optimal ridge.
    Orzf,
    /// RZF designed for perfect CSIT, `alpha = 1/(beta rho)`.
    RzfCdu,
    /// Zero forcing (`beta > 1`).
    Zf,
}

/// Target for the distortion/feedback scaling laws: hold the per-user rate
/// offset between perfect and imperfect CSIT at `log2(b)` bits/s/Hz.
#[derive(Debug, Clone, Copy)]
pub struct RateGapSpec {
    /// Gap parameter, `b > 1`.
    pub b: f64,
    /// Operating SNR (linear).
    pub rho: f64,
    /// System aspect ratio `M/K`.
    pub beta: f64,
    pub scheme: Scheme,
}

impl RateGapSpec {
    pub fn new(b: f64, rho: f64, beta: f64, scheme: Scheme) -> Result<Self> {
        if !(b > 1.0) {
            return Err(Error::InvalidInput(format!("b must exceed 1, got {b}")));
        }
        if !(rho > 0.0) {
            return Err(Error::InvalidInput("rho must be positive".into()));
        }
        let min_beta = if scheme == Scheme::Zf { 1.0 } else { 1.0 - 1e-12 };
        let strict = scheme == Scheme::Zf;
        if (strict && !(beta > min_beta)) || (!strict && beta < min_beta) {
            return Err(Error::InvalidInput(format!(
                "scheme {scheme:?} needs beta {} 1, got {beta}",
                if strict { ">" } else { ">=" }
            )));
        }
        Ok(RateGapSpec { b, rho, beta, scheme })
    }
}

/// Sum-rate maximizing RZF ridge for uncorrelated antennas and equal gains:
/// `alpha* = (1 + tau^2 rho) / ((1 - tau^2) beta rho)`.
pub fn alpha_star(rho: f64, tau2: f64, beta: f64) -> Result<f64> {
    if !(tau2 < 1.0) || tau2 < 0.0 {
        return Err(Error::Domain(format!(
            "alpha* needs tau^2 in [0, 1), got {tau2}"
        )));
    }
    if !(rho > 0.0 && beta > 0.0) {
        return Err(Error::InvalidInput("rho and beta must be positive".into()));
    }
    Ok((1.0 + tau2 * rho) / ((1.0 - tau2) * beta * rho))
}

/// Result of the one-dimensional ridge search.
#[derive(Debug, Clone, Copy)]
pub struct AlphaStarSearch {
    pub alpha: f64,
    /// Deterministic-equivalent sum rate attained at `alpha`.
    pub de_sum_rate: f64,
    /// True when the coarse scan saw more than one local maximum and the
    /// search fell back to a dense grid with local refinement.
    pub used_grid_fallback: bool,
}

/// Default search bracket `[1e-6, 1e2] / (beta rho)`.
pub fn default_alpha_bracket(rho: f64, beta: f64) -> (f64, f64) {
    (1e-6 / (beta * rho), 1e2 / (beta * rho))
}

/// Maximizes the deterministic-equivalent sum rate over the ridge by
/// golden-section search on `ln alpha`, with a dense-grid fallback when the
/// objective is not unimodal inside the bracket.
pub fn alpha_star_search(
    theta: &Correlation,
    gains: &[f64],
    tau: &[f64],
    rho: f64,
    beta: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<AlphaStarSearch> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput(format!(
            "bracket must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let objective = |t: f64| -> f64 {
        match rzf_sinr_general(theta, gains, tau, t.exp(), rho, beta) {
            Ok(de) => sum_rate_de(&de.gamma),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let (t_lo, t_hi) = (lo.ln(), hi.ln());

    // Coarse unimodality scan.
    let coarse = 64;
    let coarse_vals: Vec<(f64, f64)> = (0..=coarse)
        .map(|i| {
            let t = t_lo + (t_hi - t_lo) * i as f64 / coarse as f64;
            (t, objective(t))
        })
        .collect();
    let mut maxima = 0;
    for i in 1..coarse {
        let eps = 1e-10 * coarse_vals[i].1.abs().max(1.0);
        if coarse_vals[i].1 > coarse_vals[i - 1].1 + eps
            && coarse_vals[i].1 > coarse_vals[i + 1].1 + eps
        {
            maxima += 1;
        }
    }
    // Monotone edges count as one maximum at the boundary.
    let used_grid_fallback = maxima > 1;

    let (seed_lo, seed_hi) = if used_grid_fallback {
        // Dense grid, then refine around the best cell only.
        let dense = 1000;
        let mut best = (t_lo, f64::NEG_INFINITY);
        let step = (t_hi - t_lo) / dense as f64;
        for i in 0..=dense {
            let t = t_lo + step * i as f64;
            let v = objective(t);
            if v > best.1 {
                best = (t, v);
            }
        }
        (best.0 - step, best.0 + step)
    } else {
        (t_lo, t_hi)
    };

    let (mut t_best, mut f_best) = golden_max(&objective, seed_lo, seed_hi, tol);
    // Parabolic polish: the golden bracket bottoms out at rounding noise for
    // flat maxima. Vertex steps at decreasing offsets recover the
    // stationary point; the offsets stay large enough that the quadratic
    // signal dominates the noise.
    for delta in [1e-3, 1e-5] {
        let (f_minus, f_plus) = (objective(t_best - delta), objective(t_best + delta));
        let curvature = f_minus - 2.0 * f_best + f_plus;
        if curvature < 0.0 {
            let vertex = t_best + 0.5 * delta * (f_minus - f_plus) / curvature;
            if (vertex - t_best).abs() <= delta {
                let f_vertex = objective(vertex);
                // Near the maximum the objective differences sit at rounding
                // level, so the vertex is accepted within a noise margin.
                if f_vertex >= f_best - 1e-9 * f_best.abs().max(1.0) {
                    t_best = vertex;
                    f_best = f_vertex.max(f_best);
                }
            }
        }
    }
    if !f_best.is_finite() {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    Ok(AlphaStarSearch {
        alpha: t_best.exp(),
        de_sum_rate: f_best,
        used_grid_fallback,
    })
}

/// Golden-section maximization of `f` on `[lo, hi]` to argument tolerance
/// `xtol`. Returns the best evaluated point.
pub(crate) fn golden_max(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > xtol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let mut best = (mid, fm);
    for (x, v) in [(x1, f1), (x2, f2), (lo, f(lo)), (hi, f(hi))] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// `g(x) = x rho (beta - 1) + sqrt((1-beta)^2 x^2 rho^2 + 2 (1+beta) x rho + 1)`,
/// the building block of the closed-form rate-gap expressions
/// (`1 + g(x) = 2 (1 + gamma)` at effective SNR `x rho`).
fn g_term(x: f64, rho: f64, beta: f64) -> f64 {
    let xr = x * rho;
    xr * (beta - 1.0)
        + ((1.0 - beta) * (1.0 - beta) * xr * xr + 2.0 * (1.0 + beta) * xr + 1.0).sqrt()
}

/// Per-user rate gap of optimally regularized ZF between perfect and
/// imperfect CSIT: `log2[(1 + g(1)) / (1 + g(omega))]`.
pub fn rate_gap_orzf(rho: f64, tau2: f64, beta: f64) -> f64 {
    assert!(rho > 0.0 && (0.0..1.0).contains(&tau2) && beta >= 1.0);
    let omega = (1.0 - tau2) / (1.0 + tau2 * rho);
    ((1.0 + g_term(1.0, rho, beta)) / (1.0 + g_term(omega, rho, beta))).log2()
}

/// Per-user rate gap between perfect and imperfect CSIT for any scheme.
pub fn rate_gap(scheme: Scheme, rho: f64, tau2: f64, beta: f64) -> f64 {
    match scheme {
        Scheme::Orzf => rate_gap_orzf(rho, tau2, beta),
        Scheme::Zf => {
            assert!(beta > 1.0);
            ((1.0 + rho * (beta - 1.0)) / (1.0 + zf_sinr_iid(rho, tau2, beta))).log2()
        }
        Scheme::RzfCdu => {
            let alpha = 1.0 / (beta * rho);
            let perfect = rzf_sinr_iid_at_alpha(rho, 0.0, beta, alpha);
            let distorted = rzf_sinr_iid_at_alpha(rho, tau2, beta, alpha);
            ((1.0 + perfect) / (1.0 + distorted)).log2()
        }
    }
}

/// The distortion `tau^2 = phi(rho, b) / rho` that holds the per-user rate
/// offset of `spec.scheme` at exactly `log2(b)`.
pub fn distortion_for_rate_offset(spec: &RateGapSpec) -> Result<f64> {
    let tau2 = distortion_unchecked(spec)?;
    if !(tau2 > 0.0 && tau2 < 1.0) {
        return Err(Error::Domain(format!(
            "required distortion tau^2 = {tau2} falls outside (0, 1)"
        )));
    }
    Ok(tau2)
}

/// The raw inversion, which may land at `tau^2 >= 1` when even fully
/// distorted CSIT cannot produce a gap as large as `log2(b)`; the feedback
/// scaling clamps that case to its one-bit floor instead of failing.
fn distortion_unchecked(spec: &RateGapSpec) -> Result<f64> {
    let RateGapSpec { b, rho, beta, scheme } = *spec;
    let tau2 = match scheme {
        Scheme::Orzf => {
            let w = 1.0 - b + g_term(1.0, rho, beta);
            let d = (1.0 + beta) * b + w * (beta - 1.0);
            let a = (w * w - b * b) / (2.0 * b * d);
            (rho - a) / (1.0 + a) / rho
        }
        Scheme::Zf => {
            let denom = 1.0 - b + (beta - 1.0) * (rho + b);
            if denom <= 0.0 {
                return Err(Error::Domain(format!(
                    "no admissible distortion: rate offset log2({b}) is not reachable at rho={rho}"
                )));
            }
            (b - 1.0) * (1.0 + rho * (beta - 1.0)) / denom / rho
        }
        Scheme::RzfCdu => {
            let alpha = 1.0 / (beta * rho);
            let m0 = marchenko_pastur_stieltjes(alpha, beta);
            let p = (1.0 + m0) * (1.0 + m0);
            let q = m0 * m0;
            let psi = m0 - alpha * q / (1.0 - q / (beta * p));
            let gamma_star = q / (psi * (1.0 + p / rho));
            let num = psi * (b - 1.0 - gamma_star) * (p / rho + 1.0) + q * b;
            let den = psi * (1.0 - b + gamma_star) * (p - 1.0) + q * b;
            num / den
        }
    };
    if !tau2.is_finite() || tau2 <= 0.0 {
        return Err(Error::Domain(format!(
            "rate-offset inversion produced an inadmissible distortion {tau2}"
        )));
    }
    Ok(tau2)
}

/// `phi(rho, b) = tau^2 rho` for the given scheme; the quantity whose
/// high-SNR limits are `b^2 - 1`, `2(b - 1)` and `b - 1`.
pub fn phi(scheme: Scheme, rho: f64, b: f64, beta: f64) -> Result<f64> {
    let spec = RateGapSpec::new(b, rho, beta, scheme)?;
    Ok(distortion_for_rate_offset(&spec)? * rho)
}

/// Feedback bits per user under random vector quantization.
#[derive(Debug, Clone, Copy)]
pub struct FeedbackBits {
    /// Real-valued scaling `(M-1)(log2 rho - log2 phi)`.
    pub real: f64,
    /// Rounded to the next higher integer, floored at one bit.
    pub bits: u32,
}

/// Number of feedback bits per user needed to hold the rate offset of
/// `spec.scheme` at `log2(b)` with `m` transmit antennas.
///
/// `real = (M-1)(log2 rho - log2 phi)`; when the inversion asks for more
/// distortion than RVQ can deliver the count clamps to its one-bit floor.
pub fn feedback_bits(spec: &RateGapSpec, m: usize) -> Result<FeedbackBits> {
    if m < 2 {
        return Err(Error::Domain("feedback scaling needs M >= 2".into()));
    }
    let tau2 = distortion_unchecked(spec)?;
    let real = -(m as f64 - 1.0) * tau2.log2();
    let bits = real.ceil().max(1.0) as u32;
    Ok(FeedbackBits { real, bits })
}

/// Sum-rate maximizing load `beta* = M/K*` for ZF with uncorrelated
/// antennas and equal gains, through the principal Lambert-W branch:
///
/// `beta* = (1 - 1/a)(1 + 1/W((a-1)/e))` with `a = (1-tau^2)/(tau^2 + 1/rho)`.
pub fn optimal_load_iid(rho: f64, tau2: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidInput("rho must be positive".into()));
    }
    if !(0.0..1.0).contains(&tau2) {
        return Err(Error::Domain(format!(
            "optimal load needs tau^2 in [0, 1), got {tau2}"
        )));
    }
    let a = (1.0 - tau2) / (tau2 + 1.0 / rho);
    debug_assert!(a > 0.0);
    if (a - 1.0).abs() < 1e-12 {
        return Ok(std::f64::consts::E);
    }
    let x = (a - 1.0) / std::f64::consts::E;
    let w = lambert_w0(x)?;
    Ok((a - 1.0) / a * (1.0 + 1.0 / w))
}

/// Residual of the stationarity condition the optimal load satisfies:
/// `a beta / (1 + a (beta-1)) = ln(1 + a (beta-1))`.
pub fn load_stationarity_residual(a: f64, beta: f64) -> f64 {
    let u = 1.0 + a * (beta - 1.0);
    (a * beta / u - u.ln()).abs()
}

/// Integer number of active users maximizing the per-antenna ZF sum rate
/// `(1/beta) E_l log2(1 + gamma(l))`, the gain expectation taken over the
/// provided samples. Searches `K in [1, M-1]`; ties break toward fewer
/// users.
pub fn optimal_user_count(
    m: usize,
    rho: f64,
    tau2: f64,
    theta: &Correlation,
    gain_samples: &[f64],
) -> Result<usize> {
    if m < 2 {
        return Err(Error::InvalidInput("user-count search needs M >= 2".into()));
    }
    if gain_samples.is_empty() {
        return Err(Error::InvalidInput("no gain samples provided".into()));
    }
    let tau: Vec<f64> = vec![tau2.sqrt(); gain_samples.len()];
    let mut best: Option<(usize, f64)> = None;
    for k in 1..m {
        let beta = m as f64 / k as f64;
        let de = zf_sinr_general(theta, gain_samples, &tau, rho, beta)?;
        let mean_rate =
            de.gamma.iter().map(|&g| (1.0 + g).log2()).sum::<f64>() / gain_samples.len() as f64;
        let objective = mean_rate / beta;
        match best {
            Some((_, val)) if objective <= val => {}
            _ => best = Some((k, objective)),
        }
    }
    Ok(best.expect("at least one candidate").0)
}

/// Which precoder the TDD training optimization targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TddScheme {
    Zf,
    Orzf,
}

/// TDD coherence-block configuration: `T` channel uses split between
/// `T_t` uplink pilots and `T - T_t` downlink data.
#[derive(Debug, Clone, Copy)]
pub struct TddConfig {
    /// Coherence block length in channel uses.
    pub t: f64,
    /// Active users (also the minimum training length).
    pub k: usize,
    /// Transmit antennas.
    pub m: usize,
    /// Baseline uplink SNR; only the ratio `rho_ul/rho_dl` matters when the
    /// downlink SNR is swept.
    pub rho_ul: f64,
    /// Baseline downlink SNR.
    pub rho_dl: f64,
    pub scheme: TddScheme,
}

impl TddConfig {
    pub fn new(
        t: f64,
        k: usize,
        m: usize,
        rho_ul: f64,
        rho_dl: f64,
        scheme: TddScheme,
    ) -> Result<Self> {
        if !(k as f64 <= t) {
            return Err(Error::InvalidInput(format!(
                "need K <= T for orthogonal pilots, got K={k}, T={t}"
            )));
        }
        if !(rho_ul > 0.0 && rho_dl > 0.0) {
            return Err(Error::InvalidInput("SNRs must be positive".into()));
        }
        let beta = m as f64 / k as f64;
        if scheme == TddScheme::Zf && !(beta > 1.0) {
            return Err(Error::InvalidInput(format!(
                "zf training optimization needs beta > 1, got {beta}"
            )));
        }
        Ok(TddConfig { t, k, m, rho_ul, rho_dl, scheme })
    }

    /// Uplink SNR at a swept downlink SNR, holding the configured ratio.
    pub fn rho_ul_at(&self, rho_dl: f64) -> f64 {
        self.rho_ul / self.rho_dl * rho_dl
    }
}

/// Normalized sum rate `(T_d/T) R` of the configured scheme when `t_t`
/// channel uses go to training, at downlink SNR `rho_dl`.
pub fn normalized_tdd_rate(cfg: &TddConfig, rho_dl: f64, t_t: f64) -> f64 {
    let rho_ul = cfg.rho_ul_at(rho_dl);
    let tau2 = mmse_training_distortion(t_t, rho_ul);
    let beta = cfg.m as f64 / cfg.k as f64;
    let gamma = match cfg.scheme {
        TddScheme::Zf => zf_sinr_iid(rho_dl, tau2, beta),
        TddScheme::Orzf => rzf_sinr_iid(rho_dl, tau2, beta),
    };
    cfg.k as f64 * (1.0 - t_t / cfg.t) * (1.0 + gamma).log2()
}

/// Result of the training-length optimization.
#[derive(Debug, Clone, Copy)]
pub struct TrainingOptimum {
    /// Optimal training length in `[K, T]` (real-valued).
    pub t_t: f64,
    /// Normalized sum rate attained there.
    pub rate: f64,
}

/// Maximizes the normalized sum rate over the training length
/// `t_t in [K, T]` by golden-section search; the objective is strictly
/// concave on that interval. Boundary optima are returned exactly.
pub fn optimal_training_length(cfg: &TddConfig, rho_dl: f64) -> Result<TrainingOptimum> {
    if !(rho_dl > 0.0) {
        return Err(Error::InvalidInput("rho_dl must be positive".into()));
    }
    let lo = cfg.k as f64;
    let hi = cfg.t;
    if lo >= hi {
        // Degenerate block: training fills everything.
        return Ok(TrainingOptimum {
            t_t: hi,
            rate: normalized_tdd_rate(cfg, rho_dl, hi),
        });
    }
    let f = |t: f64| normalized_tdd_rate(cfg, rho_dl, t);
    let xtol = 1e-6 * cfg.t;
    let (mut t_best, mut f_best) = golden_max(&f, lo, hi, xtol);
    // Snap to a boundary when the search lands within tolerance of it.
    for edge in [lo, hi] {
        if (t_best - edge).abs() <= 2.0 * xtol {
            let fe = f(edge);
            if fe >= f_best - 1e-12 * f_best.abs().max(1.0) {
                t_best = edge;
                f_best = fe;
            }
        }
    }
    Ok(TrainingOptimum {
        t_t: t_best,
        rate: f_best,
    })
}

/// Result of the alternating joint optimization over `(T_t, K)`.
#[derive(Debug, Clone)]
pub struct JointOptimum {
    pub t_t: f64,
    pub k: usize,
    pub rate: f64,
    /// Alternation rounds used.
    pub rounds: usize,
    /// False when the alternation was still oscillating after the round
    /// budget; the best visited pair is returned regardless.
    pub converged: bool,
}

/// Alternates the training-length optimization (users fixed) with an integer
/// search over the user count (training fixed, distortion tied to it) until
/// neither coordinate moves; coordinate ascent, at most 50 rounds.
pub fn joint_training_user_opt(cfg: &TddConfig, rho_dl: f64) -> Result<JointOptimum> {
    let rho_ul = cfg.rho_ul_at(rho_dl);
    let k_cap = match cfg.scheme {
        TddScheme::Zf => cfg.m - 1,
        TddScheme::Orzf => cfg.m,
    };
    let k_cap = k_cap.min(cfg.t.floor() as usize).max(1);

    let rate_for = |k: usize, t_t: f64| -> f64 {
        let tau2 = mmse_training_distortion(t_t, rho_ul);
        let beta = cfg.m as f64 / k as f64;
        let gamma = match cfg.scheme {
            TddScheme::Zf => {
                if beta <= 1.0 {
                    return f64::NEG_INFINITY;
                }
                zf_sinr_iid(rho_dl, tau2, beta)
            }
            TddScheme::Orzf => rzf_sinr_iid(rho_dl, tau2, beta),
        };
        k as f64 * (1.0 - t_t / cfg.t) * (1.0 + gamma).log2()
    };

    let mut k = cfg.k.min(k_cap);
    let mut t_t = k as f64;
    let mut best = JointOptimum {
        t_t,
        k,
        rate: f64::NEG_INFINITY,
        rounds: 0,
        converged: false,
    };
    for round in 1..=50 {
        let sub = TddConfig { k, ..*cfg };
        let opt = optimal_training_length(&sub, rho_dl)?;
        t_t = opt.t_t;

        let mut k_next = k;
        let mut k_rate = rate_for(k, t_t);
        for cand in 1..=k_cap {
            if (cand as f64) > t_t {
                break;
            }
            let r = rate_for(cand, t_t);
            if r > k_rate + 1e-12 * k_rate.abs().max(1.0) {
                k_rate = r;
                k_next = cand;
            }
        }
        if k_rate > best.rate {
            best = JointOptimum {
                t_t,
                k: k_next,
                rate: k_rate,
                rounds: round,
                converged: false,
            };
        }
        if k_next == k {
            best.converged = true;
            best.rounds = round;
            return Ok(best);
        }
        k = k_next;
    }
    Ok(best)
}

/// Deterministic-equivalent sum rate for an ORZF system with general
/// correlation and gains: resolves the ridge by line search and returns
/// `(alpha, sum rate, per-user SINR)`.
pub fn orzf_de_sum_rate(
    theta: &Correlation,
    gains: &[f64],
    tau: &[f64],
    rho: f64,
    beta: f64,
) -> Result<(f64, f64, DVector<f64>)> {
    let equal_gains = gains.iter().all(|&l| (l - 1.0).abs() < 1e-12);
    let equal_tau = tau.windows(2).all(|w| w[0] == w[1]);
    if theta.is_identity() && equal_gains && equal_tau {
        let tau2 = tau.first().map(|t| t * t).unwrap_or(0.0);
        let alpha = alpha_star(rho, tau2, beta)?;
        let de = rzf_sinr_general(theta, gains, tau, alpha, rho, beta)?;
        let rate = sum_rate_de(&de.gamma);
        return Ok((alpha, rate, de.gamma));
    }
    let search = alpha_star_search(
        theta,
        gains,
        tau,
        rho,
        beta,
        default_alpha_bracket(rho, beta),
        1e-8,
    )?;
    let de = rzf_sinr_general(theta, gains, tau, search.alpha, rho, beta)?;
    Ok((search.alpha, search.de_sum_rate, de.gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_pathloss_gains, substream, PathLossSpec, StreamTag};
    use approx::assert_relative_eq;

    #[test]
    fn alpha_star_known_values() {
        assert_relative_eq!(alpha_star(10.0, 0.0, 2.0).unwrap(), 0.05, max_relative = 1e-14);
        assert_relative_eq!(
            alpha_star(10.0, 0.1, 1.0).unwrap(),
            2.0 / 9.0,
            max_relative = 1e-14
        );
        // High-SNR limit tau^2 / ((1 - tau^2) beta).
        assert_relative_eq!(
            alpha_star(1e6, 0.1, 1.0).unwrap(),
            1.0 / 9.0,
            max_relative = 1e-4
        );
        assert!(alpha_star(10.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn line_search_agrees_with_closed_form_iid() {
        for &rho in &[0.1, 1.0, 10.0, 100.0] {
            for &tau2 in &[0.0f64, 0.1, 0.3] {
                for &beta in &[1.0, 2.0, 4.0] {
                    let k = 8;
                    let tau = vec![tau2.sqrt(); k];
                    let search = alpha_star_search(
                        &Correlation::identity(16),
                        &vec![1.0; k],
                        &tau,
                        rho,
                        beta,
                        default_alpha_bracket(rho, beta),
                        1e-8,
                    )
                    .unwrap();
                    let closed = alpha_star(rho, tau2, beta).unwrap();
                    assert!(
                        (search.alpha - closed).abs() <= 1e-6 * closed,
                        "rho={rho} tau2={tau2} beta={beta}: {} vs {closed}",
                        search.alpha
                    );
                    assert!(!search.used_grid_fallback);
                }
            }
        }
    }

    #[test]
    fn line_search_beats_a_uniform_grid_under_correlation() {
        let theta = Correlation::jakes_uca(16, 0.5);
        let gains = {
            let mut rng = substream(31, StreamTag::PathLoss);
            draw_pathloss_gains(
                8,
                &PathLossSpec::Cost231Disk {
                    cell_radius_m: 500.0,
                    min_distance_m: 35.0,
                },
                &mut rng,
            )
        };
        let gains: Vec<f64> = gains.iter().cloned().collect();
        let tau = vec![0.1f64.sqrt(); 8];
        let (rho, beta) = (100.0, 2.0);
        let bracket = default_alpha_bracket(rho, beta);
        let search =
            alpha_star_search(&theta, &gains, &tau, rho, beta, bracket, 1e-8).unwrap();
        let objective = |alpha: f64| {
            sum_rate_de(
                &rzf_sinr_general(&theta, &gains, &tau, alpha, rho, beta)
                    .unwrap()
                    .gamma,
            )
        };
        let (lo, hi) = bracket;
        for i in 0..=1000 {
            let alpha = lo * (hi / lo).powf(i as f64 / 1000.0);
            assert!(
                objective(alpha) <= search.de_sum_rate + 1e-9,
                "grid point {alpha} beats the line search"
            );
        }
    }

    #[test]
    fn rate_gap_zero_under_perfect_csit() {
        assert_eq!(rate_gap_orzf(10.0, 0.0, 1.0), 0.0);
        assert_eq!(rate_gap(Scheme::Zf, 10.0, 0.0, 2.0), 0.0);
    }

    #[test]
    fn rate_gap_beta_one_closed_form() {
        // log2[(1 + sqrt(1+4rho)) / (1 + sqrt(1+4 omega rho))] at beta = 1.
        let (rho, tau2): (f64, f64) = (100.0, 0.05);
        let omega = (1.0 - tau2) / (1.0 + tau2 * rho);
        let expected =
            ((1.0 + (1.0 + 4.0 * rho).sqrt()) / (1.0 + (1.0 + 4.0 * omega * rho).sqrt())).log2();
        assert_relative_eq!(rate_gap_orzf(rho, tau2, 1.0), expected, max_relative = 1e-12);
    }

    #[test]
    fn rate_gap_increases_with_distortion() {
        let mut prev = 0.0;
        for &tau2 in &[0.01, 0.05, 0.1, 0.2, 0.4] {
            let gap = rate_gap_orzf(50.0, tau2, 2.0);
            assert!(gap > prev);
            prev = gap;
        }
    }

    #[test]
    fn offset_inversion_closes_exactly() {
        for &scheme in &[Scheme::Orzf, Scheme::Zf, Scheme::RzfCdu] {
            for &beta in &[1.0, 1.5, 2.0, 4.0] {
                if scheme == Scheme::Zf && beta == 1.0 {
                    continue;
                }
                for &rho_db in &[10.0, 20.0, 30.0] {
                    let rho = 10f64.powf(rho_db / 10.0);
                    for &b in &[1.5, 2.0, 3.0] {
                        let spec = RateGapSpec::new(b, rho, beta, scheme).unwrap();
                        let tau2 = match distortion_for_rate_offset(&spec) {
                            Ok(t) => t,
                            Err(Error::Domain(_)) => continue, // offset unreachable here
                            Err(e) => panic!("{e}"),
                        };
                        let gap = rate_gap(scheme, rho, tau2, beta);
                        let tol = if scheme == Scheme::RzfCdu { 1e-6 } else { 1e-9 };
                        assert!(
                            (gap - b.log2()).abs() <= tol,
                            "{scheme:?} beta={beta} rho_db={rho_db} b={b}: gap {gap} vs {}",
                            b.log2()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn phi_high_snr_limits() {
        let rho = 1e6; // 60 dB
        for &b in &[1.5, 2.0, 4.0] {
            let zf = phi(Scheme::Zf, rho, b, 2.0).unwrap();
            assert!((zf / (b - 1.0) - 1.0).abs() < 0.01, "zf b={b}: {zf}");
            let orzf1 = phi(Scheme::Orzf, rho, b, 1.0).unwrap();
            assert!(
                (orzf1 / (b * b - 1.0) - 1.0).abs() < 0.01,
                "orzf beta=1 b={b}: {orzf1}"
            );
            let orzf2 = phi(Scheme::Orzf, rho, b, 2.0).unwrap();
            assert!((orzf2 / (b - 1.0) - 1.0).abs() < 0.01, "orzf beta=2 b={b}: {orzf2}");
            let cdu1 = phi(Scheme::RzfCdu, rho, b, 1.0).unwrap();
            assert!(
                (cdu1 / (2.0 * (b - 1.0)) - 1.0).abs() < 0.01,
                "rzf_cdu beta=1 b={b}: {cdu1}"
            );
            let cdu2 = phi(Scheme::RzfCdu, rho, b, 2.0).unwrap();
            assert!((cdu2 / (b - 1.0) - 1.0).abs() < 0.01, "rzf_cdu beta=2 b={b}: {cdu2}");
        }
    }

    #[test]
    fn feedback_bit_gaps_at_high_snr() {
        // At 60 dB and b = 2 the bit gaps reproduce (M-1) log2(b+1) against
        // ZF and (M-1) log2((b+1)/2) against the distortion-unaware design.
        let (m, b, rho) = (10, 2.0, 1e6);
        let orzf = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::Orzf).unwrap(), m)
            .unwrap()
            .real;
        let cdu = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::RzfCdu).unwrap(), m)
            .unwrap()
            .real;
        let zf = feedback_bits(&RateGapSpec::new(b, rho, 2.0, Scheme::Zf).unwrap(), m)
            .unwrap()
            .real;
        let m1 = m as f64 - 1.0;
        assert!(
            (zf - orzf - m1 * (b + 1.0).log2()).abs() < 0.1,
            "zf-orzf gap {}",
            zf - orzf
        );
        assert!(
            (cdu - orzf - m1 * ((b + 1.0) / 2.0).log2()).abs() < 0.1,
            "cdu-orzf gap {}",
            cdu - orzf
        );
        // phi -> 1 at b = 2 for ZF, so B is close to (M-1) log2 rho.
        assert!((zf - m1 * rho.log2()).abs() < 0.1);
    }

    #[test]
    fn bits_round_up_with_floor_of_one() {
        // At 0 dB the required distortion exceeds one, so the real-valued
        // scaling is negative and the integer count clamps to one bit.
        let spec = RateGapSpec::new(2.0, 1.0, 1.0, Scheme::Orzf).unwrap();
        let fb = feedback_bits(&spec, 10).unwrap();
        assert!(fb.real < 0.0);
        assert_eq!(fb.bits, 1, "low-SNR bits should clamp to 1, got {}", fb.bits);
        assert!(distortion_for_rate_offset(&spec).is_err());
        let spec_hi = RateGapSpec::new(2.0, 1e3, 1.0, Scheme::Orzf).unwrap();
        let hi = feedback_bits(&spec_hi, 10).unwrap();
        assert_eq!(hi.bits as f64, hi.real.ceil());
    }

    #[test]
    fn optimal_load_limit_and_stationarity() {
        // a -> 1 gives beta* -> e.
        let beta = optimal_load_iid(1.0, 0.0).unwrap(); // a = 1 exactly
        assert_relative_eq!(beta, std::f64::consts::E, max_relative = 1e-12);
        let near = optimal_load_iid(1.0 + 1e-9, 0.0).unwrap();
        assert!((near - std::f64::consts::E).abs() < 1e-6);

        // tau^2 = 0.1, rho = 10: a = 4.5, beta* about 1.95.
        let b = optimal_load_iid(10.0, 0.1).unwrap();
        assert!((b - 1.95).abs() < 0.01, "beta* = {b}");
        let a = (1.0 - 0.1) / (0.1 + 0.1);
        assert!(load_stationarity_residual(a, b) <= 1e-8);

        for &(rho, tau2) in &[(2.0, 0.0), (100.0, 0.05), (1e4, 0.3)] {
            let beta = optimal_load_iid(rho, tau2).unwrap();
            let a = (1.0 - tau2) / (tau2 + 1.0 / rho);
            assert!(
                load_stationarity_residual(a, beta) <= 1e-8,
                "rho={rho} tau2={tau2}: residual {}",
                load_stationarity_residual(a, beta)
            );
        }
    }

    #[test]
    fn user_count_matches_lambert_prediction_iid() {
        for &m in &[16usize, 32] {
            for &rho_db in &[0.0, 10.0, 20.0, 30.0] {
                for &tau2 in &[0.0, 0.1] {
                    let rho = 10f64.powf(rho_db / 10.0);
                    let k = optimal_user_count(
                        m,
                        rho,
                        tau2,
                        &Correlation::identity(m),
                        &[1.0],
                    )
                    .unwrap();
                    let beta_star = optimal_load_iid(rho, tau2).unwrap();
                    let predicted = m as f64 / beta_star;
                    assert!(
                        (k as f64 - predicted).abs() <= 1.0 + 1e-9,
                        "M={m} rho_db={rho_db} tau2={tau2}: K*={k}, prediction {predicted}"
                    );
                }
            }
        }
    }

    #[test]
    fn user_count_saturates_with_snr_under_distortion() {
        let m = 32;
        let theta = Correlation::identity(m);
        let high = optimal_user_count(m, 1e3, 0.1, &theta, &[1.0]).unwrap();
        let higher = optimal_user_count(m, 1e6, 0.1, &theta, &[1.0]).unwrap();
        assert_eq!(high, higher, "K* kept growing at high SNR despite distortion");
        // Perfect CSIT: nondecreasing in SNR.
        let mut prev = 0;
        for &rho in &[1.0, 10.0, 100.0, 1e4] {
            let k = optimal_user_count(m, rho, 0.0, &theta, &[1.0]).unwrap();
            assert!(k >= prev, "K* decreased from {prev} to {k} at rho={rho}");
            prev = k;
        }
    }

    fn tdd_cfg(scheme: TddScheme, t: f64) -> TddConfig {
        TddConfig::new(t, 16, 32, 0.1, 1.0, scheme).unwrap()
    }

    #[test]
    fn training_splits_in_half_at_low_snr() {
        for scheme in [TddScheme::Zf, TddScheme::Orzf] {
            let cfg = tdd_cfg(scheme, 1000.0);
            let opt = optimal_training_length(&cfg, 1e-4).unwrap();
            assert!(
                (opt.t_t - 500.0).abs() <= 5.0,
                "{scheme:?}: T_t* = {} at low SNR",
                opt.t_t
            );
        }
    }

    #[test]
    fn training_hits_minimum_at_high_snr() {
        for scheme in [TddScheme::Zf, TddScheme::Orzf] {
            let cfg = tdd_cfg(scheme, 100.0);
            let opt = optimal_training_length(&cfg, 1e6).unwrap();
            assert_eq!(opt.t_t, 16.0, "{scheme:?} T=100: T_t* = {}", opt.t_t);
        }
        // Longer blocks approach the minimum much more slowly: the interior
        // stationary point only merges with the boundary once
        // ln(gamma(K)) outweighs (T - K) d ln(1+gamma)/dT_t, near 110 dB
        // for T = 1000. At 60 dB the optimum is still interior.
        let cfg = tdd_cfg(TddScheme::Zf, 1000.0);
        let at60 = optimal_training_length(&cfg, 1e6).unwrap();
        assert!(at60.t_t > 16.0 && at60.t_t < 30.0, "T_t* = {}", at60.t_t);
        let at120 = optimal_training_length(&cfg, 1e12).unwrap();
        assert_eq!(at120.t_t, 16.0, "T_t* = {} at 120 dB", at120.t_t);
    }

    #[test]
    fn orzf_trains_no_more_than_zf() {
        for &rho_db in &[-10.0, 0.0, 10.0, 20.0, 30.0] {
            let rho = 10f64.powf(rho_db / 10.0);
            let zf = optimal_training_length(&tdd_cfg(TddScheme::Zf, 1000.0), rho).unwrap();
            let orzf = optimal_training_length(&tdd_cfg(TddScheme::Orzf, 1000.0), rho).unwrap();
            assert!(
                orzf.t_t <= zf.t_t + 1e-2 * 1000.0 * 1e-4 + 0.02,
                "rho_db={rho_db}: orzf {} > zf {}",
                orzf.t_t,
                zf.t_t
            );
        }
    }

    #[test]
    fn tdd_objective_is_concave_on_the_interval() {
        for scheme in [TddScheme::Zf, TddScheme::Orzf] {
            let cfg = tdd_cfg(scheme, 1000.0);
            for &rho_dl in &[0.01, 1.0, 100.0] {
                let n = 200;
                let lo = cfg.k as f64;
                let step = (cfg.t - lo) / n as f64;
                let vals: Vec<f64> = (0..=n)
                    .map(|i| normalized_tdd_rate(&cfg, rho_dl, lo + step * i as f64))
                    .collect();
                for w in vals.windows(3) {
                    let second = w[2] - 2.0 * w[1] + w[0];
                    assert!(
                        second < 1e-9 * vals[0].abs().max(1.0),
                        "{scheme:?} rho_dl={rho_dl}: second difference {second}"
                    );
                }
            }
        }
    }

    #[test]
    fn interior_training_optimum_is_stationary() {
        // Where the optimum is interior, the derivative of the normalized
        // rate vanishes there.
        for scheme in [TddScheme::Zf, TddScheme::Orzf] {
            let cfg = tdd_cfg(scheme, 1000.0);
            for &rho_dl in &[0.1, 1.0, 10.0] {
                let opt = optimal_training_length(&cfg, rho_dl).unwrap();
                assert!(opt.t_t > 16.0 + 1.0 && opt.t_t < 999.0, "expected interior");
                let h = 1e-3;
                let d = (normalized_tdd_rate(&cfg, rho_dl, opt.t_t + h)
                    - normalized_tdd_rate(&cfg, rho_dl, opt.t_t - h))
                    / (2.0 * h);
                // Scale by a representative second-difference step.
                let curv = (normalized_tdd_rate(&cfg, rho_dl, opt.t_t + 1.0)
                    - 2.0 * opt.rate
                    + normalized_tdd_rate(&cfg, rho_dl, opt.t_t - 1.0))
                .abs();
                assert!(
                    d.abs() <= 100.0 * curv.max(1e-9),
                    "{scheme:?} rho={rho_dl}: derivative {d:.3e} at T_t*={}",
                    opt.t_t
                );
            }
        }
    }

    #[test]
    fn joint_optimization_is_coordinate_ascent() {
        let cfg = tdd_cfg(TddScheme::Zf, 1000.0);
        let joint = joint_training_user_opt(&cfg, 100.0).unwrap();
        assert!(joint.converged);
        // The joint optimum dominates the fixed-K optimum.
        let fixed = optimal_training_length(&cfg, 100.0).unwrap();
        assert!(
            joint.rate >= fixed.rate - 1e-9,
            "joint {} < fixed-K {}",
            joint.rate,
            fixed.rate
        );
    }

    #[test]
    fn degenerate_block_forces_full_training() {
        let cfg = TddConfig::new(16.0, 16, 32, 0.1, 1.0, TddScheme::Zf).unwrap();
        let opt = optimal_training_length(&cfg, 1.0).unwrap();
        assert_eq!(opt.t_t, 16.0);
    }
}
