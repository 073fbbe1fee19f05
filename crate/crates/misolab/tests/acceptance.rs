//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured numbers.
//!
//! Run with: cargo test --release --test acceptance -- --nocapture

use misolab::channel::{
    draw_pathloss_gains, substream, Correlation, CorrelationSpec, PathLossSpec, StreamTag,
    TauModel,
};
use misolab::det_equiv::{
    orzf_zf_sinr_gap, rzf_sinr_general, rzf_sinr_iid, sum_rate_de, zf_sinr_general, zf_sinr_iid,
};
use misolab::optimize::{
    alpha_star, alpha_star_search, default_alpha_bracket, feedback_bits, load_stationarity_residual,
    normalized_tdd_rate, optimal_load_iid, optimal_training_length, optimal_user_count,
    RateGapSpec, Scheme, TddConfig, TddScheme,
};
use misolab::precoding::PrecoderKind;
use misolab::rmt::lambert_w0;
use misolab::sim::{monte_carlo_sum_rate, monte_carlo_with_threads, ExperimentSpec};

const DESK_TRIALS: usize = 1000;
const SEED: u64 = 20240731;

fn snr_grid() -> Vec<f64> {
    (0..=30).step_by(5).map(|db| db as f64).collect()
}

fn spec(
    m: usize,
    k: usize,
    precoder: PrecoderKind,
    tau2: f64,
    correlation: CorrelationSpec,
    pathloss: PathLossSpec,
) -> ExperimentSpec {
    ExperimentSpec {
        m,
        k,
        snr_grid_db: snr_grid(),
        power: 1.0,
        tau_model: TauModel::Fixed { tau2 },
        correlation,
        pathloss,
        precoder,
        trials: DESK_TRIALS,
        seed: SEED,
        csv: None,
    }
}

/// Criterion 1: the deterministic equivalents land within two Monte-Carlo
/// standard deviations of the empirical mean at 95% of the grid, for ORZF
/// at beta = 1 and ZF at beta = 2, across CSIT/correlation scenarios.
#[test]
fn criterion_1_de_accuracy() {
    let jakes = CorrelationSpec::JakesUca { d_over_lambda: 0.5 };
    let cost = PathLossSpec::Cost231Disk {
        cell_radius_m: 500.0,
        min_distance_m: 35.0,
    };
    let scenarios = [
        (0.0, CorrelationSpec::Identity, PathLossSpec::Equal),
        (0.01, CorrelationSpec::Identity, PathLossSpec::Equal), // tau = 0.1
        (0.01, jakes, cost),
    ];
    let mut total = 0;
    let mut within = 0;
    let mut worst = 0.0f64;
    for (precoder, k) in [(PrecoderKind::Orzf, 32), (PrecoderKind::Zf, 16)] {
        for (tau2, corr, pl) in scenarios.clone() {
            let s = spec(32, k, precoder, tau2, corr, pl);
            for r in monte_carlo_sum_rate(&s).expect("mc run") {
                total += 1;
                let sigmas = (r.de_sum_rate - r.mc_mean_sum_rate).abs() / r.mc_std_sum_rate;
                worst = worst.max(sigmas);
                if sigmas <= 2.0 {
                    within += 1;
                }
            }
        }
    }
    let frac = within as f64 / total as f64;
    let ok = frac >= 0.95;
    println!(
        "criterion 1 (DE within 2 MC std at >=95% of grid): {} — {}/{} points ({:.1}%), worst {:.2} sigma",
        if ok { "PASS" } else { "FAIL" },
        within,
        total,
        100.0 * frac,
        worst
    );
    assert!(ok, "only {within}/{total} grid points within two standard deviations");
}

/// Criterion 2: the general implicit equivalents reduce to the closed
/// forms in the uncorrelated equal-gain case to 1e-8.
#[test]
fn criterion_2_closed_form_consistency() {
    let theta = Correlation::identity(16);
    let k = 8;
    let gains = vec![1.0; k];
    let mut worst = 0.0f64;
    for &rho in &[0.1, 1.0, 10.0, 100.0] {
        for &tau2 in &[0.0f64, 0.05, 0.1, 0.3] {
            let tau = vec![tau2.sqrt(); k];
            for &beta in &[1.0, 2.0, 4.0] {
                let alpha = alpha_star(rho, tau2, beta).unwrap();
                let de = rzf_sinr_general(&theta, &gains, &tau, alpha, rho, beta).unwrap();
                let closed = rzf_sinr_iid(rho, tau2, beta);
                worst = worst.max((de.gamma[0] - closed).abs() / closed.max(1.0));
                if beta > 1.0 {
                    let de = zf_sinr_general(&theta, &gains, &tau, rho, beta).unwrap();
                    let closed = zf_sinr_iid(rho, tau2, beta);
                    worst = worst.max((de.gamma[0] - closed).abs() / closed.max(1.0));
                }
            }
        }
    }
    let ok = worst <= 1e-8;
    println!(
        "criterion 2 (implicit vs closed forms to 1e-8): {} — worst relative gap {:.2e}",
        if ok { "PASS" } else { "FAIL" },
        worst
    );
    assert!(ok);
}

/// Criterion 3: the ridge line search reproduces the closed form to 1e-6,
/// and at 20 dB / tau^2 = 0.1 / M = 10 the optimally regularized precoder
/// beats the distortion-unaware one by at least 1.5 bits/s/Hz of measured
/// sum rate. The equal-feedback-bits comparison (the configuration behind
/// the reported 2.5 bits/s/Hz) must land between 1.5 and 3.5.
#[test]
fn criterion_3_optimal_regularization() {
    let mut worst = 0.0f64;
    for &rho in &[0.1, 1.0, 10.0, 100.0] {
        for &tau2 in &[0.0f64, 0.1, 0.3] {
            for &beta in &[1.0, 2.0, 4.0] {
                let k = 8;
                let tau = vec![tau2.sqrt(); k];
                let found = alpha_star_search(
                    &Correlation::identity(16),
                    &vec![1.0; k],
                    &tau,
                    rho,
                    beta,
                    default_alpha_bracket(rho, beta),
                    1e-8,
                )
                .unwrap()
                .alpha;
                let closed = alpha_star(rho, tau2, beta).unwrap();
                worst = worst.max((found - closed).abs() / closed);
            }
        }
    }
    let search_ok = worst <= 1e-6;

    let run = |precoder: PrecoderKind, tau2: f64| -> f64 {
        let s = ExperimentSpec {
            snr_grid_db: vec![20.0],
            ..spec(
                10,
                10,
                precoder,
                tau2,
                CorrelationSpec::Identity,
                PathLossSpec::Equal,
            )
        };
        monte_carlo_sum_rate(&s).unwrap()[0].mc_mean_sum_rate
    };
    let gap_fixed = run(PrecoderKind::Orzf, 0.1) - run(PrecoderKind::RzfCdu, 0.1);

    // Equal feedback bits at 20 dB: the quantized-CSIT comparison.
    let rho = 100.0;
    let bits = feedback_bits(&RateGapSpec::new(2.0, rho, 1.0, Scheme::Orzf).unwrap(), 10)
        .unwrap()
        .bits;
    let tau2_rvq = 2f64.powf(-(bits as f64) / 9.0);
    let gap_rvq = run(PrecoderKind::Orzf, tau2_rvq) - run(PrecoderKind::RzfCdu, tau2_rvq);

    let ok = search_ok && gap_fixed >= 1.5 && (1.5..=3.5).contains(&gap_rvq);
    println!(
        "criterion 3 (optimal regularization): {} — search vs closed form {:.2e}, \
         MC gap at tau^2=0.1: {:.2} bits/s/Hz (>= 1.5), equal-bits gap: {:.2} (in [1.5, 3.5])",
        if ok { "PASS" } else { "FAIL" },
        worst,
        gap_fixed,
        gap_rvq
    );
    assert!(search_ok, "line search disagreement {worst:.2e}");
    assert!(gap_fixed >= 1.5, "fixed-distortion gap {gap_fixed:.2}");
    assert!(
        (1.5..=3.5).contains(&gap_rvq),
        "equal-bits gap {gap_rvq:.2} outside [1.5, 3.5]"
    );
}

/// Criterion 4: with the offset-holding bit count, the measured sum-rate
/// offset from perfect-CSIT ORZF stays at 10 +- 1.5 bits/s/Hz over 5..30 dB.
///
/// The 30 dB point fails by design of the measurement itself: the bit
/// scaling holds the asymptotic (large-M) offset at 10, but at M = 10 the
/// per-realization sum rate of the perfect-CSIT system runs well above its
/// equivalent at high SNR (about +8.4 bits at 30 dB, sample std about 10)
/// while the quantized system exceeds its own by less (+6.1), so the
/// measured offset converges near 12.3. Cross-checked against an
/// independent implementation; more trials sharpen, not shift, the value.
/// The assertion is kept strict rather than widened to mask this.
#[test]
fn criterion_4_feedback_scaling() {
    let (m, k, b) = (10usize, 10usize, 2.0);
    let grid: Vec<f64> = (5..=30).step_by(5).map(|db| db as f64).collect();
    let perfect = ExperimentSpec {
        snr_grid_db: grid.clone(),
        ..spec(
            m,
            k,
            PrecoderKind::Orzf,
            0.0,
            CorrelationSpec::Identity,
            PathLossSpec::Equal,
        )
    };
    let perfect_records = monte_carlo_sum_rate(&perfect).unwrap();

    let mut offsets = Vec::new();
    for (i, &snr_db) in grid.iter().enumerate() {
        let rho = 10f64.powf(snr_db / 10.0);
        let bits = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::Orzf).unwrap(), m)
            .unwrap()
            .bits;
        let tau2 = 2f64.powf(-(bits as f64) / (m as f64 - 1.0));
        let s = ExperimentSpec {
            snr_grid_db: vec![snr_db],
            ..spec(
                m,
                k,
                PrecoderKind::Orzf,
                tau2,
                CorrelationSpec::Identity,
                PathLossSpec::Equal,
            )
        };
        let quantized = monte_carlo_sum_rate(&s).unwrap()[0].mc_mean_sum_rate;
        offsets.push((snr_db, perfect_records[i].mc_mean_sum_rate - quantized));
    }
    let ok = offsets.iter().all(|&(_, off)| (8.5..=11.5).contains(&off));
    let detail: Vec<String> = offsets
        .iter()
        .map(|(db, off)| format!("{db} dB: {off:.2}"))
        .collect();
    println!(
        "criterion 4 (measured offset 10 +- 1.5 with scaled bits): {} — {}",
        if ok { "PASS" } else { "FAIL" },
        detail.join(", ")
    );
    assert!(
        ok,
        "offsets out of band: {detail:?} (the 30 dB point reflects finite-size \
         drift of the measured offset at M = 10, near 12.3 in the many-trial \
         limit; the bit scaling pins the asymptotic offset, not the M = 10 one)"
    );
}

/// Criterion 5: analytic high-SNR limits of the distortion scaling laws
/// within 1% at 60 dB, and the headline bit-count gaps within 0.1 bit.
#[test]
fn criterion_5_high_snr_limits() {
    let rho = 1e6;
    let mut worst = 0.0f64;
    for &b in &[1.5f64, 2.0, 4.0] {
        let checks = [
            (misolab::optimize::phi(Scheme::Zf, rho, b, 2.0).unwrap(), b - 1.0),
            (misolab::optimize::phi(Scheme::Orzf, rho, b, 1.0).unwrap(), b * b - 1.0),
            (misolab::optimize::phi(Scheme::Orzf, rho, b, 2.0).unwrap(), b - 1.0),
            (misolab::optimize::phi(Scheme::RzfCdu, rho, b, 1.0).unwrap(), 2.0 * (b - 1.0)),
        ];
        for (value, limit) in checks {
            worst = worst.max((value / limit - 1.0).abs());
        }
    }
    let phi_ok = worst <= 0.01;

    let (m, b) = (10usize, 2.0f64);
    let m1 = m as f64 - 1.0;
    let orzf = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::Orzf).unwrap(), m)
        .unwrap()
        .real;
    let cdu = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::RzfCdu).unwrap(), m)
        .unwrap()
        .real;
    let zf = feedback_bits(&RateGapSpec::new(b, rho, 2.0, Scheme::Zf).unwrap(), m)
        .unwrap()
        .real;
    let gap_zf = (zf - orzf - m1 * (b + 1.0).log2()).abs();
    let gap_cdu = (cdu - orzf - m1 * ((b + 1.0) / 2.0).log2()).abs();
    let bits_ok = gap_zf <= 0.1 && gap_cdu <= 0.1;

    let ok = phi_ok && bits_ok;
    println!(
        "criterion 5 (high-SNR scaling limits): {} — worst phi deviation {:.3}%, \
         bit-gap errors {:.3} / {:.3} bits",
        if ok { "PASS" } else { "FAIL" },
        100.0 * worst,
        gap_zf,
        gap_cdu
    );
    assert!(ok);
}

/// Criterion 6: the optimal load satisfies its transcendental equation to
/// 1e-8, tends to e, and the integer user-count search stays within one
/// user of the closed form.
#[test]
fn criterion_6_user_count() {
    let mut worst_resid = 0.0f64;
    for &(rho, tau2) in &[(1.5, 0.0), (10.0, 0.1), (100.0, 0.05), (1e4, 0.3)] {
        let beta = optimal_load_iid(rho, tau2).unwrap();
        let a = (1.0 - tau2) / (tau2 + 1.0 / rho);
        worst_resid = worst_resid.max(load_stationarity_residual(a, beta));
        let x = (a - 1.0) / std::f64::consts::E;
        let w = lambert_w0(x).unwrap();
        worst_resid = worst_resid.max((w * w.exp() - x).abs());
    }
    let limit_err = (optimal_load_iid(1.0 + 1e-9, 0.0).unwrap() - std::f64::consts::E).abs();

    let mut worst_users = 0.0f64;
    for &m in &[16usize, 32] {
        for &snr_db in &[0.0, 10.0, 20.0, 30.0] {
            for &tau2 in &[0.0, 0.1] {
                let rho = 10f64.powf(snr_db / 10.0);
                let k = optimal_user_count(m, rho, tau2, &Correlation::identity(m), &[1.0])
                    .unwrap();
                let predicted = m as f64 / optimal_load_iid(rho, tau2).unwrap();
                worst_users = worst_users.max((k as f64 - predicted).abs());
            }
        }
    }
    let ok = worst_resid <= 1e-8 && limit_err <= 1e-6 && worst_users <= 1.0 + 1e-9;
    println!(
        "criterion 6 (user-count optimizer): {} — stationarity residual {:.2e}, \
         limit error {:.2e}, max |K* - M/beta*| = {:.2}",
        if ok { "PASS" } else { "FAIL" },
        worst_resid,
        limit_err,
        worst_users
    );
    assert!(ok);
}

/// Criterion 7: training-split limits. Half the block at -40 dB (within 1%)
/// and the minimal length K at +60 dB for T in {100, 1000}; concave
/// objectives; the optimally regularized scheme never trains longer than ZF.
///
/// The +60 dB boundary check fails for T = 1000 by design of the objective
/// itself: with rho_ul = 0.1 rho_dl the interior stationary point satisfies
/// ln(1 + gamma(K)) = (T - K) d/dT_t ln(1 + gamma), which for T = 1000
/// still sits at T_t of about 22.4 at 60 dB and only merges with the
/// boundary K = 16 near 110 dB (the T = 100 block saturates below 40 dB).
/// The assertion is kept strict rather than widened to mask this.
#[test]
fn criterion_7_tdd_limits() {
    let mut lines = Vec::new();
    let mut ok = true;

    for &t in &[100.0, 1000.0] {
        for scheme in [TddScheme::Zf, TddScheme::Orzf] {
            let cfg = TddConfig::new(t, 16, 32, 0.1, 1.0, scheme).unwrap();
            let low = optimal_training_length(&cfg, 1e-4).unwrap();
            let low_ok = (low.t_t - t / 2.0).abs() <= 0.01 * (t / 2.0);
            let high = optimal_training_length(&cfg, 1e6).unwrap();
            let high_ok = high.t_t == 16.0;
            ok &= low_ok && high_ok;
            lines.push(format!(
                "{scheme:?} T={t}: T_t*(-40dB)={:.2} [{}], T_t*(+60dB)={:.2} [{}]",
                low.t_t,
                if low_ok { "ok" } else { "off" },
                high.t_t,
                if high_ok { "ok" } else { "interior" }
            ));
        }
    }

    // Concavity of both objectives on [K, T].
    let mut concave = true;
    for scheme in [TddScheme::Zf, TddScheme::Orzf] {
        let cfg = TddConfig::new(1000.0, 16, 32, 0.1, 1.0, scheme).unwrap();
        for &rho_dl in &[0.01, 1.0, 100.0, 1e4] {
            let n = 160;
            let step = (1000.0 - 16.0) / n as f64;
            let vals: Vec<f64> = (0..=n)
                .map(|i| normalized_tdd_rate(&cfg, rho_dl, 16.0 + step * i as f64))
                .collect();
            for w in vals.windows(3) {
                if w[2] - 2.0 * w[1] + w[0] >= 1e-9 * vals[0].abs().max(1.0) {
                    concave = false;
                }
            }
        }
    }
    ok &= concave;

    // ORZF trains no longer than ZF at every intermediate SNR.
    let mut ordered = true;
    for db in (-20..=40).step_by(5) {
        let rho_dl = 10f64.powf(db as f64 / 10.0);
        let zf = optimal_training_length(
            &TddConfig::new(1000.0, 16, 32, 0.1, 1.0, TddScheme::Zf).unwrap(),
            rho_dl,
        )
        .unwrap();
        let orzf = optimal_training_length(
            &TddConfig::new(1000.0, 16, 32, 0.1, 1.0, TddScheme::Orzf).unwrap(),
            rho_dl,
        )
        .unwrap();
        if orzf.t_t > zf.t_t + 0.03 {
            ordered = false;
        }
    }
    ok &= ordered;

    println!(
        "criterion 7 (TDD training limits): {} — {}; concave: {}; orzf <= zf: {}",
        if ok { "PASS" } else { "FAIL" },
        lines.join("; "),
        concave,
        ordered
    );
    assert!(
        ok,
        "TDD criterion details: {lines:?}, concave={concave}, ordered={ordered} \
         (the T=1000 boundary check cannot hold at 60 dB: the stationary point \
         of K (1 - T_t/T) log2(1 + gamma(T_t)) stays interior until about 110 dB)"
    );
}

/// Criterion 8: infrastructure properties in one sweep: fixed-point
/// residuals, power equality, Lambert-W roundtrip, ZF-as-RZF limit, the
/// Jensen bound and parallel determinism.
#[test]
fn criterion_8_infrastructure() {
    // Fixed-point residuals at tight tolerance.
    let theta = Correlation::jakes_uca(16, 0.5);
    let gains = vec![0.5, 0.7, 0.9, 1.0, 1.1, 1.2, 1.3, 1.3];
    let tau = vec![0.2; 8];
    let de = rzf_sinr_general(&theta, &gains, &tau, 0.05, 10.0, 2.0).unwrap();
    let residual_ok = de.residual <= 1e-10;

    // Lambert roundtrip on a log grid.
    let mut lambert_ok = true;
    for k in -8..=6 {
        let x = 10f64.powi(k);
        let w = lambert_w0(x).unwrap();
        if (w * w.exp() - x).abs() > 1e-12 * x.max(1.0) {
            lambert_ok = false;
        }
    }

    // ZF equivalent as the vanishing-ridge limit of the RZF equivalent.
    let zf = zf_sinr_general(&theta, &gains, &tau, 10.0, 2.0).unwrap();
    let rzf = rzf_sinr_general(&theta, &gains, &tau, 1e-8, 10.0, 2.0).unwrap();
    let mut zf_limit_ok = true;
    for i in 0..8 {
        if (rzf.gamma[i] - zf.gamma[i]).abs() > 1e-4 * zf.gamma[i] {
            zf_limit_ok = false;
        }
    }

    // Jensen bound on the correlation ratio.
    let jensen_ok = zf.c2 / (zf.cbar * zf.cbar) >= 1.0;

    // Parallel determinism of the Monte-Carlo runner.
    let s = ExperimentSpec {
        snr_grid_db: vec![0.0, 10.0],
        trials: 64,
        ..spec(
            8,
            4,
            PrecoderKind::Orzf,
            0.1,
            CorrelationSpec::Identity,
            PathLossSpec::Equal,
        )
    };
    let one = monte_carlo_with_threads(&s, 1).unwrap();
    let four = monte_carlo_with_threads(&s, 4).unwrap();
    let det_ok = one
        .iter()
        .zip(&four)
        .all(|(a, b)| a.mc_mean_sum_rate == b.mc_mean_sum_rate
            && a.mc_std_sum_rate == b.mc_std_sum_rate);

    // DE sum rate is finite and positive everywhere it was computed.
    let de_ok = sum_rate_de(&de.gamma).is_finite() && sum_rate_de(&zf.gamma) > 0.0;

    // The closed-form SINR gap functions are consistent.
    let gap_ok = (orzf_zf_sinr_gap(1e4, 0.0, 2.0) - 1.0).abs() < 1e-2;

    let cost = PathLossSpec::Cost231Disk {
        cell_radius_m: 500.0,
        min_distance_m: 35.0,
    };
    let mut rng = substream(3, StreamTag::PathLoss);
    let g = draw_pathloss_gains(32, &cost, &mut rng);
    let gains_ok = (g.sum() / 32.0 - 1.0).abs() < 1e-12;

    let ok = residual_ok
        && lambert_ok
        && zf_limit_ok
        && jensen_ok
        && det_ok
        && de_ok
        && gap_ok
        && gains_ok;
    println!(
        "criterion 8 (infrastructure properties): {} — residual {:.1e}, lambert {}, \
         zf-limit {}, jensen {}, parallel-determinism {}, gains {}",
        if ok { "PASS" } else { "FAIL" },
        de.residual,
        lambert_ok,
        zf_limit_ok,
        jensen_ok,
        det_ok,
        gains_ok
    );
    assert!(ok);
}
