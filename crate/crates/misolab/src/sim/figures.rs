//! One-command reproduction of the validation figures: each preset freezes
//! the system parameters of one figure, runs the required Monte-Carlo
//! sweeps and/or analytic curves, writes one CSV per curve and emits a
//! matplotlib script that draws them.
//!
//! `desk` scale runs 1000 trials per point, `paper` scale 10000. Analytic
//! figures ignore the scale.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::{
    draw_pathloss_gains, substream, ChannelModel, CorrelationSpec, PathLossSpec, StreamTag,
    SystemConfig, TauModel,
};
use crate::det_equiv::{rzf_sinr_general, sum_rate_de, zf_sinr_general};
use crate::error::{Error, Result};
use crate::optimize::{
    alpha_star, feedback_bits, joint_training_user_opt, optimal_load_iid,
    optimal_training_length, optimal_user_count, RateGapSpec, Scheme, TddConfig, TddScheme,
};
use crate::precoding::PrecoderKind;

use super::{monte_carlo_sum_rate, run_trials, ExperimentSpec};

/// Figure selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    /// ORZF sum rate vs SNR, M=32, beta=1: deterministic equivalent against
    /// Monte-Carlo for three CSIT/correlation scenarios.
    Fig1,
    /// ZF sum rate vs SNR, M=32, beta=2, same scenarios.
    Fig2,
    /// Precoder comparison at M=10, beta=1, tau^2=0.1: ORZF, RZF-CDU, MMSE, ZF.
    Fig3,
    /// Limited feedback: ORZF with the offset-holding bit scaling against
    /// perfect CSIT; target sum-rate offset K log2(b) = 10.
    Fig4,
    /// Feedback bits vs SNR for the three scaling laws.
    Fig5,
    /// Sum-rate maximizing number of active users vs SNR.
    Fig6,
    /// ZF sum rate vs SNR at M=16 for fixed and adapted user counts.
    Fig7,
    /// Optimal training fraction T_t*/T vs downlink SNR.
    Fig8,
    /// Normalized sum rate with trained CSIT: fixed K versus joint (T_t, K).
    Fig9,
}

impl FromStr for FigureName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "fig1" => FigureName::Fig1,
            "fig2" => FigureName::Fig2,
            "fig3" => FigureName::Fig3,
            "fig4" => FigureName::Fig4,
            "fig5" => FigureName::Fig5,
            "fig6" => FigureName::Fig6,
            "fig7" => FigureName::Fig7,
            "fig8" => FigureName::Fig8,
            "fig9" => FigureName::Fig9,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown figure `{other}` (expected fig1..fig9)"
                )))
            }
        })
    }
}

impl fmt::Display for FigureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            FigureName::Fig1 => 1,
            FigureName::Fig2 => 2,
            FigureName::Fig3 => 3,
            FigureName::Fig4 => 4,
            FigureName::Fig5 => 5,
            FigureName::Fig6 => 6,
            FigureName::Fig7 => 7,
            FigureName::Fig8 => 8,
            FigureName::Fig9 => 9,
        };
        write!(f, "fig{n}")
    }
}

/// Trial budget selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// 1000 trials per point; minutes of runtime for the whole set.
    Desk,
    /// 10000 trials per point, the full averaging depth.
    Paper,
}

impl Scale {
    pub fn trials(&self) -> usize {
        match self {
            Scale::Desk => 1000,
            Scale::Paper => 10_000,
        }
    }
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::InvalidInput(format!(
                "unknown scale `{other}` (expected desk or paper)"
            ))),
        }
    }
}

const SNR_GRID: [f64; 7] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];

fn jakes() -> CorrelationSpec {
    CorrelationSpec::JakesUca { d_over_lambda: 0.5 }
}

fn cost231() -> PathLossSpec {
    PathLossSpec::Cost231Disk {
        cell_radius_m: 500.0,
        min_distance_m: 35.0,
    }
}

/// A curve file on disk: comment lines, a header, and rows.
struct CurveFile {
    path: PathBuf,
    comments: Vec<String>,
    header: String,
    rows: Vec<String>,
}

impl CurveFile {
    fn new(dir: &Path, name: &str, comments: &[&str], header: &str) -> Self {
        CurveFile {
            path: dir.join(name),
            comments: comments.iter().map(|s| s.to_string()).collect(),
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: String) {
        self.rows.push(row);
    }

    fn write(&self) -> Result<PathBuf> {
        if let Some(dir) = self.path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut out = std::io::BufWriter::new(std::fs::File::create(&self.path)?);
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", self.header)?;
        for row in &self.rows {
            writeln!(out, "{row}")?;
        }
        Ok(self.path.clone())
    }
}

/// Runs one figure preset, writing its CSVs and plot script under
/// `out_dir`. Returns the paths written.
pub fn reproduce_figure(
    name: FigureName,
    scale: Scale,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = match name {
        FigureName::Fig1 => de_accuracy_figure(name, scale, seed, out_dir, PrecoderKind::Orzf, 32),
        FigureName::Fig2 => de_accuracy_figure(name, scale, seed, out_dir, PrecoderKind::Zf, 16),
        FigureName::Fig3 => precoder_comparison(scale, seed, out_dir),
        FigureName::Fig4 => limited_feedback(scale, seed, out_dir),
        FigureName::Fig5 => bit_scaling(out_dir),
        FigureName::Fig6 => user_count_curves(seed, out_dir),
        FigureName::Fig7 => adaptive_user_rates(scale, seed, out_dir),
        FigureName::Fig8 => training_fraction(out_dir),
        FigureName::Fig9 => joint_training(out_dir),
    }?;
    written.push(write_plot_script(name, out_dir, &written)?);
    Ok(written)
}

/// Standard MC-vs-DE record rows for one curve.
fn mc_curve_rows(spec: &ExperimentSpec) -> Result<Vec<String>> {
    Ok(monte_carlo_sum_rate(spec)?
        .into_iter()
        .map(|r| {
            format!(
                "{},{},{},{}",
                r.snr_db, r.mc_mean_sum_rate, r.mc_std_sum_rate, r.de_sum_rate
            )
        })
        .collect())
}

const MC_DE_HEADER: &str = "snr_db,mc_mean_sum_rate,mc_std_sum_rate,de_sum_rate";
const MC_DE_COMMENTS: [&str; 2] = [
    "mc_std_sum_rate is the sample standard deviation of the per-realization sum rate",
    "(the error-bar half width), not the standard error of the mean",
];

fn de_accuracy_figure(
    name: FigureName,
    scale: Scale,
    seed: u64,
    out_dir: &Path,
    precoder: PrecoderKind,
    k: usize,
) -> Result<Vec<PathBuf>> {
    let base = ExperimentSpec {
        m: 32,
        k,
        snr_grid_db: SNR_GRID.to_vec(),
        power: 1.0,
        tau_model: TauModel::Fixed { tau2: 0.0 },
        correlation: CorrelationSpec::Identity,
        pathloss: PathLossSpec::Equal,
        precoder,
        trials: scale.trials(),
        seed,
        csv: None,
    };
    let scenarios: [(&str, TauModel, CorrelationSpec, PathLossSpec); 3] = [
        (
            "iid_tau2_0",
            TauModel::Fixed { tau2: 0.0 },
            CorrelationSpec::Identity,
            PathLossSpec::Equal,
        ),
        (
            "iid_tau2_01",
            TauModel::Fixed { tau2: 0.1 },
            CorrelationSpec::Identity,
            PathLossSpec::Equal,
        ),
        (
            "jakes_cost231_tau2_01",
            TauModel::Fixed { tau2: 0.1 },
            jakes(),
            cost231(),
        ),
    ];
    let mut written = Vec::new();
    for (tag, tau_model, correlation, pathloss) in scenarios {
        let spec = ExperimentSpec {
            tau_model,
            correlation,
            pathloss,
            ..base.clone()
        };
        let mut file = CurveFile::new(
            out_dir,
            &format!("{name}_{tag}.csv"),
            &MC_DE_COMMENTS,
            MC_DE_HEADER,
        );
        for row in mc_curve_rows(&spec)? {
            file.push(row);
        }
        written.push(file.write()?);
    }
    Ok(written)
}

fn precoder_comparison(scale: Scale, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (m, k, tau2) = (10, 10, 0.1);
    let mut written = Vec::new();
    for kind in [
        PrecoderKind::Orzf,
        PrecoderKind::RzfCdu,
        PrecoderKind::MmseFilter,
    ] {
        let spec = ExperimentSpec {
            m,
            k,
            snr_grid_db: SNR_GRID.to_vec(),
            power: 1.0,
            tau_model: TauModel::Fixed { tau2 },
            correlation: CorrelationSpec::Identity,
            pathloss: PathLossSpec::Equal,
            precoder: kind,
            trials: scale.trials(),
            seed,
            csv: None,
        };
        let mut file = CurveFile::new(
            out_dir,
            &format!("fig3_{}.csv", kind.tag()),
            &MC_DE_COMMENTS,
            MC_DE_HEADER,
        );
        for row in mc_curve_rows(&spec)? {
            file.push(row);
        }
        written.push(file.write()?);
    }

    // ZF at beta = 1 has no deterministic equivalent; Monte-Carlo only.
    let cfg = SystemConfig::new(
        m,
        k,
        SNR_GRID[0],
        1.0,
        tau2.sqrt(),
        CorrelationSpec::Identity,
        PathLossSpec::Equal,
    )?;
    let model_base = cfg.resolve(&mut substream(seed, StreamTag::PathLoss));
    let mut file = CurveFile::new(
        out_dir,
        "fig3_zf.csv",
        &[
            MC_DE_COMMENTS[0],
            MC_DE_COMMENTS[1],
            "de_sum_rate is empty: the ZF equivalent needs beta > 1",
        ],
        MC_DE_HEADER,
    );
    for (snr_index, &snr_db) in SNR_GRID.iter().enumerate() {
        let cfg = SystemConfig::new(
            m,
            k,
            snr_db,
            1.0,
            tau2.sqrt(),
            CorrelationSpec::Identity,
            PathLossSpec::Equal,
        )?;
        let model = ChannelModel {
            config: cfg,
            theta: model_base.theta.clone(),
            gains: model_base.gains.clone(),
        };
        let stats = run_trials(&model, None, snr_index, scale.trials(), seed)?;
        file.push(format!("{snr_db},{},{},", stats.mean, stats.std));
    }
    written.push(file.write()?);
    Ok(written)
}

fn limited_feedback(scale: Scale, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (m, k, b) = (10usize, 10usize, 2.0);
    let beta = 1.0;
    let mut written = Vec::new();

    // Perfect-CSIT ORZF reference.
    let perfect = ExperimentSpec {
        m,
        k,
        snr_grid_db: SNR_GRID.to_vec(),
        power: 1.0,
        tau_model: TauModel::Fixed { tau2: 0.0 },
        correlation: CorrelationSpec::Identity,
        pathloss: PathLossSpec::Equal,
        precoder: PrecoderKind::Orzf,
        trials: scale.trials(),
        seed,
        csv: None,
    };
    let mut file = CurveFile::new(out_dir, "fig4_perfect.csv", &MC_DE_COMMENTS, MC_DE_HEADER);
    for row in mc_curve_rows(&perfect)? {
        file.push(row);
    }
    written.push(file.write()?);

    // Quantized CSIT with the offset-holding bit count, for ORZF and for
    // the distortion-unaware design given the same bits.
    let theta = crate::channel::Correlation::identity(m);
    let gains = vec![1.0; k];
    let header = "snr_db,bits,tau2,mc_mean_sum_rate,mc_std_sum_rate,de_sum_rate";
    let mut orzf_file = CurveFile::new(
        out_dir,
        "fig4_orzf_rvq.csv",
        &[
            "bits per user hold the sum-rate offset at K log2(b) = 10 (floored at 1)",
            MC_DE_COMMENTS[0],
        ],
        header,
    );
    let mut cdu_file = CurveFile::new(
        out_dir,
        "fig4_rzf_cdu_rvq.csv",
        &["same bit count as the orzf curve, distortion-unaware ridge"],
        header,
    );
    for (snr_index, &snr_db) in SNR_GRID.iter().enumerate() {
        let rho = 10f64.powf(snr_db / 10.0);
        let bits = feedback_bits(&RateGapSpec::new(b, rho, beta, Scheme::Orzf)?, m)?.bits;
        let tau2 = 2f64.powf(-(bits as f64) / (m as f64 - 1.0));
        let tau = vec![tau2.sqrt(); k];
        let cfg = SystemConfig::new(
            m,
            k,
            snr_db,
            1.0,
            tau2.sqrt(),
            CorrelationSpec::Identity,
            PathLossSpec::Equal,
        )?;
        let model = ChannelModel {
            config: cfg,
            theta: theta.clone(),
            gains: nalgebra::DVector::from_element(k, 1.0),
        };

        let a_orzf = alpha_star(rho, tau2, beta)?;
        let de_orzf = sum_rate_de(&rzf_sinr_general(&theta, &gains, &tau, a_orzf, rho, beta)?.gamma);
        let stats = run_trials(&model, Some(a_orzf), snr_index, scale.trials(), seed)?;
        orzf_file.push(format!(
            "{snr_db},{bits},{tau2},{},{},{de_orzf}",
            stats.mean, stats.std
        ));

        let a_cdu = 1.0 / (beta * rho);
        let de_cdu = sum_rate_de(&rzf_sinr_general(&theta, &gains, &tau, a_cdu, rho, beta)?.gamma);
        let stats = run_trials(&model, Some(a_cdu), snr_index, scale.trials(), seed)?;
        cdu_file.push(format!(
            "{snr_db},{bits},{tau2},{},{},{de_cdu}",
            stats.mean, stats.std
        ));
    }
    written.push(orzf_file.write()?);
    written.push(cdu_file.write()?);
    Ok(written)
}

fn bit_scaling(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (m, b) = (10usize, 2.0);
    let mut file = CurveFile::new(
        out_dir,
        "fig5_bits.csv",
        &[
            "feedback bits per user holding the per-user rate offset at log2(2) = 1",
            "orzf and rzf_cdu at beta = 1; zf at beta = 2 (its scaling needs beta > 1)",
        ],
        "snr_db,b_orzf_real,b_orzf,b_rzf_cdu_real,b_rzf_cdu,b_zf_real,b_zf",
    );
    for snr_db in (0..=30).step_by(2) {
        let rho = 10f64.powf(snr_db as f64 / 10.0);
        let orzf = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::Orzf)?, m)?;
        let cdu = feedback_bits(&RateGapSpec::new(b, rho, 1.0, Scheme::RzfCdu)?, m)?;
        let zf = feedback_bits(&RateGapSpec::new(b, rho, 2.0, Scheme::Zf)?, m)?;
        file.push(format!(
            "{snr_db},{},{},{},{},{},{}",
            orzf.real, orzf.bits, cdu.real, cdu.bits, zf.real, zf.bits
        ));
    }
    Ok(vec![file.write()?])
}

fn user_count_curves(seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (m, tau2) = (16usize, 0.1);
    let identity = crate::channel::Correlation::identity(m);
    let theta_jakes = crate::channel::Correlation::jakes_uca(m, 0.5);
    let mut sample_rng = substream(seed, StreamTag::GainSamples);
    let samples = draw_pathloss_gains(10_000, &cost231(), &mut sample_rng);
    let samples: Vec<f64> = samples.iter().cloned().collect();

    let mut file = CurveFile::new(
        out_dir,
        "fig6_user_count.csv",
        &[
            "k_star_lambert: closed-form optimal load M/beta*",
            "k_star_iid: integer search on the ZF equivalent, uncorrelated equal gains",
            "k_star_jakes_cost231: integer search with Jakes correlation and sampled gains",
        ],
        "snr_db,k_star_lambert,k_star_iid,k_star_jakes_cost231",
    );
    for snr_db in (-10..=30).step_by(5) {
        let rho = 10f64.powf(snr_db as f64 / 10.0);
        let lambert = m as f64 / optimal_load_iid(rho, tau2)?;
        let iid = optimal_user_count(m, rho, tau2, &identity, &[1.0])?;
        let corr = optimal_user_count(m, rho, tau2, &theta_jakes, &samples)?;
        file.push(format!("{snr_db},{lambert},{iid},{corr}"));
    }
    Ok(vec![file.write()?])
}

fn adaptive_user_rates(scale: Scale, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (m, tau2) = (16usize, 0.1);
    let mut written = Vec::new();
    for (tag, correlation, pathloss) in [
        ("iid", CorrelationSpec::Identity, PathLossSpec::Equal),
        ("jakes_cost231", jakes(), cost231()),
    ] {
        // Fixed K = 8.
        let spec = ExperimentSpec {
            m,
            k: 8,
            snr_grid_db: SNR_GRID.to_vec(),
            power: 1.0,
            tau_model: TauModel::Fixed { tau2 },
            correlation: correlation.clone(),
            pathloss: pathloss.clone(),
            precoder: PrecoderKind::Zf,
            trials: scale.trials(),
            seed,
            csv: None,
        };
        let mut file = CurveFile::new(
            out_dir,
            &format!("fig7_{tag}_k8.csv"),
            &MC_DE_COMMENTS,
            MC_DE_HEADER,
        );
        for row in mc_curve_rows(&spec)? {
            file.push(row);
        }
        written.push(file.write()?);

        // K adapted per SNR point through the user-count optimizer.
        let theta = match correlation {
            CorrelationSpec::Identity => crate::channel::Correlation::identity(m),
            CorrelationSpec::JakesUca { d_over_lambda } => {
                crate::channel::Correlation::jakes_uca(m, d_over_lambda)
            }
        };
        let samples: Vec<f64> = match &pathloss {
            PathLossSpec::Equal => vec![1.0],
            spec => {
                let mut rng = substream(seed, StreamTag::GainSamples);
                draw_pathloss_gains(10_000, spec, &mut rng).iter().cloned().collect()
            }
        };
        let mut file = CurveFile::new(
            out_dir,
            &format!("fig7_{tag}_adaptive.csv"),
            &[
                "K chosen per SNR point by the user-count optimizer",
                MC_DE_COMMENTS[0],
            ],
            "snr_db,k,mc_mean_sum_rate,mc_std_sum_rate,de_sum_rate",
        );
        for (snr_index, &snr_db) in SNR_GRID.iter().enumerate() {
            let rho = 10f64.powf(snr_db / 10.0);
            let k_star = optimal_user_count(m, rho, tau2, &theta, &samples)?;
            let cfg = SystemConfig::new(
                m,
                k_star,
                snr_db,
                1.0,
                tau2.sqrt(),
                correlation.clone(),
                pathloss.clone(),
            )?;
            let model = cfg.resolve(&mut substream(seed, StreamTag::PathLoss));
            let gain_slice: Vec<f64> = model.gains.iter().cloned().collect();
            let tau = vec![tau2.sqrt(); k_star];
            let beta = m as f64 / k_star as f64;
            let de = sum_rate_de(&zf_sinr_general(&model.theta, &gain_slice, &tau, rho, beta)?.gamma);
            let stats = run_trials(&model, None, snr_index, scale.trials(), seed)?;
            file.push(format!("{snr_db},{k_star},{},{},{de}", stats.mean, stats.std));
        }
        written.push(file.write()?);
    }
    Ok(written)
}

fn training_fraction(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut file = CurveFile::new(
        out_dir,
        "fig8_training_fraction.csv",
        &[
            "optimal training fraction T_t*/T vs downlink SNR; rho_ul = 0.1 rho_dl",
            "M = 32, K = 16; the fraction saturates at K/T",
        ],
        "rho_dl_db,zf_t100,zf_t1000,orzf_t100,orzf_t1000",
    );
    for db in (-10..=40).step_by(2) {
        let rho_dl = 10f64.powf(db as f64 / 10.0);
        let mut cols = vec![format!("{db}")];
        for scheme in [TddScheme::Zf, TddScheme::Orzf] {
            for t in [100.0, 1000.0] {
                let cfg = TddConfig::new(t, 16, 32, 0.1, 1.0, scheme)?;
                let opt = optimal_training_length(&cfg, rho_dl)?;
                cols.push(format!("{}", opt.t_t / t));
            }
        }
        file.push(cols.join(","));
    }
    Ok(vec![file.write()?])
}

fn joint_training(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for t in [100.0, 1000.0] {
        let mut file = CurveFile::new(
            out_dir,
            &format!("fig9_joint_t{}.csv", t as u64),
            &[
                "normalized ZF sum rate with MMSE-trained CSIT; rho_ul = 0.1 rho_dl, M = 32",
                "fixed: K = 16 with optimal training; joint: alternating (T_t, K) optimum",
            ],
            "rho_dl_db,rate_fixed_k16,rate_joint,k_joint,tt_joint",
        );
        for db in (-10..=40).step_by(2) {
            let rho_dl = 10f64.powf(db as f64 / 10.0);
            let cfg = TddConfig::new(t, 16, 32, 0.1, 1.0, TddScheme::Zf)?;
            let fixed = optimal_training_length(&cfg, rho_dl)?;
            let joint = joint_training_user_opt(&cfg, rho_dl)?;
            file.push(format!(
                "{db},{},{},{},{}",
                fixed.rate, joint.rate, joint.k, joint.t_t
            ));
        }
        written.push(file.write()?);
    }
    Ok(written)
}

/// Emits a matplotlib script that reads the CSVs just written and draws the
/// figure with error bars where Monte-Carlo columns exist.
fn write_plot_script(name: FigureName, out_dir: &Path, csvs: &[PathBuf]) -> Result<PathBuf> {
    let path = out_dir.join(format!("plot_{name}.py"));
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "#!/usr/bin/env python3")?;
    writeln!(out, "\"\"\"Draw {name} from its curve CSVs.\"\"\"")?;
    writeln!(out, "import csv")?;
    writeln!(out, "import os.path")?;
    writeln!(out, "import matplotlib.pyplot as plt")?;
    writeln!(out)?;
    writeln!(out, "HERE = os.path.dirname(os.path.abspath(__file__))")?;
    writeln!(out)?;
    writeln!(out, "def load(name):")?;
    writeln!(out, "    cols = {{}}")?;
    writeln!(out, "    with open(os.path.join(HERE, name)) as fh:")?;
    writeln!(
        out,
        "        rows = [r for r in csv.reader(fh) if r and not r[0].startswith('#')]"
    )?;
    writeln!(out, "    header, body = rows[0], rows[1:]")?;
    writeln!(out, "    for i, key in enumerate(header):")?;
    writeln!(
        out,
        "        cols[key] = [float(r[i]) if r[i] else None for r in body]"
    )?;
    writeln!(out, "    return cols")?;
    writeln!(out)?;
    writeln!(out, "fig, ax = plt.subplots(figsize=(7, 5))")?;
    for csv_path in csvs {
        let file = csv_path.file_name().unwrap().to_string_lossy();
        let label = file.trim_end_matches(".csv");
        writeln!(out, "cols = load({file:?})")?;
        writeln!(out, "x = cols[list(cols)[0]]")?;
        writeln!(out, "if 'mc_mean_sum_rate' in cols:")?;
        writeln!(
            out,
            "    ax.errorbar(x, cols['mc_mean_sum_rate'], yerr=cols['mc_std_sum_rate'], \
             fmt='o', capsize=3, label={label:?} + ' (MC)')"
        )?;
        writeln!(out, "    de = cols.get('de_sum_rate')")?;
        writeln!(out, "    if de and all(v is not None for v in de):")?;
        writeln!(out, "        ax.plot(x, de, '-', label={label:?} + ' (DE)')")?;
        writeln!(out, "else:")?;
        writeln!(out, "    for key in list(cols)[1:]:")?;
        writeln!(
            out,
            "        ax.plot(x, cols[key], '-o', label={label:?} + ':' + key)"
        )?;
    }
    writeln!(out, "ax.set_xlabel('SNR [dB]')")?;
    writeln!(out, "ax.set_ylabel('sum rate [bits/s/Hz]')")?;
    writeln!(out, "ax.grid(True, alpha=0.3)")?;
    writeln!(out, "ax.legend(fontsize=7)")?;
    writeln!(out, "fig.tight_layout()")?;
    writeln!(out, "fig.savefig(os.path.join(HERE, '{name}.png'), dpi=150)")?;
    writeln!(out, "print('wrote {name}.png')")?;
    Ok(path)
}
