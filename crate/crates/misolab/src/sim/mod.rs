//! Monte-Carlo experiment runner: seeded parallel trials, statistical
//! comparison of the deterministic equivalents against exact per-realization
//! sum rates, CSV persistence, config-file execution and figure presets.
//!
//! Every trial draws its fading from a counter-based substream of
//! `(seed, snr index, trial index)`, and trial results are reduced in index
//! order, so records are bitwise-identical regardless of the worker count.
//! `SIMLAB_THREADS` overrides the pool size.

pub mod config;
pub mod figures;

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::channel::{
    substream, ChannelModel, CorrelationSpec, PathLossSpec, StreamTag, SystemConfig, TauModel,
};
use crate::det_equiv::{rzf_sinr_general, sum_rate_de, zf_sinr_general};
use crate::error::{Error, Result};
use crate::optimize::orzf_de_sum_rate;
use crate::precoding::{precode_and_evaluate, PrecoderKind};

pub use config::run_config;
pub use figures::{reproduce_figure, FigureName, Scale};

/// Attempts to redraw a trial whose estimated channel came out singular
/// before giving up.
const MAX_RESAMPLES: u32 = 10;

/// One experiment: a system, a precoder, an SNR grid and a trial budget.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub m: usize,
    pub k: usize,
    pub snr_grid_db: Vec<f64>,
    pub power: f64,
    pub tau_model: TauModel,
    pub correlation: CorrelationSpec,
    pub pathloss: PathLossSpec,
    pub precoder: PrecoderKind,
    pub trials: usize,
    pub seed: u64,
    /// CSV destination used by the config runner; the library entry point
    /// itself performs no IO.
    pub csv: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidInput("snr grid must be nonempty".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "snr grid must be strictly increasing".into(),
            ));
        }
        if self.precoder == PrecoderKind::Zf && self.k >= self.m {
            return Err(Error::InvalidInput(format!(
                "zf experiments need K < M for the deterministic equivalent, got K={} M={}",
                self.k, self.m
            )));
        }
        self.tau_model.tau2(self.m)?;
        // Build one config to run the full channel validation.
        let tau2 = self.tau_model.tau2(self.m)?;
        SystemConfig::new(
            self.m,
            self.k,
            self.snr_grid_db[0],
            self.power,
            tau2.sqrt(),
            self.correlation.clone(),
            self.pathloss.clone(),
        )?;
        Ok(())
    }
}

/// One `(config, SNR point)` row of an experiment.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub snr_db: f64,
    pub m: usize,
    pub k: usize,
    pub precoder: String,
    pub tau2: f64,
    pub mc_mean_sum_rate: f64,
    pub mc_std_sum_rate: f64,
    pub de_sum_rate: f64,
    pub trials: usize,
    pub seed: u64,
    /// Trials that had to be redrawn because of a singular channel.
    pub resampled: u64,
}

/// Mean, sample standard deviation and resample count of one MC sweep.
#[derive(Debug, Clone, Copy)]
pub struct TrialStats {
    pub mean: f64,
    pub std: f64,
    pub resampled: u64,
}

/// Runs `trials` independent fading draws of `model` under the precoder
/// with resolved ridge `alpha` (`None` = ZF) and returns sum-rate
/// statistics. Deterministic for fixed `(seed, snr_index)`.
pub fn run_trials(
    model: &ChannelModel,
    alpha: Option<f64>,
    snr_index: usize,
    trials: usize,
    seed: u64,
) -> Result<TrialStats> {
    let power = model.config.power;
    let sigma2 = model.config.sigma2;
    let outcomes: Vec<Result<(f64, u64)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream(seed, StreamTag::Trial { snr_index, trial });
            let mut resampled = 0u64;
            loop {
                let real = model.sample(&mut rng);
                match precode_and_evaluate(&real.h, &real.h_hat, alpha, power, sigma2) {
                    Ok(r) => return Ok((r.sum_rate, resampled)),
                    Err(Error::SingularChannel { .. }) if resampled < MAX_RESAMPLES as u64 => {
                        resampled += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();

    let mut rates = Vec::with_capacity(trials);
    let mut resampled = 0;
    for outcome in outcomes {
        let (rate, re) = outcome?;
        rates.push(rate);
        resampled += re;
    }
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let std = if rates.len() > 1 {
        (rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(TrialStats {
        mean,
        std,
        resampled,
    })
}

/// Full experiment: for every SNR point, resolve the precoder ridge from the
/// channel statistics, compute the deterministic-equivalent sum rate, run
/// the Monte-Carlo trials and collect one record.
///
/// Thread count comes from `SIMLAB_THREADS` when set.
pub fn monte_carlo_sum_rate(spec: &ExperimentSpec) -> Result<Vec<ExperimentRecord>> {
    match env_threads() {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            pool.install(|| monte_carlo_serial(spec))
        }
        None => monte_carlo_serial(spec),
    }
}

/// As [`monte_carlo_sum_rate`] with an explicit worker count (testing hook
/// for the parallel-determinism guarantee).
pub fn monte_carlo_with_threads(
    spec: &ExperimentSpec,
    threads: usize,
) -> Result<Vec<ExperimentRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| monte_carlo_serial(spec))
}

fn env_threads() -> Option<usize> {
    std::env::var("SIMLAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
}

fn monte_carlo_serial(spec: &ExperimentSpec) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let tau2 = spec.tau_model.tau2(spec.m)?;
    let tau = tau2.sqrt();
    let beta = spec.m as f64 / spec.k as f64;

    // Correlation and user gains are realized once per experiment and held
    // fixed across the SNR sweep and all fading draws.
    let mut pathloss_rng = substream(spec.seed, StreamTag::PathLoss);
    let base = SystemConfig::new(
        spec.m,
        spec.k,
        spec.snr_grid_db[0],
        spec.power,
        tau,
        spec.correlation.clone(),
        spec.pathloss.clone(),
    )?;
    let resolved = base.resolve(&mut pathloss_rng);
    let theta = resolved.theta;
    let gains = resolved.gains;
    let gain_slice: Vec<f64> = gains.iter().cloned().collect();
    let tau_slice = vec![tau; spec.k];

    let mut records = Vec::with_capacity(spec.snr_grid_db.len());
    for (snr_index, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let cfg = SystemConfig::new(
            spec.m,
            spec.k,
            snr_db,
            spec.power,
            tau,
            spec.correlation.clone(),
            spec.pathloss.clone(),
        )?;
        let rho = cfg.rho();
        let (alpha, de_sum_rate) = match spec.precoder {
            PrecoderKind::Zf => {
                let de = zf_sinr_general(&theta, &gain_slice, &tau_slice, rho, beta)?;
                (None, sum_rate_de(&de.gamma))
            }
            PrecoderKind::Orzf => {
                let (a, rate, _) = orzf_de_sum_rate(&theta, &gain_slice, &tau_slice, rho, beta)?;
                (Some(a), rate)
            }
            ref kind => {
                let a = kind
                    .closed_form_alpha(rho, tau2, beta)
                    .expect("closed-form ridge");
                let de = rzf_sinr_general(&theta, &gain_slice, &tau_slice, a, rho, beta)?;
                (Some(a), sum_rate_de(&de.gamma))
            }
        };
        let model = ChannelModel {
            config: cfg,
            theta: theta.clone(),
            gains: gains.clone(),
        };
        let stats = run_trials(&model, alpha, snr_index, spec.trials, spec.seed)?;
        records.push(ExperimentRecord {
            snr_db,
            m: spec.m,
            k: spec.k,
            precoder: spec.precoder.tag(),
            tau2,
            mc_mean_sum_rate: stats.mean,
            mc_std_sum_rate: stats.std,
            de_sum_rate,
            trials: spec.trials,
            seed: spec.seed,
            resampled: stats.resampled,
        });
    }
    Ok(records)
}

/// CSV header shared by every experiment output.
pub const CSV_HEADER: &str =
    "snr_db,M,K,precoder,tau2,mc_mean_sum_rate,mc_std_sum_rate,de_sum_rate,trials,seed";

/// Writes records in the stable experiment schema.
pub fn write_csv(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.snr_db,
            r.m,
            r.k,
            r.precoder,
            r.tau2,
            r.mc_mean_sum_rate,
            r.mc_std_sum_rate,
            r.de_sum_rate,
            r.trials,
            r.seed
        )?;
    }
    Ok(())
}

/// Prints a human-readable summary table of experiment records.
pub fn print_summary(records: &[ExperimentRecord]) {
    println!(
        "{:>8} {:>4} {:>4} {:>10} {:>8} {:>12} {:>10} {:>12} {:>7}",
        "snr_db", "M", "K", "precoder", "tau2", "mc_mean", "mc_std", "de", "trials"
    );
    for r in records {
        println!(
            "{:>8.2} {:>4} {:>4} {:>10} {:>8.4} {:>12.4} {:>10.4} {:>12.4} {:>7}{}",
            r.snr_db,
            r.m,
            r.k,
            r.precoder,
            r.tau2,
            r.mc_mean_sum_rate,
            r.mc_std_sum_rate,
            r.de_sum_rate,
            r.trials,
            if r.resampled > 0 {
                format!("  ({} resampled)", r.resampled)
            } else {
                String::new()
            }
        );
    }
}
