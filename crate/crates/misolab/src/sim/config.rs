//! Config-file front end for the experiment runner.
//!
//! The format is TOML with colon-separated model selectors, for example:
//!
//! ```toml
//! [system]
//! m = 32
//! k = 16
//! snr_db = [0.0, 5.0, 10.0]
//! power = 1.0                 # optional, defaults to 1
//! tau = "fixed:0.1"           # fixed:<tau2> | rvq:<bits> | training:<T_t>,<rho_ul>
//!
//! [correlation]               # optional, defaults to identity
//! model = "jakes_uca:0.5"     # identity | jakes_uca:<d_over_lambda>
//!
//! [pathloss]                  # optional, defaults to equal
//! model = "cost231:500,35"    # equal | cost231:<cell_radius_m>,<min_distance_m>
//!
//! [precoder]
//! kind = "zf"                 # zf | rzf:<alpha> | rzf_cdu | orzf | mmse
//!
//! [mc]
//! trials = 1000
//! seed = 42
//!
//! [output]
//! csv = "records.csv"
//! ```
//!
//! Validation failures name the offending field path.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::channel::{CorrelationSpec, PathLossSpec, TauModel};
use crate::error::{Error, Result};
use crate::precoding::PrecoderKind;

use super::{monte_carlo_sum_rate, print_summary, write_csv, ExperimentRecord, ExperimentSpec};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: RawSystem,
    correlation: Option<RawModel>,
    pathloss: Option<RawModel>,
    precoder: RawPrecoder,
    mc: RawMc,
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    m: usize,
    k: usize,
    snr_db: Vec<f64>,
    power: Option<f64>,
    tau: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    model: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrecoder {
    kind: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    trials: usize,
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    csv: PathBuf,
}

/// Splits `name:args` into the selector name and its argument list.
fn selector(value: &str) -> (&str, Vec<&str>) {
    match value.split_once(':') {
        Some((name, rest)) => (name.trim(), rest.split(',').map(str::trim).collect()),
        None => (value.trim(), Vec::new()),
    }
}

fn parse_f64(field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| Error::config(field, format!("expected a number, got `{raw}`")))
}

fn parse_tau(field: &str, raw: &str) -> Result<TauModel> {
    let (name, args) = selector(raw);
    match (name, args.as_slice()) {
        ("fixed", [t2]) => {
            let tau2 = parse_f64(field, t2)?;
            if !(0.0..=1.0).contains(&tau2) {
                return Err(Error::config(field, format!("tau2 = {tau2} outside [0, 1]")));
            }
            Ok(TauModel::Fixed { tau2 })
        }
        ("rvq", [bits]) => {
            let bits = bits
                .parse::<u32>()
                .map_err(|_| Error::config(field, format!("expected bits, got `{bits}`")))?;
            if bits == 0 {
                return Err(Error::config(field, "rvq needs at least one bit"));
            }
            Ok(TauModel::Rvq { bits })
        }
        ("training", [t_t, rho_ul]) => {
            let t_t = parse_f64(field, t_t)?;
            let rho_ul = parse_f64(field, rho_ul)?;
            if t_t < 0.0 || rho_ul < 0.0 {
                return Err(Error::config(field, "training arguments must be nonnegative"));
            }
            Ok(TauModel::Training { t_t, rho_ul })
        }
        _ => Err(Error::config(
            field,
            format!("expected fixed:<tau2>, rvq:<bits> or training:<T_t>,<rho_ul>, got `{raw}`"),
        )),
    }
}

fn parse_correlation(field: &str, raw: &str) -> Result<CorrelationSpec> {
    let (name, args) = selector(raw);
    match (name, args.as_slice()) {
        ("identity", []) => Ok(CorrelationSpec::Identity),
        ("jakes_uca", [dol]) => {
            let d_over_lambda = parse_f64(field, dol)?;
            if !(d_over_lambda > 0.0) {
                return Err(Error::config(field, "antenna spacing must be positive"));
            }
            Ok(CorrelationSpec::JakesUca { d_over_lambda })
        }
        _ => Err(Error::config(
            field,
            format!("expected identity or jakes_uca:<d_over_lambda>, got `{raw}`"),
        )),
    }
}

fn parse_pathloss(field: &str, raw: &str) -> Result<PathLossSpec> {
    let (name, args) = selector(raw);
    match (name, args.as_slice()) {
        ("equal", []) => Ok(PathLossSpec::Equal),
        ("cost231", [rc, mind]) => {
            let cell_radius_m = parse_f64(field, rc)?;
            let min_distance_m = parse_f64(field, mind)?;
            if !(cell_radius_m > min_distance_m && min_distance_m > 0.0) {
                return Err(Error::config(
                    field,
                    "cost231 needs cell_radius_m > min_distance_m > 0",
                ));
            }
            Ok(PathLossSpec::Cost231Disk {
                cell_radius_m,
                min_distance_m,
            })
        }
        _ => Err(Error::config(
            field,
            format!("expected equal or cost231:<cell_radius_m>,<min_distance_m>, got `{raw}`"),
        )),
    }
}

fn parse_precoder(field: &str, raw: &str) -> Result<PrecoderKind> {
    let (name, args) = selector(raw);
    match (name, args.as_slice()) {
        ("zf", []) => Ok(PrecoderKind::Zf),
        ("rzf", [alpha]) => {
            let alpha = parse_f64(field, alpha)?;
            if !(alpha > 0.0) {
                return Err(Error::config(field, "rzf ridge must be positive"));
            }
            Ok(PrecoderKind::Rzf { alpha })
        }
        ("rzf_cdu", []) => Ok(PrecoderKind::RzfCdu),
        ("orzf", []) => Ok(PrecoderKind::Orzf),
        ("mmse", []) => Ok(PrecoderKind::MmseFilter),
        _ => Err(Error::config(
            field,
            format!("expected zf, rzf:<alpha>, rzf_cdu, orzf or mmse, got `{raw}`"),
        )),
    }
}

/// Parses and validates a config file into an executable spec.
pub fn load_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    let raw: RawConfig = toml::from_str(&text)
        .map_err(|e| Error::config("<file>", format!("parse error: {e}")))?;

    if raw.system.m == 0 {
        return Err(Error::config("system.m", "M must be at least 1"));
    }
    if raw.system.k == 0 {
        return Err(Error::config("system.k", "K must be at least 1"));
    }
    if raw.system.snr_db.is_empty() {
        return Err(Error::config("system.snr_db", "need at least one SNR point"));
    }
    if raw.system.snr_db.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config(
            "system.snr_db",
            "SNR grid must be strictly increasing",
        ));
    }
    let power = raw.system.power.unwrap_or(1.0);
    if !(power > 0.0) {
        return Err(Error::config("system.power", "power must be positive"));
    }
    let tau_model = parse_tau("system.tau", &raw.system.tau)?;
    if let TauModel::Rvq { .. } = tau_model {
        if raw.system.m < 2 {
            return Err(Error::config("system.tau", "rvq needs M >= 2"));
        }
    }
    let correlation = match &raw.correlation {
        Some(c) => parse_correlation("correlation.model", &c.model)?,
        None => CorrelationSpec::Identity,
    };
    let pathloss = match &raw.pathloss {
        Some(p) => parse_pathloss("pathloss.model", &p.model)?,
        None => PathLossSpec::Equal,
    };
    let precoder = parse_precoder("precoder.kind", &raw.precoder.kind)?;
    if precoder == PrecoderKind::Zf && raw.system.k > raw.system.m {
        return Err(Error::config(
            "precoder.kind",
            format!(
                "zf needs K <= M, got K={} M={}",
                raw.system.k, raw.system.m
            ),
        ));
    }
    if precoder == PrecoderKind::Zf && raw.system.k == raw.system.m {
        return Err(Error::config(
            "precoder.kind",
            "zf needs K < M for its deterministic equivalent",
        ));
    }
    if raw.mc.trials == 0 {
        return Err(Error::config("mc.trials", "need at least one trial"));
    }

    let spec = ExperimentSpec {
        m: raw.system.m,
        k: raw.system.k,
        snr_grid_db: raw.system.snr_db,
        power,
        tau_model,
        correlation,
        pathloss,
        precoder,
        trials: raw.mc.trials,
        seed: raw.mc.seed,
        csv: Some(raw.output.csv),
    };
    spec.validate()?;
    Ok(spec)
}

/// Executes the experiment described by a config file, writes its CSV and
/// prints a summary table. Returns the records.
pub fn run_config(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let spec = load_config(path)?;
    let records = monte_carlo_sum_rate(&spec)?;
    let csv = spec.csv.as_ref().expect("config always sets a csv path");
    write_csv(csv, &records)?;
    print_summary(&records);
    println!("wrote {}", csv.display());
    Ok(records)
}
