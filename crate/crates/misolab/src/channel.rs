//! System configuration and random channel/CSIT sampling.
//!
//! The channel follows a Kronecker model `H = L^{1/2} X Theta^{1/2}` with
//! i.i.d. variance-`1/M` entries in `X`, a common transmit correlation
//! `Theta` (identity or Jakes/UCA) and per-user gains `L` (equal or drawn
//! from a COST231 disk). The transmitter sees `H_hat`, a per-user convex
//! mix of the true short-term fading and an independent error matrix with
//! mixing weight `tau_k`.
//!
//! All sampling takes an explicit RNG handle; trial substreams are derived
//! from `(seed, stream tag)` counters so that results never depend on
//! execution order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Transmit-correlation model selector.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationSpec {
    /// Uncorrelated antennas, `Theta = I`.
    Identity,
    /// Uniform circular array under Jakes' model with adjacent-antenna
    /// spacing `d_over_lambda` wavelengths.
    JakesUca { d_over_lambda: f64 },
}

/// User gain (inverse path loss) model selector.
#[derive(Debug, Clone, PartialEq)]
pub enum PathLossSpec {
    /// Homogeneous network, all gains one.
    Equal,
    /// Users dropped uniformly over a disk of radius `cell_radius_m`, no
    /// closer than `min_distance_m`, with COST231 Hata path loss and the
    /// gains renormalized to unit empirical mean.
    Cost231Disk {
        cell_radius_m: f64,
        min_distance_m: f64,
    },
}

/// How the per-user CSIT distortion `tau^2` is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum TauModel {
    /// Fixed distortion, identical for every user.
    Fixed { tau2: f64 },
    /// Random vector quantization with `bits` feedback bits per user.
    Rvq { bits: u32 },
    /// MMSE uplink training over `t_t` pilot symbols at SNR `rho_ul`.
    Training { t_t: f64, rho_ul: f64 },
}

impl TauModel {
    /// Resolves the model to a scalar `tau^2` for an `M`-antenna system.
    pub fn tau2(&self, m: usize) -> Result<f64> {
        match *self {
            TauModel::Fixed { tau2 } => {
                if !(0.0..=1.0).contains(&tau2) {
                    return Err(Error::InvalidInput(format!(
                        "tau2 must lie in [0, 1], got {tau2}"
                    )));
                }
                Ok(tau2)
            }
            TauModel::Rvq { bits } => rvq_distortion(bits, m),
            TauModel::Training { t_t, rho_ul } => Ok(mmse_training_distortion(t_t, rho_ul)),
        }
    }
}

/// Complete description of one simulated system operating point.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    /// Transmit antennas.
    pub m: usize,
    /// Users.
    pub k: usize,
    /// Downlink SNR `rho = P / sigma^2` in dB.
    pub snr_db: f64,
    /// Total transmit power.
    pub power: f64,
    /// Noise variance, consistent with `snr_db` by construction.
    pub sigma2: f64,
    /// Per-user distortion `tau_k` (amplitude, in `[0, 1]`).
    pub tau: DVector<f64>,
    pub correlation: CorrelationSpec,
    pub pathloss: PathLossSpec,
}

impl SystemConfig {
    /// Builds a config with equal per-user distortion `tau` and the noise
    /// variance derived from the SNR.
    pub fn new(
        m: usize,
        k: usize,
        snr_db: f64,
        power: f64,
        tau: f64,
        correlation: CorrelationSpec,
        pathloss: PathLossSpec,
    ) -> Result<Self> {
        Self::with_tau_vector(
            m,
            k,
            snr_db,
            power,
            DVector::from_element(k, tau),
            correlation,
            pathloss,
        )
    }

    pub fn with_tau_vector(
        m: usize,
        k: usize,
        snr_db: f64,
        power: f64,
        tau: DVector<f64>,
        correlation: CorrelationSpec,
        pathloss: PathLossSpec,
    ) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::InvalidInput("M and K must be at least 1".into()));
        }
        if !(power > 0.0) {
            return Err(Error::InvalidInput("power must be positive".into()));
        }
        if tau.len() != k {
            return Err(Error::InvalidInput(format!(
                "tau has {} entries for {k} users",
                tau.len()
            )));
        }
        if tau.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(Error::InvalidInput("every tau_k must lie in [0, 1]".into()));
        }
        if let CorrelationSpec::JakesUca { d_over_lambda } = correlation {
            if !(d_over_lambda > 0.0) {
                return Err(Error::InvalidInput("d_over_lambda must be positive".into()));
            }
        }
        if let PathLossSpec::Cost231Disk {
            cell_radius_m,
            min_distance_m,
        } = pathloss
        {
            if !(cell_radius_m > min_distance_m && min_distance_m > 0.0) {
                return Err(Error::InvalidInput(
                    "cost231 requires cell_radius_m > min_distance_m > 0".into(),
                ));
            }
        }
        let rho = 10f64.powf(snr_db / 10.0);
        let sigma2 = power / rho;
        Ok(SystemConfig {
            m,
            k,
            snr_db,
            power,
            sigma2,
            tau,
            correlation,
            pathloss,
        })
    }

    /// Aspect ratio `beta = M/K`, kept as the exact floating-point quotient.
    pub fn beta(&self) -> f64 {
        self.m as f64 / self.k as f64
    }

    /// SNR as a linear power ratio.
    pub fn rho(&self) -> f64 {
        self.power / self.sigma2
    }

    /// Realizes the slowly-varying part of the model: the correlation matrix
    /// and one draw of the user gains. Fading stays random per call to
    /// [`ChannelModel::sample`].
    pub fn resolve(&self, rng: &mut impl Rng) -> ChannelModel {
        let theta = match self.correlation {
            CorrelationSpec::Identity => Correlation::identity(self.m),
            CorrelationSpec::JakesUca { d_over_lambda } => {
                Correlation::jakes_uca(self.m, d_over_lambda)
            }
        };
        let gains = draw_pathloss_gains(self.k, &self.pathloss, rng);
        ChannelModel {
            config: self.clone(),
            theta,
            gains,
        }
    }
}

/// Transmit correlation matrix with its spectral data cached.
#[derive(Debug, Clone)]
pub struct Correlation {
    matrix: DMatrix<f64>,
    sqrt: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    is_identity: bool,
}

impl Correlation {
    pub fn identity(m: usize) -> Self {
        Correlation {
            matrix: DMatrix::identity(m, m),
            sqrt: DMatrix::identity(m, m),
            eigenvalues: DVector::from_element(m, 1.0),
            is_identity: true,
        }
    }

    /// Wraps an explicit symmetric nonnegative-definite matrix, clipping
    /// eigenvalues below `1e-10` to keep the spectrum strictly positive.
    pub fn from_matrix(theta: DMatrix<f64>) -> Self {
        assert_eq!(theta.nrows(), theta.ncols(), "Theta must be square");
        let eig = theta.clone().symmetric_eigen();
        let clipped = eig.eigenvalues.map(|l| l.max(1e-10));
        let needs_clip = eig.eigenvalues.iter().any(|&l| l < 1e-10);
        let v = &eig.eigenvectors;
        let rebuild = |vals: &DVector<f64>| {
            let a = v * DMatrix::from_diagonal(vals) * v.transpose();
            // Re-symmetrize against rounding.
            let at = a.transpose();
            (a + at) * 0.5
        };
        let matrix = if needs_clip { rebuild(&clipped) } else { theta };
        let sqrt = rebuild(&clipped.map(f64::sqrt));
        Correlation {
            matrix,
            sqrt,
            eigenvalues: clipped,
            is_identity: false,
        }
    }

    /// Jakes/UCA correlation: `Theta_ij = J0(2 pi d_ij / lambda)` on a
    /// uniform circular array whose radius scales so the adjacent-antenna
    /// spacing stays `d_over_lambda` wavelengths.
    pub fn jakes_uca(m: usize, d_over_lambda: f64) -> Self {
        Self::from_matrix(jakes_uca_correlation(m, d_over_lambda))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn sqrt(&self) -> &DMatrix<f64> {
        &self.sqrt
    }

    /// Eigenvalues after clipping; the deterministic equivalents consume
    /// only this spectrum.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_identity(&self) -> bool {
        self.is_identity
    }
}

/// Raw Jakes/UCA matrix before any eigenvalue clipping.
pub fn jakes_uca_correlation(m: usize, d_over_lambda: f64) -> DMatrix<f64> {
    assert!(m >= 1, "M must be at least 1");
    assert!(d_over_lambda > 0.0, "antenna spacing must be positive");
    if m == 1 {
        return DMatrix::identity(1, 1);
    }
    let sin_base = (std::f64::consts::PI / m as f64).sin();
    DMatrix::from_fn(m, m, |i, j| {
        let diff = (i as isize - j as isize).unsigned_abs();
        // d_ij/lambda = 2 r sin(pi |i-j| / M) with r = d / (2 sin(pi/M)).
        let dist = d_over_lambda * (std::f64::consts::PI * diff as f64 / m as f64).sin() / sin_base;
        libm::j0(2.0 * std::f64::consts::PI * dist)
    })
}

/// Draws one vector of user channel gains.
///
/// For the COST231 disk, users are dropped area-uniformly on the annulus
/// between the minimum distance and the cell radius,
/// `l_k = -(31.5 + 35 log10 d_k)` dB is converted to linear scale, the
/// vector is renormalized to unit empirical mean and sorted ascending.
pub fn draw_pathloss_gains(k: usize, spec: &PathLossSpec, rng: &mut impl Rng) -> DVector<f64> {
    match *spec {
        PathLossSpec::Equal => DVector::from_element(k, 1.0),
        PathLossSpec::Cost231Disk {
            cell_radius_m,
            min_distance_m,
        } => {
            let r2_min = min_distance_m * min_distance_m;
            let r2_max = cell_radius_m * cell_radius_m;
            let mut gains = DVector::from_fn(k, |_, _| {
                let u: f64 = rng.gen();
                let d = (r2_min + u * (r2_max - r2_min)).sqrt();
                let db = -(31.5 + 35.0 * d.log10());
                10f64.powf(db / 10.0)
            });
            let mean = gains.sum() / k as f64;
            gains /= mean;
            let mut v: Vec<f64> = gains.iter().cloned().collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            DVector::from_vec(v)
        }
    }
}

/// Bits-to-distortion map for random vector quantization:
/// `tau^2 = 2^{-B/(M-1)}`.
pub fn rvq_distortion(bits: u32, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(
            "RVQ distortion needs at least two antennas".into(),
        ));
    }
    Ok(2f64.powf(-(bits as f64) / (m as f64 - 1.0)))
}

/// Residual distortion of MMSE channel estimation from `t_t` orthogonal
/// pilots at uplink SNR `rho_ul`: `tau^2 = 1 / (1 + t_t rho_ul)`.
pub fn mmse_training_distortion(t_t: f64, rho_ul: f64) -> f64 {
    assert!(t_t >= 0.0 && rho_ul >= 0.0);
    1.0 / (1.0 + t_t * rho_ul)
}

/// A [`SystemConfig`] with correlation and gains realized; what the
/// Monte-Carlo loop holds fixed across fading draws.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub config: SystemConfig,
    pub theta: Correlation,
    pub gains: DVector<f64>,
}

/// One fading draw: short-term matrices and the assembled channels.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// True short-term fading, i.i.d. variance-`1/M` entries.
    pub x: DMatrix<Complex64>,
    /// Estimation-error draw, same law as `x`, independent of it.
    pub q: DMatrix<Complex64>,
    /// True channel `L^{1/2} X Theta^{1/2}`.
    pub h: DMatrix<Complex64>,
    /// Estimated channel available at the transmitter.
    pub h_hat: DMatrix<Complex64>,
}

impl ChannelModel {
    /// Draws `X`, `Q` circular complex Gaussian and assembles `H`, `H_hat`.
    /// A user with `tau_k = 0` gets a bitwise-identical estimated row.
    pub fn sample(&self, rng: &mut impl Rng) -> ChannelRealization {
        let (k, m) = (self.config.k, self.config.m);
        let x = gaussian_matrix(k, m, rng);
        let q = gaussian_matrix(k, m, rng);

        let mut x_hat = x.clone();
        for (row, &tau) in self.config.tau.iter().enumerate() {
            if tau == 0.0 {
                continue;
            }
            let w = (1.0 - tau * tau).sqrt();
            for col in 0..m {
                x_hat[(row, col)] = w * x[(row, col)] + tau * q[(row, col)];
            }
        }

        let h = self.colour(&x);
        let h_hat = if self.config.tau.iter().all(|&t| t == 0.0) {
            h.clone()
        } else {
            self.colour(&x_hat)
        };
        ChannelRealization { x, q, h, h_hat }
    }

    /// `L^{1/2} A Theta^{1/2}` for a short-term matrix `A`.
    fn colour(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = if self.theta.is_identity() {
            a.clone()
        } else {
            let sqrt = self.theta.sqrt();
            a * sqrt.map(|v| Complex64::new(v, 0.0))
        };
        for (row, &g) in self.gains.iter().enumerate() {
            if g != 1.0 {
                let s = g.sqrt();
                for col in 0..out.ncols() {
                    out[(row, col)] *= s;
                }
            }
        }
        out
    }
}

fn gaussian_matrix(k: usize, m: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let scale = 1.0 / (2.0 * m as f64).sqrt();
    DMatrix::from_fn(k, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

/// Stream tags for deriving independent substreams from one master seed.
#[derive(Debug, Clone, Copy)]
pub enum StreamTag {
    /// Fading draw for `(snr index, trial index)`.
    Trial { snr_index: usize, trial: usize },
    /// The once-per-experiment path-loss draw.
    PathLoss,
    /// Gain samples used by the user-count optimizer.
    GainSamples,
}

/// Counter-based substream: the same `(seed, tag)` always yields the same
/// generator, independent of how many other streams were consumed.
pub fn substream(seed: u64, tag: StreamTag) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = match tag {
        // Trials use streams below 2^62; the named streams sit at the top.
        StreamTag::Trial { snr_index, trial } => {
            ((snr_index as u64) << 40) | (trial as u64 & 0xff_ffff_ffff)
        }
        StreamTag::PathLoss => (1 << 62) | 1,
        StreamTag::GainSamples => (1 << 62) | 2,
    };
    rng.set_stream(stream);
    rng
}
