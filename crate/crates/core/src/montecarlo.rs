//! Monte Carlo counting oracle for the shot-noise SNR.
//!
//! Each trial integrates the channel current over a window `T = 1/(2Δf)`.
//! With the charge absent the channel is open and the collected count is
//! Poisson with mean `λ = I·T/e`; with the charge present the channel is
//! pinched off and collects nothing. Both states pick up a Gaussian Johnson
//! charge of standard deviation `sqrt(4·k_B·T·G·Δf)·T/e`. For this window
//! `sqrt(λ) = sqrt(I/(2eΔf))`, so the empirical mean/stddev of the open
//! count estimates the analytic shot-noise SNR directly.
//!
//! Trial `i` draws from ChaCha8 stream `i` under the user seed, so results
//! do not depend on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::devices::{self, DeviceKind, DeviceOptions, DeviceSpec};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::noise::{self, OperatingPoint};
use crate::units::CONSTANTS;

/// Identity of the random stream layout, echoed in every outcome.
pub const GENERATOR: &str =
    "ChaCha8Rng(rand_chacha 0.9) seed_from_u64(seed) stream=trial; rand_distr 0.5 Poisson+StandardNormal";

/// Above this mean count the open state is sampled as a Gaussian.
pub const POISSON_LAMBDA_LIMIT: f64 = 1e7;

/// Mean count below which amplitude SNR and error rate part ways.
pub const MIN_GAUSSIAN_LAMBDA: f64 = 10.0;

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Open-state current (A).
    pub current: f64,
    /// Temperature (K).
    pub temperature: f64,
    /// Channel conductance for Johnson noise (S).
    pub conductance: f64,
    /// Bandwidth (Hz); the window is 1/(2Δf).
    pub bandwidth: f64,
    pub trials: u64,
    pub seed: u64,
    /// Decide "open" iff measured charge ≥ threshold (electrons).
    pub threshold: f64,
    /// Shot-noise Fano factor. Anything but 1 forces Gaussian sampling.
    pub fano: f64,
}

impl SimConfig {
    pub fn new(current: f64, bandwidth: f64, trials: u64, seed: u64) -> Self {
        Self {
            current,
            temperature: 0.0,
            conductance: 0.0,
            bandwidth,
            trials,
            seed,
            threshold: 0.5,
            fano: 1.0,
        }
    }

    /// Config whose open-state mean count is exactly `lambda`.
    pub fn for_mean_count(lambda: f64, bandwidth: f64, trials: u64, seed: u64) -> Self {
        Self::new(2.0 * lambda * CONSTANTS.e * bandwidth, bandwidth, trials, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials", 0.0, "at least one trial is required"));
        }
        require_positive("bandwidth", self.bandwidth)?;
        require_non_negative("current", self.current)?;
        require_non_negative("temperature", self.temperature)?;
        require_non_negative("conductance", self.conductance)?;
        require_non_negative("threshold", self.threshold)?;
        require_positive("fano", self.fano)?;
        Ok(())
    }

    /// Integration window (s).
    pub fn window(&self) -> f64 {
        0.5 / self.bandwidth
    }

    /// Mean open-state count per window.
    pub fn mean_count(&self) -> f64 {
        self.current * self.window() / CONSTANTS.e
    }

    /// Johnson charge noise per window, in electrons.
    pub fn thermal_sigma(&self) -> f64 {
        let current_rms =
            (4.0 * CONSTANTS.k_b * self.temperature * self.conductance * self.bandwidth).sqrt();
        current_rms * self.window() / CONSTANTS.e
    }

    fn operating_point(&self) -> OperatingPoint {
        OperatingPoint::from_current(self.current, self.bandwidth)
            .with_conductance(self.conductance)
            .with_temperature(self.temperature)
            .with_fano(self.fano)
    }
}

/// Measured charges (electrons), one pair per trial, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub open: Vec<f64>,
    pub blocked: Vec<f64>,
    pub gaussian_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceIntervals {
    pub empirical_snr: f64,
    pub err_open: f64,
    pub err_blocked: f64,
    pub balanced_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub trials: u64,
    /// Mean open-state count λ.
    pub mean_count: f64,
    /// Integration window (s).
    pub window: f64,
    /// Johnson charge noise (electrons).
    pub thermal_sigma: f64,
    pub sample_mean: f64,
    pub sample_std: f64,
    pub empirical_snr: f64,
    /// Delta-method standard error of the mean/stddev estimator.
    pub snr_stderr: f64,
    pub analytic_snr: f64,
    /// |empirical − analytic| ≤ 3·stderr.
    pub within_3sigma: bool,
    pub threshold: f64,
    pub err_open: f64,
    pub err_blocked: f64,
    pub balanced_err: f64,
    /// 95% half-widths.
    pub ci95: ConfidenceIntervals,
    pub gaussian_fallback: bool,
    pub seed_used: u64,
    pub generator: String,
}

fn open_distribution(cfg: &SimConfig) -> (Option<Poisson<f64>>, bool) {
    let lambda = cfg.mean_count();
    if lambda == 0.0 {
        return (None, false);
    }
    if cfg.fano != 1.0 || lambda > POISSON_LAMBDA_LIMIT {
        return (None, true);
    }
    match Poisson::new(lambda) {
        Ok(p) => (Some(p), false),
        Err(_) => (None, true),
    }
}

/// Draw every trial. Parallel over trials; output order is trial order.
pub fn sample(cfg: &SimConfig) -> Result<Samples> {
    cfg.validate()?;
    let trials = usize::try_from(cfg.trials)
        .map_err(|_| Error::domain("trials", cfg.trials as f64, "exceeds address space"))?;
    let lambda = cfg.mean_count();
    let sigma_shot = (cfg.fano * lambda).sqrt();
    let sigma_thermal = cfg.thermal_sigma();
    let (poisson, gaussian_fallback) = open_distribution(cfg);
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);

    let pairs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = base.clone();
            rng.set_stream(trial as u64);
            let count = match (&poisson, gaussian_fallback) {
                (Some(p), _) => p.sample(&mut rng),
                (None, true) => {
                    let z: f64 = rng.sample(StandardNormal);
                    lambda + sigma_shot * z
                }
                (None, false) => 0.0,
            };
            let z_open: f64 = rng.sample(StandardNormal);
            let z_blocked: f64 = rng.sample(StandardNormal);
            (count + sigma_thermal * z_open, sigma_thermal * z_blocked)
        })
        .collect();

    let (open, blocked) = pairs.into_iter().unzip();
    Ok(Samples {
        open,
        blocked,
        gaussian_fallback,
    })
}

struct Moments {
    mean: f64,
    std: f64,
    skewness: f64,
    kurtosis: f64,
}

fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let var_pop = m2 / n;
    let std = if xs.len() > 1 {
        (m2 / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let (skewness, kurtosis) = if var_pop > 0.0 {
        (m3 / n / var_pop.powf(1.5), m4 / n / (var_pop * var_pop))
    } else {
        (0.0, 3.0)
    };
    Moments {
        mean,
        std,
        skewness,
        kurtosis,
    }
}

fn binomial_ci95(p: f64, n: f64) -> f64 {
    Z95 * (p * (1.0 - p) / n).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub threshold: f64,
    pub err_open: f64,
    pub err_blocked: f64,
    pub balanced_err: f64,
}

impl Samples {
    pub fn error_rates(&self, threshold: f64) -> ErrorRates {
        let n = self.open.len() as f64;
        let missed = self.open.iter().filter(|&&q| q < threshold).count() as f64;
        let false_open = self.blocked.iter().filter(|&&q| q >= threshold).count() as f64;
        let err_open = missed / n;
        let err_blocked = false_open / n;
        ErrorRates {
            threshold,
            err_open,
            err_blocked,
            balanced_err: 0.5 * (err_open + err_blocked),
        }
    }
}

fn summarize(cfg: &SimConfig, samples: &Samples) -> Result<SimOutcome> {
    let n = samples.open.len() as f64;
    let m = moments(&samples.open);
    let (empirical_snr, snr_stderr) = if m.std > 0.0 {
        let s = m.mean / m.std;
        let var = (1.0 - s * m.skewness + 0.25 * s * s * (m.kurtosis - 1.0)) / n;
        (s, var.max(0.0).sqrt())
    } else {
        (0.0, 0.0)
    };
    let analytic_snr = noise::snr(&cfg.operating_point())?;
    let rates = samples.error_rates(cfg.threshold);

    Ok(SimOutcome {
        trials: cfg.trials,
        mean_count: cfg.mean_count(),
        window: cfg.window(),
        thermal_sigma: cfg.thermal_sigma(),
        sample_mean: m.mean,
        sample_std: m.std,
        empirical_snr,
        snr_stderr,
        analytic_snr,
        within_3sigma: (empirical_snr - analytic_snr).abs() <= 3.0 * snr_stderr,
        threshold: cfg.threshold,
        err_open: rates.err_open,
        err_blocked: rates.err_blocked,
        balanced_err: rates.balanced_err,
        ci95: ConfidenceIntervals {
            empirical_snr: Z95 * snr_stderr,
            err_open: binomial_ci95(rates.err_open, n),
            err_blocked: binomial_ci95(rates.err_blocked, n),
            balanced_err: 0.5
                * (binomial_ci95(rates.err_open, n).powi(2)
                    + binomial_ci95(rates.err_blocked, n).powi(2))
                .sqrt(),
        },
        gaussian_fallback: samples.gaussian_fallback,
        seed_used: cfg.seed,
        generator: GENERATOR.to_owned(),
    })
}

pub fn simulate_detection(cfg: &SimConfig) -> Result<SimOutcome> {
    let samples = sample(cfg)?;
    summarize(cfg, &samples)
}

/// Error rates of one sample set over a range of thresholds.
pub fn threshold_scan(cfg: &SimConfig, thresholds: &[f64]) -> Result<Vec<ErrorRates>> {
    let samples = sample(cfg)?;
    Ok(thresholds.iter().map(|&t| samples.error_rates(t)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub device: DeviceKind,
    pub bandwidth: f64,
    pub current: f64,
    pub conductance: f64,
    pub mean_count: f64,
    pub analytic_snr: f64,
    pub empirical_snr: f64,
    pub snr_stderr: f64,
    /// (empirical − analytic)/stderr.
    pub deviation_sigmas: f64,
    pub pass: bool,
    /// Mean count below [`MIN_GAUSSIAN_LAMBDA`].
    pub low_count_warning: bool,
    pub outcome: SimOutcome,
}

/// Feed a device's ideal sense current into the counting oracle at T = 0
/// and compare with the device model's own SNR.
pub fn validate_device(
    device: &DeviceSpec,
    bandwidth: f64,
    trials: u64,
    seed: u64,
) -> Result<ValidationRecord> {
    let analytic = devices::evaluate(device, bandwidth, &DeviceOptions::default())?;
    let t = analytic.transport;
    let cfg = SimConfig {
        conductance: t.conductance,
        ..SimConfig::new(t.current, bandwidth, trials, seed)
    };
    let outcome = simulate_detection(&cfg)?;
    let deviation = if outcome.snr_stderr > 0.0 {
        (outcome.empirical_snr - analytic.snr) / outcome.snr_stderr
    } else {
        0.0
    };
    Ok(ValidationRecord {
        device: device.kind(),
        bandwidth,
        current: t.current,
        conductance: t.conductance,
        mean_count: outcome.mean_count,
        analytic_snr: analytic.snr,
        empirical_snr: outcome.empirical_snr,
        snr_stderr: outcome.snr_stderr,
        deviation_sigmas: deviation,
        pass: deviation.abs() <= 3.0,
        low_count_warning: outcome.mean_count < MIN_GAUSSIAN_LAMBDA,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_electrons_per_window() {
        let cfg = SimConfig::new(1.602_177e-13, 5e4, 100_000, 7);
        assert!((cfg.mean_count() - 10.0).abs() < 1e-5);
        assert_eq!(cfg.window(), 1e-5);
        let out = simulate_detection(&cfg).unwrap();
        assert!((out.analytic_snr - 10f64.sqrt()).abs() < 1e-5);
        // Poisson: Var(mean/std) ≈ (λ/2 + 1/4)/n
        let expected_se = ((10.0 / 2.0 + 0.25) / 1e5f64).sqrt();
        assert!((out.snr_stderr - expected_se).abs() < 0.1 * expected_se);
        assert!(out.within_3sigma, "{out:?}");
        assert_eq!(out.err_blocked, 0.0);
        assert!(!out.gaussian_fallback);
    }

    #[test]
    fn no_signal() {
        let mut cfg = SimConfig::new(0.0, 1e3, 1000, 1);
        let out = simulate_detection(&cfg).unwrap();
        assert_eq!(out.empirical_snr, 0.0);
        assert_eq!(out.err_open, 1.0);
        cfg.threshold = 3.0;
        assert_eq!(simulate_detection(&cfg).unwrap().err_open, 1.0);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = SimConfig::new(1e-12, 1e3, 0, 1);
        assert!(matches!(
            simulate_detection(&cfg),
            Err(Error::ParameterDomain { name: "trials", .. })
        ));
    }

    #[test]
    fn fixed_seed_is_repeatable() {
        let cfg = SimConfig::for_mean_count(10.0, 1e4, 5000, 99);
        assert_eq!(sample(&cfg).unwrap(), sample(&cfg).unwrap());
        let other = SimConfig { seed: 100, ..cfg };
        assert_ne!(sample(&cfg).unwrap().open, sample(&other).unwrap().open);
    }

    #[test]
    fn huge_count_falls_back_to_gaussian() {
        let cfg = SimConfig::for_mean_count(1e9, 1.0, 20_000, 3);
        let out = simulate_detection(&cfg).unwrap();
        assert!(out.gaussian_fallback);
        assert!(out.within_3sigma, "{out:?}");
        assert!(((out.sample_mean - 1e9) / 1e9).abs() < 1e-5);
    }

    #[test]
    fn fano_factor_uses_gaussian_and_matches_analytic() {
        let cfg = SimConfig {
            fano: 0.5,
            ..SimConfig::for_mean_count(200.0, 1e3, 50_000, 11)
        };
        let out = simulate_detection(&cfg).unwrap();
        assert!(out.gaussian_fallback);
        assert!((out.analytic_snr - 20.0).abs() < 1e-9);
        assert!(out.within_3sigma, "{out:?}");
    }

    #[test]
    fn validate_wire_at_hundred_electrons() {
        let material = crate::units::Material::gaas_like();
        let device = DeviceSpec::Wire {
            geometry: devices::WireGeometry::new(30e-9).unwrap(),
            material: material.clone(),
        };
        let df = devices::wire_unity_bandwidth(&material).unwrap() / 100.0;
        let rec = validate_device(&device, df, 50_000, 5).unwrap();
        assert!((rec.mean_count - 100.0).abs() < 1e-9);
        assert!((rec.analytic_snr - 10.0).abs() < 1e-9);
        assert!(rec.pass, "{rec:?}");
        assert!(!rec.low_count_warning);

        let rec = validate_device(&device, df * 50.0, 1000, 5).unwrap();
        assert!(rec.low_count_warning);
    }

    #[test]
    fn threshold_scan_reports_rates() {
        let cfg = SimConfig::for_mean_count(10.0, 1e3, 20_000, 2);
        let scan = threshold_scan(&cfg, &[0.0, 0.5, 1.0, 5.0]).unwrap();
        assert_eq!(scan[0].err_open, 0.0);
        assert_eq!(scan[0].err_blocked, 1.0);
        assert_eq!(scan[1].err_blocked, 0.0);
        assert_eq!(scan[1].err_open, scan[2].err_open);
        assert!(scan[3].err_open > scan[2].err_open);
        let best = scan
            .iter()
            .min_by(|a, b| a.balanced_err.total_cmp(&b.balanced_err))
            .unwrap();
        assert!(best.threshold > 0.0 && best.threshold <= 1.0);
    }
}
