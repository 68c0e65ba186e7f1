//! Shot and Johnson current noise, and the amplitude SNR of a sense current
//! against their sum.
//!
//! The two noise sources are independent and add in variance:
//! `I_N² = 4·k_B·T·G·Δf + 2·F·e·I·Δf`, with Fano factor `F` (1 for full
//! Poissonian shot noise).

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::units::CONSTANTS;

/// Relative tolerance for `I = G·V_ds` when both are supplied.
const CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Mean sense current (A).
    pub current: f64,
    /// Mean conductance (S).
    pub conductance: f64,
    /// Source–drain bias (V), when known.
    pub bias: Option<f64>,
    /// Temperature (K).
    pub temperature: f64,
    /// Measurement bandwidth (Hz).
    pub bandwidth: f64,
    /// Shot-noise Fano factor; 1 is full shot noise.
    pub fano: f64,
}

impl OperatingPoint {
    /// Ballistic operating point with `I = G·V_ds`.
    pub fn biased(conductance: f64, bias: f64, temperature: f64, bandwidth: f64) -> Self {
        Self {
            current: conductance * bias,
            conductance,
            bias: Some(bias),
            temperature,
            bandwidth,
            fano: 1.0,
        }
    }

    /// Zero-temperature operating point known only by its current.
    pub fn from_current(current: f64, bandwidth: f64) -> Self {
        Self {
            current,
            conductance: 0.0,
            bias: None,
            temperature: 0.0,
            bandwidth,
            fano: 1.0,
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_conductance(mut self, conductance: f64) -> Self {
        self.conductance = conductance;
        self
    }

    pub fn with_fano(mut self, fano: f64) -> Self {
        self.fano = fano;
        self
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("bandwidth", self.bandwidth)?;
        require_non_negative("current", self.current)?;
        require_non_negative("conductance", self.conductance)?;
        require_non_negative("temperature", self.temperature)?;
        require_non_negative("fano", self.fano)?;
        if let Some(bias) = self.bias {
            require_non_negative("bias", bias)?;
            if self.conductance > 0.0 {
                let expected = self.conductance * bias;
                let scale = expected.abs().max(self.current.abs());
                if scale > 0.0 && (self.current - expected).abs() > CONSISTENCY_TOL * scale {
                    return Err(Error::InconsistentOperatingPoint(format!(
                        "current {} A differs from G*V = {} A",
                        self.current, expected
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total noise current spectral density (A²/Hz), shot plus thermal.
    pub fn noise_density(&self) -> f64 {
        2.0 * self.fano * CONSTANTS.e * self.current
            + 4.0 * CONSTANTS.k_b * self.temperature * self.conductance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBreakdown {
    /// Shot-noise current variance (A²).
    pub shot_sq: f64,
    /// Johnson-noise current variance (A²).
    pub thermal_sq: f64,
    /// sqrt(shot_sq + thermal_sq) (A).
    pub total_rms: f64,
}

pub fn noise_breakdown(op: &OperatingPoint) -> Result<NoiseBreakdown> {
    op.validate()?;
    let shot_sq = 2.0 * op.fano * CONSTANTS.e * op.current * op.bandwidth;
    let thermal_sq = 4.0 * CONSTANTS.k_b * op.temperature * op.conductance * op.bandwidth;
    Ok(NoiseBreakdown {
        shot_sq,
        thermal_sq,
        total_rms: (shot_sq + thermal_sq).sqrt(),
    })
}

/// Amplitude SNR `I / I_N`. Zero current gives 0, not an error.
pub fn snr(op: &OperatingPoint) -> Result<f64> {
    let noise = noise_breakdown(op)?;
    if op.current == 0.0 {
        return Ok(0.0);
    }
    Ok(op.current / noise.total_rms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotDominance {
    /// `V_ds > 2·k_B·T/e`.
    pub shot_dominated: bool,
    /// `V_ds·e/(2·k_B·T)`; infinite at T = 0.
    pub margin: f64,
}

pub fn shot_dominated(bias: f64, temperature: f64) -> Result<ShotDominance> {
    require_non_negative("bias", bias)?;
    require_non_negative("temperature", temperature)?;
    if temperature == 0.0 {
        return Ok(ShotDominance {
            shot_dominated: bias > 0.0,
            margin: f64::INFINITY,
        });
    }
    let margin = bias * CONSTANTS.e / (2.0 * CONSTANTS.k_b * temperature);
    Ok(ShotDominance {
        shot_dominated: margin > 1.0,
        margin,
    })
}
