//! One-parameter sweeps over a device configuration, with a fixed CSV layout.
//!
//! Every CSV column carries its SI unit in the header; `axis_value` is in the
//! unit named by `axis_unit`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::devices::{self, DeviceKind, DeviceOptions, DeviceSpec, SnrResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Wire radius.
    #[serde(rename = "R")]
    Radius,
    /// QPC width.
    #[serde(rename = "W")]
    Width,
    #[serde(rename = "R_island")]
    IslandRadius,
    #[serde(rename = "delta_f")]
    Bandwidth,
    #[serde(rename = "epsilon_r")]
    EpsilonR,
    #[serde(rename = "m_star_ratio")]
    MStarRatio,
    #[serde(rename = "T")]
    Temperature,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 7] = [
        SweepAxis::Radius,
        SweepAxis::Width,
        SweepAxis::IslandRadius,
        SweepAxis::Bandwidth,
        SweepAxis::EpsilonR,
        SweepAxis::MStarRatio,
        SweepAxis::Temperature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Radius => "R",
            SweepAxis::Width => "W",
            SweepAxis::IslandRadius => "R_island",
            SweepAxis::Bandwidth => "delta_f",
            SweepAxis::EpsilonR => "epsilon_r",
            SweepAxis::MStarRatio => "m_star_ratio",
            SweepAxis::Temperature => "T",
        }
    }

    /// SI unit of the axis value; empty for dimensionless axes.
    pub fn unit(self) -> &'static str {
        match self {
            SweepAxis::Radius | SweepAxis::Width | SweepAxis::IslandRadius => "m",
            SweepAxis::Bandwidth => "Hz",
            SweepAxis::Temperature => "K",
            SweepAxis::EpsilonR | SweepAxis::MStarRatio => "1",
        }
    }

    pub fn applies_to(self, kind: DeviceKind) -> bool {
        match self {
            SweepAxis::Radius => kind == DeviceKind::Wire,
            SweepAxis::Width => kind == DeviceKind::Qpc,
            SweepAxis::IslandRadius => kind == DeviceKind::Set,
            SweepAxis::MStarRatio => kind != DeviceKind::Set,
            SweepAxis::Bandwidth | SweepAxis::EpsilonR | SweepAxis::Temperature => true,
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::InvalidSweep(format!(
                    "unknown axis '{s}' (expected one of R, W, R_island, delta_f, epsilon_r, m_star_ratio, T)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    #[default]
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::InvalidSweep(format!(
                "need finite start < stop, got {} .. {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidSweep("need at least 2 points".into()));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::InvalidSweep("log spacing needs start > 0".into()));
        }
        Ok(())
    }

    /// Sample points, endpoints exact.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let last = (self.points - 1) as f64;
        let mut values: Vec<f64> = (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect();
        values[0] = self.start;
        values[self.points - 1] = self.stop;
        Ok(values)
    }
}

/// Device, bandwidth and options that a sweep perturbs one axis of.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBase {
    pub device: DeviceSpec,
    pub bandwidth: f64,
    pub options: DeviceOptions,
}

impl SweepBase {
    fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<SweepBase> {
        let mut next = self.clone();
        match (axis, &mut next.device) {
            (SweepAxis::Radius, DeviceSpec::Wire { geometry, .. }) => geometry.radius = value,
            (SweepAxis::Width, DeviceSpec::Qpc { geometry, .. }) => geometry.width = value,
            (SweepAxis::IslandRadius, DeviceSpec::Set { geometry, .. }) => {
                geometry.island_radius = value
            }
            (SweepAxis::EpsilonR, DeviceSpec::Wire { material, .. })
            | (SweepAxis::EpsilonR, DeviceSpec::Qpc { material, .. }) => material.epsilon_r = value,
            (SweepAxis::EpsilonR, DeviceSpec::Set { epsilon_r, .. }) => *epsilon_r = value,
            (SweepAxis::MStarRatio, DeviceSpec::Wire { material, .. })
            | (SweepAxis::MStarRatio, DeviceSpec::Qpc { material, .. }) => {
                material.m_star_ratio = value
            }
            (SweepAxis::Bandwidth, _) => next.bandwidth = value,
            (SweepAxis::Temperature, _) => next.options.temperature = value,
            (axis, device) => {
                return Err(Error::InvalidSweep(format!(
                    "axis {axis} does not apply to a {} device",
                    device.kind()
                )))
            }
        }
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub device: DeviceKind,
    pub axis: String,
    pub axis_unit: String,
    pub axis_value: f64,
    pub radius_m: Option<f64>,
    pub width_m: Option<f64>,
    pub island_radius_m: Option<f64>,
    pub m_star_ratio: Option<f64>,
    pub epsilon_r: f64,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    #[serde(rename = "bandwidth_Hz")]
    pub bandwidth_hz: f64,
    pub snr: f64,
    #[serde(rename = "f_unity_Hz")]
    pub f_unity_hz: f64,
    #[serde(rename = "closed_form_f_unity_Hz")]
    pub closed_form_f_unity_hz: f64,
    pub sensitivity_e_per_rt_hz: f64,
    #[serde(rename = "current_A")]
    pub current_a: f64,
    #[serde(rename = "conductance_S")]
    pub conductance_s: f64,
    #[serde(rename = "bias_V")]
    pub bias_v: f64,
    pub modes: f64,
    #[serde(rename = "shot_sq_A2")]
    pub shot_sq_a2: f64,
    #[serde(rename = "thermal_sq_A2")]
    pub thermal_sq_a2: f64,
    #[serde(rename = "noise_rms_A")]
    pub noise_rms_a: f64,
    pub ideal: bool,
}

impl SweepRow {
    pub fn new(
        axis: Option<SweepAxis>,
        axis_value: f64,
        device: &DeviceSpec,
        options: &DeviceOptions,
        result: &SnrResult,
    ) -> Self {
        let (radius_m, width_m, island_radius_m, m_star_ratio, epsilon_r) = match device {
            DeviceSpec::Wire { geometry, material } => (
                Some(geometry.radius),
                None,
                None,
                Some(material.m_star_ratio),
                material.epsilon_r,
            ),
            DeviceSpec::Qpc { geometry, material } => (
                None,
                Some(geometry.width),
                None,
                Some(material.m_star_ratio),
                material.epsilon_r,
            ),
            DeviceSpec::Set {
                geometry,
                epsilon_r,
            } => (None, None, Some(geometry.island_radius), None, *epsilon_r),
        };
        Self {
            device: device.kind(),
            axis: axis.map(|a| a.name().to_owned()).unwrap_or_default(),
            axis_unit: axis.map(|a| a.unit().to_owned()).unwrap_or_default(),
            axis_value,
            radius_m,
            width_m,
            island_radius_m,
            m_star_ratio,
            epsilon_r,
            temperature_k: options.temperature,
            bandwidth_hz: result.bandwidth,
            snr: result.snr,
            f_unity_hz: result.f_unity,
            closed_form_f_unity_hz: result.closed_form_f_unity,
            sensitivity_e_per_rt_hz: result.sensitivity,
            current_a: result.transport.current,
            conductance_s: result.transport.conductance,
            bias_v: result.transport.bias,
            modes: result.transport.modes,
            shot_sq_a2: result.breakdown.shot_sq,
            thermal_sq_a2: result.breakdown.thermal_sq,
            noise_rms_a: result.breakdown.total_rms,
            ideal: result.is_ideal(),
        }
    }
}

pub fn run_sweep(base: &SweepBase, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if !spec.axis.applies_to(base.device.kind()) {
        return Err(Error::InvalidSweep(format!(
            "axis {} does not apply to a {} device",
            spec.axis,
            base.device.kind()
        )));
    }
    spec.values()?
        .into_iter()
        .map(|value| {
            let point = base.with_axis(spec.axis, value)?;
            let result = devices::evaluate(&point.device, point.bandwidth, &point.options)?;
            Ok(SweepRow::new(
                Some(spec.axis),
                value,
                &point.device,
                &point.options,
                &result,
            ))
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
