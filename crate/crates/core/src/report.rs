//! Headline numbers: the device limits at their reference operating points,
//! each checked against the published order-of-magnitude figure.

use serde::{Deserialize, Serialize};

use crate::devices::{self, DeviceKind, DeviceSpec, QpcGeometry, SetGeometry, WireGeometry};
use crate::error::Result;
use crate::units::{Material, CONSTANTS};

/// "~x" claims pass within this factor either way.
pub const APPROX_FACTOR: f64 = 1.25;

/// A quoted decade range `[10^a, 10^b]` passes when the value lies within
/// half a decade of it.
pub const DECADE_SLACK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub device: DeviceKind,
    pub inputs: String,
    #[serde(rename = "f_unity_Hz")]
    pub f_unity_hz: f64,
    pub sensitivity_e_per_rt_hz: f64,
    /// Which of the two numbers is compared with the claim.
    pub checked: String,
    pub value: f64,
    pub paper_claim: String,
    pub band_low: f64,
    pub band_high: f64,
    pub within_claim: bool,
}

enum Checked {
    UnityBandwidth,
    Sensitivity,
}

fn row(
    label: &str,
    device: DeviceSpec,
    inputs: &str,
    checked: Checked,
    claim: &str,
    band: (f64, f64),
) -> Result<ReportRow> {
    let f_unity = devices::unity_snr_bandwidth(&device)?;
    let sensitivity = devices::sensitivity(&device)?;
    let (name, value) = match checked {
        Checked::UnityBandwidth => ("f_unity_Hz", f_unity),
        Checked::Sensitivity => ("sensitivity_e_per_rt_hz", sensitivity),
    };
    Ok(ReportRow {
        label: label.to_owned(),
        device: device.kind(),
        inputs: inputs.to_owned(),
        f_unity_hz: f_unity,
        sensitivity_e_per_rt_hz: sensitivity,
        checked: name.to_owned(),
        value,
        paper_claim: claim.to_owned(),
        band_low: band.0,
        band_high: band.1,
        within_claim: value >= band.0 && value <= band.1,
    })
}

fn approx(x: f64) -> (f64, f64) {
    (x / APPROX_FACTOR, x * APPROX_FACTOR)
}

fn decades(low_exp: f64, high_exp: f64) -> (f64, f64) {
    (
        10f64.powf(low_exp - DECADE_SLACK),
        10f64.powf(high_exp + DECADE_SLACK),
    )
}

pub fn headline_report() -> Result<Vec<ReportRow>> {
    let vacuum = Material::vacuum();
    let gaas = Material::gaas_like();
    // R cancels for the wire; any radius will do.
    let wire = |material: &Material| DeviceSpec::Wire {
        geometry: WireGeometry { radius: 50e-9 },
        material: material.clone(),
    };
    let ry = CONSTANTS.ry_freq;
    Ok(vec![
        row(
            "vacuum wire unity bandwidth",
            wire(&vacuum),
            "m*/m=1 eps_r=1",
            Checked::UnityBandwidth,
            "Rydberg frequency",
            (ry * (1.0 - 1e-3), ry * (1.0 + 1e-3)),
        )?,
        row(
            "vacuum wire sensitivity",
            wire(&vacuum),
            "m*/m=1 eps_r=1 df=1Hz",
            Checked::Sensitivity,
            "~2e-8 e/rtHz",
            approx(2e-8),
        )?,
        row(
            "semiconductor wire unity bandwidth",
            wire(&gaas),
            "m*/m=0.067 eps_r=12.9",
            Checked::UnityBandwidth,
            "~1 THz",
            (0.5e12, 2.0e12),
        )?,
        row(
            "semiconductor wire sensitivity",
            wire(&gaas),
            "m*/m=0.067 eps_r=12.9 df=1Hz",
            Checked::Sensitivity,
            "~1e-6 e/rtHz",
            (5e-7, 2e-6),
        )?,
        row(
            "SET sensitivity",
            DeviceSpec::Set {
                geometry: SetGeometry { island_radius: 50e-9 },
                epsilon_r: 12.9,
            },
            "R_island=50nm eps_r=12.9 df=1Hz",
            Checked::Sensitivity,
            "1e-7 - 1e-6 e/rtHz",
            decades(-7.0, -6.0),
        )?,
        row(
            "QPC sensitivity",
            DeviceSpec::Qpc {
                geometry: QpcGeometry { width: 20e-9 },
                material: gaas.clone(),
            },
            "W=20nm m*/m=0.067 df=1Hz",
            Checked::Sensitivity,
            "1e-7 - 1e-6 e/rtHz",
            decades(-7.0, -6.0),
        )?,
    ])
}
