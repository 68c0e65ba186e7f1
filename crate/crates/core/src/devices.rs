//! Three single-charge electrometers at their ideal operating points.
//!
//! * **Wire**: cylindrical ballistic channel of radius R, biased at the
//!   Coulomb potential `e/(ε_r·R)` of a central ion; mode count from the 2D
//!   transverse density of states.
//! * **QPC**: single-mode point contact of width W, biased at the 1→2
//!   sub-band spacing.
//! * **SET**: disk island of radius R, biased at the blockade voltage `e/2C`.
//!
//! Each device is evaluated twice. [`evaluate`] walks the SI pipeline (bias,
//! conductance, current, then [`crate::noise::snr`]); the `*_unity_bandwidth`
//! functions give the closed forms in Rydberg units. At T = 0 with full
//! modulation the two agree to rounding error, which the tests rely on.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::noise::{self, NoiseBreakdown, OperatingPoint};
use crate::units::{effective_scales, Material, CONSTANTS};

/// Conductance of each device in units of e²/h. Flip these to explore the
/// other spin bookkeeping; the closed forms follow.
pub mod conventions {
    /// Quanta per wire mode. The transverse density of states already counts
    /// both spins, so each counted mode carries one quantum.
    pub const WIRE_QUANTA_PER_MODE: f64 = 1.0;
    /// Quanta through the open QPC: one orbital mode, two spins.
    pub const QPC_QUANTA: f64 = 2.0;
    /// Quanta through the SET. Its prose bound reads e²/h but the SNR formula
    /// carries 2e²/h, and only the latter gives the Rydberg form; we follow
    /// the formula.
    pub const SET_QUANTA: f64 = 2.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireGeometry {
    /// Channel radius (m).
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpcGeometry {
    /// Constriction width (m). Single-mode when about half a Fermi wavelength.
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetGeometry {
    /// Island disk radius (m).
    pub island_radius: f64,
}

impl WireGeometry {
    pub fn new(radius: f64) -> Result<Self> {
        require_positive("radius", radius).map(|radius| Self { radius })
    }
}

impl QpcGeometry {
    pub fn new(width: f64) -> Result<Self> {
        require_positive("width", width).map(|width| Self { width })
    }
}

impl SetGeometry {
    pub fn new(island_radius: f64) -> Result<Self> {
        require_positive("island_radius", island_radius).map(|island_radius| Self { island_radius })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    Wire,
    Qpc,
    Set,
}

impl DeviceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceKind::Wire => "wire",
            DeviceKind::Qpc => "qpc",
            DeviceKind::Set => "set",
        }
    }
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wire" | "fet" => Ok(DeviceKind::Wire),
            "qpc" => Ok(DeviceKind::Qpc),
            "set" => Ok(DeviceKind::Set),
            _ => Err(Error::UnknownDevice(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DeviceSpec {
    Wire {
        geometry: WireGeometry,
        material: Material,
    },
    Qpc {
        geometry: QpcGeometry,
        material: Material,
    },
    Set {
        geometry: SetGeometry,
        epsilon_r: f64,
    },
}

impl DeviceSpec {
    pub fn kind(&self) -> DeviceKind {
        match self {
            DeviceSpec::Wire { .. } => DeviceKind::Wire,
            DeviceSpec::Qpc { .. } => DeviceKind::Qpc,
            DeviceSpec::Set { .. } => DeviceKind::Set,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DeviceSpec::Wire { geometry, material } => {
                require_positive("radius", geometry.radius)?;
                material.validate()
            }
            DeviceSpec::Qpc { geometry, material } => {
                require_positive("width", geometry.width)?;
                material.validate()
            }
            DeviceSpec::Set {
                geometry,
                epsilon_r,
            } => {
                require_positive("island_radius", geometry.island_radius)?;
                validate_epsilon(*epsilon_r)
            }
        }
    }
}

fn validate_epsilon(epsilon_r: f64) -> Result<()> {
    if epsilon_r.is_finite() && epsilon_r >= 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name: "epsilon_r",
            value: epsilon_r,
            reason: "relative dielectric constant must be >= 1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeCounting {
    /// Real-valued N_m; the closed forms are exact only here.
    #[default]
    Continuous,
    /// floor(N_m) open modes.
    Floor,
}

/// Departures from the ideal operating point. Defaults reproduce the
/// closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceOptions {
    /// Temperature (K).
    pub temperature: f64,
    /// Fraction of the sense current switched by the charge, in (0, 1].
    pub modulation_depth: f64,
    pub mode_counting: ModeCounting,
    /// Wire bias override (V); `None` uses the optimal bias.
    pub wire_bias: Option<f64>,
    /// Shot-noise Fano factor.
    pub fano: f64,
}

impl Default for DeviceOptions {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            modulation_depth: 1.0,
            mode_counting: ModeCounting::Continuous,
            wire_bias: None,
            fano: 1.0,
        }
    }
}

impl DeviceOptions {
    fn validate(&self) -> Result<()> {
        require_non_negative("temperature", self.temperature)?;
        require_positive("fano", self.fano)?;
        if !(self.modulation_depth > 0.0 && self.modulation_depth <= 1.0) {
            return Err(Error::ParameterDomain {
                name: "modulation_depth",
                value: self.modulation_depth,
                reason: "must lie in (0, 1]",
            });
        }
        if let Some(bias) = self.wire_bias {
            require_non_negative("bias", bias)?;
        }
        Ok(())
    }
}

/// Conditions under which the pipeline no longer matches the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum ValidityFlag {
    /// Bias exceeds the ion potential at the channel edge; pinch-off is not
    /// guaranteed.
    BiasAboveOptimal { bias: f64, optimal: f64 },
    IntegerModeCount { continuous: f64, used: f64 },
    PartialModulation { depth: f64 },
    /// V_ds ≤ 2·k_B·T/e.
    ThermalNoiseSignificant { margin: f64 },
    SuppressedShotNoise { fano: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportState {
    /// Conducting modes N_m (for QPC/SET: conductance in units of e²/h).
    pub modes: f64,
    /// Kinetic energy available to carriers, e·V_ds (J).
    pub kinetic_energy: f64,
    /// Source–drain bias (V).
    pub bias: f64,
    /// Conductance (S).
    pub conductance: f64,
    /// Sense current (A).
    pub current: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetElectrostatics {
    /// Island self-capacitance (F).
    pub capacitance: f64,
    /// e²/2C (J).
    pub charging_energy: f64,
    /// e/2C (V).
    pub blockade_voltage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrResult {
    pub kind: DeviceKind,
    /// Bandwidth the SNR refers to (Hz).
    pub bandwidth: f64,
    pub snr: f64,
    /// Bandwidth at which SNR = 1 (Hz), from the pipeline.
    pub f_unity: f64,
    /// Ideal-point closed form in Rydberg units (Hz).
    pub closed_form_f_unity: f64,
    /// e/√Hz.
    pub sensitivity: f64,
    pub breakdown: NoiseBreakdown,
    pub transport: TransportState,
    pub electrostatics: Option<SetElectrostatics>,
    pub validity: Vec<ValidityFlag>,
}

impl SnrResult {
    pub fn is_ideal(&self) -> bool {
        self.validity.is_empty()
    }
}

// ---------------------------------------------------------------------------
// wire

/// Largest bias the central ion can still pinch off: `e/(ε_r·R)` (Gaussian).
pub fn wire_optimal_bias(geom: &WireGeometry, mat: &Material) -> Result<f64> {
    require_positive("radius", geom.radius)?;
    mat.validate()?;
    Ok(CONSTANTS.coulomb_e2() / (CONSTANTS.e * mat.epsilon_r * geom.radius))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCount {
    pub modes: f64,
    pub above_optimal_bias: bool,
}

/// `N_m = (m*/πħ²)·(πR²)·e·V_ds`, kept real-valued.
pub fn wire_mode_count(geom: &WireGeometry, mat: &Material, bias: f64) -> Result<ModeCount> {
    require_non_negative("bias", bias)?;
    let optimal = wire_optimal_bias(geom, mat)?;
    let m_star = mat.m_star_ratio * CONSTANTS.m_e;
    let dos_per_area = m_star / (PI * CONSTANTS.hbar * CONSTANTS.hbar);
    let area = PI * geom.radius * geom.radius;
    Ok(ModeCount {
        modes: dos_per_area * area * CONSTANTS.e * bias,
        above_optimal_bias: bias > optimal * (1.0 + 1e-12),
    })
}

/// Sense current at the optimal bias, `2e·Ry*/h`; independent of R.
pub fn wire_sense_current(mat: &Material) -> Result<f64> {
    Ok(2.0 * CONSTANTS.e * wire_unity_bandwidth(mat)?)
}

/// `Ry*/h` (times the wire spin convention).
pub fn wire_unity_bandwidth(mat: &Material) -> Result<f64> {
    let scales = effective_scales(mat)?;
    Ok(conventions::WIRE_QUANTA_PER_MODE * scales.ry_star_freq)
}

/// Wire SNR at the optimal bias. R cancels; the transport state is reported
/// at R = a*, where exactly one mode conducts.
pub fn wire_snr(mat: &Material, bandwidth: f64) -> Result<SnrResult> {
    let geometry = WireGeometry::new(effective_scales(mat)?.a_star)?;
    evaluate(
        &DeviceSpec::Wire {
            geometry,
            material: mat.clone(),
        },
        bandwidth,
        &DeviceOptions::default(),
    )
}

fn wire_transport(
    geom: &WireGeometry,
    mat: &Material,
    opts: &DeviceOptions,
    flags: &mut Vec<ValidityFlag>,
) -> Result<TransportState> {
    let optimal = wire_optimal_bias(geom, mat)?;
    let bias = opts.wire_bias.unwrap_or(optimal);
    let count = wire_mode_count(geom, mat, bias)?;
    if count.above_optimal_bias {
        flags.push(ValidityFlag::BiasAboveOptimal { bias, optimal });
    }
    let modes = match opts.mode_counting {
        ModeCounting::Continuous => count.modes,
        ModeCounting::Floor => {
            let used = count.modes.floor();
            flags.push(ValidityFlag::IntegerModeCount {
                continuous: count.modes,
                used,
            });
            used
        }
    };
    let conductance = modes * conventions::WIRE_QUANTA_PER_MODE * CONSTANTS.conductance_quantum();
    Ok(TransportState {
        modes,
        kinetic_energy: CONSTANTS.e * bias,
        bias,
        conductance,
        current: conductance * bias,
    })
}

// ---------------------------------------------------------------------------
// QPC

/// 1→2 sub-band spacing of a hard-wall waveguide, `3π²ħ²/(2m*W²)`.
pub fn qpc_subband_spacing(geom: &QpcGeometry, mat: &Material) -> Result<f64> {
    require_positive("width", geom.width)?;
    mat.validate()?;
    let m_star = mat.m_star_ratio * CONSTANTS.m_e;
    Ok(3.0 * PI * PI * CONSTANTS.hbar * CONSTANTS.hbar / (2.0 * m_star * geom.width * geom.width))
}

/// `Δ/h`, from the SI sub-band spacing.
pub fn qpc_unity_bandwidth(geom: &QpcGeometry, mat: &Material) -> Result<f64> {
    Ok(0.5 * conventions::QPC_QUANTA * qpc_subband_spacing(geom, mat)? / CONSTANTS.h)
}

/// `3π²·(Ry/h)·(m/m*)·(a₀/W)²`, the same bandwidth in Rydberg units.
pub fn qpc_unity_bandwidth_rydberg(geom: &QpcGeometry, mat: &Material) -> Result<f64> {
    require_positive("width", geom.width)?;
    mat.validate()?;
    let bohr_ratio = CONSTANTS.a0 / geom.width;
    Ok(0.5
        * conventions::QPC_QUANTA
        * 3.0
        * PI
        * PI
        * CONSTANTS.ry_freq
        * bohr_ratio
        * bohr_ratio
        / mat.m_star_ratio)
}

pub fn qpc_snr(geom: &QpcGeometry, mat: &Material, bandwidth: f64) -> Result<SnrResult> {
    evaluate(
        &DeviceSpec::Qpc {
            geometry: *geom,
            material: mat.clone(),
        },
        bandwidth,
        &DeviceOptions::default(),
    )
}

fn qpc_transport(geom: &QpcGeometry, mat: &Material) -> Result<TransportState> {
    let spacing = qpc_subband_spacing(geom, mat)?;
    let bias = spacing / CONSTANTS.e;
    let conductance = conventions::QPC_QUANTA * CONSTANTS.conductance_quantum();
    Ok(TransportState {
        modes: conventions::QPC_QUANTA,
        kinetic_energy: spacing,
        bias,
        conductance,
        current: conductance * bias,
    })
}

// ---------------------------------------------------------------------------
// SET

/// Thin conducting disk: `C = 2ε_r·R/π` (Gaussian), i.e. `8·ε₀·ε_r·R` in SI.
pub fn set_island_capacitance(geom: &SetGeometry, epsilon_r: f64) -> Result<f64> {
    require_positive("island_radius", geom.island_radius)?;
    validate_epsilon(epsilon_r)?;
    let gaussian = 2.0 * epsilon_r * geom.island_radius / PI;
    Ok(gaussian * CONSTANTS.e * CONSTANTS.e / CONSTANTS.coulomb_e2())
}

pub fn set_blockade(geom: &SetGeometry, epsilon_r: f64) -> Result<SetElectrostatics> {
    let capacitance = set_island_capacitance(geom, epsilon_r)?;
    Ok(blockade_for_capacitance(capacitance))
}

pub fn blockade_for_capacitance(capacitance: f64) -> SetElectrostatics {
    let blockade_voltage = CONSTANTS.e / (2.0 * capacitance);
    SetElectrostatics {
        capacitance,
        charging_energy: CONSTANTS.e * blockade_voltage,
        blockade_voltage,
    }
}

/// `e²/(2C·h)` with the disk capacitance in SI.
pub fn set_unity_bandwidth(geom: &SetGeometry, epsilon_r: f64) -> Result<f64> {
    let c = set_island_capacitance(geom, epsilon_r)?;
    Ok(0.5 * conventions::SET_QUANTA * CONSTANTS.e * CONSTANTS.e / (2.0 * c * CONSTANTS.h))
}

/// `(Ry/h)·π·a₀/(2·ε_r·R)`, the same bandwidth in Rydberg units.
pub fn set_unity_bandwidth_rydberg(geom: &SetGeometry, epsilon_r: f64) -> Result<f64> {
    require_positive("island_radius", geom.island_radius)?;
    validate_epsilon(epsilon_r)?;
    Ok(0.5 * conventions::SET_QUANTA * CONSTANTS.ry_freq * PI * CONSTANTS.a0
        / (2.0 * epsilon_r * geom.island_radius))
}

pub fn set_snr(geom: &SetGeometry, epsilon_r: f64, bandwidth: f64) -> Result<SnrResult> {
    evaluate(
        &DeviceSpec::Set {
            geometry: *geom,
            epsilon_r,
        },
        bandwidth,
        &DeviceOptions::default(),
    )
}

fn set_transport(geom: &SetGeometry, epsilon_r: f64) -> Result<(TransportState, SetElectrostatics)> {
    let es = set_blockade(geom, epsilon_r)?;
    let conductance = conventions::SET_QUANTA * CONSTANTS.conductance_quantum();
    let transport = TransportState {
        modes: conventions::SET_QUANTA,
        kinetic_energy: es.charging_energy,
        bias: es.blockade_voltage,
        conductance,
        current: conductance * es.blockade_voltage,
    };
    Ok((transport, es))
}

// ---------------------------------------------------------------------------
// dispatch

/// The ideal-point unity-SNR bandwidth in Rydberg units.
pub fn closed_form_unity_bandwidth(device: &DeviceSpec) -> Result<f64> {
    match device {
        DeviceSpec::Wire { material, .. } => wire_unity_bandwidth(material),
        DeviceSpec::Qpc { geometry, material } => qpc_unity_bandwidth_rydberg(geometry, material),
        DeviceSpec::Set {
            geometry,
            epsilon_r,
        } => set_unity_bandwidth_rydberg(geometry, *epsilon_r),
    }
}

/// The device's sense current and conductance at its operating point.
pub fn transport_state(device: &DeviceSpec, opts: &DeviceOptions) -> Result<TransportState> {
    let mut flags = Vec::new();
    Ok(transport_with_flags(device, opts, &mut flags)?.0)
}

fn transport_with_flags(
    device: &DeviceSpec,
    opts: &DeviceOptions,
    flags: &mut Vec<ValidityFlag>,
) -> Result<(TransportState, Option<SetElectrostatics>)> {
    device.validate()?;
    opts.validate()?;
    match device {
        DeviceSpec::Wire { geometry, material } => {
            Ok((wire_transport(geometry, material, opts, flags)?, None))
        }
        DeviceSpec::Qpc { geometry, material } => Ok((qpc_transport(geometry, material)?, None)),
        DeviceSpec::Set {
            geometry,
            epsilon_r,
        } => {
            let (t, es) = set_transport(geometry, *epsilon_r)?;
            Ok((t, Some(es)))
        }
    }
}

/// Run the device pipeline and the generic noise SNR at `bandwidth`.
pub fn evaluate(device: &DeviceSpec, bandwidth: f64, opts: &DeviceOptions) -> Result<SnrResult> {
    require_positive("bandwidth", bandwidth)?;
    let mut validity = Vec::new();
    let (transport, electrostatics) = transport_with_flags(device, opts, &mut validity)?;

    let op = OperatingPoint::biased(
        transport.conductance,
        transport.bias,
        opts.temperature,
        bandwidth,
    )
    .with_fano(opts.fano);
    let breakdown = noise::noise_breakdown(&op)?;
    let depth = opts.modulation_depth;
    let snr = depth * noise::snr(&op)?;

    // SNR² = (η·I)²/(S_I·Δf), so SNR = 1 at Δf = (η·I)²/S_I.
    let density = op.noise_density();
    let f_unity = if density > 0.0 {
        (depth * transport.current).powi(2) / density
    } else {
        0.0
    };

    if depth < 1.0 {
        validity.push(ValidityFlag::PartialModulation { depth });
    }
    if opts.fano != 1.0 {
        validity.push(ValidityFlag::SuppressedShotNoise { fano: opts.fano });
    }
    let dominance = noise::shot_dominated(transport.bias, opts.temperature)?;
    if opts.temperature > 0.0 && !dominance.shot_dominated {
        validity.push(ValidityFlag::ThermalNoiseSignificant {
            margin: dominance.margin,
        });
    }

    Ok(SnrResult {
        kind: device.kind(),
        bandwidth,
        snr,
        f_unity,
        closed_form_f_unity: closed_form_unity_bandwidth(device)?,
        sensitivity: if f_unity > 0.0 {
            1.0 / f_unity.sqrt()
        } else {
            f64::INFINITY
        },
        breakdown,
        transport,
        electrostatics,
        validity,
    })
}

/// Bandwidth at which a single charge is resolved with unit SNR.
pub fn unity_snr_bandwidth(device: &DeviceSpec) -> Result<f64> {
    Ok(evaluate(device, 1.0, &DeviceOptions::default())?.f_unity)
}

/// Charge sensitivity in e/√Hz: the inverse SNR at 1 Hz.
pub fn sensitivity(device: &DeviceSpec) -> Result<f64> {
    Ok(evaluate(device, 1.0, &DeviceOptions::default())?.sensitivity)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn gaas() -> Material {
        Material::gaas_like()
    }

    fn wire(radius: f64, material: Material) -> DeviceSpec {
        DeviceSpec::Wire {
            geometry: WireGeometry::new(radius).unwrap(),
            material,
        }
    }

    #[test]
    fn optimal_bias_values() {
        let vac = Material::vacuum();
        let v = wire_optimal_bias(&WireGeometry::new(CONSTANTS.a0).unwrap(), &vac).unwrap();
        assert!(rel(v, 27.211_386_2).abs() < 1e-8);
        assert!(rel(v, 2.0 * CONSTANTS.ry_energy / CONSTANTS.e) < 1e-14);

        let v = wire_optimal_bias(&WireGeometry::new(10.19e-9).unwrap(), &gaas()).unwrap();
        assert!(rel(v, 10.954_4e-3) < 1e-4);

        let g = WireGeometry::new(7e-9).unwrap();
        let doubled = Material::new("x", 0.067, 25.8).unwrap();
        let ratio = wire_optimal_bias(&g, &doubled).unwrap() / wire_optimal_bias(&g, &gaas()).unwrap();
        assert!(rel(ratio, 0.5) < 1e-15);

        assert!(WireGeometry::new(0.0).is_err());
    }

    #[test]
    fn mode_count_values() {
        for mat in [Material::vacuum(), gaas()] {
            let a_star = effective_scales(&mat).unwrap().a_star;
            let g = WireGeometry::new(a_star).unwrap();
            let v = wire_optimal_bias(&g, &mat).unwrap();
            let n = wire_mode_count(&g, &mat, v).unwrap();
            assert!(rel(n.modes, 1.0) < 1e-12, "{}", n.modes);
            assert!(!n.above_optimal_bias);
        }
        let g = WireGeometry::new(101.9e-9).unwrap();
        let v = wire_optimal_bias(&g, &gaas()).unwrap();
        assert!(rel(wire_mode_count(&g, &gaas(), v).unwrap().modes, 10.001_34) < 1e-5);
        assert_eq!(wire_mode_count(&g, &gaas(), 0.0).unwrap().modes, 0.0);
        assert!(wire_mode_count(&g, &gaas(), -1e-3).is_err());
        assert!(wire_mode_count(&g, &gaas(), 2.0 * v).unwrap().above_optimal_bias);
    }

    #[test]
    fn sense_current_values() {
        assert!(rel(wire_sense_current(&Material::vacuum()).unwrap(), 1.054_181_58e-3) < 1e-8);
        assert!(rel(wire_sense_current(&gaas()).unwrap(), 4.244_346e-7) < 1e-6);
        // pipeline current is R-independent
        let closed = wire_sense_current(&gaas()).unwrap();
        for r in [1e-9, 3.3e-8, 1e-6] {
            let t = transport_state(&wire(r, gaas()), &DeviceOptions::default()).unwrap();
            assert!(rel(t.current, closed) < 1e-12);
        }
    }

    #[test]
    fn wire_snr_values() {
        let vac = Material::vacuum();
        let r = wire_snr(&vac, CONSTANTS.ry_freq).unwrap();
        assert!(rel(r.snr, 1.0) < 1e-12);
        assert!(rel(r.f_unity, CONSTANTS.ry_freq) < 1e-12);
        assert_eq!(r.closed_form_f_unity, CONSTANTS.ry_freq);
        assert!(r.is_ideal());

        let r = wire_snr(&vac, 1.0).unwrap();
        assert!(rel(r.sensitivity, 1.743_462e-8) < 1e-6);
        let r = wire_snr(&gaas(), 1.0).unwrap();
        assert!(rel(r.sensitivity, 8.688_90e-7) < 1e-5);
        assert!(rel(r.transport.modes, 1.0) < 1e-12);
        assert!(wire_snr(&gaas(), 0.0).is_err());
    }

    #[test]
    fn subband_spacing_values() {
        let g = QpcGeometry::new(20e-9).unwrap();
        let d = qpc_subband_spacing(&g, &gaas()).unwrap();
        assert!(rel(d / CONSTANTS.e, 42.092_93e-3) < 1e-6);
        let g2 = QpcGeometry::new(40e-9).unwrap();
        assert!(rel(qpc_subband_spacing(&g2, &gaas()).unwrap(), d / 4.0) < 1e-15);

        let g = QpcGeometry::new(CONSTANTS.a0).unwrap();
        let d = qpc_subband_spacing(&g, &Material::vacuum()).unwrap();
        assert!(rel(d, 3.0 * PI * PI * CONSTANTS.ry_energy) < 1e-13);
        assert!(rel(d / CONSTANTS.e, 402.848_4) < 1e-6);
    }

    /// Lowest eigenvalues of -u''/2 on (0, 1) with hard walls, by Sturm
    /// bisection on the finite-difference tridiagonal matrix.
    fn square_well_levels(n: usize, count: usize) -> Vec<f64> {
        let h = 1.0 / (n as f64 + 1.0);
        let diag = 1.0 / (h * h);
        let off = -0.5 / (h * h);
        let below = |x: f64| {
            let mut k = 0;
            let mut q = diag - x;
            if q < 0.0 {
                k += 1;
            }
            for _ in 1..n {
                let q_prev = if q == 0.0 { 1e-300 } else { q };
                q = diag - x - off * off / q_prev;
                if q < 0.0 {
                    k += 1;
                }
            }
            k
        };
        (1..=count)
            .map(|j| {
                let (mut lo, mut hi) = (0.0, 4.0 * diag);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if below(mid) >= j {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    #[test]
    fn subband_spacing_is_three_ground_levels() {
        // ħ = m = W = 1: closed form gives 3π²/2.
        let levels = square_well_levels(4000, 2);
        let gap = levels[1] - levels[0];
        assert!(rel(gap, 3.0 * levels[0]) < 1e-5);
        assert!(rel(gap, 1.5 * PI * PI) < 1e-5);
        let g = QpcGeometry::new(1e-8).unwrap();
        let m = Material::new("m", 0.2, 1.0).unwrap();
        let scaled = 1.5 * PI * PI * CONSTANTS.hbar.powi(2) / (0.2 * CONSTANTS.m_e * 1e-16);
        assert!(rel(qpc_subband_spacing(&g, &m).unwrap(), scaled) < 1e-14);
    }

    #[test]
    fn qpc_snr_values() {
        let g = QpcGeometry::new(20e-9).unwrap();
        let r = qpc_snr(&g, &gaas(), 1.0).unwrap();
        assert!(rel(r.f_unity, 1.017_802_5e13) < 1e-6);
        assert!(rel(r.closed_form_f_unity, r.f_unity) < 1e-12);
        let rydberg = 3.0 * PI * PI * CONSTANTS.ry_freq * (1.0 / 0.067) * (CONSTANTS.a0 / 20e-9).powi(2);
        assert!(rel(r.f_unity, rydberg) < 1e-12);

        let g = QpcGeometry::new(CONSTANTS.a0).unwrap();
        let df = 1e9;
        let r = qpc_snr(&g, &Material::vacuum(), df).unwrap();
        let normalised = r.snr * (CONSTANTS.h * df / CONSTANTS.ry_energy).sqrt();
        assert!(rel(normalised, (3.0 * PI * PI).sqrt()) < 1e-12);
        assert!(rel(normalised, 5.441_398) < 1e-6);

        let unity = qpc_snr(&g, &Material::vacuum(), r.f_unity).unwrap();
        assert!(rel(unity.snr, 1.0) < 1e-12);
    }

    #[test]
    fn island_capacitance_values() {
        let c = set_island_capacitance(&SetGeometry::new(50e-9).unwrap(), 12.9).unwrap();
        assert!(rel(c, 4.568_761e-17) < 1e-6);
        let c1 = set_island_capacitance(&SetGeometry::new(1.0).unwrap(), 1.0).unwrap();
        assert!(rel(c1, 8.0 * CONSTANTS.eps0) < 1e-14);
        assert!(rel(c1, 7.083_35e-11) < 1e-5);
        let c2 = set_island_capacitance(&SetGeometry::new(2.0).unwrap(), 1.0).unwrap();
        assert!(rel(c2, 2.0 * c1) < 1e-15);
        assert!(set_island_capacitance(&SetGeometry { island_radius: 0.0 }, 1.0).is_err());
        assert!(set_island_capacitance(&SetGeometry { island_radius: 1.0 }, 0.5).is_err());
    }

    #[test]
    fn blockade_values() {
        let es = set_blockade(&SetGeometry::new(50e-9).unwrap(), 12.9).unwrap();
        assert!(rel(es.blockade_voltage, 1.753_404e-3) < 1e-6);
        assert!(rel(es.charging_energy / CONSTANTS.e, 1.753_404e-3) < 1e-6);
        assert!(rel(es.charging_energy, CONSTANTS.e * es.blockade_voltage) < 1e-15);
        let huge = blockade_for_capacitance(1e30);
        assert!(huge.blockade_voltage < 1e-48);
    }

    #[test]
    fn set_snr_values() {
        let g = SetGeometry::new(50e-9).unwrap();
        let r = set_snr(&g, 12.9, 1.0).unwrap();
        assert!(rel(r.f_unity, 4.239_712e11) < 1e-6);
        assert!(rel(r.sensitivity, 1.535_790e-6) < 1e-6);
        assert!(r.electrostatics.is_some());

        let g = SetGeometry::new(CONSTANTS.a0 * PI / 2.0).unwrap();
        assert!(rel(set_unity_bandwidth_rydberg(&g, 1.0).unwrap(), CONSTANTS.ry_freq) < 1e-15);
        assert!(rel(set_unity_bandwidth(&g, 1.0).unwrap(), CONSTANTS.ry_freq) < 1e-12);
        let r = set_snr(&g, 1.0, CONSTANTS.ry_freq).unwrap();
        assert!(rel(r.snr, 1.0) < 1e-12);
    }

    #[test]
    fn dispatch_and_sensitivity() {
        let vac = wire(5e-9, Material::vacuum());
        assert!(rel(unity_snr_bandwidth(&vac).unwrap(), 3.289_842e15) < 1e-6);
        assert!(rel(sensitivity(&vac).unwrap(), 1.743_46e-8) < 1e-5);
        let ga = wire(5e-9, gaas());
        assert!(rel(unity_snr_bandwidth(&ga).unwrap(), 1.324_556e12) < 1e-6);
        assert!(rel(sensitivity(&ga).unwrap(), 8.688_90e-7) < 1e-5);
        let set = DeviceSpec::Set {
            geometry: SetGeometry::new(50e-9).unwrap(),
            epsilon_r: 12.9,
        };
        assert!(rel(sensitivity(&set).unwrap(), 1.535_79e-6) < 1e-5);

        for device in [vac, ga, set] {
            let f = unity_snr_bandwidth(&device).unwrap();
            let r = evaluate(&device, f, &DeviceOptions::default()).unwrap();
            assert!(rel(r.snr, 1.0) < 1e-12);
        }
        assert!(matches!("tube".parse::<DeviceKind>(), Err(Error::UnknownDevice(_))));
        assert_eq!("QPC".parse::<DeviceKind>().unwrap(), DeviceKind::Qpc);
    }

    #[test]
    fn non_ideal_options_flagged() {
        let device = wire(50e-9, gaas());
        let ideal = evaluate(&device, 1.0, &DeviceOptions::default()).unwrap();

        let over = DeviceOptions {
            wire_bias: Some(2.0 * ideal.transport.bias),
            ..Default::default()
        };
        let r = evaluate(&device, 1.0, &over).unwrap();
        assert!(matches!(r.validity[0], ValidityFlag::BiasAboveOptimal { .. }));
        // N_m ∝ V so I ∝ V²: SNR doubles
        assert!(rel(r.snr, 2.0 * ideal.snr) < 1e-12);

        let floor = DeviceOptions {
            mode_counting: ModeCounting::Floor,
            ..Default::default()
        };
        let r = evaluate(&device, 1.0, &floor).unwrap();
        assert_eq!(r.transport.modes, ideal.transport.modes.floor());
        assert!(r.snr < ideal.snr);

        let half = DeviceOptions {
            modulation_depth: 0.5,
            ..Default::default()
        };
        let r = evaluate(&device, 1.0, &half).unwrap();
        assert!(rel(r.snr, 0.5 * ideal.snr) < 1e-14);
        assert!(rel(r.f_unity, 0.25 * ideal.f_unity) < 1e-14);
        assert!(rel(r.snr, (r.f_unity / r.bandwidth).sqrt()) < 1e-12);

        let hot = DeviceOptions {
            temperature: 300.0,
            ..Default::default()
        };
        let r = evaluate(&device, 1.0, &hot).unwrap();
        assert!(r.snr < ideal.snr);
        assert!(matches!(r.validity[0], ValidityFlag::ThermalNoiseSignificant { .. }));
        assert!(rel(r.snr, (r.f_unity / r.bandwidth).sqrt()) < 1e-12);

        let bad = DeviceOptions {
            modulation_depth: 0.0,
            ..Default::default()
        };
        assert!(evaluate(&device, 1.0, &bad).is_err());
    }
}
