//! Physical constants, material parameters and effective (screened,
//! mass-scaled) atomic units.
//!
//! Device formulas are written in Gaussian form, where the Coulomb energy of
//! two charges at distance `r` is `e²/r`. In SI that is `e²/(4π·ε₀·r)`; the
//! mapping lives in [`PhysicalConstants::coulomb_e2`] and nowhere else.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, Error, Result};

/// CODATA 2018 reference values that are *not* used to build
/// [`PhysicalConstants`]. They exist so derived quantities can be checked
/// against an independent subset.
pub mod codata2018 {
    /// Fine-structure constant.
    pub const ALPHA: f64 = 7.297_352_569_3e-3;
    /// Rydberg energy R∞·h·c in eV.
    pub const RYDBERG_ENERGY_EV: f64 = 13.605_693_122_994;
    /// Rydberg frequency R∞·c in Hz.
    pub const RYDBERG_FREQUENCY: f64 = 3.289_841_960_250_8e15;
    /// Bohr radius in m.
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Elementary charge (C).
    pub e: f64,
    /// Planck constant (J·s).
    pub h: f64,
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Electron rest mass (kg).
    pub m_e: f64,
    /// Speed of light (m/s).
    pub c: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Vacuum permittivity (F/m).
    pub eps0: f64,
    /// Fine-structure constant, e²/(4π·ε₀·ħ·c).
    pub alpha: f64,
    /// Vacuum Rydberg energy, ½·m_e·c²·α² (J).
    pub ry_energy: f64,
    /// Vacuum Rydberg frequency, Ry/h (Hz).
    pub ry_freq: f64,
    /// Vacuum Bohr radius, 4π·ε₀·ħ²/(m_e·e²) (m).
    pub a0: f64,
}

impl PhysicalConstants {
    /// Base constants from CODATA 2018; everything else is derived from
    /// them so that independent formula routes agree to rounding error.
    pub const fn codata2018() -> Self {
        // exact by SI definition
        let e = 1.602_176_634e-19;
        let h = 6.626_070_15e-34;
        let c = 299_792_458.0;
        let k_b = 1.380_649e-23;
        // recommended values
        let m_e = 9.109_383_701_5e-31;
        let eps0 = 8.854_187_812_8e-12;

        let hbar = h / (2.0 * PI);
        let alpha = e * e / (4.0 * PI * eps0 * hbar * c);
        let ry_energy = 0.5 * m_e * c * c * alpha * alpha;
        let a0 = 4.0 * PI * eps0 * hbar * hbar / (m_e * e * e);
        Self {
            e,
            h,
            hbar,
            m_e,
            c,
            k_b,
            eps0,
            alpha,
            ry_energy,
            ry_freq: ry_energy / h,
            a0,
        }
    }

    /// SI value of the Gaussian `e²`, i.e. `e²/(4π·ε₀)` in J·m.
    ///
    /// Any Gaussian expression `e²/L` or `e/(ε_r·L)` becomes SI by routing its
    /// `e²` (or `e`) through this factor.
    pub fn coulomb_e2(&self) -> f64 {
        self.e * self.e / (4.0 * PI * self.eps0)
    }

    /// Conductance quantum of one spin-resolved mode, e²/h (S).
    pub fn conductance_quantum(&self) -> f64 {
        self.e * self.e / self.h
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        CONSTANTS
    }
}

/// The pinned constant set used throughout the crate.
pub const CONSTANTS: PhysicalConstants = PhysicalConstants::codata2018();

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// m*/m_e.
    pub m_star_ratio: f64,
    /// Relative (static) dielectric constant.
    pub epsilon_r: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, m_star_ratio: f64, epsilon_r: f64) -> Result<Self> {
        let material = Self {
            name: name.into(),
            m_star_ratio,
            epsilon_r,
        };
        material.validate()?;
        Ok(material)
    }

    pub fn vacuum() -> Self {
        Self {
            name: "vacuum".to_owned(),
            m_star_ratio: 1.0,
            epsilon_r: 1.0,
        }
    }

    /// GaAs-like conduction band: m*/m = 0.067, ε_r = 12.9.
    pub fn gaas_like() -> Self {
        Self {
            name: "gaas".to_owned(),
            m_star_ratio: 0.067,
            epsilon_r: 12.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m_star_ratio.is_finite() && self.m_star_ratio > 0.0) {
            return Err(Error::domain(
                "m_star_ratio",
                self.m_star_ratio,
                "effective mass ratio must be > 0",
            ));
        }
        if !(self.epsilon_r.is_finite() && self.epsilon_r >= 1.0) {
            return Err(Error::domain(
                "epsilon_r",
                self.epsilon_r,
                "relative dielectric constant must be >= 1",
            ));
        }
        Ok(())
    }
}

/// Rydberg and Bohr scales of a hydrogenic impurity in a material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveScales {
    /// Effective Rydberg energy Ry* (J).
    pub ry_star_energy: f64,
    /// Ry*/h (Hz).
    pub ry_star_freq: f64,
    /// Effective Bohr radius a* (m).
    pub a_star: f64,
    /// m*/(m·ε_r²).
    pub scale_factor: f64,
}

pub fn effective_scales(material: &Material) -> Result<EffectiveScales> {
    material.validate()?;
    let scale_factor = material.m_star_ratio / (material.epsilon_r * material.epsilon_r);
    Ok(EffectiveScales {
        ry_star_energy: CONSTANTS.ry_energy * scale_factor,
        ry_star_freq: CONSTANTS.ry_freq * scale_factor,
        a_star: CONSTANTS.a0 * material.epsilon_r / material.m_star_ratio,
        scale_factor,
    })
}

pub fn energy_to_frequency(energy: f64) -> f64 {
    energy / CONSTANTS.h
}

pub fn frequency_to_energy(frequency: f64) -> f64 {
    frequency * CONSTANTS.h
}

pub fn energy_to_temperature(energy: f64) -> f64 {
    energy / CONSTANTS.k_b
}

pub fn temperature_to_energy(temperature: f64) -> f64 {
    temperature * CONSTANTS.k_b
}

pub fn ev_to_joule(ev: f64) -> f64 {
    ev * CONSTANTS.e
}

pub fn joule_to_ev(joule: f64) -> f64 {
    joule / CONSTANTS.e
}

/// Bias above which shot noise exceeds Johnson noise: 2·k_B·T/e.
pub fn thermal_voltage_threshold(temperature: f64) -> Result<f64> {
    require_non_negative("temperature", temperature)?;
    Ok(2.0 * CONSTANTS.k_b * temperature / CONSTANTS.e)
}

/// Named materials, case-insensitive lookup. Later entries replace earlier
/// ones with the same name.
#[derive(Debug, Clone, Default)]
pub struct MaterialTable {
    entries: Vec<Material>,
}

pub const BUNDLED_MATERIALS: &str = include_str!("materials.txt");

/// Environment variable naming an extra material table.
pub const MATERIALS_ENV: &str = "CHARGE_LIMIT_MATERIALS";

impl MaterialTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_MATERIALS).expect("bundled material table is valid")
    }

    /// Parse `name m_star_ratio epsilon_r` records; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |message: String| Error::MaterialParse {
                line: idx + 1,
                message,
            };
            if fields.len() != 3 {
                return Err(err(format!(
                    "expected 'name m_star_ratio epsilon_r', found {} fields",
                    fields.len()
                )));
            }
            let number = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| err(format!("'{s}' is not a number")))
            };
            let material = Material::new(fields[0], number(fields[1])?, number(fields[2])?)
                .map_err(|e| err(e.to_string()))?;
            table.insert(material);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Bundled table, extended by `extra` if given, else by the file named in
    /// `CHARGE_LIMIT_MATERIALS` if set.
    pub fn with_user_table(extra: Option<&Path>) -> Result<Self> {
        let mut table = Self::bundled();
        let env_path = std::env::var_os(MATERIALS_ENV).map(std::path::PathBuf::from);
        if let Some(path) = extra.map(Path::to_path_buf).or(env_path) {
            table.extend(Self::load(&path)?);
        }
        Ok(table)
    }

    pub fn insert(&mut self, material: Material) {
        match self
            .entries
            .iter_mut()
            .find(|m| m.name.eq_ignore_ascii_case(&material.name))
        {
            Some(slot) => *slot = material,
            None => self.entries.push(material),
        }
    }

    pub fn extend(&mut self, other: MaterialTable) {
        for material in other.entries {
            self.insert(material);
        }
    }

    pub fn get(&self, name: &str) -> Result<&Material> {
        self.entries
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownMaterial(name.to_owned()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.entries.iter()
    }
}
