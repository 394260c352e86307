//! Trap configuration: the structured-text document, validation and the
//! radial linearity criterion.
//!
//! The document is TOML (JSON with the same keys is accepted too):
//!
//! ```toml
//! schema_version = 1
//! frequency_units = "Hz"      # or "rad/s"; applies to every frequency below
//! species = "171Yb+"          # or an explicit [species] table
//! n_ions = 10
//! omega_z = 1.0e5             # axial trap frequency
//! omega_r = 1.0e6             # radial; optional
//! gradient_b = 9.89           # T/m
//! offset_b0 = 0.0             # T; optional, default 0
//!
//! [drive]                     # optional, used by reports and `evolve`
//! drive_frequency = 12.6e9
//! incidence_angle = 0.0       # rad
//! rabi_frequency = 1.0e4
//! ```
//!
//! An explicit species table takes `name`, `mass_kg` or `mass_amu`,
//! `hyperfine_splitting` (in `frequency_units`), `g_j` (default 2) and
//! `g_i_over_g_j` (default 0).

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::constants::ATOMIC_MASS_UNIT;
use crate::error::{Error, Result};
use crate::species::IonSpecies;

pub const SCHEMA_VERSION: u32 = 1;

/// ω_r chosen as this multiple of the linearity threshold when the document
/// leaves it out.
pub const DEFAULT_RADIAL_MARGIN: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub species: IonSpecies,
    pub n_ions: usize,
    /// Axial trap frequency, rad/s.
    pub omega_z: f64,
    /// Radial trap frequency, rad/s.
    pub omega_r: f64,
    /// Axial field gradient b, T/m.
    pub gradient_b: f64,
    /// Field offset b₀ at the trap centre, T.
    pub offset_b0: f64,
}

impl TrapConfig {
    /// Builds and validates a configuration. A `None` radial frequency is
    /// replaced by [`DEFAULT_RADIAL_MARGIN`] times the linearity threshold.
    pub fn new(
        species: IonSpecies,
        n_ions: usize,
        omega_z: f64,
        omega_r: Option<f64>,
        gradient_b: f64,
        offset_b0: f64,
    ) -> Result<Self> {
        let omega_r =
            omega_r.unwrap_or_else(|| DEFAULT_RADIAL_MARGIN * linearity_threshold(n_ions.max(1)) * omega_z);
        let config = TrapConfig {
            species,
            n_ions,
            omega_z,
            omega_r,
            gradient_b,
            offset_b0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        if self.n_ions < 1 {
            return Err(Error::InvalidConfig("n_ions ≥ 1 violated".into()));
        }
        if !(self.omega_z.is_finite() && self.omega_z > 0.0) {
            return Err(Error::InvalidConfig("omega_z > 0 violated".into()));
        }
        if !(self.omega_r.is_finite() && self.omega_r > 0.0) {
            return Err(Error::InvalidConfig("omega_r > 0 violated".into()));
        }
        if !(self.gradient_b.is_finite() && self.gradient_b >= 0.0) {
            return Err(Error::InvalidConfig("gradient_b ≥ 0 violated".into()));
        }
        if !(self.offset_b0.is_finite() && self.offset_b0 >= 0.0) {
            return Err(Error::InvalidConfig("offset_b0 ≥ 0 violated".into()));
        }
        Ok(())
    }

    /// Same trap with a different gradient.
    pub fn with_gradient(&self, gradient_b: f64) -> Result<Self> {
        let mut c = self.clone();
        c.gradient_b = gradient_b;
        c.validate()?;
        Ok(c)
    }

    /// B(z) = b·z + b₀ along the trap axis, T.
    pub fn field_at(&self, z: f64) -> f64 {
        self.gradient_b * z + self.offset_b0
    }

    /// Serializes to a configuration document (frequencies in rad/s, explicit
    /// species table) that [`load_config`] maps back to `self`.
    pub fn to_document_string(&self) -> String {
        let doc = ConfigDocument {
            schema_version: Some(SCHEMA_VERSION),
            frequency_units: Some(FrequencyUnits::RadPerSecond),
            species: Some(SpeciesEntry::Table(SpeciesTable {
                name: self.species.name.clone(),
                mass_kg: Some(self.species.mass),
                mass_amu: None,
                hyperfine_splitting: self.species.hyperfine_splitting,
                g_j: self.species.g_j,
                g_i_over_g_j: self.species.g_i_over_g_j,
            })),
            n_ions: Some(self.n_ions as i64),
            omega_z: Some(self.omega_z),
            omega_r: Some(self.omega_r),
            gradient_b: Some(self.gradient_b),
            offset_b0: Some(self.offset_b0),
            drive: None,
        };
        toml::to_string(&doc).expect("config document is always representable in TOML")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnits {
    #[serde(rename = "Hz", alias = "hz", alias = "HZ")]
    Hertz,
    #[serde(rename = "rad/s", alias = "rad_per_s", alias = "rad s^-1")]
    RadPerSecond,
}

impl FrequencyUnits {
    /// Converts a value in these units to rad/s.
    pub fn to_angular(self, value: f64) -> f64 {
        match self {
            FrequencyUnits::Hertz => TAU * value,
            FrequencyUnits::RadPerSecond => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum SpeciesEntry {
    Name(String),
    Table(SpeciesTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesTable {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_kg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_amu: Option<f64>,
    hyperfine_splitting: f64,
    #[serde(default = "default_g_j")]
    g_j: f64,
    #[serde(default)]
    g_i_over_g_j: f64,
}

fn default_g_j() -> f64 {
    2.0
}

/// Optional drive section, frequencies still in document units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveDocument {
    pub drive_frequency: Option<f64>,
    pub incidence_angle: Option<f64>,
    pub rabi_frequency: Option<f64>,
}

/// Raw parsed document before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequency_units: Option<FrequencyUnits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    species: Option<SpeciesEntry>,
    #[serde(default, alias = "N", skip_serializing_if = "Option::is_none")]
    n_ions: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_r: Option<f64>,
    #[serde(default, alias = "b", skip_serializing_if = "Option::is_none")]
    gradient_b: Option<f64>,
    #[serde(default, alias = "b0", skip_serializing_if = "Option::is_none")]
    offset_b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveDocument>,
}

/// Drive settings in SI units; absent entries stay `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DriveSettings {
    pub drive_frequency: Option<f64>,
    pub incidence_angle: Option<f64>,
    pub rabi_frequency: Option<f64>,
}

impl ConfigDocument {
    pub fn parse(source: &str) -> Result<Self> {
        let doc: ConfigDocument = if source.trim_start().starts_with('{') {
            serde_json::from_str(source).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            toml::from_str(source).map_err(|e| Error::Parse(e.to_string()))?
        };
        if let Some(v) = doc.schema_version {
            if v == 0 || v > SCHEMA_VERSION {
                return Err(Error::InvalidConfig(format!(
                    "unsupported schema_version {v} (this build reads ≤ {SCHEMA_VERSION})"
                )));
            }
        }
        Ok(doc)
    }

    fn units(&self) -> Result<FrequencyUnits> {
        self.frequency_units.ok_or(Error::MissingField("frequency_units"))
    }

    pub fn trap_config(&self) -> Result<TrapConfig> {
        let units = self.units()?;
        let species = match self.species.as_ref().ok_or(Error::MissingField("species"))? {
            SpeciesEntry::Name(name) => IonSpecies::lookup(name)?,
            SpeciesEntry::Table(t) => {
                let mass = match (t.mass_kg, t.mass_amu) {
                    (Some(kg), None) => kg,
                    (None, Some(amu)) => amu * ATOMIC_MASS_UNIT,
                    (None, None) => return Err(Error::MissingField("species.mass_kg")),
                    (Some(_), Some(_)) => {
                        return Err(Error::InvalidConfig(
                            "give either species.mass_kg or species.mass_amu, not both".into(),
                        ))
                    }
                };
                IonSpecies {
                    name: t.name.clone(),
                    mass,
                    hyperfine_splitting: units.to_angular(t.hyperfine_splitting),
                    g_j: t.g_j,
                    g_i_over_g_j: t.g_i_over_g_j,
                }
            }
        };
        let n = self.n_ions.ok_or(Error::MissingField("n_ions"))?;
        if n < 1 {
            return Err(Error::InvalidConfig("n_ions ≥ 1 violated".into()));
        }
        let omega_z = units.to_angular(self.omega_z.ok_or(Error::MissingField("omega_z"))?);
        let omega_r = self.omega_r.map(|w| units.to_angular(w));
        let gradient_b = self.gradient_b.ok_or(Error::MissingField("gradient_b"))?;
        TrapConfig::new(
            species,
            n as usize,
            omega_z,
            omega_r,
            gradient_b,
            self.offset_b0.unwrap_or(0.0),
        )
    }

    pub fn drive_settings(&self) -> Result<DriveSettings> {
        let Some(d) = &self.drive else {
            return Ok(DriveSettings::default());
        };
        let units = self.units()?;
        Ok(DriveSettings {
            drive_frequency: d.drive_frequency.map(|w| units.to_angular(w)),
            incidence_angle: d.incidence_angle,
            rabi_frequency: d.rabi_frequency.map(|w| units.to_angular(w)),
        })
    }
}

/// Parses and validates a configuration document.
pub fn load_config(source: &str) -> Result<TrapConfig> {
    ConfigDocument::parse(source)?.trap_config()
}

/// 0.73·N^0.86, the smallest ω_r/ω_z that keeps N ions on the axis.
pub fn linearity_threshold(n_ions: usize) -> f64 {
    0.73 * (n_ions as f64).powf(0.86)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Linearity {
    pub linear: bool,
    /// (ω_r/ω_z) / (0.73·N^0.86)
    pub margin: f64,
}

pub fn check_linearity(config: &TrapConfig) -> Linearity {
    let margin = (config.omega_r / config.omega_z) / linearity_threshold(config.n_ions);
    Linearity {
        linear: margin >= 1.0,
        margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn yb(n: usize, ratio: f64) -> TrapConfig {
        let wz = TAU * 1e5;
        TrapConfig::new(IonSpecies::yb171(), n, wz, Some(ratio * wz), 0.0, 0.0).unwrap()
    }

    #[test]
    fn table_one_document() {
        let c = load_config(
            r#"
            frequency_units = "Hz"
            species = "171Yb+"
            N = 10
            omega_z = 1e5
            b = 9.89
            "#,
        )
        .unwrap();
        assert_eq!(c.n_ions, 10);
        assert_eq!(c.omega_z, TAU * 1e5);
        assert_eq!(c.gradient_b, 9.89);
        assert_eq!(c.offset_b0, 0.0);
        assert!(check_linearity(&c).linear);
    }

    #[test]
    fn zero_gradient_two_ions() {
        let c = load_config(
            "frequency_units = \"rad/s\"\nspecies = \"171Yb+\"\nn_ions = 2\nomega_z = 628318.5307179586\ngradient_b = 0.0\n",
        )
        .unwrap();
        assert_eq!(c.gradient_b, 0.0);
        assert_eq!(c.n_ions, 2);
    }

    #[test]
    fn zero_ions_rejected() {
        let err = load_config(
            "frequency_units = \"Hz\"\nspecies = \"171Yb+\"\nn_ions = 0\nomega_z = 1e5\ngradient_b = 1.0\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("n_ions ≥ 1 violated"), "{err}");
    }

    #[test]
    fn error_paths() {
        let base = "frequency_units = \"Hz\"\nspecies = \"171Yb+\"\nn_ions = 3\n";
        assert!(matches!(
            load_config(&format!("{base}gradient_b = 1.0\n")),
            Err(Error::MissingField("omega_z"))
        ));
        assert!(matches!(
            load_config(&format!("{base}omega_z = -1.0\ngradient_b = 1.0\n")),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            load_config(
                "frequency_units = \"Hz\"\nspecies = \"Xx+\"\nn_ions = 3\nomega_z = 1e5\ngradient_b = 0.0\n"
            ),
            Err(Error::UnknownSpecies(_))
        ));
        assert!(matches!(
            load_config("species = \"171Yb+\"\nn_ions = 3\nomega_z = 1e5\ngradient_b = 0.0\n"),
            Err(Error::MissingField("frequency_units"))
        ));
        assert!(matches!(load_config("n_ions = [1,"), Err(Error::Parse(_))));
    }

    #[test]
    fn explicit_species_and_json() {
        let c = load_config(
            r#"{"frequency_units": "Hz", "species": {"name": "toy", "mass_amu": 9.0,
                "hyperfine_splitting": 1.25e9}, "n_ions": 4, "omega_z": 2e6, "gradient_b": 10.0,
                "offset_b0": 1e-3}"#,
        )
        .unwrap();
        assert_eq!(c.species.name, "toy");
        assert_eq!(c.species.g_j, 2.0);
        assert_eq!(c.species.hyperfine_splitting, TAU * 1.25e9);
        assert_eq!(c.offset_b0, 1e-3);
    }

    #[test]
    fn linearity_examples() {
        let l = check_linearity(&yb(1, 0.73));
        assert!(l.linear);
        let l = check_linearity(&yb(10, 5.29));
        assert!(l.linear);
        assert!((l.margin - 1.0007).abs() < 5e-4, "{}", l.margin);
        assert!(!check_linearity(&yb(10, 5.0)).linear);
    }

    #[test]
    fn default_radial_frequency_is_linear() {
        let c = TrapConfig::new(IonSpecies::yb171(), 40, TAU * 1e6, None, 0.0, 0.0).unwrap();
        assert!(check_linearity(&c).linear);
    }
}
