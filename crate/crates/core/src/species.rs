//! Ion species data and the built-in registry.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::constants::{ATOMIC_MASS_UNIT, ELECTRON_MASS};
use crate::error::{Error, Result};

/// One ion type: mass, ground-state hyperfine splitting and the g-factors
/// entering the Breit–Rabi formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// Zero-field hyperfine splitting, rad/s.
    pub hyperfine_splitting: f64,
    /// Electronic g-factor.
    pub g_j: f64,
    /// Nuclear g-factor in units of `g_j`. Zero neglects the nuclear moment.
    #[serde(default)]
    pub g_i_over_g_j: f64,
}

pub const YB171_NAME: &str = "171Yb+";

impl IonSpecies {
    /// ¹⁷¹Yb⁺ with the 12.6 GHz ground-state splitting and gJ = 2, gI = 0.
    pub fn yb171() -> Self {
        IonSpecies {
            name: YB171_NAME.to_string(),
            // neutral-atom mass minus one electron
            mass: 170.936_325_8 * ATOMIC_MASS_UNIT - ELECTRON_MASS,
            hyperfine_splitting: TAU * 12.6e9,
            g_j: 2.0,
            g_i_over_g_j: 0.0,
        }
    }

    /// Looks up a built-in species. Accepts a few common spellings of the
    /// isotope label.
    pub fn lookup(name: &str) -> Result<Self> {
        let key: String = name
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '^' && *c != '-' && *c != '_')
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "171yb+" | "yb171+" | "171yb" | "yb171" | "171ybii" => Ok(Self::yb171()),
            _ => Err(Error::UnknownSpecies(name.to_string())),
        }
    }

    /// Names of all built-in species.
    pub fn registry() -> Vec<Self> {
        vec![Self::yb171()]
    }

    pub fn g_i(&self) -> f64 {
        self.g_j * self.g_i_over_g_j
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidConfig("species mass > 0 violated".into()));
        }
        if !(self.hyperfine_splitting.is_finite() && self.hyperfine_splitting > 0.0) {
            return Err(Error::InvalidConfig(
                "species hyperfine_splitting > 0 violated".into(),
            ));
        }
        if !(self.g_j.is_finite() && self.g_j > 0.0) {
            return Err(Error::InvalidConfig("species g_j > 0 violated".into()));
        }
        if !self.g_i_over_g_j.is_finite() || self.g_i_over_g_j.abs() >= 1.0 {
            return Err(Error::InvalidConfig("species |g_i_over_g_j| < 1 violated".into()));
        }
        Ok(())
    }
}
