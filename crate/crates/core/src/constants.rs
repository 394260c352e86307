//! CODATA 2018 fundamental constants (SI).

use serde::Serialize;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// The constant set used throughout, echoed into reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mu_b: f64,
    pub e_charge: f64,
    pub epsilon_0: f64,
    pub atomic_mass_unit: f64,
    pub speed_of_light: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    hbar: HBAR,
    mu_b: BOHR_MAGNETON,
    e_charge: ELEMENTARY_CHARGE,
    epsilon_0: VACUUM_PERMITTIVITY,
    atomic_mass_unit: ATOMIC_MASS_UNIT,
    speed_of_light: SPEED_OF_LIGHT,
};

/// e²/(4πε₀), the Coulomb coupling in J·m.
pub fn coulomb_constant() -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive() {
        let c = CODATA_2018;
        for v in [
            c.hbar,
            c.mu_b,
            c.e_charge,
            c.epsilon_0,
            c.atomic_mass_unit,
            c.speed_of_light,
        ] {
            assert!(v > 0.0);
        }
    }

    #[test]
    fn hbar_matches_planck_constant() {
        let h = 6.626_070_15e-34;
        let rel = (h / (2.0 * std::f64::consts::PI) - HBAR).abs() / HBAR;
        assert!(rel < 1e-9, "{rel}");
    }
}
