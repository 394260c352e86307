//! Breit–Rabi energies of the qubit pair |1⟩ = |F=1, m_F=+1⟩ and
//! |0⟩ = |F=0, m_F=0⟩ of a J = 1/2, I = 1/2 ground state.
//!
//! Fields are the signed component along the trap axis. With the field
//! parameter x = (g_J − g_I)·μ_B·B/E_HFS:
//!
//! * E₁(B) = E_HFS/4 + μ_B·B·(g_J + g_I)/2
//! * E₀(B) = −E_HFS/4 − (E_HFS/2)·√(1 + x²)
//!
//! Both expressions are analytic through B = 0, so a chain straddling the
//! field zero of a pure gradient (b₀ = 0) keeps its level labels.

use serde::Serialize;

use crate::config::TrapConfig;
use crate::constants::{BOHR_MAGNETON, HBAR};
use crate::species::IonSpecies;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Level {
    /// |1⟩ = |F=1, m_F=+1⟩
    Upper,
    /// |0⟩ = |F=0, m_F=0⟩
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QubitLevels {
    pub species: IonSpecies,
}

impl QubitLevels {
    pub fn new(species: IonSpecies) -> Self {
        QubitLevels { species }
    }

    pub fn for_config(config: &TrapConfig) -> Self {
        Self::new(config.species.clone())
    }

    /// E_HFS = ħ·ω_HFS, J.
    pub fn hyperfine_energy(&self) -> f64 {
        HBAR * self.species.hyperfine_splitting
    }

    /// x(B), dimensionless.
    pub fn field_parameter(&self, field: f64) -> f64 {
        (self.species.g_j - self.species.g_i()) * BOHR_MAGNETON * field / self.hyperfine_energy()
    }

    /// Field at which μ_B·B = E_HFS.
    pub fn hyperfine_field(&self) -> f64 {
        self.hyperfine_energy() / BOHR_MAGNETON
    }

    /// Level energy in J.
    pub fn breit_rabi_energy(&self, field: f64, which: Level) -> f64 {
        let e = self.hyperfine_energy();
        match which {
            Level::Upper => e / 4.0 + BOHR_MAGNETON * field * (self.species.g_j + self.species.g_i()) / 2.0,
            Level::Lower => {
                let x = self.field_parameter(field);
                -e / 4.0 - e / 2.0 * (1.0 + x * x).sqrt()
            }
        }
    }

    /// κ = (∂E/∂B)/μ_B.
    pub fn kappa(&self, field: f64, which: Level) -> f64 {
        let gj = self.species.g_j;
        let gi = self.species.g_i();
        match which {
            Level::Upper => (gj + gi) / 2.0,
            Level::Lower => {
                let x = self.field_parameter(field);
                -(gj - gi) / 2.0 * x / (1.0 + x * x).sqrt()
            }
        }
    }

    /// |κ₁ − κ₀| at `field`.
    pub fn kappa_difference(&self, field: f64) -> f64 {
        (self.kappa(field, Level::Upper) - self.kappa(field, Level::Lower)).abs()
    }

    /// ω(B) − ω_HFS in rad/s, evaluated without cancelling the large
    /// zero-field splitting.
    pub fn resonance_shift(&self, field: f64) -> f64 {
        let e = self.hyperfine_energy();
        let x = self.field_parameter(field);
        let s = (1.0 + x * x).sqrt();
        let linear = BOHR_MAGNETON * field * (self.species.g_j + self.species.g_i()) / 2.0;
        let quadratic = e / 2.0 * x * x / (s + 1.0);
        (linear + quadratic) / HBAR
    }

    /// Qubit transition frequency (E₁ − E₀)/ħ at `field`, rad/s.
    pub fn transition_frequency(&self, field: f64) -> f64 {
        self.species.hyperfine_splitting + self.resonance_shift(field)
    }

    /// ω(z) at axial position `z` of the configured field profile, rad/s.
    pub fn resonance_frequency(&self, config: &TrapConfig, z: f64) -> f64 {
        self.transition_frequency(config.field_at(z))
    }

    /// ∂ω/∂z at `z`, rad/(s·m).
    pub fn resonance_slope(&self, config: &TrapConfig, z: f64) -> f64 {
        let b = config.field_at(z);
        (self.kappa(b, Level::Upper) - self.kappa(b, Level::Lower)) * BOHR_MAGNETON * config.gradient_b / HBAR
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn yb() -> QubitLevels {
        QubitLevels::new(IonSpecies::yb171())
    }

    #[test]
    fn zero_field_splitting() {
        let l = yb();
        let d = l.breit_rabi_energy(0.0, Level::Upper) - l.breit_rabi_energy(0.0, Level::Lower);
        assert!((d / l.hyperfine_energy() - 1.0).abs() < 1e-15);
        assert!((l.transition_frequency(0.0) - TAU * 12.6e9).abs() < 1e-3);
    }

    #[test]
    fn weak_and_unit_field_kappas() {
        let l = yb();
        assert_eq!(l.kappa(0.0, Level::Upper), 1.0);
        assert_eq!(l.kappa(0.0, Level::Lower), 0.0);
        // μ_B·B = E_HFS gives x = 2 and κ₀ = −2/√5.
        let b = l.hyperfine_field();
        assert!((l.field_parameter(b) - 2.0).abs() < 1e-14);
        let k0 = l.kappa(b, Level::Lower);
        assert!((k0 + 2.0 / 5f64.sqrt()).abs() < 1e-14);
        assert!((k0 + 0.894).abs() < 0.001);
        assert_eq!(l.kappa(b, Level::Upper), 1.0);
    }

    #[test]
    fn small_field_taylor_expansion() {
        // E₀ ≈ −3E/4 − x²E/4 for small x.
        let l = yb();
        let e = l.hyperfine_energy();
        for x in [1e-4, 1e-3, 1e-2] {
            let b = x * l.hyperfine_field() / 2.0;
            let exact = l.breit_rabi_energy(b, Level::Lower);
            let taylor = -0.75 * e - x * x * e / 4.0;
            assert!(((exact - taylor) / e).abs() < x.powi(4) / 8.0 + 1e-15);
        }
    }

    #[test]
    fn kappa_matches_finite_difference() {
        let l = yb();
        let scale = l.hyperfine_field();
        for frac in [0.01, 0.3, 1.0, 3.0, -0.5] {
            let b = frac * scale;
            let h = 1e-5 * scale;
            for which in [Level::Upper, Level::Lower] {
                let fd = (l.breit_rabi_energy(b + h, which) - l.breit_rabi_energy(b - h, which))
                    / (2.0 * h)
                    / BOHR_MAGNETON;
                let k = l.kappa(b, which);
                assert!((fd - k).abs() <= 1e-8 * k.abs().max(1e-3), "{fd} {k}");
            }
        }
    }

    #[test]
    fn kappa_lower_bounds() {
        let l = yb();
        let mut prev = 1.0;
        for i in 0..200 {
            let b = i as f64 * 0.05 * l.hyperfine_field();
            let k = l.kappa(b, Level::Lower);
            assert!(k <= 0.0 && k > -1.0);
            assert!(k <= prev);
            prev = k;
        }
        assert!(l.kappa(1e6 * l.hyperfine_field(), Level::Lower) < -0.999_999);
    }

    #[test]
    fn shift_agrees_with_energy_difference() {
        let l = yb();
        for b in [1e-4, 0.01, 0.3] {
            let direct = (l.breit_rabi_energy(b, Level::Upper) - l.breit_rabi_energy(b, Level::Lower)) / HBAR
                - l.species.hyperfine_splitting;
            let shift = l.resonance_shift(b);
            assert!(
                (direct - shift).abs() < 1e-6 * shift.abs().max(1e3),
                "{direct} {shift}"
            );
        }
    }

    #[test]
    fn resonance_profile() {
        let l = yb();
        let flat = TrapConfig::new(IonSpecies::yb171(), 3, TAU * 1e5, None, 0.0, 0.0).unwrap();
        assert_eq!(l.resonance_frequency(&flat, 1e-5), l.species.hyperfine_splitting);
        let c = flat.with_gradient(10.0).unwrap();
        let slope = l.resonance_slope(&c, 0.0);
        assert!((slope - BOHR_MAGNETON * 10.0 / HBAR).abs() < 1e-6 * slope);
        let mut prev = f64::NEG_INFINITY;
        for i in -50..50 {
            let w = l.resonance_frequency(&c, i as f64 * 1e-6);
            assert!(w > prev);
            prev = w;
        }
    }
}
