//! Gradient-induced spin–phonon coupling, Lamb–Dicke parameters, addressing
//! spectra and the minimum gradient for frequency-space addressing.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::config::TrapConfig;
use crate::constants::{coulomb_constant, BOHR_MAGNETON, HBAR, SPEED_OF_LIGHT};
use crate::crystal::ChainSolution;
use crate::error::{Error, Result};
use crate::zeeman::QubitLevels;

/// A frequency given both in rad/s and in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequency {
    pub rad_per_s: f64,
    pub hz: f64,
}

impl From<f64> for Frequency {
    fn from(rad_per_s: f64) -> Self {
        Frequency {
            rad_per_s,
            hz: rad_per_s / TAU,
        }
    }
}

/// Driving microwave/rf field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveField {
    /// ω_M, rad/s
    pub drive_frequency: f64,
    /// θ between propagation direction and trap axis, rad
    pub incidence_angle: f64,
    /// Ω_R, rad/s
    pub rabi_frequency: f64,
}

impl DriveField {
    pub fn new(drive_frequency: f64, incidence_angle: f64, rabi_frequency: f64) -> Result<Self> {
        let d = DriveField {
            drive_frequency,
            incidence_angle,
            rabi_frequency,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.drive_frequency.is_finite() && self.drive_frequency > 0.0) {
            return Err(Error::InvalidArgument("drive frequency ω_M > 0 violated".into()));
        }
        if !(self.rabi_frequency.is_finite() && self.rabi_frequency >= 0.0) {
            return Err(Error::InvalidArgument("Rabi frequency Ω_R ≥ 0 violated".into()));
        }
        if !(0.0..=PI / 2.0).contains(&self.incidence_angle) {
            return Err(Error::InvalidArgument(
                "incidence angle θ ∈ [0, π/2] violated".into(),
            ));
        }
        Ok(())
    }

    /// k_z = (ω_M/c)·cos θ, 1/m.
    pub fn axial_wavenumber(&self) -> f64 {
        self.drive_frequency / SPEED_OF_LIGHT * self.incidence_angle.cos()
    }
}

/// Ground-state extent Δz = √(ħ/2mω), m.
pub fn ground_state_extent(mass: f64, omega: f64) -> f64 {
    (HBAR / (2.0 * mass * omega)).sqrt()
}

/// ε_c = ζ·Δz·|κ₁ − κ₀|·μ_B·b/(ħω_l) for ion `ion` and mode `mode`, with κ
/// taken at the ion's local field and ζ its exact mode-vector component.
pub fn epsilon_c(
    config: &TrapConfig,
    chain: &ChainSolution,
    levels: &QubitLevels,
    ion: usize,
    mode: usize,
) -> Result<f64> {
    let zeta = chain.zeta(ion, mode)?.abs();
    let omega = chain.mode_frequency(mode)?;
    let field = config.field_at(chain.positions[ion]);
    let dz = ground_state_extent(config.species.mass, omega);
    Ok(zeta * dz * levels.kappa_difference(field) * BOHR_MAGNETON * config.gradient_b / (HBAR * omega))
}

/// Photon-recoil Lamb–Dicke parameter η = ζ·√(ħk_z²/2mω_l).
pub fn lamb_dicke(
    config: &TrapConfig,
    chain: &ChainSolution,
    drive: &DriveField,
    ion: usize,
    mode: usize,
) -> Result<f64> {
    drive.validate()?;
    let zeta = chain.zeta(ion, mode)?.abs();
    let omega = chain.mode_frequency(mode)?;
    let k = drive.axial_wavenumber();
    Ok(zeta * (HBAR * k * k / (2.0 * config.species.mass * omega)).sqrt())
}

/// η′ = √(η² + ε_c²), the modulus of the complex coupling η + iε_c.
pub fn effective_lamb_dicke(eta: f64, epsilon_c: f64) -> f64 {
    eta.hypot(epsilon_c)
}

/// Smallest gradient that separates the bus sideband of one ion from the
/// highest-mode sideband of its neighbour by at least ω_z, using the
/// empirical spacing and highest-mode laws. κ is evaluated at B = b₀.
pub fn required_gradient(config: &TrapConfig, levels: &QubitLevels) -> Result<f64> {
    if config.n_ions < 2 {
        return Err(Error::TooFewIons {
            needed: 2,
            got: config.n_ions,
        });
    }
    let n = config.n_ions as f64;
    let dk = levels.kappa_difference(config.offset_b0);
    let mass_term = (config.species.mass / coulomb_constant()).cbrt();
    Ok(HBAR / (2.0 * BOHR_MAGNETON) / dk
        * mass_term
        * config.omega_z.powf(5.0 / 3.0)
        * (4.7 * n.powf(0.56) + 0.5 * n.powf(1.56)))
}

/// Resonances of one ion: carrier and first-order sidebands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IonLines {
    pub ion: usize,
    pub position: f64,
    /// rad/s
    pub carrier: f64,
    /// carrier − ω_l for each mode l, rad/s
    pub red: Vec<f64>,
    /// carrier + ω_l, rad/s
    pub blue: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub mode_frequencies: Vec<f64>,
    pub ions: Vec<IonLines>,
}

pub fn spectrum(config: &TrapConfig, chain: &ChainSolution, levels: &QubitLevels) -> Spectrum {
    let ions = chain
        .positions
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let carrier = levels.resonance_frequency(config, z);
            IonLines {
                ion: i,
                position: z,
                carrier,
                red: chain.mode_frequencies.iter().map(|w| carrier - w).collect(),
                blue: chain.mode_frequencies.iter().map(|w| carrier + w).collect(),
            }
        })
        .collect();
    Spectrum {
        mode_frequencies: chain.mode_frequencies.clone(),
        ions,
    }
}

/// Signed separation between the bus-mode sideband of one ion and the
/// highest-mode sideband of its spectral neighbour, minimised over adjacent
/// pairs and both orderings. The addressing requirement is gap ≥ ω_l.
pub fn min_spectral_gap(spectrum: &Spectrum, bus_mode: usize) -> Result<f64> {
    let n = spectrum.ions.len();
    if n < 2 {
        return Err(Error::TooFewIons { needed: 2, got: n });
    }
    let bus = *spectrum
        .mode_frequencies
        .get(bus_mode)
        .ok_or(Error::InvalidMode {
            index: bus_mode,
            n_modes: spectrum.mode_frequencies.len(),
        })?;
    let top = spectrum
        .mode_frequencies
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut carriers: Vec<f64> = spectrum.ions.iter().map(|l| l.carrier).collect();
    carriers.sort_by(f64::total_cmp);
    let gap = carriers
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let a = (hi - bus) - (lo + top);
            let b = (hi - top) - (lo + bus);
            a.min(b)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(gap)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IonCoupling {
    pub ion: usize,
    /// m
    pub position: f64,
    /// T
    pub local_field: f64,
    pub resonance: Frequency,
    pub epsilon_c: f64,
    pub eta: f64,
    pub eta_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub bus_mode: usize,
    pub bus_frequency: Frequency,
    pub ions: Vec<IonCoupling>,
    /// T/m; `None` for a single ion.
    pub required_gradient: Option<f64>,
    /// rad/s; `None` for a single ion.
    pub min_spectral_gap: Option<f64>,
    /// gap / ω_l
    pub gap_ratio: Option<f64>,
    /// True when B(z) changes sign inside the crystal.
    pub field_zero_crossing: bool,
}

pub fn coupling_report(
    config: &TrapConfig,
    chain: &ChainSolution,
    levels: &QubitLevels,
    drive: &DriveField,
    bus_mode: usize,
) -> Result<CouplingReport> {
    let bus = chain.mode_frequency(bus_mode)?;
    let ions = (0..chain.n_ions())
        .map(|i| {
            let eps = epsilon_c(config, chain, levels, i, bus_mode)?;
            let eta = lamb_dicke(config, chain, drive, i, bus_mode)?;
            let z = chain.positions[i];
            Ok(IonCoupling {
                ion: i,
                position: z,
                local_field: config.field_at(z),
                resonance: levels.resonance_frequency(config, z).into(),
                epsilon_c: eps,
                eta,
                eta_eff: effective_lamb_dicke(eta, eps),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (required, gap) = if chain.n_ions() >= 2 {
        let spec = spectrum(config, chain, levels);
        (
            Some(required_gradient(config, levels)?),
            Some(min_spectral_gap(&spec, bus_mode)?),
        )
    } else {
        (None, None)
    };
    let fields: Vec<f64> = ions.iter().map(|c| c.local_field).collect();
    let field_zero_crossing = fields.iter().any(|b| *b < 0.0) && fields.iter().any(|b| *b > 0.0);
    Ok(CouplingReport {
        bus_mode,
        bus_frequency: bus.into(),
        ions,
        required_gradient: required,
        min_spectral_gap: gap,
        gap_ratio: gap.map(|g| g / bus),
        field_zero_crossing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{solve_chain, ExtraForces};
    use crate::species::IonSpecies;

    fn setup(n: usize, fz: f64, b: f64) -> (TrapConfig, ChainSolution, QubitLevels) {
        let c = TrapConfig::new(IonSpecies::yb171(), n, TAU * fz, None, b, 0.0).unwrap();
        let chain = solve_chain(&c, &ExtraForces::zero(n)).unwrap();
        let l = QubitLevels::for_config(&c);
        (c, chain, l)
    }

    #[test]
    fn no_gradient_no_coupling() {
        let (c, chain, l) = setup(5, 1e5, 0.0);
        for i in 0..5 {
            assert_eq!(epsilon_c(&c, &chain, &l, i, 0).unwrap(), 0.0);
        }
        assert!(matches!(
            epsilon_c(&c, &chain, &l, 0, 7),
            Err(Error::InvalidMode { .. })
        ));
    }

    #[test]
    fn epsilon_c_scaling() {
        let (c, chain, l) = setup(4, 1e5, 5.0);
        let e1 = epsilon_c(&c, &chain, &l, 1, 0).unwrap();
        let c2 = c.with_gradient(10.0).unwrap();
        let e2 = epsilon_c(&c2, &chain, &l, 1, 0).unwrap();
        assert!((e2 / e1 - 2.0).abs() < 1e-3);
        // ω_l^(−3/2) at fixed ζ: compare the COM mode of two traps a decade apart
        let (c10, chain10, _) = setup(4, 1e6, 5.0);
        let e10 = epsilon_c(&c10, &chain10, &l, 1, 0).unwrap();
        assert!((e1 / e10 - 10f64.powf(1.5)).abs() < 1e-3 * 10f64.powf(1.5));
    }

    #[test]
    fn lamb_dicke_examples() {
        let (c, chain, _) = setup(3, 1e5, 0.0);
        let side = DriveField::new(TAU * 12.6e9, PI / 2.0, 1.0).unwrap();
        assert!(lamb_dicke(&c, &chain, &side, 0, 0).unwrap() < 1e-20);
        let d1 = DriveField::new(TAU * 12.6e9, 0.0, 1.0).unwrap();
        let d2 = DriveField::new(TAU * 25.2e9, 0.0, 1.0).unwrap();
        let a = lamb_dicke(&c, &chain, &d1, 0, 0).unwrap();
        let b = lamb_dicke(&c, &chain, &d2, 0, 0).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        assert!(DriveField::new(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn effective_parameter() {
        assert_eq!(effective_lamb_dicke(0.0, 0.0075), 0.0075);
        assert!((effective_lamb_dicke(3e-3, 4e-3) - 5e-3).abs() < 1e-18);
        assert!((effective_lamb_dicke(7e-7, 0.0075) - 0.0075).abs() < 1e-8);
    }

    #[test]
    fn required_gradient_scaling_and_errors() {
        let (c, _, l) = setup(10, 1e5, 0.0);
        let b1 = required_gradient(&c, &l).unwrap();
        let (c10, _, _) = setup(10, 1e6, 0.0);
        let b10 = required_gradient(&c10, &l).unwrap();
        assert!((b10 / b1 / 10f64.powf(5.0 / 3.0) - 1.0).abs() < 1e-10);
        let (c1, _, _) = setup(1, 1e5, 0.0);
        assert!(matches!(
            required_gradient(&c1, &l),
            Err(Error::TooFewIons { .. })
        ));
    }

    #[test]
    fn single_ion_spectrum() {
        let (c, chain, l) = setup(1, 1e5, 0.0);
        let s = spectrum(&c, &chain, &l);
        assert_eq!(s.ions.len(), 1);
        assert!((s.ions[0].carrier - TAU * 12.6e9).abs() < 1e-3);
        assert!((s.ions[0].blue[0] - s.ions[0].carrier - c.omega_z).abs() < 1e-3);
        assert!(min_spectral_gap(&s, 0).is_err());
    }

    #[test]
    fn two_ion_carrier_splitting() {
        let (c, chain, l) = setup(2, 1e5, 20.0);
        let s = spectrum(&c, &chain, &l);
        let split = s.ions[1].carrier - s.ions[0].carrier;
        let dz = chain.positions[1] - chain.positions[0];
        let expect = BOHR_MAGNETON * 20.0 * dz / HBAR;
        assert!((split / expect - 1.0).abs() < 1e-6, "{split} {expect}");
    }

    #[test]
    fn gap_without_gradient_fails_requirement() {
        let (c, chain, l) = setup(4, 1e5, 0.0);
        let gap = min_spectral_gap(&spectrum(&c, &chain, &l), 0).unwrap();
        assert!(gap < 0.0);
    }

    #[test]
    fn gap_at_required_gradient() {
        let (c, _, l) = setup(10, 1e5, 0.0);
        let b = required_gradient(&c, &l).unwrap();
        let c = c.with_gradient(b).unwrap();
        let chain = solve_chain(&c, &ExtraForces::zero(10)).unwrap();
        let s = spectrum(&c, &chain, &l);
        let r1 = min_spectral_gap(&s, 0).unwrap() / c.omega_z;
        assert!(r1 >= 0.97, "{r1}");
        let c2 = c.with_gradient(2.0 * b).unwrap();
        let s2 = spectrum(&c2, &chain, &l);
        let r2 = min_spectral_gap(&s2, 0).unwrap() / c.omega_z;
        assert!(r2 >= 2.0, "{r2}");
    }
}
