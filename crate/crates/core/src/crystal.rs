//! Linear Coulomb crystal: equilibrium positions and axial normal modes.
//!
//! Everything is solved in dimensionless units u = z/z₀ with
//! z₀ = (e²/4πε₀mω_z²)^(1/3), where the potential energy in units of
//! mω_z²z₀² reads
//!
//! V(u) = Σ ½uᵢ² + Σ_{i<j} 1/|uᵢ − uⱼ| − Σ fᵢuᵢ,   fᵢ = Fᵢ/(mω_z²z₀).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::config::TrapConfig;
use crate::constants::coulomb_constant;
use crate::error::{Error, Result};

/// Max-norm of the dimensionless gradient at which the Newton solver stops.
pub const GRADIENT_TOLERANCE: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 200;
/// Relative eigenvalue gap below which two modes count as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// Constant axial force on each ion, N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtraForces(pub Vec<f64>);

impl ExtraForces {
    pub fn zero(n_ions: usize) -> Self {
        ExtraForces(vec![0.0; n_ions])
    }

    pub fn uniform(n_ions: usize, force: f64) -> Self {
        ExtraForces(vec![force; n_ions])
    }

    fn check(&self, n_ions: usize) -> Result<()> {
        if self.0.len() != n_ions {
            return Err(Error::InvalidArgument(format!(
                "{} forces given for {} ions",
                self.0.len(),
                n_ions
            )));
        }
        if self.0.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidArgument("non-finite extra force".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalModes {
    /// rad/s, ascending
    pub frequencies: Vec<f64>,
    /// `vectors[l][i]`: displacement of ion i in mode l, unit norm.
    pub vectors: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSolution {
    /// m, ascending
    pub positions: Vec<f64>,
    /// z₀, m
    pub length_scale_z0: f64,
    /// rad/s, ascending
    pub mode_frequencies: Vec<f64>,
    /// `mode_vectors[l][i]`: component of ion i in mode l.
    pub mode_vectors: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl ChainSolution {
    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }

    /// Expansion coefficient ζ of ion `ion` in mode `mode`.
    pub fn zeta(&self, ion: usize, mode: usize) -> Result<f64> {
        let n = self.n_ions();
        let v = self.mode_vectors.get(mode).ok_or(Error::InvalidMode {
            index: mode,
            n_modes: n,
        })?;
        v.get(ion).copied().ok_or(Error::InvalidIon {
            index: ion,
            n_ions: n,
        })
    }

    pub fn mode_frequency(&self, mode: usize) -> Result<f64> {
        self.mode_frequencies
            .get(mode)
            .copied()
            .ok_or(Error::InvalidMode {
                index: mode,
                n_modes: self.n_ions(),
            })
    }

    /// Index of the ion closest to the trap centre (the upper one of a
    /// central pair).
    pub fn center_ion(&self) -> usize {
        let n = self.n_ions();
        let mut best = 0;
        for i in 1..n {
            if self.positions[i].abs() <= self.positions[best].abs() {
                best = i;
            }
        }
        best
    }
}

/// z₀ = (e²/4πε₀mω_z²)^(1/3), m.
pub fn length_scale(mass: f64, omega_z: f64) -> f64 {
    (coulomb_constant() / (mass * omega_z * omega_z)).cbrt()
}

pub fn config_length_scale(config: &TrapConfig) -> f64 {
    length_scale(config.species.mass, config.omega_z)
}

/// Dimensionless gradient ∂V/∂uᵢ.
pub fn gradient(u: &[f64], f: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut g: Vec<f64> = u.iter().zip(f).map(|(ui, fi)| ui - fi).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = u[i] - u[j];
            let c = d.signum() / (d * d);
            g[i] -= c;
            g[j] += c;
        }
    }
    g
}

/// Dimensionless Hessian A of V, so that ω_l = ω_z·√(eig A).
pub fn hessian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = 1.0;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (u[i] - u[j]).abs();
            let k = 2.0 / (d * d * d);
            a[(i, j)] = -k;
            a[(j, i)] = -k;
            a[(i, i)] += k;
            a[(j, j)] += k;
        }
    }
    a
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn strictly_increasing(u: &[f64]) -> bool {
    u.windows(2).all(|w| w[1] > w[0])
}

/// Uniform spacing 2/N^0.559 centred on the mean scaled force.
fn initial_guess(n: usize, f: &[f64]) -> Vec<f64> {
    let shift = f.iter().sum::<f64>() / n as f64;
    let spacing = if n > 1 { 2.0 / (n as f64).powf(0.559) } else { 0.0 };
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n).map(|i| (i as f64 - mid) * spacing + shift).collect()
}

/// Damped Newton iteration in dimensionless units. `guess` must be strictly
/// increasing when given.
pub fn solve_dimensionless(f: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = f.len();
    let mut u = match guess {
        Some(g) if g.len() == n && strictly_increasing(g) => g.to_vec(),
        _ => initial_guess(n, f),
    };
    let mut g = gradient(&u, f);
    let mut res = max_norm(&g);
    for _ in 0..MAX_ITERATIONS {
        if res < GRADIENT_TOLERANCE {
            return Ok(u);
        }
        let a = hessian(&u);
        let rhs = DVector::from_iterator(n, g.iter().map(|x| -x));
        let step = match a.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            // Off the convex region around the minimum: fall back to a
            // gradient step scaled by the diagonal.
            None => DVector::from_iterator(n, (0..n).map(|i| rhs[i] / a[(i, i)])),
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, s)| x + lambda * s).collect();
            if strictly_increasing(&trial) {
                let gt = gradient(&trial, f);
                let rt = max_norm(&gt);
                // Full Newton steps near convergence may not reduce the
                // max-norm strictly because of rounding; accept them anyway.
                if rt < res || (lambda == 1.0 && rt < 1e3 * GRADIENT_TOLERANCE) {
                    u = trial;
                    g = gt;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res < GRADIENT_TOLERANCE {
        Ok(u)
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: res,
        })
    }
}

fn scaled_forces(config: &TrapConfig, forces: &ExtraForces) -> Result<Vec<f64>> {
    forces.check(config.n_ions)?;
    let m = config.species.mass;
    let z0 = config_length_scale(config);
    let unit = m * config.omega_z * config.omega_z * z0;
    Ok(forces.0.iter().map(|f| f / unit).collect())
}

/// Equilibrium axial positions (m, ascending) under the trap, the mutual
/// Coulomb repulsion and the given constant forces.
pub fn solve_equilibrium(config: &TrapConfig, forces: &ExtraForces) -> Result<Vec<f64>> {
    solve_equilibrium_from(config, forces, None)
}

/// As [`solve_equilibrium`], warm-started from `guess` (m).
pub fn solve_equilibrium_from(
    config: &TrapConfig,
    forces: &ExtraForces,
    guess: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let f = scaled_forces(config, forces)?;
    let z0 = config_length_scale(config);
    let guess_u: Option<Vec<f64>> = guess.map(|g| g.iter().map(|z| z / z0).collect());
    let u = solve_dimensionless(&f, guess_u.as_deref())?;
    Ok(u.into_iter().map(|x| x * z0).collect())
}

/// Axial normal modes at an equilibrium `positions` (m).
pub fn normal_modes(config: &TrapConfig, positions: &[f64]) -> Result<NormalModes> {
    let n = positions.len();
    if n != config.n_ions {
        return Err(Error::InvalidArgument(format!(
            "{n} positions given for {} ions",
            config.n_ions
        )));
    }
    let z0 = config_length_scale(config);
    let u: Vec<f64> = positions.iter().map(|z| z / z0).collect();
    let eig = SymmetricEigen::new(hessian(&u));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut warnings = Vec::new();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &k in &order {
        let mu = eig.eigenvalues[k];
        if mu <= 0.0 {
            return Err(Error::NotAMinimum { eigenvalue: mu });
        }
        eigenvalues.push(mu);
        vectors.push(eig.eigenvectors.column(k).iter().copied().collect());
    }

    let degenerate = eigenvalues
        .windows(2)
        .any(|w| (w[1] - w[0]).abs() < DEGENERACY_GAP * w[1].abs());
    if degenerate {
        warnings.push("degenerate axial modes detected; eigenvectors re-orthonormalized".into());
        gram_schmidt(&mut vectors);
    }
    for v in &mut vectors {
        fix_sign(v);
    }

    Ok(NormalModes {
        frequencies: eigenvalues.iter().map(|mu| config.omega_z * mu.sqrt()).collect(),
        vectors,
        warnings,
    })
}

/// Makes the largest-magnitude component positive. Ties within rounding are
/// broken by the lowest ion index.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(lead) = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-9)) {
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn gram_schmidt(vectors: &mut [Vec<f64>]) {
    for i in 0..vectors.len() {
        for j in 0..i {
            let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
            let (head, tail) = vectors.split_at_mut(i);
            tail[0].iter_mut().zip(&head[j]).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = vectors[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        vectors[i].iter_mut().for_each(|x| *x /= norm);
    }
}

/// Equilibrium plus normal modes.
pub fn solve_chain(config: &TrapConfig, forces: &ExtraForces) -> Result<ChainSolution> {
    let positions = solve_equilibrium(config, forces)?;
    let modes = normal_modes(config, &positions)?;
    Ok(ChainSolution {
        positions,
        length_scale_z0: config_length_scale(config),
        mode_frequencies: modes.frequencies,
        mode_vectors: modes.vectors,
        warnings: modes.warnings,
    })
}

/// Empirical highest axial mode ω_N/ω_z = 2.7 + 0.5·N, fitted for 5 ≤ N ≤ 100.
pub fn highest_mode_empirical(n_ions: usize) -> f64 {
    2.7 + 0.5 * n_ions as f64
}

pub fn highest_mode_empirical_in_range(n_ions: usize) -> bool {
    (5..=100).contains(&n_ions)
}

/// Smallest gap between neighbouring ions.
pub fn min_spacing(positions: &[f64]) -> Result<f64> {
    if positions.len() < 2 {
        return Err(Error::TooFewIons {
            needed: 2,
            got: positions.len(),
        });
    }
    Ok(positions
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(f64::INFINITY, f64::min))
}

/// Approximate inter-ion distance z₀·2/N^0.559.
pub fn spacing_law(n_ions: usize, z0: f64) -> Result<f64> {
    if n_ions < 2 {
        return Err(Error::TooFewIons {
            needed: 2,
            got: n_ions,
        });
    }
    Ok(z0 * 2.0 / (n_ions as f64).powf(0.559))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::IonSpecies;
    use std::f64::consts::TAU;

    fn config(n: usize, fz: f64) -> TrapConfig {
        TrapConfig::new(IonSpecies::yb171(), n, TAU * fz, None, 0.0, 0.0).unwrap()
    }

    fn dimless(n: usize) -> Vec<f64> {
        solve_dimensionless(&vec![0.0; n], None).unwrap()
    }

    #[test]
    fn single_ion_sits_at_centre() {
        let c = config(1, 1e5);
        let chain = solve_chain(&c, &ExtraForces::zero(1)).unwrap();
        assert_eq!(chain.positions, vec![0.0]);
        assert_eq!(chain.mode_frequencies.len(), 1);
        assert!((chain.mode_frequencies[0] / c.omega_z - 1.0).abs() < 1e-14);
        assert_eq!(chain.mode_vectors, vec![vec![1.0]]);
    }

    #[test]
    fn two_and_three_ion_analytic_positions() {
        // 4a³ = 1 for two ions; 4a³ = 5 for the outer pair of three.
        let a2 = 2f64.powf(-2.0 / 3.0);
        let u2 = dimless(2);
        assert!((u2[0] + a2).abs() < 1e-12 && (u2[1] - a2).abs() < 1e-12);
        let a3 = 1.25f64.cbrt();
        let u3 = dimless(3);
        assert!((u3[0] + a3).abs() < 1e-12);
        assert!(u3[1].abs() < 1e-12);
        assert!((u3[2] - a3).abs() < 1e-12);
    }

    #[test]
    fn small_chain_modes() {
        let c = config(3, 1e5);
        let chain = solve_chain(&c, &ExtraForces::zero(3)).unwrap();
        let ratios: Vec<f64> = chain.mode_frequencies.iter().map(|w| w / c.omega_z).collect();
        let expect = [1.0, 3f64.sqrt(), (29.0f64 / 5.0).sqrt()];
        for (r, e) in ratios.iter().zip(expect) {
            assert!((r - e).abs() < 1e-12, "{r} vs {e}");
        }
        let c2 = config(2, 1e5);
        let chain2 = solve_chain(&c2, &ExtraForces::zero(2)).unwrap();
        let s = 0.5f64.sqrt();
        assert!((chain2.mode_vectors[0][0] - s).abs() < 1e-12);
        assert!((chain2.mode_vectors[0][1] - s).abs() < 1e-12);
        assert!((chain2.mode_frequencies[1] / c2.omega_z - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sign_convention_and_orthonormality() {
        let c = config(12, 1e6);
        let chain = solve_chain(&c, &ExtraForces::zero(12)).unwrap();
        for v in &chain.mode_vectors {
            let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let lead = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-9)).unwrap();
            assert!(v[lead] > 0.0);
        }
        for (a, va) in chain.mode_vectors.iter().enumerate() {
            for (b, vb) in chain.mode_vectors.iter().enumerate() {
                let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
        let com = 1.0 / 12f64.sqrt();
        assert!(chain.mode_vectors[0].iter().all(|x| (x - com).abs() < 1e-12));
    }

    #[test]
    fn large_chain_converges() {
        for n in [50, 100, 150] {
            let u = dimless(n);
            assert!(max_norm(&gradient(&u, &vec![0.0; n])) < GRADIENT_TOLERANCE);
        }
    }

    #[test]
    fn highest_mode_vs_eigenvalue() {
        assert_eq!(highest_mode_empirical(10), 7.7);
        assert_eq!(highest_mode_empirical(5), 5.2);
        assert_eq!(highest_mode_empirical(20), 12.7);
        // Exact highest axial eigenvalue for N = 20 from the Hessian.
        let c = config(20, 1e5);
        let chain = solve_chain(&c, &ExtraForces::zero(20)).unwrap();
        let top = chain.mode_frequencies[19] / c.omega_z;
        assert!((top - 11.927_956_5).abs() < 1e-6, "{top}");
    }

    #[test]
    fn spacing() {
        assert!(matches!(min_spacing(&[0.0]), Err(Error::TooFewIons { .. })));
        assert!(spacing_law(1, 1.0).is_err());
        let u = dimless(2);
        assert!((min_spacing(&u).unwrap() - 2.0 * 2f64.powf(-2.0 / 3.0)).abs() < 1e-12);

        let c = config(10, 1e5);
        let z0 = config_length_scale(&c);
        assert!((z0 - 12.72e-6).abs() < 0.01e-6, "{z0}");
        let law = spacing_law(10, z0).unwrap();
        assert!((law - 7.02e-6).abs() < 0.01e-6, "{law}");
        let pos = solve_equilibrium(&c, &ExtraForces::zero(10)).unwrap();
        let ms = min_spacing(&pos).unwrap();
        assert!((ms / law - 1.0).abs() < 0.1);
    }

    #[test]
    fn wrong_force_length() {
        let c = config(3, 1e5);
        assert!(solve_equilibrium(&c, &ExtraForces::zero(2)).is_err());
    }
}
