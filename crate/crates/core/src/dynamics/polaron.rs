//! Checks of the spin-dependent displacement e^S, S = ½ε_c(a† − a)σ_z, in a
//! truncated Fock space. All energies in units of ω_l.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::fock::displacement_matrix_element;

/// Fock levels at the top of the truncated space excluded from residuals.
pub const POLARON_EDGE_LEVELS: usize = 6;
/// Qubit splitting ω₀/ω_l used for the Hamiltonian checks; any value works
/// since ½ω₀σ_z commutes with S.
const OMEGA0: f64 = std::f64::consts::SQRT_2;

fn annihilation(dim: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = (k as f64).sqrt();
    }
    a
}

fn sigma_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])
}

fn sigma_plus() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0])
}

struct Operators {
    dim: usize,
    a: DMatrix<f64>,
    sz: DMatrix<f64>,
    sp: DMatrix<f64>,
    n: DMatrix<f64>,
}

impl Operators {
    fn new(n_max: usize) -> Self {
        let dim = n_max + 1;
        let a = annihilation(dim);
        let id_f = DMatrix::identity(dim, dim);
        let id_s = DMatrix::identity(2, 2);
        Operators {
            dim,
            n: id_s.kronecker(&(a.transpose() * &a)),
            a: id_s.kronecker(&a),
            sz: sigma_z().kronecker(&id_f),
            sp: sigma_plus().kronecker(&id_f),
        }
    }

    fn identity(&self) -> DMatrix<f64> {
        DMatrix::identity(2 * self.dim, 2 * self.dim)
    }

    /// Largest |x_ij| with both Fock indices below `limit`.
    fn max_inner(&self, x: &DMatrix<f64>, limit: usize) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..2 * self.dim {
            for j in 0..2 * self.dim {
                if i % self.dim < limit && j % self.dim < limit {
                    worst = worst.max(x[(i, j)].abs());
                }
            }
        }
        worst
    }
}

/// e^S for S = ½ε_c(a† − a)σ_z.
pub fn polaron_unitary(epsilon_c: f64, n_max: usize) -> DMatrix<f64> {
    let ops = Operators::new(n_max);
    let s = (&ops.sz * (ops.a.transpose() - &ops.a)) * (0.5 * epsilon_c);
    s.exp()
}

/// ½ω₀σ_z + a†a + ½ε_c(a† + a)σ_z.
pub fn eq1_hamiltonian(epsilon_c: f64, n_max: usize) -> DMatrix<f64> {
    let ops = Operators::new(n_max);
    hamiltonian(&ops, epsilon_c)
}

fn hamiltonian(ops: &Operators, epsilon_c: f64) -> DMatrix<f64> {
    &ops.sz * (0.5 * OMEGA0) + &ops.n + (&ops.sz * (ops.a.transpose() + &ops.a)) * (0.5 * epsilon_c)
}

/// Max-norm of e^S H e^{−S} − (½ω₀σ_z + a†a − ε_c²/4) over the Fock levels
/// below the truncation edge.
pub fn polaron_transform_residual(epsilon_c: f64, n_max: usize, edge: usize) -> f64 {
    let ops = Operators::new(n_max);
    let u = polaron_unitary(epsilon_c, n_max);
    let transformed = &u * hamiltonian(&ops, epsilon_c) * u.transpose();
    let expected = &ops.sz * (0.5 * OMEGA0) + &ops.n - ops.identity() * (0.25 * epsilon_c * epsilon_c);
    ops.max_inner(&(transformed - expected), ops.dim.saturating_sub(edge))
}

pub fn polaron_transform_check(epsilon_c: f64, n_max: usize) -> f64 {
    polaron_transform_residual(epsilon_c, n_max, POLARON_EDGE_LEVELS)
}

/// Largest deviation of the lowest `count` eigenvalues of the coupled
/// Hamiltonian from {±½ω₀ + n − ε_c²/4}.
pub fn polaron_spectrum_residual(epsilon_c: f64, n_max: usize, count: usize) -> f64 {
    let h = eq1_hamiltonian(epsilon_c, n_max);
    let mut computed: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    computed.sort_by(f64::total_cmp);
    let shift = 0.25 * epsilon_c * epsilon_c;
    let mut expected: Vec<f64> = (0..=n_max)
        .flat_map(|n| [n as f64 - 0.5 * OMEGA0 - shift, n as f64 + 0.5 * OMEGA0 - shift])
        .collect();
    expected.sort_by(f64::total_cmp);
    computed
        .iter()
        .zip(&expected)
        .take(count)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn ladder_errors(epsilon_c: f64, n_max: usize) -> (Operators, [DMatrix<f64>; 4]) {
    let ops = Operators::new(n_max);
    let u = polaron_unitary(epsilon_c, n_max);
    let ut = u.transpose();
    let conj = |x: &DMatrix<f64>| &u * x * &ut;
    let half = &ops.sz * (0.5 * epsilon_c);
    let ad = ops.a.transpose();

    // exact displacement e^{ε_c(a†−a)} from its matrix elements
    let dim = ops.dim;
    let mut disp = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        for m in 0..dim {
            disp[(n, m)] = displacement_matrix_element(n, m, Complex64::new(epsilon_c, 0.0))
                .map(|z| z.re)
                .unwrap_or(f64::NAN);
        }
    }
    let id_s = DMatrix::<f64>::identity(2, 2);
    let d_plus = id_s.kronecker(&disp);
    let d_minus = id_s.kronecker(&disp.transpose());
    let sm = ops.sp.transpose();

    let errors = [
        conj(&ops.a) - (&ops.a - &half),
        conj(&ad) - (&ad - &half),
        conj(&ops.sp) - &ops.sp * d_plus,
        conj(&sm) - &sm * d_minus,
    ];
    (ops, errors)
}

/// Max residual of the four transformed-operator identities
/// ã = a − ½ε_cσ_z, ã† = a† − ½ε_cσ_z, σ̃₊ = σ₊e^{ε_c(a†−a)},
/// σ̃₋ = σ₋e^{−ε_c(a†−a)}, below the truncation edge.
pub fn transformed_ladder_residual(epsilon_c: f64, n_max: usize, edge: usize) -> f64 {
    let (ops, errors) = ladder_errors(epsilon_c, n_max);
    let limit = ops.dim.saturating_sub(edge);
    errors.iter().map(|e| ops.max_inner(e, limit)).fold(0.0, f64::max)
}

pub fn transformed_ladder_check(epsilon_c: f64, n_max: usize) -> f64 {
    transformed_ladder_residual(epsilon_c, n_max, POLARON_EDGE_LEVELS)
}

/// Identity residual attributed to each Fock level n: the largest entry in
/// any row or column belonging to n.
pub fn ladder_residual_profile(epsilon_c: f64, n_max: usize) -> Vec<f64> {
    let (ops, errors) = ladder_errors(epsilon_c, n_max);
    let dim = ops.dim;
    let mut profile = vec![0.0_f64; dim];
    for e in &errors {
        for i in 0..2 * dim {
            for j in 0..2 * dim {
                let v = e[(i, j)].abs();
                let n = (i % dim).max(j % dim);
                profile[n] = profile[n].max(v);
            }
        }
    }
    profile
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_is_trivial() {
        assert_eq!(polaron_transform_check(0.0, 20), 0.0);
        assert_eq!(transformed_ladder_check(0.0, 20), 0.0);
    }

    #[test]
    fn decouples_in_sixty_levels() {
        let r = polaron_transform_check(0.02, 60);
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn ladder_identities() {
        let r = transformed_ladder_check(0.05, 60);
        assert!(r < 1e-9, "{r}");
    }

    #[test]
    fn residual_lives_at_the_edge() {
        let p = ladder_residual_profile(0.05, 40);
        let low = p[..20].iter().copied().fold(0.0, f64::max);
        assert!(low < 1e-12, "{low}");
        assert!(p[40] > 1e3 * low.max(1e-15));
    }

    #[test]
    fn spectrum_is_shifted_ladder() {
        let r = polaron_spectrum_residual(0.05, 60, 40);
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn unitary_is_orthogonal() {
        let u = polaron_unitary(0.1, 30);
        let p = &u * u.transpose();
        assert!((p - DMatrix::identity(62, 62)).amax() < 1e-12);
    }
}
