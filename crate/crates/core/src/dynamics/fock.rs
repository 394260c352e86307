use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest accepted |β|²·(max(n, m) + 1).
pub const DISPLACEMENT_BOUND: f64 = 1e4;

/// Generalized Laguerre polynomial L_n^(α)(x) by upward recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// β = i(η − iε_c) = ε_c + iη.
pub fn beta(eta: f64, epsilon_c: f64) -> Complex64 {
    Complex64::new(epsilon_c, eta)
}

/// ⟨n| exp(β a† − β* a) |m⟩.
pub fn displacement_matrix_element(n: usize, m: usize, beta: Complex64) -> Result<Complex64> {
    let x = beta.norm_sqr();
    let load = x * (n.max(m) as f64 + 1.0);
    if !load.is_finite() || load > DISPLACEMENT_BOUND {
        return Err(Error::DisplacementRange {
            value: load,
            bound: DISPLACEMENT_BOUND,
        });
    }
    let (lo, hi, base) = if n >= m {
        (m, n, beta)
    } else {
        (n, m, -beta.conj())
    };
    let d = hi - lo;
    // √(lo!/hi!) as a running product
    let ratio: f64 = ((lo + 1)..=hi).map(|k| 1.0 / (k as f64).sqrt()).product();
    let gauss = (-0.5 * x).exp();
    Ok(base.powu(d as u32) * (ratio * gauss * laguerre(lo, d as f64, x)))
}

/// Displacement operator in the Fock basis 0…n_max.
pub fn displacement_matrix(n_max: usize, beta: Complex64) -> Result<DMatrix<Complex64>> {
    let dim = n_max + 1;
    let mut out = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        for m in 0..dim {
            out[(n, m)] = displacement_matrix_element(n, m, beta)?;
        }
    }
    Ok(out)
}

/// Ω_R·|⟨n| D(η_eff) |m⟩|.
pub fn rabi_frequency_analytic(n: usize, m: usize, eta_eff: f64, rabi_frequency: f64) -> Result<f64> {
    if !(eta_eff >= 0.0) {
        return Err(Error::InvalidArgument("η_eff ≥ 0 violated".into()));
    }
    Ok(rabi_frequency * displacement_matrix_element(n, m, Complex64::new(eta_eff, 0.0))?.norm())
}
