//! Spread of one ion's qubit frequency over the internal states of the other
//! ions, and the single-qubit gate error it causes.
//!
//! In a gradient every internal state carries its own magnetic force
//! F = −κ(B)·μ_B·b. Flipping any ion therefore moves the whole chain a
//! little, and through the gradient each ion's resonance frequency depends
//! on the states of all others.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::TrapConfig;
use crate::constants::BOHR_MAGNETON;
use crate::crystal::{solve_equilibrium, solve_equilibrium_from, ExtraForces};
use crate::error::{Error, Result};
use crate::zeeman::{Level, QubitLevels};

pub const DEFAULT_SEED: u64 = 0x00C0_FFEE;
/// Largest number of other-ion configurations enumerated exhaustively by
/// default (2^11, i.e. N ≤ 12).
pub const DEFAULT_SAMPLE_BUDGET: u64 = 1 << 11;
pub const MIN_ORACLE_SAMPLES: usize = 10_000;
pub const DEFAULT_ORACLE_SAMPLES: usize = 200_000;
/// Detuning distribution cutoff in units of the underlying normal width.
pub const DETUNING_CUTOFF_SIGMAS: f64 = 2.0;

/// Which force acts on the addressed ion k while the others are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceConvention {
    /// Mean of the two level forces, −(κ₀ + κ₁)/2·μ_B·b. Ion k's own
    /// state-dependent displacement is part of the spin–phonon coupling.
    MeanForce,
    /// Ion k held in |0⟩.
    IonInLowerState,
}

impl ForceConvention {
    pub const ALL: [ForceConvention; 2] = [ForceConvention::MeanForce, ForceConvention::IonInLowerState];

    pub fn label(self) -> &'static str {
        match self {
            ForceConvention::MeanForce => "mean_force",
            ForceConvention::IonInLowerState => "ion_in_lower_state",
        }
    }
}

fn states_label(states: &[Level]) -> String {
    states
        .iter()
        .map(|s| match s {
            Level::Upper => '1',
            Level::Lower => '0',
        })
        .collect()
}

/// Reference chain and κ values for repeated configuration solves.
struct SpreadContext<'a> {
    config: &'a TrapConfig,
    levels: &'a QubitLevels,
    reference: Vec<f64>,
    kappa_upper: Vec<f64>,
    kappa_lower: Vec<f64>,
}

impl<'a> SpreadContext<'a> {
    fn new(config: &'a TrapConfig, levels: &'a QubitLevels) -> Result<Self> {
        let reference = solve_equilibrium(config, &ExtraForces::zero(config.n_ions))?;
        let fields: Vec<f64> = reference.iter().map(|&z| config.field_at(z)).collect();
        Ok(SpreadContext {
            config,
            levels,
            kappa_upper: fields.iter().map(|&b| levels.kappa(b, Level::Upper)).collect(),
            kappa_lower: fields.iter().map(|&b| levels.kappa(b, Level::Lower)).collect(),
            reference,
        })
    }

    /// ω₀ᵏ − ω_HFS for the given states of the other ions; `states[ion]` is
    /// ignored.
    fn shift(&self, states: &[Level], ion: usize, convention: ForceConvention) -> Result<f64> {
        let unit = BOHR_MAGNETON * self.config.gradient_b;
        let forces: Vec<f64> = (0..self.config.n_ions)
            .map(|j| {
                let kappa = if j == ion {
                    match convention {
                        ForceConvention::MeanForce => 0.5 * (self.kappa_upper[j] + self.kappa_lower[j]),
                        ForceConvention::IonInLowerState => self.kappa_lower[j],
                    }
                } else {
                    match states[j] {
                        Level::Upper => self.kappa_upper[j],
                        Level::Lower => self.kappa_lower[j],
                    }
                };
                -kappa * unit
            })
            .collect();
        let positions = solve_equilibrium_from(self.config, &ExtraForces(forces), Some(&self.reference))?;
        Ok(self.levels.resonance_shift(self.config.field_at(positions[ion])))
    }

    fn check(&self, states: &[Level], ion: usize) -> Result<()> {
        let n = self.config.n_ions;
        if states.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} internal states given for {n} ions",
                states.len()
            )));
        }
        if ion >= n {
            return Err(Error::InvalidIon {
                index: ion,
                n_ions: n,
            });
        }
        Ok(())
    }
}

/// Qubit frequency of ion `ion` (rad/s) when the other ions are in
/// `states`. The chain is re-solved with the state-dependent forces.
pub fn configuration_frequency(
    config: &TrapConfig,
    levels: &QubitLevels,
    states: &[Level],
    ion: usize,
    convention: ForceConvention,
) -> Result<f64> {
    let ctx = SpreadContext::new(config, levels)?;
    ctx.check(states, ion)?;
    let shift = ctx
        .shift(states, ion, convention)
        .map_err(|e| Error::Configuration {
            ion,
            states: states_label(states),
            source: Box::new(e),
        })?;
    Ok(config.species.hyperfine_splitting + shift)
}

/// Internal-state configurations, listed separately for every addressed ion.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationSet {
    pub per_ion: Vec<Vec<Vec<Level>>>,
    pub exhaustive: bool,
    pub seed: Option<u64>,
}

fn level(bit: bool) -> Level {
    if bit {
        Level::Upper
    } else {
        Level::Lower
    }
}

impl ConfigurationSet {
    /// All 2^(N−1) states of the other ions, for every ion.
    pub fn exhaustive(n_ions: usize) -> Self {
        let per_ion = (0..n_ions)
            .map(|k| {
                (0u64..1 << (n_ions - 1))
                    .map(|code| {
                        let mut bit = 0;
                        (0..n_ions)
                            .map(|j| {
                                if j == k {
                                    Level::Lower
                                } else {
                                    let s = level(code >> bit & 1 == 1);
                                    bit += 1;
                                    s
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ConfigurationSet {
            per_ion,
            exhaustive: true,
            seed: None,
        }
    }

    /// `count` uniformly random configurations per ion from a ChaCha8 stream.
    pub fn random(n_ions: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let per_ion = (0..n_ions)
            .map(|k| {
                (0..count)
                    .map(|_| {
                        (0..n_ions)
                            .map(|j| if j == k { Level::Lower } else { level(rng.gen()) })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ConfigurationSet {
            per_ion,
            exhaustive: false,
            seed: Some(seed),
        }
    }

    /// Every other-ion state swapped 0 ↔ 1.
    pub fn relabeled(&self) -> Self {
        let per_ion = self
            .per_ion
            .iter()
            .enumerate()
            .map(|(k, list)| {
                list.iter()
                    .map(|states| {
                        states
                            .iter()
                            .enumerate()
                            .map(|(j, s)| match (j == k, s) {
                                (true, _) => Level::Lower,
                                (false, Level::Upper) => Level::Lower,
                                (false, Level::Lower) => Level::Upper,
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ConfigurationSet {
            per_ion,
            exhaustive: self.exhaustive,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingPlan {
    /// Enumerate exhaustively when 2^(N−1) ≤ this budget.
    pub sample_budget: u64,
    /// Lower bound on the random sample count (the default count is 4N²).
    pub min_random_samples: usize,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            sample_budget: DEFAULT_SAMPLE_BUDGET,
            min_random_samples: 0,
            seed: DEFAULT_SEED,
        }
    }
}

impl SamplingPlan {
    pub fn with_seed(seed: u64) -> Self {
        SamplingPlan {
            seed,
            ..Default::default()
        }
    }

    pub fn configurations(&self, n_ions: usize) -> ConfigurationSet {
        let exhaustive = n_ions <= 64 && (1u128 << (n_ions - 1)) <= self.sample_budget as u128;
        if exhaustive {
            ConfigurationSet::exhaustive(n_ions)
        } else {
            let count = (4 * n_ions * n_ions).max(self.min_random_samples);
            ConfigurationSet::random(n_ions, count, self.seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadEstimate {
    pub convention: ForceConvention,
    /// σ_k per ion, rad/s
    pub sigma_k: Vec<f64>,
    /// σ = (1/N)·Σσ_k, rad/s
    pub mean_sigma: f64,
    /// largest |ω₀ᵏ − ω̄₀ᵏ| per ion, rad/s
    pub max_deviation_k: Vec<f64>,
    /// largest over all ions, rad/s
    pub max_deviation: f64,
    /// ω̄₀ᵏ per ion, rad/s
    pub mean_frequency: Vec<f64>,
    /// configurations evaluated per ion
    pub sample_count: usize,
    pub exhaustive: bool,
    pub seed: Option<u64>,
}

/// Frequency spread with the default sampling rules: exhaustive enumeration
/// when affordable, 4N² seeded random configurations otherwise.
pub fn estimate_spread(
    config: &TrapConfig,
    levels: &QubitLevels,
    plan: &SamplingPlan,
    convention: ForceConvention,
) -> Result<SpreadEstimate> {
    if config.n_ions < 2 {
        return Err(Error::TooFewIons {
            needed: 2,
            got: config.n_ions,
        });
    }
    spread_over(config, levels, &plan.configurations(config.n_ions), convention)
}

/// Frequency spread over an explicit configuration set. Evaluation runs in
/// parallel; the reduction is sequential, so results do not depend on the
/// thread count.
pub fn spread_over(
    config: &TrapConfig,
    levels: &QubitLevels,
    set: &ConfigurationSet,
    convention: ForceConvention,
) -> Result<SpreadEstimate> {
    let n = config.n_ions;
    if set.per_ion.len() != n {
        return Err(Error::InvalidArgument(format!(
            "configuration set for {} ions, trap has {n}",
            set.per_ion.len()
        )));
    }
    let ctx = SpreadContext::new(config, levels)?;
    let jobs: Vec<(usize, &Vec<Level>)> = set
        .per_ion
        .iter()
        .enumerate()
        .flat_map(|(k, list)| list.iter().map(move |s| (k, s)))
        .collect();
    for (k, s) in &jobs {
        ctx.check(s, *k)?;
    }
    let shifts: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|(k, s)| {
            ctx.shift(s, *k, convention).map_err(|e| Error::Configuration {
                ion: *k,
                states: states_label(s),
                source: Box::new(e),
            })
        })
        .collect();
    let shifts = shifts.into_iter().collect::<Result<Vec<f64>>>()?;

    let mut sigma_k = Vec::with_capacity(n);
    let mut max_dev = Vec::with_capacity(n);
    let mut mean_frequency = Vec::with_capacity(n);
    let mut offset = 0;
    let mut sample_count = usize::MAX;
    for list in &set.per_ion {
        let values = &shifts[offset..offset + list.len()];
        offset += list.len();
        sample_count = sample_count.min(values.len());
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let var = if set.exhaustive || values.len() < 2 {
            ss / count
        } else {
            ss / (count - 1.0)
        };
        sigma_k.push(var.sqrt());
        max_dev.push(values.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs())));
        mean_frequency.push(config.species.hyperfine_splitting + mean);
    }
    Ok(SpreadEstimate {
        convention,
        mean_sigma: sigma_k.iter().sum::<f64>() / n as f64,
        max_deviation: max_dev.iter().copied().fold(0.0, f64::max),
        sigma_k,
        max_deviation_k: max_dev,
        mean_frequency,
        sample_count,
        exhaustive: set.exhaustive,
        seed: set.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateErrorEstimate {
    /// Ω_R, rad/s
    pub rabi_frequency: f64,
    pub error_closed_form: f64,
    pub error_numeric: Option<f64>,
}

/// 1 − f = (41/120)·(σ/Ω_R)², capped at 1.
pub fn gate_error_closed_form(sigma: f64, rabi_frequency: f64) -> Result<f64> {
    if !(rabi_frequency > 0.0 && rabi_frequency.is_finite()) {
        return Err(Error::InvalidArgument("Ω_R > 0 violated".into()));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument("σ ≥ 0 violated".into()));
    }
    let r = sigma / rabi_frequency;
    Ok((41.0 / 120.0 * r * r).min(1.0))
}

/// Normal distribution truncated at ±`cutoff`, with width `scale` chosen so
/// that the truncated distribution has a prescribed standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedDetuning {
    pub scale: f64,
    pub cutoff: f64,
}

fn standard_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / TAU.sqrt()
}

/// Variance of N(0, 1) truncated to ±c.
pub fn truncated_unit_variance(c: f64) -> f64 {
    let mass = statrs::function::erf::erf(c / std::f64::consts::SQRT_2);
    1.0 - 2.0 * c * standard_normal_pdf(c) / mass
}

impl TruncatedDetuning {
    /// Truncated at `DETUNING_CUTOFF_SIGMAS`·σ with standard deviation σ.
    pub fn with_std(sigma: f64) -> Self {
        // Solve Var(c)·(2σ/c)² = σ² for the cutoff c in units of the
        // underlying width; the left side decreases monotonically in c.
        let k = DETUNING_CUTOFF_SIGMAS;
        let f = |c: f64| truncated_unit_variance(c) - c * c / (k * k);
        let (mut lo, mut hi) = (1e-3, k);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = 0.5 * (lo + hi);
        TruncatedDetuning {
            scale: k * sigma / c,
            cutoff: k * sigma,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        self.scale * self.scale * truncated_unit_variance(self.cutoff / self.scale)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let normal = Normal::new(0.0, self.scale).expect("positive width");
        loop {
            let x: f64 = normal.sample(rng);
            if x.abs() <= self.cutoff {
                return x;
            }
        }
    }
}

/// 1 − |⟨Ψ_f|Ψ_r⟩|² after a pulse of length `t` with Rabi frequency Ω and
/// detuning δ, starting from α|0⟩ + e^{iφ}√(1−α²)|1⟩.
pub fn detuned_rotation_infidelity(rabi: f64, detuning: f64, t: f64, alpha: f64, phi: f64) -> f64 {
    let psi0 = Complex64::new(alpha, 0.0);
    let psi1 = Complex64::from_polar((1.0 - alpha * alpha).max(0.0).sqrt(), phi);
    let i = Complex64::i();

    // ideal: exp(−iΩtσ_x/2)
    let (s0, c0) = (0.5 * rabi * t).sin_cos();
    let w0 = c0 * psi0 - i * s0 * psi1;
    let w1 = -i * s0 * psi0 + c0 * psi1;

    // real: exp(−i(Ωσ_x + δσ_z)t/2)
    let gen = rabi.hypot(detuning);
    let (s, c) = (0.5 * gen * t).sin_cos();
    let (nx, nz) = if gen > 0.0 {
        (rabi / gen, detuning / gen)
    } else {
        (1.0, 0.0)
    };
    let v0 = (c - i * s * nz) * psi0 - i * s * nx * psi1;
    let v1 = -i * s * nx * psi0 + (c + i * s * nz) * psi1;

    let overlap = w0.conj() * v0 + w1.conj() * v1;
    (1.0 - overlap.norm_sqr()).max(0.0)
}

/// Monte-Carlo average of the detuned-rotation infidelity over initial
/// states (α uniform on [0, 1], φ uniform), pulse lengths t ∈ [0, π/Ω_R] and
/// detunings from a normal distribution truncated at 2σ whose standard
/// deviation is σ.
pub fn gate_error_numeric_oracle(sigma: f64, rabi_frequency: f64, samples: usize, seed: u64) -> Result<f64> {
    if samples < MIN_ORACLE_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples,
            min: MIN_ORACLE_SAMPLES,
        });
    }
    if !(rabi_frequency > 0.0 && rabi_frequency.is_finite()) {
        return Err(Error::InvalidArgument("Ω_R > 0 violated".into()));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument("σ ≥ 0 violated".into()));
    }
    let detuning = TruncatedDetuning::with_std(sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_max = PI / rabi_frequency;
    let mut sum = 0.0;
    for _ in 0..samples {
        let alpha: f64 = rng.gen();
        let phi = TAU * rng.gen::<f64>();
        let t = t_max * rng.gen::<f64>();
        let delta = detuning.sample(&mut rng);
        sum += detuned_rotation_infidelity(rabi_frequency, delta, t, alpha, phi);
    }
    Ok(sum / samples as f64)
}
