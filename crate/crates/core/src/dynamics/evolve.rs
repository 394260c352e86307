use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fock::{beta, displacement_matrix};
use super::integrator::{Dop853, Dop853Options};
use crate::error::{Error, Result};
use crate::zeeman::Level;

pub const DEFAULT_N_MAX: usize = 30;
/// Population in the top two Fock levels above which a warning is raised.
pub const TRUNCATION_WARNING: f64 = 1e-6;
/// Population in the top two Fock levels above which evolution fails.
pub const TRUNCATION_ERROR: f64 = 1e-3;
const NORM_TOLERANCE: f64 = 1e-9;

fn spin_index(level: Level) -> usize {
    match level {
        Level::Lower => 0,
        Level::Upper => 1,
    }
}

/// Amplitudes over |s⟩⊗|n⟩, index s·(n_max + 1) + n with s = 0 for the
/// lower and s = 1 for the upper qubit level.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_max: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(n_max: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 2 * (n_max + 1) {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for n_max = {n_max}, expected {}",
                amplitudes.len(),
                2 * (n_max + 1)
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(QuantumState { n_max, amplitudes })
    }

    pub fn basis(level: Level, n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidArgument(format!(
                "Fock state {n} above n_max = {n_max}"
            )));
        }
        let mut amplitudes = vec![Complex64::default(); 2 * (n_max + 1)];
        amplitudes[spin_index(level) * (n_max + 1) + n] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { n_max, amplitudes })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn index(&self, level: Level, n: usize) -> usize {
        spin_index(level) * (self.n_max + 1) + n
    }

    pub fn population(&self, level: Level, n: usize) -> f64 {
        self.amplitudes[self.index(level, n)].norm_sqr()
    }

    pub fn spin_population(&self, level: Level) -> f64 {
        (0..=self.n_max).map(|n| self.population(level, n)).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Population in the top `levels` Fock states of both spin components.
    pub fn edge_population(&self, levels: usize) -> f64 {
        let lo = (self.n_max + 1).saturating_sub(levels);
        (lo..=self.n_max)
            .map(|n| self.population(Level::Lower, n) + self.population(Level::Upper, n))
            .sum()
    }

    /// Warning text if the truncation is marginal, error if inadequate.
    pub fn truncation_health(&self) -> Result<Option<String>> {
        let p = self.edge_population(2);
        if p > TRUNCATION_ERROR {
            Err(Error::Truncation { population: p })
        } else if p > TRUNCATION_WARNING {
            Ok(Some(format!(
                "population {p:.3e} in the top two Fock levels (n_max = {})",
                self.n_max
            )))
        } else {
            Ok(None)
        }
    }
}

/// Where the constant phase 2ηε_c of the transformed drive is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// σ₊ e^{−i(Δt + 2ηε_c)}.
    #[default]
    Explicit,
    /// Phase absorbed into σ₊, i.e. σ₊ e^{−iΔt}.
    Absorbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Ω_R, rad/s
    pub rabi_frequency: f64,
    /// Δ = ω_M − ω₀, rad/s
    pub detuning: f64,
    pub eta: f64,
    pub epsilon_c: f64,
    /// s
    pub duration: f64,
    #[serde(default)]
    pub phase: PhaseConvention,
}

impl DriveSpec {
    pub fn new(rabi_frequency: f64, detuning: f64, eta: f64, epsilon_c: f64, duration: f64) -> Self {
        DriveSpec {
            rabi_frequency,
            detuning,
            eta,
            epsilon_c,
            duration,
            phase: PhaseConvention::Explicit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.rabi_frequency,
            self.detuning,
            self.eta,
            self.epsilon_c,
            self.duration,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("drive parameters must be finite".into()));
        }
        if self.duration < 0.0 {
            return Err(Error::InvalidArgument("duration ≥ 0 violated".into()));
        }
        Ok(())
    }

    pub fn eta_eff(&self) -> f64 {
        self.eta.hypot(self.epsilon_c)
    }

    pub fn static_phase(&self) -> f64 {
        match self.phase {
            PhaseConvention::Explicit => 2.0 * self.eta * self.epsilon_c,
            PhaseConvention::Absorbed => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolveOptions {
    pub integrator: Dop853Options,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: QuantumState,
    /// |‖ψ(t)‖ − 1| at the end
    pub norm_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub n_max: usize,
    pub times: Vec<f64>,
    /// populations[i][j]: basis state j at times[i]
    pub populations: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    pub warnings: Vec<String>,
}

impl TimeSeries {
    pub fn column_labels(&self) -> Vec<String> {
        (0..2)
            .flat_map(|s| (0..=self.n_max).map(move |n| format!("p_{s}_{n}")))
            .collect()
    }

    pub fn series(&self, level: Level, n: usize) -> Vec<f64> {
        let j = spin_index(level) * (self.n_max + 1) + n;
        self.populations.iter().map(|p| p[j]).collect()
    }
}

fn check_inputs(state: &QuantumState, drive: &DriveSpec, mode_frequency: f64) -> Result<Vec<String>> {
    drive.validate()?;
    if !(mode_frequency > 0.0 && mode_frequency.is_finite()) {
        return Err(Error::InvalidArgument("ω_l > 0 violated".into()));
    }
    if (state.norm() - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "initial state not normalized (‖ψ‖ = {})",
            state.norm()
        )));
    }
    Ok(state.truncation_health()?.into_iter().collect())
}

type Rhs = Box<dyn FnMut(f64, &[Complex64], &mut [Complex64])>;

fn right_hand_side(n_max: usize, drive: &DriveSpec, mode_frequency: f64) -> Result<Rhs> {
    let dim = n_max + 1;
    let m = displacement_matrix(n_max, beta(drive.eta, drive.epsilon_c))?;
    let half = 0.5 * drive.rabi_frequency;
    let detuning = drive.detuning;
    let phase0 = drive.static_phase();
    let mut p = vec![Complex64::default(); dim];
    let mut u = vec![Complex64::default(); dim];
    Ok(Box::new(move |t, y, dy| {
        for (n, pn) in p.iter_mut().enumerate() {
            *pn = Complex64::from_polar(1.0, n as f64 * mode_frequency * t);
        }
        let drive_phase = Complex64::from_polar(half, -(detuning * t + phase0));
        let (lower, upper) = y.split_at(dim);
        let (d_lower, d_upper) = dy.split_at_mut(dim);

        // upper ← M · lower, with phonon phases
        for k in 0..dim {
            u[k] = p[k].conj() * lower[k];
        }
        for n in 0..dim {
            let mut acc = Complex64::default();
            for k in 0..dim {
                acc += m[(n, k)] * u[k];
            }
            d_upper[n] = Complex64::new(0.0, -1.0) * drive_phase * p[n] * acc;
        }

        // lower ← M† · upper
        for k in 0..dim {
            u[k] = p[k].conj() * upper[k];
        }
        for k in 0..dim {
            let mut acc = Complex64::default();
            for n in 0..dim {
                acc += m[(n, k)].conj() * u[n];
            }
            d_lower[k] = Complex64::new(0.0, -1.0) * drive_phase.conj() * p[k] * acc;
        }
    }))
}

fn note(warnings: &mut Vec<String>, w: Option<String>) {
    if let Some(w) = w {
        if warnings.len() < 8 {
            warnings.push(w);
        }
    }
}

/// Evolves `state` under the transformed drive for `drive.duration`.
pub fn evolve(state: &QuantumState, drive: &DriveSpec, mode_frequency: f64) -> Result<Evolution> {
    evolve_with(state, drive, mode_frequency, &EvolveOptions::default())
}

pub fn evolve_with(
    state: &QuantumState,
    drive: &DriveSpec,
    mode_frequency: f64,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    let mut warnings = check_inputs(state, drive, mode_frequency)?;
    let rhs = right_hand_side(state.n_max, drive, mode_frequency)?;
    let mut solver = Dop853::new(rhs, 0.0, state.amplitudes.clone(), opts.integrator);
    solver.advance_to(drive.duration)?;
    let out = QuantumState::new(state.n_max, solver.y().to_vec())?;
    note(&mut warnings, out.truncation_health()?);
    Ok(Evolution {
        norm_drift: (out.norm() - 1.0).abs(),
        state: out,
        accepted_steps: solver.accepted,
        rejected_steps: solver.rejected,
        warnings,
    })
}

/// Populations at `samples` equally spaced times from 0 to the drive
/// duration (both included).
pub fn evolve_sampled(
    state: &QuantumState,
    drive: &DriveSpec,
    mode_frequency: f64,
    samples: usize,
    opts: &EvolveOptions,
) -> Result<TimeSeries> {
    if samples < 2 {
        return Err(Error::InvalidArgument("at least two samples required".into()));
    }
    let mut warnings = check_inputs(state, drive, mode_frequency)?;
    let rhs = right_hand_side(state.n_max, drive, mode_frequency)?;
    let mut solver = Dop853::new(rhs, 0.0, state.amplitudes.clone(), opts.integrator);
    let mut times = Vec::with_capacity(samples);
    let mut populations = Vec::with_capacity(samples);
    let mut norms = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = drive.duration * i as f64 / (samples - 1) as f64;
        solver.advance_to(t)?;
        let s = QuantumState::new(state.n_max, solver.y().to_vec())?;
        note(&mut warnings, s.truncation_health()?);
        times.push(t);
        norms.push(s.norm());
        populations.push(s.populations());
    }
    Ok(TimeSeries {
        n_max: state.n_max,
        times,
        populations,
        norms,
        warnings,
    })
}

/// First maximum of a flopping signal A·sin²(Ω′t/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiFit {
    pub peak_time: f64,
    /// A
    pub amplitude: f64,
    /// Ω′ = π / t_peak
    pub generalized_frequency: f64,
    /// Ω′·√A, the resonant coupling when the residual detuning is static
    pub coupling: f64,
}

/// Locates the first maximum of `signal` after a running average over
/// `window` samples, refined by a parabola through the three highest points.
pub fn fit_first_peak(times: &[f64], signal: &[f64], window: usize) -> Result<RabiFit> {
    let window = window.max(1);
    if times.len() != signal.len() || signal.len() < window + 3 {
        return Err(Error::InvalidArgument(
            "time series too short for peak fit".into(),
        ));
    }
    let count = signal.len() - window + 1;
    let mut t = Vec::with_capacity(count);
    let mut y = Vec::with_capacity(count);
    for i in 0..count {
        t.push(times[i..i + window].iter().sum::<f64>() / window as f64);
        y.push(signal[i..i + window].iter().sum::<f64>() / window as f64);
    }
    let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let i = (1..count - 1)
        .find(|&i| y[i] >= y[i - 1] && y[i] > y[i + 1] && y[i] > 0.5 * top)
        .ok_or_else(|| Error::InvalidArgument("no maximum in time series".into()))?;
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    let offset = if curvature < 0.0 {
        0.5 * (y0 - y2) / curvature
    } else {
        0.0
    };
    let dt = 0.5 * (t[i + 1] - t[i - 1]);
    let peak_time = t[i] + offset * dt;
    let amplitude = y1 - 0.25 * (y0 - y2) * offset;
    let generalized_frequency = std::f64::consts::PI / peak_time;
    Ok(RabiFit {
        peak_time,
        amplitude,
        generalized_frequency,
        coupling: generalized_frequency * amplitude.max(0.0).sqrt(),
    })
}
