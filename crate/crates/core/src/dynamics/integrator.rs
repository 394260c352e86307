//! Dormand–Prince 8(5,3) explicit Runge–Kutta with adaptive steps.

use num_complex::Complex64;

use crate::error::{Error, Result};

const N_STAGES: usize = 12;
const ORDER: f64 = 7.0;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[rustfmt::skip]
const C: [f64; 12] = [0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0];
#[rustfmt::skip]
const A: [[f64; 12]; 12] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];
#[rustfmt::skip]
const B: [f64; 12] = [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259];
#[rustfmt::skip]
const E3: [f64; 12] = [-0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, -0.4226823213237919, -0.1521609496625161, 0.20136540080403034, 0.02265179219836082];
#[rustfmt::skip]
const E5: [f64; 12] = [0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dop853Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dop853Options {
    fn default() -> Self {
        Dop853Options {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

/// Integrator state for y' = f(t, y) on complex vectors.
pub struct Dop853<F> {
    f: F,
    opts: Dop853Options,
    t: f64,
    y: Vec<Complex64>,
    f0: Vec<Complex64>,
    h: Option<f64>,
    k: Vec<Vec<Complex64>>,
    tmp: Vec<Complex64>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<F> Dop853<F>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(mut f: F, t0: f64, y0: Vec<Complex64>, opts: Dop853Options) -> Self {
        let n = y0.len();
        let mut f0 = vec![Complex64::default(); n];
        f(t0, &y0, &mut f0);
        Dop853 {
            f,
            opts,
            t: t0,
            y: y0,
            f0,
            h: None,
            k: vec![vec![Complex64::default(); n]; N_STAGES],
            tmp: vec![Complex64::default(); n],
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[Complex64] {
        &self.y
    }

    fn scale(&self, a: Complex64, b: Complex64) -> f64 {
        self.opts.atol + self.opts.rtol * a.norm().max(b.norm())
    }

    fn initial_step(&mut self, direction: f64) -> f64 {
        let n = self.y.len() as f64;
        let scale: Vec<f64> = self
            .y
            .iter()
            .map(|v| self.opts.atol + self.opts.rtol * v.norm())
            .collect();
        let rms = |v: &mut dyn Iterator<Item = f64>| (v.map(|x| x * x).sum::<f64>() / n).sqrt();
        let d0 = rms(&mut self.y.iter().zip(&scale).map(|(v, s)| v.norm() / s));
        let d1 = rms(&mut self.f0.iter().zip(&scale).map(|(v, s)| v.norm() / s));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        for i in 0..self.y.len() {
            self.tmp[i] = self.y[i] + direction * h0 * self.f0[i];
        }
        let mut f1 = vec![Complex64::default(); self.y.len()];
        (self.f)(self.t + direction * h0, &self.tmp, &mut f1);
        let d2 = rms(&mut f1
            .iter()
            .zip(&self.f0)
            .zip(&scale)
            .map(|((a, b), s)| (a - b).norm() / s))
            / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / (ORDER + 1.0))
        };
        (100.0 * h0).min(h1)
    }

    /// One trial step of size h. Returns the scaled error norm and leaves
    /// the candidate solution in `tmp`.
    fn trial(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        self.k[0].copy_from_slice(&self.f0);
        for s in 1..N_STAGES {
            for i in 0..n {
                let mut acc = Complex64::default();
                for j in 0..s {
                    acc += A[s][j] * self.k[j][i];
                }
                self.tmp[i] = self.y[i] + h * acc;
            }
            (self.f)(self.t + C[s] * h, &self.tmp, &mut self.k[s]);
        }
        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..n {
            let mut acc = Complex64::default();
            let mut e5 = Complex64::default();
            let mut e3 = Complex64::default();
            for j in 0..N_STAGES {
                acc += B[j] * self.k[j][i];
                e5 += E5[j] * self.k[j][i];
                e3 += E3[j] * self.k[j][i];
            }
            let y_new = self.y[i] + h * acc;
            self.tmp[i] = y_new;
            let sc = self.scale(self.y[i], y_new);
            err5 += (e5 / sc).norm_sqr();
            err3 += (e3 / sc).norm_sqr();
        }
        if err5 == 0.0 && err3 == 0.0 {
            return 0.0;
        }
        h.abs() * err5 / ((err5 + 0.01 * err3) * n as f64).sqrt()
    }

    /// Integrates up to exactly `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        if t_end == self.t {
            return Ok(());
        }
        let direction = (t_end - self.t).signum();
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(direction),
        };
        while (t_end - self.t) * direction > 0.0 {
            if self.accepted + self.rejected >= self.opts.max_steps {
                return Err(Error::NoConvergence {
                    iterations: self.opts.max_steps,
                    residual: (t_end - self.t).abs(),
                });
            }
            let min_step = 10.0 * f64::EPSILON * self.t.abs().max(f64::MIN_POSITIVE);
            let mut rejected_once = false;
            loop {
                if h < min_step {
                    return Err(Error::StepSizeUnderflow { time: self.t });
                }
                let remaining = (t_end - self.t).abs();
                let (step, last) = if h >= remaining {
                    (remaining, true)
                } else {
                    (h, false)
                };
                let norm = self.trial(direction * step);
                if norm < 1.0 {
                    let mut factor = if norm == 0.0 {
                        MAX_FACTOR
                    } else {
                        MAX_FACTOR.min(SAFETY * norm.powf(-1.0 / (ORDER + 1.0)))
                    };
                    if rejected_once {
                        factor = factor.min(1.0);
                    }
                    std::mem::swap(&mut self.y, &mut self.tmp);
                    self.t = if last { t_end } else { self.t + direction * step };
                    let mut f_new = std::mem::take(&mut self.f0);
                    (self.f)(self.t, &self.y, &mut f_new);
                    self.f0 = f_new;
                    self.accepted += 1;
                    // a step clipped to hit t_end does not shrink the next one
                    h = if last { h.max(step * factor) } else { step * factor };
                    break;
                }
                self.rejected += 1;
                rejected_once = true;
                h = step * MIN_FACTOR.max(SAFETY * norm.powf(-1.0 / (ORDER + 1.0)));
            }
        }
        self.h = Some(h);
        Ok(())
    }
}
