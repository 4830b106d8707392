//! Dormand–Prince 5(4) with PI step-size control on complex state vectors.
//!
//! Coefficients and the controller follow Hairer, Nørsett & Wanner,
//! "Solving Ordinary Differential Equations I", Sec. II.4 (`DOPRI5`).

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]);

    /// Upper bound on the step size at time `t`.
    fn max_step(&self, _t: f64) -> f64 {
        f64::INFINITY
    }

    /// Called on every accepted state; may project it back onto the
    /// physical manifold (Hermitian, unit trace, unit norm).
    fn post_step(&mut self, _y: &mut [C64]) {}
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive integrator state. One instance follows one trajectory: the step
/// size and the first-same-as-last stage carry over between
/// [`Dopri5::advance`] calls.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
    pub stats: Stats,
    safety: f64,
    fac_min: f64,
    fac_max: f64,
    beta: f64,
    h: f64,
    fac_old: f64,
    k: [Vec<C64>; 7],
    y_stage: Vec<C64>,
    y_new: Vec<C64>,
    fsal: bool,
}

impl Dopri5 {
    pub fn new(dim: usize, rtol: f64, atol: f64) -> Self {
        Dopri5 {
            rtol,
            atol,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
            stats: Stats::default(),
            safety: 0.9,
            fac_min: 0.2,
            fac_max: 10.0,
            beta: 0.04,
            h: 0.0,
            fac_old: 1e-4,
            k: std::array::from_fn(|_| vec![ZERO; dim]),
            y_stage: vec![ZERO; dim],
            y_new: vec![ZERO; dim],
            fsal: false,
        }
    }

    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// Current (proposed) step size; zero before the first step.
    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Marks the cached derivative stale, e.g. after the caller modified `y`.
    pub fn invalidate(&mut self) {
        self.fsal = false;
    }

    fn weight(&self, a: C64, b: C64) -> f64 {
        self.atol + self.rtol * a.norm().max(b.norm())
    }

    fn rms_norm(&self, v: &[C64], y: &[C64]) -> f64 {
        let n = v.len().max(1) as f64;
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(vi, yi)| (vi.norm() / (self.atol + self.rtol * yi.norm())).powi(2))
            .sum();
        (s / n).sqrt()
    }

    fn initial_step<S: OdeSystem>(&mut self, sys: &mut S, t: f64, y: &[C64], span: f64) -> f64 {
        let d0 = self.rms_norm(y, y);
        let d1 = self.rms_norm(&self.k[0], y);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * span
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span).min(self.h_max).min(sys.max_step(t));
        for (ys, (yi, ki)) in self.y_stage.iter_mut().zip(y.iter().zip(&self.k[0])) {
            *ys = yi + ki * h0;
        }
        let mut f1 = vec![ZERO; y.len()];
        sys.rhs(t + h0, &self.y_stage, &mut f1);
        self.stats.evaluations += 1;
        let diff: Vec<C64> = f1.iter().zip(&self.k[0]).map(|(a, b)| a - b).collect();
        let d2 = self.rms_norm(&diff, y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    /// Integrates from `*t` to `t_end`, landing exactly on `t_end`.
    pub fn advance<S: OdeSystem>(
        &mut self,
        sys: &mut S,
        t: &mut f64,
        y: &mut [C64],
        t_end: f64,
    ) -> Result<()> {
        let n = y.len();
        if *t >= t_end {
            return Ok(());
        }
        if !self.fsal {
            sys.rhs(*t, y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.fsal = true;
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(sys, *t, y, t_end - *t);
        }
        let expo = 0.2 - self.beta * 0.75;
        let mut last_rejected = false;
        loop {
            let remaining = t_end - *t;
            if remaining <= 1e-15 * t_end.abs().max(1e-300) {
                *t = t_end;
                return Ok(());
            }
            if self.stats.accepted + self.stats.rejected >= self.max_steps {
                return Err(Error::TooManySteps(self.max_steps));
            }
            let natural = self.h.min(self.h_max).min(sys.max_step(*t));
            let clipped = natural >= remaining;
            let h = if clipped { remaining } else { natural };
            if h <= 1e-14 * t.abs().max(remaining) || !h.is_finite() {
                return Err(Error::StepSizeUnderflow { t: *t, h });
            }
            self.stage_all(sys, *t, y, h, n);

            let mut err = 0.0;
            for i in 0..n {
                let e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * h;
                let sk = self.weight(y[i], self.y_new[i]);
                err += (e.norm() / sk).powi(2);
            }
            let err = (err / n as f64).sqrt();
            let fac11 = err.powf(expo);
            if err <= 1.0 {
                let mut fac = fac11 / self.fac_old.powf(self.beta);
                fac = (fac / self.safety).clamp(1.0 / self.fac_max, 1.0 / self.fac_min);
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = h_new.min(h);
                }
                self.fac_old = err.max(1e-4);
                self.stats.accepted += 1;
                *t += h;
                if clipped {
                    *t = t_end;
                }
                y.copy_from_slice(&self.y_new);
                sys.post_step(y);
                self.k.swap(0, 6);
                // a clipped landing step says nothing about the natural scale
                self.h = if clipped { natural.max(h_new) } else { h_new };
                last_rejected = false;
                if clipped {
                    return Ok(());
                }
            } else {
                self.stats.rejected += 1;
                self.h = h / (fac11 / self.safety).min(1.0 / self.fac_min);
                last_rejected = true;
            }
        }
    }

    fn stage_all<S: OdeSystem>(&mut self, sys: &mut S, t: f64, y: &[C64], h: f64, n: usize) {
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let ys = &mut self.y_stage;
        for i in 0..n {
            ys[i] = y[i] + k1[i] * (h * A21);
        }
        sys.rhs(t + C2 * h, ys, k2);
        for i in 0..n {
            ys[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        sys.rhs(t + C3 * h, ys, k3);
        for i in 0..n {
            ys[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        sys.rhs(t + C4 * h, ys, k4);
        for i in 0..n {
            ys[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        sys.rhs(t + C5 * h, ys, k5);
        for i in 0..n {
            ys[i] = y[i]
                + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        sys.rhs(t + h, ys, k6);
        let yn = &mut self.y_new;
        for i in 0..n {
            yn[i] = y[i]
                + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        sys.rhs(t + h, yn, k7);
        self.stats.evaluations += 6;
    }
}
