//! Dormand–Prince 5(4) with FSAL and standard step-size control.

use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights are the last row of A; E = b5 − b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const SAFETY: f64 = 0.9;

/// Adaptive integrator state for `ẏ = rhs(y)`.
pub(crate) struct Dopri5<F: Fn(&[f64], &mut [f64])> {
    rhs: F,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    pub t: f64,
    pub y: Vec<f64>,
    h: f64,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl<F: Fn(&[f64], &mut [f64])> Dopri5<F> {
    pub fn new(rhs: F, y0: &[f64], rel_tol: f64, abs_tol: f64, max_step: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && abs_tol > 0.0 && max_step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "integrator tolerances must be positive (rel {rel_tol}, abs {abs_tol}, max_step {max_step})"
            )));
        }
        let n = y0.len();
        let k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
        let mut s = Self {
            rhs,
            rel_tol,
            abs_tol,
            max_step,
            t: 0.0,
            y: y0.to_vec(),
            h: 0.0,
            k,
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        };
        (s.rhs)(&s.y, &mut s.k[0]);
        s.check_finite(&s.k[0].clone())?;
        s.h = s.initial_step();
        Ok(s)
    }

    fn check_finite(&self, v: &[f64]) -> Result<()> {
        if v.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Integration {
                t: self.t,
                reason: "non-finite state or derivative".into(),
            })
        }
    }

    fn scale(&self, i: usize) -> f64 {
        self.abs_tol + self.rel_tol * self.y[i].abs()
    }

    /// Hairer–Nørsett–Wanner starting step from `‖y‖` and `‖f(y)‖`.
    fn initial_step(&self) -> f64 {
        let n = self.y.len().max(1) as f64;
        let d0 = (self.y.iter().enumerate().map(|(i, v)| (v / self.scale(i)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (self.k[0].iter().enumerate().map(|(i, v)| (v / self.scale(i)).powi(2)).sum::<f64>() / n).sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(self.max_step)
    }

    /// One attempted step of size `h`; on acceptance updates `t`, `y`, FSAL stage.
    fn try_step(&mut self, h: f64) -> Result<(bool, f64)> {
        let n = self.y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = self.y[i];
                for (j, a) in A[s].iter().enumerate().take(s) {
                    acc += h * a * self.k[j][i];
                }
                self.tmp[i] = acc;
            }
            (self.rhs)(&self.tmp, &mut self.k[s]);
        }
        // Stage 6 was evaluated at the fifth-order solution.
        self.y_new.copy_from_slice(&self.tmp);
        let mut err = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (s, es) in E.iter().enumerate() {
                e += es * self.k[s][i];
            }
            e *= h;
            let sc = self.abs_tol + self.rel_tol * self.y[i].abs().max(self.y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            return Ok((false, MIN_FACTOR));
        }
        let factor = if err == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        if err <= 1.0 {
            self.t += h;
            std::mem::swap(&mut self.y, &mut self.y_new);
            let last = std::mem::take(&mut self.k[6]);
            self.k[6] = std::mem::replace(&mut self.k[0], last);
            Ok((true, factor))
        } else {
            Ok((false, factor.min(1.0)))
        }
    }

    /// Takes one accepted step, not going past `t_end`. Returns the step size used.
    pub fn step(&mut self, t_end: f64) -> Result<f64> {
        loop {
            let remaining = t_end - self.t;
            let clipped = remaining <= self.h;
            let h = self.h.min(remaining).min(self.max_step);
            if h <= 1e-14 * self.t.abs().max(1.0) && !clipped {
                return Err(Error::Integration {
                    t: self.t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            let (accepted, factor) = self.try_step(h)?;
            if accepted {
                self.check_finite(&self.y.clone())?;
                if clipped {
                    // Snap to the target to avoid drift from t += h.
                    self.t = t_end;
                } else {
                    self.h = (h * factor).min(self.max_step);
                }
                if clipped && factor > 1.0 {
                    self.h = self.h.max(h * factor).min(self.max_step);
                }
                return Ok(h);
            }
            self.h = h * factor;
        }
    }

    /// Integrates until `t_end`, calling `on_step` after each accepted step.
    pub fn advance_to(&mut self, t_end: f64, mut on_step: impl FnMut(f64, &[f64])) -> Result<()> {
        while self.t < t_end {
            self.step(t_end)?;
            on_step(self.t, &self.y);
        }
        Ok(())
    }
}
