//! Flows of vector fields by an adaptive Dormand-Prince 5(4) integrator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VectorField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl Default for FlowSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: 0.1,
        }
    }
}

impl FlowSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.rel_tol) && ok(self.abs_tol) && ok(self.max_step) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("flow settings must be positive: {self:?}")))
        }
    }
}

/// The time-t maps of a vector field.
#[derive(Debug, Clone)]
pub struct FlowMap {
    field: VectorField,
    settings: FlowSettings,
}

/// Accepted integration steps of one trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// Signed step sizes, `times[i + 1] - times[i]` as taken by the integrator.
    pub steps: Vec<f64>,
    pub rejected: usize,
}

impl Trajectory {
    pub fn end(&self) -> &[f64] {
        self.points.last().expect("trajectory has a start point")
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Dense output coefficients of the 4th-order continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;
const MAX_STEPS: usize = 1_000_000;

struct Step {
    y_new: Vec<f64>,
    k_last: Vec<f64>,
    err: Vec<f64>,
    /// `h * (u'(t + h/2) - X(u(t + h/2)))` for the dense output `u`.
    defect: Vec<f64>,
}

impl FlowMap {
    pub fn new(field: VectorField) -> Self {
        Self {
            field,
            settings: FlowSettings::default(),
        }
    }

    pub fn with_settings(field: VectorField, settings: FlowSettings) -> Result<Self> {
        settings.validate()?;
        Ok(Self { field, settings })
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn settings(&self) -> &FlowSettings {
        &self.settings
    }

    /// `phi_t(x0)`; `t` may be negative.
    pub fn flow(&self, x0: &[f64], t: f64) -> Result<Vec<f64>> {
        Ok(self.trajectory(x0, t)?.end().to_vec())
    }

    /// Integrate from `x0` over `[0, t]`, keeping every accepted step.
    pub fn trajectory(&self, x0: &[f64], t: f64) -> Result<Trajectory> {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("flow time must be finite, got {t}")));
        }
        let mut y = x0.to_vec();
        let mut k1 = self.field.eval(&y)?;
        let mut tr = Trajectory {
            times: vec![0.0],
            points: vec![y.clone()],
            steps: Vec::new(),
            rejected: 0,
        };
        if t == 0.0 {
            return Ok(tr);
        }
        let dir = t.signum();
        let span = t.abs();
        let min_step = 1e-14 * span.max(1.0);
        let mut done = 0.0;
        let mut h = self.initial_step(&y, &k1, dir).min(span);
        let mut err_prev: f64 = 1.0;
        let mut last_failure: Option<Error> = None;
        let mut rejected_before = false;

        for _ in 0..MAX_STEPS {
            if done >= span {
                return Ok(tr);
            }
            let mut last_step = false;
            if done + h >= span {
                h = span - done;
                last_step = true;
            }
            if h < min_step {
                let here = y.clone();
                let time = dir * done;
                return Err(match last_failure {
                    Some(Error::OutOfDomain { .. }) => Error::DomainExit { time, point: here },
                    _ => Error::StepUnderflow { time, point: here },
                });
            }
            match self.attempt(&y, &k1, dir * h, true) {
                Ok(step) => {
                    let err = self
                        .error_norm(&y, &step.y_new, &step.err)
                        .max(self.error_norm(&y, &step.y_new, &step.defect));
                    if err <= 1.0 {
                        done = if last_step { span } else { done + h };
                        y = step.y_new;
                        k1 = step.k_last;
                        tr.times.push(dir * done);
                        tr.points.push(y.clone());
                        tr.steps.push(dir * h);
                        let mut fac = if err == 0.0 {
                            5.0
                        } else {
                            SAFETY * err.powf(-PI_ALPHA) * err_prev.powf(PI_BETA)
                        };
                        fac = fac.clamp(0.2, 5.0);
                        if rejected_before {
                            fac = fac.min(1.0);
                        }
                        err_prev = err.max(1e-4);
                        rejected_before = false;
                        last_failure = None;
                        h = (h * fac).min(self.settings.max_step);
                    } else {
                        tr.rejected += 1;
                        rejected_before = true;
                        let fac = (SAFETY * err.powf(-PI_ALPHA)).clamp(0.2, 1.0);
                        h *= fac;
                    }
                }
                Err(e) if e.is_pointwise() => {
                    tr.rejected += 1;
                    rejected_before = true;
                    last_failure = Some(e);
                    h *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::StepUnderflow {
            time: dir * done,
            point: y,
        })
    }

    /// Replay a fixed sequence of signed steps from `x0` without error control.
    ///
    /// Used to differentiate the numerical flow map: nearby starts integrated
    /// with identical steps give a map that is smooth in the start point.
    pub fn replay(&self, x0: &[f64], steps: &[f64]) -> Result<Vec<f64>> {
        let mut y = x0.to_vec();
        let mut k1 = self.field.eval(&y)?;
        for &h in steps {
            let s = self.attempt(&y, &k1, h, false)?;
            y = s.y_new;
            k1 = s.k_last;
        }
        Ok(y)
    }

    /// Starting step from the scaled size of the state, the field and an
    /// estimate of its second derivative along the solution.
    fn initial_step(&self, y: &[f64], f0: &[f64], dir: f64) -> f64 {
        let sc: Vec<f64> = y
            .iter()
            .map(|v| self.settings.abs_tol + self.settings.rel_tol * v.abs())
            .collect();
        let rms = |v: &[f64]| {
            (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
        };
        let (d0, d1) = (rms(y), rms(f0));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h0 * b).collect();
        let h = match self.field.eval(&y1) {
            Ok(f1) => {
                let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
                let d2 = rms(&diff) / h0;
                let h1 = if d1.max(d2) <= 1e-15 {
                    (h0 * 1e-3).max(1e-6)
                } else {
                    (0.01 / d1.max(d2)).powf(0.2)
                };
                (100.0 * h0).min(h1)
            }
            Err(_) => h0,
        };
        // a state far below the absolute tolerance makes d0 / d1 meaningless
        h.max(1e-6).min(self.settings.max_step)
    }

    /// One Dormand-Prince step. With `defect` set, the residual of the dense
    /// output at the midpoint is also measured; the embedded estimate alone can
    /// miss steps that straddle a kink of the field.
    fn attempt(&self, y: &[f64], k1: &[f64], h: f64, defect: bool) -> Result<Step> {
        let n = y.len();
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(k1.to_vec());
        let mut tmp = vec![0.0; n];
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += A[s][j] * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
            debug_assert!(C[s] > 0.0);
            k.push(self.field.eval(&tmp)?);
        }
        // stage 7 sits at the fifth-order solution (FSAL)
        let y_new = tmp;
        let err: Vec<f64> = (0..n)
            .map(|i| h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>())
            .collect();
        let defect = if defect {
            self.midpoint_defect(y, &y_new, &k, h)?
        } else {
            Vec::new()
        };
        let k_last = k.pop().expect("seven stages");
        Ok(Step {
            y_new,
            k_last,
            err,
            defect,
        })
    }

    fn midpoint_defect(&self, y: &[f64], y_new: &[f64], k: &[Vec<f64>], h: f64) -> Result<Vec<f64>> {
        let n = y.len();
        let (s, w) = (0.5, 0.5);
        let mut u = vec![0.0; n];
        let mut du = vec![0.0; n];
        for i in 0..n {
            let r2 = y_new[i] - y[i];
            let r3 = h * k[0][i] - r2;
            let r4 = r2 - h * k[6][i] - r3;
            let r5 = h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>();
            let c = r4 + w * r5;
            let b = r3 + s * c;
            let a = r2 + w * b;
            u[i] = y[i] + s * a;
            // derivative in the step fraction
            let db = c - s * r5;
            let da = -b + w * db;
            du[i] = a + s * da;
        }
        let fu = self.field.eval(&u)?;
        Ok((0..n).map(|i| du[i] - h * fu[i]).collect())
    }

    fn error_norm(&self, y: &[f64], y_new: &[f64], err: &[f64]) -> f64 {
        let n = y.len() as f64;
        (y.iter()
            .zip(y_new)
            .zip(err)
            .map(|((a, b), e)| {
                let sc = self.settings.abs_tol + self.settings.rel_tol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / n)
            .sqrt()
    }
}
