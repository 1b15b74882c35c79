//! Dormand–Prince 5(4) pair with PI step-size control and continuous output.

use std::ops::ControlFlow;

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

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - 0.75 * BETA;
/// Bounds on `h_new / h`.
const SHRINK_MIN: f64 = 0.2;
const GROW_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub h_min: f64,
}

/// Continuous extension over one accepted step `[t0, t0 + h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    coeffs: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        for i in 0..out.len() {
            out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_dt: f64,
}

pub enum Outcome {
    /// Reached `t_end`.
    Finished,
    /// The observer asked to stop after the step ending at this time.
    Stopped(f64),
    /// Step size fell below `h_min` at time `t` with trial step `h`.
    Underflow { t: f64, h: f64 },
}

fn axpy_into(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut acc = 0.0;
        for &(c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Integrate `y' = f(t, y)` from `t0` to `t_end`.
///
/// `observer` sees every accepted step with its continuous extension and the
/// new state; returning `Break` ends the integration after that step.
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    ctl: StepControl,
    mut observer: O,
) -> (Outcome, Vec<f64>, Stats)
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(&DenseStep, &[f64]) -> ControlFlow<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let [mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7]: [Vec<f64>; 7] =
        std::array::from_fn(|_| vec![0.0; n]);
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut stats = Stats {
        min_dt: f64::INFINITY,
        ..Stats::default()
    };
    f(t, &y, &mut k1);

    let mut h = initial_step(&y, &k1, ctl).min(ctl.h_max).min(t_end - t);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        if h < ctl.h_min && t + h < t_end {
            return (Outcome::Underflow { t, h }, y, stats);
        }
        axpy_into(&mut stage, &y, h, &[(A21, &k1)]);
        f(t + C2 * h, &stage, &mut k2);
        axpy_into(&mut stage, &y, h, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * h, &stage, &mut k3);
        axpy_into(&mut stage, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * h, &stage, &mut k4);
        axpy_into(&mut stage, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * h, &stage, &mut k5);
        axpy_into(
            &mut stage,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        f(t + h, &stage, &mut k6);
        axpy_into(
            &mut y_new,
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        f(t + h, &y_new, &mut k7);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                    + E7 * k7[i]);
            let scale = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            err = 1e10;
        }
        let fac11 = err.max(1e-300).powf(EXPO);
        if err <= 1.0 {
            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / GROW_MAX, 1.0 / SHRINK_MIN);
            let mut h_next = h / fac;
            fac_old = err.max(1e-4);

            let mut coeffs: [Vec<f64>; 5] = Default::default();
            let ydiff: Vec<f64> = (0..n).map(|i| y_new[i] - y[i]).collect();
            let bspl: Vec<f64> = (0..n).map(|i| h * k1[i] - ydiff[i]).collect();
            coeffs[3] = (0..n).map(|i| ydiff[i] - h * k7[i] - bspl[i]).collect();
            coeffs[4] = (0..n)
                .map(|i| {
                    h * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i])
                })
                .collect();
            coeffs[0] = y.clone();
            coeffs[1] = ydiff;
            coeffs[2] = bspl;
            let dense = DenseStep { t0: t, h, coeffs };

            stats.accepted += 1;
            stats.min_dt = stats.min_dt.min(h);
            t = if t_end - (t + h) <= 1e-15 * t_end.abs().max(1.0) {
                t_end
            } else {
                t + h
            };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            if last_rejected {
                h_next = h_next.min(h);
            }
            last_rejected = false;
            if observer(&dense, &y).is_break() {
                return (Outcome::Stopped(t), y, stats);
            }
            h = h_next.min(ctl.h_max);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / SHRINK_MIN);
        }
    }
    (Outcome::Finished, y, stats)
}

fn initial_step(y: &[f64], dy: &[f64], ctl: StepControl) -> f64 {
    let mut dnf: f64 = 0.0;
    let mut dny: f64 = 0.0;
    for i in 0..y.len() {
        let sk = ctl.atol + ctl.rtol * y[i].abs();
        dnf = dnf.max((dy[i] / sk).abs());
        dny = dny.max((y[i] / sk).abs());
    }
    let h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * dny / dnf
    };
    h.max(ctl.h_min * 10.0)
}
