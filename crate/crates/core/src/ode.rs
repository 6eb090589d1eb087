//! Dormand-Prince 5(4) with step-level access for callers that need to
//! inspect or veto every accepted step.

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

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// b - b* (fifth minus embedded fourth order)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub safety: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_min: 1e-14,
            safety: 0.9,
        }
    }
}

/// Step-size limits for [`Dopri5::integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Steps {
    pub initial: f64,
    pub max: f64,
    pub limit: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Trial<const N: usize> {
    pub y: [f64; N],
    /// Scaled RMS error; the step is acceptable when this is at most one.
    pub err: f64,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// One trial step of size `h` from `(x, y)`.
    pub fn attempt<const N: usize, F>(&self, f: &mut F, x: f64, y: &[f64; N], h: f64) -> Trial<N>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let k1 = f(x, y);
        let k2 = f(x + C2 * h, &axpy(y, h, &[(A21, &k1)]));
        let k3 = f(x + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            x + C4 * h,
            &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            x + C5 * h,
            &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &axpy(
                y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(x + h, &y_new);
        let mut acc = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        let err = (acc / N as f64).sqrt();
        Trial {
            y: y_new,
            err: if err.is_finite() { err } else { f64::INFINITY },
        }
    }

    /// Step-size proposal after a trial with scaled error `err`.
    pub fn propose(&self, h: f64, err: f64) -> f64 {
        let fac = if err == 0.0 {
            5.0
        } else {
            (self.safety * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h * fac
    }

    /// Integrates from `x0` to `x1`, calling `observe` after each accepted
    /// step. Returns the final state and the number of accepted steps.
    pub fn integrate<const N: usize, F, O>(
        &self,
        f: &mut F,
        x0: f64,
        y0: [f64; N],
        x1: f64,
        steps: Steps,
        mut observe: O,
    ) -> Option<([f64; N], usize)>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N]),
    {
        let Steps {
            initial: h0,
            max: h_max,
            limit: max_steps,
        } = steps;
        let dir = (x1 - x0).signum();
        let mut x = x0;
        let mut y = y0;
        let mut h = h0.abs().min(h_max) * dir;
        let mut accepted = 0;
        for _ in 0..max_steps {
            if (x1 - x) * dir <= 0.0 {
                return Some((y, accepted));
            }
            if (x + h - x1) * dir > 0.0 {
                h = x1 - x;
            }
            let trial = self.attempt(f, x, &y, h);
            if trial.err <= 1.0 {
                x += h;
                y = trial.y;
                accepted += 1;
                observe(x, &y);
            }
            let next = self.propose(h.abs(), trial.err).min(h_max);
            if next < self.h_min {
                return None;
            }
            h = next * dir;
        }
        None
    }
}
