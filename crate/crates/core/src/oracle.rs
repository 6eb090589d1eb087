//! Reference values on the real axis: the full two-level equations of
//! motion, and direct quadrature of the first-order amplitude
//! `a₊ = ∫ η e^{iΔ} dt`.
//!
//! Both integrate over a finite horizon [−T₀, T₀] and add the asymptotic
//! tails `∫_{±T₀}^{±∞} η e^{iΔ} dt ≈ ∓ e^{iΔ}(−i g₀ + g₁)` with
//! `g₀ = η/δE` and `g₁ = g₀'/δE`. The horizon is doubled until P settles.

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::ode::{Dopri5, Steps};
use crate::quadrature::{gk15_nodes, gk15_weights, gl20, integrate_real};
use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    OdeFull,
    RealAxisQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonPolicy {
    /// First horizon in units of the local scale.
    pub initial: f64,
    /// Accepted relative change of P under one doubling.
    pub change: f64,
    pub max_doublings: u32,
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        Self {
            initial: 20.0,
            change: 1e-3,
            max_doublings: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    /// Relative change of P across the last horizon doubling.
    pub horizon_change: f64,
    /// Relative change of P when the tolerance is halved at the final horizon.
    pub tolerance_change: f64,
    pub doublings: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub method: OracleMethod,
    /// Only produced by the quadrature.
    pub amplitude: Option<C64>,
    pub probability: f64,
    /// T₀.
    pub horizon: f64,
    pub tolerance: f64,
    pub convergence: Convergence,
    /// Largest | |a₊|² + |a₋|² − 1 | over accepted steps (ODE only).
    pub norm_drift: Option<f64>,
    /// Size of the last tail term kept at the horizon.
    pub tail_bound: f64,
}

/// Tail data at a real time: δE and the first three of
/// `g₀ = η/δE`, `g_{k+1} = g_k'/δE`.
struct Tail {
    gap: f64,
    g0: f64,
    g1: f64,
    g2: f64,
}

fn g0_g1(model: &ModelSpec, t: f64) -> (f64, f64, f64) {
    let j = model.jet(C64::new(t, 0.0));
    let gap = j.gap_sq().re.sqrt();
    let gap_prime = j.half_gap_sq_prime().re / gap;
    let eta = j.eta().re;
    let eta_prime = if eta == 0.0 {
        0.0
    } else {
        eta * j.eta_log_derivative().re
    };
    let g0 = eta / gap;
    let g0_prime = eta_prime / gap - eta * gap_prime / (gap * gap);
    (gap, g0, g0_prime / gap)
}

fn tail_at(model: &ModelSpec, t: f64) -> Tail {
    let (gap, g0, g1) = g0_g1(model, t);
    let h = 1e-4 * t.abs().max(model.local_scale());
    let g1_prime = (g0_g1(model, t + h).2 - g0_g1(model, t - h).2) / (2.0 * h);
    Tail {
        gap,
        g0,
        g1,
        g2: g1_prime / gap,
    }
}

/// `∫_{−∞}^{t} η e^{iΔ} dt` for t → −∞, up to the factor e^{iΔ(t)}:
/// `−i g₀ + g₁ + i g₂`.
fn lower_tail(tl: &Tail) -> C64 {
    C64::new(tl.g1, tl.g2 - tl.g0)
}

fn delta_from_origin(model: &ModelSpec, t: f64, tol: f64) -> f64 {
    let gap_origin = model.gap_at_origin();
    integrate_real(
        |x| model.delta_e_real(x),
        0.0,
        t,
        tol * gap_origin * t.abs(),
        1e-14,
    )
    .0
}

fn relative_change(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs()).max(1e-300)
    }
}

struct Run {
    amplitude: Option<C64>,
    probability: f64,
    drift: Option<f64>,
    tail: f64,
}

fn ode_run(model: &ModelSpec, x: f64, tol: f64) -> Result<Run> {
    let lo = tail_at(model, -x);
    let hi = tail_at(model, x);
    let d0 = delta_from_origin(model, -x, 1e-3 * tol);
    let ap0 = C64::from_polar(1.0, d0) * lower_tail(&lo);
    let am0 = (1.0 - ap0.norm_sqr()).max(0.0).sqrt();
    let y0 = [ap0.re, ap0.im, am0, 0.0, d0];
    let mut rhs = |t: f64, y: &[f64; 5]| -> [f64; 5] {
        let j = model.jet(C64::new(t, 0.0));
        let eta = j.eta().re;
        let gap = j.gap_sq().re.sqrt();
        let ph = C64::from_polar(1.0, y[4]);
        let ap = C64::new(y[0], y[1]);
        let am = C64::new(y[2], y[3]);
        let dap = eta * ph * am;
        let dam = -eta * ph.conj() * ap;
        [dap.re, dap.im, dam.re, dam.im, gap]
    };
    let solver = Dopri5::new(tol, 1e-3 * tol);
    let mut drift: f64 = 0.0;
    let norm0 = ap0.norm_sqr() + am0 * am0;
    let h_max = 0.25 * model.local_scale();
    let (y, _) = solver
        .integrate(
            &mut rhs,
            -x,
            y0,
            x,
            Steps {
                initial: 1e-3 * h_max,
                max: h_max,
                limit: 50_000_000,
            },
            |_, y| {
                let n = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
                drift = drift.max((n - norm0).abs());
            },
        )
        .ok_or_else(|| Error::NonConvergence(format!("ODE step size collapsed on [−{x}, {x}]")))?;
    let am = C64::new(y[2], y[3]);
    let ap = C64::new(y[0], y[1]) - am * C64::from_polar(1.0, y[4]) * lower_tail(&hi);
    let tail = lo.g2.abs().max(hi.g2.abs());
    Ok(Run {
        amplitude: None,
        probability: ap.norm_sqr().min(1.0),
        drift: Some(drift),
        tail,
    })
}

/// GK15 of η e^{iΔ} on [a, b] with Δ at the nodes from 20-point
/// Gauss-Legendre integrals of δE out of `a`; splits until the Kronrod and
/// Gauss estimates agree to `abs_tol` per unit length.
fn panel(model: &ModelSpec, a: f64, b: f64, delta_a: f64, abs_tol: f64, depth: u32) -> (C64, f64) {
    let xs = gk15_nodes();
    let (wk, wg) = gk15_weights();
    let (gx, gw) = gl20();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let delta_to = |x: f64| {
        let m = 0.5 * (a + x);
        let r = 0.5 * (x - a);
        delta_a
            + r * gx
                .iter()
                .zip(gw)
                .map(|(u, w)| w * model.delta_e_real(m + r * u))
                .sum::<f64>()
    };
    let mut k = C64::new(0.0, 0.0);
    let mut g = C64::new(0.0, 0.0);
    for j in 0..15 {
        let x = c + h * xs[j];
        let v = model.eta_real(x) * C64::from_polar(1.0, delta_to(x));
        k += v * wk[j];
        g += v * wg[j];
    }
    k *= h;
    g *= h;
    if (k - g).norm() <= abs_tol * (b - a) || depth > 30 {
        return (k, delta_to(b));
    }
    let (left, dc) = panel(model, a, c, delta_a, abs_tol, depth + 1);
    let (right, db) = panel(model, c, b, dc, abs_tol, depth + 1);
    (left + right, db)
}

fn quadrature_run(model: &ModelSpec, x: f64, tol: f64) -> Result<Run> {
    let lo = tail_at(model, -x);
    let hi = tail_at(model, x);
    let d0 = delta_from_origin(model, -x, 1e-3 * tol);
    let mut acc = C64::from_polar(1.0, d0) * lower_tail(&lo);
    let scale = model.local_scale();
    let eta_max = model.eta_real(0.0).abs().max(lo.g0.abs() * lo.gap);
    let abs_tol = 1e-3 * tol * eta_max;
    let mut t = -x;
    let mut delta = d0;
    while t < x {
        let gap = model.delta_e_real(t);
        // at most half an oscillation period per panel
        let w = (std::f64::consts::PI / gap).min(0.5 * scale);
        let b = (t + w).min(x);
        let (v, db) = panel(model, t, b, delta, abs_tol, 0);
        acc += v;
        delta = db;
        t = b;
    }
    if !acc.is_finite() {
        return Err(Error::NonConvergence(
            "real-axis quadrature produced a non-finite value".into(),
        ));
    }
    acc -= C64::from_polar(1.0, delta) * lower_tail(&hi);
    let tail = lo.g2.abs().max(hi.g2.abs());
    Ok(Run {
        amplitude: Some(acc),
        probability: acc.norm_sqr(),
        drift: None,
        tail,
    })
}

fn with_horizon<F>(
    model: &ModelSpec,
    method: OracleMethod,
    tol: f64,
    policy: HorizonPolicy,
    run: F,
) -> Result<OracleResult>
where
    F: Fn(&ModelSpec, f64, f64) -> Result<Run>,
{
    model.validate()?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let mut x = policy.initial * model.local_scale().max(model.characteristic_time());
    let mut prev = run(model, x, tol)?;
    for k in 1..=policy.max_doublings {
        x *= 2.0;
        let cur = run(model, x, tol)?;
        let change = relative_change(prev.probability, cur.probability);
        if change < policy.change || (prev.probability - cur.probability).abs() < 1e-300 {
            let half = run(model, x, 0.5 * tol)?;
            return Ok(OracleResult {
                method,
                amplitude: cur.amplitude,
                probability: cur.probability,
                horizon: x,
                tolerance: tol,
                convergence: Convergence {
                    horizon_change: change,
                    tolerance_change: relative_change(cur.probability, half.probability),
                    doublings: k,
                },
                norm_drift: cur.drift.zip(half.drift).map(|(a, b)| a.max(b)),
                tail_bound: cur.tail,
            });
        }
        prev = cur;
    }
    Err(Error::NonConvergence(format!(
        "P still changing after {} horizon doublings (T₀ = {x})",
        policy.max_doublings
    )))
}

/// Full two-level evolution from a₋(−∞) = 1, P = |a₊(+∞)|².
pub fn ode_transition_probability(
    model: &ModelSpec,
    tol: f64,
    policy: HorizonPolicy,
) -> Result<OracleResult> {
    with_horizon(model, OracleMethod::OdeFull, tol, policy, ode_run)
}

/// First-order amplitude `∫ η e^{iΔ} dt` along the real axis.
pub fn truncated_amplitude_real_axis(
    model: &ModelSpec,
    tol: f64,
    policy: HorizonPolicy,
) -> Result<OracleResult> {
    with_horizon(
        model,
        OracleMethod::RealAxisQuadrature,
        tol,
        policy,
        quadrature_run,
    )
}

/// Default tolerance for both oracles.
pub const DEFAULT_TOL: f64 = 1e-10;
