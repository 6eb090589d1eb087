//! Closing-point estimate `P ≃ exp(−2 Im Δ(t_c))` and its specializations.

use crate::continuation::{Continuation, Exponent};
use crate::error::{Error, Result, Warning};
use crate::model::{ModelSpec, Window};
use crate::quadrature::integrate_real;
use crate::{C64, I};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DdpResult {
    pub closing_point: C64,
    /// 2 Im Δ(t_c).
    pub exponent: f64,
    pub probability: f64,
    pub applicable: bool,
    /// Lowest pole at or below the closing point, when there is one.
    pub obstruction: Option<C64>,
    /// The pole coincides with the closing point.
    pub degenerate: bool,
    pub warnings: Vec<Warning>,
}

/// DDP estimate from the closing point nearest the real axis.
pub fn ddp_probability(model: &ModelSpec) -> Result<DdpResult> {
    ddp_probability_in(model, &model.default_window())
}

/// As [`ddp_probability`] with an explicit singularity search window.
pub fn ddp_probability_in(model: &ModelSpec, window: &Window) -> Result<DdpResult> {
    model.validate()?;
    let catalog = model.singularities(window)?;
    let tc = catalog.nearest_closing().ok_or(Error::NoClosingPoint)?;
    let scale = model.local_scale();
    let obstruction = catalog
        .poles
        .iter()
        .filter(|p| p.t.im <= tc.im + 1e-12 * scale)
        .map(|p| p.t)
        .next();
    let degenerate = obstruction
        .map(|p| (p - tc).norm() <= 1e-12 * scale)
        .unwrap_or(false);
    let exponent = if degenerate {
        match *model {
            ModelSpec::ModifiedLz { lambda, tau, big_t } => mlz_ddp_exponent(lambda, tau, big_t)?,
            _ => {
                return Err(Error::Domain(
                    "pole coincides with the closing point".into(),
                ))
            }
        }
    } else {
        let extent = 2.0 * (tc.norm() + model.characteristic_time());
        let cont = Continuation::new(model, Some(extent));
        2.0 * cont.evaluate(tc, false)?.big_delta.im
    };
    Ok(DdpResult {
        closing_point: tc,
        exponent,
        probability: (-exponent).exp(),
        applicable: obstruction.is_none(),
        obstruction,
        degenerate,
        warnings: catalog.warnings,
    })
}

/// Closed-form DDP exponent of the modified Landau-Zener model,
/// `(2TΛ/τ) E(τ/T, T/τ)`, valid for T ≥ τ.
pub fn mlz_ddp_exponent(lambda: f64, tau: f64, big_t: f64) -> Result<f64> {
    Ok(2.0 * big_t * lambda / tau * elliptic_e_incomplete(tau / big_t, big_t / tau)?)
}

/// `E(x, k) = ∫₀ˣ √(1 − k²s²) / √(1 − s²) ds` for 0 < x ≤ 1 and kx ≤ 1.
pub fn elliptic_e_incomplete(x: f64, k: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0 + 1e-14 && k > 0.0 && k * x <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "elliptic E needs 0 < x ≤ 1 and kx ≤ 1 (x = {x}, k = {k})"
        )));
    }
    let x = x.min(1.0);
    let kx2 = (k * x).powi(2).min(1.0);
    // s = x sin θ removes the endpoint singularity at s = 1
    let f = |th: f64| {
        let s2 = th.sin().powi(2);
        let c = th.cos();
        let num = (1.0 - kx2 * s2).max(0.0).sqrt();
        let den = (1.0 - x * x * s2).max(0.0).sqrt();
        if den == 0.0 {
            // x = 1 at θ = π/2: cos θ/√(1 − sin²θ) → 1
            return x * num;
        }
        x * c * num / den
    };
    let (v, _) = integrate_real(f, 0.0, FRAC_PI_2, 1e-15, 1e-14);
    Ok(v)
}

/// Sauter exponent A in `P ≃ exp(−A m²/eE)`: the full closing-point form
/// and its small-momentum simplification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SauterExponent {
    pub full: f64,
    pub simplified: f64,
}

pub fn sauter_ddp_closed_form(model: &ModelSpec) -> Result<SauterExponent> {
    let ModelSpec::SauterPulse {
        e_field,
        omega,
        mass,
        p_z,
        ..
    } = *model
    else {
        return Err(Error::Domain(
            "closed form applies to the Sauter pulse only".into(),
        ));
    };
    let mp = model.m_perp().unwrap();
    let gamma = mass * omega / e_field;
    let mg = mass / gamma;
    let full = PI / (gamma * mass)
        * (((mg + p_z).powi(2) + mp * mp).sqrt() + ((mg - p_z).powi(2) + mp * mp).sqrt()
            - 2.0 * mg);
    let simplified =
        PI * mp * mp / (2.0 * mass) * (1.0 / (mass + gamma * p_z) + 1.0 / (mass - gamma * p_z));
    Ok(SauterExponent { full, simplified })
}

/// Smallest root `u ∈ (0, π/2)` of `u + r tan u = γ`.
pub fn dasm_closing_point(gamma: f64, ratio: f64) -> Result<f64> {
    if !(gamma > 0.0 && ratio >= 0.0 && gamma.is_finite() && ratio.is_finite()) {
        return Err(Error::Domain(format!(
            "need γ > 0 and ε/E ≥ 0 (γ = {gamma}, ε/E = {ratio})"
        )));
    }
    if ratio == 0.0 {
        return if gamma < FRAC_PI_2 {
            Ok(gamma)
        } else {
            Err(Error::Domain(
                "no root below π/2 without the weak pulse".into(),
            ))
        };
    }
    let f = |u: f64| u + ratio * u.tan() - gamma;
    let mut lo = 0.0;
    let mut hi = FRAC_PI_2;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Asymptotic exponent `2π/γ` of the assisted mechanism.
pub fn dasm_asymptotic_exponent(gamma: f64) -> f64 {
    2.0 * PI / gamma
}

/// Level set `Im Δ = Im Δ(t_c)` through the closing point, traced until
/// Re t leaves `span`. Returned left to right.
pub fn ddp_contour(model: &ModelSpec, tc: C64, span: (f64, f64)) -> Result<Vec<C64>> {
    let extent = 1.5 * span.0.abs().max(span.1.abs()).max(2.0 * tc.norm());
    let cont = Continuation::new(model, Some(extent));
    let scale = cont.scale;
    let target = cont.evaluate(tc, false)?.big_delta.im;
    let rho = 1e-3 * scale;
    // (2/3) δE (t − t_c) approximates Δ − Δ(t_c) near the branch point
    let n = 720;
    let mut vals = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let a = 2.0 * PI * k as f64 / n as f64 - FRAC_PI_2;
        let t = tc + C64::from_polar(rho, a);
        let g = cont.gap_at(t)?;
        vals.push((a, (2.0 / 3.0 * g * (t - tc)).im));
    }
    let mut rays = Vec::new();
    for w in vals.windows(2) {
        let ((a0, v0), (a1, v1)) = (w[0], w[1]);
        if v0 == 0.0 || v0.signum() != v1.signum() {
            let a = a0 + (a1 - a0) * v0 / (v0 - v1);
            if (a - FRAC_PI_2).abs() > 0.2 && (a - FRAC_PI_2 - 2.0 * PI).abs() > 0.2 {
                rays.push(a);
            }
        }
    }
    let right = rays
        .iter()
        .copied()
        .max_by(|a, b| a.cos().total_cmp(&b.cos()));
    let left = rays
        .iter()
        .copied()
        .min_by(|a, b| a.cos().total_cmp(&b.cos()));
    let (Some(right), Some(left)) = (right, left) else {
        return Err(Error::TracingStall(tc));
    };
    if right.cos() <= 0.0 || left.cos() >= 0.0 {
        return Err(Error::TracingStall(tc));
    }
    let mut out = trace_level(&cont, tc, left, rho, target, span)?;
    out.reverse();
    out.push(tc);
    out.extend(trace_level(&cont, tc, right, rho, target, span)?);
    Ok(out)
}

fn trace_level<E: Exponent + ?Sized>(
    cont: &Continuation<E>,
    tc: C64,
    angle: f64,
    rho: f64,
    target: f64,
    span: (f64, f64),
) -> Result<Vec<C64>> {
    let scale = cont.scale;
    let mut t = tc + C64::from_polar(rho, angle);
    let v = cont.evaluate(t, false)?;
    let mut delta = v.big_delta;
    let mut gap = v.gap;
    let tol = 1e-12 * (1.0 + target.abs());
    let correct = |t: &mut C64, delta: &mut C64, gap: &mut C64| -> Result<()> {
        for _ in 0..8 {
            let r = delta.im - target;
            if r.abs() < tol {
                break;
            }
            let dt = -I * r * gap.conj() / gap.norm_sqr();
            let seg = cont.segment(*t, *t + dt, *gap, false)?;
            *t += dt;
            *delta += seg.d_delta;
            *gap = seg.gap_end;
        }
        Ok(())
    };
    correct(&mut t, &mut delta, &mut gap)?;
    let mut dir = C64::from_polar(1.0, angle);
    let mut out = vec![t];
    for _ in 0..200_000 {
        if t.re < span.0 || t.re > span.1 {
            return Ok(out);
        }
        let dist = cont.singular_distance(t);
        if dist < 1e-6 * scale {
            return Err(Error::TracingStall(t));
        }
        let mut d = gap.conj() / gap.norm();
        if (d * dir.conj()).re < 0.0 {
            d = -d;
        }
        let h = (0.02 * scale.max(0.05 * t.norm()))
            .min(0.3 * dist)
            .min(0.25 * (t - tc).norm().max(rho));
        let t1 = t + h * d;
        let seg = cont.segment(t, t1, gap, false)?;
        let (mut tn, mut dn, mut gn) = (t1, delta + seg.d_delta, seg.gap_end);
        correct(&mut tn, &mut dn, &mut gn)?;
        dir = (tn - t) / (tn - t).norm();
        t = tn;
        delta = dn;
        gap = gn;
        out.push(t);
    }
    Err(Error::TracingStall(t))
}
