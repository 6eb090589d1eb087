//! Δ(t), ln η(t) and F(t) = iΔ + ln η on complexified time.
//!
//! Square roots are continued along explicit paths, always taking the root
//! nearest the previous value, and ln η is unwound by integrating η'/η.
//! The default path runs along the real axis to Re t and then vertically
//! to t, so the effective cuts run vertically away from the real axis.

use crate::error::{Error, Result};
use crate::model::{ModelSpec, Singular, SingularKind, EPS_POLE};
use crate::quadrature::{gk15_nodes, gk15_weights};
use crate::{C64, I};
use serde::Serialize;

/// Local data of an exponent at one point.
#[derive(Debug, Clone, Copy)]
pub struct Local {
    pub gap_sq: C64,
    pub eta: C64,
    pub dlog_eta: C64,
}

/// Anything of the form `F = iΔ + ln η` with `Δ' = δE`.
pub trait Exponent: Sync {
    fn gap_sq(&self, t: C64) -> C64;
    /// δE(0), the branch reference at the path origin.
    fn gap_origin(&self) -> C64;
    fn eta(&self, t: C64) -> C64;
    fn eta_log_derivative(&self, t: C64) -> C64;
    /// Singular points (both half-planes) with |Re t|, |Im t| ≤ extent.
    fn singular_set(&self, extent: f64) -> Vec<Singular>;
    fn local_scale(&self) -> f64;
    fn characteristic_time(&self) -> f64;

    fn local(&self, t: C64) -> Local {
        Local {
            gap_sq: self.gap_sq(t),
            eta: self.eta(t),
            dlog_eta: self.eta_log_derivative(t),
        }
    }
}

impl Exponent for ModelSpec {
    fn gap_sq(&self, t: C64) -> C64 {
        self.jet(t).gap_sq()
    }

    fn gap_origin(&self) -> C64 {
        C64::new(ModelSpec::gap_at_origin(self), 0.0)
    }

    fn eta(&self, t: C64) -> C64 {
        self.jet(t).eta()
    }

    fn eta_log_derivative(&self, t: C64) -> C64 {
        self.jet(t).eta_log_derivative()
    }

    fn singular_set(&self, extent: f64) -> Vec<Singular> {
        ModelSpec::singular_set(self, extent)
    }

    fn local_scale(&self) -> f64 {
        ModelSpec::local_scale(self)
    }

    fn characteristic_time(&self) -> f64 {
        ModelSpec::characteristic_time(self)
    }

    fn local(&self, t: C64) -> Local {
        let j = self.jet(t);
        Local {
            gap_sq: j.gap_sq(),
            eta: j.eta(),
            dlog_eta: j.eta_log_derivative(),
        }
    }
}

/// Synthetic exponent `F(t) = c (t − a)²`, realized with `δE ≡ 0` and
/// `η = exp(c (t − a)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticExponent {
    pub c: C64,
    pub a: C64,
}

impl Exponent for QuadraticExponent {
    fn gap_sq(&self, _t: C64) -> C64 {
        C64::new(0.0, 0.0)
    }

    fn gap_origin(&self) -> C64 {
        C64::new(0.0, 0.0)
    }

    fn eta(&self, t: C64) -> C64 {
        (self.c * (t - self.a) * (t - self.a)).exp()
    }

    fn eta_log_derivative(&self, t: C64) -> C64 {
        2.0 * self.c * (t - self.a)
    }

    fn singular_set(&self, _extent: f64) -> Vec<Singular> {
        Vec::new()
    }

    fn local_scale(&self) -> f64 {
        1.0 / self.c.norm().sqrt()
    }

    fn characteristic_time(&self) -> f64 {
        self.a.norm().max(self.local_scale())
    }
}

/// Root of `z2` nearest to `prev`.
pub fn sqrt_near(z2: C64, prev: C64) -> C64 {
    let s = z2.sqrt();
    if (s - prev).norm() <= (s + prev).norm() {
        s
    } else {
        -s
    }
}

/// True when the nearest-root choice against `prev` is unambiguous.
fn clear_choice(s: C64, prev: C64, floor: f64) -> bool {
    s.norm() < floor || prev.norm() < floor || (s - prev).norm() <= 0.5 * (s + prev).norm()
}

/// Ordered waypoints from t = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationPath {
    pub waypoints: Vec<C64>,
    pub max_step: f64,
}

impl ContinuationPath {
    /// Real axis to Re t, then vertical to t.
    pub fn l_shaped(t: C64) -> Self {
        let mut w = vec![C64::new(0.0, 0.0)];
        if t.re != 0.0 {
            w.push(C64::new(t.re, 0.0));
        }
        if t.im != 0.0 {
            w.push(t);
        }
        Self {
            waypoints: w,
            max_step: f64::INFINITY,
        }
    }

    pub fn straight(t: C64) -> Self {
        Self {
            waypoints: vec![C64::new(0.0, 0.0), t],
            max_step: f64::INFINITY,
        }
    }

    /// Path through the given points; the origin is prepended when absent.
    pub fn through(points: &[C64]) -> Self {
        let mut w = Vec::with_capacity(points.len() + 1);
        if points.first().map(|p| p.norm() != 0.0).unwrap_or(true) {
            w.push(C64::new(0.0, 0.0));
        }
        w.extend_from_slice(points);
        Self {
            waypoints: w,
            max_step: f64::INFINITY,
        }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    pub fn end(&self) -> C64 {
        *self.waypoints.last().unwrap()
    }

    /// Inserts semicircular detours of radius `r` around every singular
    /// point closer than `r` to an interior part of the path. Detours pass
    /// on the side of larger Re t (larger Im t for horizontal segments).
    pub fn with_detours(self, singular: &[Singular], r: f64) -> Result<Self> {
        self.with_detours_up_to(singular, r, r)
    }

    /// Like [`Self::with_detours`], with radii grown up to `r_max` where the
    /// singular point is isolated from the others and from the path end.
    pub fn with_detours_up_to(self, singular: &[Singular], r: f64, r_max: f64) -> Result<Self> {
        let end = self.end();
        let isolation = |t: C64| {
            singular
                .iter()
                .filter(|o| o.t != t)
                .map(|o| (o.t - t).norm())
                .fold((end - t).norm(), f64::min)
        };
        let mut out = vec![self.waypoints[0]];
        for win in self.waypoints.windows(2) {
            let (a, b) = (win[0], win[1]);
            let d = b - a;
            let len = d.norm();
            if len == 0.0 {
                continue;
            }
            let dh = d / len;
            let mut hits: Vec<(f64, C64, f64)> = singular
                .iter()
                .filter_map(|s| {
                    let u = ((s.t - a) * dh.conj()).re;
                    let perp = ((s.t - a) * dh.conj()).im.abs();
                    let near_end = (s.t - end).norm() < r;
                    let rs = r.max(0.4 * isolation(s.t).min(2.5 * r_max));
                    (u > rs * 0.5 && u < len - rs * 0.5 && perp < rs && !near_end)
                        .then_some((u, s.t, rs))
                })
                .collect();
            hits.sort_by(|x, y| x.0.total_cmp(&y.0));
            for (k, &(u, s, r)) in hits.iter().enumerate() {
                if k > 0 && (u - hits[k - 1].0) < r + hits[k - 1].2 {
                    return Err(Error::SingularPath(s));
                }
                let mut nh = I * dh;
                if nh.re < 0.0 || (nh.re == 0.0 && nh.im < 0.0) {
                    nh = -nh;
                }
                let foot = a + dh * u;
                let off = s - foot;
                for j in 0..=4 {
                    let th = std::f64::consts::FRAC_PI_4 * j as f64;
                    let p = foot + off + r * (-dh * th.cos() + nh * th.sin());
                    out.push(p);
                }
            }
            out.push(b);
        }
        Ok(Self {
            waypoints: out,
            max_step: self.max_step,
        })
    }
}

/// Δ, δE and ln η continued to a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuedValue {
    pub t: C64,
    /// δE at t on the continued branch.
    pub gap: C64,
    pub big_delta: C64,
    /// ln η unwound along the path; absent when η is singular at t.
    pub ln_eta: Option<C64>,
    /// Number of 2π turns separating `ln_eta` from the principal log.
    pub winding: i64,
}

impl ContinuedValue {
    pub fn f(&self) -> Option<C64> {
        self.ln_eta.map(|l| I * self.big_delta + l)
    }
}

/// An exponent with its singular points cached, ready for continuation.
pub struct Continuation<'a, E: Exponent + ?Sized> {
    pub exp: &'a E,
    pub singular: Vec<Singular>,
    pub scale: f64,
    pub extent: f64,
    gap_floor: f64,
}

impl<'a, E: Exponent + ?Sized> Continuation<'a, E> {
    /// Caches singular points within `extent` (defaults to 60 W).
    pub fn new(exp: &'a E, extent: Option<f64>) -> Self {
        let extent = extent.unwrap_or(60.0 * exp.characteristic_time());
        let scale = exp.local_scale();
        Self {
            singular: exp.singular_set(extent),
            exp,
            scale,
            extent,
            gap_floor: 1e-9 * exp.gap_origin().norm().max(1e-300),
        }
    }

    pub fn detour_radius(&self) -> f64 {
        3.0 * EPS_POLE * self.scale
    }

    /// Distance to the nearest cached singular point.
    pub fn singular_distance(&self, t: C64) -> f64 {
        self.singular
            .iter()
            .map(|s| (s.t - t).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn nearest_singular(&self, t: C64) -> Option<&Singular> {
        self.singular
            .iter()
            .min_by(|a, b| (a.t - t).norm().total_cmp(&(b.t - t).norm()))
    }

    fn check_endpoint(&self, t: C64, need_eta: bool) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite time {t}")));
        }
        let radius = EPS_POLE * self.scale;
        for s in &self.singular {
            if (s.t - t).norm() < radius {
                match s.kind {
                    SingularKind::Pole => {
                        return Err(Error::PoleProximity {
                            t,
                            pole: s.t,
                            radius,
                        });
                    }
                    SingularKind::Closing if need_eta => return Err(Error::ClosingPoint(t)),
                    SingularKind::EtaZero if need_eta => return Err(Error::ZeroEta(t)),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn default_path(&self, t: C64) -> Result<ContinuationPath> {
        ContinuationPath::l_shaped(t).with_detours_up_to(
            &self.singular,
            self.detour_radius(),
            0.1 * self.scale,
        )
    }

    /// Continues along `path`; ln η is produced when `with_log` is set.
    pub fn along(&self, path: &ContinuationPath, with_log: bool) -> Result<ContinuedValue> {
        let end = path.end();
        self.check_endpoint(end, with_log)?;
        let origin = path.waypoints[0];
        let mut gap = if origin.norm() == 0.0 {
            self.exp.gap_origin()
        } else {
            return Err(Error::InvalidParameter("paths must start at t = 0".into()));
        };
        let mut delta = C64::new(0.0, 0.0);
        let mut ln_eta = self.exp.eta(origin).ln();
        let mut pts = Vec::new();
        for w in path.waypoints.windows(2) {
            let (a, b) = (w[0], w[1]);
            let n = if path.max_step.is_finite() {
                ((b - a).norm() / path.max_step).ceil().max(1.0) as usize
            } else {
                1
            };
            for k in 0..n {
                pts.push((
                    a + (b - a) * (k as f64 / n as f64),
                    a + (b - a) * ((k + 1) as f64 / n as f64),
                ));
            }
        }
        for (a, b) in pts {
            let seg = self.segment(a, b, gap, with_log)?;
            delta += seg.d_delta;
            ln_eta += seg.d_ln_eta;
            gap = seg.gap_end;
        }
        let (ln_eta, winding) = if with_log {
            let principal = self.exp.eta(end).ln();
            let k = ((ln_eta.im - principal.im) / std::f64::consts::TAU).round();
            (Some(principal + I * (std::f64::consts::TAU * k)), k as i64)
        } else {
            (None, 0)
        };
        Ok(ContinuedValue {
            t: end,
            gap,
            big_delta: delta,
            ln_eta,
            winding,
        })
    }

    /// Continues along the default path.
    pub fn evaluate(&self, t: C64, with_log: bool) -> Result<ContinuedValue> {
        self.along(&self.default_path(t)?, with_log)
    }

    /// δE on the continued branch at `t`, by stepping along the default
    /// path without integrating.
    pub fn gap_at(&self, t: C64) -> Result<C64> {
        self.check_endpoint(t, false)?;
        let path = self.default_path(t)?;
        let mut gap = self.exp.gap_origin();
        for w in path.waypoints.windows(2) {
            gap = self.walk(w[0], w[1], gap)?;
        }
        Ok(gap)
    }

    /// Carries the δE branch from `a` (value `gap`) to `b` in small steps.
    pub fn walk(&self, a: C64, b: C64, mut gap: C64) -> Result<C64> {
        let mut p = a;
        let mut guard = 0;
        while (b - p).norm() > 0.0 {
            guard += 1;
            if guard > 100_000 {
                return Err(Error::SingularPath(p));
            }
            let rem = (b - p).norm();
            if rem < 1e-12 * self.scale {
                gap = sqrt_near(self.exp.gap_sq(b), gap);
                break;
            }
            let dist = self.singular_distance(p);
            let mut h = rem
                .min(0.25 * dist)
                .min(0.5 * self.extent.max(rem.min(1.0)));
            loop {
                let q = if h >= rem { b } else { p + (b - p) * (h / rem) };
                let s = sqrt_near(self.exp.gap_sq(q), gap);
                if clear_choice(s, gap, self.gap_floor) || h < 1e-14 * self.scale {
                    gap = s;
                    p = q;
                    break;
                }
                h *= 0.5;
            }
        }
        Ok(gap)
    }

    /// Adaptive GK15 along one straight segment with branch tracking.
    pub fn segment(&self, a: C64, b: C64, gap_a: C64, with_log: bool) -> Result<Segment> {
        let mut acc = Segment {
            d_delta: C64::new(0.0, 0.0),
            d_ln_eta: C64::new(0.0, 0.0),
            gap_end: gap_a,
        };
        if a == b {
            return Ok(acc);
        }
        let mut stack: Vec<(C64, C64, u32)> = vec![(a, b, 0)];
        let xs = gk15_nodes();
        let (wk, wg) = gk15_weights();
        let mut gap = gap_a;
        // absolute tolerance 1e-13·|panel|·max|δE|, with the max taken over
        // everything seen so far on this segment
        let mut gscale = gap_a.norm().max(self.gap_floor);
        while let Some((lo, hi, depth)) = stack.pop() {
            // near a closing point the sign of δE is round-off
            let floor = self.gap_floor.max(1e-7 * gscale);
            let c = 0.5 * (lo + hi);
            let h = 0.5 * (hi - lo);
            let mut prev = gap;
            let mut branch_ok = true;
            let mut kd = C64::new(0.0, 0.0);
            let mut gd = C64::new(0.0, 0.0);
            let mut kl = C64::new(0.0, 0.0);
            let mut gl = C64::new(0.0, 0.0);
            for j in 0..15 {
                let z = c + h * xs[j];
                let s = sqrt_near(self.exp.gap_sq(z), prev);
                if !s.is_finite() || !clear_choice(s, prev, floor) {
                    branch_ok = false;
                    break;
                }
                gscale = gscale.max(s.norm());
                kd += s * wk[j];
                gd += s * wg[j];
                if with_log {
                    let dl = self.exp.eta_log_derivative(z);
                    if !dl.is_finite() {
                        branch_ok = false;
                        break;
                    }
                    kl += dl * wk[j];
                    gl += dl * wg[j];
                }
                prev = s;
            }
            let end = if branch_ok {
                let s = sqrt_near(self.exp.gap_sq(hi), prev);
                branch_ok = s.is_finite() && clear_choice(s, prev, floor);
                s
            } else {
                prev
            };
            let mut err_ok = false;
            if branch_ok {
                kd *= h;
                gd *= h;
                kl *= h;
                gl *= h;
                let len = (hi - lo).norm();
                err_ok = (kd - gd).norm() <= 1e-13 * len * gscale
                    && (!with_log
                        || (kl - gl).norm() <= 1e-9 * len / self.scale + 1e-10 * kl.norm());
                // far from every singular point the mismatch is round-off
                err_ok |= self.singular_distance(c) > 50.0 * len;
            }
            if branch_ok && (err_ok || depth >= 40) {
                acc.d_delta += kd;
                acc.d_ln_eta += kl;
                gap = end;
            } else {
                if depth > 60 {
                    return Err(Error::SingularPath(c));
                }
                stack.push((c, hi, depth + 1));
                stack.push((lo, c, depth + 1));
            }
        }
        acc.gap_end = gap;
        Ok(acc)
    }

    /// F' = iδE + η'/η with δE taken on the branch nearest `gap_ref`.
    pub fn f_prime_on_branch(&self, t: C64, gap_ref: C64) -> (C64, C64) {
        let l = self.exp.local(t);
        let g = sqrt_near(l.gap_sq, gap_ref);
        (I * g + l.dlog_eta, g)
    }

    /// F' at `t` on the default-path branch.
    pub fn f_prime(&self, t: C64) -> Result<C64> {
        self.check_endpoint(t, true)?;
        let g = self.gap_at(t)?;
        Ok(self.f_prime_on_branch(t, g).0)
    }

    /// F'' by a four-point holomorphic stencil on F'.
    pub fn f_second_on_branch(&self, t: C64, gap_ref: C64) -> C64 {
        let h = (1e-3 * self.scale).min(0.05 * self.singular_distance(t));
        let f = |z: C64| self.f_prime_on_branch(z, gap_ref).0;
        (f(t + h) - f(t - h) - I * f(t + I * h) + I * f(t - I * h)) / (4.0 * h)
    }

    /// F''' by the same stencil applied to F''.
    pub fn f_third_on_branch(&self, t: C64, gap_ref: C64) -> C64 {
        let h = (1e-2 * self.scale).min(0.05 * self.singular_distance(t));
        let f = |z: C64| self.f_second_on_branch(z, gap_ref);
        (f(t + h) - f(t - h) - I * f(t + I * h) + I * f(t - I * h)) / (4.0 * h)
    }
}

/// Increment of Δ and ln η over one segment.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub d_delta: C64,
    pub d_ln_eta: C64,
    pub gap_end: C64,
}

/// Polar form of F''.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondDerivative {
    pub value: C64,
    pub modulus: f64,
    /// Argument in [0, 2π).
    pub phi: f64,
}

impl SecondDerivative {
    pub fn new(value: C64) -> Self {
        let mut phi = value.arg();
        if phi < 0.0 {
            phi += std::f64::consts::TAU;
        }
        Self {
            value,
            modulus: value.norm(),
            phi,
        }
    }
}

/// Δ(t) = ∫₀ᵗ δE along `path` (the default path when `None`).
pub fn big_delta<E: Exponent + ?Sized>(
    exp: &E,
    t: C64,
    path: Option<&ContinuationPath>,
) -> Result<C64> {
    let c = Continuation::new(exp, None);
    let v = match path {
        Some(p) => {
            if (p.end() - t).norm() > 1e-14 * (1.0 + t.norm()) {
                return Err(Error::InvalidParameter("path does not end at t".into()));
            }
            c.along(
                &p.clone()
                    .with_detours_up_to(&c.singular, c.detour_radius(), 0.1 * c.scale)?,
                false,
            )?
        }
        None => c.evaluate(t, false)?,
    };
    Ok(v.big_delta)
}

/// F(t) = iΔ(t) + ln η(t), continued along `path` (default when `None`).
pub fn f_eval<E: Exponent + ?Sized>(
    exp: &E,
    t: C64,
    path: Option<&ContinuationPath>,
) -> Result<C64> {
    let c = Continuation::new(exp, None);
    let v = match path {
        Some(p) => c.along(
            &p.clone()
                .with_detours_up_to(&c.singular, c.detour_radius(), 0.1 * c.scale)?,
            true,
        )?,
        None => c.evaluate(t, true)?,
    };
    v.f().ok_or(Error::ZeroEta(t))
}

pub fn f_prime<E: Exponent + ?Sized>(exp: &E, t: C64) -> Result<C64> {
    Continuation::new(exp, None).f_prime(t)
}

/// F'' with its polar decomposition. Near-vanishing values are reported as
/// [`Error::DegenerateSaddle`].
pub fn f_second<E: Exponent + ?Sized>(exp: &E, t: C64) -> Result<SecondDerivative> {
    let c = Continuation::new(exp, None);
    c.check_endpoint(t, true)?;
    let g = c.gap_at(t)?;
    let v = c.f_second_on_branch(t, g);
    let s = SecondDerivative::new(v);
    let scale = c.scale;
    if s.modulus < EPS_DEGENERATE / (scale * scale) {
        return Err(Error::DegenerateSaddle {
            t,
            modulus: s.modulus,
        });
    }
    Ok(s)
}

/// Threshold on |F''|·scale² below which a point is degenerate.
pub const EPS_DEGENERATE: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_segment;
    use approx::assert_relative_eq;

    fn mlz(l: f64, tau: f64, t: f64) -> ModelSpec {
        ModelSpec::ModifiedLz {
            lambda: l,
            tau,
            big_t: t,
        }
    }

    #[test]
    fn delta_at_origin_is_zero() {
        let m = mlz(1.0, 1.0, 2.0);
        assert_eq!(
            big_delta(&m, C64::new(0.0, 0.0), None).unwrap(),
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn constant_field_closing_exponent() {
        let m = ModelSpec::ConstantField {
            e_field: 1.0,
            m_perp: 1.0,
            p_z: 0.3,
        };
        let tc = m.primary_closing_point().unwrap();
        let d = big_delta(&m, tc, None).unwrap();
        assert_relative_eq!(d.im, std::f64::consts::FRAC_PI_2, max_relative = 1e-10);
    }

    #[test]
    fn f_at_origin() {
        let m = mlz(1.0, 1.0, 2.0);
        let f = f_eval(&m, C64::new(0.0, 0.0), None).unwrap();
        assert_relative_eq!(f.re, 0.5f64.ln(), max_relative = 1e-14);
        assert!(f.im.abs() < 1e-15);
    }

    #[test]
    fn f_prime_constant_field_origin() {
        let m = ModelSpec::ConstantField {
            e_field: 1.0,
            m_perp: 1.0,
            p_z: 0.0,
        };
        let fp = f_prime(&m, C64::new(0.0, 0.0)).unwrap();
        assert!((fp - C64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn quadratic_second_derivative_exact() {
        let q = QuadraticExponent {
            c: C64::new(-0.7, 0.2),
            a: C64::new(0.3, 0.5),
        };
        let s = f_second(&q, C64::new(0.1, 0.2)).unwrap();
        assert!((s.value - 2.0 * q.c).norm() < 1e-10);
        let f = f_eval(&q, C64::new(0.9, -0.4), None).unwrap();
        let t = C64::new(0.9, -0.4);
        let exact = q.c * (t - q.a) * (t - q.a);
        assert!((f - exact).norm() < 1e-12);
    }

    #[test]
    fn mlz_above_pole_uses_vertical_cut() {
        let m = mlz(1.0, 1.0, 0.5);
        let c = Continuation::new(&m, None);
        let right = c.evaluate(C64::new(1e-3, 0.8), false).unwrap();
        let detour = c.evaluate(C64::new(0.0, 0.8), false).unwrap();
        assert!((right.big_delta - detour.big_delta).norm() < 5e-3);
    }

    #[test]
    fn f_eval_matches_independent_pieces() {
        let m = mlz(1.0, 1.0, 2.0);
        let t = C64::new(1.0, 1.0);
        let f = f_eval(&m, t, None).unwrap();
        // Δ by fixed-branch quadrature on two legs; δE stays near the positive
        // root on this L path.
        let gap = |z: C64| {
            let g = m.jet(z).gap_sq().sqrt();
            if g.re < 0.0 {
                -g
            } else {
                g
            }
        };
        let (d1, _) = integrate_segment(gap, C64::new(0.0, 0.0), C64::new(1.0, 0.0), 1e-14, 1e-14);
        let (d2, _) = integrate_segment(gap, C64::new(1.0, 0.0), t, 1e-14, 1e-14);
        let eta = 1.0 / (2.0 * (t * t + 1.0));
        let expect = I * (d1 + d2) + eta.ln();
        assert!((f - expect).norm() < 1e-10, "{f} vs {expect}");
    }

    #[test]
    fn detours_keep_positive_real_side() {
        let s = [Singular {
            t: C64::new(0.0, 1.0),
            kind: SingularKind::Pole,
            order: 1,
        }];
        let p = ContinuationPath::l_shaped(C64::new(0.0, 2.0))
            .with_detours(&s, 0.1)
            .unwrap();
        assert!(p.waypoints.len() > 3);
        for w in &p.waypoints {
            assert!(w.re >= -1e-12);
            assert!((w - s[0].t).norm() >= 0.1 - 1e-12);
        }
    }
}
