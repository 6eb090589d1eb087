//! Analytic two-level models on complexified time.
//!
//! Each model supplies `α(t)`, `V(t)` and their first two derivatives in
//! closed form. Everything downstream (η, δE², their logarithmic
//! derivatives) is assembled from that jet.

use crate::error::{Error, Result, Warning};
use crate::{C64, I};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Relative pole-proximity radius, in units of the local scale.
pub const EPS_POLE: f64 = 1e-6;
/// Relative dedup radius for roots, in units of the local scale.
pub const EPS_DEDUP: f64 = 1e-8;
/// Residual bound for cataloged closing points relative to δE(0)².
pub const EPS_ROOT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    LandauZener {
        lambda: f64,
        tau: f64,
    },
    ModifiedLz {
        lambda: f64,
        tau: f64,
        #[serde(rename = "T")]
        big_t: f64,
    },
    ConstantField {
        #[serde(rename = "eE")]
        e_field: f64,
        m_perp: f64,
        p_z: f64,
    },
    SauterPulse {
        #[serde(rename = "eE")]
        e_field: f64,
        omega: f64,
        mass: f64,
        p_perp: f64,
        p_z: f64,
    },
    AssistedSchwinger {
        #[serde(rename = "eE")]
        e_field: f64,
        eps: f64,
        omega: f64,
        mass: f64,
        p_perp: f64,
        p_z: f64,
    },
}

/// `α`, `V` and their first two time derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub alpha: C64,
    pub alpha_dot: C64,
    pub alpha_ddot: C64,
    pub v: C64,
    pub v_dot: C64,
    pub v_ddot: C64,
}

impl Jet {
    pub fn gap_sq(&self) -> C64 {
        self.alpha * self.alpha + self.v * self.v
    }

    /// `(δE²)'/2 = αα̇ + VV̇`.
    pub fn half_gap_sq_prime(&self) -> C64 {
        self.alpha * self.alpha_dot + self.v * self.v_dot
    }

    pub fn eta_numerator(&self) -> C64 {
        self.v * self.alpha_dot - self.v_dot * self.alpha
    }

    pub fn eta(&self) -> C64 {
        self.eta_numerator() / (2.0 * self.gap_sq())
    }

    /// `η'/η = N'/N − D'/D`, with `N = Vα̇ − V̇α` and `D = α² + V²`.
    pub fn eta_log_derivative(&self) -> C64 {
        let n = self.eta_numerator();
        let n_prime = self.v * self.alpha_ddot - self.v_ddot * self.alpha;
        n_prime / n - 2.0 * self.half_gap_sq_prime() / self.gap_sq()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    /// `[−h, h] × (0, h]`.
    pub fn upper(h: f64) -> Self {
        Self::new(-h, h, 0.0, h)
    }

    pub fn contains(&self, t: C64) -> bool {
        t.re >= self.re_min && t.re <= self.re_max && t.im > self.im_min && t.im <= self.im_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularKind {
    /// Zero of δE² (pole of η, branch point of δE).
    Closing,
    /// Pole of δE².
    Pole,
    /// Zero of η (logarithmic branch point of ln η).
    EtaZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singular {
    pub t: C64,
    pub kind: SingularKind,
    /// Multiplicity of the zero or order of the pole, in δE² (or η for zeros).
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityCatalog {
    pub closing: Vec<Singular>,
    pub poles: Vec<Singular>,
    pub window: Window,
    pub warnings: Vec<Warning>,
}

impl SingularityCatalog {
    pub fn nearest_closing(&self) -> Option<C64> {
        self.closing.first().map(|s| s.t)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ModelSpec::LandauZener { lambda, tau } => write!(f, "lz(lambda={lambda}, tau={tau})"),
            ModelSpec::ModifiedLz { lambda, tau, big_t } => {
                write!(f, "mlz(lambda={lambda}, tau={tau}, T={big_t})")
            }
            ModelSpec::ConstantField {
                e_field,
                m_perp,
                p_z,
            } => {
                write!(f, "constant(eE={e_field}, mperp={m_perp}, pz={p_z})")
            }
            ModelSpec::SauterPulse {
                e_field,
                omega,
                mass,
                p_perp,
                p_z,
            } => write!(
                f,
                "sauter(eE={e_field}, omega={omega}, m={mass}, pperp={p_perp}, pz={p_z})"
            ),
            ModelSpec::AssistedSchwinger {
                e_field,
                eps,
                omega,
                mass,
                p_perp,
                p_z,
            } => write!(
                f,
                "dasm(eE={e_field}, eps={eps}, omega={omega}, m={mass}, pperp={p_perp}, pz={p_z})"
            ),
        }
    }
}

/// `tanh z` without overflow for large |Re z|.
pub(crate) fn tanh_c(z: C64) -> C64 {
    if z.re < 0.0 {
        return -tanh_c(-z);
    }
    let e = (-2.0 * z).exp();
    (1.0 - e) / (1.0 + e)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::LandauZener { lambda, tau } => {
                positive("lambda", lambda)?;
                positive("tau", tau)
            }
            ModelSpec::ModifiedLz { lambda, tau, big_t } => {
                positive("lambda", lambda)?;
                positive("tau", tau)?;
                positive("T", big_t)
            }
            ModelSpec::ConstantField {
                e_field,
                m_perp,
                p_z,
            } => {
                positive("eE", e_field)?;
                positive("mperp", m_perp)?;
                finite("pz", p_z)
            }
            ModelSpec::SauterPulse {
                e_field,
                omega,
                mass,
                p_perp,
                p_z,
            } => {
                positive("eE", e_field)?;
                positive("omega", omega)?;
                positive("m", mass)?;
                finite("pperp", p_perp)?;
                finite("pz", p_z)
            }
            ModelSpec::AssistedSchwinger {
                e_field,
                eps,
                omega,
                mass,
                p_perp,
                p_z,
            } => {
                positive("eE", e_field)?;
                positive("omega", omega)?;
                positive("m", mass)?;
                finite("pperp", p_perp)?;
                finite("pz", p_z)?;
                if !(eps.is_finite() && eps >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "eps must be non-negative, got {eps}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::LandauZener { .. } => "lz",
            ModelSpec::ModifiedLz { .. } => "mlz",
            ModelSpec::ConstantField { .. } => "constant",
            ModelSpec::SauterPulse { .. } => "sauter",
            ModelSpec::AssistedSchwinger { .. } => "dasm",
        }
    }

    /// Transverse mass `√(p⊥² + m²)` for field models.
    pub fn m_perp(&self) -> Option<f64> {
        match *self {
            ModelSpec::ConstantField { m_perp, .. } => Some(m_perp),
            ModelSpec::SauterPulse { mass, p_perp, .. }
            | ModelSpec::AssistedSchwinger { mass, p_perp, .. } => Some(mass.hypot(p_perp)),
            _ => None,
        }
    }

    /// Smallest positive scale among {τ, T, 1/ω, m⊥/eE}.
    pub fn local_scale(&self) -> f64 {
        match *self {
            ModelSpec::LandauZener { tau, .. } => tau,
            ModelSpec::ModifiedLz { tau, big_t, .. } => tau.min(big_t),
            ModelSpec::ConstantField {
                e_field, m_perp, ..
            } => m_perp / e_field,
            ModelSpec::SauterPulse { e_field, omega, .. }
            | ModelSpec::AssistedSchwinger { e_field, omega, .. } => {
                let mp = self.m_perp().unwrap();
                (1.0 / omega).min(mp / e_field)
            }
        }
    }

    /// Size of the region holding the singularities that matter for the
    /// leading transition; windows are built as multiples of this.
    pub fn characteristic_time(&self) -> f64 {
        match *self {
            ModelSpec::LandauZener { tau, .. } => tau,
            ModelSpec::ModifiedLz { tau, big_t, .. } => tau.max(big_t.min(4.0 * tau)),
            ModelSpec::ConstantField {
                e_field,
                m_perp,
                p_z,
            } => (p_z.abs() + m_perp) / e_field,
            ModelSpec::SauterPulse { .. } | ModelSpec::AssistedSchwinger { .. } => {
                let tc = self
                    .primary_closing_point()
                    .unwrap_or(C64::new(0.0, self.local_scale()));
                tc.norm().max(self.local_scale())
            }
        }
    }

    /// Default singularity search window `[−3W, 3W] × (0, 3W]`.
    pub fn default_window(&self) -> Window {
        Window::upper(3.0 * self.characteristic_time())
    }

    /// Unchecked evaluation of the jet.
    pub fn jet(&self, t: C64) -> Jet {
        let zero = C64::new(0.0, 0.0);
        match *self {
            ModelSpec::LandauZener { lambda, tau } => Jet {
                alpha: t * (lambda / (tau * tau)),
                alpha_dot: C64::new(lambda / (tau * tau), 0.0),
                alpha_ddot: zero,
                v: C64::new(lambda / tau, 0.0),
                v_dot: zero,
                v_ddot: zero,
            },
            ModelSpec::ModifiedLz { lambda, tau, big_t } => {
                let tt = big_t * big_t;
                let u = t * t / tt;
                let s = (1.0 + u).sqrt();
                let s2 = s * s;
                let s3 = s2 * s;
                let s5 = s3 * s2;
                let a = lambda / (tau * tau);
                let b = lambda / tau;
                Jet {
                    alpha: a * t / s,
                    alpha_dot: a / s3,
                    alpha_ddot: -3.0 * a * t / (tt * s5),
                    v: b / s,
                    v_dot: -b * t / (tt * s3),
                    v_ddot: -(b / (tt * s5)) * (1.0 - 2.0 * u),
                }
            }
            ModelSpec::ConstantField {
                e_field,
                m_perp,
                p_z,
            } => Jet {
                alpha: 2.0 * (p_z + e_field * t),
                alpha_dot: C64::new(2.0 * e_field, 0.0),
                alpha_ddot: zero,
                v: C64::new(2.0 * m_perp, 0.0),
                v_dot: zero,
                v_ddot: zero,
            },
            ModelSpec::SauterPulse {
                e_field,
                omega,
                p_z,
                ..
            } => {
                let th = tanh_c(omega * t);
                let sech2 = 1.0 - th * th;
                Jet {
                    alpha: 2.0 * (p_z + (e_field / omega) * th),
                    alpha_dot: 2.0 * e_field * sech2,
                    alpha_ddot: -4.0 * e_field * omega * th * sech2,
                    v: C64::new(2.0 * self.m_perp().unwrap(), 0.0),
                    v_dot: zero,
                    v_ddot: zero,
                }
            }
            ModelSpec::AssistedSchwinger {
                e_field,
                eps,
                omega,
                p_z,
                ..
            } => {
                let th = tanh_c(omega * t);
                let sech2 = 1.0 - th * th;
                Jet {
                    alpha: 2.0 * (p_z + e_field * t + (eps / omega) * th),
                    alpha_dot: 2.0 * e_field + 2.0 * eps * sech2,
                    alpha_ddot: -4.0 * eps * omega * th * sech2,
                    v: C64::new(2.0 * self.m_perp().unwrap(), 0.0),
                    v_dot: zero,
                    v_ddot: zero,
                }
            }
        }
    }

    /// Nearest singular point of the defining functions α, V (not of η).
    fn nearest_defining_pole(&self, t: C64) -> Option<C64> {
        match *self {
            ModelSpec::ModifiedLz { big_t, .. } => {
                let p = if t.im >= 0.0 { I * big_t } else { -I * big_t };
                Some(p)
            }
            ModelSpec::SauterPulse { omega, .. } | ModelSpec::AssistedSchwinger { omega, .. } => {
                let k = (omega * t.im / PI - 0.5).round();
                Some(I * (PI * (k + 0.5) / omega))
            }
            _ => None,
        }
    }

    /// Jet with the pole-proximity check.
    pub fn checked_jet(&self, t: C64) -> Result<Jet> {
        if let Some(p) = self.nearest_defining_pole(t) {
            let radius = EPS_POLE * self.local_scale();
            if (t - p).norm() < radius {
                return Err(Error::PoleProximity { t, pole: p, radius });
            }
        }
        Ok(self.jet(t))
    }

    pub fn eval_alpha(&self, t: C64) -> Result<C64> {
        Ok(self.checked_jet(t)?.alpha)
    }

    pub fn eval_v(&self, t: C64) -> Result<C64> {
        Ok(self.checked_jet(t)?.v)
    }

    pub fn eval_alpha_dot(&self, t: C64) -> Result<C64> {
        Ok(self.checked_jet(t)?.alpha_dot)
    }

    pub fn eval_v_dot(&self, t: C64) -> Result<C64> {
        Ok(self.checked_jet(t)?.v_dot)
    }

    pub fn eval_alpha_ddot(&self, t: C64) -> Result<C64> {
        Ok(self.checked_jet(t)?.alpha_ddot)
    }

    pub fn eval_v_ddot(&self, t: C64) -> Result<C64> {
        Ok(self.checked_jet(t)?.v_ddot)
    }

    /// Value of δE at t = 0, the reference for closing-point residuals.
    pub fn gap_at_origin(&self) -> f64 {
        self.jet(C64::new(0.0, 0.0)).gap_sq().re.sqrt()
    }

    /// η = (Vα̇ − V̇α) / (2(α² + V²)).
    pub fn eta(&self, t: C64) -> Result<C64> {
        let j = self.checked_jet(t)?;
        let g = j.gap_sq();
        let g0 = self.gap_at_origin();
        if g.norm() < EPS_ROOT * g0 * g0 {
            return Err(Error::ClosingPoint(t));
        }
        Ok(j.eta())
    }

    /// δE on the real axis, the positive root.
    pub fn delta_e_real(&self, t: f64) -> f64 {
        let j = self.jet(C64::new(t, 0.0));
        (j.alpha.re * j.alpha.re + j.v.re * j.v.re).sqrt()
    }

    /// η on the real axis.
    pub fn eta_real(&self, t: f64) -> f64 {
        self.jet(C64::new(t, 0.0)).eta().re
    }

    pub fn is_symmetric(&self) -> bool {
        match *self {
            ModelSpec::LandauZener { .. } | ModelSpec::ModifiedLz { .. } => true,
            ModelSpec::ConstantField { p_z, .. }
            | ModelSpec::SauterPulse { p_z, .. }
            | ModelSpec::AssistedSchwinger { p_z, .. } => p_z == 0.0,
        }
    }

    /// Closing point nearest to the real axis in the upper half-plane.
    pub fn primary_closing_point(&self) -> Option<C64> {
        match *self {
            ModelSpec::LandauZener { tau, .. } | ModelSpec::ModifiedLz { tau, .. } => Some(I * tau),
            ModelSpec::ConstantField {
                e_field,
                m_perp,
                p_z,
            } => Some(C64::new(-p_z, m_perp) / e_field),
            ModelSpec::SauterPulse {
                e_field,
                omega,
                p_z,
                ..
            } => {
                let mp = self.m_perp().unwrap();
                let z = C64::new(-p_z, mp) * (omega / e_field);
                Some(z.atanh() / omega)
            }
            ModelSpec::AssistedSchwinger {
                e_field,
                eps,
                omega,
                mass,
                p_z,
                ..
            } => {
                let mp = self.m_perp().unwrap();
                let gamma = mp * omega / e_field;
                let start = if eps > 0.0 || gamma < PI / 2.0 {
                    crate::ddp::dasm_closing_point(gamma, eps / e_field)
                        .ok()
                        .map(|u| I * (u / omega))
                } else {
                    None
                };
                let _ = mass;
                let start = start.unwrap_or(I * (mp / e_field));
                if p_z == 0.0 {
                    return Some(start);
                }
                let h = |t: C64| {
                    let j = self.jet(t);
                    (j.alpha - I * j.v, j.alpha_dot - I * j.v_dot)
                };
                newton_polish(h, start, self.local_scale())
            }
        }
    }

    fn tanh_poles(omega: f64, extent: f64, upper_only: bool) -> Vec<C64> {
        let mut out = Vec::new();
        let kmax = (omega * extent / PI + 0.5).ceil() as i64 + 1;
        let kmin = if upper_only { 0 } else { -kmax - 1 };
        for k in kmin..=kmax {
            let y = PI * (k as f64 + 0.5) / omega;
            if y.abs() <= extent {
                out.push(I * y);
            }
        }
        out
    }

    /// Upper-half-plane singularity catalog inside `window`.
    pub fn singularities(&self, window: &Window) -> Result<SingularityCatalog> {
        if window.im_min < 0.0 {
            return Err(Error::InvalidParameter(
                "window must lie in the upper half-plane".into(),
            ));
        }
        let mut closing: Vec<Singular> = Vec::new();
        let mut poles: Vec<Singular> = Vec::new();
        let closing_entry = |t| Singular {
            t,
            kind: SingularKind::Closing,
            order: 1,
        };
        match *self {
            ModelSpec::LandauZener { .. }
            | ModelSpec::ConstantField { .. }
            | ModelSpec::SauterPulse { .. } => {
                closing.push(closing_entry(self.primary_closing_point().unwrap()));
            }
            ModelSpec::ModifiedLz { big_t, .. } => {
                closing.push(closing_entry(self.primary_closing_point().unwrap()));
                poles.push(Singular {
                    t: I * big_t,
                    kind: SingularKind::Pole,
                    order: 1,
                });
            }
            ModelSpec::AssistedSchwinger { p_z, .. } => {
                if p_z == 0.0 {
                    if let Some(t) = self.primary_closing_point() {
                        closing.push(closing_entry(t));
                    }
                } else {
                    for t in self.closing_points_multistart(window, 40, 20) {
                        closing.push(closing_entry(t));
                    }
                }
            }
        }
        match *self {
            ModelSpec::SauterPulse { omega, .. } | ModelSpec::AssistedSchwinger { omega, .. } => {
                for p in Self::tanh_poles(omega, window.im_max, true) {
                    poles.push(Singular {
                        t: p,
                        kind: SingularKind::Pole,
                        order: 2,
                    });
                }
            }
            _ => {}
        }
        closing.retain(|s| window.contains(s.t));
        poles.retain(|s| window.contains(s.t));
        let by_im =
            |a: &Singular, b: &Singular| a.t.im.total_cmp(&b.t.im).then(a.t.re.total_cmp(&b.t.re));
        closing.sort_by(by_im);
        poles.sort_by(by_im);
        let mut warnings = Vec::new();
        if closing.is_empty() {
            warnings.push(Warning::WindowTooSmall);
        }
        Ok(SingularityCatalog {
            closing,
            poles,
            window: *window,
            warnings,
        })
    }

    /// `α ∓ iV` and its derivative, with the tanh poles cleared by a factor
    /// `cosh ωt / 2` for the field models. Zeros are the closing points.
    fn closing_residual(&self, t: C64, sign: f64) -> (C64, C64) {
        match *self {
            ModelSpec::SauterPulse {
                e_field,
                omega,
                p_z,
                ..
            }
            | ModelSpec::AssistedSchwinger {
                e_field,
                omega,
                p_z,
                ..
            } => {
                let (lin, lin_dot, amp) = match *self {
                    ModelSpec::AssistedSchwinger { eps, .. } => {
                        (p_z + e_field * t, e_field, eps / omega)
                    }
                    _ => (C64::new(p_z, 0.0), 0.0, e_field / omega),
                };
                let a = lin - sign * I * self.m_perp().unwrap();
                let (ch, sh) = ((omega * t).cosh(), (omega * t).sinh());
                (
                    ch * a + amp * sh,
                    omega * sh * a + (lin_dot + amp * omega) * ch,
                )
            }
            _ => {
                let j = self.jet(t);
                (j.alpha - sign * I * j.v, j.alpha_dot - sign * I * j.v_dot)
            }
        }
    }

    /// Multistart Newton on `α ∓ iV = 0`, whose roots are the zeros of α² + V².
    pub fn closing_points_multistart(&self, window: &Window, nx: usize, ny: usize) -> Vec<C64> {
        let scale = self.local_scale();
        let mut seeds = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let x =
                    window.re_min + (window.re_max - window.re_min) * (i as f64 + 0.5) / nx as f64;
                let y =
                    window.im_min + (window.im_max - window.im_min) * (j as f64 + 0.5) / ny as f64;
                seeds.push(C64::new(x, y));
            }
        }
        let mut found: Vec<C64> = Vec::new();
        for sign in [1.0, -1.0] {
            let h = |t: C64| self.closing_residual(t, sign);
            for &s in &seeds {
                if let Some(t) = newton_polish(h, s, scale) {
                    if window.contains(t)
                        && found
                            .iter()
                            .all(|f| (f - t).norm() > EPS_DEDUP * scale * 1e2)
                    {
                        found.push(t);
                    }
                }
            }
        }
        found.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        found
    }

    /// Every singular point within `|Re t|, |Im t| ≤ extent`, both half-planes.
    pub fn singular_set(&self, extent: f64) -> Vec<Singular> {
        let mut out = Vec::new();
        let push_pair = |out: &mut Vec<Singular>, t: C64, kind, order| {
            out.push(Singular { t, kind, order });
            out.push(Singular {
                t: t.conj(),
                kind,
                order,
            });
        };
        match *self {
            ModelSpec::LandauZener { tau, .. } => {
                push_pair(&mut out, I * tau, SingularKind::Closing, 1);
            }
            ModelSpec::ModifiedLz { tau, big_t, .. } => {
                push_pair(&mut out, I * tau, SingularKind::Closing, 1);
                push_pair(&mut out, I * big_t, SingularKind::Pole, 1);
            }
            ModelSpec::ConstantField { .. } => {
                push_pair(
                    &mut out,
                    self.primary_closing_point().unwrap(),
                    SingularKind::Closing,
                    1,
                );
            }
            ModelSpec::SauterPulse {
                e_field,
                omega,
                p_z,
                ..
            } => {
                let mp = self.m_perp().unwrap();
                let period = PI / omega;
                let kmax = (extent / period).ceil() as i64 + 1;
                for sgn in [1.0, -1.0] {
                    let base = (C64::new(-p_z, sgn * mp) * (omega / e_field)).atanh() / omega;
                    for k in -kmax..=kmax {
                        let t = base + I * (period * k as f64);
                        out.push(Singular {
                            t,
                            kind: SingularKind::Closing,
                            order: 1,
                        });
                    }
                }
                for p in Self::tanh_poles(omega, extent, false) {
                    out.push(Singular {
                        t: p,
                        kind: SingularKind::Pole,
                        order: 2,
                    });
                }
            }
            ModelSpec::AssistedSchwinger {
                e_field,
                eps,
                omega,
                ..
            } => {
                let poles = Self::tanh_poles(omega, extent, false);
                let w = Window::new(-extent, extent, -extent, extent);
                let mut closing = self.closing_points_multistart(&w, 40, 40);
                let scale = self.local_scale();
                for &p in &poles {
                    let mut seeds = vec![p];
                    for ring in [0.01, 0.05, 0.15, 0.4] {
                        for k in 0..12 {
                            seeds
                                .push(p + ring * scale * C64::from_polar(1.0, k as f64 * PI / 6.0));
                        }
                    }
                    for seed in seeds {
                        for sign in [1.0, -1.0] {
                            let h = |t: C64| self.closing_residual(t, sign);
                            {
                                if let Some(t) = newton_polish(h, seed, scale) {
                                    if t.re.abs() <= extent
                                        && t.im.abs() <= extent
                                        && closing.iter().all(|c| (c - t).norm() > 1e-6 * scale)
                                    {
                                        closing.push(t);
                                    }
                                }
                            }
                        }
                    }
                }
                for t in closing {
                    out.push(Singular {
                        t,
                        kind: SingularKind::Closing,
                        order: 1,
                    });
                }
                for p in poles {
                    out.push(Singular {
                        t: p,
                        kind: SingularKind::Pole,
                        order: 2,
                    });
                }
                if eps > 0.0 {
                    // α̇ = 0 where cosh ωt = ±i √(eε/eE)
                    let x = (eps / e_field).sqrt().asinh();
                    for p in Self::tanh_poles(omega, extent + PI / omega, false) {
                        for s in [1.0, -1.0] {
                            out.push(Singular {
                                t: p + s * x / omega,
                                kind: SingularKind::EtaZero,
                                order: 1,
                            });
                        }
                    }
                }
            }
        }
        out.retain(|s| s.t.re.abs() <= extent && s.t.im.abs() <= extent);
        out
    }

    /// Replaces one named parameter, for sweeps. `gamma` rescales ω at fixed
    /// m and eE for the field models.
    pub fn with_param(&self, name: &str, value: f64) -> Result<ModelSpec> {
        let mut m = *self;
        let unknown = || {
            Error::Config(format!(
                "parameter `{name}` does not apply to model {}",
                self.name()
            ))
        };
        match (&mut m, name) {
            (ModelSpec::LandauZener { lambda, .. }, "lambda") => *lambda = value,
            (ModelSpec::LandauZener { tau, .. }, "tau") => *tau = value,
            (ModelSpec::ModifiedLz { lambda, .. }, "lambda") => *lambda = value,
            (ModelSpec::ModifiedLz { tau, .. }, "tau") => *tau = value,
            (ModelSpec::ModifiedLz { big_t, .. }, "T") => *big_t = value,
            (ModelSpec::ConstantField { e_field, .. }, "eE") => *e_field = value,
            (ModelSpec::ConstantField { m_perp, .. }, "m" | "mperp") => *m_perp = value,
            (ModelSpec::ConstantField { p_z, .. }, "pz") => *p_z = value,
            (ModelSpec::SauterPulse { e_field, .. }, "eE")
            | (ModelSpec::AssistedSchwinger { e_field, .. }, "eE") => *e_field = value,
            (ModelSpec::SauterPulse { omega, .. }, "omega")
            | (ModelSpec::AssistedSchwinger { omega, .. }, "omega") => *omega = value,
            (ModelSpec::SauterPulse { mass, .. }, "m")
            | (ModelSpec::AssistedSchwinger { mass, .. }, "m") => *mass = value,
            (ModelSpec::SauterPulse { p_perp, .. }, "pperp")
            | (ModelSpec::AssistedSchwinger { p_perp, .. }, "pperp") => *p_perp = value,
            (ModelSpec::SauterPulse { p_z, .. }, "pz")
            | (ModelSpec::AssistedSchwinger { p_z, .. }, "pz") => *p_z = value,
            (ModelSpec::AssistedSchwinger { eps, .. }, "eps") => *eps = value,
            (
                ModelSpec::SauterPulse {
                    omega,
                    mass,
                    e_field,
                    ..
                },
                "gamma",
            )
            | (
                ModelSpec::AssistedSchwinger {
                    omega,
                    mass,
                    e_field,
                    ..
                },
                "gamma",
            ) => *omega = value * *e_field / *mass,
            _ => return Err(unknown()),
        }
        m.validate()?;
        Ok(m)
    }

    /// Parses the flat `key = value` document format.
    ///
    /// Keys: `model`, `lambda`, `tau`, `T`, `eE`, `eps`, `omega`, `m`,
    /// `pperp`, `pz`. Lines may use `=` or `:`; `#` starts a comment.
    pub fn from_kv(doc: &str) -> Result<ModelSpec> {
        KvParams::parse(doc)?.build()
    }
}

/// Loose parameter bag shared by the document parser and the CLI flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvParams {
    pub model: Option<String>,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub big_t: Option<f64>,
    pub e_field: Option<f64>,
    pub eps: Option<f64>,
    pub omega: Option<f64>,
    pub mass: Option<f64>,
    pub p_perp: Option<f64>,
    pub p_z: Option<f64>,
}

impl KvParams {
    /// Reads a `key = value` document without building the model.
    pub fn parse(doc: &str) -> Result<Self> {
        let mut kv = KvParams::default();
        for (lineno, raw) in doc.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| {
                    Error::Config(format!("line {}: expected `key = value`", lineno + 1))
                })?;
            kv.set(k.trim(), v.trim().trim_matches('"'))?;
        }
        Ok(kv)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if key == "model" {
            self.model = Some(value.to_string());
            return Ok(());
        }
        let v: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("value for `{key}` is not a number: {value}")))?;
        let slot = match key {
            "lambda" => &mut self.lambda,
            "tau" => &mut self.tau,
            "T" => &mut self.big_t,
            "eE" => &mut self.e_field,
            "eps" => &mut self.eps,
            "omega" => &mut self.omega,
            "m" => &mut self.mass,
            "pperp" => &mut self.p_perp,
            "pz" => &mut self.p_z,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        };
        if slot.is_some() {
            return Err(Error::Config(format!("duplicate key `{key}`")));
        }
        *slot = Some(v);
        Ok(())
    }

    fn require(v: Option<f64>, key: &str, model: &str) -> Result<f64> {
        v.ok_or_else(|| Error::Config(format!("model `{model}` requires `{key}`")))
    }

    fn reject(&self, model: &str, allowed: &[&str]) -> Result<()> {
        let present = [
            ("lambda", self.lambda.is_some()),
            ("tau", self.tau.is_some()),
            ("T", self.big_t.is_some()),
            ("eE", self.e_field.is_some()),
            ("eps", self.eps.is_some()),
            ("omega", self.omega.is_some()),
            ("m", self.mass.is_some()),
            ("pperp", self.p_perp.is_some()),
            ("pz", self.p_z.is_some()),
        ];
        for (k, is) in present {
            if is && !allowed.contains(&k) {
                return Err(Error::Config(format!(
                    "key `{k}` does not apply to model `{model}`"
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ModelSpec> {
        let model = self
            .model
            .as_deref()
            .ok_or_else(|| Error::Config("missing `model`".into()))?;
        let spec = match model {
            "lz" | "landau-zener" => {
                self.reject(model, &["lambda", "tau"])?;
                ModelSpec::LandauZener {
                    lambda: Self::require(self.lambda, "lambda", model)?,
                    tau: Self::require(self.tau, "tau", model)?,
                }
            }
            "mlz" | "modified-lz" => {
                self.reject(model, &["lambda", "tau", "T"])?;
                ModelSpec::ModifiedLz {
                    lambda: Self::require(self.lambda, "lambda", model)?,
                    tau: Self::require(self.tau, "tau", model)?,
                    big_t: Self::require(self.big_t, "T", model)?,
                }
            }
            "constant" | "constant-field" => {
                self.reject(model, &["eE", "m", "pperp", "pz"])?;
                let m = Self::require(self.mass, "m", model)?;
                ModelSpec::ConstantField {
                    e_field: Self::require(self.e_field, "eE", model)?,
                    m_perp: m.hypot(self.p_perp.unwrap_or(0.0)),
                    p_z: self.p_z.unwrap_or(0.0),
                }
            }
            "sauter" | "sauter-pulse" => {
                self.reject(model, &["eE", "omega", "m", "pperp", "pz"])?;
                ModelSpec::SauterPulse {
                    e_field: Self::require(self.e_field, "eE", model)?,
                    omega: Self::require(self.omega, "omega", model)?,
                    mass: Self::require(self.mass, "m", model)?,
                    p_perp: self.p_perp.unwrap_or(0.0),
                    p_z: self.p_z.unwrap_or(0.0),
                }
            }
            "dasm" | "assisted-schwinger" => {
                self.reject(model, &["eE", "eps", "omega", "m", "pperp", "pz"])?;
                ModelSpec::AssistedSchwinger {
                    e_field: Self::require(self.e_field, "eE", model)?,
                    eps: self.eps.unwrap_or(0.0),
                    omega: Self::require(self.omega, "omega", model)?,
                    mass: Self::require(self.mass, "m", model)?,
                    p_perp: self.p_perp.unwrap_or(0.0),
                    p_z: self.p_z.unwrap_or(0.0),
                }
            }
            other => return Err(Error::Config(format!("unknown model `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Damped Newton for a holomorphic `h` with known derivative. Returns `None`
/// when the iteration leaves a bounded region or fails to converge.
pub(crate) fn newton_polish<H>(h: H, start: C64, scale: f64) -> Option<C64>
where
    H: Fn(C64) -> (C64, C64),
{
    let mut t = start;
    let mut last = f64::INFINITY;
    for _ in 0..80 {
        let (v, d) = h(t);
        if !v.is_finite() || !d.is_finite() || d.norm() == 0.0 {
            return None;
        }
        let mut step = v / d;
        let cap = 0.5 * scale.max(t.norm() * 0.25);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        t -= step;
        if (t - start).norm() > 1e3 * scale.max(start.norm()) {
            return None;
        }
        let s = step.norm();
        if s < 1e-15 * scale.max(t.norm()) || (s < 1e-12 * scale && s >= last) {
            let (v, _) = h(t);
            return v.is_finite().then_some(t);
        }
        last = s;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mlz(l: f64, tau: f64, t: f64) -> ModelSpec {
        ModelSpec::ModifiedLz {
            lambda: l,
            tau,
            big_t: t,
        }
    }

    #[test]
    fn mlz_values_at_origin() {
        let m = mlz(1.0, 1.0, 2.0);
        let z = C64::new(0.0, 0.0);
        assert_eq!(m.eval_alpha(z).unwrap(), C64::new(0.0, 0.0));
        assert_relative_eq!(m.eval_v(z).unwrap().re, 1.0);
        assert_relative_eq!(m.eval_alpha_dot(z).unwrap().re, 1.0);
        assert_relative_eq!(m.eta(z).unwrap().re, 0.5);
        assert_relative_eq!(m.delta_e_real(0.0), 1.0);
    }

    #[test]
    fn mlz_eta_is_independent_of_t() {
        for big_t in [0.3, 1.0, 7.0] {
            let m = mlz(2.5, 1.3, big_t);
            let t = C64::new(0.4, 0.2);
            let expect = 1.3 / (2.0 * (t * t + 1.3 * 1.3));
            assert!((m.eta(t).unwrap() - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn constant_field_values() {
        let m = ModelSpec::ConstantField {
            e_field: 1.0,
            m_perp: 1.0,
            p_z: 0.0,
        };
        assert_relative_eq!(m.eval_alpha(C64::new(1.0, 0.0)).unwrap().re, 2.0);
        assert_relative_eq!(m.eval_v(C64::new(3.0, 1.0)).unwrap().re, 2.0);
        assert_eq!(
            m.eval_v_dot(C64::new(3.0, 1.0)).unwrap(),
            C64::new(0.0, 0.0)
        );
        assert_relative_eq!(m.eta(C64::new(0.0, 0.0)).unwrap().re, 0.5);
        assert_relative_eq!(m.delta_e_real(0.0), 2.0);
    }

    #[test]
    fn sauter_saturates() {
        let m = ModelSpec::SauterPulse {
            e_field: 3.0,
            omega: 1.0,
            mass: 3.0,
            p_perp: 0.0,
            p_z: 0.0,
        };
        let a = m.eval_alpha(C64::new(20.0, 0.0)).unwrap();
        assert_relative_eq!(a.re, 6.0, max_relative = 1e-12);
        assert_relative_eq!(m.delta_e_real(0.0), 6.0);
        let far = m.eval_alpha(C64::new(-800.0, 0.3)).unwrap();
        assert!(far.is_finite());
    }

    #[test]
    fn pole_proximity_is_an_error() {
        let m = mlz(1.0, 1.0, 2.0);
        assert!(matches!(
            m.eval_alpha(C64::new(0.0, 2.0)),
            Err(Error::PoleProximity { .. })
        ));
        let s = ModelSpec::SauterPulse {
            e_field: 3.0,
            omega: 3.0,
            mass: 3.0,
            p_perp: 0.0,
            p_z: 0.0,
        };
        assert!(s.eval_alpha(C64::new(0.0, PI / 6.0)).is_err());
        assert!(s.eval_alpha(C64::new(0.0, PI / 6.0 + 1e-3)).is_ok());
    }

    #[test]
    fn closing_point_eta_error() {
        let m = mlz(1.0, 1.0, 2.0);
        assert!(matches!(
            m.eta(C64::new(0.0, 1.0)),
            Err(Error::ClosingPoint(_))
        ));
    }

    #[test]
    fn mlz_catalog() {
        let m = mlz(1.0, 1.0, 2.0);
        let c = m.singularities(&Window::upper(5.0)).unwrap();
        assert_eq!(c.closing.len(), 1);
        assert!((c.closing[0].t - I).norm() < 1e-15);
        assert_eq!(c.poles.len(), 1);
        assert!((c.poles[0].t - 2.0 * I).norm() < 1e-15);
    }

    #[test]
    fn constant_field_catalog() {
        let m = ModelSpec::ConstantField {
            e_field: 1.0,
            m_perp: 1.0,
            p_z: 0.5,
        };
        let c = m.singularities(&m.default_window()).unwrap();
        assert!((c.closing[0].t - C64::new(-0.5, 1.0)).norm() < 1e-15);
        assert!(c.poles.is_empty());
    }

    #[test]
    fn sauter_catalog_gamma_three() {
        let m = ModelSpec::SauterPulse {
            e_field: 3.0,
            omega: 3.0,
            mass: 3.0,
            p_perp: 0.0,
            p_z: 0.0,
        };
        let c = m.singularities(&m.default_window()).unwrap();
        let tc = c.closing[0].t;
        assert!(tc.re.abs() < 1e-14);
        assert_relative_eq!(tc.im, 3.0f64.atan() / 3.0, max_relative = 1e-13);
        assert_relative_eq!(c.poles[0].t.im, PI / 6.0, max_relative = 1e-14);
        let g = m.jet(tc).gap_sq();
        assert!(g.norm() < EPS_ROOT * 36.0);
    }

    #[test]
    fn empty_window_warns() {
        let m = mlz(1.0, 1.0, 2.0);
        let c = m.singularities(&Window::new(3.0, 4.0, 0.0, 0.5)).unwrap();
        assert!(c.warnings.contains(&Warning::WindowTooSmall));
    }

    #[test]
    fn multistart_finds_constant_field_root() {
        let m = ModelSpec::ConstantField {
            e_field: 2.0,
            m_perp: 1.0,
            p_z: 0.5,
        };
        let roots = m.closing_points_multistart(&Window::upper(2.0), 40, 20);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - C64::new(-0.25, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn dasm_catalog_with_momentum_uses_newton() {
        let m = ModelSpec::AssistedSchwinger {
            e_field: 3.0,
            eps: 0.3,
            omega: 2.0,
            mass: 3.0,
            p_perp: 0.0,
            p_z: 0.4,
        };
        let c = m.singularities(&m.default_window()).unwrap();
        assert!(!c.closing.is_empty());
        let g0 = m.gap_at_origin();
        for s in &c.closing {
            assert!(m.jet(s.t).gap_sq().norm() < EPS_ROOT * g0 * g0);
        }
    }

    #[test]
    fn kv_document() {
        let m = ModelSpec::from_kv("model = mlz\nlambda = 1\ntau: 1 # comment\nT = 0.5\n").unwrap();
        assert_eq!(m, mlz(1.0, 1.0, 0.5));
        assert!(ModelSpec::from_kv("model = mlz\nlambda=1\ntau=1\nT=2\nfoo=3").is_err());
        assert!(ModelSpec::from_kv("model = mlz\nlambda=1\ntau=1").is_err());
        assert!(ModelSpec::from_kv("model = lz\nlambda=1\ntau=1\nT=2").is_err());
        let c = ModelSpec::from_kv("model=constant\neE=1\nm=0.6\npperp=0.8").unwrap();
        assert_relative_eq!(c.m_perp().unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn with_param_gamma() {
        let s = ModelSpec::SauterPulse {
            e_field: 3.0,
            omega: 1.0,
            mass: 3.0,
            p_perp: 0.0,
            p_z: 0.0,
        };
        match s.with_param("gamma", 4.0).unwrap() {
            ModelSpec::SauterPulse { omega, .. } => assert_relative_eq!(omega, 4.0),
            _ => unreachable!(),
        }
        assert!(s.with_param("lambda", 1.0).is_err());
        assert!(s.with_param("omega", -1.0).is_err());
    }
}
