//! Saddles of F, their steepest descents and ascents, intersection numbers,
//! and the amplitude `a₊ = Σ nᵢ ∫_{𝒥ᵢ} e^F dt`.
//!
//! Thimbles are traced on the Riemann surface of F: the δE branch and F
//! itself are carried along the flow rather than re-evaluated on the
//! principal sheet, so a descent that slips past a branch point keeps going
//! on the next sheet. Only real-axis crossings on the principal sheet count
//! towards a Morse index.

use crate::continuation::{sqrt_near, Continuation, Exponent, SecondDerivative, EPS_DEGENERATE};
use crate::error::{Error, Result, Warning};
use crate::model::{SingularKind, Window, EPS_POLE};
use crate::ode::Dopri5;
use crate::parallel::{par_map, Execution};
use crate::quadrature::gl20;
use crate::{C64, I};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Launch offset from the saddle, in units of the local scale.
pub const EPS_LAUNCH: f64 = 1e-4;

/// Quality threshold on `|F'''| / |F''|^{3/2}`.
pub const DEGENERATE_RATIO: f64 = 2.0;

const DEDUP: f64 = 1e-6;

const MAX_DEFLECTIONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThimbleConfig {
    /// Re F drop (or rise, for ascents) at which tracing stops.
    pub depth_floor: f64,
    /// Tracing box half-width as a multiple of the search window extent.
    pub window_factor: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Saddle-search seed grid (columns, rows).
    pub grid: (usize, usize),
    pub execution: Execution,
}

impl Default for ThimbleConfig {
    fn default() -> Self {
        Self {
            depth_floor: 40.0,
            window_factor: 6.0,
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 20_000,
            grid: (40, 20),
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Saddle {
    pub t: C64,
    /// F(t_s) continued along the default path.
    pub f: C64,
    /// δE(t_s) on the same branch.
    pub gap: C64,
    pub second: SecondDerivative,
    /// Descent angle, `(π − φ)/2` reduced to (−π/2, π/2].
    pub theta: f64,
    pub morse: Option<i32>,
    /// `|F'''| / |F''|^{3/2}`.
    pub cubic_ratio: f64,
    pub degenerate: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThimbleKind {
    Descent,
    Ascent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// |Re F − Re F(t_s)| reached the depth floor.
    DepthReached,
    /// The remaining tail of ∫e^F fell below round-off of the running total.
    TailNegligible,
    WindowExit,
    PoleApproach,
    BranchPointApproach,
}

/// One polyline vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThimbleSample {
    pub re: f64,
    pub im: f64,
    #[serde(rename = "reF")]
    pub re_f: f64,
    #[serde(rename = "imF")]
    pub im_f: f64,
}

impl ThimbleSample {
    fn new(t: C64, f: C64) -> Self {
        Self {
            re: t.re,
            im: t.im,
            re_f: f.re,
            im_f: f.im,
        }
    }

    pub fn t(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn f(&self) -> C64 {
        C64::new(self.re_f, self.im_f)
    }
}

/// A real-axis crossing of an ascent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub x: f64,
    pub upward: bool,
    /// The crossing happened on the sheet where Δ is real on the real axis.
    pub principal: bool,
    /// Angle with the real axis, in [0, π/2].
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thimble {
    pub kind: ThimbleKind,
    pub direction: Direction,
    pub launch_angle: f64,
    /// Starts at the saddle. F is re-integrated along each chord, independently
    /// of the flow.
    pub samples: Vec<ThimbleSample>,
    pub termination: Termination,
    /// `∫ e^{F − F(t_s)} dt` from the saddle outward, end tail included.
    /// Zero for ascents.
    pub integral: C64,
    pub crossings: Vec<Crossing>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleSearch {
    pub saddles: Vec<Saddle>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleStructure {
    pub saddle: Saddle,
    /// Launched at θ − π/2 and θ + π/2.
    pub ascents: [Thimble; 2],
    /// Launched at θ and θ + π; traced for contributing saddles.
    pub descents: Option<[Thimble; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Structure {
    pub saddles: Vec<SaddleStructure>,
    pub warnings: Vec<Warning>,
}

impl Structure {
    pub fn contributing(&self) -> impl Iterator<Item = &SaddleStructure> {
        self.saddles
            .iter()
            .filter(|s| s.saddle.morse.unwrap_or(0) != 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ThimbleGaussian,
    ThimbleExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleTerm {
    pub t: C64,
    pub morse: i32,
    pub theta: f64,
    pub f: C64,
    pub contribution: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeEstimate {
    pub method: Method,
    pub amplitude: C64,
    /// |a₊|² clamped to [0, 1].
    pub probability: f64,
    pub clamped: bool,
    pub terms: Vec<SaddleTerm>,
    pub warnings: Vec<Warning>,
}

impl AmplitudeEstimate {
    fn assemble(method: Method, terms: Vec<SaddleTerm>, mut warnings: Vec<Warning>) -> Self {
        let amplitude: C64 = terms.iter().map(|s| s.contribution).sum();
        let raw = amplitude.norm_sqr();
        let clamped = raw > 1.0;
        if clamped {
            warnings.push(Warning::Clamped { raw });
        }
        Self {
            method,
            amplitude,
            probability: raw.min(1.0),
            clamped,
            terms,
            warnings,
        }
    }
}

/// `(π − φ)/2` reduced to (−π/2, π/2].
pub fn descent_angle(phi: f64) -> f64 {
    let mut th = (PI - phi) / 2.0;
    while th > FRAC_PI_2 {
        th -= PI;
    }
    while th <= -FRAC_PI_2 {
        th += PI;
    }
    th
}

/// An exponent prepared for saddle search and thimble tracing inside a box
/// around a search window.
pub struct Landscape<'a, E: Exponent + ?Sized> {
    pub cont: Continuation<'a, E>,
    pub config: ThimbleConfig,
    pub search: Window,
    /// Half-width of the square tracing box centred on the origin.
    pub bounds: f64,
    fscale: f64,
}

impl<'a, E: Exponent + ?Sized> Landscape<'a, E> {
    pub fn new(exp: &'a E, search: Window, config: ThimbleConfig) -> Self {
        let half = [
            search.re_min.abs(),
            search.re_max.abs(),
            search.im_min.abs(),
            search.im_max.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        // far from the singularities Re F falls roughly like |δE| Im t, so the
        // box must also be tall enough for that slope to reach the floor
        let base = config.window_factor * half;
        let g_far = [
            C64::new(0.0, 0.0),
            C64::new(base, 0.0),
            C64::new(-base, 0.0),
        ]
        .into_iter()
        .map(|t| exp.gap_sq(t).norm().sqrt())
        .fold(f64::INFINITY, f64::min);
        let bounds = if g_far > 0.0 && g_far.is_finite() {
            base.max((1.2 * config.depth_floor / g_far).min(50.0 * base))
        } else {
            base
        };
        let cont = Continuation::new(exp, Some(1.25 * bounds));
        let fscale = exp.gap_origin().norm() + 1.0 / cont.scale;
        Self {
            cont,
            config,
            search,
            bounds,
            fscale,
        }
    }

    fn in_box(&self, t: C64) -> bool {
        t.re.abs() <= self.bounds && t.im.abs() <= self.bounds
    }

    fn seeds(&self) -> Vec<C64> {
        let w = &self.search;
        let (nx, ny) = self.config.grid;
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let x = w.re_min + (w.re_max - w.re_min) * (i as f64 + 0.5) / nx as f64;
                let y = w.im_min + (w.im_max - w.im_min) * (j as f64 + 0.5) / ny as f64;
                out.push(C64::new(x, y));
            }
        }
        let scale = self.cont.scale;
        for s in &self.cont.singular {
            if !w.contains(s.t) {
                continue;
            }
            for r in [0.02, 0.1, 0.3] {
                for k in 0..8 {
                    let z = s.t + C64::from_polar(r * scale, (k as f64 + 0.25) * PI / 4.0);
                    if w.contains(z) {
                        out.push(z);
                    }
                }
            }
        }
        out
    }

    /// Damped Newton iteration on F' with the δE branch fixed by the
    /// default path at every iterate.
    fn newton(&self, seed: C64) -> Option<(C64, C64)> {
        let c = &self.cont;
        let scale = c.scale;
        let mut t = seed;
        if !self.in_box(t) || c.singular_distance(t) < 10.0 * EPS_POLE * scale {
            return None;
        }
        let mut gap = c.gap_at(t).ok()?;
        for _ in 0..80 {
            let (fp, g) = c.f_prime_on_branch(t, gap);
            let fpp = c.f_second_on_branch(t, g);
            if !fp.is_finite() || !fpp.is_finite() || fpp.norm() == 0.0 {
                return None;
            }
            let mut step = fp / fpp;
            let cap = (0.5 * c.singular_distance(t)).min(0.5 * self.bounds);
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            let prev = t;
            t -= step;
            if !self.in_box(t) || c.singular_distance(t) < 10.0 * EPS_POLE * scale {
                return None;
            }
            // the step stays within half the singular distance, so the
            // branch can be carried locally
            gap = c.walk(prev, t, g).ok()?;
            if step.norm() < 1e-13 * scale.max(t.norm()) {
                if c.singular_distance(t) < 10.0 * EPS_POLE * scale {
                    return None;
                }
                let gap = c.gap_at(t).ok()?;
                let (fp, g) = c.f_prime_on_branch(t, gap);
                return (fp.norm() < 1e-8 * self.fscale).then_some((t, g));
            }
        }
        None
    }

    /// Stationary point of F near `t` on the branch carried from `gap`.
    fn stationary_near(&self, t: C64, gap: C64) -> Option<(C64, C64)> {
        let c = &self.cont;
        let (mut x, mut g) = (t, gap);
        for _ in 0..40 {
            let (fp, gx) = c.f_prime_on_branch(x, g);
            let fpp = c.f_second_on_branch(x, gx);
            let step = fp / fpp;
            if !step.is_finite() || step.norm() > 0.5 * c.singular_distance(x) {
                return None;
            }
            let next = x - step;
            g = sqrt_near(c.exp.gap_sq(next), gx);
            x = next;
            if step.norm() < 1e-13 * c.scale.max(x.norm()) {
                return ((x - t).norm() < 1e-2 * c.scale).then_some((x, g));
            }
        }
        None
    }

    fn classify(&self, t: C64, gap: C64) -> Result<Saddle> {
        let c = &self.cont;
        let scale = c.scale;
        let cv = c.evaluate(t, true)?;
        if (cv.gap - gap).norm() > 1e-6 * (gap.norm() + self.fscale) {
            return Err(Error::Domain(format!(
                "saddle at {t} is off the default-path sheet"
            )));
        }
        let f = cv.f().ok_or(Error::ZeroEta(t))?;
        let second = SecondDerivative::new(c.f_second_on_branch(t, gap));
        let third = c.f_third_on_branch(t, gap);
        let cubic_ratio = third.norm() / second.modulus.powf(1.5);
        let hard = second.modulus < EPS_DEGENERATE / (scale * scale);
        Ok(Saddle {
            t,
            f,
            gap,
            second,
            theta: descent_angle(second.phi),
            morse: None,
            cubic_ratio,
            degenerate: hard || cubic_ratio > DEGENERATE_RATIO,
            residual: c.f_prime_on_branch(t, gap).0.norm(),
        })
    }

    /// Multistart Newton over the search window.
    pub fn find_saddles(&self) -> SaddleSearch {
        let seeds = self.seeds();
        let roots = par_map(&seeds, self.config.execution, |s| self.newton(*s));
        let scale = self.cont.scale;
        let mut found: Vec<(C64, C64)> = Vec::new();
        for (t, g) in roots.into_iter().flatten() {
            if !self.search.contains(t) {
                continue;
            }
            if found.iter().all(|(u, _)| (u - t).norm() > DEDUP * scale) {
                found.push((t, g));
            }
        }
        found.sort_by(|a, b| a.0.im.total_cmp(&b.0.im).then(a.0.re.total_cmp(&b.0.re)));
        let mut warnings = Vec::new();
        let mut saddles = Vec::new();
        for (t, g) in found {
            if let Ok(s) = self.classify(t, g) {
                if s.degenerate {
                    warnings.push(Warning::DegenerateSaddle {
                        re: t.re,
                        im: t.im,
                        modulus: s.second.modulus,
                    });
                }
                saddles.push(s);
            }
        }
        if saddles.is_empty() {
            warnings.push(Warning::NoSaddle);
        }
        SaddleSearch { saddles, warnings }
    }

    /// Follows the gradient flow of Re F out of `saddle`.
    pub fn trace(
        &self,
        saddle: &Saddle,
        kind: ThimbleKind,
        direction: Direction,
    ) -> Result<Thimble> {
        let c = &self.cont;
        let exp = c.exp;
        let scale = c.scale;
        let cfg = &self.config;
        if saddle.second.modulus < EPS_DEGENERATE / (scale * scale) {
            return Err(Error::DegenerateSaddle {
                t: saddle.t,
                modulus: saddle.second.modulus,
            });
        }
        let descent = kind == ThimbleKind::Descent;
        let psi = saddle.theta
            + match (kind, direction) {
                (ThimbleKind::Descent, Direction::Plus) => 0.0,
                (ThimbleKind::Descent, Direction::Minus) => PI,
                (ThimbleKind::Ascent, Direction::Plus) => FRAC_PI_2,
                (ThimbleKind::Ascent, Direction::Minus) => -FRAC_PI_2,
            };
        let sigma = if descent { -1.0 } else { 1.0 };
        let fs = saddle.f;
        let dz = C64::from_polar(EPS_LAUNCH * scale, psi);
        let t0 = saddle.t + dz;
        let mut gap = if saddle.gap.norm() > 1e-6 * self.fscale {
            sqrt_near(exp.gap_sq(t0), saddle.gap)
        } else {
            c.gap_at(t0)?
        };
        let fpp = saddle.second.value;
        let f0 = fs + 0.5 * fpp * dz * dz;
        let i0 = if descent {
            dz * (1.0 + fpp * dz * dz / 6.0)
        } else {
            C64::new(0.0, 0.0)
        };
        let mut y = [t0.re, t0.im, f0.re, f0.im, i0.re, i0.im];
        let mut chord_f = f0;
        let mut samples = vec![ThimbleSample::new(saddle.t, fs), ThimbleSample::new(t0, f0)];
        let mut crossings = Vec::new();
        let mut warnings = Vec::new();
        let solver = Dopri5::new(cfg.rtol, cfg.atol);
        let mut s = 0.0;
        let mut h = 0.01 * scale;
        let mut steps = 0usize;
        let mut deflections = 0;
        loop {
            let t = C64::new(y[0], y[1]);
            let dist = c.singular_distance(t);
            h = h.min(0.05 * scale).min(0.3 * dist);
            if h < 1e-12 * scale {
                // collision with another stationary point: leave it on the
                // left of the incoming heading, as under F → e^{-iε} F
                deflections += 1;
                if deflections > MAX_DEFLECTIONS {
                    return Err(Error::TracingStall(t));
                }
                let (xs, gxs) = self.stationary_near(t, gap).ok_or(Error::TracingStall(t))?;
                let back = samples[samples.len() - 2].t();
                let heading = (xs - back) / (xs - back).norm();
                let phi = c.f_second_on_branch(xs, gxs).arg();
                let mut u = C64::from_polar(
                    1.0,
                    descent_angle(phi) + if descent { 0.0 } else { FRAC_PI_2 },
                );
                if (heading.conj() * u).im < 0.0 {
                    u = -u;
                }
                let t1 = xs + EPS_LAUNCH * scale * u;
                let f_x = chord_f + self.chord(t, xs, gap);
                let f_1 = f_x + self.chord(xs, t1, gxs);
                if descent {
                    let simpson = |a: C64, b: C64, fa: C64, fb: C64, g: C64| {
                        let m = 0.5 * (a + b);
                        let fm = fa + self.chord(a, m, g);
                        (b - a) / 6.0 * ((fa - fs).exp() + 4.0 * (fm - fs).exp() + (fb - fs).exp())
                    };
                    let extra = simpson(t, xs, chord_f, f_x, gap) + simpson(xs, t1, f_x, f_1, gxs);
                    y[4] += extra.re;
                    y[5] += extra.im;
                }
                chord_f = f_1;
                gap = sqrt_near(exp.gap_sq(t1), gxs);
                y[0] = t1.re;
                y[1] = t1.im;
                y[2] = f_1.re;
                y[3] = f_1.im;
                samples.push(ThimbleSample::new(xs, f_x));
                samples.push(ThimbleSample::new(t1, f_1));
                warnings.push(Warning::StokesCollision {
                    re: xs.re,
                    im: xs.im,
                });
                h = 0.01 * scale;
                continue;
            }
            let g_ref = gap;
            let mut rhs = |_s: f64, y: &[f64; 6]| -> [f64; 6] {
                let t = C64::new(y[0], y[1]);
                let l = exp.local(t);
                let g = sqrt_near(l.gap_sq, g_ref);
                let fp = I * g + l.dlog_eta;
                let n = fp.norm();
                let dt = sigma * fp.conj() / n;
                let di = if descent {
                    (C64::new(y[2], y[3]) - fs).exp() * dt
                } else {
                    C64::new(0.0, 0.0)
                };
                [dt.re, dt.im, sigma * n, 0.0, di.re, di.im]
            };
            let trial = solver.attempt(&mut rhs, s, &y, h);
            steps += 1;
            if steps > cfg.max_steps {
                return Err(Error::TracingStall(t));
            }
            if trial.err > 1.0 || !trial.err.is_finite() {
                h = solver.propose(h, trial.err);
                continue;
            }
            let t_new = C64::new(trial.y[0], trial.y[1]);
            if descent {
                if let Some((q, pole)) = self.pole_cut_crossing(t, t_new) {
                    if (t_new - t).norm() > 1e-6 * scale {
                        // shrink onto the cut so q stays on the level set
                        h *= 0.5;
                        continue;
                    }
                    // attach to the pole instead of slipping onto the next sheet
                    let integral = C64::new(y[4], y[5]);
                    let (to_q, f_q, gap_q) = self.graded_exp_integral(t, q, chord_f, g_ref, fs);
                    let (to_p, f_p, _) = self.graded_exp_integral(q, pole, f_q, gap_q, fs);
                    samples.push(ThimbleSample::new(q, f_q));
                    samples.push(ThimbleSample::new(pole, f_p));
                    return Ok(Thimble {
                        kind,
                        direction,
                        launch_angle: psi,
                        samples,
                        termination: Termination::PoleApproach,
                        integral: integral + to_q + to_p,
                        crossings,
                        warnings,
                    });
                }
            }
            // chord re-integration of F, independent of the flow state
            chord_f += self.chord(t, t_new, g_ref);
            gap = sqrt_near(exp.gap_sq(t_new), g_ref);
            if !descent && (t.im > 0.0) != (t_new.im > 0.0) {
                crossings.push(self.crossing(t, t_new, chord_f, gap, &mut warnings));
            }
            s += h;
            y = trial.y;
            samples.push(ThimbleSample::new(t_new, chord_f));
            h = solver.propose(h, trial.err);

            let f_rel = C64::new(y[2], y[3]) - fs;
            let integral = C64::new(y[4], y[5]);
            let tail = |g: C64| {
                let fp = I * g + exp.eta_log_derivative(t_new);
                let fpp = c.f_second_on_branch(t_new, g);
                -f_rel.exp() / fp * (1.0 + fpp / (fp * fp))
            };
            let end = if descent {
                if f_rel.re <= -cfg.depth_floor {
                    Some((Termination::DepthReached, tail(gap)))
                } else if f_rel.re < -10.0 {
                    let tl = tail(gap);
                    (tl.norm() < 1e-14 * integral.norm())
                        .then_some((Termination::TailNegligible, tl))
                } else {
                    None
                }
            } else {
                (f_rel.re >= cfg.depth_floor)
                    .then_some((Termination::DepthReached, C64::new(0.0, 0.0)))
            };
            let end = end.or_else(|| {
                if self.in_box(t_new) {
                    return None;
                }
                if !descent {
                    return Some((Termination::WindowExit, C64::new(0.0, 0.0)));
                }
                let tl = tail(gap);
                let ratio = f_rel.exp().norm() / integral.norm();
                if ratio > 1e-12 {
                    warnings.push(Warning::TailTruncation {
                        re: t_new.re,
                        im: t_new.im,
                        ratio,
                    });
                }
                Some((Termination::WindowExit, tl))
            });
            let end = end.or_else(|| {
                let near = c.nearest_singular(t_new)?;
                if (near.t - t_new).norm() >= 1e-6 * scale {
                    return None;
                }
                let reason = match near.kind {
                    SingularKind::Pole => Termination::PoleApproach,
                    SingularKind::Closing | SingularKind::EtaZero => {
                        Termination::BranchPointApproach
                    }
                };
                let piece = if descent {
                    f_rel.exp() * (near.t - t_new)
                } else {
                    C64::new(0.0, 0.0)
                };
                Some((reason, piece))
            });
            if let Some((termination, extra)) = end {
                let integral = if descent {
                    integral + extra
                } else {
                    C64::new(0.0, 0.0)
                };
                return Ok(Thimble {
                    kind,
                    direction,
                    launch_angle: psi,
                    samples,
                    termination,
                    integral,
                    crossings,
                    warnings,
                });
            }
        }
    }

    /// `∫ F' dt` along the straight chord a→b by 20-point Gauss-Legendre.
    fn chord(&self, a: C64, b: C64, gap_ref: C64) -> C64 {
        let (gx, gw) = gl20();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = C64::new(0.0, 0.0);
        for (x, w) in gx.iter().zip(gw) {
            acc += self.cont.f_prime_on_branch(mid + half * *x, gap_ref).0 * *w;
        }
        acc * half
    }

    /// First crossing of the chord a→b with the branch cut of a pole of δE²
    /// (the vertical ray pointing away from the real axis), provided no other
    /// singular point sits on the cut between the pole and the crossing.
    fn pole_cut_crossing(&self, a: C64, b: C64) -> Option<(C64, C64)> {
        let tol = 1e-9 * self.cont.scale;
        let sing = &self.cont.singular;
        for p in sing
            .iter()
            .filter(|p| p.kind == SingularKind::Pole && p.t.im != 0.0)
        {
            let (da, db) = (a.re - p.t.re, b.re - p.t.re);
            if (da > 0.0) == (db > 0.0) {
                continue;
            }
            let q = a + (b - a) * (da / (da - db));
            let up = p.t.im.signum();
            if (q.im - p.t.im) * up <= 0.0 {
                continue;
            }
            let blocked = sing.iter().any(|s| {
                s.t != p.t
                    && (s.t.re - p.t.re).abs() < tol
                    && (s.t.im - p.t.im) * up > 0.0
                    && (q.im - s.t.im) * up > 0.0
            });
            if !blocked {
                return Some((C64::new(p.t.re, q.im), p.t));
            }
        }
        None
    }

    /// `∫_a^b e^{F − fs} dt` along the chord with F continued from `f_a`,
    /// returning also F and δE at b. The substitution `t = b + (a − b)u²`
    /// and geometric panels in u absorb square-root and logarithmic
    /// behaviour at b.
    fn graded_exp_integral(
        &self,
        a: C64,
        b: C64,
        f_a: C64,
        gap_a: C64,
        fs: C64,
    ) -> (C64, C64, C64) {
        let (gx, gw) = gl20();
        let d = a - b;
        let tu = |u: f64| b + d * (u * u);
        let dfdv = |v: f64, gap: C64| self.cont.f_prime_on_branch(tu(v), gap).0 * (2.0 * v) * d;
        let mut acc = C64::new(0.0, 0.0);
        let mut f_hi = f_a;
        let mut gap = gap_a;
        let mut u_hi = 1.0f64;
        while u_hi > 1e-6 {
            let u_lo = 0.7 * u_hi;
            let mid = 0.5 * (u_lo + u_hi);
            let half = 0.5 * (u_hi - u_lo);
            let mut step = C64::new(0.0, 0.0);
            for (x, w) in gx.iter().zip(gw) {
                let v = mid + half * x;
                let (m2, h2) = (0.5 * (v + u_hi), 0.5 * (u_hi - v));
                let mut back = C64::new(0.0, 0.0);
                for (y, wy) in gx.iter().zip(gw) {
                    back += dfdv(m2 + h2 * y, gap) * *wy;
                }
                let f_v = f_hi - back * h2;
                acc += (f_v - fs).exp() * (2.0 * v) * d * (w * half);
                step += dfdv(v, gap) * *w;
            }
            f_hi -= step * half;
            gap = sqrt_near(self.cont.exp.gap_sq(tu(u_lo)), gap);
            u_hi = u_lo;
        }
        // the last |t − b| ~ 1e-12 |a − b| is taken at constant F
        let rest = (f_hi - fs).exp() * (b - tu(u_hi));
        (rest - acc, f_hi, gap)
    }

    fn crossing(
        &self,
        a: C64,
        b: C64,
        f_b: C64,
        gap_b: C64,
        warnings: &mut Vec<Warning>,
    ) -> Crossing {
        let u = a.im / (a.im - b.im);
        let x = a.re + u * (b.re - a.re);
        let xc = C64::new(x, 0.0);
        let d = b - a;
        let angle = (d.im.abs() / d.norm()).asin();
        if angle < 1e-3 {
            warnings.push(Warning::TangentialCrossing { x, angle });
        }
        // F at x on the traced sheet, by a chord integral from b
        let f_x = f_b + self.chord(b, xc, gap_b);
        let eta = self.cont.exp.eta(xc);
        // δE is positive on the principal real axis; near it the principal
        // square root is the right sheet
        let g_p = self.cont.exp.gap_sq(b).sqrt();
        let principal = (gap_b - g_p).norm() <= (gap_b + g_p).norm()
            && (f_x.re - eta.norm().ln()).abs() < 1e-4 * (1.0 + f_x.norm());
        Crossing {
            x,
            upward: b.im > a.im,
            principal,
            angle,
        }
    }

    /// Saddles, their ascents and Morse indices, and the descents of every
    /// contributing saddle (of every saddle when `all_descents` is set).
    pub fn analyze(&self, all_descents: bool) -> Result<Structure> {
        let search = self.find_saddles();
        let mut warnings = search.warnings;
        let traced = par_map(
            &search.saddles,
            self.config.execution,
            |s| -> Result<SaddleStructure> {
                let mut saddle = *s;
                let minus = self.trace(&saddle, ThimbleKind::Ascent, Direction::Minus)?;
                let plus = self.trace(&saddle, ThimbleKind::Ascent, Direction::Plus)?;
                let (n, _) = morse_index(&minus, &plus);
                saddle.morse = Some(n);
                let descents = if n != 0 || all_descents {
                    Some([
                        self.trace(&saddle, ThimbleKind::Descent, Direction::Plus)?,
                        self.trace(&saddle, ThimbleKind::Descent, Direction::Minus)?,
                    ])
                } else {
                    None
                };
                Ok(SaddleStructure {
                    saddle,
                    ascents: [minus, plus],
                    descents,
                })
            },
        );
        let mut saddles = Vec::with_capacity(traced.len());
        for r in traced {
            let s = r?;
            for th in s.ascents.iter().chain(s.descents.iter().flatten()) {
                warnings.extend(th.warnings.iter().cloned());
            }
            saddles.push(s);
        }
        Ok(Structure { saddles, warnings })
    }
}

/// Signed count of principal-sheet real-axis crossings of the ascent
/// `𝒦`, oriented through the saddle along `e^{i(θ − π/2)}`: a downward
/// crossing counts +1, an upward one −1.
///
/// `minus` and `plus` are the halves launched at θ − π/2 and θ + π/2.
pub fn morse_index(minus: &Thimble, plus: &Thimble) -> (i32, Vec<Warning>) {
    let mut n = 0;
    let mut warnings = Vec::new();
    for (half, outward) in [(minus, true), (plus, false)] {
        for c in half.crossings.iter().filter(|c| c.principal) {
            let downward_along_k = if outward { !c.upward } else { c.upward };
            n += if downward_along_k { 1 } else { -1 };
            if c.angle < 1e-3 {
                warnings.push(Warning::TangentialCrossing {
                    x: c.x,
                    angle: c.angle,
                });
            }
        }
    }
    (n, warnings)
}

/// `a₊ ≈ Σ nᵢ e^{iθᵢ + F(t_s)} √(2π/|F''|)` over saddles with nonzero index.
pub fn amplitude_gaussian(saddles: &[Saddle]) -> Result<AmplitudeEstimate> {
    let mut warnings = Vec::new();
    let mut terms = Vec::new();
    for s in saddles {
        let n = s.morse.unwrap_or(0);
        if n == 0 {
            continue;
        }
        if s.second.modulus == 0.0 || !s.second.modulus.is_finite() {
            return Err(Error::DegenerateSaddle {
                t: s.t,
                modulus: s.second.modulus,
            });
        }
        if s.degenerate {
            warnings.push(Warning::DegenerateSaddle {
                re: s.t.re,
                im: s.t.im,
                modulus: s.second.modulus,
            });
        }
        let contribution =
            n as f64 * (I * s.theta + s.f).exp() * (2.0 * PI / s.second.modulus).sqrt();
        terms.push(SaddleTerm {
            t: s.t,
            morse: n,
            theta: s.theta,
            f: s.f,
            contribution,
        });
    }
    if terms.is_empty() {
        warnings.push(Warning::NoSaddle);
    }
    Ok(AmplitudeEstimate::assemble(
        Method::ThimbleGaussian,
        terms,
        warnings,
    ))
}

/// `a₊ = Σ nᵢ ∫_{𝒥ᵢ} e^F dt` by quadrature along the traced descents.
pub fn amplitude_exact(structure: &Structure) -> Result<AmplitudeEstimate> {
    let mut warnings = Vec::new();
    let mut terms = Vec::new();
    for s in structure.contributing() {
        let n = s.saddle.morse.unwrap_or(0);
        let [plus, minus] = s.descents.as_ref().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "descents of the saddle at {} were not traced",
                s.saddle.t
            ))
        })?;
        for th in [plus, minus] {
            warnings.extend(
                th.warnings
                    .iter()
                    .filter(|w| matches!(w, Warning::TailTruncation { .. }))
                    .cloned(),
            );
        }
        let contribution = n as f64 * s.saddle.f.exp() * (plus.integral - minus.integral);
        terms.push(SaddleTerm {
            t: s.saddle.t,
            morse: n,
            theta: s.saddle.theta,
            f: s.saddle.f,
            contribution,
        });
    }
    if terms.is_empty() {
        warnings.push(Warning::NoSaddle);
    }
    Ok(AmplitudeEstimate::assemble(
        Method::ThimbleExact,
        terms,
        warnings,
    ))
}

/// Saddles of F inside `window`.
pub fn find_saddles<E: Exponent + ?Sized>(exp: &E, window: &Window) -> SaddleSearch {
    Landscape::new(exp, *window, ThimbleConfig::default()).find_saddles()
}

/// One half of a descent or ascent of `saddle`, traced inside the default
/// box around `window`.
pub fn trace_thimble<E: Exponent + ?Sized>(
    exp: &E,
    window: &Window,
    saddle: &Saddle,
    kind: ThimbleKind,
    direction: Direction,
) -> Result<Thimble> {
    Landscape::new(exp, *window, ThimbleConfig::default()).trace(saddle, kind, direction)
}

/// Full saddle structure of a model on its default search window.
pub fn analyze_model(model: &crate::ModelSpec, config: ThimbleConfig) -> Result<Structure> {
    model.validate()?;
    Landscape::new(model, model.default_window(), config).analyze(false)
}
